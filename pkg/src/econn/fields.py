"""Smooth tensor fields on a chart and their first covariant derivatives.

A :class:`FieldBundle` holds closures ``coords -> components`` for ``g``,
``f``, ``xi``, ``eta`` and ``Q``. Closures must work on plain float arrays and
on arrays of :class:`econn.dual.Dual` (use the helpers in :mod:`econn.dual`).
:meth:`FieldBundle.at` evaluates everything needed downstream at one point,
with derivatives taken either by dual numbers or by a 4th-order central
difference stencil.

Index layout of derivative arrays: the differentiation index comes first,
``dg[k, i, j] = d_k g_ij`` and ``nabla_F[k, i, j] = (nabla^g_{e_k} F)(e_i, e_j)``.
Christoffel symbols are ``gamma[m, i, j] = Gamma^m_{ij}`` with
``nabla_{e_i} e_j = Gamma^m_{ij} e_m``.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from . import dual
from .errors import DerivativeFailure, EvaluationFailure
from .tensor import metric_inverse
from .tolerances import DUAL, FD, MODES, default_mode


@dataclass(frozen=True)
class FieldBundle:
    dim: int
    metric: Callable
    f: Callable
    xi: Optional[Callable] = None
    eta: Optional[Callable] = None
    Q: Optional[Callable] = None
    name: str = "bundle"
    params: dict = field(default_factory=dict)
    lower: Optional[tuple] = None
    upper: Optional[tuple] = None
    fd_step: Optional[float] = None

    @property
    def is_contact(self):
        """True for odd-dimensional (weak) a.c.m. data, False for Hermitian data."""
        return self.xi is not None

    def bounds(self):
        lo = np.full(self.dim, -1.0) if self.lower is None else np.asarray(self.lower, float)
        hi = np.full(self.dim, 1.0) if self.upper is None else np.asarray(self.upper, float)
        return lo, hi

    def sample(self, n, seed=0):
        """``n`` seeded uniform points in the chart box."""
        lo, hi = self.bounds()
        rng = np.random.default_rng(seed)
        return [lo + (hi - lo) * rng.random(self.dim) for _ in range(n)]

    def _components(self):
        comps = {"g": self.metric, "f": self.f}
        if self.xi is not None:
            comps["xi"] = self.xi
            comps["eta"] = self.eta
        if self.Q is not None:
            comps["Q"] = self.Q
        return comps

    def values(self, p):
        """Plain component values at ``p`` (no derivatives)."""
        p = np.asarray(p, dtype=float)
        out = {}
        for key, fn in self._components().items():
            v = np.asarray(fn(p), dtype=float)
            if not np.all(np.isfinite(v)):
                raise EvaluationFailure(f"{self.name}: non-finite {key} at {p.tolist()}")
            out[key] = v
        return out

    def jets(self, p, mode=None):
        """Values and first partials of every component field at ``p``.

        Partials carry the differentiation index first.
        """
        mode = mode or default_mode()
        if mode not in MODES:
            raise ValueError(f"unknown derivative mode {mode!r}")
        p = np.asarray(p, dtype=float)
        if mode == DUAL:
            return self._jets_dual(p)
        return self._jets_fd(p)

    def _jets_dual(self, p):
        seeded = dual.seed(p)
        out = {}
        for key, fn in self._components().items():
            vals, grads = dual.split(fn(seeded), self.dim)
            if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(grads))):
                raise EvaluationFailure(f"{self.name}: non-finite {key} at {p.tolist()}")
            out[key] = (vals, np.moveaxis(grads, -1, 0))
        return out

    def _jets_fd(self, p):
        vals = self.values(p)
        if self.fd_step is not None:
            steps = np.full(self.dim, float(self.fd_step))
        else:
            steps = np.maximum(1e-3, 1e-3 * np.abs(p))
        derivs = {key: np.empty((self.dim,) + v.shape) for key, v in vals.items()}
        fns = self._components()
        for k in range(self.dim):
            h = steps[k]
            shifted = {}
            for m in (-2, -1, 1, 2):
                q = p.copy()
                q[k] += m * h
                shifted[m] = {key: np.asarray(fn(q), dtype=float) for key, fn in fns.items()}
            for key in vals:
                dk = (shifted[-2][key] - 8.0 * shifted[-1][key]
                      + 8.0 * shifted[1][key] - shifted[2][key]) / (12.0 * h)
                if not np.all(np.isfinite(dk)):
                    raise DerivativeFailure(
                        f"{self.name}: non-finite stencil for d{k} {key} at {p.tolist()}")
                derivs[key][k] = dk
        return {key: (vals[key], derivs[key]) for key in vals}

    def at(self, p, mode=None):
        """Evaluate the full first-order geometry at ``p``."""
        mode = mode or default_mode()
        return PointGeometry(self, np.asarray(p, dtype=float), mode, self.jets(p, mode))


class PointGeometry:
    """Everything the torsion formulas need at one chart point.

    Attributes are plain ndarrays: ``g, ginv, f, F, G, xi, eta, Q`` and the
    derivative quantities ``dg, dF_partial, gamma, nabla_F, dF``.
    """

    def __init__(self, bundle, p, mode, jets):
        self.bundle = bundle
        self.point = p
        self.mode = mode
        self.dim = bundle.dim
        g, dg = jets["g"]
        f, df = jets["f"]
        # closures may return almost-symmetric g from float noise
        self.g = 0.5 * (g + g.T)
        self.dg = 0.5 * (dg + dg.transpose(0, 2, 1))
        self.ginv = metric_inverse(self.g)
        self.f = f
        self.df = df
        F = self.g @ f
        self.F = 0.5 * (F - F.T)
        dF = np.einsum("kil,lj->kij", self.dg, f) + np.einsum("il,klj->kij", self.g, df)
        self.dF_partial = 0.5 * (dF - dF.transpose(0, 2, 1))
        self.G = self.g + self.F
        if "xi" in jets:
            self.xi, self.dxi = jets["xi"]
            self.eta, self.deta = jets["eta"]
        else:
            self.xi = self.dxi = self.eta = self.deta = None
        if "Q" in jets:
            self.Q, self.dQ = jets["Q"]
        elif self.xi is not None:
            self.Q = -f @ f + np.outer(self.xi, self.eta)
            self.dQ = None
        else:
            self.Q = -f @ f
            self.dQ = None

    @cached_property
    def gamma(self):
        dg = self.dg
        # Koszul: 1/2 g^{ml} (d_i g_jl + d_j g_il - d_l g_ij)
        low = dg + dg.transpose(1, 0, 2) - np.einsum("lij->ijl", dg)
        return 0.5 * np.einsum("ml,ijl->mij", self.ginv, low)

    @cached_property
    def nabla_F(self):
        gam = self.gamma
        return (self.dF_partial
                - np.einsum("lki,lj->kij", gam, self.F)
                - np.einsum("lkj,il->kij", gam, self.F))

    @cached_property
    def dF(self):
        d = self.dF_partial
        return d + np.einsum("jki->ijk", d) + np.einsum("kij->ijk", d)

    @cached_property
    def dF_cyclic(self):
        n = self.nabla_F
        return n + np.einsum("jki->ijk", n) + np.einsum("kij->ijk", n)

    @cached_property
    def nabla_f(self):
        """``nabla_f[k, i, j] = ((nabla^g_{e_k} f) e_j)^i``."""
        gam = self.gamma
        return (self.df
                + np.einsum("ikl,lj->kij", gam, self.f)
                - np.einsum("lkj,il->kij", gam, self.f))

    @cached_property
    def nabla_xi(self):
        """``nabla_xi[k, m] = (nabla^g_{e_k} xi)^m``."""
        if self.xi is None:
            return None
        return self.dxi + np.einsum("mkj,j->km", self.gamma, self.xi)

    def xi_geodesic_defect(self):
        """Norm of ``nabla^g_xi xi`` (0 for Hermitian data)."""
        if self.xi is None:
            return 0.0
        return float(np.linalg.norm(self.xi @ self.nabla_xi))

    @cached_property
    def frame(self):
        """Adapted frame as columns: g-orthonormal horizontal vectors, then xi.

        Horizontal vectors come from projecting coordinate vectors with
        ``X - eta(X) xi`` and Gram-Schmidt in coordinate index order. For
        Hermitian data the frame is just a g-orthonormalized coordinate basis.
        """
        d = self.dim
        if self.xi is not None:
            proj = np.eye(d) - np.outer(self.xi, self.eta)
            want = d - 1
        else:
            proj = np.eye(d)
            want = d
        g = self.g
        vecs = []
        for i in range(d):
            v = proj[:, i].copy()
            for w in vecs:
                v -= (w @ g @ v) * w
            nrm = np.sqrt(abs(v @ g @ v))
            if nrm > 1e-8 and len(vecs) < want:
                vecs.append(v / nrm)
        if len(vecs) != want:
            raise EvaluationFailure("could not build an adapted frame")
        if self.xi is not None:
            vecs.append(self.xi)
        return np.column_stack(vecs)

    @property
    def n_horizontal(self):
        return self.dim - 1 if self.xi is not None else self.dim


def christoffel(bundle, p, mode=None):
    return bundle.at(p, mode).gamma


def cov_deriv_F(bundle, p, mode=None):
    """``(nabla^g F)(Z, X, Y)`` with the direction in the first slot."""
    return bundle.at(p, mode).nabla_F


def exterior_derivative_F(bundle, p, mode=None):
    """``dF`` by the unnormalized coboundary formula on coordinate fields."""
    return bundle.at(p, mode).dF


def covariant_derivative(tensor, dtensor, gamma):
    """``(nabla_{e_k} t)_{ij}`` for a rank-2 covariant field and any connection.

    ``gamma`` may be non-symmetric; ``dtensor[k, i, j] = d_k t_ij``.
    """
    return (dtensor
            - np.einsum("lki,lj->kij", gamma, tensor)
            - np.einsum("lkj,il->kij", gamma, tensor))


def cov_deriv_G(geo, gamma):
    """``(nabla_X G)(Y, Z)`` for the connection with coefficients ``gamma``."""
    return covariant_derivative(geo.G, geo.dg + geo.dF_partial, gamma)


def cov_deriv_g(geo, gamma):
    return covariant_derivative(geo.g, geo.dg, gamma)
