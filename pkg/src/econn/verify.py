"""Residuals of the metricity condition and its consequences, and a
least-squares oracle that solves the metricity system for the torsion.

Residual tensors are computed in coordinates; global statements are
measured in both the coordinate basis and the adapted frame and the larger
value is kept. Statements restricted to ``ker eta`` are measured on the
horizontal block of the adapted frame only.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .checks import IdentityCheck
from .errors import IllConditionedSystem
from .fields import cov_deriv_G, cov_deriv_g, covariant_derivative
from .tensor import change_basis
from .tolerances import tolerances
from .torsion import (DEFAULT_QT_VARIANT, QT_VARIANTS, connection_coefficients,
                      contorsion_from_torsion, special_condition_residual,
                      torsion_weak_acm, torsion_weak_hermitian)

RIDGE = 1e-12
RIDGE_COND_LIMIT = 1e8
ORACLE_MAX_DIM = 7


def ev(t, *slots):
    """Evaluate ``t`` with each slot fed by ``(letter, A)`` or a fixed vector.

    ``("x", A)`` feeds ``A X``; ``("x", None)`` feeds ``X``; a 1-d array feeds
    that vector. The result is indexed ``[x, y, z]``, broadcast over letters
    that do not occur.
    """
    d = t.shape[0]
    ops, subs, used = [t], ["abc"], []
    for s, slot in zip("abc", slots):
        if isinstance(slot, tuple):
            letter, A = slot
            ops.append(np.eye(d) if A is None else A)
            subs.append(s + letter)
            if letter not in used:
                used.append(letter)
        else:
            ops.append(np.asarray(slot))
            subs.append(s)
    out = "".join(c for c in "xyz" if c in used)
    r = np.einsum(",".join(subs) + "->" + out, *ops)
    shape = [d if c in used else 1 for c in "xyz"]
    return np.broadcast_to(r.reshape(shape), (d, d, d))


def _x(A=None):
    return ("x", A)


def _y(A=None):
    return ("y", A)


def _z(A=None):
    return ("z", A)


def _xyz(d, vec, letter):
    shape = [1, 1, 1]
    shape["xyz".index(letter)] = d
    return np.asarray(vec).reshape(shape)


def both_bases(R, geo):
    """Max of ``|R|`` in coordinates and in the adapted frame."""
    return max(float(np.abs(R).max()), float(np.abs(change_basis(R, geo.frame)).max()))


def horizontal(R, geo):
    h = geo.n_horizontal
    return float(np.abs(change_basis(R, geo.frame)[:h, :h, :h]).max())


# -- point-wise residual tensors -----------------------------------------------

def metricity_tensor(geo, T):
    """``(nabla_X G)(Y, Z) + G(T(X, Y), Z)`` for the connection built from ``T``."""
    gam = connection_coefficients(T, geo)
    Tvec = np.einsum("ml,ijl->mij", geo.ginv, T)
    return cov_deriv_G(geo, gam) + np.einsum("mij,mk->ijk", Tvec, geo.G)


def metricity_point(geo, T):
    return both_bases(metricity_tensor(geo, T), geo)


def qt_point(T, Q):
    r1 = np.einsum("ajk,ai->ijk", T, Q) - np.einsum("iak,aj->ijk", T, Q)
    r2 = np.einsum("iak,aj->ijk", T, Q) - np.einsum("ija,ak->ijk", T, Q)
    return max(float(np.abs(r1).max()), float(np.abs(r2).max()))


def qt_tensors(T, Q):
    r1 = np.einsum("ajk,ai->ijk", T, Q) - np.einsum("iak,aj->ijk", T, Q)
    r2 = np.einsum("iak,aj->ijk", T, Q) - np.einsum("ija,ak->ijk", T, Q)
    return r1, r2


def cyclic_residual(geo, T):
    """``dF(X,Y,Z) + T(X,Y,Z) + T(Y,Z,X) + T(Z,X,Y)``."""
    return geo.dF + T + np.einsum("yzx->xyz", T) + np.einsum("zxy->xyz", T)


def prvanovic_residual(geo, T):
    """Six-term expression of ``2 (nabla^g_X F)(Y, Z)`` through ``T``."""
    f = geo.f
    rhs = (-ev(T, _z(), _x(), _y()) - ev(T, _x(), _y(), _z())
           - ev(T, _z(f), _x(), _y(f)) - ev(T, _x(), _y(f), _z(f))
           + ev(T, _y(), _z(f), _x(f)) + ev(T, _y(f), _z(), _x(f)))
    return 2 * geo.nabla_F - rhs


def connection_derivatives(geo, T):
    """``(nabla g, nabla F)`` of the connection built from ``T``, indexed ``[X, Y, Z]``."""
    gam = connection_coefficients(T, geo)
    ng = cov_deriv_g(geo, gam)
    nF = covariant_derivative(geo.F, geo.dF_partial, gam)
    return ng, nF


def split_g_residual(geo, T, ng=None):
    """``2 (nabla_X g)(Y,Z) - T(Z,X,Y+fY) + T(X,Y,Z+fZ)``."""
    if ng is None:
        ng, _ = connection_derivatives(geo, T)
    P = np.eye(geo.dim) + geo.f
    return 2 * ng - ev(T, _z(), _x(), _y(P)) + ev(T, _x(), _y(), _z(P))


def split_F_residual(geo, T, nF=None):
    """``2 (nabla_Z F)(X,Y) + T(Z,X,Y+fY) + T(Y,Z,X+fX)``, indexed ``[X, Y, Z]``."""
    if nF is None:
        _, nF = connection_derivatives(geo, T)
    P = np.eye(geo.dim) + geo.f
    lhs = 2 * np.einsum("zxy->xyz", nF)
    return lhs + ev(T, _z(), _x(), _y(P)) + ev(T, _y(), _z(), _x(P))


def cond_E2_residual(geo, T):
    """Skew-symmetry of ``K_X`` written through ``T``."""
    f = geo.f
    return (ev(T, _x(), _y(), _z()) - ev(T, _z(), _x(), _y())
            - ev(T, _z(), _x(), _y(f)) + ev(T, _x(), _y(), _z(f)))


def cond_2K_residual(geo, T):
    """``T(Y, Z, fX) + T(X, Z, fY)``."""
    f = geo.f
    return ev(T, _y(), _z(), _x(f)) + ev(T, _x(), _z(), _y(f))


def qt_dF_residuals(geo):
    Q = geo.Q
    a = ev(geo.dF, _x(Q), _y(), _z())
    b = ev(geo.dF, _x(), _y(Q), _z())
    c = ev(geo.dF, _x(), _y(), _z(Q))
    return a - b, b - c


def qt_nablaF_residuals(geo):
    Q = geo.Q
    nF = geo.nabla_F
    a = ev(nF, _x(Q), _y(), _z())
    b = ev(nF, _x(), _y(Q), _z())
    c = ev(nF, _x(), _y(), _z(Q))
    return a - b, b - c


def _eta_terms(T, geo, sign_xi_x):
    """``T(f^2 Z, X, xi) + T(X or (xi, X), ...)`` bracket shared by the two lemma identities."""
    f2 = geo.f @ geo.f
    f = geo.f
    xi = geo.xi
    first = ev(T, _z(f2), _x(), xi)
    second = ev(T, _x(), xi, _z(f2)) if sign_xi_x else ev(T, xi, _x(), _z(f2))
    return first + second - ev(T, xi, _z(f), _x(f))


def lemma_fyfz2_residual(geo, T):
    d, f, Q = geo.dim, geo.f, geo.Q
    f2 = f @ f
    I = np.eye(d)
    nF, dF = geo.nabla_F, geo.dF
    eta_y = _xyz(d, geo.eta, "y")
    eta_z = _xyz(d, geo.eta, "z")
    lhs = ev(T, _y(f), _z(f), _x(I + Q))
    rhs = (-ev(T, _y(), _z(), _x(Q + Q @ Q))
           + eta_z * ev(T, _y(), geo.xi, _x(I + Q))
           + eta_y * _eta_terms(T, geo, True)
           - 2 * ev(nF, _x(), _y(), _z(f2))
           + 2 * ev(nF, _x(), _y(f), _z(f))
           + ev(dF, _y(), _z(f2), _x(I + Q))
           - ev(dF, _y(f), _z(f), _x(I + Q)))
    return lhs - rhs


def lemma_fyfz3_residual(geo, T):
    d, f, Q = geo.dim, geo.f, geo.Q
    f2 = f @ f
    I = np.eye(d)
    nF, dF = geo.nabla_F, geo.dF
    eta_y = _xyz(d, geo.eta, "y")
    eta_z = _xyz(d, geo.eta, "z")
    lhs = ev(T, _y(f), _z(), _x(I + Q))
    rhs = (-ev(T, _y(), _z(f), _x(I + Q))
           + ev(T, _y(), _z(), _x(Q @ Q - I))
           - eta_y * _eta_terms(T, geo, False)
           + eta_z * ev(T, geo.xi, _y(), _x(I + Q))
           + 2 * ev(nF, _x(), _y(), _z(f2))
           - 2 * ev(nF, _x(), _y(f), _z(f))
           + 2 * ev(nF, _x(I + Q), _y(), _z())
           - ev(dF, _y(), _z(I + f2), _x(I + Q)))
    return lhs - rhs


def lemma_fyfz3_rederived_residual(geo, T):
    """Counterpart of :func:`lemma_fyfz3_residual` with ``f`` kept in the third slot.

    Applying the cyclic identity to the six-term expression gives
    ``2(n_X F)(Y,Z) = dF(Y,Z,X) + T(Y,Z,X) + dF(fY,fZ,X) + T(fY,fZ,X)
    + T(Y,fZ,fX) + T(fY,Z,fX)``; this evaluates that form at ``(I+Q)X``
    with ``T(fY,fZ,(I+Q)X)`` replaced by the first lemma identity.
    """
    d, f, Q = geo.dim, geo.f, geo.Q
    f2 = f @ f
    I = np.eye(d)
    nF, dF = geo.nabla_F, geo.dF
    eta_y = _xyz(d, geo.eta, "y")
    eta_z = _xyz(d, geo.eta, "z")
    IQ = I + Q
    fyfz = (-ev(T, _y(), _z(), _x(Q + Q @ Q))
            + eta_z * ev(T, _y(), geo.xi, _x(IQ))
            + eta_y * _eta_terms(T, geo, True)
            - 2 * ev(nF, _x(), _y(), _z(f2))
            + 2 * ev(nF, _x(), _y(f), _z(f))
            + ev(dF, _y(), _z(f2), _x(IQ))
            - ev(dF, _y(f), _z(f), _x(IQ)))
    lhs = ev(T, _y(f), _z(), _x(f @ IQ))
    rhs = (-ev(T, _y(), _z(f), _x(f @ IQ))
           - ev(T, _y(), _z(), _x(IQ))
           - ev(dF, _y(), _z(), _x(IQ))
           - fyfz
           - ev(dF, _y(f), _z(f), _x(IQ))
           + 2 * ev(nF, _x(IQ), _y(), _z()))
    return lhs - rhs


def acm_horizontal_residuals(geo):
    """``(n_X F)(fY,fZ) + (n_X F)(Y,Z)`` and ``(n_X F)(fY,Z) - (n_X F)(Y,fZ)``."""
    nF, f = geo.nabla_F, geo.f
    a = ev(nF, _x(), _y(f), _z(f)) + nF
    b = ev(nF, _x(), _y(f), _z()) - ev(nF, _x(), _y(), _z(f))
    return a, b


def spE_residual(geo):
    fr = geo.frame
    h = geo.n_horizontal
    nF = change_basis(geo.nabla_F, fr)[:h, :h, :h]
    fh = np.linalg.solve(fr, geo.f @ fr)[:h, :h]
    return special_condition_residual(nF, fh)


def sasakian_spot_residuals(geo, T):
    """Distances of ``T`` from the closed Sasakian torsion values in the adapted frame.

    Returns residuals of ``T(xi,Y,X) - F((I+f)Y,X)``, ``T(X,Y,xi) + 2F(X,Y)``
    and the horizontal block, all on horizontal ``X, Y``.
    """
    fr = geo.frame
    h = geo.n_horizontal
    Ta = change_basis(T, fr)
    Fa = change_basis(geo.F, fr)[:h, :h]
    fa = np.linalg.solve(fr, geo.f @ fr)[:h, :h]
    expect_xi = np.einsum("ay,ax->yx", np.eye(h) + fa, Fa)
    return {
        "T(xi,Y,X)=F((I+f)Y,X)": float(np.abs(Ta[h, :h, :h] - expect_xi).max()),
        "T(X,Y,xi)=-2F(X,Y)": float(np.abs(Ta[:h, :h, h] + 2 * Fa).max()),
        "horizontal T=0": float(np.abs(Ta[:h, :h, :h]).max()),
    }


# -- sample-level checks -------------------------------------------------------

def _tol(mode, overrides):
    return tolerances(mode, overrides)


def _geometries(bundle, sample, mode):
    return [bundle.at(p, mode) for p in sample]


def _torsions(geos, torsion_fn):
    out = []
    for geo in geos:
        diag = {}
        out.append((torsion_fn(geo, diagnostics=diag), diag))
    return out


def metricity_residual(bundle, torsion_fn, sample, mode=None, tol_overrides=None):
    """Einstein metricity residual of ``torsion_fn`` over ``sample``.

    ``torsion_fn(geo, diagnostics=None)`` returns a torsion array; any
    ``econn.torsion`` entry point or a :class:`~econn.torsion.TorsionField`
    ``at`` method fits.
    """
    tol = _tol(mode, tol_overrides)
    res = []
    for geo in _geometries(bundle, sample, mode):
        res.append(metricity_point(geo, torsion_fn(geo, diagnostics=None)))
    return IdentityCheck.from_residuals("metricity", res, tol["accept_tol"])


def qt_residual(bundle, torsion_fn, sample, mode=None, tol_overrides=None):
    """Q-T-condition residual of the torsion over ``sample``."""
    tol = _tol(mode, tol_overrides)
    res = []
    for geo in _geometries(bundle, sample, mode):
        res.append(qt_point(torsion_fn(geo, diagnostics=None), geo.Q))
    return IdentityCheck.from_residuals("Q-T-condition", res, tol["assembly_tol"])


def implication(r_premise, r_conclusion, tol):
    """Residual of ``premise => conclusion``: the conclusion's residual when the premise holds."""
    return r_conclusion if r_premise <= tol else 0.0


def _point_identities(geo, T, diag, tol, special):
    """Named residuals of one point. Values are ``(residual, tolerance_key)``."""
    acc, asm = "accept_tol", "assembly_tol"
    out = {}
    out["metricity"] = (metricity_point(geo, T), acc)
    out.update({f"assembly: {k}": (v, asm) for k, v in diag.items() if k != "special_condition"})
    out["cyclic dF + T"] = (both_bases(cyclic_residual(geo, T), geo), acc)
    out["nabla^g F six-term"] = (both_bases(prvanovic_residual(geo, T), geo), acc)
    ng, nF = connection_derivatives(geo, T)
    out["split: nabla g"] = (both_bases(split_g_residual(geo, T, ng), geo), acc)
    out["split: nabla F"] = (both_bases(split_F_residual(geo, T, nF), geo), acc)

    K = contorsion_from_torsion(T, geo.f)
    out["torsion from K"] = (both_bases(K - K.transpose(1, 0, 2) - T, geo), asm)
    gam = connection_coefficients(T, geo)
    Tg = np.einsum("mij,mk->ijk", gam - gam.transpose(0, 2, 1), geo.g)
    out["torsion from coefficients"] = (both_bases(Tg - T, geo), asm)

    t_acc = tol[acc]
    r_i = both_bases(K + K.transpose(0, 2, 1), geo)
    r_ii = both_bases(ng, geo)
    r_iii = both_bases(nF + nF.transpose(1, 0, 2), geo)
    r_e2 = both_bases(cond_E2_residual(geo, T), geo)
    out["lemma (i)=>(ii)"] = (implication(r_i, r_ii, t_acc), acc)
    out["lemma (ii)=>(i)"] = (implication(r_ii, r_i, t_acc), acc)
    out["lemma (ii)=>(iii)"] = (implication(r_ii, r_iii, t_acc), acc)
    out["lemma (iii)=>(ii)"] = (implication(r_iii, r_ii, t_acc), acc)
    out["K_X skew <=> T-condition"] = (max(implication(r_i, r_e2, t_acc),
                                           implication(r_e2, r_i, t_acc)), acc)

    if geo.bundle.is_contact:
        out["Q-T-condition"] = (qt_point(T, geo.Q), asm)
        a, b = qt_dF_residuals(geo)
        out["Q-T lemma: dF"] = (max(both_bases(a, geo), both_bases(b, geo)), acc)
        a, b = qt_nablaF_residuals(geo)
        out["Q-T lemma: nabla^g F"] = (max(both_bases(a, geo), both_bases(b, geo)), acc)
        out["Q-T lemma: T(fY,fZ,(I+Q)X)"] = (both_bases(lemma_fyfz2_residual(geo, T), geo), acc)
        out["Q-T lemma: T(fY,Z,(I+Q)X)"] = (both_bases(lemma_fyfz3_residual(geo, T), geo), acc)
        out["Q-T lemma: T(fY,Z,f(I+Q)X) rederived"] = (
            both_bases(lemma_fyfz3_rederived_residual(geo, T), geo), acc)
        if np.abs(geo.Q - np.eye(geo.dim)).max() <= tol["structure_tol"]:
            a, b = acm_horizontal_residuals(geo)
            out["ker eta: (nF)(fY,fZ)=-(nF)(Y,Z)"] = (horizontal(a, geo), acc)
            out["ker eta: (nF)(fY,Z)=(nF)(Y,fZ)"] = (horizontal(b, geo), acc)
    if special:
        out["special: T(Y,Z,fX)+T(X,Z,fY)"] = (both_bases(cond_2K_residual(geo, T), geo), acc)
        if geo.bundle.is_contact:
            out["special: condition on nabla^g F"] = (spE_residual(geo), acc)
        out["special: K_X Y = -K_Y X"] = (both_bases(K + K.transpose(1, 0, 2), geo), acc)
        sym = 0.5 * (gam + gam.transpose(0, 2, 1))
        out["special: symmetric part = Levi-Civita"] = (float(np.abs(sym - geo.gamma).max()), acc)
        out["special: K = T/2"] = (both_bases(K - 0.5 * T, geo), acc)
    return out


def identity_suite(bundle, torsion_fn, sample, mode=None, tol_overrides=None, special=False):
    """All identity checks for ``torsion_fn`` on ``bundle`` over ``sample``.

    Equivalences are checked as implications: each direction reports the
    conclusion's residual at points where the premise holds, 0 elsewhere.
    """
    tol = _tol(mode, tol_overrides)
    per_name = {}
    keys = {}
    geos = _geometries(bundle, sample, mode)
    for geo, (T, diag) in zip(geos, _torsions(geos, torsion_fn)):
        diag = dict(diag)
        diag.setdefault("antisymmetry", 0.0)
        for name, (r, key) in _point_identities(geo, T, diag, tol, special).items():
            per_name.setdefault(name, []).append(r)
            keys[name] = key
    return [IdentityCheck.from_residuals(n, per_name[n], tol[keys[n]]) for n in per_name]


# -- oracle --------------------------------------------------------------------

def torsion_basis(d):
    """Basis of tensors antisymmetric in slots 1, 2: unknown ``(i<j, k)`` -> ``e_ijk - e_jik``."""
    idx = [(i, j, k) for i in range(d) for j in range(i + 1, d) for k in range(d)]
    return idx


def _expand(x, idx, d):
    T = np.zeros((d, d, d))
    for c, (i, j, k) in zip(x, idx):
        T[i, j, k] += c
        T[j, i, k] -= c
    return T


def metricity_system(geo, impose_qt=False):
    """``(A, rhs, n_metricity_rows)`` with ``A x - rhs`` the residual vector.

    The first block of rows is the coordinate metricity residual, the second
    (when ``impose_qt``) the two Q-T-condition differences.
    """
    d = geo.dim
    idx = torsion_basis(d)
    b0 = metricity_tensor(geo, np.zeros((d, d, d))).ravel()
    cols = []
    qcols = []
    for n in range(len(idx)):
        e = np.zeros(len(idx))
        e[n] = 1.0
        T = _expand(e, idx, d)
        cols.append(metricity_tensor(geo, T).ravel() - b0)
        if impose_qt:
            r1, r2 = qt_tensors(T, geo.Q)
            qcols.append(np.concatenate([r1.ravel(), r2.ravel()]))
    A = np.column_stack(cols)
    rhs = -b0
    m = A.shape[0]
    if impose_qt:
        A = np.vstack([A, np.column_stack(qcols)])
        rhs = np.concatenate([rhs, np.zeros(A.shape[0] - m)])
    return A, rhs, m


def solve_least_squares(A, rhs, path="auto"):
    """Least squares by ridge-regularized normal equations or pivoted QR.

    ``path="auto"`` takes the normal equations when ``cond(A)`` is at most
    ``RIDGE_COND_LIMIT`` and QR otherwise. Returns ``(x, path_used, cond)``.
    """
    sv = np.linalg.svd(A, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
    if path == "auto":
        path = "normal" if cond <= RIDGE_COND_LIMIT else "qr"
    if path == "normal":
        N = A.T @ A + RIDGE * np.eye(A.shape[1])
        x = scipy.linalg.solve(N, A.T @ rhs, assume_a="pos")
    elif path == "qr":
        x = scipy.linalg.lstsq(A, rhs, lapack_driver="gelsy")[0]
    else:
        raise ValueError(f"unknown least-squares path {path!r}")
    return x, path, cond


@dataclass
class OracleSolution:
    """Oracle torsion at one point and its quality figures.

    ``unique`` is False when the system is rank deficient; then
    ``torsion`` is one minimizer and comparisons use the distance from the
    formula torsion to the whole minimizer set.
    """
    point: list
    torsion: np.ndarray
    residual: float
    metricity_residual: float
    qt_residual: float
    rank: int
    unknowns: int
    cond: float
    path: str
    impose_qt: bool
    ill_conditioned: bool = False
    comparisons: dict = field(default_factory=dict)

    @property
    def unique(self):
        return self.rank == self.unknowns

    def to_dict(self):
        return {
            "point": list(self.point),
            "residual": self.residual,
            "metricity_residual": self.metricity_residual,
            "qt_residual": self.qt_residual,
            "rank": self.rank,
            "unknowns": self.unknowns,
            "unique": self.unique,
            "cond": self.cond if np.isfinite(self.cond) else None,
            "path": self.path,
            "impose_qt": self.impose_qt,
            "ill_conditioned": self.ill_conditioned,
            "comparisons": self.comparisons,
        }


class Oracle:
    """Solved metricity system at one point, reusable for several comparisons."""

    def __init__(self, geo, impose_qt=True, path="auto"):
        self.geo = geo
        self.impose_qt = impose_qt
        A, rhs, m = metricity_system(geo, impose_qt)
        self.A, self.rhs, self.m = A, rhs, m
        self.idx = torsion_basis(geo.dim)
        x, used, cond = solve_least_squares(A, rhs, path)
        self.x, self.path, self.cond = x, used, cond
        self.rank = int(np.linalg.matrix_rank(A))
        self._pinv = None

    def vector(self, T):
        return np.array([T[i, j, k] for (i, j, k) in self.idx])

    def torsion(self):
        return _expand(self.x, self.idx, self.geo.dim)

    def residuals(self, x):
        r = self.A @ x - self.rhs
        mres = float(np.abs(r[:self.m]).max())
        qres = float(np.abs(r[self.m:]).max()) if r.size > self.m else 0.0
        return float(np.abs(r).max()), mres, qres

    def nearest_solution(self, T):
        """The minimizer closest to ``T`` (``T`` itself projected onto the solution set)."""
        if self.rank == len(self.idx):
            return self.torsion()
        if self._pinv is None:
            self._pinv = np.linalg.pinv(self.A)
        x0 = self.vector(T)
        x = x0 + self._pinv @ (self.rhs - self.A @ x0)
        return _expand(x, self.idx, self.geo.dim)

    def discrepancy(self, T):
        """``|T_oracle - T|_inf`` against the nearest minimizer."""
        return float(np.abs(self.nearest_solution(T) - T).max())

    def certificate(self, T):
        """Residuals of ``T`` itself in the oracle system."""
        total, mres, qres = self.residuals(self.vector(T))
        return {"residual": total, "metricity": mres, "qt": qres}

    def solution(self):
        total, mres, qres = self.residuals(self.x)
        return OracleSolution(
            point=[float(c) for c in self.geo.point], torsion=self.torsion(),
            residual=total, metricity_residual=mres, qt_residual=qres,
            rank=self.rank, unknowns=len(self.idx), cond=self.cond, path=self.path,
            impose_qt=self.impose_qt, ill_conditioned=not self.cond <= RIDGE_COND_LIMIT)


def oracle_solve(bundle, p, impose_qt=True, mode=None, formula=None, path="auto",
                 strict=False):
    """Solve the metricity system at ``p`` for the torsion.

    ``formula`` may be a torsion array to compare against; the comparison
    dict then holds the discrepancy and the formula's own residuals. With
    ``strict=True`` an ill-conditioned system raises
    :class:`IllConditionedSystem` instead of being flagged.
    """
    if bundle.dim > ORACLE_MAX_DIM:
        raise ValueError(f"oracle limited to d <= {ORACLE_MAX_DIM}")
    geo = bundle.at(p, mode)
    orc = Oracle(geo, impose_qt, path)
    sol = orc.solution()
    if strict and sol.ill_conditioned and sol.unique:
        raise IllConditionedSystem(f"oracle system condition {sol.cond:.3e}")
    if formula is not None:
        sol.comparisons["formula"] = {"discrepancy": orc.discrepancy(formula),
                                      **orc.certificate(formula)}
    return sol


def formula_for(bundle, variant=DEFAULT_QT_VARIANT):
    """Default closed-form torsion for a bundle: the Q-T solution of its type."""
    if bundle.is_contact:
        return lambda geo, diagnostics=None: torsion_weak_acm(geo, variant, diagnostics)
    return lambda geo, diagnostics=None: torsion_weak_hermitian(geo, variant, diagnostics)


def oracle_comparison(bundle, sample, mode=None, impose_qt=True, torsion_fn=None):
    """Per-point oracle solutions plus a variant ranking for the Q-T solution.

    Returns ``(solutions, summary)``. ``summary["variants"]`` maps each
    reading of the ambiguous last term to its max discrepancy and
    ``summary["winner"]`` names the smallest.
    """
    sols = []
    worst = {v: 0.0 for v in QT_VARIANTS}
    for p in sample:
        geo = bundle.at(p, mode)
        orc = Oracle(geo, impose_qt)
        sol = orc.solution()
        for v in QT_VARIANTS:
            T = formula_for(bundle, v)(geo)
            c = {"discrepancy": orc.discrepancy(T), **orc.certificate(T)}
            sol.comparisons[v] = c
            worst[v] = max(worst[v], c["discrepancy"])
        if torsion_fn is not None:
            T = torsion_fn(geo, diagnostics=None)
            sol.comparisons["formula"] = {"discrepancy": orc.discrepancy(T), **orc.certificate(T)}
        sols.append(sol)
    winner = min(QT_VARIANTS, key=lambda v: (worst[v], QT_VARIANTS.index(v)))
    return sols, {"variants": worst, "winner": winner,
                  "tie": len({round(w, 14) for w in worst.values()}) == 1}
