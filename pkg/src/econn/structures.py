"""Builders and validators for (weak) almost contact metric structures.

Coordinate layouts:

* Heisenberg model on R^{2n+1}: ``(x_1..x_n, y_1..y_n, z)``.
* Hermitian factors on R^{2n}: pairs ``(x_1, x_2), (x_3, x_4), ...`` with the
  standard rotation ``J e_1 = e_2, J e_2 = -e_1`` in each pair.
* Products with a line append the line coordinate ``t`` last.
"""

import math
from dataclasses import replace

import numpy as np

from . import dual
from .checks import IdentityCheck, ValidationReport
from .errors import InvalidFactor, NonPositiveLambda
from .fields import FieldBundle

# F = SASAKI_DETA_FACTOR * (d_i eta_j - d_j eta_i) for the Heisenberg builder
SASAKI_DETA_FACTOR = 0.5


def _outer(a, b):
    return np.multiply.outer(np.asarray(a, dtype=object), np.asarray(b, dtype=object))


def standard_rotation(m):
    """Block-diagonal ``J`` on R^m (m even), ``J e_{2i} = e_{2i+1}``."""
    if m % 2:
        raise ValueError("rotation needs an even dimension")
    J = np.zeros((m, m))
    for i in range(0, m, 2):
        J[i + 1, i] = 1.0
        J[i, i + 1] = -1.0
    return J


# -- Hermitian factors ---------------------------------------------------------

def flat_kaehler(n):
    """Flat Kaehler C^n as Hermitian data ``(J, g' = I)``."""
    m = 2 * n
    J = standard_rotation(m)
    return FieldBundle(
        dim=m,
        metric=lambda p: np.eye(m),
        f=lambda p: J,
        name=f"flat_kaehler(n={n})",
        params={"n": n},
    )


def conformal_hermitian(n, u=None, scale=1.0):
    """Hermitian data ``g' = e^{2u} I``, ``f = scale * J`` on R^{2n}.

    With ``scale = 1`` and non-constant ``u`` this is a locally conformally
    Kaehler (class W_4) structure. ``u`` defaults to ``0.1 * x_1``.
    """
    m = 2 * n
    J = standard_rotation(m)
    if u is None:
        def u(p):
            return 0.1 * p[0]

    def metric(p):
        w = dual.exp(2.0 * u(p))
        out = dual.zeros((m, m), like=p)
        for i in range(m):
            out[i, i] = w
        return out

    return FieldBundle(
        dim=m,
        metric=metric,
        f=lambda p: scale * J,
        name=f"conformal_hermitian(n={n})",
        params={"n": n, "factor": "conformal"},
    )


def check_hermitian_factor(factor, sample, tol=1e-9):
    """Raise :class:`InvalidFactor` unless ``J^2 = -I`` and ``J`` is g'-skew."""
    for p in sample:
        v = factor.values(p)
        J, g = v["f"], v["g"]
        sq = np.abs(J @ J + np.eye(factor.dim)).max()
        skew = np.abs(g @ J + (g @ J).T).max()
        if sq > tol or skew > tol:
            raise InvalidFactor(
                f"{factor.name}: J^2+I residual {sq:.2e}, skewness residual {skew:.2e}")


# -- contact builders ----------------------------------------------------------

def sasakian_heisenberg(n=1):
    """Standard Sasakian structure on the Heisenberg group R^{2n+1}.

    ``eta = (dz - sum y_i dx_i) / 2``, ``xi = 2 d/dz``,
    ``g = eta (x) eta + (sum dx_i^2 + dy_i^2) / 4``, and ``f`` is the lift of
    the rotation on ``ker eta`` (``f d/dx_i = -d/dy_i``,
    ``f d/dy_i = d/dx_i + y_i d/dz``). With these choices
    ``(nabla^g_X f) Y = g(X, Y) xi - eta(Y) X`` and
    ``F = SASAKI_DETA_FACTOR * (d_i eta_j - d_j eta_i)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    d = 2 * n + 1
    z = d - 1

    def eta(p):
        out = dual.zeros(d, like=p)
        for i in range(n):
            out[i] = -0.5 * p[n + i]
        out[z] = 0.5
        return out

    def metric(p):
        e = eta(p)
        out = _outer(e, e)
        for i in range(d - 1):
            out[i, i] = out[i, i] + 0.25
        return dual.array(out)

    def f(p):
        out = dual.zeros((d, d), like=p)
        for i in range(n):
            out[n + i, i] = -1.0
            out[i, n + i] = 1.0
            out[z, n + i] = p[n + i]
        return out

    xi_vec = np.zeros(d)
    xi_vec[z] = 2.0

    return FieldBundle(
        dim=d,
        metric=metric,
        f=f,
        xi=lambda p: xi_vec,
        eta=eta,
        Q=lambda p: np.eye(d),
        name=f"sasakian_heisenberg(n={n})",
        params={"n": n, "kind": "sasakian_heisenberg"},
    )


def _min_on_box(lam, bundle, samples=256, seed=12345):
    lo, hi = bundle.bounds()
    pts = list(bundle.sample(samples, seed=seed))
    for mask in range(2 ** min(bundle.dim, 10)):
        pts.append(np.where([(mask >> k) & 1 for k in range(bundle.dim)], hi, lo))
    return min(float(lam(p)) for p in pts)


def deform_lambda(base, lam, check=True, lam_min=None):
    """``(f, xi, eta, g) -> (lam f, Q, xi, eta, g')`` with

    ``Q = lam^2 I + (1 - lam^2) eta (x) xi`` and
    ``g' = g / lam + (1 - 1/lam) eta (x) eta``.

    ``lam`` is a closure on chart coordinates; positivity is checked on
    ``lam_min`` when given (e.g. an exact box minimum) and otherwise on box
    corners plus a seeded sample.
    """
    if not base.is_contact:
        raise ValueError("deform_lambda needs almost contact data")
    if callable(lam):
        lam_fn = lam
    else:
        value = float(lam)
        lam_fn = lambda p: value  # noqa: E731
    low = lam_min if lam_min is not None else _min_on_box(lam_fn, base)
    if not low > 0:
        raise NonPositiveLambda(f"lambda must be positive on the chart, minimum {low:.4g}")
    if check:
        sample = base.sample(5, seed=1)
        for p in sample:
            if np.abs(base.values(p)["Q"] - np.eye(base.dim)).max() > 1e-9:
                raise ValueError("deform_lambda expects an a.c.m. base (Q = I)")
    d = base.dim

    def metric(p):
        l = lam_fn(p)
        e = base.eta(p)
        return dual.array(base.metric(p) / l + (1.0 - 1.0 / l) * _outer(e, e))

    def f(p):
        return dual.array(lam_fn(p) * np.asarray(base.f(p), dtype=object))

    def Q(p):
        l2 = lam_fn(p) ** 2
        out = (1.0 - l2) * _outer(base.xi(p), base.eta(p))
        for i in range(d):
            out[i, i] = out[i, i] + l2
        return dual.array(out)

    return replace(
        base,
        metric=metric,
        f=f,
        Q=Q,
        name=f"deform_lambda({base.name})",
        params={**base.params, "kind": "lambda_deformation", "base": base.params.get("kind")},
    )


def product_hermitian_line(factor, lam=1.0, check=True):
    """Riemannian product ``(M' x R, g' + dt^2)`` with ``f = sqrt(lam) J``.

    ``xi = d/dt``, ``eta = dt`` and ``Q = lam I + (1 - lam) eta (x) xi``; on
    the factor ``Q - I = (lam - 1) I`` and ``I - f^2 = (1 + lam) I``.
    """
    lam = float(lam)
    if not lam > 0:
        raise NonPositiveLambda(f"lambda must be positive, got {lam}")
    if factor.is_contact:
        raise InvalidFactor("factor must be Hermitian data on an even-dimensional chart")
    if check:
        check_hermitian_factor(factor, factor.sample(5, seed=2))
    m = factor.dim
    d = m + 1
    s = math.sqrt(lam)
    unit = np.zeros(d)
    unit[m] = 1.0
    Qmat = lam * np.eye(d)
    Qmat[m, m] = 1.0

    def metric(p):
        out = dual.zeros((d, d), like=p)
        out[:m, :m] = factor.metric(p[:m])
        out[m, m] = 1.0
        return out

    def f(p):
        out = dual.zeros((d, d), like=p)
        out[:m, :m] = s * np.asarray(factor.f(p[:m]), dtype=object)
        return out

    lo, hi = factor.bounds()
    return FieldBundle(
        dim=d,
        metric=metric,
        f=f,
        xi=lambda p: unit,
        eta=lambda p: unit,
        Q=lambda p: Qmat,
        name=f"product({factor.name}, lambda={lam:g})",
        params={**factor.params, "kind": "product_hermitian_line", "lambda": lam},
        lower=tuple(lo) + (-1.0,),
        upper=tuple(hi) + (1.0,),
    )


def kaehler_line_product(n=1, lam=1.0):
    return product_hermitian_line(flat_kaehler(n), lam)


def conformal_hermitian_line(n=2, lam=1.0, u=None):
    return product_hermitian_line(conformal_hermitian(n, u), lam)


def constant_structure(g, f, xi=None, eta=None, Q=None, name="generic"):
    """Constant-coefficient structure on a flat chart."""
    g = np.asarray(g, dtype=float)
    f = np.asarray(f, dtype=float)
    d = g.shape[0]
    mk = lambda a: (lambda p: a)  # noqa: E731
    return FieldBundle(
        dim=d,
        metric=mk(g),
        f=mk(f),
        xi=None if xi is None else mk(np.asarray(xi, dtype=float)),
        eta=None if eta is None else mk(np.asarray(eta, dtype=float)),
        Q=None if Q is None else mk(np.asarray(Q, dtype=float)),
        name=name,
        params={"kind": "generic"},
    )


# -- validation ----------------------------------------------------------------

def _acm_residuals(v, n):
    g, f = v["g"], v["f"]
    xi, eta = v["xi"], v["eta"]
    d = g.shape[0]
    Q = v.get("Q")
    Qacm = -f @ f + np.outer(xi, eta)
    if Q is None:
        Q = Qacm
    svals = np.linalg.svd(f, compute_uv=False)
    rank = int(np.sum(svals > 1e-8 * max(svals.max(), 1e-300)))
    amax = lambda a: float(np.abs(a).max())  # noqa: E731
    return {
        "compatibility g(fX,fY)": amax(f.T @ g @ f - g @ Q + np.outer(eta, eta)),
        "eta(xi)=1": abs(float(eta @ xi) - 1.0),
        "g(xi,xi)=1": abs(float(xi @ g @ xi) - 1.0),
        "f xi=0": amax(f @ xi),
        "eta o f=0": amax(eta @ f),
        "[Q,f]=0": amax(Q @ f - f @ Q),
        "Q xi=xi": amax(Q @ xi - xi),
        "eta o Q=eta": amax(eta @ Q - eta),
        "Q self-adjoint": amax(g @ Q - (g @ Q).T),
        "f skew": amax(g @ f + (g @ f).T),
        "rank f=2n": float(abs(rank - 2 * n)),
        "Q=-f^2+eta(x)xi": amax(Q - Qacm),
    }


def _hermitian_residuals(v, n):
    g, f = v["g"], v["f"]
    svals = np.linalg.svd(f, compute_uv=False)
    rank = int(np.sum(svals > 1e-8 * max(svals.max(), 1e-300)))
    return {
        "f skew": float(np.abs(g @ f + (g @ f).T).max()),
        "rank f=2n": float(abs(rank - 2 * n)),
    }


def validate_weak_acm(bundle, sample, tol=1e-9):
    """Check the weak a.c.m. identities at every sample point.

    Hermitian (even-dimensional) bundles are checked for skewness and maximal
    rank only.
    """
    d = bundle.dim
    n = (d - 1) // 2 if bundle.is_contact else d // 2
    per = {}
    for p in sample:
        v = bundle.values(p)
        res = _acm_residuals(v, n) if bundle.is_contact else _hermitian_residuals(v, n)
        for k, r in res.items():
            per.setdefault(k, []).append(r)
    checks = []
    for k, rs in per.items():
        # rank residuals are integer offsets, any nonzero fails
        t = 0.5 if k == "rank f=2n" else tol
        checks.append(IdentityCheck.from_residuals(k, rs, t))
    return ValidationReport(checks=checks, points=len(sample))


# -- diagnostic predicates -----------------------------------------------------

def sasakian_defect(geo):
    """``max |(nabla^g_X f)Y - g(X,Y) xi + eta(Y) X|`` over coordinate pairs."""
    d = geo.dim
    expected = (np.einsum("kj,i->kij", geo.g, geo.xi)
                - np.einsum("j,ik->kij", geo.eta, np.eye(d)))
    return float(np.abs(geo.nabla_f - expected).max())


def kenmotsu_defect(geo):
    """``max |(nabla^g_X f)Y - g(fX,Y) xi + eta(Y) fX|`` (diagnostic only)."""
    gf = geo.f.T @ geo.g  # gf[k, j] = g(f e_k, e_j)
    expected = (np.einsum("kj,i->kij", gf, geo.xi)
                - np.einsum("j,ik->kij", geo.eta, geo.f))
    return float(np.abs(geo.nabla_f - expected).max())


def d_eta(geo):
    """``d_i eta_j - d_j eta_i`` (unnormalized, like the 2-form coboundary)."""
    de = geo.deta
    return de - de.T
