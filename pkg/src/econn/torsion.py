"""Closed-form torsion of Einstein connections and the connections they define.

All formula kernels work on component arrays in whatever frame they are
given; the ``torsion_*`` entry points take a :class:`~econn.fields.PointGeometry`
and return the (0,3) torsion ``T[i, j, k] = g(T(e_i, e_j), e_k)`` in the
coordinate basis, antisymmetrized in the first two slots.

For (weak) a.c.m. data the horizontal statements are evaluated in the
adapted frame (g-orthonormal basis of ``ker eta`` followed by ``xi``), where
``f`` and ``Q`` are block diagonal, and mapped back afterwards.

Every entry point accepts an optional ``diagnostics`` dict that receives the
pre-antisymmetrization residuals of the pieces it assembled.
"""

import numpy as np

from .errors import (GeodesicViolation, InvalidFactor, InvalidStructure,
                     SpecialConditionViolated)
from .structures import validate_weak_acm
from .tensor import (antisymmetrize12, antisymmetry12_residual, change_basis,
                     checked_inverse, operator_in_frame, rotate, term)
from .tolerances import tolerances

# readings of the last dF term of the horizontal Q-T solution
QT_VARIANTS = ("matched", "literal")
DEFAULT_QT_VARIANT = "matched"


def _note(diagnostics, key, value):
    if diagnostics is not None:
        diagnostics[key] = max(float(value), diagnostics.get(key, 0.0))


def _finish(T, diagnostics, key="antisymmetry"):
    _note(diagnostics, key, antisymmetry12_residual(T))
    return antisymmetrize12(T)


# -- frame-level kernels -------------------------------------------------------

def qt_solution_kernel(nF, dF, f, Qt, variant=DEFAULT_QT_VARIANT):
    """Solve ``2 T(Y, Z, (I + Qt/2)^2 f^4 X) = RHS`` for ``T``.

    ``Qt`` is the shifted operator (``-I - f^2`` for weak almost Hermitian
    data, ``Q - I`` on ``ker eta``). ``variant`` chooses the argument of the
    final ``dF`` term: ``"matched"`` uses ``(3 Qt + Qt^2) f^2 X``, ``"literal"``
    uses ``(3 Qt + Qt^2) X``.
    """
    if variant not in QT_VARIANTS:
        raise ValueError(f"variant must be one of {QT_VARIANTS}")
    m = f.shape[0]
    I = np.eye(m)
    f2 = f @ f
    f3 = f2 @ f
    f4 = f2 @ f2
    Pinv = checked_inverse(I - f2, "P = I - f^2")
    M = Pinv @ (2 * Qt + Qt @ Qt) @ f2
    half = I + 0.5 * Qt
    A = half @ half @ f4
    Ainv = checked_inverse(A, "(I + Qt/2)^2 f^4")
    R = (term(nF, "xyz", (None, f + f3, f))
         + term(nF, "yzx", (None, f2, None))
         + term(nF, "zxy", (None, f2, None))
         - term(nF, "xyz", (f, f3, None))
         - term(nF, "xyz", (f, f2, f))
         + term(nF, "yzx", (f, f3, None))
         + term(nF, "zxy", (f, f2, f))
         + term(nF, "xyz", (M, f, None))
         - term(nF, "xyz", (M, None, f))
         - term(nF, "xyz", (Qt @ f2, None, None))
         - 0.5 * term(dF, "xyz", (3 * Qt + 2 * Qt @ Qt, f, f)))
    last = 3 * Qt + Qt @ Qt
    if variant == "matched":
        last = last @ f2
    R = R + 0.5 * term(dF, "xyz", (last, None, None))
    # R[x, y, z] = 2 T[y, z, c] A[c, x]
    return 0.5 * np.einsum("xyz,xc->yzc", R, Ainv)


def hermitian_kernel(nF, f):
    """``2 T(Y,Z,X) = 2(n_{fX}F)(fY,Z) - (n_{fY}F)(fZ,X) - (n_{fZ}F)(X,fY)
    - (n_Y F)(Z,X) - (n_Z F)(X,Y)`` with ``n = nabla^g``."""
    R = (2 * term(nF, "xyz", (f, f, None))
         - term(nF, "yzx", (f, f, None))
         - term(nF, "zxy", (f, None, f))
         - term(nF, "yzx")
         - term(nF, "zxy"))
    return 0.5 * rotate(R, "yzx")


def special_hermitian_kernel(nF, f):
    """``2 T(X,Y,Z) = (n_X F)(Y,Z) - (n_{fZ}F)(fX,Y) - (n_{fY}F)(fX,Z)``."""
    R = (term(nF, "xyz")
         - term(nF, "zxy", (f, f, None))
         - term(nF, "yxz", (f, f, None)))
    return 0.5 * R


def special_acm_kernel(nF, f):
    """``2 T(X,Y,Z) = (n_{fZ}F)(fX,Y) + (n_{fY}F)(fX,Z) - (n_X F)(Y,Z)`` on ker eta."""
    R = (term(nF, "zxy", (f, f, None))
         + term(nF, "yxz", (f, f, None))
         - term(nF, "xyz"))
    return 0.5 * R


def product_lambda_kernel(nF, dF, J, lam):
    """Factor torsion of the weighted product from the lambda-solution."""
    R = (-term(nF, "yzx") - term(nF, "zxy")
         + lam * (2 * term(nF, "xyz", (J, None, J))
                  - term(nF, "yzx", (J, J, None))
                  - term(nF, "zxy", (J, None, J)))
         + (lam - 1) * (2 * term(nF, "xyz")
                        - (lam + 0.5) * term(dF, "xyz", (None, J, J))
                        - 0.5 * (lam + 2) * term(dF, "xyz")))
    return rotate(R, "yzx") / (0.5 * (lam + 1) ** 2 * lam)


def xi_components(nF, dF, B, h):
    """``T(xi, Y, X)`` and ``T(X, Y, xi)`` in a frame whose index ``h`` is xi.

    ``B`` is ``(I + f)^{-1}`` in the same frame. Returns ``(S, U)`` with
    ``S[y, x] = T(xi, Y, X)`` and ``U[x, y] = T(X, Y, xi)``.
    """
    S = np.einsum("ay,ax->yx", B, dF[:, h, :]) - 2 * np.einsum("ay,xa->yx", B, nF[:, :, h])
    U = -dF[:, :, h] + S.T - S
    return S, U


# -- assembly helpers ----------------------------------------------------------

def _frame_data(geo):
    E = geo.frame
    Einv = np.linalg.inv(E)
    return {
        "E": E,
        "Einv": Einv,
        "nF": change_basis(geo.nabla_F, E),
        "dF": change_basis(geo.dF, E),
        "f": operator_in_frame(geo.f, E),
        "Q": operator_in_frame(geo.Q, E),
    }


def _to_coordinates(T_frame, fd):
    return change_basis(T_frame, fd["Einv"])


def _check_acm_point(geo, require_q_identity=False, check_geodesic=True):
    tol = tolerances(geo.mode)
    if not geo.bundle.is_contact:
        raise InvalidStructure("a.c.m. torsion needs odd-dimensional contact data")
    report = validate_weak_acm(geo.bundle, [geo.point], tol["structure_tol"])
    if not report.passed:
        bad = [c.name for c in report.checks if not c.passed]
        raise InvalidStructure(f"weak a.c.m. identities fail at point: {bad}")
    if require_q_identity and np.abs(geo.Q - np.eye(geo.dim)).max() > tol["structure_tol"]:
        raise InvalidStructure("structure is weak (Q != I); a.c.m. formula does not apply")
    if check_geodesic:
        defect = geo.xi_geodesic_defect()
        if defect > tol["deriv_tol"]:
            raise GeodesicViolation(
                f"|nabla^g_xi xi| = {defect:.3e}: no Einstein connection with the Q-T-condition")


def _assemble_acm(geo, horizontal, B=None, diagnostics=None):
    """Full torsion from the xi-components and a horizontal kernel.

    ``horizontal`` maps frame data to the horizontal block ``T[:h, :h, :h]``.
    """
    fd = _frame_data(geo)
    d = geo.dim
    h = d - 1
    if B is None:
        B = checked_inverse(np.eye(d) + fd["f"], "I + f")
    S, U = xi_components(fd["nF"], fd["dF"], B, h)
    _note(diagnostics, "xi_slot3_antisymmetry", np.abs(U + U.T).max())
    U = 0.5 * (U - U.T)
    _note(diagnostics, "T(xi,Y,xi) formula", np.abs(S[:h, h]).max())
    Tf = np.zeros((d, d, d))
    Tf[h, :h, :h] = S[:h, :h]
    Tf[:h, h, :h] = -S[:h, :h]
    Tf[:h, :h, h] = U[:h, :h]
    Th = horizontal(fd)
    _note(diagnostics, "horizontal_antisymmetry", antisymmetry12_residual(Th))
    Tf[:h, :h, :h] = antisymmetrize12(Th)
    return _finish(_to_coordinates(Tf, fd), diagnostics)


# -- public torsion operations -------------------------------------------------

def torsion_weak_hermitian(geo, variant=DEFAULT_QT_VARIANT, diagnostics=None):
    """Torsion of the Einstein connection of weak almost Hermitian data."""
    if geo.bundle.is_contact:
        raise InvalidStructure("weak almost Hermitian torsion needs even-dimensional data")
    f = geo.f
    Qt = -np.eye(geo.dim) - f @ f
    T = qt_solution_kernel(geo.nabla_F, geo.dF, f, Qt, variant)
    return _finish(T, diagnostics)


def _require_complex(geo, J):
    tol = tolerances(geo.mode)["structure_tol"]
    res = np.abs(J @ J + np.eye(J.shape[0])).max()
    if res > tol:
        raise InvalidFactor(f"J^2 + I residual {res:.3e}: not an almost complex structure")


def torsion_acm_hermitian(geo, diagnostics=None):
    if geo.bundle.is_contact:
        raise InvalidStructure("almost Hermitian torsion needs even-dimensional data")
    _require_complex(geo, geo.f)
    return _finish(hermitian_kernel(geo.nabla_F, geo.f), diagnostics)


def torsion_special_hermitian(geo, diagnostics=None):
    if geo.bundle.is_contact:
        raise InvalidStructure("almost Hermitian torsion needs even-dimensional data")
    _require_complex(geo, geo.f)
    return _finish(special_hermitian_kernel(geo.nabla_F, geo.f), diagnostics)


def torsion_weak_acm(geo, variant=DEFAULT_QT_VARIANT, diagnostics=None):
    """Torsion of a Q-T Einstein connection of a weak a.c.m. structure."""
    _check_acm_point(geo)
    h = geo.dim - 1
    tol = tolerances(geo.mode)
    checked_inverse(np.eye(geo.dim) - geo.f @ geo.f, "P = I - f^2")

    def horizontal(fd):
        fh = fd["f"][:h, :h]
        Qt = fd["Q"][:h, :h] - np.eye(h)
        _note(diagnostics, "Qt=-f^2-I on ker eta", np.abs(Qt + np.eye(h) + fh @ fh).max())
        if np.abs(Qt + np.eye(h) + fh @ fh).max() > tol["structure_tol"]:
            raise InvalidStructure("Q - I differs from -f^2 - I on ker eta")
        return qt_solution_kernel(fd["nF"][:h, :h, :h], fd["dF"][:h, :h, :h], fh, Qt, variant)

    return _assemble_acm(geo, horizontal, diagnostics=diagnostics)


def torsion_acm(geo, diagnostics=None):
    """Torsion of an Einstein connection of an a.c.m. structure (Q = I)."""
    _check_acm_point(geo, require_q_identity=True)
    h = geo.dim - 1

    def horizontal(fd):
        return hermitian_kernel(fd["nF"][:h, :h, :h], fd["f"][:h, :h])

    return _assemble_acm(geo, horizontal, diagnostics=diagnostics)


def special_condition_residual(nF_h, f_h):
    """``(n_X F)(Y,Z) + (n_Y F)(X,Z) - (n_{fX}F)(fY,Z) - (n_{fY}F)(fX,Z)`` on ker eta."""
    R = (term(nF_h, "xyz") + term(nF_h, "yxz")
         - term(nF_h, "xyz", (f_h, f_h, None)) - term(nF_h, "yxz", (f_h, f_h, None)))
    return float(np.abs(R).max())


def torsion_special_acm(geo, diagnostics=None):
    """Special Einstein torsion of an a.c.m. structure; xi-components vanish."""
    _check_acm_point(geo, require_q_identity=True, check_geodesic=False)
    tol = tolerances(geo.mode)
    fd = _frame_data(geo)
    h = geo.dim - 1
    nF_h = fd["nF"][:h, :h, :h]
    f_h = fd["f"][:h, :h]
    res = special_condition_residual(nF_h, f_h)
    _note(diagnostics, "special_condition", res)
    if res > tol["accept_tol"]:
        raise SpecialConditionViolated(f"special-connection condition residual {res:.3e}")
    Tf = np.zeros((geo.dim,) * 3)
    Th = special_acm_kernel(nF_h, f_h)
    _note(diagnostics, "horizontal_antisymmetry", antisymmetry12_residual(Th))
    Tf[:h, :h, :h] = antisymmetrize12(Th)
    return _finish(_to_coordinates(Tf, fd), diagnostics)


def torsion_product_lambda(geo, diagnostics=None):
    """Torsion for ``product_hermitian_line`` output with constant lambda."""
    bundle = geo.bundle
    if bundle.params.get("kind") != "product_hermitian_line":
        raise InvalidFactor("torsion_product_lambda needs a product_hermitian_line bundle")
    lam = float(bundle.params["lambda"])
    _check_acm_point(geo)
    d = geo.dim
    h = d - 1
    s = np.sqrt(lam)
    fd_probe = _frame_data(geo)
    J = fd_probe["f"][:h, :h] / s
    _require_complex(geo, J)
    # (I + sqrt(lam) J)^{-1} = (I - sqrt(lam) J) / (1 + lam) on the factor
    B = np.eye(d)
    B[:h, :h] = (np.eye(h) - s * J) / (1.0 + lam)

    def horizontal(fd):
        return product_lambda_kernel(fd["nF"][:h, :h, :h], fd["dF"][:h, :h, :h], J, lam)

    return _assemble_acm(geo, horizontal, B=B, diagnostics=diagnostics)


def zero_torsion(geo, diagnostics=None):
    """Torsion of the Levi-Civita connection."""
    return np.zeros((geo.dim,) * 3)


TORSION_VARIANTS = {
    "weak": torsion_weak_acm,
    "acm": torsion_acm,
    "special": torsion_special_acm,
    "product": torsion_product_lambda,
    "weak_hermitian": torsion_weak_hermitian,
    "acm_hermitian": torsion_acm_hermitian,
    "special_hermitian": torsion_special_hermitian,
    "levi_civita": zero_torsion,
}


class TorsionField:
    """A named torsion construction evaluated point by point.

    Calling it with a chart point builds the geometry in ``mode``; calling
    :meth:`at` reuses a geometry already computed.
    """

    def __init__(self, bundle, variant="weak", mode=None, **options):
        if variant not in TORSION_VARIANTS:
            raise ValueError(f"unknown torsion variant {variant!r}")
        self.bundle = bundle
        self.variant = variant
        self.mode = mode
        self.options = options
        self._fn = TORSION_VARIANTS[variant]

    def at(self, geo, diagnostics=None):
        return self._fn(geo, diagnostics=diagnostics, **self.options)

    def __call__(self, p):
        return self.at(self.bundle.at(p, self.mode))


# -- contorsion and connections ------------------------------------------------

def contorsion_from_torsion(T, f):
    """``2K(X,Y,Z) = T(X,Y,Z) - T(Z,X,fY) + T(Y,Z,fX)``."""
    return 0.5 * (T
                  - np.einsum("kil,lj->ijk", T, f)
                  + np.einsum("jkl,li->ijk", T, f))


def contorsion_metric(T):
    """Contorsion of a metric connection: ``2K(Y,Z,X) = T(X,Y,Z) + T(Y,Z,X) - T(Z,X,Y)``."""
    R = T + np.einsum("jki->ijk", T) - np.einsum("kij->ijk", T)
    return 0.5 * rotate(R, "yzx")


def torsion_from_contorsion(K):
    return K - K.transpose(1, 0, 2)


def connection_coefficients(T, geo):
    """Full coefficients ``Gamma^m_{ij}`` of the connection built from ``T``.

    ``g(nabla_X Y, Z) = g(nabla^g_X Y, Z) + K(X, Y, Z)`` with ``K`` from
    :func:`contorsion_from_torsion`.
    """
    K = contorsion_from_torsion(T, geo.f)
    return geo.gamma + np.einsum("mk,ijk->mij", geo.ginv, K)


def torsion_from_coefficients(gamma, g):
    """``T(e_i, e_j, e_k)`` for coordinate fields (their brackets vanish)."""
    return np.einsum("mij,mk->ijk", gamma - gamma.transpose(0, 2, 1), g)


def acm_horizontal_connection(geo, special=False):
    """Horizontal ``g(nabla_X Y, Z) - g(nabla^g_X Y, Z)`` in the adapted frame.

    Direct expression in ``nabla^g F`` for a.c.m. structures with geodesic xi;
    ``special=True`` gives the special connection.
    """
    fd = _frame_data(geo)
    h = geo.dim - 1
    n = fd["nF"][:h, :h, :h]
    f = fd["f"][:h, :h]
    R = (2 * term(n, "zxy", (f, f, None))
         - term(n, "xyz", (f, f, None))
         + term(n, "yxz", (f, f, None))
         - term(n, "xyz")
         + term(n, "yxz"))
    if not special:
        R = R - (term(n, "xyz", (None, f, None))
                 + term(n, "yxz", (f, None, None))
                 + term(n, "yxz", (None, f, None))
                 + term(n, "xyz", (f, None, None)))
    return 0.25 * R
