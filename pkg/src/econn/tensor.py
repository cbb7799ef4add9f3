"""Point-wise multilinear algebra on dense component arrays.

Conventions, fixed once for the whole package:

* vectors are contravariant component arrays ``X[i]``;
* a (1,1)-operator ``A`` acts as ``(AX)^i = A[i, j] X[j]``;
* a covariant tensor ``t`` of rank 2 or 3 evaluates as
  ``t(X, Y, Z) = t[i, j, k] X[i] Y[j] Z[k]``, so the first index is the
  first argument;
* ``F(X, Y) = g(X, fY)`` which gives ``F = g @ f`` and ``f = g^{-1} F``.
"""

import numpy as np

from .errors import SingularMetric, SingularOperator
from .tolerances import COND_LIMIT

_LETTERS = "xyz"


def singular_tol(g):
    """Scale-aware floor for ``|det g|``."""
    g = np.asarray(g, dtype=float)
    scale = np.abs(g).max()
    return 1e-10 * scale ** g.shape[0]


def metric_inverse(g):
    """Contravariant metric ``g^{ij}``.

    Raises :class:`SingularMetric` when ``|det g|`` does not exceed
    :func:`singular_tol`.
    """
    g = np.asarray(g, dtype=float)
    if not np.all(np.isfinite(g)):
        raise SingularMetric("metric has non-finite entries")
    det = np.linalg.det(g)
    if not abs(det) > singular_tol(g):
        raise SingularMetric(f"|det g| = {abs(det):.3e} below singular floor")
    return np.linalg.inv(g)


def musical_op(g, F):
    """The (1,1)-tensor ``f`` with ``g(X, fY) = F(X, Y)``."""
    return metric_inverse(g) @ np.asarray(F, dtype=float)


def symmetrize(a):
    a = np.asarray(a, dtype=float)
    return 0.5 * (a + a.T)


def antisymmetrize(a):
    a = np.asarray(a, dtype=float)
    return 0.5 * (a - a.T)


def antisymmetrize12(t):
    """Project a rank-3 array onto tensors antisymmetric in slots 1, 2."""
    return 0.5 * (t - t.transpose(1, 0, 2))


def antisymmetry12_residual(t):
    return float(np.abs(t + t.transpose(1, 0, 2)).max())


def apply_slot(t, slot, A):
    """Contract operator ``A`` into one slot of a rank-3 covariant tensor.

    ``apply_slot(t, 3, A)`` is ``t(X, Y, AZ)``; slots are numbered 1..3.
    """
    if slot == 1:
        return np.einsum("abc,ai->ibc", t, A)
    if slot == 2:
        return np.einsum("abc,bj->ajc", t, A)
    if slot == 3:
        return np.einsum("abc,ck->abk", t, A)
    raise ValueError(f"slot must be 1, 2 or 3, got {slot!r}")


def term(t, args, ops=(None, None, None)):
    """Evaluate ``t`` on free vectors ``X, Y, Z`` placed and transformed per slot.

    ``args[k]`` is the letter of the vector fed to slot ``k + 1`` and
    ``ops[k]`` the operator applied to it first (``None`` for the identity).
    So ``term(t, "zxy", (A, None, C))`` is ``t(AZ, X, CY)``. The result is
    always indexed ``R[x, y, z]``.
    """
    d = t.shape[0]
    eye = np.eye(d)
    mats = [eye if op is None else op for op in ops]
    spec = "abc,a{},b{},c{}->xyz".format(*args)
    return np.einsum(spec, t, *mats)


def rotate(r, order):
    """Re-index ``R[x, y, z]`` so the slots read in ``order``.

    ``rotate(R, "yzx")[y, z, x] = R[x, y, z]``: used to turn a right-hand side
    stated for ``T(Y, Z, X)`` into the component array of ``T``.
    """
    return np.einsum("xyz->" + order, r)


def change_basis(t, E):
    """Components of a covariant tensor in the frame given by columns of ``E``."""
    t = np.asarray(t)
    if t.ndim == 2:
        return E.T @ t @ E
    return np.einsum("abc,ai,bj,ck->ijk", t, E, E, E)


def operator_in_frame(A, E):
    return np.linalg.solve(E, A @ E)


def checked_inverse(A, what="operator"):
    """Dense inverse refusing condition numbers beyond ``COND_LIMIT``."""
    A = np.asarray(A, dtype=float)
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularOperator(f"{what} not invertible (cond = {cond:.3e})")
    return np.linalg.inv(A)


def lower(g, v):
    return np.asarray(g) @ np.asarray(v)


def raise_index(ginv, w):
    return np.asarray(ginv) @ np.asarray(w)
