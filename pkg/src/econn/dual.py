"""Forward-mode dual numbers with a gradient vector.

A :class:`Dual` carries a value and the gradient of that value with respect
to all chart coordinates at once, so one evaluation of a field closure yields
exact first partial derivatives. Field closures stay generic: they use the
module-level ``exp``/``sqrt``/... helpers, which fall back to :mod:`numpy` on
plain floats, and build component arrays with :func:`array`.
"""

import math

import numpy as np


class Dual:
    __slots__ = ("val", "grad")

    def __init__(self, val, grad):
        self.val = float(val)
        self.grad = np.asarray(grad, dtype=float)

    def __repr__(self):
        return f"Dual({self.val!r}, {self.grad!r})"

    def __add__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        if isinstance(other, Dual):
            return Dual(self.val + other.val, self.grad + other.grad)
        return Dual(self.val + other, self.grad)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        if isinstance(other, Dual):
            return Dual(self.val - other.val, self.grad - other.grad)
        return Dual(self.val - other, self.grad)

    def __rsub__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        return Dual(other - self.val, -self.grad)

    def __neg__(self):
        return Dual(-self.val, -self.grad)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        if isinstance(other, Dual):
            return Dual(self.val * other.val,
                        self.val * other.grad + other.val * self.grad)
        return Dual(self.val * other, self.grad * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        if isinstance(other, Dual):
            return Dual(self.val / other.val,
                        (self.grad * other.val - self.val * other.grad) / other.val ** 2)
        return Dual(self.val / other, self.grad / other)

    def __rtruediv__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        return Dual(other / self.val, -other * self.grad / self.val ** 2)

    def __pow__(self, p):
        if isinstance(p, Dual):
            return exp(p * log(self))
        if p == 0:
            return Dual(1.0, np.zeros_like(self.grad))
        return Dual(self.val ** p, p * self.val ** (p - 1) * self.grad)

    def __rpow__(self, base):
        return exp(self * math.log(base))

    # comparisons act on the value so closures may branch on sign
    def __lt__(self, other):
        return self.val < _val(other)

    def __le__(self, other):
        return self.val <= _val(other)

    def __gt__(self, other):
        return self.val > _val(other)

    def __ge__(self, other):
        return self.val >= _val(other)

    def __float__(self):
        return self.val


def _val(x):
    return x.val if isinstance(x, Dual) else x


def _lift(fn, dfn):
    def wrapped(x):
        if isinstance(x, Dual):
            return Dual(fn(x.val), dfn(x.val) * x.grad)
        return fn(x)
    wrapped.__name__ = fn.__name__
    return wrapped


exp = _lift(math.exp, math.exp)
log = _lift(math.log, lambda v: 1.0 / v)
sqrt = _lift(math.sqrt, lambda v: 0.5 / math.sqrt(v))
sin = _lift(math.sin, math.cos)
cos = _lift(math.cos, lambda v: -math.sin(v))
tanh = _lift(math.tanh, lambda v: 1.0 - math.tanh(v) ** 2)


def seed(coords):
    """Lift a coordinate vector to duals seeded with the unit gradients."""
    coords = np.asarray(coords, dtype=float)
    eye = np.eye(coords.size)
    return np.array([Dual(c, eye[i]) for i, c in enumerate(coords)], dtype=object)


def array(rows):
    """Component array that keeps dual entries (object dtype when needed)."""
    out = np.array(rows, dtype=object)
    if any(isinstance(v, Dual) for v in out.flat):
        return out
    return out.astype(float)


def zeros(shape, like=None):
    """Zero array that can later receive dual entries."""
    if like is not None and any(isinstance(v, Dual) for v in np.asarray(like, dtype=object).flat):
        out = np.empty(shape, dtype=object)
        out[...] = 0.0
        return out
    return np.zeros(shape)


def split(arr, d):
    """Split a component array into (values, gradients).

    Gradients get a trailing axis of length ``d``; plain float entries have
    zero gradient.
    """
    arr = np.asarray(arr, dtype=object)
    vals = np.empty(arr.shape)
    grads = np.zeros(arr.shape + (d,))
    for idx, v in np.ndenumerate(arr):
        if isinstance(v, Dual):
            vals[idx] = v.val
            grads[idx] = v.grad
        else:
            vals[idx] = float(v)
    return vals, grads
