import math

import numpy as np
import pytest

from econn import dual
from econn.dual import Dual


def test_arithmetic_derivatives():
    x, y = dual.seed([1.5, -0.5])
    r = (x * y + 3) / (1 + x * x) - y ** 3 + 2 ** x
    h = 1e-6

    def f(a, b):
        return (a * b + 3) / (1 + a * a) - b ** 3 + 2 ** a

    gx = (f(1.5 + h, -0.5) - f(1.5 - h, -0.5)) / (2 * h)
    gy = (f(1.5, -0.5 + h) - f(1.5, -0.5 - h)) / (2 * h)
    assert r.val == pytest.approx(f(1.5, -0.5))
    np.testing.assert_allclose(r.grad, [gx, gy], rtol=1e-8)


def test_elementary_functions():
    (x,) = dual.seed([0.3])
    for fn, ref, dref in [(dual.exp, math.exp, math.exp),
                          (dual.log, math.log, lambda v: 1 / v),
                          (dual.sqrt, math.sqrt, lambda v: 0.5 / math.sqrt(v)),
                          (dual.sin, math.sin, math.cos),
                          (dual.cos, math.cos, lambda v: -math.sin(v)),
                          (dual.tanh, math.tanh, lambda v: 1 - math.tanh(v) ** 2)]:
        r = fn(x)
        assert r.val == pytest.approx(ref(0.3))
        assert r.grad[0] == pytest.approx(dref(0.3))
        assert fn(0.3) == pytest.approx(ref(0.3))


def test_array_helpers():
    x, y = dual.seed([1.0, 2.0])
    a = dual.array([[x, 1.0], [0.0, x * y]])
    assert a.dtype == object
    vals, grads = dual.split(a, 2)
    np.testing.assert_array_equal(vals, [[1.0, 1.0], [0.0, 2.0]])
    np.testing.assert_array_equal(grads[1, 1], [2.0, 1.0])
    np.testing.assert_array_equal(grads[0, 1], [0.0, 0.0])
    assert dual.array([[1.0, 2.0]]).dtype == float
    assert dual.zeros((2,), like=np.array([x])).dtype == object
    assert dual.zeros((2,), like=np.array([1.0])).dtype == float


def test_comparisons_and_float():
    d = Dual(2.0, [1.0])
    assert d > 1 and d >= 2 and d < 3 and d <= 2
    assert float(d) == 2.0
