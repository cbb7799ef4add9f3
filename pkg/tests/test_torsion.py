import numpy as np
import pytest

from econn import structures as S
from econn import torsion as tor
from econn.errors import GeodesicViolation, InvalidFactor, SpecialConditionViolated
from econn.fields import FieldBundle
from econn.tensor import antisymmetry12_residual, change_basis
from econn.tolerances import tolerances
from econn.verify import (cond_2K_residual, cyclic_residual, metricity_residual,
                          sasakian_spot_residuals)

TOL = tolerances("dual")
ASM, ACC = TOL["assembly_tol"], TOL["accept_tol"]


@pytest.fixture(scope="module")
def ch4():
    return S.conformal_hermitian(2)


def _pts(bundle, n=10, seed=0):
    return [bundle.at(p, "dual") for p in bundle.sample(n, seed)]


def _diff(fa, fb, geos):
    return max(float(np.abs(fa(g) - fb(g)).max()) for g in geos)


# -- almost Hermitian ----------------------------------------------------------

def test_weak_hermitian_flat_kaehler_zero():
    for geo in _pts(S.flat_kaehler(2)):
        assert np.abs(tor.torsion_weak_hermitian(geo)).max() == 0.0


def test_weak_hermitian_reduces_to_classical(ch4):
    assert _diff(tor.torsion_weak_hermitian, tor.torsion_acm_hermitian, _pts(ch4)) < ASM


def test_weak_hermitian_conformal_metricity(ch4):
    chk = metricity_residual(ch4, tor.torsion_weak_hermitian, ch4.sample(20, 1))
    assert chk.passed, chk.line()


def test_acm_hermitian_kaehler_zero():
    for geo in _pts(S.flat_kaehler(1)):
        assert np.abs(tor.torsion_acm_hermitian(geo)).max() == 0.0


def test_acm_hermitian_cyclic_identity():
    b = S.conformal_hermitian(2, u=lambda p: 0.2 * p[0] - 0.1 * p[1] * p[2] + 0.05 * p[3] ** 2)
    r = max(float(np.abs(cyclic_residual(g, tor.torsion_acm_hermitian(g))).max())
            for g in _pts(b, 20, 2))
    assert r < ACC


def test_acm_hermitian_rejects_non_complex():
    f = np.array([[0.0, -2.0], [2.0, 0.0]])
    geo = FieldBundle(dim=2, metric=lambda p: np.eye(2), f=lambda p: f).at([0.0, 0.0])
    with pytest.raises(InvalidFactor):
        tor.torsion_acm_hermitian(geo)


def test_special_hermitian_kaehler_zero():
    for geo in _pts(S.flat_kaehler(2)):
        assert np.abs(tor.torsion_special_hermitian(geo)).max() == 0.0


def test_special_hermitian_w4(ch4):
    for geo in _pts(ch4, 20, 3):
        T = tor.torsion_special_hermitian(geo)
        assert np.abs(cond_2K_residual(geo, T)).max() < ACC
        K = tor.contorsion_from_torsion(T, geo.f)
        assert np.abs(K + K.transpose(1, 0, 2)).max() < ACC


# -- contact -------------------------------------------------------------------

def test_weak_acm_kaehler_line_zero(kaehler3, kaehler5):
    for b in (kaehler3, kaehler5):
        for geo in _pts(b):
            T = tor.torsion_weak_acm(geo)
            assert np.abs(T).max() < ASM
            gam = tor.connection_coefficients(T, geo)
            assert np.abs(gam - geo.gamma).max() < ASM


def test_weak_acm_sasakian_values(sasaki):
    for geo in _pts(sasaki, 50):
        for name, r in sasakian_spot_residuals(geo, tor.torsion_weak_acm(geo)).items():
            assert r < ASM, name


def test_weak_acm_lambda2_conformal_metricity(conf2):
    chk = metricity_residual(conf2, tor.torsion_weak_acm, conf2.sample(100, 4))
    assert chk.passed, chk.line()


def test_acm_sasakian_horizontal_zero(sasaki):
    for geo in _pts(sasaki, 20):
        assert sasakian_spot_residuals(geo, tor.torsion_acm(geo))["horizontal T=0"] < ASM


def test_acm_equals_weak_when_q_identity(sasaki, conf1):
    for b in (sasaki, conf1):
        assert _diff(tor.torsion_acm, tor.torsion_weak_acm, _pts(b)) < ASM


def test_acm_kaehler_line_zero(kaehler3):
    for geo in _pts(kaehler3):
        assert np.abs(tor.torsion_acm(geo)).max() == 0.0


def test_acm_rejects_weak_bundle(conf2):
    from econn.errors import InvalidStructure
    with pytest.raises(InvalidStructure):
        tor.torsion_acm(conf2.at(conf2.sample(1, 0)[0]))


def test_geodesic_violation():
    # xi = d/dz on a warped metric whose xi-curves are not geodesics
    def metric(p):
        w = 1.0 + 0.3 * p[0]
        return np.diag([1.0, 1.0, w * w])

    def xi(p):
        return np.array([0.0, 0.0, 1.0]) / (1.0 + 0.3 * p[0])

    def eta(p):
        return np.array([0.0, 0.0, 1.0]) * (1.0 + 0.3 * p[0])

    f = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    b = FieldBundle(dim=3, metric=metric, f=lambda p: f, xi=xi, eta=eta,
                    Q=lambda p: np.eye(3))
    with pytest.raises(GeodesicViolation):
        tor.torsion_weak_acm(b.at([0.2, 0.1, 0.0]))


def test_special_acm_sasakian_zero(sasaki):
    for geo in _pts(sasaki):
        assert np.abs(tor.torsion_special_acm(geo)).max() < ASM


def test_special_acm_xi_slots_exact_zero(conf1):
    for geo in _pts(conf1):
        Tf = change_basis(tor.torsion_special_acm(geo), geo.frame)
        h = geo.dim - 1
        assert np.abs(Tf[h]).max() < 1e-15
        assert np.abs(Tf[:, h]).max() < 1e-15
        assert np.abs(Tf[:, :, h]).max() < 1e-15


def test_special_acm_conformal_k_skew(conf1):
    for geo in _pts(conf1, 20):
        T = tor.torsion_special_acm(geo)
        assert np.abs(cond_2K_residual(geo, T)).max() < ACC
        K = tor.contorsion_from_torsion(T, geo.f)
        assert np.abs(K + K.transpose(1, 0, 2)).max() < ACC


def test_special_acm_rejects_non_special():
    # a Kenmotsu-type warp fails the special condition on ker eta only via nabla F
    b = S.conformal_hermitian_line(2, 1.0, u=lambda p: 0.4 * p[0] * p[1])
    geo = b.at([0.5, 0.5, 0.1, 0.0, 0.0])
    diag = {}
    try:
        tor.torsion_special_acm(geo, diagnostics=diag)
    except SpecialConditionViolated:
        return
    assert diag["special_condition"] <= ACC


def test_product_lambda_reduction(conf1, kaehler5):
    for b in (conf1, kaehler5):
        assert _diff(tor.torsion_product_lambda, tor.torsion_acm, _pts(b)) < ASM


def test_product_lambda_kaehler_any_lambda():
    for lam in (0.5, 2.0, 3.0):
        for geo in _pts(S.kaehler_line_product(2, lam), 5):
            assert np.abs(tor.torsion_product_lambda(geo)).max() == 0.0


def test_product_lambda_matches_weak(conf2):
    assert _diff(tor.torsion_product_lambda, tor.torsion_weak_acm, _pts(conf2, 20)) < ASM


def test_product_lambda_needs_product(sasaki):
    with pytest.raises(InvalidFactor):
        tor.torsion_product_lambda(sasaki.at([0.0, 0.0, 0.0]))


# -- output shape and assembly ---------------------------------------------------

@pytest.mark.parametrize("name", ["weak", "acm", "special", "product"])
def test_outputs_antisymmetric(conf1, name):
    fn = tor.TORSION_VARIANTS[name]
    for geo in _pts(conf1, 5):
        diag = {}
        T = fn(geo, diagnostics=diag)
        assert antisymmetry12_residual(T) == 0.0
        assert np.all(np.isfinite(T))
        for k, v in diag.items():
            if k != "special_condition":
                assert v < ASM, k


def test_qt_variants_agree_when_q_identity(sasaki):
    for geo in _pts(sasaki, 5):
        a = tor.torsion_weak_acm(geo, variant="matched")
        b = tor.torsion_weak_acm(geo, variant="literal")
        assert np.abs(a - b).max() < ASM


def test_torsion_field_wrapper(conf2):
    field = tor.TorsionField(conf2, "weak")
    p = conf2.sample(1, 0)[0]
    np.testing.assert_array_equal(field(p), tor.torsion_weak_acm(conf2.at(p)))


# -- contorsion and coefficients ------------------------------------------------------

def test_contorsion_zero():
    assert np.abs(tor.contorsion_from_torsion(np.zeros((3, 3, 3)), np.eye(3))).max() == 0.0


def test_contorsion_roundtrip(rng):
    T = rng.normal(size=(5, 5, 5))
    T = T - T.transpose(1, 0, 2)
    f = rng.normal(size=(5, 5))
    K = tor.contorsion_from_torsion(T, f)
    np.testing.assert_allclose(tor.torsion_from_contorsion(K), T, atol=1e-14)


def test_special_contorsion_half_torsion(ch4):
    for geo in _pts(ch4, 5):
        T = tor.torsion_special_hermitian(geo)
        K = tor.contorsion_from_torsion(T, geo.f)
        assert np.abs(K - 0.5 * T).max() < ACC


def test_coefficients_zero_torsion(sasaki):
    for geo in _pts(sasaki, 5):
        np.testing.assert_array_equal(
            tor.connection_coefficients(np.zeros((3, 3, 3)), geo), geo.gamma)


def test_coefficients_recover_torsion(conf2):
    for geo in _pts(conf2, 5):
        T = tor.torsion_weak_acm(geo)
        gam = tor.connection_coefficients(T, geo)
        assert np.abs(tor.torsion_from_coefficients(gam, geo.g) - T).max() < ASM


def test_sasakian_connection_metricity(sasaki):
    chk = metricity_residual(sasaki, tor.torsion_acm, sasaki.sample(50, 0))
    assert chk.passed, chk.line()


def test_direct_acm_connection_matches(conf1):
    for geo in _pts(conf1, 10):
        direct = tor.acm_horizontal_connection(geo)
        K = tor.contorsion_from_torsion(tor.torsion_acm(geo), geo.f)
        E = geo.frame[:, :-1]
        assert np.abs(change_basis(K, E) - direct).max() < ASM
