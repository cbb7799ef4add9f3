import numpy as np
import pytest

from econn import structures as S
from econn import torsion as tor
from econn.tolerances import tolerances
from econn.verify import (Oracle, identity_suite, metricity_residual, metricity_tensor,
                          oracle_comparison, oracle_solve, qt_point, qt_residual,
                          solve_least_squares, torsion_basis)

ACC = tolerances("dual")["accept_tol"]


def _by_name(checks):
    return {c.name: c for c in checks}


def _perturbed(fn, where=(0, 1, 2), eps=1e-3):
    def out(geo, diagnostics=None):
        T = fn(geo).copy()
        i, j, k = where
        T[i, j, k] += eps
        T[j, i, k] -= eps
        return T
    return out


# -- metricity ----------------------------------------------------------------

def test_metricity_kaehler_levi_civita(kaehler3):
    chk = metricity_residual(kaehler3, tor.zero_torsion, kaehler3.sample(20, 0))
    assert chk.passed and chk.residual_max < 1e-14


def test_metricity_sasakian_levi_civita_equals_nabla_F(sasaki):
    sample = sasaki.sample(20, 1)
    chk = metricity_residual(sasaki, tor.zero_torsion, sample)
    assert not chk.passed
    from econn.verify import both_bases
    expect = max(both_bases(sasaki.at(p).nabla_F, sasaki.at(p)) for p in sample)
    assert abs(chk.residual_max - expect) < 1e-8


def test_metricity_sasakian_formula(sasaki):
    chk = metricity_residual(sasaki, tor.torsion_acm, sasaki.sample(50, 2))
    assert chk.passed, chk.line()


def test_metricity_conformal_lambda_one(conf1):
    chk = metricity_residual(conf1, tor.torsion_acm, conf1.sample(30, 3))
    assert chk.passed, chk.line()


def test_metricity_perturbation_fails(conf1):
    chk = metricity_residual(conf1, _perturbed(tor.torsion_acm), conf1.sample(10, 4))
    assert not chk.passed
    assert chk.residual_max > 1e-4


# -- Q-T condition ------------------------------------------------------------

def test_qt_identity_q_exact_zero(rng):
    T = rng.normal(size=(3, 3, 3))
    assert qt_point(T - T.transpose(1, 0, 2), np.eye(3)) == 0.0


def test_qt_weak_lambda2(conf2):
    chk = qt_residual(conf2, tor.torsion_weak_acm, conf2.sample(20, 5))
    assert chk.passed, chk.line()


def test_qt_negative_control():
    T = np.zeros((3, 3, 3))
    T[0, 2, 1], T[2, 0, 1] = 1.0, -1.0
    Q = np.diag([1.0, 1.0, 4.0])
    assert qt_point(T, Q) > 1.0


def test_qt_deformed_sasakian():
    b = S.deform_lambda(S.sasakian_heisenberg(1), 2.0)
    chk = qt_residual(b, tor.torsion_weak_acm, b.sample(10, 6))
    assert chk.passed, chk.line()


# -- identity suite ----------------------------------------------------------

def test_suite_kaehler_all_pass(kaehler5):
    checks = identity_suite(kaehler5, tor.torsion_weak_acm, kaehler5.sample(10, 7))
    assert all(c.passed for c in checks), [c.line() for c in checks if not c.passed]


def test_suite_sasakian_all_pass(sasaki):
    checks = identity_suite(sasaki, tor.torsion_acm, sasaki.sample(20, 8))
    assert all(c.passed for c in checks), [c.line() for c in checks if not c.passed]


def test_suite_lambda2_weak(conf2):
    c = _by_name(identity_suite(conf2, tor.torsion_weak_acm, conf2.sample(20, 9)))
    names = ["split: nabla g", "split: nabla F", "cyclic dF + T", "Q-T lemma: dF",
             "Q-T lemma: nabla^g F"]
    assert all(c[n].passed for n in names), [c[n].line() for n in names]


def test_suite_special_conformal(conf1):
    c = _by_name(identity_suite(conf1, tor.torsion_special_acm, conf1.sample(20, 10),
                                special=True))
    for n in ("special: T(Y,Z,fX)+T(X,Z,fY)", "special: condition on nabla^g F",
              "special: K_X Y = -K_Y X", "special: symmetric part = Levi-Civita"):
        assert c[n].passed, c[n].line()


def test_suite_checks_have_consistent_stats(conf1):
    for chk in identity_suite(conf1, tor.torsion_acm, conf1.sample(5, 11)):
        assert chk.residual_max >= chk.residual_mean >= 0.0
        assert chk.points_evaluated == 5


def test_suite_rederived_lemma_on_exact_connection(conf1):
    c = _by_name(identity_suite(conf1, tor.torsion_acm, conf1.sample(10, 12)))
    assert c["Q-T lemma: T(fY,Z,f(I+Q)X) rederived"].passed
    assert c["metricity"].passed


def test_suite_monotonicity(conf1):
    sample = conf1.sample(10, 13)
    base = identity_suite(conf1, tor.torsion_acm, sample)
    tight = identity_suite(conf1, tor.torsion_acm, sample,
                           tol_overrides={"accept_tol": ACC / 10})
    for a, b in zip(base, tight):
        assert a.name == b.name and a.residual_max == b.residual_max
        flipped = a.passed and not b.passed
        in_band = b.tolerance < a.residual_max <= a.tolerance
        assert flipped == (in_band and a.passed)


# -- oracle --------------------------------------------------------------------

def test_basis_size():
    d = 5
    assert len(torsion_basis(d)) == d * (d - 1) // 2 * d


def test_oracle_kaehler_zero(kaehler3):
    sol = oracle_solve(kaehler3, kaehler3.sample(1, 0)[0])
    assert np.abs(sol.torsion).max() < 1e-10
    assert sol.residual < 1e-10


def test_oracle_sasakian_matches(sasaki):
    for p in sasaki.sample(5, 14):
        geo = sasaki.at(p)
        sol = oracle_solve(sasaki, p, formula=tor.torsion_acm(geo))
        assert sol.comparisons["formula"]["discrepancy"] < ACC


def test_oracle_lambda2_matches(conf2):
    for p in conf2.sample(3, 15):
        sol = oracle_solve(conf2, p, formula=tor.torsion_weak_acm(conf2.at(p)))
        assert sol.unique
        assert sol.comparisons["formula"]["discrepancy"] < ACC


def test_oracle_lambda2_unique_solution_exists(conf2):
    sol = oracle_solve(conf2, conf2.sample(1, 16)[0])
    assert sol.unique and sol.residual < 1e-10


def test_oracle_variant_ranking(conf2):
    _, summary = oracle_comparison(conf2, conf2.sample(3, 17))
    assert summary["winner"] == tor.DEFAULT_QT_VARIANT
    assert not summary["tie"]


def test_oracle_soundness(conf1, conf2, sasaki):
    for b in (conf1, conf2, sasaki):
        for p in b.sample(3, 18):
            sol = oracle_solve(b, p)
            direct = float(np.abs(metricity_tensor(b.at(p), sol.torsion)).max())
            assert abs(direct - sol.metricity_residual) < 1e-10


def test_oracle_paths_agree(conf2):
    for p in conf2.sample(3, 19):
        orc = Oracle(conf2.at(p))
        xn = solve_least_squares(orc.A, orc.rhs, "normal")[0]
        xq = solve_least_squares(orc.A, orc.rhs, "qr")[0]
        assert np.abs(xn - xq).max() < 1e-8


def test_oracle_recovers_exact_connection(conf1):
    # without Q-T constraints the minimizer set contains the exact formula torsion
    for p in conf1.sample(3, 20):
        geo = conf1.at(p)
        orc = Oracle(geo, impose_qt=False)
        assert orc.discrepancy(tor.torsion_acm(geo)) < ACC
        assert orc.certificate(tor.torsion_acm(geo))["metricity"] < ACC


def test_oracle_dimension_guard():
    with pytest.raises(ValueError):
        oracle_solve(S.kaehler_line_product(4), np.zeros(9))
