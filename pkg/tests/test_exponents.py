import math
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from extremal_lab.constants import GAMMA, RHO, SQRT5
from extremal_lab.errors import Degenerate, GridMismatch, InsufficientRange, PsiOutOfDomain
from extremal_lab.exponents import (ExponentReport, debre_products, deckel_triggered,
                                    duality_residuals, estimate_extrema, exponent_report,
                                    exponent_to_psi, pairing_gaps, parametric_identity_residuals,
                                    psi_to_exponent, synthetic_slope, technisch_slope,
                                    transference_check)
from extremal_lab.minima import MinimaProfile
from extremal_lab.polynomials import IntPolynomial
from extremal_lab.suites import Lab

sys.path.insert(0, str(Path(__file__).parent))
from synthetic import ideal_dual_n3, mirror_simultaneous  # noqa: E402


def test_conversion_examples():
    assert psi_to_exponent(0.0, 5, "simultaneous") == pytest.approx(1 / 5)
    assert psi_to_exponent((1 - SQRT5) / (3 * (3 + SQRT5)), 3, "dual") == pytest.approx(RHO)
    assert psi_to_exponent((2 - SQRT5) / (4 * (3 + SQRT5)), 4, "dual") == pytest.approx(RHO)
    with pytest.raises(PsiOutOfDomain):
        psi_to_exponent(-0.5, 2, "dual")
    with pytest.raises(PsiOutOfDomain):
        psi_to_exponent(-1.0, 2, "simultaneous")


@given(st.integers(1, 4), st.sampled_from(["simultaneous", "dual"]), st.floats(0.0, 1.0))
def test_conversion_roundtrip(n, side, t):
    lo, hi = (-1.0, 1 / n) if side == "simultaneous" else (-1 / n, 1.0)
    psi = lo + (hi - lo) * t
    if psi <= lo:
        return
    e = psi_to_exponent(psi, n, side)
    assert exponent_to_psi(e, n, side) == pytest.approx(psi, abs=1e-12)


@pytest.fixture(scope="module")
def ideal():
    dual, _ = ideal_dual_n3()
    return dual, mirror_simultaneous(dual)


def test_ideal_picture_reproduces_exponent_table(ideal):
    dual, sim = ideal
    rep = exponent_report(sim, dual)
    tol = 2e-3
    assert rep.w[0] == pytest.approx(RHO, abs=tol)
    assert rep.w_hat[0] == pytest.approx(3, abs=tol)
    assert rep.lam[0] == pytest.approx(1 / SQRT5, abs=tol)
    assert rep.lam_hat[0] == pytest.approx(1 / 3, abs=tol)
    for j in (2, 3):
        assert rep.w_hat[j] == pytest.approx(SQRT5, abs=tol)
        assert rep.lam_hat[j] == pytest.approx(1 / RHO, abs=tol)
        assert rep.w[j] == pytest.approx(3, abs=tol)
        assert rep.lam[j] == pytest.approx(1 / 3, abs=tol)
    assert debre_products(rep) == pytest.approx([1] * 4, abs=5e-3)
    ex = estimate_extrema(dual)
    assert ex[0].lower == pytest.approx((1 - SQRT5) / (3 * (3 + SQRT5)), abs=1e-4)
    assert ex[0].upper == pytest.approx(0, abs=1e-4)
    assert all(e.lower_spread < 1e-3 and e.upper_spread < 1e-3 for e in ex)


def test_extrema_need_periods(ideal):
    dual, _ = ideal
    cut = dual.grid < 30
    short = MinimaProfile("dual", 3, dual.grid[cut], dual.values[cut], dual.witnesses[cut], None)
    with pytest.raises(InsufficientRange):
        estimate_extrema(short)


def test_duality_of_mirrored_profiles(ideal):
    dual, sim = ideal
    for r in duality_residuals(sim, dual):
        assert r.max_abs == 0 and r.slope == pytest.approx(0, abs=1e-15)
    cut = MinimaProfile("simultaneous", 3, sim.grid[:-1], sim.values[:-1], sim.witnesses[:-1], None)
    with pytest.raises(GridMismatch):
        duality_residuals(cut, dual)


def report(n, lam, w, lam_hat=math.nan, w_hat=math.nan):
    nan = [math.nan] * n
    return ExponentReport(n, [lam] + nan, [lam_hat] + nan, [w] + nan, [w_hat] + nan)


def test_khintchine_collapses_for_n1():
    (k,) = [c for c in transference_check(report(1, 2.5, 2.5)) if c.name == "khintchine"]
    assert k.lower == pytest.approx(2.5) and k.upper == pytest.approx(2.5) and k.ok


def test_khintchine_n3_strict():
    (k,) = [c for c in transference_check(report(3, 1 / SQRT5, RHO)) if c.name == "khintchine"]
    assert (k.lower, k.value, k.upper) == pytest.approx((0.3693, 0.4472, 0.7454), abs=1e-4)
    assert k.ok and not deckel_triggered(report(3, 1 / SQRT5, RHO))


def test_deckel_rows_fire_on_equality():
    good = report(4, GAMMA / 2, RHO, lam_hat=0.25, w_hat=4.0)
    assert deckel_triggered(good)
    names = {c.name: c for c in transference_check(good)}
    assert names["deckel_w_hat"].ok and names["deckel_lambda_hat"].ok
    bad = report(4, GAMMA / 2, RHO, lam_hat=0.3, w_hat=4.3)
    names = {c.name: c for c in transference_check(bad)}
    assert not names["deckel_w_hat"].ok and not names["deckel_lambda_hat"].ok


def test_german_n2_identity():
    # for n = 2 both German bounds equal 1 - 1/w_hat
    (g,) = [c for c in transference_check(report(2, 1.0, RHO, 1 / (1 + GAMMA), 1 + 1 / GAMMA))
            if c.name == "german"]
    assert g.lower == pytest.approx(g.upper) and g.ok


def test_synthetic_slope():
    assert synthetic_slope(10.0, -40.0, 7.0, 0.0) == pytest.approx(1 / 3, abs=1e-15)
    # |Q(zeta)| = H(Q)^-2: delta = -1 lies outside the regime of the bound
    far = synthetic_slope(10.0, -40.0, 7.0, -1.0)
    assert abs(far - 1 / 3) > 0.1
    with pytest.raises(Degenerate):
        synthetic_slope(10.0, -40.0, 0.0, 0.0)


def test_technisch_on_record_pairs(fib_ctx, fib_roy, fib_best):
    checks = [technisch_slope(e.poly, E, fib_ctx)
              for E in fib_best.entries if 300 <= E.height <= 5000
              for e in fib_roy.entries[2:]]
    assert len(checks) >= 20
    assert all(c.within_bound for c in checks)
    assert any(c.applicable for c in checks)
    out = technisch_slope(fib_roy.entries[2].poly, fib_best.entries[1], fib_ctx)
    assert not out.applicable
    with pytest.raises(Degenerate):
        technisch_slope(fib_roy.entries[3].poly, IntPolynomial.T(), fib_ctx)


@pytest.fixture(scope="module")
def lab60():
    return Lab()


def test_parametric_identity_on_real_profiles(lab60):
    for n in (2, 3):
        prof = lab60.profile(n, "dual", q=60.0)
        for j in range(1, n + 2):
            assert max(parametric_identity_residuals(prof, j)) <= 0.05


def test_product_identity_within_bands(lab60):
    for n in (2, 3):
        rep = lab60.report(n, 60.0)
        for j in range(n + 1):
            lo_l, hi_l = sorted(rep.bands["lambda"][j])
            lo_w, hi_w = sorted(rep.bands["w_hat"][n - j])
            assert lo_l * lo_w <= 1 <= hi_l * hi_w


def test_dirichlet_floors_and_monotonicity(lab60):
    for n in (2, 3):
        rep = lab60.report(n, 60.0)
        assert rep.w_hat[0] >= n - 0.05 and rep.lam_hat[0] >= 1 / n - 0.02
        assert rep.w[0] >= rep.w_hat[0] and rep.lam[0] >= rep.lam_hat[0]
        assert all(a >= b - 1e-9 for a, b in zip(rep.w, rep.w[1:]))
        assert all(a >= b - 1e-9 for a, b in zip(rep.lam, rep.lam[1:]))


def test_pairing_gaps_bounded(lab60):
    gaps = pairing_gaps(lab60.profile(3, "dual", q=60.0))
    for sup, trend in gaps.values():
        assert sup < 2.0 and abs(trend) <= 0.01
