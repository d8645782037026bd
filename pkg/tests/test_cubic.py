import json
import math

import mpmath
import numpy as np
import pytest

from extremal_lab import cubic
from extremal_lab.constants import SQRT5
from extremal_lab.cubic import (cubic_experiment, cubic_nonexistence_scan, cubic_uniform_scan,
                                root_constant, triangle_ok, witnesses_json)
from extremal_lab.errors import NoIrreducibleCandidate
from extremal_lab.polynomials import IntPolynomial, irreducible_low_degree


@pytest.fixture(scope="module")
def witnesses(fib_ctx, fib_roy, fib_best):
    return cubic_experiment(fib_ctx, fib_roy, fib_best, 6)


def test_witness_invariants(witnesses, fib_ctx, fib_roy, fib_best):
    assert len({w.k for w in witnesses}) >= 5
    for w in witnesses:
        assert w.S.degree == 3 and irreducible_low_degree(w.S)
        assert w.S.height <= 3 * w.X
        assert triangle_ok(w, fib_roy, fib_best, fib_ctx)
        assert 0 < root_constant(w, fib_ctx) <= 16


def test_exponents_approach_limits(witnesses):
    sel = sorted((w for w in witnesses if w.selected), key=lambda w: w.k)
    polys = [w.exponent_poly for w in sel]
    roots = [w.exponent_root for w in sel]
    assert all(a <= b + 1e-3 for a, b in zip(polys, polys[1:]))
    assert abs(polys[-1] - 3) < 0.05 and abs(roots[-1] - 4) < 0.05


def test_derivative_guard(witnesses):
    for k in {w.k for w in witnesses}:
        best = max(w.log_derivative for w in witnesses if w.k == k)
        X = next(w.X for w in witnesses if w.k == k)
        assert best >= 0.9 * math.log(X) - 2


def test_exponent_against_mpmath(witnesses, fib_ctx):
    cf = fib_ctx.source(3000).quotients
    with mpmath.workprec(4096):
        x = mpmath.mpf(cf[-1])
        for a in reversed(cf[:-1]):
            x = a + 1 / x
        for w in witnesses[-4:]:
            v = abs(mpmath.polyval(list(reversed(w.S.coeffs)), x))
            measured = float(-mpmath.log(v) / mpmath.log(w.S.height))
            assert measured == pytest.approx(w.exponent_poly, abs=1e-9)


def test_strict_mode(monkeypatch, fib_ctx, fib_roy, fib_best):
    monkeypatch.setattr(cubic, "irreducible_low_degree", lambda P: False)
    assert cubic_experiment(fib_ctx, fib_roy, fib_best, 3) == []
    with pytest.raises(NoIrreducibleCandidate):
        cubic_experiment(fib_ctx, fib_roy, fib_best, 3, strict=True)


def test_witness_json(witnesses):
    data = json.loads(witnesses_json(witnesses))
    assert [tuple(d["coeffs"]) for d in data] == [w.S.coeffs for w in witnesses]


def exhaustive(ctx, h, log_bound):
    """Every primitive irreducible cubic (a3 > 0) with H <= h, no shortcut on a0."""
    z = ctx.value
    r = np.arange(-h, h + 1)
    a0, a1, a2, a3 = np.meshgrid(r, r, r, np.arange(1, h + 1), indexing="ij")
    val = np.abs(a0 + a1 * z + a2 * z**2 + a3 * z**3)
    H = np.max(np.abs(np.stack([a0, a1, a2, a3])), axis=0)
    out = set()
    for idx in zip(*np.nonzero((H >= 2) & (np.log(val + 1e-300) <= log_bound(H) + 0.5))):
        P = IntPolynomial(tuple(int(a[idx]) for a in (a0, a1, a2, a3)))
        if math.gcd(*P.coeffs) == 1 and irreducible_low_degree(P):
            if ctx.log_abs_poly(P.coeffs) <= float(log_bound(P.height)):
                out.add(P.coeffs)
    return out


def test_small_scan_matches_exhaustive(fib_ctx):
    got = {P.coeffs for P, _ in cubic_nonexistence_scan(fib_ctx, 10, 0.5)}
    assert got == exhaustive(fib_ctx, 10, lambda H: -3.5 * np.log(H))
    uni = {P.coeffs for P, _ in cubic_uniform_scan(fib_ctx, 10, 0.5)}
    assert uni == exhaustive(fib_ctx, 10, lambda H: np.full(np.shape(H), -(SQRT5 + 0.5) * math.log(10)))


def test_scan_monotone_in_height(fib_ctx):
    small = {P.coeffs for P, _ in cubic_nonexistence_scan(fib_ctx, 20)}
    large = cubic_nonexistence_scan(fib_ctx, 40)
    assert small <= {P.coeffs for P, _ in large}
    assert all(e >= 3.5 for _, e in large)
    assert [P.height for P, _ in large] == sorted(P.height for P, _ in large)
