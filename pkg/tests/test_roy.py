import json
import math

import numpy as np
import pytest

from extremal_lab.constants import NU, RHO
from extremal_lab.errors import EmptySequence, InsufficientRoyEntries
from extremal_lab.polynomials import IntPolynomial, irreducible_low_degree
from extremal_lab.roy import (CLUSTER_FACTOR, RoySequence, best_approx_polys,
                              extract_roy_sequence, growth_stats, max_exponent_tail, q_k1,
                              rank_over_q, structured_candidates, u_v_pair)

T = IntPolynomial.T()


def test_gamma_is_not_extremal(gamma_ctx):
    with pytest.raises(EmptySequence) as exc:
        extract_roy_sequence(gamma_ctx, 1000, eps_detect=0.5)
    assert exc.value.code == "empty-sequence"


def test_gamma_linear_heights_are_fibonacci(gamma_ctx):
    hs = best_approx_polys(gamma_ctx, 1000).heights()
    assert hs == [1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377, 610, 987]


def test_linear_sequence_invariants(fib_ctx, fib_best):
    hs = fib_best.heights()
    assert all(a < b for a, b in zip(hs, hs[1:]))
    assert all(a > b for a, b in zip(fib_best.log_values, fib_best.log_values[1:]))
    lh = np.array([math.log(h) for h in hs])
    ratios = lh[11:] / lh[10:-1]
    assert ratios.min() >= 0.8 and ratios.max() <= 1.25
    # |E(zeta)| << 1/H(E)
    assert max(v + l for v, l in zip(fib_best.log_values, lh)) < 1.0
    # E_l(T) = q_l T - p_l from the convergents
    cf = fib_ctx.source(64)
    convs = {(p, q) for p, q in cf.convergents()}
    assert all((-E.coeffs[0], E.coeffs[1]) in convs for E in fib_best.entries[:30])


def test_record_quadratics_invariants(fib_roy):
    es = fib_roy.entries
    assert len(es) >= 10
    assert all(a.height < b.height for a, b in zip(es, es[1:]))
    for e in es:
        assert e.poly.degree == 2 and irreducible_low_degree(e.poly)
        assert e.log_value <= (-RHO + 0.5) * math.log(e.height)
    for a, b in zip(es, es[1:]):
        assert rank_over_q([a.poly, b.poly], 3) == 2


def test_record_quadratics_against_exhaustive_scan(fib_ctx):
    bound = 60
    z = fib_ctx.value
    a = np.arange(-bound, bound + 1)
    a0, a1, a2 = np.meshgrid(a, a, np.arange(1, bound + 1), indexing="ij")
    val = np.abs(a0 + a1 * z + a2 * z * z)
    H = np.maximum(np.maximum(np.abs(a0), np.abs(a1)), a2)
    with np.errstate(divide="ignore"):
        expo = -np.log(val) / np.log(H)
    hits = []
    for i in zip(*np.nonzero((H >= 2) & (expo >= RHO - 0.5 + 1e-6))):
        P = IntPolynomial((int(a0[i]), int(a1[i]), int(a2[i])))
        if P.content() == 1 and irreducible_low_degree(P):
            hits.append((P.height, float(val[i]), P.coeffs))
    hits.sort()
    clusters = [[hits[0]]]
    for h in hits[1:]:
        if h[0] <= CLUSTER_FACTOR * clusters[-1][-1][0]:
            clusters[-1].append(h)
        else:
            clusters.append([h])
    expected = [min(c, key=lambda t: (t[1], t[0], t[2]))[2] for c in clusters]
    got = [e.poly.coeffs for e in extract_roy_sequence(fib_ctx, bound).entries]
    assert got == expected


def test_growth_and_exponents(fib_roy):
    st = growth_stats(fib_roy)
    assert np.abs(st.height_dev).max() <= 1.0
    assert np.abs(st.value_dev).max() <= 2.0
    assert abs(st.height_trend) <= 0.05 and abs(st.value_trend) <= 0.05
    lh = fib_roy.log_heights()
    assert lh[-1] / lh[-2] == pytest.approx(NU, abs=0.02)
    assert abs(max_exponent_tail(fib_roy, 5) - RHO) <= 0.1


def test_structured_rank_n4(fib_roy):
    P = fib_roy.polys
    for k in range(2, len(P)):
        fam = [P[k], T * P[k], T * T * P[k], P[k - 1] * P[k - 2]]
        assert rank_over_q(fam, 5) == 4


def test_structured_rank_n3(fib_roy, fib_best):
    P = fib_roy.polys
    for k in range(2, len(P) - 1):
        X = P[k + 1].height
        pair = u_v_pair(P[k], fib_best, X)
        assert pair is not None
        assert rank_over_q([P[k + 1], T * P[k + 1], *pair], 4) == 4
        Q = q_k1(P[k], fib_best, X)
        assert Q is not None and Q.height <= X


def test_structured_family_contents(fib_roy, fib_best):
    fam = structured_candidates(fib_roy, fib_best, 4, 10**20)
    assert all(P.height <= 10**20 for P in fam)
    assert len(set(P.coeffs for P in fam)) == len(fam)
    with pytest.raises(InsufficientRoyEntries):
        structured_candidates(RoySequence(fib_roy.entries[:2]), fib_best, 3, 10**6)
    with pytest.raises(ValueError):
        structured_candidates(fib_roy, fib_best, 5, 10**6)


def test_json_roundtrip(fib_roy):
    data = json.loads(fib_roy.to_json())
    assert [tuple(d["coeffs"]) for d in data] == [e.poly.coeffs for e in fib_roy.entries]
    assert data[0]["height"] == fib_roy.entries[0].height
