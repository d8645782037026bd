import sys
from pathlib import Path

import numpy as np
import pytest

from extremal_lab.constants import NU
from extremal_lab.errors import SegmentationFailed
from extremal_lab.graphlab import PSI_AT_B, claims_csv, segment, verify_graph_claims
from extremal_lab.minima import MinimaProfile
from extremal_lab.polynomials import IntPolynomial
from extremal_lab.roy import rank_over_q
from extremal_lab.suites import Lab

sys.path.insert(0, str(Path(__file__).parent))
from synthetic import ideal_dual_n3  # noqa: E402


def test_recovers_ideal_segmentation():
    step = 0.01
    prof, qs = ideal_dual_n3(step=step)
    rep = segment(prof)
    assert rep.q == pytest.approx(qs, abs=step)
    mids = [(a + b) / 2 for a, b in zip(qs, qs[1:])]
    assert rep.b == pytest.approx(mids, abs=step)
    assert all(c.passed for c in verify_graph_claims(rep))
    assert [p[0] for p in rep.psi_at_b] == pytest.approx([PSI_AT_B] * len(mids), abs=1e-4)


def test_ordering_and_cover():
    rep = segment(ideal_dual_n3()[0])
    seq = [x for pair in zip(rep.q, rep.b) for x in pair] + [rep.q[-1]]
    assert all(a < b for a, b in zip(seq, seq[1:]))
    # I_k and J_k tile [q_1, q_last] without overlap
    for (a, b), (c, d) in zip(rep.I, rep.J):
        assert b == c
    assert all(rep.J[k][1] == rep.I[k + 1][0] for k in range(len(rep.J) - 1))


def test_idempotent_and_refinement_stable():
    coarse = 0.02
    p1, _ = ideal_dual_n3(step=coarse)
    p2, _ = ideal_dual_n3(step=coarse / 2)
    r1, r1b, r2 = segment(p1), segment(p1), segment(p2)
    assert r1.to_dict() == r1b.to_dict()
    assert len(r1.q) == len(r2.q)
    assert np.max(np.abs(np.subtract(r1.q, r2.q))) <= coarse + 1e-9
    assert np.max(np.abs(np.subtract(r1.b, r2.b))) <= coarse + 1e-9


def test_segmentation_failures():
    prof, _ = ideal_dual_n3(q0=10.0, count=1)
    with pytest.raises(SegmentationFailed):
        segment(prof)
    flat = MinimaProfile("dual", 2, prof.grid, prof.values[:, :3], prof.witnesses[:, :3], None)
    with pytest.raises(ValueError):
        segment(flat)


def test_claims_csv():
    rep = segment(ideal_dual_n3()[0])
    text = claims_csv(verify_graph_claims(rep))
    lines = text.splitlines()
    assert lines[0] == "claim,target,measured,tolerance,pass"
    assert all(line.endswith(",1") for line in lines[1:])


def test_distorted_picture_fails_claims():
    prof, _ = ideal_dual_n3()
    # stretch the last third of the picture so periods stop growing like nu
    g = prof.grid.copy()
    cut = g > 150
    g[cut] = 150 + (g[cut] - 150) * 1.4
    bent = MinimaProfile("dual", 3, g, prof.values, prof.witnesses, None)
    claims = verify_graph_claims(segment(bent))
    assert not all(c.passed for c in claims)


@pytest.fixture(scope="module")
def real():
    lab = Lab()
    prof = lab.profile(3, "dual", q=60.0)
    return lab, prof, segment(prof, roy=lab.roy)


def test_first_two_witnesses_span_record_plane(real):
    lab, prof, rep = real
    T = IntPolynomial.T()
    for k, (a, b) in enumerate(rep.I):
        if k == 0:
            continue  # below the first full period
        i = int(np.argmin(np.abs(prof.grid - (a + b) / 2)))
        w = [IntPolynomial(v) for v in prof.witness_vectors(i, 2)]
        P = lab.roy.entries[k + 1].poly
        assert rank_over_q(w + [P, T * P], 4) == 2


def test_b_minus_c_bounded(real):
    _, _, rep = real
    gaps = np.subtract(rep.b, rep.c)
    assert np.all(np.abs(gaps) < 1.0)
    assert np.ptp(gaps[1:]) < 0.05
    # the second minimum sits at the diagram point of the record quadratic
    assert rep.d == pytest.approx(rep.c, abs=1e-6)


def test_zero_ratio_grows_like_nu(real):
    _, _, rep = real
    assert rep.q[-1] / rep.q[-2] == pytest.approx(NU, abs=0.08)
