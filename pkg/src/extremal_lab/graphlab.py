"""Segmentation of the three-dimensional dual diagram into alternating phases.

Joint near-zero points q_k split the axis; between two of them the first
minimum bottoms out at b_k.  On (q_k, b_k) the lower pair of functions falls
and the upper pair rises, on (b_k, q_{k+1}) the roles swap.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .constants import NU, SQRT5
from .errors import SegmentationFailed
from .exponents import _golden, diagram_point
from .minima import MinimaProfile

PSI_AT_B = (1 - SQRT5) / (3 * (3 + SQRT5))


@dataclass
class SegmentReport:
    q: list[float]
    b: list[float]
    c: list[float]
    d: list[float] | None = None
    e: list[float] | None = None
    band_coeff: float = 0.0
    # slopes[k] = {"I": [s_1..s_4], "J": [s_1..s_4]} for pair k
    slopes: list[dict] = field(default_factory=list)
    psi_at_b: list[list[float]] = field(default_factory=list)
    gap_12: tuple[float, float] = (0.0, 0.0)  # (sup, trend)
    gap_34: tuple[float, float] = (0.0, 0.0)

    @property
    def I(self) -> list[tuple[float, float]]:
        return [(self.q[k], self.b[k]) for k in range(len(self.b))]

    @property
    def J(self) -> list[tuple[float, float]]:
        return [(self.b[k], self.q[k + 1]) for k in range(len(self.b))]

    def to_dict(self) -> dict:
        return {"q": self.q, "b": self.b, "c": self.c, "d": self.d, "e": self.e,
                "band_coeff": self.band_coeff, "slopes": self.slopes,
                "psi_at_b": self.psi_at_b, "gap_12": list(self.gap_12),
                "gap_34": list(self.gap_34)}


def _near_zero_points(prof: MinimaProfile, eps_band: float) -> list[int]:
    M = np.abs(prof.values).max(axis=1)
    g = prof.grid
    inner = np.nonzero((M[1:-1] <= M[:-2]) & (M[1:-1] <= M[2:]))[0] + 1
    return [int(i) for i in inner if M[i] <= eps_band * g[i]]


def _merge(prof: MinimaProfile, idx: list[int], depth: float, depth_rel: float) -> list[int]:
    """Collapse neighbours not separated by a real dip of the first minimum.

    Within a merged run the point with the smallest max |L_j| is kept.
    """
    M = np.abs(prof.values).max(axis=1)
    L1 = prof.L(1)
    g = prof.grid
    out: list[int] = []
    for i in idx:
        if out:
            a = out[-1]
            dip = min(L1[a], L1[i]) - L1[a:i + 1].min()
            if dip < max(depth, depth_rel * g[i]):
                if M[i] < M[a]:
                    out[-1] = i
                continue
        out.append(i)
    return out


def _refined_min(prof: MinimaProfile, j: int, lo: int, hi: int) -> float:
    L = prof.L(j)
    i = lo + int(np.argmin(L[lo:hi + 1]))
    a, b = prof.grid[max(i - 1, 0)], prof.grid[min(i + 1, len(prof.grid) - 1)]
    q, v = _golden(lambda x: prof.value_at(x, j), float(a), float(b), maximize=False)
    return q if v <= L[i] else float(prof.grid[i])


def _fit(prof: MinimaProfile, a: float, b: float, margin: float) -> list[float]:
    g = prof.grid
    w = b - a
    sel = (g >= a + margin * w) & (g <= b - margin * w)
    if sel.sum() < 3:
        return [math.nan] * (prof.n + 1)
    return [float(np.polyfit(g[sel], prof.L(j)[sel], 1)[0]) for j in range(1, prof.n + 2)]


def segment(prof: MinimaProfile, eps_band: float = 0.1, margin: float = 0.1,
            depth: float = 0.5, depth_rel: float = 0.02, roy=None) -> SegmentReport:
    """Split a three-dimensional dual profile into (I_k, J_k) pairs.

    ``roy`` (optional record quadratics) enables the d_k, e_k columns: the
    diagram minima of P_{k+1} and T P_{k+1}, matched to b_k by position.
    """
    if prof.side != "dual" or prof.n != 3:
        raise ValueError("segmentation expects a three-dimensional dual profile")
    idx = _merge(prof, _near_zero_points(prof, eps_band), depth, depth_rel)
    if len(idx) < 3:
        raise SegmentationFailed("fewer than 2 complete (I, J) pairs", near_zero=len(idx))
    g = prof.grid
    qs = [float(g[i]) for i in idx]
    bs, cs, slopes, psis = [], [], [], []
    for k in range(len(idx) - 1):
        lo, hi = idx[k], idx[k + 1]
        b = _refined_min(prof, 1, lo, hi)
        bs.append(b)
        cs.append(_refined_min(prof, 2, lo, hi))
        slopes.append({"I": _fit(prof, qs[k], b, margin), "J": _fit(prof, b, qs[k + 1], margin)})
        vals = prof.value_at(b)
        psis.append([v / b for v in vals])
    M = np.abs(prof.values).max(axis=1)
    band = float(max(M[i] / g[i] for i in idx))
    rep = SegmentReport(qs, bs, cs, band_coeff=band, slopes=slopes, psi_at_b=psis)
    d12 = np.abs(prof.L(1) - prof.L(2))
    d34 = np.abs(prof.L(3) - prof.L(4))
    rep.gap_12 = (float(d12.max()), float(np.polyfit(g, d12, 1)[0]))
    rep.gap_34 = (float(d34.max()), float(np.polyfit(g, d34, 1)[0]))
    if roy is not None:
        # T P has the height of P and |T P(zeta)| = zeta |P(zeta)|
        log_zeta = math.log(roy.zeta_value)
        pts = [(diagram_point(math.log(e.height), e.log_value)[0],
                diagram_point(math.log(e.height), e.log_value + log_zeta)[0]) for e in roy.entries]
        near = [min(pts, key=lambda t: abs(t[0] - b)) for b in bs]
        rep.d = [t[0] for t in near]
        rep.e = [t[1] for t in near]
    return rep


@dataclass(frozen=True)
class Claim:
    claim: str
    target: float
    measured: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return abs(self.measured - self.target) <= self.tolerance


def verify_graph_claims(rep: SegmentReport, last: int = 3, slope_tol: float = 0.05,
                        psi_tol: float = 0.01, trend_tol: float = 0.01) -> list[Claim]:
    """Claim table for the last ``last`` (I, J) pairs."""
    claims: list[Claim] = []
    K = len(rep.b)
    ks = range(max(0, K - last), K)
    I_len = [rep.b[k] - rep.q[k] for k in range(K)]
    J_len = [rep.q[k + 1] - rep.b[k] for k in range(K)]
    for k in ks:
        claims.append(Claim(f"i:|I_{k}|/|J_{k}|", 1.0, I_len[k] / J_len[k], 0.1))
    for k in ks:
        if k >= 1:
            claims.append(Claim(f"ii:|I_{k}|/|I_{k-1}|", NU, I_len[k] / I_len[k - 1], 0.1 * NU))
            claims.append(Claim(f"ii:|J_{k}|/|J_{k-1}|", NU, J_len[k] / J_len[k - 1], 0.1 * NU))
    for k in range(max(1, len(rep.q) - last), len(rep.q)):
        claims.append(Claim(f"ii:q_{k}/q_{k-1}", NU, rep.q[k] / rep.q[k - 1], 0.08))
    for k in ks:
        claims.append(Claim(f"ii:b_{k}/q_{k}", (1 + NU) / 2, rep.b[k] / rep.q[k],
                            0.05 * (1 + NU) / 2))
    for k in ks:
        for phase, sign in (("I", -1), ("J", 1)):
            s = rep.slopes[k][phase]
            for j in range(4):
                target = sign / 3 if j < 2 else -sign / 3
                claims.append(Claim(f"iii:{phase}_{k}:L{j + 1}", target, s[j], slope_tol))
    for k in ks:
        claims.append(Claim(f"iv:psi1(b_{k})", PSI_AT_B, rep.psi_at_b[k][0], psi_tol))
        claims.append(Claim(f"iv:psi3(b_{k})", -PSI_AT_B, rep.psi_at_b[k][2], psi_tol))
    claims.append(Claim("v:gap12_trend", 0.0, rep.gap_12[1], trend_tol))
    claims.append(Claim("v:gap34_trend", 0.0, rep.gap_34[1], trend_tol))
    return claims


def claims_csv(claims: list[Claim]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["claim", "target", "measured", "tolerance", "pass"])
    for c in claims:
        w.writerow([c.claim, f"{c.target:.12g}", f"{c.measured:.12g}", f"{c.tolerance:.12g}",
                    int(c.passed)])
    return buf.getvalue()
