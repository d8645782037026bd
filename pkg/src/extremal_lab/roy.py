"""Record quadratic and linear polynomials for a target number, and the
product families built from them.

The quadratic records are found empirically: a brute scan over small
heights and reduced lattice bases beyond, filtered by an exponent threshold.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .constants import RHO
from .errors import EmptySequence, InsufficientRoyEntries, PrecisionExhausted
from .lattice import reduced_sweep
from .polynomials import IntPolynomial, irreducible_low_degree, poly_mul
from .precision import ZetaContext

BRUTE_LIMIT = 1000
CLUSTER_FACTOR = 1.3


@dataclass(frozen=True)
class RoyEntry:
    poly: IntPolynomial
    height: int
    log_value: float  # log|P(zeta)|
    log_derivative: float  # log|P'(zeta)|

    @property
    def exponent(self) -> float:
        return -self.log_value / math.log(self.height)


@dataclass(frozen=True)
class RoySequence:
    entries: tuple[RoyEntry, ...]
    zeta_value: float = math.nan

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, k: int) -> RoyEntry:
        return self.entries[k]

    @property
    def polys(self) -> list[IntPolynomial]:
        return [e.poly for e in self.entries]

    def log_heights(self) -> np.ndarray:
        return np.array([math.log(e.height) for e in self.entries])

    def to_json(self) -> str:
        return json.dumps([
            {"coeffs": list(e.poly.coeffs), "height": e.height,
             "log_value": e.log_value, "log_derivative": e.log_derivative}
            for e in self.entries
        ], indent=1)


@dataclass(frozen=True)
class BestApproxSequence:
    entries: tuple[IntPolynomial, ...]
    log_values: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, k: int) -> IntPolynomial:
        return self.entries[k]

    def heights(self) -> list[int]:
        return [E.height for E in self.entries]


def best_approx_polys(ctx: ZetaContext, h_max: int) -> BestApproxSequence:
    """Linear polynomials q T - p from the convergents p/q, heights up to h_max.

    Heights are kept strictly increasing; a convergent that does not raise
    the height replaces its predecessor when it is closer to zeta.
    """
    if h_max < 1:
        raise ValueError("h_max must be >= 1")
    length = 64
    while True:
        cf = ctx.source(length)
        conv = list(cf.convergents())
        if conv[-1][1] > h_max or len(conv) < length + 1:
            break
        length *= 2
    polys: list[IntPolynomial] = []
    logs: list[float] = []
    for p, q in conv:
        if q == 0:
            continue
        E = IntPolynomial.of(-p, q).normalized()
        if E.height > h_max:
            break
        try:
            lv = ctx.log_abs_poly(E.coeffs)
        except PrecisionExhausted:
            continue  # zeta rational at this depth; nothing to approximate
        if polys and E.height <= polys[-1].height:
            if lv < logs[-1]:
                polys[-1], logs[-1] = E, lv
            continue
        polys.append(E)
        logs.append(lv)
    return BestApproxSequence(tuple(polys), tuple(logs))


def _brute_quadratics(ctx: ZetaContext, bound: int, exponent: float) -> list[tuple[int, ...]]:
    z = ctx.value
    out: list[tuple[int, ...]] = []
    a1 = np.arange(-bound, bound + 1, dtype=np.int64)
    for a2 in range(1, bound + 1):
        t = a2 * z * z + a1 * z
        a0 = -np.rint(t).astype(np.int64)
        val = np.abs(t + a0)
        H = np.maximum(np.maximum(np.abs(a0), np.abs(a1)), a2)
        # loose float filter; exact check follows
        ok = (H <= bound) & (H >= 2) & (val <= 4.0 * H.astype(float) ** (-exponent) + 1e-12)
        for i in np.nonzero(ok)[0]:
            out.append((int(a0[i]), int(a1[i]), a2))
    return out


def extract_roy_sequence(ctx: ZetaContext, h_max: int, eps_detect: float = 0.5) -> RoySequence:
    """Irreducible quadratics with log|P(zeta)| <= (-rho + eps) log H(P), H(P) <= h_max.

    One representative (smallest |P(zeta)|) per cluster of comparable heights.
    """
    if h_max < 10:
        raise ValueError("h_max must be >= 10")
    exponent = RHO - eps_detect
    raw = _brute_quadratics(ctx, min(h_max, BRUTE_LIMIT), exponent)
    if h_max > BRUTE_LIMIT:
        q_top = 2 * math.log(h_max) + 4
        grid = np.arange(1, int(q_top / 0.05) + 1) * 0.05
        for _, vecs in reduced_sweep(ctx, 2, "dual", grid):
            raw.extend(vecs)
    found: dict[tuple[int, ...], RoyEntry] = {}
    for v in raw:
        P = IntPolynomial(tuple(v)).normalized()
        if P.degree != 2 or P.height > h_max or P.height < 2 or P.coeffs in found:
            continue
        try:
            lv = ctx.log_abs_poly(P.coeffs)
        except PrecisionExhausted:
            continue
        if lv > -exponent * math.log(P.height):
            continue
        if not irreducible_low_degree(P):
            continue
        found[P.coeffs] = RoyEntry(P, P.height, lv, ctx.log_abs_poly(P.derivative().coeffs))
    if not found:
        raise EmptySequence("no quadratic reaches the detection exponent",
                            h_max=h_max, eps_detect=eps_detect)
    ordered = sorted(found.values(), key=lambda e: (e.height, e.log_value, e.poly.coeffs))
    clusters: list[list[RoyEntry]] = [[ordered[0]]]
    for e in ordered[1:]:
        if e.height <= CLUSTER_FACTOR * clusters[-1][-1].height:
            clusters[-1].append(e)
        else:
            clusters.append([e])
    reps = [min(c, key=lambda e: (e.log_value, e.height, e.poly.coeffs)) for c in clusters]
    return RoySequence(tuple(reps), ctx.value)


def u_v_pair(P: IntPolynomial, best: BestApproxSequence,
             x_tilde: float) -> tuple[IntPolynomial, IntPolynomial] | None:
    """(P E_t, P E_{t+1}) for the largest t with both heights <= x_tilde."""
    pair = None
    for t in range(len(best) - 1):
        U = poly_mul(P, best[t]).product
        V = poly_mul(P, best[t + 1]).product
        if max(U.height, V.height) > x_tilde:
            break
        pair = (U, V)
    return pair


def q_k1(P: IntPolynomial, best: BestApproxSequence, X: float) -> IntPolynomial | None:
    """P E_l with l largest such that H(P E_l) <= X."""
    Q = None
    for E in best.entries:
        R = poly_mul(P, E).product
        if R.height > X:
            break
        Q = R
    return Q


def structured_candidates(roy: RoySequence, best: BestApproxSequence, n: int,
                          x_budget: float) -> list[IntPolynomial]:
    """Product families of the record polynomials with height <= x_budget.

    n = 3: P_k, T P_k and every consecutive pair P_k E_t, P_k E_{t+1}
    (this covers the (U, V) pairs for all values of the height parameter);
    n = 4: P_k, T P_k, T^2 P_k and P_{k-1} P_{k-2};
    n = 2: P_k, E_l and T E_l.
    """
    if n not in (2, 3, 4):
        raise ValueError("structured families exist for n in {2, 3, 4}")
    if len(roy) < 3:
        raise InsufficientRoyEntries("need at least 3 record quadratics", have=len(roy))
    T = IntPolynomial.T()
    out: dict[tuple[int, ...], IntPolynomial] = {}

    def add(P: IntPolynomial) -> None:
        if P.height <= x_budget and not P.is_zero():
            out.setdefault(P.normalized().coeffs, P.normalized())

    polys = roy.polys
    if n == 2:
        for P in polys:
            add(P)
        for E in best.entries:
            add(E)
            add(poly_mul(T, E, 2).product)
    elif n == 3:
        for P in polys:
            add(P)
            add(poly_mul(T, P, 3).product)
            for t in range(len(best)):
                R = poly_mul(P, best[t], 3).product
                if R.height > x_budget:
                    break
                add(R)
                if t + 1 < len(best):
                    add(poly_mul(P, best[t + 1], 3).product)
    else:
        for k, P in enumerate(polys):
            add(P)
            add(poly_mul(T, P, 4).product)
            add(poly_mul(T * T, P, 4).product)
            if k >= 2:
                add(poly_mul(polys[k - 1], polys[k - 2], 4).product)
    return sorted(out.values(), key=lambda P: (P.height, P.coeffs))


def structured_for_context(ctx: ZetaContext, n: int, h_max: float) -> list[IntPolynomial]:
    """Record sequences for ``ctx`` up to height h_max, then their families."""
    h = max(int(h_max), 10)
    roy = extract_roy_sequence(ctx, h)
    best = best_approx_polys(ctx, h)
    return structured_candidates(roy, best, n, h)


@dataclass(frozen=True)
class GrowthStats:
    """Deviations from the asymptotic laws, with their linear trends in k."""

    height_dev: np.ndarray  # log H_{k+1} - nu log H_k
    value_dev: np.ndarray  # log|P_k(zeta)| + rho log H_k
    derivative_ratio: np.ndarray  # |P_k'(zeta)| / H_k
    height_trend: float
    value_trend: float


def growth_stats(roy: RoySequence) -> GrowthStats:
    from .constants import NU

    lh = roy.log_heights()
    hd = lh[1:] - NU * lh[:-1]
    vd = np.array([e.log_value for e in roy.entries]) + RHO * lh
    dr = np.exp(np.array([e.log_derivative for e in roy.entries]) - lh)

    def trend(y: np.ndarray) -> float:
        return float(np.polyfit(np.arange(len(y)), y, 1)[0]) if len(y) >= 3 else 0.0

    return GrowthStats(hd, vd, dr, trend(hd), trend(vd))


def max_exponent_tail(roy: RoySequence, tail: int = 5) -> float:
    return max(e.exponent for e in roy.entries[-tail:])


def rank_over_q(polys: Sequence[IntPolynomial], length: int) -> int:
    from .minima import Echelon

    ech = Echelon()
    return sum(ech.add(P.padded(length)) for P in polys)
