"""Classical exponents from minima profiles, and the relations between them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .constants import GAMMA, NU, RHO, TAU, Constants  # noqa: F401  (re-exported)
from .errors import Degenerate, GridMismatch, InsufficientRange, PsiOutOfDomain
from .minima import MinimaProfile
from .polynomials import IntPolynomial, poly_mul
from .precision import ZetaContext

# ---------------------------------------------------------------------------
# conversions


def psi_to_exponent(psi: float, n: int, side: str) -> float:
    """Exponent attached to a psi extremum (liminf gives the ordinary, limsup the uniform one)."""
    if side == "simultaneous":
        if not -1 < psi <= 1 / n + 1e-15:
            raise PsiOutOfDomain("simultaneous psi must lie in (-1, 1/n]", psi=psi, n=n)
        return (n + 1) / (n * (1 + psi)) - 1
    if side == "dual":
        if not -1 / n < psi <= 1 + 1e-15:
            raise PsiOutOfDomain("dual psi must lie in (-1/n, 1]", psi=psi, n=n)
        return (n + 1) / (n * (1 / n + psi)) - 1
    raise ValueError(f"unknown side {side!r}")


def exponent_to_psi(exponent: float, n: int, side: str) -> float:
    if exponent <= -1:
        raise PsiOutOfDomain("exponent must exceed -1", exponent=exponent)
    if side == "simultaneous":
        return (n + 1) / (n * (1 + exponent)) - 1
    if side == "dual":
        return (n + 1) / (n * (1 + exponent)) - 1 / n
    raise ValueError(f"unknown side {side!r}")


# ---------------------------------------------------------------------------
# extrema of psi


def _golden(f, a: float, b: float, maximize: bool, iters: int = 40) -> tuple[float, float]:
    g = (math.sqrt(5) - 1) / 2
    sgn = -1.0 if maximize else 1.0
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = sgn * f(c), sgn * f(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = sgn * f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = sgn * f(d)
    x = c if fc < fd else d
    return x, sgn * min(fc, fd)


def _local_extrema(y: np.ndarray, maximize: bool) -> np.ndarray:
    s = -y if maximize else y
    inner = np.nonzero((s[1:-1] <= s[:-2]) & (s[1:-1] <= s[2:]))[0] + 1
    return inner


def oscillation_minima(prof: MinimaProfile, rel_window: float = 0.25) -> np.ndarray:
    """Grid indices of prominent minima of psi_1.

    A minimum is prominent if psi_1 is smallest there over the window
    [q (1 - rel_window), q (1 + rel_window)]; consecutive ones bound a period.
    """
    psi1 = prof.psi(1)
    g = prof.grid
    out = []
    for i in _local_extrema(psi1, maximize=False):
        lo = np.searchsorted(g, g[i] * (1 - rel_window))
        hi = np.searchsorted(g, g[i] * (1 + rel_window), side="right")
        if hi >= len(g):
            continue  # window not fully covered
        if psi1[i] <= psi1[lo:hi].min() + 1e-12:
            if not out or g[i] - g[out[-1]] > 1e-9 + 2 * (g[1] - g[0]):
                out.append(i)
    return np.array(out, dtype=int)


@dataclass(frozen=True)
class PsiExtrema:
    lower: float  # refined liminf proxy
    upper: float  # refined limsup proxy
    lower_spread: float
    upper_spread: float
    lower_at: float
    upper_at: float


def estimate_extrema(prof: MinimaProfile, tail: float = 0.6, refine: int = 5,
                     periods: int = 3) -> list[PsiExtrema]:
    """Per level j, min and max of psi_j over the last ``tail`` of the grid.

    The smallest (largest) few grid-level local extrema are refined by golden
    section on the exact successive minima.  Spreads are the ranges of the
    per-period extrema over the last ``periods`` oscillation periods.
    """
    marks = oscillation_minima(prof)
    if len(marks) < periods + 1:
        raise InsufficientRange("profile covers too few oscillation periods",
                                found=max(len(marks) - 1, 0), needed=periods)
    g = prof.grid
    start = int(len(g) * (1 - tail))
    bounds = [(int(marks[i]), int(marks[i + 1])) for i in range(len(marks) - periods - 1, len(marks) - 1)]
    out = []
    for j in range(1, prof.n + 2):
        psi = prof.psi(j)

        def f(q: float, j=j) -> float:
            return prof.value_at(q, j) / q

        res = {}
        for maximize in (False, True):
            seg = psi[start:]
            idx = _local_extrema(seg, maximize) + start
            if len(idx) == 0:
                idx = np.array([start + (np.argmax(seg) if maximize else np.argmin(seg))])
            order = idx[np.argsort(-psi[idx] if maximize else psi[idx])][:refine]
            best_q, best_v = float(g[order[0]]), float(psi[order[0]])
            for i in order:
                a, b = g[max(i - 1, 0)], g[min(i + 1, len(g) - 1)]
                q, v = _golden(f, float(a), float(b), maximize)
                v0 = float(psi[i])
                if (v0 > v) if maximize else (v0 < v):
                    q, v = float(g[i]), v0
                if (v > best_v) if maximize else (v < best_v):
                    best_q, best_v = q, v
            per = [float(psi[a:b + 1].max() if maximize else psi[a:b + 1].min()) for a, b in bounds]
            res[maximize] = (best_v, best_q, max(per) - min(per))
        out.append(PsiExtrema(res[False][0], res[True][0], res[False][2], res[True][2],
                              res[False][1], res[True][1]))
    return out


# ---------------------------------------------------------------------------
# reports


@dataclass
class ExponentReport:
    """Exponent estimates per level j = 1..n+1 (nan where the side was not computed).

    ``*_band`` entries are (low, high) images of the psi uncertainty.
    """

    n: int
    lam: list[float]
    lam_hat: list[float]
    w: list[float]
    w_hat: list[float]
    sim_extrema: list[PsiExtrema] | None = None
    dual_extrema: list[PsiExtrema] | None = None
    bands: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def ext(es):
            return None if es is None else [e.__dict__ for e in es]
        return {"n": self.n, "lambda": self.lam, "lambda_hat": self.lam_hat,
                "w": self.w, "w_hat": self.w_hat,
                "psi_simultaneous": ext(self.sim_extrema), "psi_dual": ext(self.dual_extrema),
                "bands": self.bands}


def _safe(psi: float, n: int, side: str) -> float:
    try:
        return psi_to_exponent(psi, n, side)
    except PsiOutOfDomain:
        return math.inf


def exponent_report(sim: MinimaProfile | None = None, dual: MinimaProfile | None = None,
                    **kw) -> ExponentReport:
    profs = [p for p in (sim, dual) if p is not None]
    if not profs:
        raise ValueError("need at least one profile")
    n = profs[0].n
    nan = [math.nan] * (n + 1)
    rep = ExponentReport(n, list(nan), list(nan), list(nan), list(nan))
    if sim is not None:
        ex = estimate_extrema(sim, **kw)
        rep.sim_extrema = ex
        rep.lam = [_safe(e.lower, n, "simultaneous") for e in ex]
        rep.lam_hat = [_safe(e.upper, n, "simultaneous") for e in ex]
        rep.bands["lambda"] = [(_safe(e.lower + e.lower_spread, n, "simultaneous"),
                                _safe(e.lower - e.lower_spread, n, "simultaneous")) for e in ex]
        rep.bands["lambda_hat"] = [(_safe(e.upper + e.upper_spread, n, "simultaneous"),
                                    _safe(e.upper - e.upper_spread, n, "simultaneous")) for e in ex]
    if dual is not None:
        ex = estimate_extrema(dual, **kw)
        rep.dual_extrema = ex
        rep.w = [_safe(e.lower, n, "dual") for e in ex]
        rep.w_hat = [_safe(e.upper, n, "dual") for e in ex]
        rep.bands["w"] = [(_safe(e.lower + e.lower_spread, n, "dual"),
                           _safe(e.lower - e.lower_spread, n, "dual")) for e in ex]
        rep.bands["w_hat"] = [(_safe(e.upper + e.upper_spread, n, "dual"),
                               _safe(e.upper - e.upper_spread, n, "dual")) for e in ex]
    return rep


# ---------------------------------------------------------------------------
# duality and transference


@dataclass(frozen=True)
class DualityResidual:
    j: int
    max_abs: float
    slope: float


def duality_residuals(sim: MinimaProfile, dual: MinimaProfile) -> list[DualityResidual]:
    """r_j(q) = L_j(q) + L*_{n+2-j}(q): max |r_j| and its linear trend in q."""
    if sim.n != dual.n or len(sim.grid) != len(dual.grid) or not np.allclose(sim.grid, dual.grid):
        raise GridMismatch("profiles must share n and grid", n=(sim.n, dual.n),
                           sizes=(len(sim.grid), len(dual.grid)))
    out = []
    n = sim.n
    for j in range(1, n + 2):
        r = sim.L(j) + dual.L(n + 2 - j)
        slope = float(np.polyfit(sim.grid, r, 1)[0])
        out.append(DualityResidual(j, float(np.max(np.abs(r))), slope))
    return out


@dataclass(frozen=True)
class Check:
    name: str
    lower: float
    value: float
    upper: float

    @property
    def ok(self) -> bool:
        return self.lower <= self.value <= self.upper


def transference_check(rep: ExponentReport, tol: float = 1e-9, tol_eq: float = 0.02,
                       deckel_w: float = 0.05, deckel_lam: float = 0.02) -> list[Check]:
    """Khintchine and German bounds, Schmidt-Summerer inequalities, equality trigger."""
    n = rep.n
    w, lam, wh, lh = rep.w[0], rep.lam[0], rep.w_hat[0], rep.lam_hat[0]

    def band(key: str, value: float) -> tuple[float, float]:
        # (value - low, high - value) of the propagated uncertainty, 0 if unknown
        b = rep.bands.get(key)
        if not b:
            return 0.0, 0.0
        lo, hi = sorted(b[0])
        return max(value - lo, 0.0), max(hi - value, 0.0)

    rows: list[Check] = []
    if np.isfinite(w) and np.isfinite(lam):
        (wd, wu), (ld, lu) = band("w", w), band("lambda", lam)
        lo = (w - wd) / ((n - 1) * (w - wd) + n)
        hi = (w + wu - n + 1) / n
        rows.append(Check("khintchine", lo - ld - tol, lam, hi + lu + tol))
        if deckel_triggered(rep, tol_eq) and np.isfinite(wh) and np.isfinite(lh):
            rows.append(Check("deckel_w_hat", n - deckel_w, wh, n + deckel_w))
            rows.append(Check("deckel_lambda_hat", 1 / n - deckel_lam, lh, 1 / n + deckel_lam))
    if np.isfinite(wh) and np.isfinite(lh):
        (wd, wu), (ld, lu) = band("w_hat", wh), band("lambda_hat", lh)
        lo = (wh - wd - 1) / ((n - 1) * (wh - wd)) if n > 1 else -math.inf
        hi = (wh + wu - n + 1) / (wh + wu)
        rows.append(Check("german", lo - ld - tol, lh, hi + lu + tol))
    for label, ex in (("sim", rep.sim_extrema), ("dual", rep.dual_extrema)):
        if ex is None:
            continue
        top = ex[n]
        for j in range(1, n + 2):
            e = ex[j - 1]
            # equality holds in the limit, so allow the propagated finite-range spread
            slack = tol + j * e.lower_spread + (n + 1 - j) * top.upper_spread
            rows.append(Check(f"{label}_ss_lower_{j}", -slack,
                              j * e.lower + (n + 1 - j) * top.upper, math.inf))
            slack = tol + j * e.upper_spread + (n + 1 - j) * top.lower_spread
            rows.append(Check(f"{label}_ss_upper_{j}", -slack,
                              j * e.upper + (n + 1 - j) * top.lower, math.inf))
    return rows


def deckel_triggered(rep: ExponentReport, tol_eq: float = 0.02) -> bool:
    n, w, lam = rep.n, rep.w[0], rep.lam[0]
    return abs(lam - w / ((n - 1) * w + n)) <= tol_eq or abs(lam - (w - n + 1) / n) <= tol_eq


def parametric_identity_residuals(prof: MinimaProfile, j: int, last: int = 3) -> list[float]:
    """At the largest local minima of L*_j: |(1 + w^(j))(1/n + psi*_j) - (n+1)/n|.

    w^(j) is built from the j witnesses (smallest -log|P(zeta)| over largest log H).
    """
    if prof.side != "dual":
        raise ValueError("parametric identity is stated for the dual side")
    n = prof.n
    L = prof.L(j)
    idx = _local_extrema(L, maximize=False)
    out = []
    for i in idx[-last:]:
        ids = prof.witnesses[i, :j]
        le = prof.candidates.log_error[ids]
        lh = prof.candidates.log_height[ids]
        wj = float(np.min(-le) / np.max(lh))
        out.append(abs((1 + wj) * (1 / n + L[i] / prof.grid[i]) - (n + 1) / n))
    return out


# ---------------------------------------------------------------------------
# slope law for products with a linear factor


@dataclass(frozen=True)
class SlopeCheck:
    P: IntPolynomial
    Q: IntPolynomial
    R: IntPolynomial
    q1: float
    q2: float
    L1: float
    L2: float
    delta: float
    measured_slope: float
    bound_const: float = 3.0

    @property
    def applicable(self) -> bool:
        """The bound is meaningful once 1/log H(Q) <= |delta| <= 1/4."""
        return 1 / math.log(self.Q.height) <= abs(self.delta) <= 0.25

    @property
    def within_bound(self) -> bool:
        return abs(self.measured_slope - 1 / 3) <= self.bound_const * abs(self.delta)


def diagram_point(log_height: float, log_value: float) -> tuple[float, float]:
    """Local minimum (q, L) of the n = 3 dual function of one polynomial."""
    return 0.75 * (log_height - log_value), 0.75 * log_height + 0.25 * log_value


def technisch_slope(P: IntPolynomial, Q: IntPolynomial, ctx: ZetaContext,
                    bound_const: float = 3.0) -> SlopeCheck:
    if Q.height < 2:
        raise Degenerate("delta is undefined for a factor of height 1", Q=str(Q))
    R = poly_mul(P, Q, 3).product
    lp = ctx.log_abs_poly(P.coeffs)
    lq = ctx.log_abs_poly(Q.coeffs)
    lr = ctx.log_abs_poly(R.coeffs)
    q1, L1 = diagram_point(math.log(P.height), lp)
    q2, L2 = diagram_point(math.log(R.height), lr)
    if q2 == q1:
        raise Degenerate("q2 equals q1", P=str(P), Q=str(Q))
    delta = 1 + lq / math.log(Q.height)
    return SlopeCheck(P, Q, R, q1, q2, L1, L2, delta, (L2 - L1) / (q2 - q1), bound_const)


def synthetic_slope(log_hp: float, log_vp: float, log_hq: float, delta: float,
                    gelfond: float = 0.0) -> float:
    """Slope between the diagram points of P and PQ from log data alone.

    ``gelfond`` is log H(PQ) - log H(P) - log H(Q).
    """
    q1, L1 = diagram_point(log_hp, log_vp)
    lq = (-1 + delta) * log_hq
    q2, L2 = diagram_point(log_hp + log_hq + gelfond, log_vp + lq)
    if q2 == q1:
        raise Degenerate("q2 equals q1")
    return (L2 - L1) / (q2 - q1)


def debre_products(rep: ExponentReport) -> list[float]:
    """lambda_j * w_hat_{n+2-j} per j (1 at the limit)."""
    n = rep.n
    return [rep.lam[j] * rep.w_hat[n - j] for j in range(n + 1)]


def pairing_gaps(prof: MinimaProfile, pairs: Sequence[tuple[int, int]] = ((1, 2), (3, 4))):
    """max |L_a - L_b| and its trend over the grid for each pair."""
    out = {}
    for a, b in pairs:
        d = np.abs(prof.L(a) - prof.L(b))
        out[(a, b)] = (float(d.max()), float(np.polyfit(prof.grid, d, 1)[0]))
    return out
