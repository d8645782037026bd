"""Parametric successive minima on the simultaneous and dual sides.

A candidate is an integer vector together with its exact log height and log
error.  Backends only propose candidates; every value used downstream is
recomputed from the integers at the context's working precision.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence, Union

import numpy as np

from .errors import InsufficientCandidates, OutOfRange, PrecisionExhausted
from .lattice import reduced_sweep
from .polynomials import IntPolynomial
from .precision import ZetaContext

log = logging.getLogger(__name__)

Side = Literal["simultaneous", "dual"]
SIDES = ("simultaneous", "dual")


def canonical(v: Sequence[int], side: str) -> tuple[int, ...]:
    """Primitive representative; sign fixed by the first (point) or last (polynomial) nonzero entry."""
    g = 0
    for t in v:
        g = math.gcd(g, t)
    if g == 0:
        raise ValueError("zero vector")
    out = [t // g for t in v]
    seq = out if side == "simultaneous" else reversed(out)
    lead = next(t for t in seq if t)
    return tuple(-t for t in out) if lead < 0 else tuple(out)


@dataclass(frozen=True)
class LatticePoint:
    x: int
    y: tuple[int, ...]

    def __post_init__(self) -> None:
        v = self.vector
        if not any(v):
            raise ValueError("LatticePoint cannot be zero")
        if canonical(v, "simultaneous") != v:
            raise ValueError(f"LatticePoint {v} is not in primitive normalized form")

    @classmethod
    def of(cls, x: int, *y: int) -> "LatticePoint":
        v = canonical((x,) + tuple(y), "simultaneous")
        return cls(v[0], v[1:])

    @property
    def vector(self) -> tuple[int, ...]:
        return (self.x,) + tuple(self.y)

    @property
    def n(self) -> int:
        return len(self.y)


@dataclass(frozen=True)
class Candidate:
    """One vector with its two exact log quantities.

    ``log_height`` is log|x| (may be -inf for x = 0) or log H(P);
    ``log_error`` is log max_i|zeta^i x - y_i| or log|P(zeta)|.
    """

    kind: Literal["point", "polynomial"]
    payload: Union[LatticePoint, IntPolynomial]
    n: int
    log_height: float
    log_error: float

    @classmethod
    def from_payload(cls, payload: Union[LatticePoint, IntPolynomial], ctx: ZetaContext,
                     n: int | None = None) -> "Candidate":
        if isinstance(payload, LatticePoint):
            lh, le = _point_logs(payload.vector, ctx)
            return cls("point", payload, payload.n, lh, le)
        if n is None:
            n = max(payload.degree, 1)
        lh, le = _poly_logs(payload.coeffs, ctx)
        return cls("polynomial", payload, n, lh, le)

    @property
    def side(self) -> str:
        return "simultaneous" if self.kind == "point" else "dual"

    def value(self, q: float) -> float:
        return candidate_value(self, q)


def candidate_value(c: Candidate, q: float) -> float:
    if c.kind == "point":
        return max(c.log_height - q, c.log_error + q / c.n)
    return max(c.log_height - q / c.n, c.log_error + q)


def _point_logs(v: Sequence[int], ctx: ZetaContext) -> tuple[float, float]:
    x = v[0]
    lh = math.log(abs(x)) if x else -math.inf
    return lh, ctx.log_sim_error(x, v[1:])


def _poly_logs(coeffs: Sequence[int], ctx: ZetaContext) -> tuple[float, float]:
    return math.log(max(abs(a) for a in coeffs)), ctx.log_abs_poly(coeffs)


# ---------------------------------------------------------------------------
# candidate sets


@dataclass
class CandidateSet:
    """Columnar candidate storage: vectors plus exact log quantities.

    Vectors are (x, y_1..y_n) or ascending coefficients (a_0..a_n).
    ``certified`` holds the completeness parameters of a brute set
    (h_max on the dual side, (x_max, window) on the simultaneous side).
    """

    side: str
    n: int
    vectors: list[tuple[int, ...]]
    log_height: np.ndarray
    log_error: np.ndarray
    backend: str
    certified: tuple | None = None
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self._index = {v: i for i, v in enumerate(self.vectors)}

    def __len__(self) -> int:
        return len(self.vectors)

    def __contains__(self, v) -> bool:
        return self._key(v) in self._index

    def _key(self, v) -> tuple[int, ...]:
        if isinstance(v, LatticePoint):
            return v.vector
        if isinstance(v, IntPolynomial):
            return canonical(v.padded(self.n + 1), "dual")
        return tuple(v)

    def index(self, v) -> int:
        return self._index[self._key(v)]

    def candidate(self, i: int) -> Candidate:
        v = self.vectors[i]
        if self.side == "simultaneous":
            return Candidate("point", LatticePoint(v[0], v[1:]), self.n,
                             float(self.log_height[i]), float(self.log_error[i]))
        return Candidate("polynomial", IntPolynomial(v), self.n,
                         float(self.log_height[i]), float(self.log_error[i]))

    def values(self, q: float) -> np.ndarray:
        if self.side == "simultaneous":
            return np.maximum(self.log_height - q, self.log_error + q / self.n)
        return np.maximum(self.log_height - q / self.n, self.log_error + q)

    def certified_level(self, q: float) -> float:
        """Minima at or below this level are exact for a brute set (else -inf)."""
        if self.certified is None:
            return -math.inf
        if self.side == "dual":
            (h_max,) = self.certified
            return math.log(h_max) - q / self.n
        x_max, window = self.certified
        return min(math.log(x_max) - q, math.log(window - 0.5) + q / self.n)

    def union(self, other: "CandidateSet") -> "CandidateSet":
        if (other.side, other.n) != (self.side, self.n):
            raise ValueError("cannot merge candidate sets of different side or dimension")
        keep = [i for i, v in enumerate(other.vectors) if v not in self._index]
        return CandidateSet(
            self.side, self.n,
            self.vectors + [other.vectors[i] for i in keep],
            np.concatenate([self.log_height, other.log_height[keep]]),
            np.concatenate([self.log_error, other.log_error[keep]]),
            f"{self.backend}+{other.backend}",
            None,
        )

    @classmethod
    def build(cls, side: str, n: int, vectors: Iterable[Sequence[int]], ctx: ZetaContext,
              backend: str, certified: tuple | None = None) -> "CandidateSet":
        """Canonicalize, deduplicate and evaluate exactly; drops zero-error vectors."""
        seen: dict[tuple[int, ...], None] = {}
        for v in vectors:
            if any(v):
                seen.setdefault(canonical(v, side), None)
        vecs, lh, le = [], [], []
        for v in seen:
            try:
                h, e = _point_logs(v, ctx) if side == "simultaneous" else _poly_logs(v, ctx)
            except PrecisionExhausted:
                log.debug("rejected %s: error enclosure contains zero", v)
                continue
            vecs.append(v)
            lh.append(h)
            le.append(e)
        return cls(side, n, vecs, np.array(lh, dtype=float), np.array(le, dtype=float),
                   backend, certified)


def default_grid(q_max: float, step: float = 0.05) -> np.ndarray:
    count = int(math.floor(q_max / step + 1e-9))
    return np.round(np.arange(1, count + 1) * step, 10)


def _prune_union(lh: np.ndarray, le: np.ndarray, n: int, side: str,
                 grid: np.ndarray, keep: int) -> np.ndarray:
    """Indices that are among the ``keep`` smallest values at some grid point."""
    chosen = np.zeros(len(lh), dtype=bool)
    k = min(keep, len(lh))
    for q in grid:
        if side == "dual":
            val = np.maximum(lh - q / n, le + q)
        else:
            val = np.maximum(lh - q, le + q / n)
        idx = np.argpartition(val, k - 1)[:k] if k < len(val) else np.arange(len(val))
        chosen[idx] = True
    return np.nonzero(chosen)[0]


def _brute_grid(n: int, side: str, bound: float) -> np.ndarray:
    q_top = n * math.log(bound) + 2 if side == "dual" else math.log(bound) + 2
    return default_grid(max(q_top, 1.0), 0.05)


def brute_dual_vectors(n: int, h_max: int) -> np.ndarray:
    """All primitive coefficient vectors, H <= h_max, last nonzero entry positive."""
    r = np.arange(-h_max, h_max + 1, dtype=np.int64)
    mesh = np.stack(np.meshgrid(*([r] * (n + 1)), indexing="ij"), axis=-1).reshape(-1, n + 1)
    nz = mesh != 0
    any_nz = nz.any(axis=1)
    last = (n - np.argmax(nz[:, ::-1], axis=1))
    lead = mesh[np.arange(len(mesh)), last]
    keep = any_nz & (lead > 0)
    mesh = mesh[keep]
    g = np.gcd.reduce(np.abs(mesh), axis=1)
    return mesh[g == 1]


def brute_sim_vectors(ctx: ZetaContext, n: int, x_max: int, window: int) -> np.ndarray:
    z = ctx.value
    xs = np.arange(1, x_max + 1, dtype=np.int64)
    offs = np.arange(-window, window + 1, dtype=np.int64)
    grids = np.meshgrid(*([offs] * n), indexing="ij")
    combos = np.stack([gg.ravel() for gg in grids], axis=1)  # (W^n, n)
    near = np.stack([np.rint(xs * z ** i).astype(np.int64) for i in range(1, n + 1)], axis=1)
    ys = near[:, None, :] + combos[None, :, :]
    xs_rep = np.repeat(xs, len(combos))[:, None]
    pts = np.concatenate([xs_rep, ys.reshape(-1, n)], axis=1)
    g = np.gcd.reduce(np.abs(pts), axis=1)
    pts = pts[g == 1]
    units = np.zeros((n, n + 1), dtype=np.int64)
    units[np.arange(n), np.arange(1, n + 1)] = 1
    return np.concatenate([units, pts], axis=0)


def _float_logs(vecs: np.ndarray, ctx: ZetaContext, side: str, n: int) -> tuple[np.ndarray, np.ndarray]:
    z = ctx.value
    zp = np.array([z ** i for i in range(n + 1)])
    with np.errstate(divide="ignore"):
        if side == "dual":
            lh = np.log(np.abs(vecs).max(axis=1).astype(float))
            err = np.abs(vecs.astype(float) @ zp)
        else:
            lh = np.log(np.abs(vecs[:, 0]).astype(float))
            err = np.abs(vecs[:, :1].astype(float) * zp[1:] - vecs[:, 1:]).max(axis=1)
        le = np.log(err)
    return lh, le


def _brute_set(vecs: np.ndarray, ctx: ZetaContext, side: str, n: int, bound: float,
               keep: int, certified: tuple) -> CandidateSet:
    lh, le = _float_logs(vecs, ctx, side, n)
    # float cancellation makes tiny errors unreliable; those go to exact evaluation too
    tiny = ~np.isfinite(le) | (le < math.log(1e-10) + lh.clip(min=0))
    le = np.where(tiny, -np.inf, le)
    idx = _prune_union(lh, le, n, side, _brute_grid(n, side, bound), keep)
    idx = np.union1d(idx, np.nonzero(tiny)[0])
    return CandidateSet.build(side, n, (tuple(int(t) for t in vecs[i]) for i in idx), ctx,
                              "brute", certified)


def _reduced_set(ctx: ZetaContext, n: int, side: str, q_max: float, step: float) -> CandidateSet:
    vecs: list[tuple[int, ...]] = []
    for _, out in reduced_sweep(ctx, n, side, default_grid(q_max, step)):
        vecs.extend(out)
    if side == "simultaneous":
        vecs.extend(tuple(int(i == j) for j in range(n + 1)) for i in range(1, n + 1))
    return CandidateSet.build(side, n, vecs, ctx, "reduced")


def _split_backends(backend: str) -> list[str]:
    parts = backend.split("+")
    for p in parts:
        if p not in ("brute", "reduced", "structured"):
            raise ValueError(f"unknown backend {p!r}")
    return parts


def candidates_simultaneous(ctx: ZetaContext, n: int, x_max: int, window: int = 2,
                            backend: str = "brute", q_max: float | None = None,
                            step: float = 0.05, keep: int = 40) -> CandidateSet:
    """Point-side candidates.

    ``brute`` enumerates 1 <= x <= x_max with every y_i within ``window`` of
    the nearest integer to x zeta^i (plus unit vectors); ``reduced`` collects
    reduced bases along the q grid up to ``q_max`` (default log x_max).
    """
    if x_max < 1 or window < 1:
        raise ValueError("x_max and window must be >= 1")
    sets = []
    for b in _split_backends(backend):
        if b == "brute":
            vecs = brute_sim_vectors(ctx, n, x_max, window)
            sets.append(_brute_set(vecs, ctx, "simultaneous", n, x_max, keep, (x_max, window)))
        elif b == "reduced":
            sets.append(_reduced_set(ctx, n, "simultaneous",
                                     q_max if q_max is not None else math.log(max(x_max, 2)), step))
        else:
            raise ValueError("structured backend exists only on the dual side")
    out = sets[0]
    for s in sets[1:]:
        out = out.union(s)
    return out


def candidates_dual(ctx: ZetaContext, n: int, h_max: int, backend: str = "brute",
                    q_max: float | None = None, step: float = 0.05, keep: int = 40) -> CandidateSet:
    """Polynomial-side candidates, deg <= n.

    ``brute`` enumerates every primitive P with H(P) <= h_max; ``reduced``
    collects reduced bases along the q grid up to ``q_max`` (default
    n log h_max); ``structured`` uses the product families built from the
    quadratic and linear record polynomials.  Backends combine with "+".
    """
    if h_max < 1:
        raise ValueError("h_max must be >= 1")
    sets = []
    for b in _split_backends(backend):
        if b == "brute":
            vecs = brute_dual_vectors(n, h_max)
            sets.append(_brute_set(vecs, ctx, "dual", n, h_max, keep, (h_max,)))
        elif b == "reduced":
            sets.append(_reduced_set(ctx, n, "dual",
                                     q_max if q_max is not None else n * math.log(max(h_max, 2)), step))
        else:
            from .roy import structured_for_context
            polys = structured_for_context(ctx, n, h_max)
            sets.append(CandidateSet.build("dual", n, (P.padded(n + 1) for P in polys), ctx,
                                           "structured"))
    out = sets[0]
    for s in sets[1:]:
        out = out.union(s)
    return out


# ---------------------------------------------------------------------------
# profiles


class Echelon:
    """Incremental fraction-free row echelon for exact independence tests."""

    def __init__(self) -> None:
        self.rows: list[tuple[int, list[int]]] = []

    def add(self, v: Sequence[int]) -> bool:
        w = list(v)
        for piv, row in self.rows:
            if w[piv]:
                a, b = row[piv], w[piv]
                w = [a * x - b * y for x, y in zip(w, row)]
                g = 0
                for t in w:
                    g = math.gcd(g, t)
                if g > 1:
                    w = [t // g for t in w]
        for i, t in enumerate(w):
            if t:
                self.rows.append((i, w))
                return True
        return False


def successive_minima(cands: CandidateSet, q: float, scan: int = 64) -> tuple[list[float], list[int]]:
    """Greedy successive minima at one q: (values, candidate ids), +inf where missing."""
    m = cands.n + 1
    val = cands.values(q)
    N = len(val)
    order: np.ndarray
    if N > scan:
        part = np.argpartition(val, scan - 1)[:scan]
        order = part[np.argsort(val[part], kind="stable")]
    else:
        order = np.argsort(val, kind="stable")
    ech = Echelon()
    vals: list[float] = []
    wit: list[int] = []
    for pass_no in range(2):
        for i in order:
            if ech.add(cands.vectors[i]):
                vals.append(float(val[i]))
                wit.append(int(i))
                if len(wit) == m:
                    return vals, wit
        if pass_no == 0 and N > scan:
            # rare: the short list was rank deficient; redo with the full order
            ech = Echelon()
            vals, wit = [], []
            order = np.argsort(val, kind="stable")
        else:
            break
    vals += [math.inf] * (m - len(vals))
    wit += [-1] * (m - len(wit))
    return vals, wit


@dataclass
class MinimaProfile:
    side: str
    n: int
    grid: np.ndarray
    values: np.ndarray  # (len(grid), n+1)
    witnesses: np.ndarray  # candidate ids, -1 where missing
    candidates: CandidateSet | None
    zeta_spec: str = ""
    backend: str = ""
    bits: int = 0

    def L(self, j: int) -> np.ndarray:
        """Column for level j (1-based)."""
        return self.values[:, j - 1]

    def psi(self, j: int) -> np.ndarray:
        return self.values[:, j - 1] / self.grid

    def value_at(self, q: float, j: int | None = None):
        """Exact minima at an off-grid q (interpolated for profiles without candidates)."""
        if self.candidates is None:
            vals = [float(np.interp(q, self.grid, self.values[:, k])) for k in range(self.n + 1)]
        else:
            vals, _ = successive_minima(self.candidates, q)
        return vals if j is None else vals[j - 1]

    def witness_vectors(self, i: int, j: int | None = None) -> list[tuple[int, ...]]:
        ids = self.witnesses[i] if j is None else self.witnesses[i, :j]
        return [self.candidates.vectors[k] for k in ids if k >= 0]


def profile(cands: CandidateSet, grid: Sequence[float], allow_missing: bool = False,
            zeta_spec: str = "", bits: int = 0) -> MinimaProfile:
    """Successive minima L_1..L_{n+1} on ``grid`` by greedy independent selection."""
    if len(cands) == 0:
        raise InsufficientCandidates("empty candidate set")
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or len(g) == 0 or np.any(g <= 0) or np.any(np.diff(g) <= 0):
        raise ValueError("grid must be positive and strictly ascending")
    m = cands.n + 1
    values = np.empty((len(g), m))
    wit = np.empty((len(g), m), dtype=np.int64)
    for i, q in enumerate(g):
        v, w = successive_minima(cands, float(q))
        values[i] = v
        wit[i] = w
    if not allow_missing and not np.all(np.isfinite(values)):
        bad = np.nonzero(~np.isfinite(values).all(axis=1))[0]
        raise InsufficientCandidates("fewer than n+1 independent candidates",
                                     first_q=float(g[bad[0]]), count=int(len(bad)))
    return MinimaProfile(cands.side, cands.n, g, values, wit, cands, zeta_spec,
                         cands.backend, bits)


def psi(prof: MinimaProfile, j: int, Q: float) -> float:
    """psi_j(Q) = L_j(log Q)/log Q with L_j linearly interpolated."""
    q = math.log(Q)
    if not prof.grid[0] - 1e-12 <= q <= prof.grid[-1] + 1e-12:
        raise OutOfRange("log Q outside the profile grid", q=q,
                         lo=float(prof.grid[0]), hi=float(prof.grid[-1]))
    return float(np.interp(q, prof.grid, prof.L(j))) / q


# ---------------------------------------------------------------------------
# invariant checks


def ordering_ok(prof: MinimaProfile) -> bool:
    return bool(np.all(np.diff(prof.values, axis=1) >= -1e-12))


def slope_window(side: str, n: int) -> tuple[float, float]:
    return (-1.0 / n, 1.0) if side == "dual" else (-1.0, 1.0 / n)


def slope_violations(prof: MinimaProfile, tol: float = 1e-9) -> int:
    lo, hi = slope_window(prof.side, prof.n)
    s = np.diff(prof.values, axis=0) / np.diff(prof.grid)[:, None]
    return int(np.sum((s < lo - tol) | (s > hi + tol)))


def witnesses_independent(prof: MinimaProfile, i: int) -> bool:
    ech = Echelon()
    return all(ech.add(v) for v in prof.witness_vectors(i))


@dataclass(frozen=True)
class MinkowskiStats:
    max_abs: float
    slope: float
    intercept: float


def minkowski_stats(prof: MinimaProfile) -> MinkowskiStats:
    total = prof.values.sum(axis=1)
    slope, intercept = np.polyfit(prof.grid, total, 1)
    return MinkowskiStats(float(np.max(np.abs(total))), float(slope), float(intercept))


# ---------------------------------------------------------------------------
# exhaustive best simultaneous approximations


def best_sim_sequence(ctx: ZetaContext, n: int, x_max: int,
                      chunk: int = 1 << 20) -> list[tuple[int, float]]:
    """Records (x, max_i ||x zeta^i||) over 1 <= x <= x_max.

    Fractional parts are tracked as 64-bit fixed point (exact modular
    products), so the scan is a few numpy passes; records are re-evaluated
    with interval arithmetic.
    """
    if x_max < 2:
        raise ValueError("x_max must be >= 2")
    fixed = ctx.fixed_powers(min(ctx.bits, 64 + 64))
    frac = [np.uint64((f >> 64) & ((1 << 64) - 1)) for f in fixed[1:n + 1]]
    scale = 2.0 ** -64
    best = math.inf
    found: list[int] = []
    for start in range(1, x_max + 1, chunk):
        xs = np.arange(start, min(start + chunk, x_max + 1), dtype=np.uint64)
        worst = np.zeros(len(xs))
        for F in frac:
            f = (xs * F).astype(float) * scale  # wraps mod 2**64
            worst = np.maximum(worst, np.minimum(f, 1.0 - f))
        run = np.minimum.accumulate(np.concatenate([[best], worst]))
        rec = np.nonzero(run[1:] < run[:-1])[0]
        found.extend(int(xs[i]) for i in rec)
        best = float(run[-1])
    out: list[tuple[int, float]] = []
    for x in found:
        ys = [round(x * ctx.pows[i].mid) for i in range(1, n + 1)]
        err = math.exp(ctx.log_sim_error(x, ys))
        if not out or err < out[-1][1]:
            out.append((x, err))
    return out


@dataclass(frozen=True)
class RecordFit:
    """Power-law summary of the peak records.

    ``exponent`` is the least-squares slope of log err against log x over
    the peaks; ``growth`` is the geometric mean of log x_{k+1} / log x_k.
    """

    peaks: list[tuple[int, float]]
    exponent: float
    growth: float
    ratios: list[float]


def peak_records(seq: Sequence[tuple[int, float]]) -> list[tuple[int, float]]:
    """Records whose quality -log err / log x beats both neighbouring records."""
    pts = [(x, e) for x, e in seq if x >= 2]
    qual = [-math.log(e) / math.log(x) for x, e in pts]
    return [pts[i] for i in range(1, len(pts) - 1)
            if qual[i] > qual[i - 1] and qual[i] > qual[i + 1]]


def fit_records(seq: Sequence[tuple[int, float]]) -> RecordFit:
    peaks = peak_records(seq)
    if len(peaks) < 3:
        raise InsufficientCandidates("fewer than 3 peak records", peaks=len(peaks))
    lx = np.log([x for x, _ in peaks])
    le = np.log([e for _, e in peaks])
    slope = float(np.polyfit(lx, le, 1)[0])
    ratios = [float(b / a) for a, b in zip(lx[:-1], lx[1:])]
    growth = float((lx[-1] / lx[0]) ** (1 / (len(lx) - 1)))
    return RecordFit(peaks, slope, growth, ratios)


def minkowski_ok(prof: MinimaProfile, tol: float = 1e-9) -> bool:
    """Sum of the minima within [-log (n+1)!, 0], the sup-norm second theorem."""
    total = prof.values.sum(axis=1)
    total = total[np.isfinite(total)]
    return bool(np.all(total <= tol) and np.all(total >= -math.lgamma(prof.n + 2) - tol))


def brute_simultaneous_profile(ctx: ZetaContext, n: int, x_max: int, grid: Sequence[float],
                               window: int = 2, max_window: int = 16) -> MinimaProfile:
    """Brute point-side profile, doubling the y-window until the Minkowski check holds."""
    while True:
        cands = candidates_simultaneous(ctx, n, x_max, window, backend="brute")
        prof = profile(cands, grid, allow_missing=True, zeta_spec=ctx.label, bits=ctx.bits)
        if minkowski_ok(prof) or window >= max_window:
            return prof
        log.info("window %d fails the Minkowski check; widening", window)
        window *= 2
