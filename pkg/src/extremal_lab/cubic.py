"""Irreducible cubics built from the record polynomials, and brute scans of small cubics."""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass

import numpy as np

from .constants import SQRT5
from .errors import NoIrreducibleCandidate
from .polynomials import IntPolynomial, irreducible_low_degree, root_near
from .precision import RealInterval, ZetaContext
from .roy import BestApproxSequence, RoySequence, q_k1

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CubicWitness:
    k: int
    S: IntPolynomial
    j: int
    X: int
    exponent_poly: float
    log_derivative: float
    alpha: RealInterval | None
    exponent_root: float
    selected: bool

    def to_dict(self) -> dict:
        return {"k": self.k, "coeffs": list(self.S.coeffs), "j": self.j, "X": self.X,
                "height": self.S.height, "exponent_poly": self.exponent_poly,
                "log_derivative": self.log_derivative,
                "alpha": None if self.alpha is None else float(self.alpha),
                "exponent_root": self.exponent_root, "selected": self.selected}


def _root_exponent(S: IntPolynomial, ctx: ZetaContext, log_value: float,
                   log_deriv: float) -> tuple[RealInterval | None, float]:
    # Newton's estimate |S(zeta)/S'(zeta)| sizes the search window
    radius = min(0.5, 16 * math.exp(log_value - log_deriv))
    alpha = root_near(S, ctx, radius)
    if alpha is None:
        alpha = root_near(S, ctx, 0.5)
    if alpha is None:
        return None, math.nan
    dist = abs(ctx.zeta - alpha)
    return alpha, -dist.log_abs() / math.log(S.primitive().height)


def cubic_experiment(ctx: ZetaContext, roy: RoySequence, best: BestApproxSequence,
                     generations: int, strict: bool = False) -> list[CubicWitness]:
    """S_{k,j} = P_k E_l + j T P_{k+1} (j = 1, 2) for the last ``generations`` k.

    E_l is the last best-approximation factor with H(P_k E_l) <= X = H(P_{k+1}).
    Irreducible S are recorded; the one with the larger |S'(zeta)| is marked
    selected.  With ``strict`` a generation without an irreducible S raises.
    """
    if len(roy) < generations + 2:
        raise ValueError("record sequence too short for the requested generations")
    T = IntPolynomial.T()
    out: list[CubicWitness] = []
    for k in range(len(roy) - 1 - generations, len(roy) - 1):
        P, P_next = roy[k].poly, roy[k + 1].poly
        X = P_next.height
        Q = q_k1(P, best, X)
        if Q is None:
            log.info("generation %d: no linear factor fits under X=%d", k, X)
            continue
        found = []
        for j in (1, 2):
            S = Q + T * P_next * j
            if S.degree != 3 or not irreducible_low_degree(S):
                continue
            S = S.primitive()
            lv = ctx.log_abs_poly(S.coeffs)
            ld = ctx.log_abs_poly(S.derivative().coeffs)
            found.append((j, S, lv, ld))
        if not found:
            if strict:
                raise NoIrreducibleCandidate("both S_{k,1} and S_{k,2} reducible", k=k, X=X)
            log.warning("generation %d: no irreducible S", k)
            continue
        top = max(found, key=lambda t: t[3])[0]
        for j, S, lv, ld in found:
            alpha, er = _root_exponent(S, ctx, lv, ld)
            out.append(CubicWitness(k, S, j, X, -lv / math.log(S.height), ld, alpha, er, j == top))
    return out


def witnesses_json(ws: list[CubicWitness]) -> str:
    return json.dumps([w.to_dict() for w in ws], indent=1)


def triangle_ok(w: CubicWitness, roy: RoySequence, best: BestApproxSequence,
                ctx: ZetaContext) -> bool:
    """|S(zeta)| <= |Q(zeta)| + j |zeta| |P_{k+1}(zeta)|, checked on enclosures.

    Equality occurs when both terms share a sign, so the check only asks
    that the enclosures do not contradict the bound.
    """
    P, P_next = roy[w.k].poly, roy[w.k + 1].poly
    Q = q_k1(P, best, w.X)
    S = abs(ctx.eval_poly(w.S.coeffs))
    rhs = abs(ctx.eval_poly(Q.coeffs)) + abs(ctx.zeta) * abs(ctx.eval_poly(P_next.coeffs)) * w.j
    return S.lo_value <= rhs.hi_value


def root_constant(w: CubicWitness, ctx: ZetaContext) -> float:
    """c with |zeta - alpha| = c |S(zeta)| / H(S)."""
    dist = abs(ctx.zeta - w.alpha).log_abs()
    return math.exp(dist - ctx.log_abs_poly(w.S.coeffs) + math.log(w.S.height))


# ---------------------------------------------------------------------------
# exhaustive scans


def _cubic_scan(ctx: ZetaContext, h_max: int) -> tuple[np.ndarray, np.ndarray]:
    """All (a0..a3), a3 > 0, H <= h_max, a0 nearest to -(a3 z^3 + a2 z^2 + a1 z)."""
    z = ctx.value
    r = np.arange(-h_max, h_max + 1, dtype=np.int64)
    a2, a1 = np.meshgrid(r, r, indexing="ij")
    a2, a1 = a2.ravel(), a1.ravel()
    rows, vals = [], []
    for a3 in range(1, h_max + 1):
        t = a3 * z ** 3 + a2 * z * z + a1 * z
        a0 = -np.rint(t).astype(np.int64)
        ok = np.abs(a0) <= h_max
        rows.append(np.stack([a0[ok], a1[ok], a2[ok], np.full(ok.sum(), a3)], axis=1))
        vals.append(np.abs(t[ok] + a0[ok]))
    return np.concatenate(rows), np.concatenate(vals)


def cubic_nonexistence_scan(ctx: ZetaContext, h_max: int = 60, eps: float = 0.5
                            ) -> list[tuple[IntPolynomial, float]]:
    """Irreducible cubics with H(P) <= h_max and |P(zeta)| <= H(P)^(-3-eps).

    Returns (P, exponent) sorted by height.  Only a0 nearest to the rest of
    the sum can give |P(zeta)| < 1/2, so the scan over (a3, a2, a1) is complete.
    """
    return _threshold_scan(ctx, h_max, lambda H: -(3 + eps) * np.log(H))


def cubic_uniform_scan(ctx: ZetaContext, X: int, eps: float = 0.5
                       ) -> list[tuple[IntPolynomial, float]]:
    """Irreducible cubics with H(P) <= X and |P(zeta)| <= X^(-sqrt5-eps)."""
    bound = -(SQRT5 + eps) * math.log(X)
    return _threshold_scan(ctx, X, lambda H: np.full(np.shape(H), bound))


def _threshold_scan(ctx, h_max, log_bound) -> list[tuple[IntPolynomial, float]]:
    coeffs, vals = _cubic_scan(ctx, h_max)
    H = np.abs(coeffs).max(axis=1).astype(float)
    with np.errstate(divide="ignore"):
        lv = np.log(vals)
    # generous float filter, exact check below
    keep = np.nonzero(lv <= log_bound(H) + 1.0)[0]
    out = []
    for i in keep:
        P = IntPolynomial(tuple(int(c) for c in coeffs[i]))
        if math.gcd(*P.coeffs) != 1 or P.degree != 3 or P.height < 2:
            continue
        exact = ctx.log_abs_poly(P.coeffs)
        if exact > float(log_bound(np.array(float(P.height)))):
            continue
        if irreducible_low_degree(P):
            out.append((P, -exact / math.log(P.height)))
    out.sort(key=lambda t: (t[0].height, t[0].coeffs))
    return out
