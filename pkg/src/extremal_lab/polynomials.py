"""Exact integer polynomials: heights, rigorous evaluation, products, roots."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import DegreeOutOfRange, DegreeOverflow, PrecisionExhausted
from .precision import RealInterval, ZetaContext

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class IntPolynomial:
    """Integer polynomial a_0 + a_1 T + ... + a_d T^d (ascending coefficients)."""

    coeffs: tuple[int, ...]

    def __post_init__(self) -> None:
        c = [int(a) for a in self.coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def of(cls, *coeffs: int) -> "IntPolynomial":
        return cls(tuple(coeffs))

    @classmethod
    def T(cls) -> "IntPolynomial":
        return cls((0, 1))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def height(self) -> int:
        return max((abs(a) for a in self.coeffs), default=0)

    def content(self) -> int:
        g = 0
        for a in self.coeffs:
            g = math.gcd(g, a)
        return g

    def primitive(self) -> "IntPolynomial":
        g = self.content()
        if g <= 1:
            return self
        return IntPolynomial(tuple(a // g for a in self.coeffs))

    def normalized(self) -> "IntPolynomial":
        """Primitive part with positive leading coefficient."""
        p = self.primitive()
        if p.coeffs and p.coeffs[-1] < 0:
            p = -p
        return p

    def derivative(self) -> "IntPolynomial":
        return IntPolynomial(tuple(i * a for i, a in enumerate(self.coeffs))[1:])

    def shift(self, k: int = 1) -> "IntPolynomial":
        """Multiply by T^k."""
        if self.is_zero():
            return self
        return IntPolynomial((0,) * k + self.coeffs)

    def padded(self, length: int) -> tuple[int, ...]:
        return self.coeffs + (0,) * (length - len(self.coeffs))

    def __neg__(self) -> "IntPolynomial":
        return IntPolynomial(tuple(-a for a in self.coeffs))

    def __add__(self, other: "IntPolynomial") -> "IntPolynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        return IntPolynomial(tuple(a + b for a, b in zip(self.padded(n), other.padded(n))))

    def __sub__(self, other: "IntPolynomial") -> "IntPolynomial":
        return self + (-other)

    def __mul__(self, other: Union["IntPolynomial", int]) -> "IntPolynomial":
        if isinstance(other, int):
            return IntPolynomial(tuple(other * a for a in self.coeffs))
        if self.is_zero() or other.is_zero():
            return IntPolynomial(())
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return IntPolynomial(tuple(out))

    __rmul__ = __mul__

    def __call__(self, x: Union[int, Fraction]) -> Fraction:
        acc = Fraction(0)
        for a in reversed(self.coeffs):
            acc = acc * x + a
        return acc

    def to_list(self) -> list[int]:
        return list(self.coeffs)

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        terms = []
        for i in range(self.degree, -1, -1):
            a = self.coeffs[i]
            if a == 0:
                continue
            mono = "" if i == 0 else ("T" if i == 1 else f"T^{i}")
            if mono and abs(a) == 1:
                s = mono
            else:
                s = f"{abs(a)}{'*' + mono if mono else ''}"
            terms.append(("-" if a < 0 else "+", s))
        first_sign, first = terms[0]
        out = ("-" if first_sign == "-" else "") + first
        for sg, s in terms[1:]:
            out += f" {sg} {s}"
        return out


@dataclass(frozen=True)
class MulResult:
    product: IntPolynomial
    gelfond_ratio: Fraction
    delta_log: float


def poly_eval(P: IntPolynomial, zeta: Union[RealInterval, ZetaContext],
              require_sign: bool = False) -> RealInterval:
    """Enclosure of P(zeta).

    Horner's scheme in exact dyadic interval arithmetic, so point inputs give
    point outputs.  With ``require_sign`` an enclosure straddling zero raises
    PrecisionExhausted; the caller has to re-evaluate zeta at higher precision.
    """
    if P.is_zero():
        raise ValueError("zero polynomial")
    if isinstance(zeta, ZetaContext):
        iv = zeta.eval_poly(P.coeffs)
    else:
        iv = RealInterval.exact(0)
        for a in reversed(P.coeffs):
            iv = iv * zeta + a
    if require_sign and iv.contains_zero():
        raise PrecisionExhausted("sign of P(zeta) undetermined", poly=P.to_list(),
                                 width_log2=iv.width_log2())
    return iv


def poly_mul(P: IntPolynomial, Q: IntPolynomial, max_degree: int = 4) -> MulResult:
    if P.is_zero() or Q.is_zero():
        raise ValueError("zero factor")
    if P.degree + Q.degree > max_degree:
        raise DegreeOverflow("product degree exceeds configured maximum",
                             degree=P.degree + Q.degree, max_degree=max_degree)
    R = P * Q
    ratio = Fraction(R.height, P.height * Q.height)
    return MulResult(R, ratio, math.log(R.height) - math.log(P.height) - math.log(Q.height))


def gelfond_window(dP: int, dQ: int) -> tuple[Fraction, Fraction]:
    d = dP + dQ
    return Fraction(1, 2 ** d), Fraction(d + 1)


# ---------------------------------------------------------------------------
# irreducibility (degrees 1..3)


def _divisors(m: int) -> list[int]:
    m = abs(m)
    out = []
    i = 1
    while i * i <= m:
        if m % i == 0:
            out.append(i)
            if i * i != m:
                out.append(m // i)
        i += 1
    return out


def rational_roots(P: IntPolynomial) -> list[Fraction]:
    """All rational roots, via the rational-root theorem."""
    if P.is_zero():
        raise ValueError("zero polynomial")
    c = list(P.primitive().coeffs)
    roots: list[Fraction] = []
    if c[0] == 0:
        roots.append(Fraction(0))
        while c and c[0] == 0:
            c.pop(0)
    if len(c) <= 1:
        return roots
    Q = IntPolynomial(tuple(c))
    if max(abs(c[0]), abs(c[-1])) > _DIVISOR_LIMIT:
        return roots + _rational_roots_by_approximation(Q)
    for p in _divisors(c[0]):
        for q in _divisors(c[-1]):
            for s in (1, -1):
                r = Fraction(s * p, q)
                if r not in roots and Q(r) == 0:
                    roots.append(r)
    return roots


_DIVISOR_LIMIT = 10 ** 8


def _rational_roots_by_approximation(Q: IntPolynomial) -> list[Fraction]:
    # A rational root p/q has q | lead, so an approximation of each real root
    # to within 1/(2 lead^2) pins it down via limit_denominator.
    lead = abs(Q.coeffs[-1])
    bits = 2 * lead.bit_length() + 8
    fp = [Fraction(a) for a in Q.coeffs]
    g = _f_gcd(fp, _f_trim([i * x for i, x in enumerate(fp)][1:]))
    S = _f_divmod(fp, g)[0] if len(g) > 1 else fp
    bound = 1 + max(abs(a) for a in Q.coeffs[:-1]) / Fraction(lead)
    out: list[Fraction] = []
    for a, b, exact in _isolate(S, -bound, bound):
        if exact is not None:
            cand = [exact]
        else:
            iv = _refine(S, a, b, bits)
            cand = [Fraction(iv.mid).limit_denominator(lead)]
        for r in cand:
            if r not in out and Q(r) == 0:
                out.append(r)
    return out


def irreducible_low_degree(P: IntPolynomial) -> bool:
    """Irreducibility over Q of the primitive part, for degrees 1..3."""
    if not 1 <= P.degree <= 3:
        raise DegreeOutOfRange("irreducibility check supports degrees 1..3", degree=P.degree)
    if P.content() > 1:
        log.debug("irreducible_low_degree: non-primitive input %s made primitive", P)
    if P.degree == 1:
        return True
    return not rational_roots(P)


# ---------------------------------------------------------------------------
# real roots near a point

_FPoly = list  # dense Fraction coefficients, ascending


def _f_trim(p: _FPoly) -> _FPoly:
    while p and p[-1] == 0:
        p.pop()
    return p


def _f_divmod(a: _FPoly, b: _FPoly) -> tuple[_FPoly, _FPoly]:
    a = list(a)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    while len(a) >= len(b) and a:
        k = len(a) - len(b)
        f = a[-1] / b[-1]
        q[k] = f
        for i, c in enumerate(b):
            a[i + k] -= f * c
        a.pop()
        _f_trim(a)
    return _f_trim(q), a


def _f_gcd(a: _FPoly, b: _FPoly) -> _FPoly:
    a, b = _f_trim(list(a)), _f_trim(list(b))
    while b:
        a, b = b, _f_divmod(a, b)[1]
    return [c / a[-1] for c in a]


def _f_eval_sign(p: _FPoly, x: Fraction) -> int:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return (acc > 0) - (acc < 0)


def _sturm(p: _FPoly) -> list[_FPoly]:
    seq = [p, _f_trim([i * c for i, c in enumerate(p)][1:])]
    while seq[-1] and len(seq[-1]) > 1:
        r = _f_divmod(seq[-2], seq[-1])[1]
        if not r:
            break
        seq.append([-c for c in r])
    return [s for s in seq if s]


def _variations(seq: list[_FPoly], x: Fraction) -> int:
    signs = [s for s in (_f_eval_sign(p, x) for p in seq) if s]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def root_near(P: IntPolynomial, zeta: Union[RealInterval, ZetaContext], radius: float,
              bits: int | None = None) -> RealInterval | None:
    """Enclosure of the real root of P closest to zeta within ``radius``.

    Roots of the squarefree part are isolated with a Sturm sequence, narrowed
    by bisection and then by Newton steps; the returned interval is certified
    by a sign change of the squarefree part at its endpoints.
    """
    if P.is_zero() or P.degree < 1:
        raise DegreeOutOfRange("root_near needs a polynomial of degree >= 1", degree=P.degree)
    z = zeta.zeta if isinstance(zeta, ZetaContext) else zeta
    if bits is None:
        bits = max(-z.exp, 64)
    c = z.mid
    r = Fraction(radius)
    a0, b0 = c - r, c + r

    fp = [Fraction(a) for a in P.coeffs]
    g = _f_gcd(fp, _f_trim([i * x for i, x in enumerate(fp)][1:]))
    S = _f_divmod(fp, g)[0] if len(g) > 1 else fp
    sturm = _sturm(S)

    def count(a: Fraction, b: Fraction) -> int:
        return _variations(sturm, a) - _variations(sturm, b)

    if count(a0, b0) == 0 and _f_eval_sign(S, a0) != 0:
        return None

    found = _isolate(S, a0, b0, sturm)
    exact_roots = [x for _, _, x in found if x is not None]
    isolated = [(a, b) for a, b, x in found if x is None]

    candidates: list[RealInterval] = [RealInterval.exact(x) if _is_dyadic(x)
                                      else RealInterval.from_fraction(x, bits) for x in exact_roots]
    for a, b in isolated:
        if _f_eval_sign(S, b) == 0:
            candidates.append(RealInterval.exact(b) if _is_dyadic(b)
                              else RealInterval.from_fraction(b, bits))
            continue
        candidates.append(_refine(S, a, b, bits))
    if not candidates:
        return None

    def dist(iv: RealInterval) -> Fraction:
        return abs(iv.mid - c)

    candidates.sort(key=dist)
    if len(candidates) > 1 and dist(candidates[1]) - dist(candidates[0]) <= z.width:
        raise PrecisionExhausted("closest root ambiguous at current zeta precision")
    return candidates[0]


def _isolate(S: _FPoly, a0: Fraction, b0: Fraction,
             sturm: list[_FPoly] | None = None) -> list[tuple[Fraction, Fraction, Fraction | None]]:
    """Roots of squarefree S in [a0, b0]: (a, b, None) isolating (a, b], or (x, x, x) exact."""
    if sturm is None:
        sturm = _sturm(S)
    out: list[tuple[Fraction, Fraction, Fraction | None]] = []
    seen: set[Fraction] = set()
    stack = [(a0, b0)]
    while stack:
        a, b = stack.pop()
        if _f_eval_sign(S, a) == 0 and a not in seen:
            seen.add(a)
            out.append((a, a, a))
        k = _variations(sturm, a) - _variations(sturm, b)
        if k == 0:
            continue
        if k == 1:
            if _f_eval_sign(S, b) == 0:
                if b not in seen:
                    seen.add(b)
                    out.append((b, b, b))
            else:
                out.append((a, b, None))
            continue
        m = (a + b) / 2
        stack.extend([(a, m), (m, b)])
    return out


def _is_dyadic(x: Fraction) -> bool:
    d = x.denominator
    return d & (d - 1) == 0


def _refine(S: _FPoly, a: Fraction, b: Fraction, bits: int) -> RealInterval:
    """Shrink an isolating interval (a, b] with a sign change to width 2**-bits."""
    sa = _f_eval_sign(S, a)
    if sa == 0:
        # root at the open end a is not ours; nudge a inward
        a = a + (b - a) / 1024
        sa = _f_eval_sign(S, a)
    # bisection to a moderate width
    for _ in range(80):
        if b - a < Fraction(1, 2 ** 60):
            break
        m = (a + b) / 2
        sm = _f_eval_sign(S, m)
        if sm == 0:
            return RealInterval.exact(m) if _is_dyadic(m) else RealInterval.from_fraction(m, bits)
        if sm == sa:
            a = m
        else:
            b = m
    dS = _f_trim([i * x for i, x in enumerate(S)][1:])

    def ev(p: _FPoly, x: Fraction) -> Fraction:
        acc = Fraction(0)
        for cc in reversed(p):
            acc = acc * x + cc
        return acc

    # Newton with doubling precision, then certify by a sign change
    x = (a + b) / 2
    prec = 60
    while prec < bits + 4:
        prec = min(2 * prec, bits + 4)
        d = ev(dS, x)
        if d == 0:
            break
        x = x - ev(S, x) / d
        x = Fraction(round(x * 2 ** prec), 2 ** prec)
    eps = Fraction(1, 2 ** (bits + 1))
    lo, hi = x - eps, x + eps
    if a <= lo and hi <= b and _f_eval_sign(S, lo) * _f_eval_sign(S, hi) < 0:
        return RealInterval.hull(lo, hi, bits + 1)
    # fall back to plain bisection
    while b - a > Fraction(1, 2 ** bits):
        m = (a + b) / 2
        sm = _f_eval_sign(S, m)
        if sm == 0:
            return RealInterval.exact(m)
        if sm == sa:
            a = m
        else:
            b = m
    return RealInterval.hull(a, b, bits + 1)
