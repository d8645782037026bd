"""Arbitrary-precision construction of the target number and its powers.

Real numbers are carried as :class:`RealInterval` enclosures with dyadic
endpoints ``[lo * 2**exp, hi * 2**exp]``.  The target number is given by a
continued fraction, typically the Fibonacci word over a two-letter alphabet
of partial quotients (Roy's canonical extremal numbers).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterator, Sequence, Union

from .errors import InsufficientDepth, InvalidSpec, PrecisionExhausted

Number = Union[int, Fraction]

_LOG2 = math.log(2.0)


def _floor_shift(m: int, s: int) -> int:
    return m >> s


def _ceil_shift(m: int, s: int) -> int:
    return -((-m) >> s)


def _log_abs_int(m: int) -> float:
    """log|m| for a (possibly huge) nonzero integer."""
    m = abs(m)
    b = m.bit_length()
    if b <= 1000:
        return math.log(m)
    s = b - 60
    return math.log(m >> s) + s * _LOG2


@dataclass(frozen=True)
class RealInterval:
    """Closed interval ``[lo * 2**exp, hi * 2**exp]`` with integer ``lo <= hi``."""

    lo: int
    hi: int
    exp: int = 0

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError(f"empty interval: lo={self.lo} > hi={self.hi}")

    # -- constructors -----------------------------------------------------
    @classmethod
    def exact(cls, x: Number) -> "RealInterval":
        """Exact enclosure of a dyadic rational (or an integer)."""
        x = Fraction(x)
        den = x.denominator
        if den & (den - 1):
            raise ValueError(f"{x} is not dyadic; use from_fraction")
        e = den.bit_length() - 1
        return cls(x.numerator, x.numerator, -e)

    @classmethod
    def from_fraction(cls, x: Number, bits: int) -> "RealInterval":
        """Outward-rounded enclosure of a rational on the grid ``2**-bits``."""
        x = Fraction(x)
        num = x.numerator << bits
        lo = num // x.denominator
        hi = -((-num) // x.denominator)
        return cls(lo, hi, -bits)

    @classmethod
    def hull(cls, a: Number, b: Number, bits: int) -> "RealInterval":
        a, b = Fraction(a), Fraction(b)
        if a > b:
            a, b = b, a
        lo = cls.from_fraction(a, bits)
        hi = cls.from_fraction(b, bits)
        return cls(lo.lo, hi.hi, -bits)

    # -- views ------------------------------------------------------------
    @property
    def lo_value(self) -> Fraction:
        return Fraction(self.lo) * Fraction(2) ** self.exp

    @property
    def hi_value(self) -> Fraction:
        return Fraction(self.hi) * Fraction(2) ** self.exp

    @property
    def mid(self) -> Fraction:
        return (self.lo_value + self.hi_value) / 2

    @property
    def width(self) -> Fraction:
        return Fraction(self.hi - self.lo) * Fraction(2) ** self.exp

    def width_log2(self) -> float:
        """log2 of the width (-inf for a point interval)."""
        d = self.hi - self.lo
        if d == 0:
            return -math.inf
        return _log_abs_int(d) / _LOG2 + self.exp

    def __float__(self) -> float:
        return float(self.mid)

    def contains(self, x: Union[Number, "RealInterval"]) -> bool:
        if isinstance(x, RealInterval):
            return self.lo_value <= x.lo_value and x.hi_value <= self.hi_value
        x = Fraction(x)
        return self.lo_value <= x <= self.hi_value

    def contains_zero(self) -> bool:
        return self.lo <= 0 <= self.hi

    def sign(self) -> int:
        """Certified sign; raises PrecisionExhausted when the interval straddles 0."""
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        if self.lo == self.hi == 0:
            return 0
        raise PrecisionExhausted("interval straddles zero", width_log2=self.width_log2())

    def log_abs(self) -> float:
        """log|x| at the midpoint; the interval must not contain 0."""
        if self.contains_zero():
            raise PrecisionExhausted("log of an interval containing zero",
                                     width_log2=self.width_log2())
        m = self.lo + self.hi
        return _log_abs_int(m) + (self.exp - 1) * _LOG2

    # -- arithmetic -------------------------------------------------------
    @staticmethod
    def _coerce(x: Union[Number, "RealInterval"]) -> "RealInterval":
        if isinstance(x, RealInterval):
            return x
        return RealInterval.exact(x)

    def _aligned(self, other: "RealInterval") -> tuple[int, int, int, int, int]:
        e = min(self.exp, other.exp)
        s1, s2 = self.exp - e, other.exp - e
        return self.lo << s1, self.hi << s1, other.lo << s2, other.hi << s2, e

    def __add__(self, other):
        other = self._coerce(other)
        a, b, c, d, e = self._aligned(other)
        return RealInterval(a + c, b + d, e)

    __radd__ = __add__

    def __neg__(self) -> "RealInterval":
        return RealInterval(-self.hi, -self.lo, self.exp)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        p = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return RealInterval(min(p), max(p), self.exp + other.exp)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "RealInterval":
        if k < 0:
            raise ValueError("negative powers are not supported")
        out = RealInterval.exact(1)
        for _ in range(k):
            out = out * self
        return out

    def __abs__(self) -> "RealInterval":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return RealInterval(0, max(-self.lo, self.hi), self.exp)

    def rounded(self, bits: int) -> "RealInterval":
        """Outward rounding onto the grid ``2**-bits`` (no-op if already coarser)."""
        if self.exp >= -bits:
            return self
        s = -bits - self.exp
        return RealInterval(_floor_shift(self.lo, s), _ceil_shift(self.hi, s), -bits)

    def at_exponent(self, e: int) -> "RealInterval":
        """Re-express on the grid ``2**e`` (outward rounding when coarsening)."""
        if self.exp >= e:
            s = self.exp - e
            return RealInterval(self.lo << s, self.hi << s, e)
        return self.rounded(-e)


# ---------------------------------------------------------------------------
# continued fractions


@dataclass(frozen=True)
class ContinuedFraction:
    quotients: tuple[int, ...]

    def __post_init__(self) -> None:
        q = tuple(int(a) for a in self.quotients)
        object.__setattr__(self, "quotients", q)
        if not q:
            raise InvalidSpec("continued fraction must be nonempty")
        if any(a < 1 for a in q[1:]):
            raise InvalidSpec("partial quotients after the first must be >= 1")

    def __len__(self) -> int:
        return len(self.quotients)

    def convergents(self) -> Iterator[tuple[int, int]]:
        """Yield (p_k, q_k) for k = 0, 1, ..."""
        p0, q0, p1, q1 = 1, 0, self.quotients[0], 1
        yield p1, q1
        for a in self.quotients[1:]:
            p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
            yield p1, q1

    def fraction(self) -> Fraction:
        """Exact value of the finite continued fraction."""
        x = Fraction(self.quotients[-1])
        for a in reversed(self.quotients[:-1]):
            x = a + 1 / x
        return x


@dataclass(frozen=True)
class ExtremalSpec:
    a: int = 1
    b: int = 2
    length: int = 64

    def validate(self) -> None:
        if self.a < 1 or self.b < 1:
            raise InvalidSpec("alphabet letters must be positive", a=self.a, b=self.b)
        if self.a == self.b:
            raise InvalidSpec("alphabet letters must differ", a=self.a, b=self.b)
        if self.length < 2:
            raise InvalidSpec("length must be at least 2", length=self.length)


def _fib_letters(length: int) -> str:
    w = "a"
    while len(w) < length:
        w = "".join("ab" if c == "a" else "a" for c in w)
    return w[:length]


def fibonacci_word(spec: ExtremalSpec) -> ContinuedFraction:
    """``[0; w_1, ..., w_length]`` for the Fibonacci word under a->ab, b->a."""
    spec.validate()
    letters = _fib_letters(spec.length)
    return ContinuedFraction((0,) + tuple(spec.a if c == "a" else spec.b for c in letters))


def cf_eval(cf: ContinuedFraction, target_bits: int, exact: bool = False) -> RealInterval:
    """Enclosure of width <= 2**-target_bits.

    With ``exact=False`` the quotients are a prefix of an infinite expansion and
    the value is bracketed by consecutive convergents; the shortest sufficient
    prefix is used.  With ``exact=True`` the finite fraction itself is enclosed.
    """
    if exact:
        return RealInterval.from_fraction(cf.fraction(), target_bits + 1)
    need = 1 << (target_bits + 1)
    prev = None
    for p, q in cf.convergents():
        if prev is not None and q * prev[1] >= need:
            return RealInterval.hull(Fraction(p, q), Fraction(*prev), target_bits + 2)
        prev = (p, q)
    raise InsufficientDepth("continued fraction too short for requested precision",
                            length=len(cf), target_bits=target_bits)


def powers(zeta: RealInterval, n: int, bits: int | None = None) -> list[RealInterval]:
    """Enclosures of zeta^1 .. zeta^n, each rounded outward to ``bits``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if bits is None:
        bits = max(-zeta.exp, 0) + 16
    out = [zeta]
    for _ in range(n - 1):
        out.append((out[-1] * zeta).rounded(bits))
    return out


# ---------------------------------------------------------------------------
# zeta specifications and evaluation context

QuotientSource = Callable[[int], ContinuedFraction]


def parse_zeta_spec(text: str) -> tuple[QuotientSource, int | None]:
    """Parse ``fib:a,b[,length]`` or ``cf-file:<path>``.

    Returns a source mapping a requested length to a continued fraction, and
    the fixed length if the spec pins one (``None`` means unbounded).
    """
    kind, _, rest = text.partition(":")
    if kind == "fib":
        parts = [p for p in rest.split(",") if p.strip()]
        if len(parts) not in (2, 3):
            raise InvalidSpec("expected fib:a,b[,length]", spec=text)
        try:
            a, b = int(parts[0]), int(parts[1])
            fixed = int(parts[2]) if len(parts) == 3 else None
        except ValueError as exc:
            raise InvalidSpec(f"non-integer field in {text!r}", spec=text) from exc
        ExtremalSpec(a, b, fixed or 2).validate()
        if fixed is not None:
            cf = fibonacci_word(ExtremalSpec(a, b, fixed))
            return (lambda _n, cf=cf: cf), fixed
        return (lambda n: fibonacci_word(ExtremalSpec(a, b, max(n, 2)))), None
    if kind == "cf-file":
        path = Path(rest)
        if not path.is_file():
            raise InvalidSpec("continued-fraction file not found", path=rest)
        lines = [ln.strip() for ln in path.read_text().splitlines()]
        try:
            cf = ContinuedFraction(tuple(int(ln) for ln in lines if ln))
        except ValueError as exc:
            raise InvalidSpec("cf-file must hold one decimal quotient per line", path=rest) from exc
        return (lambda _n, cf=cf: cf), len(cf)
    raise InvalidSpec(f"unknown zeta spec {text!r}", spec=text)


@dataclass
class ZetaContext:
    """Target number with rigorous enclosures of its first few powers.

    Polynomial values and simultaneous-approximation errors are computed with
    exact dyadic arithmetic on the power enclosures; a result whose enclosure
    straddles zero triggers up to ``max_escalations`` precision doublings.
    """

    label: str
    source: QuotientSource
    bits: int = 2048
    max_degree: int = 4
    max_escalations: int = 3
    zeta: RealInterval = field(init=False)
    pows: list[RealInterval] = field(init=False)

    def __post_init__(self) -> None:
        cf = self.source(self.bits + 64)
        self.zeta = cf_eval(cf, self.bits + 8)
        p = powers(self.zeta, self.max_degree, self.bits + 8)
        e = -(self.bits + 8)
        self.pows = [RealInterval.exact(1).at_exponent(e)] + [x.at_exponent(e) for x in p]
        self._finer: ZetaContext | None = None
        self._fixed_cache: dict[int, list[int]] = {}

    @classmethod
    def from_spec(cls, text: str, bits: int = 2048, max_degree: int = 4) -> "ZetaContext":
        source, _ = parse_zeta_spec(text)
        return cls(text, source, bits, max_degree)

    @classmethod
    def from_quotients(cls, label: str, quotient: Callable[[int], int], bits: int = 512,
                       max_degree: int = 4) -> "ZetaContext":
        """Context for ``[q(0); q(1), q(2), ...]`` given the quotient rule."""
        src = lambda n: ContinuedFraction(tuple(quotient(i) for i in range(n + 1)))
        return cls(label, src, bits, max_degree)

    @property
    def value(self) -> float:
        return float(self.zeta)

    def finer(self) -> "ZetaContext":
        if self._finer is None:
            self._finer = ZetaContext(self.label, self.source, 2 * self.bits,
                                      self.max_degree, self.max_escalations - 1)
        return self._finer

    def fixed_powers(self, bits: int) -> list[int]:
        """floor(zeta^i * 2**bits) for i = 0..max_degree (bits <= working bits)."""
        if bits not in self._fixed_cache:
            if bits > self.bits:
                raise PrecisionExhausted("fixed-point request exceeds working precision",
                                         bits=bits, working=self.bits)
            self._fixed_cache[bits] = [x.rounded(bits).lo for x in self.pows]
        return self._fixed_cache[bits]

    # -- rigorous evaluations ---------------------------------------------
    def eval_poly(self, coeffs: Sequence[int]) -> RealInterval:
        """Enclosure of sum a_i zeta^i (coefficients ascending)."""
        if len(coeffs) - 1 > self.max_degree:
            raise ValueError("degree exceeds context max_degree")
        lo = hi = 0
        for a, p in zip(coeffs, self.pows):
            if a >= 0:
                lo += a * p.lo
                hi += a * p.hi
            else:
                lo += a * p.hi
                hi += a * p.lo
        return RealInterval(lo, hi, self.pows[0].exp)

    def log_abs_poly(self, coeffs: Sequence[int]) -> float:
        """log|P(zeta)| with precision escalation; raises if P(zeta) looks like 0."""
        ctx: ZetaContext = self
        while True:
            iv = ctx.eval_poly(coeffs)
            if not iv.contains_zero():
                return iv.log_abs()
            if ctx.max_escalations <= 0:
                raise PrecisionExhausted("P(zeta) enclosure still contains 0",
                                         coeffs=list(coeffs), bits=ctx.bits)
            try:
                ctx = ctx.finer()
            except InsufficientDepth as exc:
                raise PrecisionExhausted("cannot refine zeta further",
                                         coeffs=list(coeffs), bits=ctx.bits) from exc

    def log_sim_error(self, x: int, ys: Sequence[int]) -> float:
        """log max_i |zeta^i x - y_i| with precision escalation."""
        ctx: ZetaContext = self
        while True:
            ivs = [abs(ctx.eval_poly([-y] + [0] * (i - 1) + [x]))
                   for i, y in enumerate(ys, start=1)]
            top = max(ivs, key=lambda iv: iv.hi)
            if not top.contains_zero():
                return top.log_abs()
            if ctx.max_escalations <= 0:
                raise PrecisionExhausted("simultaneous error enclosure contains 0", x=x)
            try:
                ctx = ctx.finer()
            except InsufficientDepth as exc:
                raise PrecisionExhausted("cannot refine zeta further", x=x) from exc
