from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from extremal_lab.errors import InsufficientDepth, InvalidSpec
from extremal_lab.precision import (ContinuedFraction, ExtremalSpec, RealInterval, ZetaContext,
                                    cf_eval, fibonacci_word, parse_zeta_spec, powers)


def fold(quotients):
    x = Fraction(quotients[-1])
    for a in reversed(quotients[:-1]):
        x = a + 1 / x
    return x


def below_gamma(x: Fraction) -> bool:
    # x < (sqrt5 - 1)/2  <=>  2x + 1 < sqrt5
    return 2 * x + 1 < 0 or (2 * x + 1) ** 2 < 5


@pytest.mark.parametrize("a,b,length,expected", [
    (1, 2, 7, (0, 1, 2, 1, 1, 2, 1, 2)),
    (2, 3, 3, (0, 2, 3, 2)),
])
def test_fibonacci_word(a, b, length, expected):
    assert fibonacci_word(ExtremalSpec(a, b, length)).quotients == expected


@pytest.mark.parametrize("spec", [ExtremalSpec(1, 1, 5), ExtremalSpec(1, 2, 1), ExtremalSpec(0, 2, 5)])
def test_fibonacci_word_rejects(spec):
    with pytest.raises(InvalidSpec) as exc:
        fibonacci_word(spec)
    assert exc.value.code == "invalid-spec"


def test_word_is_substitution_fixed_point():
    w = fibonacci_word(ExtremalSpec(1, 2, 200)).quotients[1:]
    image = []
    for c in w:
        image += [1, 2] if c == 1 else [1]
    assert tuple(image[:200]) == w


def test_finite_fraction_exact():
    iv = cf_eval(ContinuedFraction((0, 1, 2, 1, 1, 2)), 64, exact=True)
    assert ContinuedFraction((0, 1, 2, 1, 1, 2)).fraction() == Fraction(13, 18)
    assert iv.contains(Fraction(13, 18))


def test_all_ones_encloses_gamma():
    iv = cf_eval(ContinuedFraction((0,) + (1,) * 30), 32)
    assert below_gamma(iv.lo_value) and not below_gamma(iv.hi_value)
    assert iv.width <= Fraction(1, 2**32)


def test_long_prefix_width_and_value():
    cf = fibonacci_word(ExtremalSpec(1, 2, 2000))
    iv = cf_eval(cf, 1024)
    assert iv.width <= Fraction(1, 2**1024)
    assert iv.contains(fold(cf.quotients))


def test_too_short_prefix():
    with pytest.raises(InsufficientDepth):
        cf_eval(ContinuedFraction((0, 1, 2, 1)), 64)


@given(st.lists(st.integers(1, 6), min_size=45, max_size=60), st.integers(8, 40),
       st.lists(st.integers(1, 6), min_size=1, max_size=5))
def test_prefix_encloses_longer_prefixes(qs, bits, tail):
    cf = ContinuedFraction((0, *qs))
    iv = cf_eval(cf, bits)
    assert iv.contains(fold((0, *qs)))
    assert iv.contains(fold((0, *qs, *tail)))


@given(st.lists(st.integers(1, 4), min_size=60, max_size=80), st.integers(4, 30), st.integers(1, 10))
def test_refinement_never_widens(qs, bits, more):
    cf = ContinuedFraction((0, *qs))
    assert cf_eval(cf, bits + more).width <= cf_eval(cf, bits).width


@given(st.fractions(min_value=-3, max_value=3, max_denominator=1000), st.integers(1, 4),
       st.integers(16, 80))
def test_powers_enclose_exact(x, n, bits):
    ps = powers(RealInterval.from_fraction(x, bits), n, bits)
    for i, p in enumerate(ps, start=1):
        assert p.contains(x**i)


def test_powers_examples(gamma_ctx):
    g2 = powers(gamma_ctx.zeta, 2)[1]
    # gamma^2 = 1 - gamma, so lo <= 1 - gamma <= hi
    assert not below_gamma(1 - g2.lo_value) and below_gamma(1 - g2.hi_value)
    assert abs(float(g2) - 0.381966) < 1e-6
    assert all(p.contains(1) for p in powers(RealInterval.exact(1), 4))


@given(st.fractions(max_denominator=10**6), st.fractions(max_denominator=10**6), st.integers(4, 60))
def test_interval_ops_enclose(a, b, bits):
    A, B = RealInterval.from_fraction(a, bits), RealInterval.from_fraction(b, bits)
    assert A.lo_value <= A.hi_value
    assert (A + B).contains(a + b)
    assert (A - B).contains(a - b)
    assert (A * B).contains(a * b)
    assert abs(A).contains(abs(a))


def test_spec_strings(tmp_path):
    src, fixed = parse_zeta_spec("fib:1,2,7")
    assert fixed == 7 and src(100).quotients == (0, 1, 2, 1, 1, 2, 1, 2)
    f = tmp_path / "cf.txt"
    f.write_text("0\n1\n2\n1\n1\n2\n")
    src, fixed = parse_zeta_spec(f"cf-file:{f}")
    assert src(0).fraction() == Fraction(13, 18)
    for bad in ("fib:1", "fib:1,x", "sqrt:2", f"cf-file:{tmp_path}/missing"):
        with pytest.raises(InvalidSpec):
            parse_zeta_spec(bad)


def test_context_value(fib_ctx):
    assert abs(fib_ctx.value - 0.7204846676321325) < 1e-15
    assert fib_ctx.zeta.width_log2() < -2048
