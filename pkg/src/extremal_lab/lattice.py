"""Exact lattice reduction for the parametric lattices attached to zeta.

Both lattices are embedded into Z^d with fixed-point scaling so that the
LLL reduction runs in exact integer arithmetic (Cohen's integral variant).
Coefficient vectors and their images are updated together.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .precision import ZetaContext

Vector = list[int]


def _dot(u: Sequence[int], v: Sequence[int]) -> int:
    return sum(a * b for a, b in zip(u, v))


def lll_reduce(basis: list[Vector], images: list[Vector],
               delta: tuple[int, int] = (99, 100)) -> tuple[list[Vector], list[Vector]]:
    """Integral LLL on ``images`` (linearly independent integer rows).

    Every operation is mirrored on ``basis``; returns the new pair.
    ``delta`` is the Lovasz constant as a fraction (num, den).
    """
    b = [list(v) for v in basis]
    img = [list(v) for v in images]
    m = len(img)
    if m <= 1:
        return b, img
    dn, dd = delta
    lam = [[0] * m for _ in range(m)]
    d = [0] * (m + 1)  # d[0] = 1, d[i+1] = Gram determinant of first i+1 rows
    d[0] = 1

    def gs_row(k: int) -> None:
        for j in range(k + 1):
            u = _dot(img[k], img[j])
            for i in range(j):
                u = (d[i + 1] * u - lam[k][i] * lam[j][i]) // d[i]
            if j < k:
                lam[k][j] = u
            else:
                d[k + 1] = u
                if u == 0:
                    raise ValueError("lattice rows are linearly dependent")

    def red(k: int, l: int) -> None:
        if 2 * abs(lam[k][l]) > d[l + 1]:
            r = (2 * lam[k][l] + d[l + 1]) // (2 * d[l + 1])
            b[k] = [x - r * y for x, y in zip(b[k], b[l])]
            img[k] = [x - r * y for x, y in zip(img[k], img[l])]
            lam[k][l] -= r * d[l + 1]
            for i in range(l):
                lam[k][i] -= r * lam[l][i]

    def swap(k: int, kmax: int) -> None:
        b[k], b[k - 1] = b[k - 1], b[k]
        img[k], img[k - 1] = img[k - 1], img[k]
        for j in range(k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        lm = lam[k][k - 1]
        B = (d[k - 1] * d[k + 1] + lm * lm) // d[k]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k + 1] * lam[i][k - 1] - lm * t) // d[k]
            lam[i][k - 1] = (B * t + lm * lam[i][k]) // d[k + 1]
        d[k] = B

    gs_row(0)
    k, kmax = 1, 0
    while k < m:
        if k > kmax:
            kmax = k
            gs_row(k)
        red(k, k - 1)
        lm = lam[k][k - 1]
        if dd * d[k + 1] * d[k - 1] < dn * d[k] * d[k] - dd * lm * lm:
            swap(k, kmax)
            k = max(1, k - 1)
            continue
        for l in range(k - 2, -1, -1):
            red(k, l)
        k += 1
    return b, img


def primitive_normalized(v: Sequence[int]) -> tuple[int, ...]:
    """Divide by the gcd and make the first nonzero entry positive."""
    g = 0
    for t in v:
        g = math.gcd(g, t)
    if g == 0:
        return tuple(v)
    out = [t // g for t in v]
    for t in out:
        if t:
            if t < 0:
                out = [-s for s in out]
            break
    return tuple(out)


@dataclass
class ParametricLattice:
    """Integer embedding of the simultaneous or dual lattice at scale q.

    Coefficient vectors are (x, y_1..y_n) on the simultaneous side and
    (a_0..a_n) on the dual side.  The image at scale q approximates
    2**K times the Euclidean shape of the convex body, with
    K growing linearly in q so rounding stays negligible.
    """

    ctx: ZetaContext
    n: int
    side: str
    extra_bits: int = 80

    def __post_init__(self) -> None:
        if self.side not in ("simultaneous", "dual"):
            raise ValueError(f"unknown side {self.side!r}")
        if self.n > self.ctx.max_degree:
            raise ValueError("n exceeds the context's max_degree")

    def scale_bits(self, q: float) -> int:
        return int(math.ceil(q * 1.5 / math.log(2))) + self.extra_bits

    def matrix(self, q: float) -> list[Vector]:
        """Rows are image coordinates as integer linear forms in the coefficients."""
        K = self.scale_bits(q)
        n = self.n
        if self.side == "dual":
            big, small = q, -q / n
        else:
            big, small = q / n, -q
        # float exponentials fix which lattice in the family is reduced; the
        # reduction itself is exact
        E = math.floor(Fraction(math.exp(big)) * (1 << K))
        s = max(1, math.floor(Fraction(math.exp(small)) * (1 << K)))
        zb = K + int(big / math.log(2)) + 64
        zb = min(zb, self.ctx.bits)
        Z = self.ctx.fixed_powers(zb)
        c = [(Z[i] * E) >> zb for i in range(n + 1)]
        rows: list[Vector] = []
        if self.side == "dual":
            for i in range(n + 1):
                r = [0] * (n + 1)
                r[i] = s
                rows.append(r)
            rows.append(list(c))
        else:
            rows.append([s] + [0] * n)
            for i in range(1, n + 1):
                r = [0] * (n + 1)
                r[0] = c[i]
                r[i] = -E
                rows.append(r)
        return rows

    def images(self, basis: Sequence[Sequence[int]], q: float) -> list[Vector]:
        M = self.matrix(q)
        return [[_dot(row, v) for row in M] for v in basis]

    def reduce(self, basis: Sequence[Sequence[int]], q: float) -> tuple[list[Vector], list[Vector]]:
        return lll_reduce([list(v) for v in basis], self.images(basis, q))

    def identity(self) -> list[Vector]:
        m = self.n + 1
        return [[int(i == j) for j in range(m)] for i in range(m)]


def _combo_matrix(m: int) -> np.ndarray:
    combos = [c for c in itertools.product((-1, 0, 1), repeat=m) if any(c)]
    # keep one of each +/- pair
    half = [c for c in combos if next(t for t in c if t) > 0]
    return np.array(half, dtype=np.int64)


def reduced_sweep(ctx: ZetaContext, n: int, side: str, grid: Sequence[float],
                  keep: int | None = None) -> Iterator[tuple[float, list[tuple[int, ...]]]]:
    """Reduce the parametric lattice along ``grid`` (warm-started).

    For each q yields the reduced basis followed by the ``keep`` shortest
    (sup norm of the image) small combinations of it, primitive and
    sign-normalized.
    """
    lat = ParametricLattice(ctx, n, side)
    m = n + 1
    keep = 2 * m if keep is None else keep
    C = _combo_matrix(m)
    basis = lat.identity()
    for q in grid:
        basis, img = lat.reduce(basis, q)
        K = lat.scale_bits(q)
        F = np.array([[x / (1 << K) for x in row] for row in img], dtype=float)
        norms = np.abs(C @ F).max(axis=1)
        top = np.argsort(norms, kind="stable")[:keep]
        out = [primitive_normalized(v) for v in basis]
        for idx in top:
            coeffs = C[idx]
            v = [sum(int(coeffs[r]) * basis[r][t] for r in range(m)) for t in range(m)]
            out.append(primitive_normalized(v))
        yield q, out
