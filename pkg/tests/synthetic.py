"""Hand-built profiles with known extrema and segmentation."""
import numpy as np

from extremal_lab.constants import NU
from extremal_lab.minima import MinimaProfile


def ideal_dual_n3(q0: float = 10.0, count: int = 8, step: float = 0.01) -> tuple[MinimaProfile, list[float]]:
    """Self-similar n = 3 dual picture with joint zeros at q0 * nu^k.

    L1 = L2 fall at slope -1/3 and L3 = L4 rise at +1/3 up to the midpoint of
    each gap, then both reverse.  Returns the profile and the zero points.
    """
    qs = [q0 * NU**k for k in range(-1, count + 1)]
    grid = np.round(np.arange(q0 - 1.0, qs[-1] - step / 2, step), 10)
    d = np.empty_like(grid)
    for i, q in enumerate(grid):
        k = np.searchsorted(qs, q) - 1
        d[i] = min(q - qs[k], qs[k + 1] - q)
    values = np.column_stack([-d / 3, -d / 3, d / 3, d / 3])
    wit = np.zeros(values.shape, dtype=np.int64)
    return MinimaProfile("dual", 3, grid, values, wit, None), qs[1:-1]


def mirror_simultaneous(prof: MinimaProfile) -> MinimaProfile:
    """Exact Mahler dual of ``prof``: L_j = -L*_{n+2-j}."""
    vals = -prof.values[:, ::-1]
    return MinimaProfile("simultaneous", prof.n, prof.grid, vals, prof.witnesses, None)
