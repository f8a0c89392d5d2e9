"""Deterministic sample sets over parameter and state boxes."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .geometry import PointXA

__all__ = ["SamplingPlan", "axis_grid", "MC_RESOLUTION"]

# Monte Carlo draws are rationals k / MC_RESOLUTION across each box side.
MC_RESOLUTION = 1 << 20


def axis_grid(lo: Fraction, hi: Fraction, count: int, special: bool = True) -> list[Fraction]:
    """``count`` equally spaced points on [lo, hi], endpoints included.

    With ``special`` the midpoint and 0 (if inside) are added, since the
    interesting sets of many families sit on coordinate axes.
    """
    if count == 1:
        pts = {(lo + hi) / 2}
    else:
        pts = {lo + (hi - lo) * k / (count - 1) for k in range(count)}
    if special:
        pts.add((lo + hi) / 2)
        if lo <= 0 <= hi:
            pts.add(Fraction(0))
    return sorted(pts)


@dataclass(frozen=True)
class SamplingPlan:
    """Which (x, a) pairs to examine.

    ``mode="grid"``: ``x_count``/``a_count`` points per axis.  ``mode="monte_carlo"``:
    that many draws in total, each keyed by ``(seed, stream, index)`` so the
    sample at a given index never depends on evaluation order.
    """

    x_box: tuple
    a_box: tuple
    x_count: int = 21
    a_count: int = 21
    seed: int = 0
    mode: str = "grid"
    eps_alpha: Fraction = Fraction(0)
    eps_beta: Fraction = Fraction(0)
    special_points: bool = True

    def __post_init__(self):
        if self.mode not in ("grid", "monte_carlo"):
            raise ValueError(f"unknown sampling mode {self.mode!r}")
        if self.x_count < 1 or self.a_count < 1:
            raise ValueError("sample counts must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        for name, box in (("x_box", self.x_box), ("a_box", self.a_box)):
            for lo, hi in box:
                if not (isinstance(lo, Fraction) and isinstance(hi, Fraction)):
                    raise ValueError(f"{name} bounds must be finite rationals")
                if not lo <= hi:
                    raise ValueError(f"{name}: need lower <= upper")
        if self.eps_alpha < 0 or self.eps_beta < 0:
            raise ValueError("thresholds must be non-negative")

    def _grid(self, box, count) -> list[tuple]:
        axes = [axis_grid(lo, hi, count, self.special_points) for lo, hi in box]
        return list(itertools.product(*axes))

    def _draws(self, box, count, stream: int) -> list[tuple]:
        out = []
        for idx in range(count):
            rng = np.random.default_rng([self.seed, stream, idx])
            ks = rng.integers(0, MC_RESOLUTION, size=len(box), endpoint=True)
            out.append(tuple(lo + (hi - lo) * Fraction(int(k), MC_RESOLUTION)
                             for k, (lo, hi) in zip(ks, box)))
        return out

    def a_samples(self) -> list[tuple]:
        if self.mode == "grid":
            return self._grid(self.a_box, self.a_count)
        return self._draws(self.a_box, self.a_count, 0)

    def x_samples(self) -> list[tuple]:
        if self.mode == "grid":
            return self._grid(self.x_box, self.x_count)
        return self._draws(self.x_box, self.x_count, 1)

    def points(self):
        """All (x, a) pairs, a-major."""
        xs = self.x_samples()
        for a in self.a_samples():
            for x in xs:
                yield PointXA(x, a)
