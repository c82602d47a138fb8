"""Borel progeny law and the tail / largest-tree / discrepancy bounds."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionViolated
from .events import EventSequence
from .hawkes import ParamBounds
from .privacy import c1_constant

TREE_CSV_HEADER = ("tree_size", "count")


@dataclass(frozen=True)
class TreeStats:
    """Per-tree in-window sizes of a labeled sequence."""

    sizes: np.ndarray
    num_trees: int
    horizon: float


def borel_pmf(nu: float, j: int) -> float:
    """P(total progeny = j) for Poisson(nu) offspring: e^{-nu j} (nu j)^{j-1} / j!.

    Evaluated in log space (ln-Gamma) so j up to 1e4 does not overflow.
    """
    if not 0 <= nu < 1:
        raise ValueError("nu must lie in [0, 1)")
    if j < 1:
        raise ValueError("j must be at least 1")
    if j == 1:
        return math.exp(-nu)
    if nu == 0.0:
        return 0.0
    log_p = -nu * j + (j - 1) * math.log(nu * j) - math.lgamma(j + 1)
    return math.exp(log_p)


def progeny_tail_bound(nu: float, d: float) -> float:
    """P(progeny > d) <= e^2 exp(-(nu - 1 - log nu) d), for d beyond the mean 1/(1-nu)."""
    if not 0 < nu < 1:
        raise ValueError("nu must lie in (0, 1)")
    if not d > 1.0 / (1.0 - nu):
        raise ValueError("d must exceed the mean progeny 1/(1-nu)")
    rate = nu - 1.0 - math.log(nu)
    return math.exp(2.0 - rate * d)


def largest_tree_prob_bound(mu: float, alpha: float, horizon: float, a: float) -> float:
    """Lower bound on P(largest tree observed by the horizon has <= a/(1-alpha) members)."""
    if not a > 1:
        raise ValueError("a must exceed 1")
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    return math.exp(-mu * horizon * math.e**2 * math.exp(-(10.0 * a / 21.0) * (1.0 - alpha)))


def tree_sizes(events: EventSequence) -> TreeStats:
    """Multiset of in-window tree sizes, grouped by tree_id."""
    if not events.labeled:
        raise ValueError("sequence carries no tree labels")
    if len(events) == 0:
        return TreeStats(sizes=np.zeros(0, dtype=np.int64), num_trees=0,
                         horizon=events.horizon)
    counts = np.bincount(events.tree_id)
    sizes = counts[counts > 0]
    return TreeStats(sizes=sizes, num_trees=int(sizes.size), horizon=events.horizon)


def discrepancy_bound(bounds: ParamBounds, gamma: float, b: int, delta: float) -> float:
    """High-probability cap B^{3/2} sqrt(delta) C1 on the summed deviation of B bins.

    Requires delta strictly above 10*alpha_upper^2 / (2*(1-alpha_upper)).
    """
    if b < 1:
        raise ValueError("b must be a positive integer")
    threshold = 10.0 * bounds.alpha_upper**2 / (2.0 * (1.0 - bounds.alpha_upper))
    if not delta > threshold:
        raise PreconditionViolated(
            f"delta {delta:.6g} must exceed 10*alpha_upper^2/(2*(1-alpha_upper)) = {threshold:.6g}")
    return b**1.5 * math.sqrt(delta) * c1_constant(bounds, gamma)


def write_tree_csv(stats: TreeStats, path) -> None:
    """Histogram export: one row per observed size."""
    sizes, counts = np.unique(stats.sizes, return_counts=True)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(TREE_CSV_HEADER) + "\n")
        for s, c in zip(sizes, counts):
            fh.write(f"{int(s)},{int(c)}\n")


def read_tree_csv(path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="") as fh:
        header = fh.readline().strip()
        if tuple(header.split(",")) != TREE_CSV_HEADER:
            raise ValueError(f"{path}: expected header {','.join(TREE_CSV_HEADER)}")
        sizes, counts = [], []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            s, c = line.split(",")
            sizes.append(int(s))
            counts.append(int(c))
    return np.asarray(sizes, dtype=np.int64), np.asarray(counts, dtype=np.int64)
