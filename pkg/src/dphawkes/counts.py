"""Binned count series and its sample statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .events import EventSequence

COUNTS_HEADER = ("bin_index", "count")


@dataclass(frozen=True)
class CountSeries:
    """Counts per consecutive bin of width delta; horizon is K * delta."""

    counts: np.ndarray
    delta: float
    horizon: float

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", c)
        if c.size < 2:
            raise ValueError("need at least 2 bins")
        if np.any(c < 0):
            raise ValueError("counts must be nonnegative")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if abs(c.size * self.delta - self.horizon) > 1e-9 * max(self.horizon, 1.0):
            raise ValueError("horizon must equal K * delta")

    @property
    def k(self) -> int:
        return int(self.counts.size)


@dataclass(frozen=True)
class SampleStats:
    """Sample mean and unbiased (K-1 divisor) sample variance of the bins."""

    eta_hat: float
    sigma_sq_hat: float
    k: int


def bin_events(events: EventSequence, delta: float) -> CountSeries:
    """Left-closed right-open bins; the trailing partial bin is discarded."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    k = int(math.floor(events.horizon / delta + 1e-9))
    if k < 2:
        raise ValueError(f"horizon {events.horizon} yields {k} bin(s); need at least 2")
    ts = events.timestamps
    ts = ts[ts < k * delta]
    idx = np.floor_divide(ts, delta).astype(np.int64)
    counts = np.bincount(idx, minlength=k)
    return CountSeries(counts=counts, delta=delta, horizon=k * delta)


def sample_stats(series: CountSeries) -> SampleStats:
    c = series.counts
    eta_hat = float(c.mean())
    sigma_sq_hat = float(c.var(ddof=1))
    return SampleStats(eta_hat=eta_hat, sigma_sq_hat=sigma_sq_hat, k=series.k)


def write_counts_csv(series: CountSeries, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# delta={series.delta:.17g} horizon={series.horizon:.17g}\n")
        fh.write(",".join(COUNTS_HEADER) + "\n")
        for i, c in enumerate(series.counts):
            fh.write(f"{i},{int(c)}\n")


def read_counts_csv(path) -> CountSeries:
    with open(path, newline="") as fh:
        meta = fh.readline().strip()
        if not meta.startswith("#"):
            raise ValueError(f"{path}: missing metadata line")
        fields = dict(tok.split("=", 1) for tok in meta[1:].split())
        delta = float(fields["delta"])
        horizon = float(fields["horizon"])
        header = fh.readline().strip()
        if tuple(header.split(",")) != COUNTS_HEADER:
            raise ValueError(f"{path}: expected header {','.join(COUNTS_HEADER)}")
        counts = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            idx, cnt = line.split(",")
            if int(idx) != len(counts):
                raise ValueError(f"{path}: bin indices must be consecutive from 0")
            counts.append(int(cnt))
    return CountSeries(np.asarray(counts, dtype=np.int64), delta, horizon)
