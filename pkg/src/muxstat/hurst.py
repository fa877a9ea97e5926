"""Generalized Hurst exponent from the q-th order structure function."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from muxstat.errors import DegenerateSampleError, DomainError, SampleSizeError

MIN_LENGTH = 100
BAND = 0.05


class Persistence(str, Enum):
    MEAN_REVERTING = "mean_reverting"
    RANDOM_WALK = "random_walk"
    TRENDING = "trending"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class HurstEstimate:
    h: float
    q: float
    tau_min: int
    tau_max: int
    slope_r2: float

    @property
    def classification(self) -> Persistence:
        return classify_persistence(self.h)


def structure_function(x: np.ndarray, q: float, taus: np.ndarray) -> np.ndarray:
    """K_q(tau) = mean_t |x(t+tau) - x(t)|^q for each lag."""
    return np.array([np.mean(np.abs(x[tau:] - x[:-tau]) ** q) for tau in taus])


def estimate_hurst(samples, q: float = 1.0, tau_min: int = 1, tau_max: int = 19) -> HurstEstimate:
    """Fit ``ln K_q(tau) = q H ln tau + c`` by least squares over the lag window."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < MIN_LENGTH:
        raise SampleSizeError(f"need at least {MIN_LENGTH} samples, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise DomainError("samples must be finite")
    if not (q > 0 and math.isfinite(q)):
        raise DomainError("q must be positive")
    tau_min, tau_max = int(tau_min), int(tau_max)
    if tau_min < 1:
        raise DomainError("tau_min must be at least 1")
    if tau_max < tau_min + 3:
        raise DomainError("lag window needs at least 4 points (tau_max >= tau_min + 3)")
    if tau_max > x.size // 4:
        raise DomainError(f"tau_max must not exceed n/4 = {x.size // 4}")

    taus = np.arange(tau_min, tau_max + 1)
    k = structure_function(x, q, taus)
    if np.any(k <= 0):
        raise DegenerateSampleError("structure function vanishes (constant series)")

    lx = np.log(taus)
    ly = np.log(k)
    dx = lx - lx.mean()
    dy = ly - ly.mean()
    sxx = float(dx @ dx)
    slope = float(dx @ dy) / sxx
    ss_tot = float(dy @ dy)
    if ss_tot == 0:
        r2 = 1.0
    else:
        resid = dy - slope * dx
        r2 = min(1.0, max(0.0, 1.0 - float(resid @ resid) / ss_tot))
    return HurstEstimate(slope / q, float(q), tau_min, tau_max, r2)


def classify_persistence(h: float) -> Persistence:
    if not math.isfinite(h):
        raise DomainError("Hurst exponent must be finite")
    if h < 0.5 - BAND:
        return Persistence.MEAN_REVERTING
    if h > 0.5 + BAND:
        return Persistence.TRENDING
    return Persistence.RANDOM_WALK
