"""Offered-load model for a streaming server fed by the multiplexer.

Each channel group contributes ``N * PID`` Kbps, where the viewer count ``N``
is Poisson with mean ``lambda`` and ``PID`` is the channel's bandwidth
allocation drawn from its fitted distribution. In shared mode every viewer of
a channel receives the same multiplexed allocation; in independent mode each
viewer draws their own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence, Union

import numpy as np

from muxstat import distcat
from muxstat.distcat import DistributionFamily, DistributionSpec
from muxstat.errors import DomainError, ParameterDomainError, UnavailableError

BLOCK_TRIALS = 8192
TRUNCATION_WARN = 0.05
DEFAULT_QUANTILES = (0.5, 0.95, 0.99)


@dataclass(frozen=True)
class DiscretePID:
    """Finite-support PID distribution, e.g. a point mass or a two-point law."""

    values: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        probs = tuple(float(p) for p in self.probs)
        if not values or len(values) != len(probs):
            raise ParameterDomainError("discrete PID needs matching, non-empty values and probs")
        if not all(math.isfinite(v) for v in values):
            raise ParameterDomainError("discrete PID values must be finite")
        if any(p < 0 for p in probs) or abs(math.fsum(probs) - 1.0) > 1e-12:
            raise ParameterDomainError("discrete PID probabilities must be non-negative and sum to 1")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def point(cls, value: float) -> "DiscretePID":
        return cls((value,), (1.0,))

    def mean(self) -> float:
        return math.fsum(v * p for v, p in zip(self.values, self.probs))

    def sample(self, u: np.ndarray) -> np.ndarray:
        cum = np.cumsum(self.probs)
        idx = np.minimum(np.searchsorted(cum, u, side="left"), len(self.values) - 1)
        return np.asarray(self.values)[idx]

    def to_dict(self) -> dict[str, Any]:
        return {"values": list(self.values), "probs": list(self.probs)}


PIDDistribution = Union[DistributionSpec, DiscretePID]


def _pid_from_dict(data: dict) -> PIDDistribution:
    if "values" in data:
        return DiscretePID(tuple(data["values"]), tuple(data.get("probs", ())))
    return DistributionSpec.from_dict(data)


def _pid_mean(pid: PIDDistribution) -> float | None:
    return pid.mean() if isinstance(pid, DiscretePID) else distcat.analytic_mean(pid)


def _pid_draw(pid: PIDDistribution, rng: np.random.Generator, n: int) -> np.ndarray:
    u = distcat.uniforms(rng, n)
    if isinstance(pid, DiscretePID):
        return pid.sample(u)
    return np.asarray(distcat.quantile(pid, u), dtype=float)


@dataclass(frozen=True)
class AudienceGroup:
    channel_id: str
    lam: float
    pid_dist: PIDDistribution

    def __post_init__(self):
        lam = float(self.lam)
        if not (math.isfinite(lam) and lam >= 0):
            raise ParameterDomainError(f"group {self.channel_id!r}: lambda must be >= 0")
        object.__setattr__(self, "lam", lam)
        if isinstance(self.pid_dist, DistributionSpec):
            if self.pid_dist.family is DistributionFamily.POISSON:
                raise ParameterDomainError(f"group {self.channel_id!r}: PID distribution must be continuous")
        elif not isinstance(self.pid_dist, DiscretePID):
            raise ParameterDomainError(f"group {self.channel_id!r}: unsupported PID distribution")

    def to_dict(self) -> dict[str, Any]:
        return {"channel": self.channel_id, "lambda": self.lam, "pid_dist": self.pid_dist.to_dict()}


@dataclass(frozen=True)
class AudienceModel:
    groups: tuple[AudienceGroup, ...]
    shared_pid_per_channel: bool = True

    def __post_init__(self):
        groups = tuple(self.groups)
        if not groups:
            raise ParameterDomainError("audience model needs at least one group")
        ids = [g.channel_id for g in groups]
        if len(set(ids)) != len(ids):
            raise ParameterDomainError("channel ids must be unique")
        object.__setattr__(self, "groups", groups)

    def scaled(self, factor: float) -> "AudienceModel":
        """Same model with every viewer rate multiplied by ``factor``."""
        return AudienceModel(
            tuple(AudienceGroup(g.channel_id, g.lam * factor, g.pid_dist) for g in self.groups),
            self.shared_pid_per_channel,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "shared_pid_per_channel": self.shared_pid_per_channel,
            "groups": [g.to_dict() for g in self.groups],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "AudienceModel":
        try:
            groups = tuple(
                AudienceGroup(str(g["channel"]), g["lambda"], _pid_from_dict(g["pid_dist"]))
                for g in data["groups"]
            )
        except (KeyError, TypeError) as exc:
            raise ParameterDomainError(f"malformed audience model: {exc}") from None
        return cls(groups, bool(data.get("shared_pid_per_channel", True)))


@dataclass(frozen=True)
class CapacityReport:
    trials: int
    mean_kbps: float
    std_kbps: float
    quantiles: dict[float, float]
    seed: int
    shared_pid_per_channel: bool = True
    truncated_fraction: float = 0.0
    warnings: tuple[str, ...] = ()
    sorted_totals: np.ndarray | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict[str, Any]:
        return {
            "trials": self.trials,
            "mean_kbps": self.mean_kbps,
            "std_kbps": self.std_kbps,
            "quantiles": [[p, v] for p, v in sorted(self.quantiles.items())],
            "seed": self.seed,
            "shared_pid_per_channel": self.shared_pid_per_channel,
            "truncated_fraction": self.truncated_fraction,
            "warnings": list(self.warnings),
        }


def _check_probs(ps: Sequence[float]) -> list[float]:
    out = [float(p) for p in ps]
    if not all(0.0 < p < 1.0 for p in out):
        raise DomainError("quantile probabilities must lie strictly between 0 and 1")
    return out


def simulate_trials(model: AudienceModel, trials: int, seed: int) -> tuple[np.ndarray, int, int]:
    """Raw per-trial demand plus (truncated draws, total PID draws).

    Trials are processed in fixed blocks; block ``b`` draws from its own
    substream ``(seed, b)`` so the output does not depend on scheduling.
    """
    if trials < 1:
        raise DomainError("trials must be at least 1")
    totals = []
    truncated = 0
    draws = 0
    for b, start in enumerate(range(0, trials, BLOCK_TRIALS)):
        m = min(BLOCK_TRIALS, trials - start)
        rng = distcat.make_rng(seed, b)
        block = np.zeros(m)
        for g in model.groups:
            if g.lam == 0:
                continue
            viewers = distcat.quantile(DistributionSpec(DistributionFamily.POISSON, lam=g.lam), distcat.uniforms(rng, m))
            viewers = np.asarray(viewers, dtype=np.int64)
            if model.shared_pid_per_channel:
                pid = _pid_draw(g.pid_dist, rng, m)
                group_total = viewers * np.maximum(pid, 0.0)
            else:
                pid = _pid_draw(g.pid_dist, rng, int(viewers.sum()))
                owner = np.repeat(np.arange(m), viewers)
                group_total = np.bincount(owner, weights=np.maximum(pid, 0.0), minlength=m)
            truncated += int(np.count_nonzero(pid < 0))
            draws += pid.size
            block += group_total
        totals.append(block)
    return np.concatenate(totals), truncated, draws


def simulate_demand(
    model: AudienceModel,
    trials: int,
    seed: int,
    quantile_ps: Sequence[float] = DEFAULT_QUANTILES,
    retain_trials: bool = True,
) -> CapacityReport:
    """Monte Carlo summary of total server demand in Kbps.

    Negative PID draws are clipped to zero; the clipped fraction is reported
    and a warning is attached when it exceeds 5%.
    """
    ps = _check_probs(quantile_ps)
    totals, truncated, draws = simulate_trials(model, trials, seed)
    totals.sort()
    fraction = truncated / draws if draws else 0.0
    warnings = ()
    if fraction > TRUNCATION_WARN:
        warnings = (f"{fraction:.1%} of PID draws were negative and truncated to 0",)
    qs = np.quantile(totals, ps, method="linear") if ps else []
    return CapacityReport(
        trials=int(trials),
        mean_kbps=float(totals.mean()),
        std_kbps=float(totals.std(ddof=1)) if trials > 1 else 0.0,
        quantiles={p: float(q) for p, q in zip(ps, qs)},
        seed=int(seed),
        shared_pid_per_channel=model.shared_pid_per_channel,
        truncated_fraction=fraction,
        warnings=warnings,
        sorted_totals=totals if retain_trials else None,
    )


def expected_demand(model: AudienceModel) -> float | None:
    """Sum of ``lambda * E[PID]`` over groups; ``None`` if any mean is undefined."""
    total = 0.0
    for g in model.groups:
        mean = _pid_mean(g.pid_dist)
        if mean is None:
            return None
        total += g.lam * mean
    return total


def capacity_quantile(report: CapacityReport, p: float) -> float:
    """Demand level not exceeded with probability ``p``."""
    p = _check_probs([p])[0]
    for stored, value in report.quantiles.items():
        if stored == p:
            return value
    if report.sorted_totals is not None:
        return float(np.quantile(report.sorted_totals, p, method="linear"))
    if not report.quantiles:
        raise UnavailableError("report holds neither quantiles nor raw trials")
    ps = sorted(report.quantiles)
    if p < ps[0] or p > ps[-1]:
        raise UnavailableError(f"p={p} outside stored range [{ps[0]}, {ps[-1]}] and no raw trials kept")
    nearest = min(ps, key=lambda s: (abs(s - p), s))
    return report.quantiles[nearest]


__all__ = [
    "AudienceGroup",
    "AudienceModel",
    "CapacityReport",
    "DiscretePID",
    "capacity_quantile",
    "expected_demand",
    "simulate_demand",
    "simulate_trials",
]
