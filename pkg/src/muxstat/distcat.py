"""Parametric distribution catalog.

Every family the bitrate analysis needs is evaluable (density, log-density,
CDF, quantile), sampleable by inverse transform, and reports its support and
analytic mean. Functions accept a scalar or an array for ``x``/``p`` and
return the same shape (a plain ``float`` for scalar input).

Parameter naming follows the usual statistics-toolbox convention:

========================  ===========================  ======================
family                    parameters                   notes
========================  ===========================  ======================
``normal``                mu, sigma
``logistic``              mu, sigma
``tlocationscale``        mu, sigma, nu                nu = degrees of freedom
``gev``                   k, sigma, mu                 k > 0 heavy right tail
``genpareto``             k, sigma, mu                 mu is the threshold
``extremevalue``          mu, sigma                    Gumbel, minimum by default
``exponential``           sigma                        sigma is the mean
``poisson``               lambda                       integer support
========================  ===========================  ======================
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np

from muxstat import _special as sf
from muxstat.errors import DomainError, ParameterDomainError


class DistributionFamily(str, Enum):
    NORMAL = "normal"
    LOGISTIC = "logistic"
    TLOCATIONSCALE = "tlocationscale"
    GEV = "gev"
    GENPARETO = "genpareto"
    EXTREMEVALUE = "extremevalue"
    EXPONENTIAL = "exponential"
    POISSON = "poisson"

    @classmethod
    def parse(cls, tag: "str | DistributionFamily") -> "DistributionFamily":
        if isinstance(tag, cls):
            return tag
        try:
            return cls(str(tag).strip().lower())
        except ValueError:
            known = ", ".join(f.value for f in cls)
            raise ParameterDomainError(f"unknown family {tag!r} (known: {known})") from None

    @property
    def is_discrete(self) -> bool:
        return self is DistributionFamily.POISSON

    def __str__(self) -> str:
        return self.value


#: Parameter names used by each family, in reporting order.
FAMILY_PARAMS: dict[DistributionFamily, tuple[str, ...]] = {
    DistributionFamily.NORMAL: ("mu", "sigma"),
    DistributionFamily.LOGISTIC: ("mu", "sigma"),
    DistributionFamily.TLOCATIONSCALE: ("mu", "sigma", "nu"),
    DistributionFamily.GEV: ("k", "sigma", "mu"),
    DistributionFamily.GENPARETO: ("k", "sigma", "mu"),
    DistributionFamily.EXTREMEVALUE: ("mu", "sigma"),
    DistributionFamily.EXPONENTIAL: ("sigma",),
    DistributionFamily.POISSON: ("lambda",),
}

_ALL_PARAMS = ("k", "sigma", "mu", "nu", "lambda")

# Shapes this close to zero use the exponential/Gumbel limit; 1/k would overflow.
_ZERO_SHAPE = 1e-12


@dataclass(frozen=True)
class DistributionSpec:
    """A catalog family together with its parameter values.

    Parameters a family does not use must be left as ``None``. ``maximum``
    selects the Gumbel-max orientation and is only meaningful for
    ``extremevalue``.
    """

    family: DistributionFamily
    k: float | None = None
    sigma: float | None = None
    mu: float | None = None
    nu: float | None = None
    lam: float | None = None
    maximum: bool = False

    def __post_init__(self):
        fam = DistributionFamily.parse(self.family)
        object.__setattr__(self, "family", fam)
        used = FAMILY_PARAMS[fam]
        for name in _ALL_PARAMS:
            value = getattr(self, _attr(name))
            if name in used:
                if value is None:
                    raise ParameterDomainError(f"{fam}: missing parameter {name!r}")
                try:
                    value = float(value)
                except (TypeError, ValueError):
                    raise ParameterDomainError(f"{fam}: parameter {name!r} is not a number") from None
                if not math.isfinite(value):
                    raise ParameterDomainError(f"{fam}: parameter {name!r} must be finite")
                object.__setattr__(self, _attr(name), value)
            elif value is not None:
                raise ParameterDomainError(f"{fam}: parameter {name!r} is not used by this family")
        if self.sigma is not None and self.sigma <= 0:
            raise ParameterDomainError(f"{fam}: sigma must be > 0, got {self.sigma}")
        if self.nu is not None and self.nu <= 0:
            raise ParameterDomainError(f"{fam}: nu must be > 0, got {self.nu}")
        if self.lam is not None and self.lam <= 0:
            raise ParameterDomainError(f"{fam}: lambda must be > 0, got {self.lam}")
        if self.maximum and fam is not DistributionFamily.EXTREMEVALUE:
            raise ParameterDomainError(f"{fam}: orientation applies to extremevalue only")
        object.__setattr__(self, "maximum", bool(self.maximum))

    @classmethod
    def make(cls, family, **params) -> "DistributionSpec":
        """Build from JSON-style parameter names (``lambda`` rather than ``lam``)."""
        kwargs = {}
        for name, value in params.items():
            if name not in _ALL_PARAMS and name != "maximum":
                raise ParameterDomainError(f"unknown parameter {name!r}")
            kwargs[_attr(name)] = value
        return cls(DistributionFamily.parse(family), **kwargs)

    @property
    def params(self) -> dict[str, float]:
        return {name: getattr(self, _attr(name)) for name in FAMILY_PARAMS[self.family]}

    @property
    def param_count(self) -> int:
        return len(FAMILY_PARAMS[self.family])

    def with_params(self, **params) -> "DistributionSpec":
        merged = dict(self.params)
        merged.update(params)
        return DistributionSpec.make(self.family, maximum=self.maximum, **merged)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"family": self.family.value, "params": self.params}
        if self.maximum:
            out["orientation"] = "max"
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "DistributionSpec":
        if not isinstance(data, dict) or "family" not in data:
            raise ParameterDomainError("distribution must be an object with a 'family' key")
        params = data.get("params", {})
        if not isinstance(params, dict):
            raise ParameterDomainError("'params' must be an object")
        orientation = data.get("orientation", "min")
        if orientation not in ("min", "max"):
            raise ParameterDomainError(f"orientation must be 'min' or 'max', got {orientation!r}")
        return cls.make(data["family"], maximum=orientation == "max", **params)

    def __str__(self) -> str:
        inner = ", ".join(f"{name}={value:.6g}" for name, value in self.params.items())
        return f"{self.family.value}({inner})"


def _attr(name: str) -> str:
    return "lam" if name == "lambda" else name


@dataclass(frozen=True)
class SupportInterval:
    lower: float
    upper: float
    lower_closed: bool
    upper_closed: bool
    integer: bool = False

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("support lower bound exceeds upper bound")
        if math.isinf(self.lower):
            object.__setattr__(self, "lower_closed", False)
        if math.isinf(self.upper):
            object.__setattr__(self, "upper_closed", False)

    def contains(self, x) -> np.ndarray | bool:
        x = np.asarray(x, dtype=float)
        lo = x >= self.lower if self.lower_closed else x > self.lower
        hi = x <= self.upper if self.upper_closed else x < self.upper
        ok = lo & hi
        if self.integer:
            ok &= np.floor(x) == x
        return bool(ok) if ok.ndim == 0 else ok


def _check_spec(spec) -> DistributionSpec:
    if not isinstance(spec, DistributionSpec):
        raise ParameterDomainError(f"expected DistributionSpec, got {type(spec).__name__}")
    return spec


def _out(values, scalar: bool):
    return float(values) if scalar else values


def _as_points(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("x must be finite")
    return arr, arr.ndim == 0


def support(spec: DistributionSpec) -> SupportInterval:
    spec = _check_spec(spec)
    fam = spec.family
    inf = math.inf
    if fam is DistributionFamily.GEV:
        if spec.k > 0:
            return SupportInterval(spec.mu - spec.sigma / spec.k, inf, True, False)
        if spec.k < 0:
            return SupportInterval(-inf, spec.mu - spec.sigma / spec.k, False, True)
        return SupportInterval(-inf, inf, False, False)
    if fam is DistributionFamily.GENPARETO:
        if spec.k < 0:
            return SupportInterval(spec.mu, spec.mu - spec.sigma / spec.k, True, True)
        return SupportInterval(spec.mu, inf, True, False)
    if fam is DistributionFamily.EXPONENTIAL:
        return SupportInterval(0.0, inf, True, False)
    if fam is DistributionFamily.POISSON:
        return SupportInterval(0.0, inf, True, False, integer=True)
    return SupportInterval(-inf, inf, False, False)


def log_pdf(spec: DistributionSpec, x):
    """Natural log of the density (probability mass for ``poisson``).

    Returns ``-inf`` outside the support and stays finite where the density
    itself underflows.
    """
    spec = _check_spec(spec)
    x, scalar = _as_points(x)
    fam = spec.family

    if fam is DistributionFamily.POISSON:
        if np.any(np.floor(x) != x):
            raise DomainError("poisson mass is defined at integers only")
        with np.errstate(divide="ignore", invalid="ignore"):
            out = x * math.log(spec.lam) - spec.lam - sf.gammaln(x + 1.0)
        out = np.where(x < 0, -np.inf, out)
        return _out(out, scalar)

    log_sigma = math.log(spec.sigma)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if fam is DistributionFamily.EXPONENTIAL:
            out = np.where(x < 0, -np.inf, -log_sigma - x / spec.sigma)
            return _out(out, scalar)

        z = (x - spec.mu) / spec.sigma
        if fam is DistributionFamily.NORMAL:
            out = -log_sigma - sf.LOG_SQRT_2PI - 0.5 * z * z
        elif fam is DistributionFamily.LOGISTIC:
            a = np.abs(z)
            out = -log_sigma - a - 2.0 * np.log1p(np.exp(-a))
        elif fam is DistributionFamily.TLOCATIONSCALE:
            nu = spec.nu
            const = sf.gammaln(0.5 * (nu + 1.0)) - sf.gammaln(0.5 * nu) - 0.5 * math.log(nu * math.pi)
            out = const - log_sigma - 0.5 * (nu + 1.0) * np.log1p(z * z / nu)
        elif fam is DistributionFamily.EXTREMEVALUE:
            if spec.maximum:
                out = -log_sigma - z - np.exp(-z)
            else:
                out = -log_sigma + z - np.exp(z)
        elif fam is DistributionFamily.GEV:
            k = spec.k
            if abs(k) < _ZERO_SHAPE:
                out = -log_sigma - z - np.exp(-z)
            else:
                inside = 1.0 + k * z > 0
                lg = np.log1p(np.where(inside, k * z, 0.0))
                out = np.where(inside, -log_sigma - (1.0 + 1.0 / k) * lg - np.exp(-lg / k), -np.inf)
        elif fam is DistributionFamily.GENPARETO:
            k = spec.k
            if abs(k) < _ZERO_SHAPE:
                out = np.where(z < 0, -np.inf, -log_sigma - z)
            else:
                w = 1.0 + k * z
                inside = (z >= 0) & (w > 0)
                lg = np.log1p(np.where(inside, k * z, 0.0))
                out = np.where(inside, -log_sigma - (1.0 + 1.0 / k) * lg, -np.inf)
                if k < 0:
                    # closed upper endpoint: density is 0, finite, or infinite
                    power = -1.0 - 1.0 / k
                    at_end = (z >= 0) & (w == 0)
                    end_value = -np.inf if power > 0 else (-log_sigma if power == 0 else np.inf)
                    out = np.where(at_end, end_value, out)
        else:  # pragma: no cover - enum is exhaustive
            raise ParameterDomainError(f"unsupported family {fam}")
    return _out(out, scalar)


def pdf(spec: DistributionSpec, x):
    """Density at ``x`` (probability mass for ``poisson``); 0 outside the support."""
    return _out(np.exp(log_pdf(spec, x)), np.ndim(x) == 0)


def cdf(spec: DistributionSpec, x):
    spec = _check_spec(spec)
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)):
        raise DomainError("x must not be NaN")
    scalar = x.ndim == 0
    fam = spec.family

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if fam is DistributionFamily.POISSON:
            out = np.where(x < 0, 0.0, sf.pdtr(np.floor(np.maximum(x, 0.0)), spec.lam))
            return _out(out, scalar)
        if fam is DistributionFamily.EXPONENTIAL:
            out = np.where(x < 0, 0.0, -np.expm1(-np.maximum(x, 0.0) / spec.sigma))
            return _out(out, scalar)

        z = (x - spec.mu) / spec.sigma
        if fam is DistributionFamily.NORMAL:
            out = sf.ndtr(z)
        elif fam is DistributionFamily.LOGISTIC:
            out = sf.expit(z)
        elif fam is DistributionFamily.TLOCATIONSCALE:
            # reflect the upper half so the tail approaches 1 monotonically
            out = np.where(z > 0, 1.0 - sf.stdtr(spec.nu, -np.abs(z)), sf.stdtr(spec.nu, z))
        elif fam is DistributionFamily.EXTREMEVALUE:
            if spec.maximum:
                out = np.exp(-np.exp(-z))
            else:
                out = -np.expm1(-np.exp(z))
        elif fam is DistributionFamily.GEV:
            k = spec.k
            if abs(k) < _ZERO_SHAPE:
                out = np.exp(-np.exp(-z))
            else:
                inside = 1.0 + k * z > 0
                lg = np.log1p(np.where(inside, k * z, 0.0))
                out = np.where(inside, np.exp(-np.exp(-lg / k)), 0.0 if k > 0 else 1.0)
        elif fam is DistributionFamily.GENPARETO:
            k = spec.k
            zz = np.maximum(z, 0.0)
            if abs(k) < _ZERO_SHAPE:
                out = -np.expm1(-zz)
            else:
                w = 1.0 + k * zz
                lg = np.log1p(np.where(w > 0, k * zz, 0.0))
                out = np.where(w > 0, -np.expm1(-lg / k), 1.0)
            out = np.where(z < 0, 0.0, out)
        else:  # pragma: no cover
            raise ParameterDomainError(f"unsupported family {fam}")
    return _out(np.clip(out, 0.0, 1.0), scalar)


def quantile(spec: DistributionSpec, p):
    """Inverse CDF. For ``poisson`` the smallest integer whose CDF reaches ``p``."""
    spec = _check_spec(spec)
    p = np.asarray(p, dtype=float)
    if not np.all((p > 0.0) & (p < 1.0)):
        raise DomainError("probability must lie strictly between 0 and 1")
    scalar = p.ndim == 0
    fam = spec.family

    if fam is DistributionFamily.NORMAL:
        out = spec.mu + spec.sigma * sf.ndtri(p)
    elif fam is DistributionFamily.LOGISTIC:
        out = spec.mu + spec.sigma * sf.logit(p)
    elif fam is DistributionFamily.TLOCATIONSCALE:
        out = spec.mu + spec.sigma * sf.stdtrit(spec.nu, p)
    elif fam is DistributionFamily.EXTREMEVALUE:
        if spec.maximum:
            out = spec.mu - spec.sigma * np.log(-np.log(p))
        else:
            out = spec.mu + spec.sigma * np.log(-np.log1p(-p))
    elif fam is DistributionFamily.GEV:
        y = np.log(-np.log(p))
        if abs(spec.k) < _ZERO_SHAPE:
            out = spec.mu - spec.sigma * y
        else:
            out = spec.mu + spec.sigma * np.expm1(-spec.k * y) / spec.k
    elif fam is DistributionFamily.GENPARETO:
        y = np.log1p(-p)
        if abs(spec.k) < _ZERO_SHAPE:
            out = spec.mu - spec.sigma * y
        else:
            out = spec.mu + spec.sigma * np.expm1(-spec.k * y) / spec.k
    elif fam is DistributionFamily.EXPONENTIAL:
        out = -spec.sigma * np.log1p(-p)
    elif fam is DistributionFamily.POISSON:
        out = _poisson_quantile(spec.lam, p)
    else:  # pragma: no cover
        raise ParameterDomainError(f"unsupported family {fam}")
    return _out(out, scalar)


def _poisson_quantile(lam: float, p: np.ndarray) -> np.ndarray:
    if p.size == 0:
        return np.zeros(p.shape)
    target = float(np.max(p))
    top = int(lam + 10.0 * math.sqrt(lam) + 20.0)
    while True:
        table = np.maximum.accumulate(sf.pdtr(np.arange(top + 1, dtype=float), lam))
        if table[-1] >= target or table[-1] == 1.0:
            break
        top *= 2
    idx = np.searchsorted(table, p, side="left")
    return np.minimum(idx, top).astype(float)


def uniforms(rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` uniforms on the open interval (0, 1) with 53-bit resolution."""
    return (rng.integers(0, 2**53, size=n, dtype=np.int64) + 0.5) * 2.0**-53


def make_rng(seed: int, *spawn_key: int) -> np.random.Generator:
    """Counter-based generator; ``spawn_key`` selects an independent substream."""
    seed = int(seed)
    if seed < 0:
        raise DomainError("seed must be non-negative")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=spawn_key)))


def sample_n(spec: DistributionSpec, seed: int, n: int) -> np.ndarray:
    """Draw ``n`` values by inverse transform from a seeded Philox stream."""
    spec = _check_spec(spec)
    if n < 0:
        raise DomainError("n must be non-negative")
    if n == 0:
        return np.empty(0)
    return np.asarray(quantile(spec, uniforms(make_rng(seed), n)), dtype=float)


def analytic_mean(spec: DistributionSpec) -> float | None:
    """Mean of the distribution, or ``None`` when it does not exist."""
    spec = _check_spec(spec)
    fam = spec.family
    if fam in (DistributionFamily.NORMAL, DistributionFamily.LOGISTIC):
        return spec.mu
    if fam is DistributionFamily.TLOCATIONSCALE:
        return spec.mu if spec.nu > 1 else None
    if fam is DistributionFamily.EXPONENTIAL:
        return spec.sigma
    if fam is DistributionFamily.POISSON:
        return spec.lam
    if fam is DistributionFamily.EXTREMEVALUE:
        shift = spec.sigma * sf.EULER_GAMMA
        return spec.mu + shift if spec.maximum else spec.mu - shift
    if fam is DistributionFamily.GEV:
        k = spec.k
        if k >= 1:
            return None
        if abs(k) < _ZERO_SHAPE:
            return spec.mu + spec.sigma * sf.EULER_GAMMA
        # (gamma(1-k) - 1)/k without cancellation for small k
        return spec.mu + spec.sigma * math.expm1(float(sf.gammaln(1.0 - k))) / k
    if fam is DistributionFamily.GENPARETO:
        return spec.mu + spec.sigma / (1.0 - spec.k) if spec.k < 1 else None
    raise ParameterDomainError(f"unsupported family {fam}")  # pragma: no cover
