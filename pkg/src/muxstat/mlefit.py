"""Maximum-likelihood fitting, BIC scoring and catalog ranking.

Normal, exponential and Poisson fits are closed form. The remaining families
are fitted by Nelder-Mead on data standardized to zero mean and unit
variance, with scales optimized on the log axis, and the simplex optimum is
refined by a few finite-difference Newton steps. Standardizing keeps the
simplex well conditioned for Kbps-sized values and makes the fitted
location/scale equivariant under rescaling of the input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np
from scipy.optimize import minimize

from muxstat import _special as sf
from muxstat.distcat import DistributionFamily, DistributionSpec, log_pdf
from muxstat.errors import (
    DegenerateSampleError,
    DomainError,
    EmptyRankingError,
    MuxstatError,
    SampleSizeError,
    SupportError,
)

MIN_SAMPLES = 8
MAX_ITER = 500
REL_TOL = 1e-10

#: Number of free parameters per family. The generalized Pareto threshold is
#: pinned just below the sample minimum, so only shape and scale are fitted.
PARAM_COUNT = {
    DistributionFamily.NORMAL: 2,
    DistributionFamily.LOGISTIC: 2,
    DistributionFamily.TLOCATIONSCALE: 3,
    DistributionFamily.GEV: 3,
    DistributionFamily.GENPARETO: 2,
    DistributionFamily.EXTREMEVALUE: 2,
    DistributionFamily.EXPONENTIAL: 1,
    DistributionFamily.POISSON: 1,
}

CATALOG = tuple(DistributionFamily)


@dataclass(frozen=True)
class FitResult:
    spec: DistributionSpec
    log_likelihood: float
    bic: float
    n: int
    param_count: int
    converged: bool
    iterations: int

    @property
    def family(self) -> DistributionFamily:
        return self.spec.family

    def to_dict(self) -> dict:
        return {
            "family": self.spec.family.value,
            "params": self.spec.params,
            "loglik": self.log_likelihood,
            "bic": self.bic,
            "n": self.n,
            "converged": self.converged,
        }


@dataclass(frozen=True)
class FitRanking:
    """Fits of several families to one sample, best (lowest BIC) first."""

    entries: tuple[FitResult, ...]
    sample_label: str = ""
    skipped: dict[str, str] = field(default_factory=dict)

    @property
    def best(self) -> FitResult:
        return self.entries[0]

    def families(self) -> list[str]:
        return [e.spec.family.value for e in self.entries]

    def to_dict(self) -> dict:
        return {
            "label": self.sample_label,
            "entries": [e.to_dict() for e in self.entries],
            "skipped": dict(self.skipped),
        }


def bic_score(log_likelihood: float, param_count: int, n: int) -> float:
    """Bayesian information criterion ``k ln n - 2 ln L``; lower is better."""
    if n < 1:
        raise DomainError("n must be at least 1")
    if param_count < 0:
        raise DomainError("param_count must be non-negative")
    return param_count * math.log(n) - 2.0 * log_likelihood


def log_likelihood(spec: DistributionSpec, samples) -> float:
    return float(np.sum(log_pdf(spec, np.asarray(samples, dtype=float))))


def _ranking_key(fit: FitResult):
    return (fit.bic, fit.param_count, fit.spec.family.value)


def _prepare(family: DistributionFamily, samples) -> np.ndarray:
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < MIN_SAMPLES:
        raise SampleSizeError(f"need at least {MIN_SAMPLES} samples, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise DomainError("samples must be finite")
    if family in (DistributionFamily.EXPONENTIAL, DistributionFamily.POISSON) and np.any(x < 0):
        raise SupportError(f"{family}: samples must be non-negative")
    if family is DistributionFamily.POISSON and np.any(np.floor(x) != x):
        raise SupportError(f"{family}: samples must be integers")
    if np.ptp(x) == 0:
        raise DegenerateSampleError("sample variance is zero")
    return x


def _result(spec: DistributionSpec, x: np.ndarray, converged: bool, iterations: int) -> FitResult:
    ll = log_likelihood(spec, x)
    k = PARAM_COUNT[spec.family]
    return FitResult(spec, ll, bic_score(ll, k, x.size), int(x.size), k, converged, iterations)


# Each numerical family is described by a start point and a map from the
# unconstrained vector to a spec on the standardized scale.

def _pwm_gev_start(z: np.ndarray) -> tuple[float, float, float]:
    """Probability-weighted-moment estimate (k, sigma, mu) for GEV."""
    xs = np.sort(z)
    n = xs.size
    i = np.arange(n, dtype=float)
    b0 = xs.mean()
    b1 = np.sum(i / (n - 1) * xs) / n
    b2 = np.sum(i * (i - 1) / ((n - 1) * (n - 2)) * xs) / n
    c = (2 * b1 - b0) / (3 * b2 - b0) - math.log(2) / math.log(3)
    kh = 7.8590 * c + 2.9554 * c * c
    if not math.isfinite(kh) or abs(kh) < 1e-6:
        sigma = math.sqrt(6) / math.pi * float(np.std(xs))
        return 0.0, sigma, b0 - sf.EULER_GAMMA * sigma
    kh = min(max(kh, -0.9), 0.9)
    g = float(sf.gamma(1 + kh))
    sigma = (2 * b1 - b0) * kh / (g * (1 - 2.0 ** (-kh)))
    if not sigma > 0:
        sigma = float(np.std(xs))
    mu = b0 + sigma * (g - 1) / kh
    return -kh, sigma, mu


def _gev_feasible(k: float, sigma: float, mu: float, z: np.ndarray) -> bool:
    return bool(np.all(1 + k * (z - mu) / sigma > 0))


def _gev_start(z):
    k, sigma, mu = _pwm_gev_start(z)
    while not _gev_feasible(k, sigma, mu, z):
        k = 0.0 if abs(k) < 1e-6 else 0.5 * k
    return np.array([mu, math.log(sigma), k]), np.array([0.1, 0.1, 0.05])


def _gev_spec(theta, ctx):
    mu, log_sigma, k = theta
    if k <= -1.0:
        return None
    return DistributionSpec(DistributionFamily.GEV, k=k, sigma=math.exp(log_sigma), mu=mu)


def _logistic_start(z):
    return np.array([float(np.median(z)), math.log(math.sqrt(3) / math.pi)]), np.array([0.1, 0.1])


def _logistic_spec(theta, ctx):
    return DistributionSpec(DistributionFamily.LOGISTIC, mu=theta[0], sigma=math.exp(theta[1]))


def _t_start(z):
    excess = float(np.mean(z**4)) - 3.0
    nu = 4.0 + 6.0 / excess if excess > 0 else 30.0
    nu = min(max(nu, 2.2), 100.0)
    sigma = math.sqrt((nu - 2.0) / nu)
    return np.array([float(np.median(z)), math.log(sigma), math.log(nu)]), np.array([0.1, 0.1, 0.2])


def _t_spec(theta, ctx):
    mu, log_sigma, log_nu = theta
    if log_nu > 30:
        return None
    return DistributionSpec(DistributionFamily.TLOCATIONSCALE, mu=mu, sigma=math.exp(log_sigma), nu=math.exp(log_nu))


def _ev_start(z):
    sigma = math.sqrt(6) / math.pi
    return np.array([sf.EULER_GAMMA * sigma, math.log(sigma)]), np.array([0.1, 0.1])


def _ev_spec(theta, ctx):
    return DistributionSpec(DistributionFamily.EXTREMEVALUE, mu=theta[0], sigma=math.exp(theta[1]))


def _gp_start(z, theta_s):
    y = z - theta_s
    m = float(y.mean())
    v = float(y.var())
    k = 0.5 * (1 - m * m / v)
    sigma = 0.5 * m * (m * m / v + 1)
    k = min(max(k, -0.9), 0.9)
    ymax = float(y.max())
    while k < 0 and 1 + k * ymax / sigma <= 0:
        k = 0.0 if k > -1e-6 else 0.5 * k
    return np.array([math.log(sigma), k]), np.array([0.1, 0.05])


def _gp_spec(theta, theta_s):
    log_sigma, k = theta
    if k <= -1.0:
        return None
    return DistributionSpec(DistributionFamily.GENPARETO, k=k, sigma=math.exp(log_sigma), mu=theta_s)


def _nelder_mead(objective: Callable, start: np.ndarray, steps: np.ndarray, maxiter: int):
    f0 = objective(start)
    if not math.isfinite(f0):
        raise MuxstatError("initial point has zero likelihood")
    fatol = REL_TOL * max(1.0, abs(f0))
    simplex = np.vstack([start] + [start + np.eye(start.size)[i] * steps[i] for i in range(start.size)])
    res = minimize(
        objective,
        start,
        method="Nelder-Mead",
        options={"maxiter": maxiter, "xatol": 1e-8, "fatol": fatol, "initial_simplex": simplex},
    )
    return res


def _fd_grad_hess(objective: Callable, x: np.ndarray, h: float = 1e-4):
    d = x.size
    f0 = objective(x)
    grad = np.empty(d)
    hess = np.empty((d, d))
    e = np.eye(d) * h
    for i in range(d):
        fp, fm = objective(x + e[i]), objective(x - e[i])
        gp, gm = objective(x + 0.1 * e[i]), objective(x - 0.1 * e[i])
        grad[i] = (gp - gm) / (0.2 * h)
        hess[i, i] = (fp - 2 * f0 + fm) / (h * h)
        for j in range(i):
            hess[i, j] = hess[j, i] = (
                objective(x + e[i] + e[j]) - objective(x + e[i] - e[j])
                - objective(x - e[i] + e[j]) + objective(x - e[i] - e[j])
            ) / (4 * h * h)
    return f0, grad, hess


def _newton_polish(objective: Callable, x: np.ndarray, rounds: int = 4) -> np.ndarray:
    """Refine a simplex optimum with finite-difference Newton steps.

    The simplex can only locate the optimum to about sqrt(machine eps) because
    it compares function values; a gradient root is located far more sharply.
    Steps that leave the local basin or raise the objective are refused.
    """
    for _ in range(rounds):
        f0, grad, hess = _fd_grad_hess(objective, x)
        if not (math.isfinite(f0) and np.all(np.isfinite(grad)) and np.all(np.isfinite(hess))):
            break
        try:
            if np.min(np.linalg.eigvalsh(hess)) <= 0:
                break
            step = -np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            break
        size = float(np.max(np.abs(step)))
        if size > 0.05:
            break
        candidate = x + step
        if not objective(candidate) <= f0 + 1e-11 * max(1.0, abs(f0)):
            break
        x = candidate
        if size < 1e-12:
            break
    return x


def _fit_numeric(family: DistributionFamily, x: np.ndarray, maxiter: int) -> FitResult:
    loc0 = float(np.mean(x))
    sc0 = float(np.std(x))
    z = (x - loc0) / sc0

    theta_orig = None
    ctx = None
    if family is DistributionFamily.LOGISTIC:
        start, steps = _logistic_start(z)
        build = _logistic_spec
    elif family is DistributionFamily.TLOCATIONSCALE:
        start, steps = _t_start(z)
        build = _t_spec
    elif family is DistributionFamily.GEV:
        start, steps = _gev_start(z)
        build = _gev_spec
    elif family is DistributionFamily.EXTREMEVALUE:
        start, steps = _ev_start(z)
        build = _ev_spec
    elif family is DistributionFamily.GENPARETO:
        theta_orig = float(x.min() - 1e-9 * np.ptp(x))
        ctx = (theta_orig - loc0) / sc0
        start, steps = _gp_start(z, ctx)
        build = _gp_spec
    else:  # pragma: no cover
        raise ValueError(f"{family} has a closed-form fit")

    def objective(theta):
        spec = build(theta, ctx)
        if spec is None:
            return math.inf
        value = -float(np.sum(log_pdf(spec, z)))
        return value if math.isfinite(value) else math.inf

    res = _nelder_mead(objective, start, steps, maxiter)
    iterations = int(res.nit)
    converged = bool(res.success)
    best = res
    if not converged:
        jitter = np.random.default_rng(0).uniform(-0.5, 0.5, size=start.size) * steps
        retry = _nelder_mead(objective, res.x + jitter, steps, maxiter)
        iterations += int(retry.nit)
        converged = bool(retry.success)
        if retry.fun <= res.fun:
            best = retry

    std_spec = build(_newton_polish(objective, best.x), ctx)
    params = std_spec.params
    if "sigma" in params:
        params["sigma"] *= sc0
    if family is DistributionFamily.GENPARETO:
        params["mu"] = theta_orig
    elif "mu" in params:
        params["mu"] = loc0 + sc0 * params["mu"]
    spec = DistributionSpec.make(family, **params)
    return _result(spec, x, converged, iterations)


def fit_mle(family, samples, *, maxiter: int = MAX_ITER) -> FitResult:
    """Fit one catalog family to ``samples`` by maximum likelihood.

    Raises :class:`SampleSizeError` for fewer than 8 samples,
    :class:`DegenerateSampleError` for a constant sample and
    :class:`SupportError` when the data fall outside the family's support.
    Non-converged numerical fits are returned with ``converged=False``.
    """
    family = DistributionFamily.parse(family)
    x = _prepare(family, samples)
    if family is DistributionFamily.NORMAL:
        spec = DistributionSpec(family, mu=float(np.mean(x)), sigma=float(np.std(x)))
        return _result(spec, x, True, 0)
    if family is DistributionFamily.EXPONENTIAL:
        return _result(DistributionSpec(family, sigma=float(np.mean(x))), x, True, 0)
    if family is DistributionFamily.POISSON:
        return _result(DistributionSpec(family, lam=float(np.mean(x))), x, True, 0)
    return _fit_numeric(family, x, maxiter)


def rank_catalog(samples, families: Iterable | None = None, label: str = "") -> FitRanking:
    """Fit every requested family and order the fits by ascending BIC.

    Families whose support excludes part of the sample are skipped and the
    reason is kept in :attr:`FitRanking.skipped`. Ties in BIC go to the
    family with fewer parameters, then to the alphabetically first tag.
    """
    if families is None:
        chosen = list(CATALOG)
    else:
        chosen = sorted({DistributionFamily.parse(f) for f in families}, key=CATALOG.index)
    if not chosen:
        raise EmptyRankingError("no families requested")
    entries = []
    skipped = {}
    for fam in chosen:
        try:
            entries.append(fit_mle(fam, samples))
        except SupportError as exc:
            skipped[fam.value] = str(exc)
    if not entries:
        raise EmptyRankingError("every requested family was skipped: " + "; ".join(skipped.values()))
    entries.sort(key=_ranking_key)
    return FitRanking(tuple(entries), label, skipped)
