"""Shared parameter sets and statistical helpers for the test suite."""

import numpy as np

from muxstat.distcat import DistributionSpec

S = DistributionSpec.make

# Reference fits: the culture channel, then all channels pooled.
TABLE_SPECS = {
    "culture_tlocationscale": S("tlocationscale", mu=1644.76, sigma=454.92, nu=4.137),
    "culture_logistic": S("logistic", mu=1660.73, sigma=325.24),
    "culture_normal": S("normal", mu=1696.09, sigma=607.21),
    "culture_gev": S("gev", k=-0.19, sigma=587.27, mu=1460.07),
    "pooled_gev": S("gev", k=0.06, sigma=1167.89, mu=1965.89),
    "pooled_genpareto": S("genpareto", k=-0.47, sigma=3820.24, mu=-2.22e-15),
    "pooled_normal": S("normal", mu=2712.56, sigma=1579.56),
    "pooled_tlocationscale": S("tlocationscale", mu=2701.14, sigma=1566.54, nu=121.73),
}

EXTRA_SPECS = {
    "normal_std": S("normal", mu=0.0, sigma=1.0),
    "logistic_std": S("logistic", mu=0.0, sigma=1.0),
    "logistic_wide": S("logistic", mu=-50.0, sigma=20.0),
    "t_cauchy": S("tlocationscale", mu=0.0, sigma=1.0, nu=1.0),
    "gev_gumbel": S("gev", k=0.0, sigma=1.0, mu=0.0),
    "gev_heavy": S("gev", k=0.4, sigma=1167.89, mu=1965.89),
    "genpareto_heavy": S("genpareto", k=0.2, sigma=1000.0, mu=500.0),
    "genpareto_exp": S("genpareto", k=0.0, sigma=1.0, mu=0.0),
    "genpareto_uniform": S("genpareto", k=-1.0, sigma=2.0, mu=1.0),
    "ev_min": S("extremevalue", mu=2500.0, sigma=400.0),
    "ev_max": S("extremevalue", mu=1000.0, sigma=250.0, maximum=True),
    "ev_std": S("extremevalue", mu=0.0, sigma=1.0),
    "exponential_2": S("exponential", sigma=2.0),
    "exponential_2000": S("exponential", sigma=2000.0),
    "exponential_half": S("exponential", sigma=0.5),
    "poisson_2": S("poisson", **{"lambda": 2.0}),
    "poisson_30": S("poisson", **{"lambda": 30.0}),
    "poisson_250": S("poisson", **{"lambda": 250.0}),
}

ALL_SPECS = {**TABLE_SPECS, **EXTRA_SPECS}
CONTINUOUS_SPECS = {k: v for k, v in ALL_SPECS.items() if not v.family.is_discrete}

# One representative per family for the sampler checks.
FAMILY_REPRESENTATIVES = {
    "normal": TABLE_SPECS["pooled_normal"],
    "logistic": TABLE_SPECS["culture_logistic"],
    "tlocationscale": TABLE_SPECS["culture_tlocationscale"],
    "gev": TABLE_SPECS["pooled_gev"],
    "genpareto": TABLE_SPECS["pooled_genpareto"],
    "extremevalue": EXTRA_SPECS["ev_min"],
    "exponential": EXTRA_SPECS["exponential_2000"],
    "poisson": EXTRA_SPECS["poisson_30"],
}


def ks_statistic(samples, cdf, discrete=False):
    """Kolmogorov-Smirnov distance between the empirical CDF and ``cdf``.

    For integer-valued laws the supremum is taken over the jump points and
    their left limits.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if not discrete:
        f = cdf(x)
        i = np.arange(1, n + 1)
        return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))
    values, counts = np.unique(x, return_counts=True)
    emp = np.cumsum(counts) / n
    emp_left = np.concatenate([[0.0], emp[:-1]])
    model = cdf(values)
    model_left = cdf(values - 1)
    # between consecutive observed values the empirical CDF is flat
    return float(max(np.max(np.abs(emp - model)), np.max(np.abs(emp_left - model_left))))


def tiered_matrix_values(n=2821, seed=5):
    """13 synthetic channels around priority-tier means (Kbps).

    Each channel is a mean-reverting AR(1) around its tier; tiers follow the
    2, 2.5, 5 and 6.5 Mbps allocations described for the multiplexer.
    """
    tiers = [6500.0, 5000.0] + [2500.0] * 6 + [2000.0] * 5
    rng = np.random.default_rng(seed)
    cols = []
    for mean in tiers:
        dev = np.zeros(n)
        noise = rng.normal(0.0, 0.12 * mean, n)
        for t in range(1, n):
            dev[t] = 0.3 * dev[t - 1] + noise[t]
        cols.append(np.maximum(mean + dev, 50.0))
    return np.array(cols), tiers


def write_wide_csv(path, values, labels=None, index=False):
    labels = labels or [f"ch{i + 1}" for i in range(len(values))]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join((["t"] if index else []) + labels) + "\n")
        for t, row in enumerate(np.asarray(values).T):
            cells = ([str(t)] if index else []) + [f"{v:.6f}" for v in row]
            fh.write(",".join(cells) + "\n")


# Filled by the acceptance tests, printed by the terminal-summary hook.
ACCEPTANCE_LINES = {}
