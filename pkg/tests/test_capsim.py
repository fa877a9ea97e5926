import json
import math
from collections import defaultdict

import numpy as np
import pytest

from muxstat import capsim, distcat
from muxstat.capsim import AudienceGroup, AudienceModel, DiscretePID
from muxstat.errors import DomainError, ParameterDomainError, UnavailableError

from _support import S, TABLE_SPECS

GEV_MEAN_POOLED = 2713.3998058188287


def model(*groups, shared=True):
    return AudienceModel(tuple(AudienceGroup(f"g{i}", lam, pid) for i, (lam, pid) in enumerate(groups)), shared)


def poisson_pmf(k, lam):
    return math.exp(k * math.log(lam) - lam - math.lgamma(k + 1)) if lam > 0 else float(k == 0)


def poisson_inverse_cdf(lam, p):
    k, total = 0, 0.0
    while True:
        total += poisson_pmf(k, lam)
        if total >= p:
            return k
        k += 1


def enumerate_demand(lam, values, probs, shared):
    """Exact demand distribution for one group with a finite PID law."""
    dist = defaultdict(float)
    top = 0
    while 1 - sum(poisson_pmf(j, lam) for j in range(top + 1)) > 1e-14:
        top += 1
    for n in range(top + 1):
        pn = poisson_pmf(n, lam)
        if shared:
            for v, p in zip(values, probs):
                dist[n * v] += pn * p
        else:
            # number of viewers who drew the second value is binomial
            for j in range(n + 1):
                pj = math.comb(n, j) * probs[1] ** j * probs[0] ** (n - j)
                dist[(n - j) * values[0] + j * values[1]] += pn * pj
    support = np.array(sorted(dist))
    return support, np.cumsum([dist[s] for s in support])


def ks_against_enumeration(totals, support, cdf):
    totals = np.sort(totals)
    emp = np.searchsorted(totals, support, side="right") / totals.size
    emp_left = np.searchsorted(totals, support, side="left") / totals.size
    model_left = np.concatenate([[0.0], cdf[:-1]])
    return max(np.max(np.abs(emp - cdf)), np.max(np.abs(emp_left - model_left)))


# -- simulate_demand --------------------------------------------------------------

def test_zero_audience():
    rep = capsim.simulate_demand(model((0.0, TABLE_SPECS["pooled_gev"]), (0.0, DiscretePID.point(5.0))), 1000, 1)
    assert rep.mean_kbps == 0.0
    assert all(v == 0.0 for v in rep.quantiles.values())


def test_point_mass_shared_mean():
    c, lam, trials = 2500.0, 10.0, 50_000
    rep = capsim.simulate_demand(model((lam, DiscretePID.point(c))), trials, 3)
    assert abs(rep.mean_kbps - lam * c) <= 3 * c * math.sqrt(lam) / math.sqrt(trials)


def test_gev_group_mean_matches_analytic():
    trials = 100_000
    rep = capsim.simulate_demand(model((100.0, TABLE_SPECS["pooled_gev"])), trials, 17)
    assert abs(rep.mean_kbps - 100 * GEV_MEAN_POOLED) <= 3 * rep.std_kbps / math.sqrt(trials)


@pytest.mark.parametrize("shared", [True, False])
def test_two_point_pid_matches_enumeration(shared):
    values, probs, lam, trials = (1000.0, 3000.0), (0.7, 0.3), 2.0, 100_000
    m = model((lam, DiscretePID(values, probs)), shared=shared)
    totals, _, _ = capsim.simulate_trials(m, trials, 99)
    support, cdf = enumerate_demand(lam, values, probs, shared)
    assert cdf[-1] == pytest.approx(1.0, abs=1e-12)
    assert ks_against_enumeration(totals, support, cdf) < 1.63 / math.sqrt(trials)


@pytest.mark.parametrize("config", [
    [(5.0, S("normal", mu=2712.56, sigma=400.0))],
    [(20.0, TABLE_SPECS["pooled_gev"]), (3.0, DiscretePID((1000.0, 2000.0), (0.5, 0.5)))],
    [(50.0, S("logistic", mu=1660.73, sigma=325.24)), (8.0, S("exponential", sigma=2000.0))],
])
def test_shared_and_independent_modes(config):
    trials = 40_000
    shared = capsim.simulate_demand(model(*config, shared=True), trials, 5)
    indep = capsim.simulate_demand(model(*config, shared=False), trials, 5)
    se = math.sqrt(shared.std_kbps**2 + indep.std_kbps**2) / math.sqrt(trials)
    assert abs(shared.mean_kbps - indep.mean_kbps) <= 4 * se
    assert shared.std_kbps >= indep.std_kbps


def test_doubling_rates_doubles_demand():
    base = model((10.0, TABLE_SPECS["pooled_gev"]), (4.0, S("exponential", sigma=2000.0)))
    double = base.scaled(2.0)
    assert capsim.expected_demand(double) == 2 * capsim.expected_demand(base)
    trials = 40_000
    a = capsim.simulate_demand(base, trials, 8)
    b = capsim.simulate_demand(double, trials, 9)
    se = math.sqrt((2 * a.std_kbps) ** 2 + b.std_kbps**2) / math.sqrt(trials)
    assert abs(b.mean_kbps - 2 * a.mean_kbps) <= 4 * se


def test_negative_draws_truncated_and_flagged():
    rep = capsim.simulate_demand(model((10.0, S("normal", mu=100.0, sigma=200.0))), 5000, 2)
    assert rep.truncated_fraction > 0.05
    assert rep.warnings
    rep = capsim.simulate_demand(model((10.0, S("normal", mu=2712.56, sigma=400.0))), 5000, 2)
    assert rep.truncated_fraction == 0.0 and not rep.warnings


def test_report_deterministic_and_seed_sensitive():
    m = model((30.0, TABLE_SPECS["culture_tlocationscale"]), (12.0, TABLE_SPECS["pooled_gev"]))
    a = capsim.simulate_demand(m, 20_000, 11)
    b = capsim.simulate_demand(m, 20_000, 11)
    assert a == b and np.array_equal(a.sorted_totals, b.sorted_totals)
    assert a != capsim.simulate_demand(m, 20_000, 12)


def test_report_invariants():
    m = model((30.0, TABLE_SPECS["pooled_gev"]))
    rep = capsim.simulate_demand(m, 5000, 1, [0.99, 0.5, 0.9])
    ordered = [rep.quantiles[p] for p in sorted(rep.quantiles)]
    assert ordered == sorted(ordered)
    assert rep.sorted_totals[0] <= rep.mean_kbps <= rep.sorted_totals[-1]


@pytest.mark.parametrize("bad", [[0.0], [1.0], [0.5, 1.2]])
def test_invalid_quantile_probabilities(bad):
    with pytest.raises(DomainError):
        capsim.simulate_demand(model((1.0, DiscretePID.point(1.0))), 10, 0, bad)


def test_trials_must_be_positive():
    with pytest.raises(DomainError):
        capsim.simulate_demand(model((1.0, DiscretePID.point(1.0))), 0, 0)


# -- expected_demand ------------------------------------------------------------------

def test_expected_demand_examples():
    assert capsim.expected_demand(model((5.0, S("exponential", sigma=2000.0)))) == 10_000
    two = model((5.0, S("exponential", sigma=2000.0)), (3.0, S("exponential", sigma=1000.0)))
    assert capsim.expected_demand(two) == 13_000
    heavy = model((5.0, S("exponential", sigma=2000.0)), (1.0, S("tlocationscale", mu=2000, sigma=100, nu=0.9)))
    assert capsim.expected_demand(heavy) is None


def test_expected_demand_same_in_both_modes():
    groups = [(7.0, TABLE_SPECS["pooled_gev"]), (2.0, DiscretePID((1.0, 3.0), (0.5, 0.5)))]
    assert capsim.expected_demand(model(*groups, shared=True)) == capsim.expected_demand(model(*groups, shared=False))


# -- capacity_quantile ------------------------------------------------------------------

@pytest.mark.parametrize("p", [0.5, 0.9, 0.95])
def test_degenerate_model_quantile_is_scaled_poisson_quantile(p):
    c, lam = 2000.0, 10.0
    rep = capsim.simulate_demand(model((lam, DiscretePID.point(c))), 100_000, 4, [0.25])
    assert capsim.capacity_quantile(rep, p) == c * poisson_inverse_cdf(lam, p)


def test_stored_quantile_returned_exactly():
    rep = capsim.simulate_demand(model((40.0, TABLE_SPECS["pooled_gev"])), 10_000, 6, [0.5, 0.95, 0.99])
    assert capsim.capacity_quantile(rep, 0.95) == rep.quantiles[0.95]


def test_quantile_without_raw_trials():
    rep = capsim.simulate_demand(model((40.0, TABLE_SPECS["pooled_gev"])), 10_000, 6, [0.5, 0.95, 0.99],
                                 retain_trials=False)
    assert capsim.capacity_quantile(rep, 0.96) == rep.quantiles[0.95]
    assert capsim.capacity_quantile(rep, 0.985) == rep.quantiles[0.99]
    with pytest.raises(UnavailableError):
        capsim.capacity_quantile(rep, 0.3)


def test_quantiles_nondecreasing():
    rep = capsim.simulate_demand(model((40.0, TABLE_SPECS["pooled_gev"])), 10_000, 6)
    qs = [capsim.capacity_quantile(rep, p) for p in np.linspace(0.01, 0.99, 50)]
    assert qs == sorted(qs)


# -- model validation and JSON ------------------------------------------------------------

def test_model_validation():
    with pytest.raises(ParameterDomainError):
        AudienceGroup("x", -1.0, DiscretePID.point(1.0))
    with pytest.raises(ParameterDomainError):
        AudienceGroup("x", 1.0, S("poisson", **{"lambda": 3.0}))
    with pytest.raises(ParameterDomainError):
        AudienceModel(())
    with pytest.raises(ParameterDomainError):
        AudienceModel((AudienceGroup("x", 1.0, DiscretePID.point(1.0)),) * 2)
    with pytest.raises(ParameterDomainError):
        DiscretePID((1.0, 2.0), (0.5, 0.6))


def test_model_json_round_trip():
    text = json.dumps({
        "shared_pid_per_channel": False,
        "groups": [
            {"channel": "culture", "lambda": 120.0,
             "pid_dist": {"family": "tlocationscale", "params": {"mu": 1644.76, "sigma": 454.92, "nu": 4.137}}},
            {"channel": "news", "lambda": 3.0, "pid_dist": {"values": [2000.0, 2500.0], "probs": [0.5, 0.5]}},
        ],
    })
    m = AudienceModel.from_dict(json.loads(text))
    assert not m.shared_pid_per_channel
    assert m.groups[0].pid_dist == TABLE_SPECS["culture_tlocationscale"]
    assert AudienceModel.from_dict(json.loads(json.dumps(m.to_dict()))) == m


def test_malformed_model():
    with pytest.raises(ParameterDomainError):
        AudienceModel.from_dict({"groups": [{"lambda": 1.0}]})


def test_report_json():
    rep = capsim.simulate_demand(model((4.0, DiscretePID.point(10.0))), 100, 0, [0.99, 0.5])
    data = json.loads(json.dumps(rep.to_dict()))
    assert data["quantiles"] == [[0.5, rep.quantiles[0.5]], [0.99, rep.quantiles[0.99]]]
    assert data["seed"] == 0 and data["trials"] == 100
