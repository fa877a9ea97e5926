"""Statistical modeling of live-TV multiplexer bandwidth allocation."""

from muxstat.errors import MuxstatError
from muxstat.distcat import DistributionFamily, DistributionSpec, SupportInterval
from muxstat.mlefit import FitRanking, FitResult, bic_score, fit_mle, rank_catalog
from muxstat.series import BitrateSeries, ChannelMatrix, HistogramView
from muxstat.hurst import HurstEstimate, classify_persistence, estimate_hurst
from muxstat.capsim import (
    AudienceGroup,
    AudienceModel,
    CapacityReport,
    DiscretePID,
    capacity_quantile,
    expected_demand,
    simulate_demand,
)

__version__ = "0.1.0"

__all__ = [
    "MuxstatError",
    "DistributionFamily",
    "DistributionSpec",
    "SupportInterval",
    "FitRanking",
    "FitResult",
    "bic_score",
    "fit_mle",
    "rank_catalog",
    "BitrateSeries",
    "ChannelMatrix",
    "HistogramView",
    "HurstEstimate",
    "classify_persistence",
    "estimate_hurst",
    "AudienceGroup",
    "AudienceModel",
    "CapacityReport",
    "DiscretePID",
    "capacity_quantile",
    "expected_demand",
    "simulate_demand",
]
