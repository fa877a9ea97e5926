"""Command-line front end.

Subcommands mirror the analysis workflow: ``fit`` (one channel), ``rank``
(per-channel census), ``hurst``, ``aggregate``, ``simulate`` and ``report``.
Tabular results go to stdout as CSV; JSON and figures go to the named files.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections import Counter
from typing import Sequence

from muxstat import capsim, hurst, mlefit, report, series
from muxstat.errors import DomainError, MuxstatError


def _families(value: str):
    if value == "all":
        return None
    return [f for f in value.split(",") if f]


def _bins(value: str):
    if value == "auto":
        return value
    try:
        return int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bins must be 'auto' or an integer, got {value!r}") from None


def _probs(value: str) -> list[float]:
    try:
        return [float(p) for p in value.split(",") if p]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad probability list {value!r}") from None


def _fmt(v: float) -> str:
    return f"{v:.10g}"


def _params(spec) -> str:
    return ";".join(f"{k}={_fmt(v)}" for k, v in spec.params.items())


def _load(args) -> series.ChannelMatrix:
    with open(args.input, "rb") as fh:
        return series.load_csv(fh, args.period_ms)


def _select_sample(args, matrix: series.ChannelMatrix):
    if getattr(args, "pooled", False):
        return series.pool_samples(matrix), "pooled"
    if getattr(args, "aggregate", False):
        return series.aggregate_sum(matrix).samples, "aggregate"
    ch = matrix.channel(args.channel)
    return ch.samples, ch.channel_id


def _write_json(path: str | None, payload, out) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if path is None or path == "-":
        out.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def cmd_fit(args, out) -> None:
    matrix = _load(args)
    samples, label = _select_sample(args, matrix)
    ranking = mlefit.rank_catalog(samples, args.families, label)
    out.write("rank,family,bic,loglik,n,converged,params\n")
    for i, e in enumerate(ranking.entries, start=1):
        out.write(f"{i},{e.spec.family.value},{_fmt(e.bic)},{_fmt(e.log_likelihood)},{e.n},"
                  f"{str(e.converged).lower()},{_params(e.spec)}\n")
    if args.json:
        _write_json(args.json, ranking.to_dict(), out)


def _top3(ranking: mlefit.FitRanking) -> list[str]:
    names = ranking.families()[:3]
    return names + [""] * (3 - len(names))


def cmd_rank(args, out) -> None:
    matrix = _load(args)
    rows = []
    for ch in matrix.channels:
        rows.append((ch.channel_id, _top3(mlefit.rank_catalog(ch.samples, args.families, ch.channel_id))))
    census_rows = list(rows)
    if args.pooled:
        rows.append(("pooled", _top3(mlefit.rank_catalog(series.pool_samples(matrix), args.families, "pooled"))))
    if args.aggregate:
        agg = series.aggregate_sum(matrix).samples
        rows.append(("aggregate", _top3(mlefit.rank_catalog(agg, args.families, "aggregate"))))
    out.write("channel,first,second,third\n")
    for label, top in rows:
        out.write(",".join([label] + top) + "\n")
    if args.counts:
        counts = [Counter(top[i] for _, top in census_rows if top[i]) for i in range(3)]
        families = sorted(set().union(*counts), key=lambda f: (-counts[0][f], -counts[1][f], -counts[2][f], f))
        with open(args.counts, "w", encoding="utf-8") as fh:
            fh.write("family,first,second,third\n")
            for f in families:
                fh.write(f"{f},{counts[0][f]},{counts[1][f]},{counts[2][f]}\n")


def cmd_hurst(args, out) -> None:
    matrix = _load(args)
    out.write("channel_id,H,q,tau_min,tau_max,r2,classification\n")
    for ch in matrix.channels:
        est = hurst.estimate_hurst(ch.samples, args.q, args.tau_min, args.tau_max)
        out.write(f"{ch.channel_id},{_fmt(est.h)},{_fmt(est.q)},{est.tau_min},{est.tau_max},"
                  f"{_fmt(est.slope_r2)},{est.classification}\n")


def cmd_aggregate(args, out) -> None:
    matrix = _load(args)
    total = series.aggregate_sum(matrix)
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write(total.to_csv())
    if args.plot:
        report.plot_series([total], args.plot, title="Multiplexer total allocation")


def cmd_simulate(args, out) -> None:
    try:
        with open(args.model, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DomainError(f"model JSON: {exc}") from None
    model = capsim.AudienceModel.from_dict(data)
    rep = capsim.simulate_demand(model, args.trials, args.seed, args.quantiles)
    payload = rep.to_dict()
    payload["expected_kbps"] = capsim.expected_demand(model)
    _write_json(args.output, payload, out)


def cmd_report(args, out) -> None:
    matrix = _load(args)
    samples, label = _select_sample(args, matrix)
    hist = series.build_histogram(samples, args.bins)
    overlays = ()
    if args.top > 0:
        ranking = mlefit.rank_catalog(samples, args.families, label)
        overlays = ranking.entries[: args.top]
    bundle = report.ReportBundle(hist, overlays, title=f"{label}: histogram and best fits")
    with open(args.svg, "wb") as fh:
        fh.write(report.render_report(bundle, args.width, args.height))
    if args.png:
        report.plot_report(bundle, args.png)
    if args.histogram_csv:
        with open(args.histogram_csv, "w", encoding="utf-8") as fh:
            fh.write(hist.to_csv())
    out.write("rank,family,bic\n")
    for i, e in enumerate(bundle.overlays, start=1):
        out.write(f"{i},{e.spec.family.value},{_fmt(e.bic)}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--period-ms", type=float, default=series.DEFAULT_PERIOD_MS,
                        help="sample period in milliseconds (default: %(default)s)")
    common.add_argument("--seed", type=int, default=0, help="random seed (default: %(default)s)")

    parser = argparse.ArgumentParser(prog="muxstat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def selection(p, required):
        group = p.add_mutually_exclusive_group(required=required)
        group.add_argument("--channel", help="channel label or 0-based index")
        group.add_argument("--pooled", action="store_true", help="all channels' samples concatenated")
        group.add_argument("--aggregate", action="store_true", help="per-instant sum over channels")

    p = sub.add_parser("fit", parents=[common], help="rank catalog fits for one channel")
    p.add_argument("--input", required=True)
    selection(p, True)
    p.add_argument("--families", type=_families, default=None, help="comma list or 'all'")
    p.add_argument("--json", help="write the FitRanking JSON here ('-' for stdout)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("rank", parents=[common], help="1st/2nd/3rd best fit per channel")
    p.add_argument("--input", required=True)
    p.add_argument("--pooled", action="store_true")
    p.add_argument("--aggregate", action="store_true")
    p.add_argument("--families", type=_families, default=None)
    p.add_argument("--counts", help="write family,first,second,third counts here")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("hurst", parents=[common], help="per-channel Hurst exponents")
    p.add_argument("--input", required=True)
    p.add_argument("--q", type=float, default=1.0)
    p.add_argument("--tau-min", type=int, default=1)
    p.add_argument("--tau-max", type=int, default=19)
    p.set_defaults(func=cmd_hurst)

    p = sub.add_parser("aggregate", parents=[common], help="sum channels per sample")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--plot", help="also draw the summed series (png/pdf/svg)")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo server demand")
    p.add_argument("--model", required=True)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--quantiles", type=_probs, default=list(capsim.DEFAULT_QUANTILES))
    p.add_argument("--output", help="write the CapacityReport JSON here (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", parents=[common], help="histogram with best-fit overlays")
    p.add_argument("--input", required=True)
    selection(p, True)
    p.add_argument("--top", type=int, default=4)
    p.add_argument("--bins", type=_bins, default="auto")
    p.add_argument("--families", type=_families, default=None)
    p.add_argument("--svg", required=True)
    p.add_argument("--png", help="also render with matplotlib (png/pdf/svg by extension)")
    p.add_argument("--histogram-csv", help="write bin_lo,bin_hi,density here")
    p.add_argument("--width", type=int, default=800)
    p.add_argument("--height", type=int, default=500)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        args.func(args, out)
    except MuxstatError as exc:
        print(f"error: {exc.category}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
