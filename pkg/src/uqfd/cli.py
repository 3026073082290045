"""Batch command-line pipeline: simulate -> predict -> score -> evaluate -> report."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path

from . import io as uqio
from .core import EnsembleOutput, UqfdError
from .evaluation import LabeledScore, auroc, detection_report, score_histograms
from .records import METRIC_FIELDS, SCORE_FIELDS, compute_score_record
from .sim import SimConfig, generate_dataset, make_ensemble, predict
from .uq_traj import DEFAULT_EPS

USAGE_EXIT = 2
DATA_EXIT = 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uqfd", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic sample set")
    p.add_argument("--config", help="run config file (JSON or key=value lines)")
    p.add_argument("--n", type=int, help="override n_samples")
    p.add_argument("--seed", type=int, help="override seed")
    p.add_argument("--ood", action="store_true", help="sample the shifted (OOD) regime")
    p.add_argument("--noise", type=float, help="override obs_noise_sigma")
    p.add_argument("--ambiguity", type=float, help="override ambiguity fraction")
    p.add_argument("--out", required=True)

    p = sub.add_parser("predict", help="run the surrogate ensemble on samples")
    p.add_argument("--samples", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("score", help="compute per-sample uncertainty scores and errors")
    p.add_argument("--samples", required=True)
    p.add_argument("--preds", required=True)
    p.add_argument("--eps", type=float, default=DEFAULT_EPS)
    p.add_argument("--out", required=True)

    p = sub.add_parser("evaluate", help="evaluate one score as a failure detector")
    p.add_argument("--scores", required=True)
    p.add_argument("--task", choices=["maneuver", "trajectory"], required=True)
    p.add_argument("--score-name", required=True)
    p.add_argument("--metric-name", help="error metric for the trajectory task")
    p.add_argument("--out", required=True, help="detection report (JSON)")
    p.add_argument("--curves-out", help="stacked cut-off curves (CSV)")
    p.add_argument("--hist-out", help="score histograms by correctness (CSV)")
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--figures-out", help="directory for rendered figures")

    p = sub.add_parser("report", help="tabulate detection reports into a summary")
    p.add_argument("--reports", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--figures-out", help="directory for rendered figures")
    return parser


def _cmd_simulate(args) -> int:
    if args.config:
        cfg = uqio.load_run_config(args.config).sim
    else:
        cfg = SimConfig()
    overrides = {}
    if args.n is not None:
        overrides["n_samples"] = args.n
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.ood:
        overrides["ood"] = True
    if args.noise is not None:
        overrides["obs_noise_sigma"] = args.noise
    if args.ambiguity is not None:
        overrides["ambiguity"] = args.ambiguity
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    uqio.write_samples(args.out, generate_dataset(cfg))
    return 0


def _cmd_predict(args) -> int:
    samples = uqio.read_samples(args.samples)
    models = make_ensemble(args.k, args.seed)
    outputs = [
        EnsembleOutput(sample_id=s.id, members=tuple(predict(m, s) for m in models))
        for s in samples
    ]
    uqio.write_predictions(args.out, outputs)
    return 0


def _cmd_score(args) -> int:
    samples = {s.id: s for s in uqio.read_samples(args.samples)}
    preds = uqio.read_predictions(args.preds)
    records = []
    for ensemble in preds:
        sample = samples.get(ensemble.sample_id)
        if sample is None:
            raise uqio.SchemaViolationError(f"prediction for unknown sample {ensemble.sample_id!r}")
        records.append(compute_score_record(sample, ensemble, args.eps))
    uqio.write_scores(args.out, records)
    return 0


def _evaluate_items(records, task, score_name, metric_name):
    items = []
    for rec in records:
        score = getattr(rec, score_name)
        if score is None:
            raise uqio.SchemaViolationError(
                f"score {score_name!r} is undefined for sample {rec.sample_id}"
            )
        if task == "maneuver":
            target = float(rec.is_misclassified)
        else:
            target = getattr(rec, metric_name)
        items.append(LabeledScore(sample_id=rec.sample_id, score=float(score), target=target))
    return items


def _cmd_evaluate(args, parser) -> int:
    valid_scores = set(SCORE_FIELDS) | set(METRIC_FIELDS)
    if args.score_name not in valid_scores:
        parser.error(f"unknown --score-name {args.score_name!r}")
    if args.task == "trajectory":
        if not args.metric_name:
            parser.error("--metric-name is required for the trajectory task")
        if args.metric_name not in METRIC_FIELDS:
            parser.error(f"unknown --metric-name {args.metric_name!r}")
        metric_name = args.metric_name
        kind = "error-down"
    else:
        metric_name = "accuracy"
        kind = "accuracy-up"
    records = uqio.read_scores(args.scores)
    items = _evaluate_items(records, args.task, args.score_name, metric_name)
    if args.task == "maneuver":
        curve_items = [
            LabeledScore(it.sample_id, it.score, 1.0 - it.target) for it in items
        ]
        report, curve, optimal, random = detection_report(curve_items, kind)
        # AUROC uses the failure flag directly; the curve uses correctness
        report = dataclasses.replace(report, auroc=auroc(items))
    else:
        report, curve, optimal, random = detection_report(items, kind)

    payload = {
        "task": args.task,
        "score_name": args.score_name,
        "metric_name": metric_name,
        **dataclasses.asdict(report),
    }
    Path(args.out).write_text(json.dumps(payload, indent=2) + "\n")

    curves = {"uncertainty": curve, "optimal": optimal, "random": random}
    if args.curves_out:
        with open(args.curves_out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["q", "value", "curve"])
            for name, c in curves.items():
                for q, v in c.points:
                    writer.writerow([repr(q), repr(v), name])
    hists = None
    if args.task == "maneuver" and (args.hist_out or args.figures_out):
        hists = score_histograms(items, args.bins)
    if args.hist_out and hists is not None:
        with open(args.hist_out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["bin_lo", "bin_hi", "count", "class"])
            for cls, hist in hists.items():
                for lo, hi, count in zip(hist.edges[:-1], hist.edges[1:], hist.counts):
                    writer.writerow([repr(float(lo)), repr(float(hi)), int(count), cls])
    if args.figures_out:
        from . import plots

        fig_dir = Path(args.figures_out)
        fig_dir.mkdir(parents=True, exist_ok=True)
        title = f"{args.score_name} vs {metric_name}"
        plots.render_cutoff_curves(curves, title, fig_dir / f"cutoff_{args.score_name}_{metric_name}.png")
        if hists is not None:
            plots.render_histograms(hists, title, fig_dir / f"hist_{args.score_name}.png")
    return 0


_SUMMARY_COLUMNS = (
    "task",
    "score_name",
    "metric_name",
    "n",
    "auroc",
    "aucoc_uncertainty",
    "aucoc_optimal",
    "aucoc_random",
    "ir",
)


def _cmd_report(args) -> int:
    rows = []
    for path in args.reports:
        try:
            rows.append(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise uqio.ParseError(path, 1, f"bad report file: {exc}") from exc
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_SUMMARY_COLUMNS)
        for row in rows:
            writer.writerow(["" if row.get(c) is None else row.get(c) for c in _SUMMARY_COLUMNS])
    if args.figures_out:
        from . import plots

        fig_dir = Path(args.figures_out)
        fig_dir.mkdir(parents=True, exist_ok=True)
        plots.render_summary(rows, fig_dir / "summary_ir.png")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "predict":
            return _cmd_predict(args)
        if args.command == "score":
            return _cmd_score(args)
        if args.command == "evaluate":
            return _cmd_evaluate(args, parser)
        if args.command == "report":
            return _cmd_report(args)
        parser.error(f"unknown command {args.command!r}")
    except (UqfdError, OSError) as exc:
        print(f"uqfd: error: {exc}", file=sys.stderr)
        return DATA_EXIT
    return USAGE_EXIT


if __name__ == "__main__":
    sys.exit(main())
