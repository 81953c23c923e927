"""Command-line front end.

Subcommands::

    mosci ci ratings.csv          per-condition MOS and intervals
    mosci simulate                Monte-Carlo study, metrics table and marginals
    mosci recommend ratings.csv   SOS fit and estimator recommendation
    mosci sweep --n-values 8,16   coverage/width as the subject count varies
    mosci sample                  write a ratings CSV drawn from a scenario

Exit codes: 0 success, 2 bad input or configuration, 3 degenerate
computation (e.g. an SOS fit with no usable condition).
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import os
import sys
from collections import OrderedDict
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .bootstrap import BOOT_CHANNEL, BootstrapSpec, bca_batch, resample_totals
from .estimators import BATCH, ConfidenceSpec
from .model import ALL_ESTIMATORS, EstimatorId, RatingSample, Scale
from .numerics import DomainError, RngStream, sample_categorical
from .simharness import (
    MARGINALS,
    BoxplotStats,
    EstimatorMetrics,
    MetricsReport,
    ScenarioSpec,
    aggregate,
    mean_grid,
    run_study,
    scenario_dist,
    sweep_subjects,
)
from .sos import FitError, recommend, sos_fit

SCHEMA_VERSION = 1
RATINGS_HEADER = ["condition_id", "user_id", "rating"]
EXIT_OK, EXIT_INPUT, EXIT_DEGENERATE = 0, 2, 3


class InputError(Exception):
    """Malformed input file or configuration; maps to exit code 2."""


@dataclass
class RunConfig:
    k: int = 5
    alpha: float = 0.05
    estimators: list[str] = field(default_factory=lambda: [e.value for e in ALL_ESTIMATORS])
    scenario: str = "binomial"
    n: int = 20
    m: int | None = None
    r: int = 200
    seed: int = 0
    resamples: int = 1000
    format: str = "json"
    out: str | None = None
    workers: int = 1
    n_values: list[int] = field(default_factory=list)

    def resolved(self) -> dict:
        """Settings that determine the results; excludes output and threading knobs."""
        d = asdict(self)
        for key in ("format", "out", "workers"):
            d.pop(key)
        return d


# config-file keys and CLI dests both map onto RunConfig fields
_ALIASES = {
    "scale_k": "k", "scale-k": "k", "subjects": "n", "conditions": "m", "runs": "r",
    "bootstrap_resamples": "resamples", "bootstrap-resamples": "resamples",
    "n-values": "n_values",
}


def _split_list(value) -> list[str]:
    if isinstance(value, (list, tuple)):
        return [str(v) for v in value]
    return [v.strip() for v in str(value).split(",") if v.strip()]


def _coerce(name: str, value):
    if value is None:
        return None
    try:
        if name in ("k", "n", "r", "seed", "resamples", "workers"):
            return int(value)
        if name == "m":
            return None if str(value).lower() in ("", "none", "auto") else int(value)
        if name == "alpha":
            return float(value)
        if name == "estimators":
            items = _split_list(value)
            if items == ["all"]:
                return [e.value for e in ALL_ESTIMATORS]
            return [EstimatorId.parse(v).value for v in items]
        if name == "n_values":
            return [int(v) for v in _split_list(value)]
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid value for {name}: {value!r} ({exc})") from None
    return str(value)


def load_config_file(path: str) -> dict:
    """Read ``key = value`` lines; an optional ``[run]`` section header is allowed."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text if text.lstrip().startswith("[") else "[run]\n" + text)
    except configparser.Error as exc:
        raise InputError(f"malformed config {path}: {exc}") from None
    known = {f.name for f in fields(RunConfig)}
    out = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            name = _ALIASES.get(key, key.replace("-", "_"))
            if name not in known:
                raise InputError(f"unknown config key {key!r} in {path}")
            out[name] = _coerce(name, value)
    return out


def build_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    env_seed = os.environ.get("MOSCI_SEED")
    if env_seed:
        values["seed"] = _coerce("seed", env_seed)
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = _coerce(f.name, v)
    cfg = RunConfig(**values)
    if cfg.format not in ("json", "csv"):
        raise InputError(f"unknown output format {cfg.format!r}")
    try:
        Scale(cfg.k)
        ConfidenceSpec(cfg.alpha)
        BootstrapSpec(cfg.resamples)
    except DomainError as exc:
        raise InputError(str(exc)) from None
    if not cfg.estimators:
        raise InputError("no estimators selected")
    if cfg.workers < 1:
        raise InputError("workers must be >= 1")
    return cfg


def read_ratings(path: str, scale: Scale) -> "OrderedDict[str, RatingSample]":
    """Parse a ``condition_id,user_id,rating`` CSV into per-condition samples."""
    try:
        handle = open(path, newline="")
    except OSError as exc:
        raise InputError(f"cannot read ratings {path}: {exc}") from None
    ratings: OrderedDict[str, list[int]] = OrderedDict()
    with handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != RATINGS_HEADER:
            raise InputError(f"{path}:1: expected header {','.join(RATINGS_HEADER)}")
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 3:
                raise InputError(f"{path}:{line}: expected 3 fields, got {len(row)}")
            cond, _user, raw = (cell.strip() for cell in row)
            if not cond:
                raise InputError(f"{path}:{line}: empty condition_id")
            try:
                rating = int(raw)
            except ValueError:
                raise InputError(f"{path}:{line}: rating {raw!r} is not an integer") from None
            if not 1 <= rating <= scale.k:
                raise InputError(f"{path}:{line}: rating {rating} outside 1..{scale.k}")
            ratings.setdefault(cond, []).append(rating)
    if not ratings:
        raise InputError(f"{path}: no ratings")
    return OrderedDict((c, RatingSample.from_ratings(r, scale)) for c, r in ratings.items())


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _emit(text: str, cfg: RunConfig):
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(rows: list[list], header: list[str], comments: list[str] = ()) -> str:
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _envelope(command: str, cfg: RunConfig) -> dict:
    return {"schema": f"mosci.{command}/{SCHEMA_VERSION}", "config": cfg.resolved()}


def cmd_ci(path: str, cfg: RunConfig) -> dict:
    scale = Scale(cfg.k)
    samples = read_ratings(path, scale)
    ests = [EstimatorId.parse(e) for e in cfg.estimators]
    boot = BootstrapSpec(cfg.resamples, ConfidenceSpec(cfg.alpha))
    conditions = []
    for x, (cond, sample) in enumerate(samples.items()):
        counts = np.asarray(sample.counts)[None, :]
        entry = {"condition_id": cond, "n": sample.n, "mos": float(counts[0] @ scale.scores / sample.n),
                 "intervals": {}}
        for est in ests:
            try:
                if est is EstimatorId.BOOT:
                    if sample.n < 2:
                        raise DomainError("bootstrap intervals need n >= 2")
                    gen = RngStream(cfg.seed, x, 0).generator(BOOT_CHANNEL)
                    reps = resample_totals(sample.counts, boot.resamples, gen) / sample.n
                    lo, hi, _, _ = bca_batch(counts, reps[None, :], cfg.alpha)
                else:
                    lo, hi = BATCH[est](counts, cfg.alpha)
            except DomainError as exc:
                entry["intervals"][est.value] = {"error": str(exc)}
                continue
            lo, hi = float(lo[0]), float(hi[0])
            entry["intervals"][est.value] = {
                "lower": lo, "upper": hi, "width": hi - lo, "outlier": bool(lo < 1 or hi > scale.k),
            }
        conditions.append(entry)
    return {**_envelope("ci", cfg), "conditions": conditions}


def _ci_csv(report: dict) -> str:
    rows = []
    for cond in report["conditions"]:
        for est, iv in cond["intervals"].items():
            if "error" in iv:
                rows.append([cond["condition_id"], cond["n"], cond["mos"], est, "", "", "", "", iv["error"]])
            else:
                rows.append([cond["condition_id"], cond["n"], cond["mos"], est, iv["lower"], iv["upper"],
                             iv["width"], int(iv["outlier"]), ""])
    return _csv_text(rows, ["condition_id", "n", "mos", "estimator", "lower", "upper", "width", "outlier", "error"],
                     [f"schema: {report['schema']}", f"config: {json.dumps(report['config'], sort_keys=True)}"])


def _scenario(cfg: RunConfig) -> ScenarioSpec:
    try:
        return ScenarioSpec(cfg.scenario, Scale(cfg.k), cfg.n, cfg.m, cfg.r, cfg.seed)
    except (DomainError, ValueError) as exc:
        raise InputError(f"invalid scenario: {exc}") from None


def cmd_simulate(cfg: RunConfig) -> MetricsReport:
    spec = _scenario(cfg)
    conf = ConfidenceSpec(cfg.alpha)
    try:
        result = run_study(spec, cfg.estimators, BootstrapSpec(cfg.resamples, conf), conf, cfg.workers)
    except DomainError as exc:
        raise InputError(str(exc)) from None
    config = {**cfg.resolved(), "m": spec.m, "low": spec.low, "high": spec.high}
    return aggregate(result, config)


def metrics_to_json(report: MetricsReport) -> dict:
    metrics = {}
    for est, m in report.metrics.items():
        metrics[est.value] = {
            **m.table_row(),
            "marginals": {name: m.marginal(name).tolist() for name in MARGINALS},
            "boxplots": {name: box.as_dict() for name, box in m.boxplots.items()},
        }
    return {
        "schema": f"mosci.simulate/{SCHEMA_VERSION}",
        "config": report.config,
        "table": report.table(),
        "metrics": metrics,
    }


_BOX_FIELDS = ("median", "q1", "q3", "whisker_low", "whisker_high")


def metrics_to_csv(report: MetricsReport) -> str:
    """Long format ``estimator,metric,index,value`` holding the full report."""
    rows = []
    for est, m in report.metrics.items():
        for key, value in m.table_row().items():
            rows.append([est.value, key, "", float(value)])
        for name in MARGINALS:
            for j, value in enumerate(m.marginal(name).tolist()):
                rows.append([est.value, name, j, float(value)])
        for name, box in m.boxplots.items():
            for f in _BOX_FIELDS:
                rows.append([est.value, f"box.{name}.{f}", "", float(getattr(box, f))])
            for j, value in enumerate(box.outliers):
                rows.append([est.value, f"box.{name}.outliers", j, float(value)])
    comments = [f"schema: mosci.simulate/{SCHEMA_VERSION}", f"config: {json.dumps(report.config, sort_keys=True)}"]
    return _csv_text(rows, ["estimator", "metric", "index", "value"], comments)


def read_metrics_csv(text: str) -> MetricsReport:
    """Inverse of :func:`metrics_to_csv`."""
    config = {}
    body = []
    for line in text.splitlines():
        if line.startswith("# config: "):
            config = json.loads(line[len("# config: "):])
        elif not line.startswith("#"):
            body.append(line)
    scalars: dict = {}
    arrays: dict = {}
    for row in csv.DictReader(body):
        est = EstimatorId.parse(row["estimator"])
        value = float(row["value"])
        if row["index"] == "":
            scalars.setdefault(est, {})[row["metric"]] = value
        else:
            arrays.setdefault(est, {}).setdefault(row["metric"], []).append((int(row["index"]), value))
    metrics = {}
    for est, sc in scalars.items():
        arr = {name: [v for _, v in sorted(vals)] for name, vals in arrays.get(est, {}).items()}
        boxes = {
            name: BoxplotStats(*(sc[f"box.{name}.{f}"] for f in _BOX_FIELDS),
                               tuple(arr.get(f"box.{name}.outliers", [])))
            for name in MARGINALS
        }
        metrics[est] = EstimatorMetrics(
            coverage_x=np.array(arr["C_x"]), coverage_i=np.array(arr["C_i"]),
            outlier_x=np.array(arr["O_x"]), outlier_i=np.array(arr["O_i"]),
            width_x=np.array(arr["W_x"]), width_i=np.array(arr["W_i"]),
            coverage=sc["C"], outlier=sc["O"], width=sc["W"],
            coverage_x_min=sc["C_x_m"], coverage_i_min=sc["C_i_m"],
            coverage_x_outliers=sc["C_x_o"], coverage_i_outliers=sc["C_i_o"],
            boxplots=boxes,
        )
    return MetricsReport(config, metrics)


def format_table(report: MetricsReport) -> str:
    cols = ["C", "C_x_o", "C_x_m", "C_i_o", "C_i_m", "O", "W"]
    lines = [f"{'':8s}" + "".join(f"{c:>8s}" for c in cols)]
    for row in report.table():
        lines.append(f"{row['label']:8s}" + "".join(f"{row[c]:8.2f}" for c in cols))
    return "\n".join(lines) + "\n"


def cmd_recommend(path: str, cfg: RunConfig) -> dict:
    scale = Scale(cfg.k)
    samples = read_ratings(path, scale)
    pairs = []
    sizes = []
    for sample in samples.values():
        if sample.n < 2:
            continue
        r = sample.ratings
        pairs.append((float(r.mean()), float(r.var(ddof=1))))
        sizes.append(sample.n)
    if not pairs:
        raise FitError("no condition has at least two ratings")
    est = sos_fit(pairs, scale)
    rec = recommend(est.a, scale, int(np.median(sizes)))
    return {
        **_envelope("recommend", cfg),
        "sos": {"a": est.a, "residual": est.residual, "method": est.method,
                "conditions": len(pairs), "conditions_used": est.used},
        "recommendation": {
            "verdict": rec.verdict.value,
            "rationale": rec.rationale,
            "estimators": [e.value for e in rec.estimators],
            "conservative": [e.value for e in rec.conservative],
        },
    }


def cmd_sweep(cfg: RunConfig, n_list) -> list[dict]:
    n_list = list(n_list)
    if not n_list:
        raise InputError("sweep needs at least one subject count (--n-values)")
    if min(n_list) < 2:
        raise InputError("subject counts must be >= 2")
    spec = _scenario(cfg)
    conf = ConfidenceSpec(cfg.alpha)
    return sweep_subjects(spec, n_list, cfg.estimators, BootstrapSpec(cfg.resamples, conf), conf, cfg.workers)


def cmd_sample(cfg: RunConfig) -> str:
    """Ratings CSV drawn from a scenario: one condition per grid mean, n users each."""
    spec = _scenario(cfg)
    rows = []
    for x, mu in enumerate(mean_grid(spec)):
        probs = scenario_dist(spec, mu)
        ratings = sample_categorical(probs, RngStream(cfg.seed, x, 0), size=spec.n)
        rows += [[f"tc{x + 1:03d}", f"u{u + 1:03d}", int(v)] for u, v in enumerate(ratings)]
    return _csv_text(rows, RATINGS_HEADER)


def _add_common(p: argparse.ArgumentParser, scenario: bool = False):
    p.add_argument("--config", help="key = value file with run settings")
    p.add_argument("--scale-k", dest="k", type=int, help="number of scale points (default 5)")
    p.add_argument("--alpha", type=float, help="significance level (default 0.05)")
    p.add_argument("--estimators", help="comma list of norm,stud,simci,wald,cp,wilson,jeffreys,boot or 'all'")
    p.add_argument("--seed", type=int, help="random seed (fallback: $MOSCI_SEED, then 0)")
    p.add_argument("--bootstrap-resamples", dest="resamples", type=int, help="bootstrap resamples B (default 1000)")
    p.add_argument("--format", choices=["json", "csv"], help="report format (default json)")
    p.add_argument("--out", help="write the report here instead of stdout")
    if scenario:
        p.add_argument("--scenario", choices=["binomial", "low_variance", "uniform"])
        p.add_argument("--subjects", dest="n", type=int, help="ratings per condition n (default 20)")
        p.add_argument("--conditions", dest="m", type=int, help="test conditions m (default 101)")
        p.add_argument("--runs", dest="r", type=int, help="simulation runs r (default 200)")
        p.add_argument("--workers", type=int, help="threads for the simulation (results do not depend on it)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mosci", description="Confidence intervals for Mean Opinion Scores.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ci", help="intervals per condition of a ratings CSV")
    p.add_argument("ratings", help="CSV with header condition_id,user_id,rating")
    _add_common(p)

    p = sub.add_parser("simulate", help="Monte-Carlo coverage/outlier/width study")
    _add_common(p, scenario=True)

    p = sub.add_parser("recommend", help="SOS fit and estimator recommendation")
    p.add_argument("ratings", help="CSV with header condition_id,user_id,rating")
    _add_common(p)

    p = sub.add_parser("sweep", help="study metrics as the number of subjects varies")
    _add_common(p, scenario=True)
    p.add_argument("--n-values", dest="n_values", help="comma list of subject counts, e.g. 8,16,32")

    p = sub.add_parser("sample", help="write a ratings CSV drawn from a scenario")
    _add_common(p, scenario=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        if args.command == "ci":
            report = cmd_ci(args.ratings, cfg)
            _emit(_dump_json(report) if cfg.format == "json" else _ci_csv(report), cfg)
        elif args.command == "simulate":
            report = cmd_simulate(cfg)
            if cfg.format == "json":
                _emit(_dump_json(metrics_to_json(report)), cfg)
            else:
                _emit(metrics_to_csv(report), cfg)
            if cfg.out:
                sys.stderr.write(format_table(report))
        elif args.command == "recommend":
            _emit(_dump_json(cmd_recommend(args.ratings, cfg)), cfg)
        elif args.command == "sweep":
            rows = cmd_sweep(cfg, cfg.n_values)
            if cfg.format == "json":
                _emit(_dump_json({**_envelope("sweep", cfg), "rows": rows}), cfg)
            else:
                _emit(_csv_text([[r["estimator"], r["n"], r["C"], r["W"], r["O"]] for r in rows],
                                ["estimator", "n", "C", "W", "O"],
                                [f"schema: mosci.sweep/{SCHEMA_VERSION}",
                                 f"config: {json.dumps(cfg.resolved(), sort_keys=True)}"]), cfg)
        elif args.command == "sample":
            _emit(cmd_sample(cfg), cfg)
    except InputError as exc:
        sys.stderr.write(f"mosci: error: {exc}\n")
        return EXIT_INPUT
    except FitError as exc:
        sys.stderr.write(f"mosci: cannot fit: {exc}\n")
        return EXIT_DEGENERATE
    except DomainError as exc:
        sys.stderr.write(f"mosci: error: {exc}\n")
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
