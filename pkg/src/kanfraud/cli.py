"""``kanfraud`` command line: assess, tune, train, evaluate, estimate.

Exit codes: 0 success (or "KAN recommended" for assess), 10 "KAN not
recommended", 11 invalid configuration, 12 I/O error, 13 data error.

All randomness comes from ``--seed`` through :func:`config.derive_seed`, so
rerunning a command with the same inputs reproduces every artifact byte for
byte. Wall-clock timings are confined to ``<command>.manifest.json`` and
``trials.json``, which the manifest lists under ``timing_artifacts``.
"""
import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import config_digest, derive_seed, kan_config_from, kan_config_text, parse_range, read_config
from .data import (
    SplitDataset,
    Standardizer,
    balance,
    encode_numeric,
    load_csv,
    split,
    standardize_apply,
    standardize_fit,
)
from .exceptions import ConfigError, DimensionMismatchError, KanFraudError, UnreadableModelError
from .kan import kan_new, kan_predict, kan_train, load_model, save_model
from .metrics import (
    CSV_COLUMNS,
    compute_metrics,
    confusion_csv,
    confusion_heatmap,
    csv_row,
    logistic_baseline,
    render_report,
)
from .separability import DEFAULT_GRIDS, DEFAULT_THRESHOLD, quick_decision
from .tuning import (
    SearchSpace,
    estimate_search_time,
    ga_search,
    grid_search,
    heuristic_config,
    trials_csv,
    trials_json,
)

EXIT_OK = 0
EXIT_NOT_SUITABLE = 10
EXIT_CONFIG = 11
EXIT_IO = 12
EXIT_DATA = 13

MANIFEST_SUFFIX = ".manifest.json"


class _Parser(argparse.ArgumentParser):
    # usage errors are configuration errors in this tool's exit-code contract
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _default_jobs():
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def _int_list(text):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _file_sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


class Run:
    """Collects artifacts, seeds and stage timings for one command and
    writes them out as the run manifest."""

    def __init__(self, command, out_dir, settings):
        self.command = command
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.settings = settings
        self.seeds = {}
        self.artifacts = []
        self.timing_artifacts = []
        self.timings = {}

    def stage(self, name):
        run = self

        class _Timer:
            def __enter__(self):
                self.start = time.perf_counter()

            def __exit__(self, *exc):
                run.timings[name] = time.perf_counter() - self.start
                return False

        return _Timer()

    def write(self, name, text, timing=False):
        path = self.out_dir / name
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        (self.timing_artifacts if timing else self.artifacts).append(name)
        return path

    def register(self, name):
        self.artifacts.append(name)
        return self.out_dir / name

    @property
    def manifest_name(self):
        return self.command + MANIFEST_SUFFIX

    def finish(self):
        manifest = {
            "command": self.command,
            "version": __version__,
            "config_digest": config_digest(self.settings),
            "settings": self.settings,
            "seeds": self.seeds,
            "artifact_paths": sorted(self.artifacts + self.timing_artifacts + [self.manifest_name]),
            "artifact_sha256": {n: _file_sha256(self.out_dir / n) for n in sorted(self.artifacts)},
            "timing_artifacts": sorted(self.timing_artifacts + [self.manifest_name]),
            "timings": self.timings,
        }
        with open(self.out_dir / self.manifest_name, "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _input_settings(args, cfg):
    return {
        "input": os.path.abspath(args.input),
        "input_sha256": _file_sha256(args.input) if os.path.isfile(args.input) else None,
        "label_column": args.label_column or cfg.pipeline.label_column,
        "positive_label": args.positive_label or cfg.pipeline.positive_label,
        "seed": args.seed,
        "run_config": cfg.to_dict(),
    }


def _load_encoded(args, cfg):
    raw = load_csv(
        args.input,
        args.label_column or cfg.pipeline.label_column,
        args.positive_label or cfg.pipeline.positive_label,
    )
    return encode_numeric(raw)


def _prepare(args, cfg, run):
    """Load, encode, balance, split and standardise.

    Returns the scaled split and the fitted scaler; the scaler sees only the
    training rows.
    """
    encoded = _load_encoded(args, cfg)
    run.seeds["balance"] = derive_seed(args.seed, "balance")
    run.seeds["split"] = derive_seed(args.seed, "split")
    balanced, report = balance(encoded, cfg.pipeline.cap, run.seeds["balance"])
    parts = split(balanced, cfg.pipeline.fractions, run.seeds["split"])
    scaler, train = standardize_fit(parts.train)
    scaled = SplitDataset(
        train,
        standardize_apply(scaler, parts.valid),
        standardize_apply(scaler, parts.test),
        parts.split_seed,
        parts.fractions,
    )
    return scaled, scaler, report, encoded.column_names


def _base_kan(args, cfg, width, run):
    run.seeds["init"] = derive_seed(args.seed, "init")
    section = dict(cfg.kan)
    if getattr(args, "epochs", None) is not None:
        section["epochs"] = args.epochs
    if getattr(args, "threshold", None) is not None:
        section["threshold"] = args.threshold
    return kan_config_from(section, width, seed=run.seeds["init"])


def cmd_assess(args):
    cfg = read_config(args.config)
    settings = dict(_input_settings(args, cfg), grids=list(args.grids), threshold=args.threshold)
    run = Run("assess", args.out_dir, settings)
    with run.stage("load"):
        encoded = _load_encoded(args, cfg)
        run.seeds["balance"] = derive_seed(args.seed, "balance")
        balanced, balance_report = balance(encoded, cfg.pipeline.cap, run.seeds["balance"])
    run.seeds["assess"] = derive_seed(args.seed, "assess")
    with run.stage("assess"):
        result = quick_decision(balanced, args.grids, args.threshold, run.seeds["assess"], args.jobs)
    doc = result.report.to_dict()
    doc["pca_explained_ratio"] = result.pca.explained_ratio.tolist()
    doc["balance"] = balance_report.to_dict()
    run.write("verdict.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
    run.write("pca_projection.csv", result.projection_csv())
    run.write("pca_projection.svg", result.scatter_svg())
    run.finish()
    print(result.report.verdict())
    return EXIT_OK if result.report.suitable else EXIT_NOT_SUITABLE


def _space(args, cfg):
    space = cfg.search
    return SearchSpace(
        args.width2_range or space.width2,
        args.k_range or space.k,
        args.grid_range or space.grid,
    )


def cmd_tune(args):
    cfg = read_config(args.config)
    if args.mode == "heuristic":
        if args.input_dim is not None:
            dim = args.input_dim
            run = Run("tune-heuristic", args.out_dir, {"input_dim": dim})
        else:
            if args.input is None:
                raise ConfigError("heuristic tuning needs --input or --input-dim")
            run = Run("tune-heuristic", args.out_dir, _input_settings(args, cfg))
            with run.stage("load"):
                data, _, _, _ = _prepare(args, cfg, run)
            dim = data.train.n_features
        config = heuristic_config(dim)
        run.write("best_config.ini", kan_config_text(config))
        run.finish()
        print(f"width {config.width}, k {config.k}, grid {config.grid}")
        return EXIT_OK

    if args.input is None:
        raise ConfigError(f"{args.mode} tuning needs --input")
    space = _space(args, cfg)
    settings = dict(
        _input_settings(args, cfg),
        mode=args.mode,
        budget=args.budget,
        epochs=args.epochs,
        space=[list(space.width2), list(space.k), list(space.grid)],
    )
    run = Run(f"tune-{args.mode}", args.out_dir, settings)
    with run.stage("load"):
        data, _, _, _ = _prepare(args, cfg, run)
    dim = data.train.n_features
    base = _base_kan(args, cfg, [dim, 1, 1], run)
    history = None
    with run.stage("search"):
        if args.mode == "grid":
            trials = grid_search(space, data, args.budget, base, args.jobs)
        else:
            run.seeds["tune"] = derive_seed(args.seed, "tune")
            ga = replace(cfg.ga, seed=run.seeds["tune"])
            if args.population is not None:
                ga = replace(ga, population=args.population)
            if args.generations is not None:
                ga = replace(ga, generations=args.generations)
            result = ga_search(space, ga, data, base, args.jobs)
            trials, history = result.trials, result.history
    best = trials[0]
    winner = replace(base, width=best.genome.width(dim), k=best.genome.k, grid=best.genome.grid)
    run.write("trials.csv", trials_csv(trials, dim))
    if history is not None:
        run.write("ga_history.json", json.dumps([h.to_dict() for h in history], indent=2) + "\n")
    run.write("trials.json", trials_json(trials, dim, history), timing=True)
    run.write("best_config.ini", kan_config_text(winner))
    run.finish()
    print(render_report(best.metrics, hyper=(winner.width, winner.k, winner.grid)) if best.metrics
          else f"best trial failed: {best.error}")
    return EXIT_OK


def cmd_train(args):
    cfg = read_config(args.config)
    settings = dict(_input_settings(args, cfg), epochs=args.epochs, threshold=args.threshold)
    run = Run("train", args.out_dir, settings)
    with run.stage("load"):
        data, scaler, balance_report, columns = _prepare(args, cfg, run)
    dim = data.train.n_features
    default_width = heuristic_config(dim).width
    config = _base_kan(args, cfg, default_width, run)
    if config.width[0] != dim:
        raise DimensionMismatchError(f"configured width {config.width} does not fit {dim} input features")
    with run.stage("train"):
        model = kan_train(kan_new(config), data.train, data.valid)
    model.metadata.update(
        {
            "encoded_columns": columns,
            "scaler": scaler.to_dict(),
            "pipeline": {
                "label_column": settings["label_column"],
                "positive_label": settings["positive_label"],
                "cap": cfg.pipeline.cap,
                "fractions": list(cfg.pipeline.fractions),
                "seed": args.seed,
            },
            "balance": balance_report.to_dict(),
        }
    )
    model_path = Path(args.model) if args.model else run.out_dir / "model.json"
    save_model(model, model_path)
    if model_path.parent.resolve() == run.out_dir.resolve():
        run.register(model_path.name)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["epoch", "loss"])
    for epoch, loss in model.training_log:
        writer.writerow([epoch, repr(float(loss))])
    run.write("training_log.csv", buf.getvalue())
    run.finish()
    print(f"trained {config.width} k={config.k} grid={config.grid}; best validation F1 "
          f"{model.metadata['best_valid_f1']:.4f}; model written to {model_path}")
    return EXIT_OK


def cmd_evaluate(args):
    model_path = args.model or os.path.join(args.out_dir, "model.json")
    model = load_model(model_path)
    meta = model.metadata
    if "scaler" not in meta or "pipeline" not in meta:
        raise UnreadableModelError(f"{model_path} lacks the preprocessing metadata written by train")
    pipeline = meta["pipeline"]
    cfg = read_config(args.config)
    cfg.pipeline.cap = pipeline["cap"]
    cfg.pipeline.fractions = tuple(pipeline["fractions"])
    args.label_column = args.label_column or pipeline["label_column"]
    args.positive_label = args.positive_label or pipeline["positive_label"]
    if args.seed is None:
        args.seed = pipeline["seed"]
    settings = dict(_input_settings(args, cfg), model_sha256=_file_sha256(model_path), threshold=args.threshold)
    run = Run("evaluate", args.out_dir, settings)
    with run.stage("load"):
        encoded = _load_encoded(args, cfg)
        if encoded.column_names != meta["encoded_columns"]:
            raise DimensionMismatchError(
                f"input has {encoded.n_features} encoded columns {encoded.column_names[:5]}..., "
                f"model expects {len(meta['encoded_columns'])}"
            )
        run.seeds["balance"] = derive_seed(args.seed, "balance")
        run.seeds["split"] = derive_seed(args.seed, "split")
        balanced, _ = balance(encoded, cfg.pipeline.cap, run.seeds["balance"])
        parts = split(balanced, cfg.pipeline.fractions, run.seeds["split"])
        scaler = Standardizer.from_dict(meta["scaler"])
        train = standardize_apply(scaler, parts.train)
        test = standardize_apply(scaler, parts.test)
    if test.n_features != model.config.width[0]:
        raise DimensionMismatchError(
            f"model expects {model.config.width[0]} features, data provides {test.n_features}"
        )
    threshold = args.threshold if args.threshold is not None else model.config.classification_threshold
    with run.stage("score"):
        probs, _ = kan_predict(model, test.features)
        report = compute_metrics(probs, test.labels, threshold)
        run.seeds["baseline"] = derive_seed(args.seed, "baseline")
        scaled = SplitDataset(train, test, test, parts.split_seed, parts.fractions)
        baseline = logistic_baseline(scaled, threshold, run.seeds["baseline"])
    hyper = (model.config.width, model.config.k, model.config.grid)
    texts = {fmt: render_report(report, fmt, hyper=hyper) for fmt in ("text", "json", "csv")}
    run.write("report.txt", texts["text"])
    run.write("report.json", texts["json"])
    run.write("report.csv", texts["csv"])
    run.write("confusion.csv", confusion_csv(report.counts))
    run.write("confusion.svg", confusion_heatmap(report.counts, title="KAN confusion matrix (test split)"))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["Model"] + CSV_COLUMNS)
    writer.writerow(["KAN"] + csv_row(report, hyper))
    writer.writerow(["LogisticRegression"] + csv_row(baseline))
    run.write("baseline_comparison.csv", buf.getvalue())
    run.finish()
    sys.stdout.write(texts[args.format])
    return EXIT_OK


def cmd_estimate(args):
    exact = estimate_search_time(args.shortest, args.longest, args.count)
    rounded = estimate_search_time(args.shortest, args.longest, args.count, round_mean=True)
    doc = {
        "inputs": {"shortest_s": args.shortest, "longest_s": args.longest, "count": args.count},
        "exact": {"mean_s": exact.mean_s, "total_s": exact.total_s, "total_h": exact.total_h},
        "rounded": {"mean_s": rounded.mean_s, "total_s": rounded.total_s, "total_h": rounded.total_h},
    }
    if args.out_dir is not None:
        run = Run("estimate", args.out_dir, doc["inputs"])
        run.write("estimate.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
        run.finish()
    if args.format == "json":
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(f"exact:         mean {exact.mean_s:g} s, total {exact.total_s:,.0f} s = {exact.total_h:.1f} hours")
        print(f"rounded:       mean {rounded.mean_s:g} s, total {rounded.total_s:,.0f} s = {rounded.total_h:.1f} hours")
    return EXIT_OK


def _range(text):
    try:
        return parse_range(text)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser():
    parser = _Parser(prog="kanfraud", description="KAN fraud classification toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def data_flags(p, need_input=True):
        p.add_argument("--input", required=need_input, help="CSV file with a header row")
        p.add_argument("--label-column", default=None, help="label column (default Class)")
        p.add_argument("--positive-label", default=None, help="label value marking fraud (default 1)")
        p.add_argument("--config", default=None, help="versioned key/value config file")
        p.add_argument("--out-dir", default="kanfraud-out")
        p.add_argument("--jobs", type=int, default=_default_jobs())

    p = sub.add_parser("assess", help="PCA spline-separability quick decision")
    data_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.add_argument("--grids", type=_int_list, default=list(DEFAULT_GRIDS))
    p.set_defaults(func=cmd_assess)

    p = sub.add_parser("tune", help="pick (width, k, grid)")
    p.add_argument("mode", choices=["heuristic", "ga", "grid"])
    data_flags(p, need_input=False)
    p.add_argument("--input-dim", type=int, default=None, help="heuristic mode without data")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=None, help="grid mode: train only the first N genomes")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--width2-range", type=_range, default=None, metavar="LO..HI")
    p.add_argument("--k-range", type=_range, default=None, metavar="LO..HI")
    p.add_argument("--grid-range", type=_range, default=None, metavar="LO..HI")
    p.add_argument("--population", type=int, default=None)
    p.add_argument("--generations", type=int, default=None)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("train", help="train a KAN and save it")
    data_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model", default=None, help="model path (default OUT_DIR/model.json)")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--threshold", type=float, default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a saved model on the test split")
    data_flags(p)
    p.add_argument("--seed", type=int, default=None, help="default: the seed stored in the model")
    p.add_argument("--model", default=None)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--format", choices=["text", "json", "csv"], default="text")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("estimate", help="exhaustive-search time estimate")
    p.add_argument("--shortest", type=float, required=True)
    p.add_argument("--longest", type=float, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_estimate)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KanFraudError as exc:
        print(f"kanfraud: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"kanfraud: error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
