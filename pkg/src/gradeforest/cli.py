"""Command-line pipeline: synth, ingest, split, train, evaluate, importance.

Every command is non-interactive, takes explicit seeds for anything
random (there is no silent clock seeding), and writes a manifest JSON
recording the argument vector and every effective parameter value, so a
run can be repeated identically from its manifest alone. Reruns with the
same arguments and inputs reproduce output files byte for byte.

Exit codes: 0 success, 2 schema or configuration error, 3 degenerate
data, 4 model/task mismatch, 5 numeric failure.

A typical session, starting from nothing::

    gradeforest synth synth.cfg --out raw
    gradeforest ingest raw/records.csv --out cohort
    gradeforest split cohort/completion.csv --out split.json \\
        --ratios 0.9,0.05,0.05 --seed 11
    gradeforest train cohort/completion.csv --preset rf3 --seed 5 \\
        --split split.json --out forest.json
    gradeforest evaluate cohort/completion.csv --model forest.json \\
        --split split.json --rows test --out report
    gradeforest importance forest.json cohort/completion.csv \\
        --method permutation --seed 3 --split split.json --out imp

Config files are flat ``key = value`` text (``#`` comments); command-line
flags override file values.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
import warnings

import numpy as np

from . import __version__
from .baseline import TrainOptions, fit_logistic, fit_multinomial, load_model, save_model
from .data import Dataset, SplitIndices, stratified_split
from .errors import (
    ConfigError,
    DegenerateDataError,
    ModelTaskError,
    NumericError,
    SchemaError,
)
from .forest import (
    MajorityClassifier,
    WeightedRandomClassifier,
    evaluate,
    fit_forest,
    load_forest,
    preset,
    save_forest,
)
from .importance import (
    GINI,
    PERMUTATION,
    gini_importance,
    permutation_importance,
    top_k,
    write_boxplot_svg,
    write_report_csv,
)
from .ingest import LabelRules, build_cohort, parse_records, write_audit_jsonl
from .synth import SynthConfig, generate, write_records_csv, write_truth_csv

_MAX_REJECT_LINES = 20


# ---------------------------------------------------------------------------
# Config files and option resolution
# ---------------------------------------------------------------------------

def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse flat ``key = value`` lines; '#' starts a comment."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key.replace("-", "_")] = value
    return values


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config_text(fh.read(), source=str(path))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _parse_ratios(text: str) -> tuple[float, float, float]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise ConfigError(f"expected three comma-separated ratios, got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"unparseable ratio in {text!r}") from None


class _Options:
    """Flag > config file > default, with typed casts from config text."""

    def __init__(self, args: argparse.Namespace, config: dict):
        self.args = args
        self.config = dict(config)
        self.used_keys: set[str] = set()

    def pick(self, key: str, default, cast=str):
        self.used_keys.add(key)
        flag_value = getattr(self.args, key, None)
        if flag_value is not None:
            return flag_value
        if key in self.config:
            raw = self.config[key]
            try:
                return cast(raw)
            except (ValueError, TypeError):
                raise ConfigError(f"config key {key!r}: cannot parse {raw!r}") from None
        return default

    def warn_unused(self):
        leftover = sorted(set(self.config) - self.used_keys)
        if leftover:
            warnings.warn(f"ignoring unknown config key(s): {', '.join(leftover)}")


def _require_seed(value, what: str) -> int:
    if value is None:
        raise ConfigError(f"{what} requires an explicit --seed (or a 'seed' config entry)")
    return int(value)


# ---------------------------------------------------------------------------
# Manifests
# ---------------------------------------------------------------------------

def _write_manifest(path, command: str, argv, resolved: dict, inputs, outputs):
    """Record how a command ran. No timestamps, so reruns are byte-stable."""
    payload = {
        "tool": {"name": "gradeforest", "version": __version__},
        "command": command,
        "argv": [str(a) for a in argv],
        "resolved": _jsonable(resolved),
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    return value


def _ensure_parent(path) -> None:
    parent = os.path.dirname(str(path))
    if parent:
        os.makedirs(parent, exist_ok=True)


def _manifest_path(out_path) -> str:
    base = str(out_path)
    for suffix in (".json", ".csv", ".txt"):
        if base.endswith(suffix):
            base = base[: -len(suffix)]
            break
    return base + ".manifest.json"


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------

def _load_rows(args, data: Dataset, default_part: str):
    """Row indices to work on: a split part when --split is given, else all."""
    split_path = getattr(args, "split", None)
    part = getattr(args, "rows", None)
    if split_path is None:
        if part is not None:
            raise ConfigError("--rows needs --split")
        return np.arange(data.n_rows), None, "all"
    split = SplitIndices.load_json(split_path)
    if split.n_rows != data.n_rows:
        raise ConfigError(
            f"split file covers {split.n_rows} rows but the dataset has {data.n_rows}"
        )
    name = part if part is not None else default_part
    return split.part(name), split, name


def _load_any_model(path):
    """A model file is either forest JSON or a coefficient table."""
    try:
        with open(path, encoding="utf-8") as fh:
            head = fh.read(1)
    except FileNotFoundError:
        raise ConfigError(f"model file not found: {path}") from None
    if head == "{":
        return load_forest(path)
    return load_model(path)


def _check_model_matches(model, data: Dataset) -> None:
    names = tuple(getattr(model, "feature_names"))
    classes = tuple(getattr(model, "class_names"))
    if names != data.feature_names:
        raise ModelTaskError(
            "model feature names do not match the dataset; "
            f"model has {len(names)} feature(s), dataset has {data.n_features}"
        )
    if classes != data.class_names:
        raise ModelTaskError(
            f"model classes {classes} do not match dataset classes {data.class_names}"
        )


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _cmd_synth(args, argv) -> int:
    file_cfg = _load_config(args.config_file)
    opts = _Options(args, file_cfg)
    scenario = opts.pick("scenario", "default")
    n_students = opts.pick("n_students", 1000, int)
    seed = _require_seed(opts.pick("seed", None, int), "synth")
    dropout_rate = opts.pick("dropout_rate", 0.3, float)
    signal_strength = opts.pick("signal_strength", 2.2, float)
    opts.warn_unused()

    config = SynthConfig(
        scenario=scenario, n_students=n_students, seed=seed,
        dropout_rate=dropout_rate, signal_strength=signal_strength,
    )
    result = generate(config)

    os.makedirs(args.out, exist_ok=True)
    records_path = os.path.join(args.out, "records.csv")
    truth_path = os.path.join(args.out, "truth.csv")
    write_records_csv(result.records, records_path)
    write_truth_csv(result.truth, truth_path)
    _write_manifest(
        os.path.join(args.out, "synth.manifest.json"), "synth", argv,
        {
            "scenario": config.scenario,
            "n_students": config.n_students,
            "seed": config.seed,
            "dropout_rate": config.dropout_rate,
            "signal_strength": config.signal_strength,
            "cohort_years": list(config.cohort_years),
            "calibrated_intercept": result.intercept,
            "n_records": len(result.records),
        },
        inputs=[args.config_file] if args.config_file else [],
        outputs=[records_path, truth_path],
    )
    if n_students == 0:
        warnings.warn("n_students is 0; wrote empty record and truth files")
    print(f"wrote {len(result.records)} records for {n_students} students to {args.out}")
    return 0


def _cmd_ingest(args, argv) -> int:
    opts = _Options(args, _load_config(args.config))
    rules = LabelRules(
        pass_threshold=opts.pick("pass_threshold", 50.0, float),
        min_attempted_credits=opts.pick("min_attempted", 5.0, float),
        completion_credits=opts.pick("completion_credits", 18.0, float),
        gap_semesters=opts.pick("gap_semesters", 3, int),
        count_summer=opts.pick("count_summer", True, _parse_bool),
    )
    opts.warn_unused()

    records, rejects = parse_records(args.records)
    if rejects:
        warnings.warn(f"rejected {len(rejects)} malformed row(s)")
        for reject in rejects[:_MAX_REJECT_LINES]:
            print(f"  line {reject.line}: {reject.reason}", file=sys.stderr)
        if len(rejects) > _MAX_REJECT_LINES:
            print(f"  ... and {len(rejects) - _MAX_REJECT_LINES} more", file=sys.stderr)
    if not records:
        warnings.warn("no valid records; writing empty outputs")

    cohort = build_cohort(records, rules)
    os.makedirs(args.out, exist_ok=True)
    completion_path = os.path.join(args.out, "completion.csv")
    major_path = os.path.join(args.out, "major.csv")
    audit_path = os.path.join(args.out, "audit.jsonl")
    cohort.completion.save_csv(completion_path)
    cohort.major.save_csv(major_path)
    write_audit_jsonl(cohort.entries, audit_path)
    _write_manifest(
        os.path.join(args.out, "ingest.manifest.json"), "ingest", argv,
        {
            "rules": dataclasses.asdict(rules),
            "counts": dict(cohort.counts),
            "rejected_rows": len(rejects),
            "horizon": str(cohort.horizon) if cohort.horizon else None,
            "departments": sorted({n for n in cohort.completion.feature_names
                                   if not n.endswith(" G")}),
        },
        inputs=[args.records],
        outputs=[completion_path, major_path, audit_path],
    )
    print(cohort.summary())
    return 0


def _cmd_split(args, argv) -> int:
    opts = _Options(args, _load_config(args.config))
    ratios = opts.pick("ratios", (0.9, 0.05, 0.05), _parse_ratios)
    seed = _require_seed(opts.pick("seed", None, int), "split")
    stratify = opts.pick("stratify", True, _parse_bool)
    opts.warn_unused()

    data = Dataset.load_csv(args.dataset)
    split = stratified_split(data, ratios, seed, stratify=stratify)
    _ensure_parent(args.out)
    split.save_json(args.out)
    _write_manifest(
        _manifest_path(args.out), "split", argv,
        {
            "ratios": list(split.ratios),
            "seed": split.seed,
            "stratified": split.stratified,
            "sizes": {
                "train": len(split.train),
                "validation": len(split.validation),
                "test": len(split.test),
            },
        },
        inputs=[args.dataset],
        outputs=[args.out],
    )
    print(
        f"split {data.n_rows} rows into train={len(split.train)} "
        f"validation={len(split.validation)} test={len(split.test)}"
    )
    return 0


def _resolve_train_options(opts: _Options) -> TrainOptions:
    return TrainOptions(
        learning_rate=opts.pick("learning_rate", 0.5, float),
        max_iterations=opts.pick("max_iter", 500, int),
        gradient_tolerance=opts.pick("tolerance", 1e-6, float),
        l2_penalty=opts.pick("l2", 0.0, float),
    )


_TRAIN_KEYS = ("preset", "model", "seed", "trees", "beta", "p", "n_jobs",
               "learning_rate", "max_iter", "tolerance", "l2")


def _cmd_train(args, argv) -> int:
    opts = _Options(args, _load_config(args.config))
    # a shared config file may carry keys for the branch not taken
    opts.used_keys.update(_TRAIN_KEYS)
    preset_name = opts.pick("preset", None)
    model_name = opts.pick("model", None)
    if (preset_name is None) == (model_name is None):
        raise ConfigError("choose exactly one of --preset rf1|rf2|rf3 or "
                          "--model logit|multinomial")

    data = Dataset.load_csv(args.dataset)
    rows, _, part_name = _load_rows(args, data, default_part="train")
    if len(rows) == 0:
        raise DegenerateDataError(f"the {part_name!r} part has no rows")
    if len(np.unique(data.y[rows])) < 2:
        raise DegenerateDataError(
            "training rows contain a single class; nothing to separate"
        )

    _ensure_parent(args.out)
    if preset_name is not None:
        seed = _require_seed(opts.pick("seed", None, int), "forest training")
        config = preset(preset_name, seed=seed)
        overrides = {}
        trees = opts.pick("trees", None, int)
        if trees is not None:
            overrides["n_trees"] = trees
        beta = opts.pick("beta", None, int)
        if beta is not None:
            overrides["beta"] = beta
        p = opts.pick("p", None, int)
        if p is not None:
            if config.feature_mode != "random":
                raise ConfigError(
                    f"preset {preset_name} searches all features; --p applies to rf2/rf3"
                )
            overrides["p"] = p
        if overrides:
            config = dataclasses.replace(config, **overrides)
        n_jobs = opts.pick("n_jobs", 1, int)
        opts.warn_unused()
        forest = fit_forest(data, rows, config, n_jobs=n_jobs)
        save_forest(forest, args.out)
        resolved = {
            "kind": "forest",
            "preset": preset_name,
            "rows": part_name,
            "n_training_rows": len(rows),
            "n_jobs": n_jobs,
            "resolved_p": forest.resolved_p,
            **{f.name: getattr(config, f.name)
               for f in dataclasses.fields(config)},
        }
    else:
        if model_name not in ("logit", "multinomial"):
            raise ConfigError(f"unknown model {model_name!r}; use logit or multinomial")
        options = _resolve_train_options(opts)
        opts.warn_unused()
        if model_name == "logit":
            model = fit_logistic(data, rows, options)
        else:
            model = fit_multinomial(data, rows, options)
        save_model(model, args.out)
        resolved = {
            "kind": model_name,
            "rows": part_name,
            "n_training_rows": len(rows),
            **dataclasses.asdict(options),
        }

    _write_manifest(
        _manifest_path(args.out), "train", argv, resolved,
        inputs=[p for p in (args.dataset, args.split) if p],
        outputs=[args.out],
    )
    print(f"trained {resolved['kind']} on {len(rows)} rows -> {args.out}")
    return 0


def _cmd_evaluate(args, argv) -> int:
    opts = _Options(args, _load_config(args.config))
    opts.used_keys.add("seed")  # only consulted for --dummy weighted
    if (args.model is None) == (args.dummy is None):
        raise ConfigError("choose exactly one of --model FILE or --dummy majority|weighted")

    data = Dataset.load_csv(args.dataset)
    rows, split, part_name = _load_rows(args, data, default_part="test")
    if len(rows) == 0:
        raise DegenerateDataError(f"the {part_name!r} part has no rows")

    if args.model is not None:
        model = _load_any_model(args.model)
        _check_model_matches(model, data)
        described = args.model
        seed = None
    else:
        fit_rows = split.part("train") if split is not None else rows
        if args.dummy == "majority":
            model = MajorityClassifier(data, fit_rows)
            seed = None
        elif args.dummy == "weighted":
            seed = _require_seed(opts.pick("seed", None, int), "--dummy weighted")
            model = WeightedRandomClassifier(data, fit_rows, seed)
        else:
            raise ConfigError(f"unknown dummy {args.dummy!r}; use majority or weighted")
        described = f"dummy:{args.dummy}"
    opts.warn_unused()

    report = evaluate(model, data, rows)
    text_path = args.out + ".txt"
    csv_path = args.out + ".csv"
    _ensure_parent(text_path)
    with open(text_path, "w", encoding="utf-8") as fh:
        fh.write(report.to_text())
    _write_report_rows(report, csv_path)
    _write_manifest(
        args.out + ".manifest.json", "evaluate", argv,
        {
            "model": described,
            "rows": part_name,
            "n_rows": report.n_rows,
            "seed": seed,
            "overall_accuracy": report.overall_accuracy,
        },
        inputs=[p for p in (args.dataset, args.model, args.split) if p],
        outputs=[text_path, csv_path],
    )
    sys.stdout.write(report.to_text())
    return 0


def _write_report_rows(report, path) -> None:
    """Long-form CSV: overall, per-class accuracy, then the confusion counts."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["measure", "actual", "predicted", "value"])
        writer.writerow(["overall_accuracy", "", "", repr(report.overall_accuracy)])
        for name, acc in zip(report.class_names, report.per_class_accuracy):
            value = "" if np.isnan(acc) else repr(float(acc))
            writer.writerow(["class_accuracy", name, "", value])
        for i, actual in enumerate(report.class_names):
            for j, predicted in enumerate(report.class_names):
                writer.writerow(["confusion", actual, predicted,
                                 str(int(report.confusion[i, j]))])


def _cmd_importance(args, argv) -> int:
    opts = _Options(args, _load_config(args.config))
    opts.used_keys.add("seed")  # only consulted for the permutation method
    method = opts.pick("method", PERMUTATION)
    top = opts.pick("top", 15, int)
    repeats = opts.pick("repeats", 1, int)

    model = _load_any_model(args.model)
    if not hasattr(model, "trees"):
        raise ModelTaskError(
            "variable importance needs a tree ensemble model file"
        )
    data = Dataset.load_csv(args.dataset)
    _check_model_matches(model, data)

    if method == PERMUTATION:
        seed = _require_seed(opts.pick("seed", None, int), "permutation importance")
        rows, _, part_name = _load_rows(args, data, default_part="test")
        if len(rows) == 0:
            raise DegenerateDataError(f"the {part_name!r} part has no rows")
        opts.warn_unused()
        report = permutation_importance(model, data, rows, seed=seed, repeats=repeats)
    elif method == GINI:
        seed = None
        part_name = None
        opts.warn_unused()
        report = gini_importance(model)
    else:
        raise ConfigError(f"unknown method {method!r}; use permutation or gini")

    if top < 1:
        raise ConfigError(f"--top must be >= 1, got {top}")
    top = min(top, report.n_features)
    csv_path = args.out + ".csv"
    svg_path = args.out + ".svg"
    _ensure_parent(csv_path)
    write_report_csv(report, csv_path, k=top)
    write_boxplot_svg(report, svg_path, k=top)
    ranked = top_k(report, top)
    _write_manifest(
        args.out + ".manifest.json", "importance", argv,
        {
            "method": method,
            "top": top,
            "repeats": repeats if method == PERMUTATION else None,
            "seed": seed,
            "rows": part_name,
            "top_features": [entry.name for entry in ranked],
        },
        inputs=[p for p in (args.model, args.dataset, getattr(args, "split", None)) if p],
        outputs=[csv_path, svg_path],
    )
    width = max((len(entry.name) for entry in ranked), default=0)
    for entry in ranked:
        print(f"{entry.name:<{width}}  {entry.mean:+.6f}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gradeforest",
        description="Student-record forest pipeline: generate, ingest, "
                    "split, train, evaluate, rank variables.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic record file")
    p_synth.add_argument("config_file", nargs="?", default=None,
                         help="flat key = value config (scenario, n_students, seed, ...)")
    p_synth.add_argument("--out", required=True, help="output directory")
    p_synth.add_argument("--scenario", choices=("default", "planted", "xor"))
    p_synth.add_argument("--n-students", dest="n_students", type=int)
    p_synth.add_argument("--seed", type=int)
    p_synth.add_argument("--dropout-rate", dest="dropout_rate", type=float)
    p_synth.add_argument("--signal-strength", dest="signal_strength", type=float)
    p_synth.set_defaults(func=_cmd_synth)

    p_ingest = sub.add_parser("ingest", help="records CSV -> datasets + audit log")
    p_ingest.add_argument("records", help="raw records CSV")
    p_ingest.add_argument("--out", required=True, help="output directory")
    p_ingest.add_argument("--config")
    p_ingest.add_argument("--pass-threshold", dest="pass_threshold", type=float)
    p_ingest.add_argument("--min-attempted", dest="min_attempted", type=float)
    p_ingest.add_argument("--completion-credits", dest="completion_credits", type=float)
    p_ingest.add_argument("--gap-semesters", dest="gap_semesters", type=int)
    p_ingest.add_argument("--no-summer", dest="count_summer", action="store_false",
                          default=None,
                          help="skip summer terms when counting gap semesters")
    p_ingest.set_defaults(func=_cmd_ingest)

    p_split = sub.add_parser("split", help="draw train/validation/test indices")
    p_split.add_argument("dataset", help="dataset CSV")
    p_split.add_argument("--out", required=True, help="output split JSON")
    p_split.add_argument("--config")
    p_split.add_argument("--ratios", type=_parse_ratios,
                         help="train,validation,test fractions, e.g. 0.9,0.05,0.05")
    p_split.add_argument("--seed", type=int)
    p_split.add_argument("--no-stratify", dest="stratify", action="store_false",
                         default=None)
    p_split.set_defaults(func=_cmd_split)

    p_train = sub.add_parser("train", help="fit a forest preset or a baseline")
    p_train.add_argument("dataset", help="dataset CSV")
    p_train.add_argument("--out", required=True, help="model output file")
    p_train.add_argument("--config")
    p_train.add_argument("--preset", choices=("rf1", "rf2", "rf3"))
    p_train.add_argument("--model", choices=("logit", "multinomial"))
    p_train.add_argument("--seed", type=int)
    p_train.add_argument("--trees", type=int, help="override the tree count")
    p_train.add_argument("--beta", type=int, help="region size stop threshold")
    p_train.add_argument("--p", type=int, help="features drawn per node (rf2/rf3)")
    p_train.add_argument("--n-jobs", dest="n_jobs", type=int)
    p_train.add_argument("--learning-rate", dest="learning_rate", type=float)
    p_train.add_argument("--max-iter", dest="max_iter", type=int)
    p_train.add_argument("--l2", type=float)
    p_train.add_argument("--split", help="split JSON from the split command")
    p_train.add_argument("--rows", choices=("train", "validation", "test"))
    p_train.set_defaults(func=_cmd_train)

    p_eval = sub.add_parser("evaluate", help="accuracy report for a model file")
    p_eval.add_argument("dataset", help="dataset CSV")
    p_eval.add_argument("--out", required=True,
                        help="output prefix (.txt, .csv, .manifest.json)")
    p_eval.add_argument("--config")
    p_eval.add_argument("--model", help="forest JSON or coefficient table")
    p_eval.add_argument("--dummy", choices=("majority", "weighted"))
    p_eval.add_argument("--seed", type=int, help="for --dummy weighted")
    p_eval.add_argument("--split", help="split JSON from the split command")
    p_eval.add_argument("--rows", choices=("train", "validation", "test"))
    p_eval.set_defaults(func=_cmd_evaluate)

    p_imp = sub.add_parser("importance", help="variable importance CSV + boxplot")
    p_imp.add_argument("model", help="forest model JSON")
    p_imp.add_argument("dataset", help="dataset CSV")
    p_imp.add_argument("--out", required=True,
                       help="output prefix (.csv, .svg, .manifest.json)")
    p_imp.add_argument("--config")
    p_imp.add_argument("--method", choices=(PERMUTATION, GINI))
    p_imp.add_argument("--top", type=int)
    p_imp.add_argument("--repeats", type=int)
    p_imp.add_argument("--seed", type=int)
    p_imp.add_argument("--split", help="split JSON from the split command")
    p_imp.add_argument("--rows", choices=("train", "validation", "test"))
    p_imp.set_defaults(func=_cmd_importance)

    return parser


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, argv)
    except (SchemaError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DegenerateDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ModelTaskError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
