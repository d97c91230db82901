"""Command-line pipeline: train, extract, explain, eval.

Every command takes a JSON config (flags override config keys), echoes the
fully resolved config next to its outputs, and is deterministic for a fixed
(config, seed). Exit codes: 0 success, 1 usage/config error, 2 data error,
3 numeric guard tripped.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import serialize
from .data import DataError, Dataset, load_csv, load_idx, normalize_minmax, random_folds
from .encoding import make_config
from .fsf import classify_dataset, classify_fsf, default_candidates, extract_fsf, heatmap, select_t_o
from .learning import LearningConfig, encode_all, evaluate_time_domain, train

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


class NumericGuardError(Exception):
    pass


@dataclass
class RunConfig:
    """Everything one experiment needs, resolvable from JSON + flags."""

    # encoding
    q: int = 6
    gamma: float = 0.7
    T: float = 3.0
    # learning
    lam: float = 1.0
    t_d: float = 2.0
    t_m: float = 0.05
    sigma: float = 0.5
    sigma_init: float | None = None
    tau_stdp: float = 3.0
    epochs: int = 100
    seed: int = 42
    delta_T: float = 1.0
    dt: float = 0.01
    tau_eps: float = 3.0
    update_eps_at_desired: bool = False
    pull_only_when_late: bool = False
    # data
    dataset: str | None = None
    images: str | None = None
    labels: str | None = None
    label_column: str = "label"
    normalize: bool = True
    # protocol
    folds: int = 1
    train_count: int | None = None
    test_count: int | None = None
    stratified: bool = False
    # extraction
    t_o: str | float = "auto"
    t_o_step: float = 0.05
    # output
    out: str | None = None
    notes: str = ""

    def encoding_config(self):
        return make_config(q=self.q, gamma=self.gamma, T=self.T)

    def learning_config(self) -> LearningConfig:
        return LearningConfig(
            lam=self.lam,
            t_d=self.t_d,
            t_m=self.t_m,
            sigma=self.sigma,
            sigma_init=self.sigma_init,
            tau_stdp=self.tau_stdp,
            epochs=self.epochs,
            seed=self.seed,
            delta_T=self.delta_T,
            dt=self.dt,
            tau_eps=self.tau_eps,
            update_eps_at_desired=self.update_eps_at_desired,
            pull_only_when_late=self.pull_only_when_late,
        )


def load_run_config(path: str | None, overrides: dict) -> RunConfig:
    known = set(RunConfig.__dataclass_fields__)
    merged: dict = {}
    if path is not None:
        try:
            with open(path) as f:
                merged.update(json.load(f))
        except FileNotFoundError:
            raise UsageError(f"config file not found: {path}") from None
        except json.JSONDecodeError as e:
            raise UsageError(f"config file {path} is not valid JSON: {e}") from None
    merged.update({k: v for k, v in overrides.items() if v is not None})
    problems = [f"unknown config key: {k!r}" for k in merged if k not in known]
    cfg = RunConfig(**{k: v for k, v in merged.items() if k in known})
    problems += validate_run_config(cfg)
    if problems:
        raise UsageError("; ".join(problems))
    return cfg


def validate_run_config(cfg: RunConfig) -> list[str]:
    """Collect every validation failure instead of stopping at the first."""
    problems = []
    if cfg.q < 3:
        problems.append(f"q must be >= 3, got {cfg.q}")
    if cfg.gamma <= 0:
        problems.append(f"gamma must be positive, got {cfg.gamma}")
    if cfg.T <= 0:
        problems.append(f"T must be positive, got {cfg.T}")
    for name in ("lam", "t_m", "sigma", "tau_stdp", "tau_eps", "dt"):
        if getattr(cfg, name) <= 0:
            problems.append(f"{name} must be positive, got {getattr(cfg, name)}")
    if not 0 < cfg.t_d < cfg.T + cfg.delta_T:
        problems.append(f"t_d must lie in (0, {cfg.T + cfg.delta_T}), got {cfg.t_d}")
    if cfg.epochs < 1:
        problems.append(f"epochs must be >= 1, got {cfg.epochs}")
    if cfg.folds < 1:
        problems.append(f"folds must be >= 1, got {cfg.folds}")
    if cfg.t_o != "auto":
        try:
            t_o = float(cfg.t_o)
            if not 0 < t_o <= cfg.T + cfg.delta_T:
                problems.append(f"t_o must lie in (0, {cfg.T + cfg.delta_T}], got {t_o}")
        except (TypeError, ValueError):
            problems.append(f"t_o must be a number or 'auto', got {cfg.t_o!r}")
    return problems


def load_dataset(cfg: RunConfig) -> Dataset:
    if cfg.images is not None or cfg.labels is not None:
        if cfg.images is None or cfg.labels is None:
            raise UsageError("IDX input needs both images and labels paths")
        ds = load_idx(cfg.images, cfg.labels)
    elif cfg.dataset is not None:
        ds = load_csv(cfg.dataset, cfg.label_column)
    else:
        raise UsageError("no dataset given (dataset, or images+labels)")
    if cfg.normalize:
        ds = Dataset(
            features=normalize_minmax(ds.features),
            labels=ds.labels,
            n=ds.n,
            feature_names=ds.feature_names,
        )
    return ds


def _check_finite(model) -> None:
    if not (np.isfinite(model.weights).all() and np.isfinite(model.thetas).all()):
        raise NumericGuardError("model contains non-finite values")


def _echo_config(cfg: RunConfig, out: Path) -> None:
    serialize.dump_json(asdict(cfg), out / "resolved_config.json", indent=2)


def _confusion(preds: np.ndarray, labels: np.ndarray, n: int) -> list[list[int]]:
    mat = np.zeros((n, n), dtype=int)
    for p, t in zip(preds, labels):
        mat[t, p] += 1
    return mat.tolist()


def cmd_train(cfg: RunConfig) -> dict:
    if cfg.out is None:
        raise UsageError("train needs an output directory (--out)")
    out = Path(cfg.out)
    ds = load_dataset(cfg)
    enc = cfg.encoding_config()
    lcfg = cfg.learning_config()
    train_count = cfg.train_count if cfg.train_count is not None else len(ds) // 2
    folds = random_folds(ds, cfg.folds, train_count, cfg.seed, cfg.test_count, cfg.stratified)

    fold_metrics = []
    for f, (tr, te) in enumerate(folds):
        result = train(tr, lcfg, enc)
        model = result.model
        _check_finite(model)
        acc_tr, _ = evaluate_time_domain(model, encode_all(tr.features, enc), tr.labels)
        acc_te, _ = evaluate_time_domain(model, encode_all(te.features, enc), te.labels)
        serialize.save_model(model, out / f"model_fold{f}.json")
        with open(out / f"trace_fold{f}.csv", "w") as fh:
            fh.write("epoch,train_accuracy\n")
            for e, a in enumerate(result.train_accuracy):
                fh.write(f"{e},{a!r}\n")
        fold_metrics.append({"fold": f, "train_acc": acc_tr, "test_acc": acc_te, "best_epoch": result.best_epoch})

    trains = [m["train_acc"] for m in fold_metrics]
    tests = [m["test_acc"] for m in fold_metrics]
    metrics = {
        "folds": fold_metrics,
        "train_acc_mean": float(np.mean(trains)),
        "train_acc_std": float(np.std(trains)),
        "test_acc_mean": float(np.mean(tests)),
        "test_acc_std": float(np.std(tests)),
    }
    serialize.dump_json(metrics, out / "metrics.json", indent=2)
    _echo_config(cfg, out)
    return metrics


def cmd_extract(cfg: RunConfig, model_path: str) -> dict:
    if cfg.out is None:
        raise UsageError("extract needs an output directory (--out)")
    out = Path(cfg.out)
    try:
        model = serialize.load_model(model_path)
    except FileNotFoundError:
        raise DataError(f"model file not found: {model_path}") from None
    ds = load_dataset(cfg)
    if ds.m != model.m:
        raise DataError(f"dataset has {ds.m} features, model expects {model.m}")
    if cfg.t_o == "auto":
        t_o = select_t_o(model, ds.features, ds.labels, default_candidates(model.grid.t_end, cfg.t_o_step))
    else:
        t_o = float(cfg.t_o)
        if not 0 < t_o <= model.grid.t_end:
            raise UsageError(f"t_o must lie in (0, {model.grid.t_end}], got {t_o}")
    fsf = extract_fsf(model, t_o)
    serialize.save_fsf(fsf, out / "fsf.json")

    acc_cls, _ = evaluate_time_domain(model, encode_all(ds.features, model.enc_cfg), ds.labels)
    acc_fsf = float(np.mean(classify_dataset(ds.features, fsf) == ds.labels))
    report = {
        "t_o": t_o,
        "classifier_accuracy": acc_cls,
        "fsf_accuracy": acc_fsf,
        "gap": abs(acc_cls - acc_fsf),
        "source_digest": fsf.source_digest,
    }
    serialize.dump_json(report, out / "extract_report.json", indent=2)
    _echo_config(cfg, out)
    return report


def _write_pgm(path: Path, image: np.ndarray, limit: float) -> None:
    """P2 (ASCII) PGM with values linearly mapped from [-limit, limit]."""
    h, w = image.shape
    levels = np.clip(np.round((image + limit) / (2 * limit) * 255), 0, 255).astype(int)
    with open(path, "w") as f:
        f.write(f"P2\n{w} {h}\n255\n")
        for row in levels:
            f.write(" ".join(str(v) for v in row) + "\n")


def cmd_explain(cfg: RunConfig, fsf_path: str, sample_spec: str | None, sample_index: int | None, image_shape) -> dict:
    if cfg.out is None:
        raise UsageError("explain needs an output directory (--out)")
    out = Path(cfg.out)
    try:
        fsf = serialize.load_fsf(fsf_path)
    except FileNotFoundError:
        raise DataError(f"strength-function file not found: {fsf_path}") from None

    if sample_spec is not None:
        try:
            x = np.array([float(v) for v in sample_spec.split(",")], dtype=float)
        except ValueError:
            raise UsageError(f"could not parse sample values: {sample_spec!r}") from None
    elif sample_index is not None:
        ds = load_dataset(cfg)
        if not 0 <= sample_index < len(ds):
            raise DataError(f"sample index {sample_index} out of range [0, {len(ds)})")
        x = ds.features[sample_index]
    else:
        raise UsageError("explain needs --sample values or --sample-index")
    if x.shape != (fsf.m,):
        raise DataError(f"sample has {x.shape[0]} features, strength functions expect {fsf.m}")

    explanation = classify_fsf(x, fsf)
    doc = {
        "predicted": explanation.predicted,
        "aggregates": explanation.aggregates.tolist(),
        "per_feature": explanation.per_feature.tolist(),
    }
    serialize.dump_json(doc, out / "explanation.json", indent=2)

    if image_shape is not None:
        h, w = image_shape
        if h * w != fsf.m:
            raise DataError(f"image shape {h}x{w} incompatible with {fsf.m} features")
        for j in range(fsf.n):
            img = heatmap(explanation, (h, w), class_j=j)
            _write_pgm(out / f"class_{j}.pgm", img, limit=0.05)
            np.savetxt(out / f"class_{j}.csv", explanation.per_feature[:, j].reshape(h, w), delimiter=",")
    _echo_config(cfg, out)
    return doc


def cmd_eval(cfg: RunConfig, model_path: str | None, fsf_path: str | None) -> dict:
    if (model_path is None) == (fsf_path is None):
        raise UsageError("eval needs exactly one of --model or --fsf")
    ds = load_dataset(cfg)
    if model_path is not None:
        try:
            model = serialize.load_model(model_path)
        except FileNotFoundError:
            raise DataError(f"model file not found: {model_path}") from None
        if ds.m != model.m:
            raise DataError(f"dataset has {ds.m} features, model expects {model.m}")
        acc, preds = evaluate_time_domain(model, encode_all(ds.features, model.enc_cfg), ds.labels)
        n = model.n
        kind = "time-domain"
    else:
        try:
            fsf = serialize.load_fsf(fsf_path)
        except FileNotFoundError:
            raise DataError(f"strength-function file not found: {fsf_path}") from None
        if ds.m != fsf.m:
            raise DataError(f"dataset has {ds.m} features, strength functions expect {fsf.m}")
        preds = classify_dataset(ds.features, fsf)
        acc = float(np.mean(preds == ds.labels))
        n = fsf.n
        kind = "fsf"
    report = {
        "kind": kind,
        "accuracy": float(acc),
        "confusion": _confusion(preds, ds.labels, n),
    }
    if cfg.out is not None:
        serialize.dump_json(report, Path(cfg.out) / "eval_report.json", indent=2)
        _echo_config(cfg, Path(cfg.out))
    return report


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; we use 1 for usage
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spikefsf", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file; flags override its keys")
        p.add_argument("--dataset", help="CSV dataset path")
        p.add_argument("--images", help="IDX images path")
        p.add_argument("--labels", help="IDX labels path")
        p.add_argument("--label-column", dest="label_column", help="CSV label column name")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory")

    p = sub.add_parser("train", help="train models over random folds")
    common(p)
    p.add_argument("--folds", type=int)
    p.add_argument("--train-count", dest="train_count", type=int)
    p.add_argument("--test-count", dest="test_count", type=int)
    p.add_argument("--epochs", type=int)

    p = sub.add_parser("extract", help="extract strength functions from a trained model")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--t-o", dest="t_o", help="extraction time in ms, or 'auto'")

    p = sub.add_parser("explain", help="explain one sample from extracted strength functions")
    common(p)
    p.add_argument("--fsf", required=True)
    p.add_argument("--sample", help="comma-separated feature values in [0,1]")
    p.add_argument("--sample-index", dest="sample_index", type=int, help="row of --dataset to explain")
    p.add_argument("--image-shape", dest="image_shape", type=int, nargs=2, metavar=("H", "W"))

    p = sub.add_parser("eval", help="evaluate a model or strength functions on a dataset")
    common(p)
    p.add_argument("--model")
    p.add_argument("--fsf")
    return parser


_OVERRIDE_KEYS = (
    "dataset",
    "images",
    "labels",
    "label_column",
    "seed",
    "out",
    "folds",
    "train_count",
    "test_count",
    "epochs",
    "t_o",
)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {k: getattr(args, k) for k in _OVERRIDE_KEYS if hasattr(args, k)}
    try:
        cfg = load_run_config(args.config, overrides)
        if args.command == "train":
            report = cmd_train(cfg)
        elif args.command == "extract":
            report = cmd_extract(cfg, args.model)
        elif args.command == "explain":
            report = cmd_explain(cfg, args.fsf, args.sample, args.sample_index, args.image_shape)
        else:
            report = cmd_eval(cfg, args.model, args.fsf)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, FileNotFoundError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except NumericGuardError as e:
        print(f"numeric guard: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    print(json.dumps(report, sort_keys=True, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
