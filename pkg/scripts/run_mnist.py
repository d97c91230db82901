#!/usr/bin/env python3
"""Desk-scale MNIST run: subset training, strength-function gap report.

Trains on a deterministic subset of the MNIST training split and evaluates
both classifiers on a held-out subset of the test split. Defaults match the
acceptance protocol (5000 train / 1000 test); pass sizes to override.

Usage: python scripts/run_mnist.py [n_train n_test]
"""

import sys
import time
from pathlib import Path

import numpy as np

from spikefsf.cli import load_run_config
from spikefsf.data import Dataset, load_idx
from spikefsf.fsf import classify_dataset, default_candidates, extract_fsf, select_t_o
from spikefsf.learning import encode_all, evaluate_time_domain, train

ROOT = Path(__file__).resolve().parents[1]
MNIST = ROOT / "data" / "mnist"


def subset(ds: Dataset, count: int, seed: int) -> Dataset:
    rng = np.random.default_rng(seed)
    idx = rng.permutation(len(ds))[:count]
    return Dataset(ds.features[idx], ds.labels[idx], ds.n)


def main(argv):
    n_train = int(argv[0]) if argv else 5000
    n_test = int(argv[1]) if len(argv) > 1 else 1000
    needed = [
        MNIST / "train-images-idx3-ubyte",
        MNIST / "train-labels-idx1-ubyte",
        MNIST / "t10k-images-idx3-ubyte",
        MNIST / "t10k-labels-idx1-ubyte",
    ]
    if not all(p.exists() for p in needed):
        print("MNIST files missing under data/mnist; run scripts/fetch_data.py", file=sys.stderr)
        return 2

    cfg = load_run_config(ROOT / "configs" / "mnist.json", {})
    tr = subset(load_idx(needed[0], needed[1]), n_train, cfg.seed)
    te = subset(load_idx(needed[2], needed[3]), n_test, cfg.seed + 1)
    enc = cfg.encoding_config()

    t0 = time.time()
    result = train(tr, cfg.learning_config(), enc)
    model = result.model
    print(f"trained {cfg.epochs} epochs in {time.time() - t0:.0f}s; "
          f"best train acc {max(result.train_accuracy):.4f} (epoch {result.best_epoch})")

    a_te, _ = evaluate_time_domain(model, encode_all(te.features, enc), te.labels)
    t_sel = select_t_o(model, tr.features, tr.labels, default_candidates(cfg.T + cfg.delta_T, cfg.t_o_step))
    fsf = extract_fsf(model, t_sel)
    f_te = float(np.mean(classify_dataset(te.features, fsf) == te.labels))
    print(f"test accuracy: classifier {a_te:.4f} | strength functions {f_te:.4f} "
          f"(t_o {t_sel:.2f}) | gap {abs(a_te - f_te) * 100:.2f} points")
    print(f"total {time.time() - t0:.0f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
