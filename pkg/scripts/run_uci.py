#!/usr/bin/env python3
"""Random-fold benchmark over the UCI presets.

For every preset whose CSV exists under data/, trains over the configured
folds, extracts strength functions with per-fold auto-selected t_o (selection
on the training half), and prints classifier vs strength-function accuracies.

Usage: python scripts/run_uci.py [preset ...]
"""

import json
import sys
import time
from pathlib import Path

import numpy as np

from spikefsf.data import Dataset, load_csv, normalize_minmax, random_folds
from spikefsf.fsf import classify_dataset, default_candidates, extract_fsf, select_t_o
from spikefsf.learning import encode_all, evaluate_time_domain, train
from spikefsf.cli import RunConfig, load_run_config

ROOT = Path(__file__).resolve().parents[1]


def run_preset(name: str) -> dict | None:
    cfg = load_run_config(ROOT / "configs" / f"{name}.json", {})
    csv_path = ROOT / cfg.dataset
    if not csv_path.exists():
        print(f"{name}: skipped ({csv_path} missing; run scripts/fetch_data.py)")
        return None
    ds = load_csv(csv_path, cfg.label_column)
    ds = Dataset(normalize_minmax(ds.features), ds.labels, ds.n, ds.feature_names)
    folds = random_folds(ds, cfg.folds, cfg.train_count, cfg.seed, cfg.test_count)
    enc = cfg.encoding_config()
    lcfg = cfg.learning_config()
    cands = default_candidates(cfg.T + cfg.delta_T, cfg.t_o_step)

    t0 = time.time()
    rows = []
    for tr, te in folds:
        result = train(tr, lcfg, enc)
        model = result.model
        a_tr, _ = evaluate_time_domain(model, encode_all(tr.features, enc), tr.labels)
        a_te, _ = evaluate_time_domain(model, encode_all(te.features, enc), te.labels)
        t_o = select_t_o(model, tr.features, tr.labels, cands)
        fsf = extract_fsf(model, t_o)
        f_tr = float(np.mean(classify_dataset(tr.features, fsf) == tr.labels))
        f_te = float(np.mean(classify_dataset(te.features, fsf) == te.labels))
        rows.append((a_tr, a_te, f_tr, f_te, t_o))
    r = np.array(rows)
    out = {
        "preset": name,
        "folds": len(folds),
        "classifier_train": round(100 * r[:, 0].mean(), 1),
        "classifier_test": round(100 * r[:, 1].mean(), 1),
        "fsf_train": round(100 * r[:, 2].mean(), 1),
        "fsf_test": round(100 * r[:, 3].mean(), 1),
        "gap_test": round(100 * abs(r[:, 1].mean() - r[:, 3].mean()), 2),
        "t_o_mean": round(float(r[:, 4].mean()), 2),
        "seconds": round(time.time() - t0, 1),
    }
    print(json.dumps(out))
    return out


def main(argv):
    names = argv or ["iris", "wine", "breast_cancer"]
    results = [run_preset(n) for n in names]
    done = [r for r in results if r]
    if done:
        print("\npreset | classifier train/test | fsf train/test | gap")
        for r in done:
            print(
                f"{r['preset']:>16} | {r['classifier_train']}/{r['classifier_test']}"
                f" | {r['fsf_train']}/{r['fsf_test']} | {r['gap_test']}"
            )
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
