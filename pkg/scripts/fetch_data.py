#!/usr/bin/env python3
"""Materialize the benchmark datasets under data/.

Iris and Wine are written from scikit-learn's bundled copies, so they work
offline. The 9-feature Breast Cancer table and the MNIST IDX files are
downloaded from their canonical mirrors and need network access; reruns skip
anything already present.
"""

import gzip
import sys
import urllib.request
from pathlib import Path

DATA = Path(__file__).resolve().parents[1] / "data"

WBC_URL = "https://archive.ics.uci.edu/ml/machine-learning-databases/breast-cancer-wisconsin/breast-cancer-wisconsin.data"
MNIST_BASE = "https://storage.googleapis.com/cvdf-datasets/mnist/"
MNIST_FILES = [
    "train-images-idx3-ubyte.gz",
    "train-labels-idx1-ubyte.gz",
    "t10k-images-idx3-ubyte.gz",
    "t10k-labels-idx1-ubyte.gz",
]


def write_iris():
    out = DATA / "iris.csv"
    if out.exists():
        return
    from sklearn.datasets import load_iris

    iris = load_iris()
    names = ["sepal_length", "sepal_width", "petal_length", "petal_width"]
    with open(out, "w") as f:
        f.write(",".join(names) + ",species\n")
        for row, label in zip(iris.data, iris.target):
            f.write(",".join(repr(float(v)) for v in row) + f",{iris.target_names[label]}\n")
    print(f"wrote {out}")


def write_wine():
    out = DATA / "wine.csv"
    if out.exists():
        return
    from sklearn.datasets import load_wine

    wine = load_wine()
    with open(out, "w") as f:
        f.write(",".join(wine.feature_names) + ",class\n")
        for row, label in zip(wine.data, wine.target):
            f.write(",".join(repr(float(v)) for v in row) + f",c{label}\n")
    print(f"wrote {out}")


def fetch_breast_cancer():
    out = DATA / "breast_cancer.csv"
    if out.exists():
        return
    print(f"downloading {WBC_URL}")
    raw = urllib.request.urlopen(WBC_URL, timeout=60).read().decode()
    names = [
        "clump_thickness", "cell_size_uniformity", "cell_shape_uniformity",
        "marginal_adhesion", "epithelial_cell_size", "bare_nuclei",
        "bland_chromatin", "normal_nucleoli", "mitoses",
    ]
    kept = 0
    with open(out, "w") as f:
        f.write(",".join(names) + ",class\n")
        for line in raw.strip().splitlines():
            fields = line.split(",")
            if "?" in fields:
                continue  # the standard protocol drops rows with missing values
            f.write(",".join(fields[1:10]) + f",c{fields[10]}\n")
            kept += 1
    print(f"wrote {out} ({kept} rows)")


def fetch_mnist():
    out_dir = DATA / "mnist"
    out_dir.mkdir(parents=True, exist_ok=True)
    for name in MNIST_FILES:
        target = out_dir / name[:-3]
        if target.exists():
            continue
        url = MNIST_BASE + name
        print(f"downloading {url}")
        payload = urllib.request.urlopen(url, timeout=120).read()
        target.write_bytes(gzip.decompress(payload))
        print(f"wrote {target}")


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    write_iris()
    write_wine()
    failures = []
    for fetch in (fetch_breast_cancer, fetch_mnist):
        try:
            fetch()
        except Exception as e:  # offline boxes: keep going, report at the end
            failures.append(f"{fetch.__name__}: {e}")
    if failures:
        print("\nsome downloads failed (offline?):", file=sys.stderr)
        for f in failures:
            print(f"  {f}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
