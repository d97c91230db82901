"""Image-scale sanity run on the small-digits task.

Not one of the acceptance benchmarks; this exercises the full pipeline at
10 classes x 64 features without needing any downloaded data, so regressions
in the multi-class path show up even on offline machines.
"""

import numpy as np
import pytest

sklearn_datasets = pytest.importorskip("sklearn.datasets")

from spikefsf.data import Dataset, normalize_minmax, random_folds
from spikefsf.encoding import make_config
from spikefsf.fsf import classify_dataset, default_candidates, extract_fsf, select_t_o
from spikefsf.learning import LearningConfig, encode_all, evaluate_time_domain, train


@pytest.mark.slow
def test_digits_subset_accuracy_and_gap():
    digits = sklearn_datasets.load_digits()
    ds = Dataset(normalize_minmax(digits.data), digits.target.astype(int), 10)
    tr, te = random_folds(ds, 1, 1000, seed=42, test_count=500)[0]
    enc = make_config(5, 0.7, 3.0)
    cfg = LearningConfig(lam=1.5, sigma=0.3, sigma_init=1.0, tau_stdp=1.6, epochs=5, seed=42)
    model = train(tr, cfg, enc).model

    acc, _ = evaluate_time_domain(model, encode_all(te.features, enc), te.labels)
    t_o = select_t_o(model, tr.features, tr.labels, default_candidates(4.0, 0.1))
    fsf = extract_fsf(model, t_o)
    fsf_acc = float(np.mean(classify_dataset(te.features, fsf) == te.labels))

    assert acc >= 0.85, f"classifier accuracy {acc:.3f}"
    assert abs(acc - fsf_acc) * 100 <= 2.5, f"gap {abs(acc - fsf_acc) * 100:.2f} points"
    # extracted strengths have genuinely positive regions on [0, 1]
    assert (fsf.psi.max(axis=2) > 0).any(axis=1).all(), "every class should boost somewhere"
