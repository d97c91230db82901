"""JSON persistence for models and extracted strength-function sets.

Everything is plain JSON so artifacts stay inspectable with standard tools.
Floats survive the round trip exactly (shortest-repr encoding), and dumps are
key-sorted so identical state produces byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .encoding import EncodingConfig, make_config
from .fsf import FsfSet
from .learning import Model
from .neuron import make_grid

__all__ = [
    "model_to_dict",
    "model_from_dict",
    "save_model",
    "load_model",
    "fsf_to_dict",
    "fsf_from_dict",
    "save_fsf",
    "load_fsf",
    "dump_json",
]

MODEL_KIND = "spikefsf-model"
FSF_KIND = "spikefsf-fsf"


def dump_json(obj, path, indent: int | None = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(obj, f, sort_keys=True, indent=indent)
        f.write("\n")


def _enc_to_dict(cfg: EncodingConfig) -> dict:
    return {"q": cfg.q, "gamma": cfg.gamma, "T": cfg.T}


def _enc_from_dict(d: dict) -> EncodingConfig:
    return make_config(q=int(d["q"]), gamma=float(d["gamma"]), T=float(d["T"]))


def model_to_dict(model: Model) -> dict:
    return {
        "kind": MODEL_KIND,
        "format_version": 1,
        "encoding": _enc_to_dict(model.enc_cfg),
        "grid": {"t_end": model.grid.t_end, "dt": model.grid.dt},
        "tau_eps": model.tau_eps,
        "thetas": model.thetas.tolist(),
        "class_initialized": model.class_initialized.tolist(),
        "shape": list(model.weights.shape),
        "weights": model.weights.reshape(-1).tolist(),
    }


def model_from_dict(d: dict) -> Model:
    if d.get("kind") != MODEL_KIND:
        raise ValueError(f"not a model document (kind={d.get('kind')!r})")
    shape = tuple(d["shape"])
    return Model(
        weights=np.array(d["weights"], dtype=float).reshape(shape),
        thetas=np.array(d["thetas"], dtype=float),
        enc_cfg=_enc_from_dict(d["encoding"]),
        grid=make_grid(float(d["grid"]["t_end"]), float(d["grid"]["dt"])),
        tau_eps=float(d["tau_eps"]),
        class_initialized=np.array(d["class_initialized"], dtype=bool),
    )


def save_model(model: Model, path) -> None:
    dump_json(model_to_dict(model), path)


def load_model(path) -> Model:
    with open(path) as f:
        return model_from_dict(json.load(f))


def fsf_to_dict(fsf: FsfSet) -> dict:
    return {
        "kind": FSF_KIND,
        "format_version": 1,
        "t_o": fsf.t_o,
        "x_grid": {"points": len(fsf.x_grid), "lo": 0.0, "hi": 1.0},
        "thetas": fsf.thetas.tolist(),
        "source_digest": fsf.source_digest,
        "psi": [[row.tolist() for row in cls] for cls in fsf.psi],
    }


def fsf_from_dict(d: dict) -> FsfSet:
    if d.get("kind") != FSF_KIND:
        raise ValueError(f"not a strength-function document (kind={d.get('kind')!r})")
    grid = d["x_grid"]
    return FsfSet(
        t_o=float(d["t_o"]),
        x_grid=np.linspace(float(grid["lo"]), float(grid["hi"]), int(grid["points"])),
        psi=np.array(d["psi"], dtype=float),
        thetas=np.array(d["thetas"], dtype=float),
        source_digest=d.get("source_digest", ""),
    )


def save_fsf(fsf: FsfSet, path) -> None:
    dump_json(fsf_to_dict(fsf), path)


def load_fsf(path) -> FsfSet:
    with open(path) as f:
        return fsf_from_dict(json.load(f))
