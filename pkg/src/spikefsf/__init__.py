"""Spiking classifier with time-varying synaptic weights and
feature-strength-function explanations."""

from .encoding import EncodingConfig, SpikePattern, encode, inverse_encode, make_config
from .fsf import Explanation, FsfSet, classify_fsf, extract_fsf, heatmap, sample_fsf, select_t_o
from .learning import LearningConfig, Model, TrainResult, train
from .neuron import NeuronParams, TimeGrid, fire_time, make_grid, predict_time_domain, psp, spike_response

__all__ = [
    "EncodingConfig",
    "SpikePattern",
    "encode",
    "inverse_encode",
    "make_config",
    "Explanation",
    "FsfSet",
    "classify_fsf",
    "extract_fsf",
    "heatmap",
    "sample_fsf",
    "select_t_o",
    "LearningConfig",
    "Model",
    "TrainResult",
    "train",
    "NeuronParams",
    "TimeGrid",
    "fire_time",
    "make_grid",
    "predict_time_domain",
    "psp",
    "spike_response",
]
