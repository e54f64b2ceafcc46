"""Export externally trained Q-network parameters into the core container.

The parameter tree uses framework-conventional keys (a torch ``state_dict``
of the reference architecture maps directly):

    fc1.weight (64, input)   fc1.bias (64,)
    fc2.weight (64, 64)      fc2.bias (64,)
    lstm.weight_ih (256, 64) lstm.weight_hh (256, 64)
    lstm.bias_ih (256,)      lstm.bias_hh (256,)
    head.weight (20, 64)     head.bias (20,)

LSTM gate rows are ordered [input, forget, candidate, output] in both the
torch convention and the container, so the stacks concatenate column-wise
([features | hidden]) and the two bias vectors sum.
"""

from __future__ import annotations

import numpy as np

from orbitinspect.policies import DimensionMismatch, RecurrentQWeights, save_weights

__all__ = ["REQUIRED_KEYS", "weights_from_params", "export_weights"]

REQUIRED_KEYS = (
    "fc1.weight", "fc1.bias", "fc2.weight", "fc2.bias",
    "lstm.weight_ih", "lstm.weight_hh", "lstm.bias_ih", "lstm.bias_hh",
    "head.weight", "head.bias",
)


def _as_array(value) -> np.ndarray:
    # torch tensors expose detach(); plain arrays pass through.
    if hasattr(value, "detach"):
        value = value.detach().cpu().numpy()
    return np.asarray(value, dtype=np.float32)


def weights_from_params(params: dict) -> RecurrentQWeights:
    """Assemble the container tensors from a parameter tree."""
    missing = [k for k in REQUIRED_KEYS if k not in params]
    if missing:
        raise DimensionMismatch(f"parameter tree missing keys: {missing}")
    tensors = {k: _as_array(params[k]) for k in REQUIRED_KEYS}
    w_ih = tensors["lstm.weight_ih"]
    w_hh = tensors["lstm.weight_hh"]
    if w_ih.ndim != 2 or w_hh.ndim != 2 or w_ih.shape[0] != w_hh.shape[0]:
        raise DimensionMismatch(
            f"lstm stacks disagree: weight_ih {w_ih.shape}, weight_hh {w_hh.shape}")
    if w_ih.shape[0] % 4 != 0 or w_hh.shape[1] * 4 != w_hh.shape[0]:
        raise DimensionMismatch(
            f"lstm stack height {w_ih.shape[0]} is not 4x the cell size {w_hh.shape[1]}")
    return RecurrentQWeights(
        w1=tensors["fc1.weight"], b1=tensors["fc1.bias"],
        w2=tensors["fc2.weight"], b2=tensors["fc2.bias"],
        w_lstm=np.concatenate([w_ih, w_hh], axis=1),
        b_lstm=tensors["lstm.bias_ih"] + tensors["lstm.bias_hh"],
        w_head=tensors["head.weight"], b_head=tensors["head.bias"])


def export_weights(params: dict, path) -> RecurrentQWeights:
    """Validate a trained parameter tree and write the versioned container."""
    weights = weights_from_params(params)
    save_weights(weights, path)
    return weights
