"""Relation extraction toolkit: Bi-LSTM encoder, convolutional features and
dependency-distance-weighted multi-factor attention, with a from-scratch
reverse-mode autodiff core."""

from relex._core import (
    __version__,
    attention_probs,
    dep_weight,
    evaluate,
    generate_corpus,
    gradcheck,
    positional_bucket,
    predict_file,
    predict_label,
    prf1,
    synth,
    token_distances,
    train,
    tune_threshold,
)

__all__ = [
    "__version__",
    "attention_probs",
    "dep_weight",
    "evaluate",
    "generate_corpus",
    "gradcheck",
    "positional_bucket",
    "predict_file",
    "predict_label",
    "prf1",
    "synth",
    "token_distances",
    "train",
    "tune_threshold",
]
