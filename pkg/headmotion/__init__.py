"""
headmotion - head-movement IMU pipeline for emotion and trait prediction.

An ear-worn IMU streams 6-axis samples while a participant watches five
emotion-inducing videos. This package:
- frames and decodes the device's 20-byte packets (and emulates the device)
- labels samples with the emotion being induced and reduces them to
  magnitude moments
- selects a classifier per (trait, emotion) cell by cross-validated success
  rate, plus one emotion model
- reports class-weighted metrics and predicts traits of new sessions
- generates seeded synthetic cohorts to verify all of the above

Example:
    >>> from headmotion import generate_cohort, strong_preset
    >>> cohort = generate_cohort(strong_preset(seed=7, n_participants=12))
"""

from ._version import __version__
from .errors import HeadMotionError

# Lazy attribute access (PEP 562): the learning and table modules pull in
# pandas and joblib, so a bare `import headmotion` (and `hm doctor`) stays
# cheap and works even when one of them is broken.
_LAZY = {
    "EmotionState": ("session", "EmotionState"),
    "Session": ("session", "Session"),
    "Timeline": ("session", "Timeline"),
    "parse_timeline": ("session", "parse_timeline"),
    "label_samples": ("session", "label_samples"),
    "read_session": ("session", "read_session"),
    "persist_session": ("session", "persist_session"),
    "encode_packet": ("wire", "encode_packet"),
    "decode_packet": ("wire", "decode_packet"),
    "frame_stream": ("wire", "frame_stream"),
    "FeatureVector": ("features", "FeatureVector"),
    "featurize": ("features", "featurize"),
    "Dataset": ("learn", "Dataset"),
    "select_best": ("learn", "select_best"),
    "k_fold_cv": ("learn", "k_fold_cv"),
    "DEFAULT_POOL": ("learn", "DEFAULT_POOL"),
    "weighted_metrics": ("metrics", "weighted_metrics"),
    "TraitId": ("matrix", "TraitId"),
    "train_matrix": ("matrix", "train_matrix"),
    "render_report": ("matrix", "render_report"),
    "generate_cohort": ("synth", "generate_cohort"),
    "strong_preset": ("synth", "strong_preset"),
    "null_preset": ("synth", "null_preset"),
    "DeviceEmulator": ("device", "DeviceEmulator"),
    "capture": ("device", "capture"),
}


def __getattr__(name):
    """PEP 562 lazy loader for the public API."""
    if name in _LAZY:
        import importlib

        modname, attr = _LAZY[name]
        return getattr(importlib.import_module(f".{modname}", __name__), attr)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


def __dir__():
    return sorted(list(globals()) + list(_LAZY))


__all__ = ["__version__", "HeadMotionError"] + list(_LAZY)
