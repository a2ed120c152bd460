"""Brain-aware replacement augmentation and soft supervised contrastive loss."""

import json

from ._barkit import (
    Atlas,
    BarkitError,
    bar_augment,
    bar_replace,
    boundary_ratio,
    cutmix_augment,
    finite_diff_check,
    load_nifti,
    mix_labels,
    save_nifti,
    soft_supcon,
)
from . import _barkit

__all__ = [
    "Atlas",
    "BarkitError",
    "bar_augment",
    "bar_replace",
    "boundary_ratio",
    "cutmix_augment",
    "default_demo_config",
    "finite_diff_check",
    "load_nifti",
    "mix_labels",
    "run_demo",
    "save_nifti",
    "soft_supcon",
]


def default_demo_config():
    return json.loads(_barkit.default_demo_config())


def run_demo(config=None):
    """Runs the three-arm comparison. Returns (report dict, table text)."""
    text = json.dumps(default_demo_config() if config is None else config)
    report, table = _barkit.run_demo(text)
    return json.loads(report), table
