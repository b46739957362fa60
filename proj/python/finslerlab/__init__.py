"""Curvature and classification of spherically symmetric Finsler metrics.

F(x, y) = |y| phi(|x|, <x, y>/|y|).  Profiles come from the built-in catalog
(:func:`entry`) or from a family config (:func:`family`).
"""

import json

from ._core import (
    FinslerError,
    Profile,
    curvature,
    entry,
    geodesic,
    grid,
    spray,
)
from . import _core

__all__ = [
    "FinslerError",
    "Profile",
    "catalog",
    "classify",
    "curvature",
    "entry",
    "family",
    "geodesic",
    "grid",
    "spray",
]


def catalog():
    """Entry descriptors as a list of dicts."""
    return json.loads(_core._manifest_json())


def classify(profile, n_r=24, n_s=24, r_min=None, r_max=None, tolerances=None):
    """Classification report (schema 1) as a dict."""
    return json.loads(_core._classify_json(profile, n_r, n_s, r_min, r_max, tolerances))


def family(config):
    """Profile built from a family config given as a dict or a JSON path."""
    if isinstance(config, dict):
        text = json.dumps(config)
    else:
        with open(config) as f:
            text = f.read()
    return _core._family_profile(text)
