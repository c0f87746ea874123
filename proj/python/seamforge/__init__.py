"""Seam-carving retargeting, forensic corpus generation and ensemble evaluation."""

import json
import os

from ._seamforge import (
    absolute_energy,
    add_awgn,
    aggregate_probs,
    assign_splits,
    backward_energy,
    cumulative_matrix,
    find_optimal_seam,
    forward_costs,
    insert_seam,
    read_image,
    remove_seam,
    retarget,
    roc_curve,
    saliency_energy,
    sample_patch_coords,
    seam_count,
    tile_geometry,
    to_grayscale,
    to_lab,
    write_image,
)
from . import _seamforge

METHODS = ("avidan", "rubinstein", "achanta", "frankovich")


def _spec_json(spec):
    spec = dict(spec)
    for key in ("source_dir", "output_dir"):
        if key in spec:
            spec[key] = os.fspath(spec[key])
    return json.dumps(spec)


def build_corpus(spec):
    """Build the corpus described by a spec dict; returns (records, skipped, manifest_path)."""
    return _seamforge._build_corpus(_spec_json(spec))


def gen_robustness_sets(spec):
    """Build the robustness sets; returns {set name: records}."""
    return _seamforge._gen_robustness_sets(_spec_json(spec))
