"""Distributed cavity phase errors of atomic fountain clocks."""

import json

from . import _core
from ._core import (
    Config,
    DcpError,
    Feed,
    FeedNetwork,
    Field,
    build_field,
    case_equal_feeds_unequal_losses,
    case_matched_unequal,
    case_phase_imbalance,
    case_single_feed_two_losses,
    case_single_overcoupled,
    case_unequal_feeds_equal_losses,
    feed_weights,
    load_config,
    longitudinal_template,
    network_factor,
    normalize_amplitude,
    parse_config,
    phase_imbalance_scale,
    preset_network,
    template_csv,
)

__version__ = "0.1.0"


def dcp_curve(field, preset="config", method="mc", b=(), ms=(), n=-1, threads=0):
    """Ensemble averaged DCP curve as a dict (same layout as the CLI's curves.json entries)."""
    return json.loads(field.curve(preset, method, list(b), list(ms), n, threads))


def config_from_dict(doc):
    return parse_config(json.dumps(doc))
