"""Numerical laboratory for arithmetic progressions in positive-measure subsets of the unit cube."""

__version__ = "0.1.0"

from gapslab.geometry import ExperimentParams, ap_points, cube_vertices, dimension_threshold, lp_norm
from gapslab.rng import SeedStream
from gapslab.sets import (
    SetOracle,
    make_bourgain_annuli,
    make_box,
    make_box_union,
    make_empty,
    make_full,
    make_halfspace,
    make_lp_shells,
    make_thin_boxes,
)

__all__ = [
    "__version__",
    "ExperimentParams",
    "SeedStream",
    "SetOracle",
    "ap_points",
    "cube_vertices",
    "dimension_threshold",
    "lp_norm",
    "make_bourgain_annuli",
    "make_box",
    "make_box_union",
    "make_empty",
    "make_full",
    "make_halfspace",
    "make_lp_shells",
    "make_thin_boxes",
]
