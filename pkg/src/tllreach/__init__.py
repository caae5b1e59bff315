"""Reachability analysis for LTI systems with two-level lattice ReLU controllers."""

from tllreach.polytope import Box, HPolytope, LPOutcome, SolverFailure
from tllreach.tll import LTISystem, ScalarTLL, TLLController, random_problem
from tllreach.exact import ReachSet, one_step_exact, one_step_exact_bbox
from tllreach.lipgrid import one_step_grid_bbox
from tllreach.verifier import OutputBox, output_box
from tllreach.ltllbox import one_step_ltllbox, propagate, select_method

__all__ = [
    "Box",
    "HPolytope",
    "LPOutcome",
    "LTISystem",
    "OutputBox",
    "ReachSet",
    "ScalarTLL",
    "SolverFailure",
    "TLLController",
    "one_step_exact",
    "one_step_exact_bbox",
    "one_step_grid_bbox",
    "one_step_ltllbox",
    "output_box",
    "propagate",
    "random_problem",
    "select_method",
]

__version__ = "0.1.0"
