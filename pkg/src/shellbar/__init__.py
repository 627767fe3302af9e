"""Isogeometric Reissner-Mindlin plates and shells with local B-bar projection."""

from .assembly import assemble, build_dof_map, solve, stiffness_rank
from .bbar import assign_projection_spaces, element_stiffness, timoshenko_demo
from .benchmarks import get_case, run_case, run_study
from .kernels import BACKEND
from .model import ControlNet, Material, ShellModel, load_model, refine

__version__ = "0.1.0"
