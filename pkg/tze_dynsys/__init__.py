"""Tensor Z-eigenpairs from the dynamical system dx/dt = Lambda(T[x]^{m-2}) - x."""
from tze_dynsys.baselines import sshopm
from tze_dynsys.eigenmaps import eig_all, parse_map_spec, select
from tze_dynsys.errors import TensorEigError
from tze_dynsys.experiments import run_bench, run_experiment
from tze_dynsys.integrator import solve
from tze_dynsys.models import EigenMapSpec, IntegratorConfig, Renorm, Selector
from tze_dynsys.srw import srw_run, srw_step
from tze_dynsys.tensor import (
    CubicTensor,
    TransitionTensor,
    apply,
    collapse,
    make_kolda_mayo,
)

__version__ = "1.0.0"

__all__ = [
    "CubicTensor",
    "EigenMapSpec",
    "IntegratorConfig",
    "Renorm",
    "Selector",
    "TensorEigError",
    "TransitionTensor",
    "apply",
    "collapse",
    "eig_all",
    "make_kolda_mayo",
    "parse_map_spec",
    "run_bench",
    "run_experiment",
    "select",
    "solve",
    "srw_run",
    "srw_step",
    "sshopm",
]
