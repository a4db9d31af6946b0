"""Constrained Hamiltonian evolution of the 2+1 wave map into S^2."""
from . import kernels
from .grid import Grid, Parity, apply_gradient_x, apply_gradient_y, apply_laplacian
from .dynamics import SimState, EnergyReport, constraint_residual, energy, force, static_solution
from .rattle import ProjectionFailure, RattleConfig, StepReport, project_to_constraint, rattle_step

__version__ = "0.1.0"
