"""Differentiation engine: a reverse-mode tape over the parameters
composed with forward-mode duals over the spatial inputs."""

from .dual import Dual, input_jacobian, input_laplacian, seed_point
from .params import Group, LeafView, ParameterStore, grad_params
from .tape import Var, grad

DiffScalar = Var

__all__ = [
    "DiffScalar",
    "Dual",
    "Group",
    "LeafView",
    "ParameterStore",
    "Var",
    "grad",
    "grad_params",
    "input_jacobian",
    "input_laplacian",
    "seed_point",
]
