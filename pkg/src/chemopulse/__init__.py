"""Traveling pulses of two chemotactic bacterial species: closed-form speed
selection, a semi-implicit solver and the experiment harness around them."""

from .analysis import (
    G_func,
    H_func,
    admissible_set,
    fit_parameters,
    lambda_pm,
    phi_star,
    sigma_single,
    sigma_two,
    wave_solution,
)
from .config import RunConfig, load_config
from .params import TABLE1, PhysicalParams
from .pde import Grid1D, simulate

__version__ = "0.1.0"

__all__ = [
    "G_func", "H_func", "Grid1D", "PhysicalParams", "RunConfig", "TABLE1",
    "admissible_set", "fit_parameters", "lambda_pm", "load_config", "phi_star",
    "sigma_single", "sigma_two", "simulate", "wave_solution",
]
