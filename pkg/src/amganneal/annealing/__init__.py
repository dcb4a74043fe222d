"""Simulated-annealing C/F coarsening."""

from .config import AnnealConfig, temperature_schedule
from .driver import AnnealState, TraceSample, anneal_subdomain, backend_name, sa_coarsen
from .ops import (
    HaloView,
    accept_step,
    acceptance_probability,
    fitness,
    halo_assumptions,
    swap_fc,
)
from .rng import Pcg32

__all__ = [
    "AnnealConfig",
    "AnnealState",
    "HaloView",
    "Pcg32",
    "TraceSample",
    "accept_step",
    "acceptance_probability",
    "anneal_subdomain",
    "backend_name",
    "fitness",
    "halo_assumptions",
    "sa_coarsen",
    "swap_fc",
    "temperature_schedule",
]
