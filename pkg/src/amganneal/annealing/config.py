"""Annealing parameters and the geometric cooling schedule."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class AnnealConfig:
    """Knobs for the simulated-annealing coarsener.

    ``total_steps_per_dof`` is the whole-run budget per optimized point;
    ``steps_per_dof_per_sweep`` controls how finely that budget is
    interleaved across subdomains.  ``x`` and ``y`` size the moves: a
    grow step turns ``x + y`` C-points into F while returning ``y``,
    an exchange swaps ``x`` for ``x``, and a shrink mirrors grow.
    """

    theta: float
    total_steps_per_dof: int
    steps_per_dof_per_sweep: int = 1
    t_initial: float = 1.0
    t_final_fraction: float = 0.1
    x: int = 1
    y: int = 0
    seed: int = 0
    exchange_mode: str = "multiplicative"

    def __post_init__(self) -> None:
        if not self.theta > 0.5:
            raise ValueError("theta must exceed 1/2")
        if self.total_steps_per_dof < 0:
            raise ValueError("total_steps_per_dof must be nonnegative")
        if self.steps_per_dof_per_sweep < 1:
            raise ValueError("steps_per_dof_per_sweep must be at least 1")
        # A zero budget short-circuits to the prepinned-only splitting, so
        # the sweep subdivision constraint only binds when steps exist.
        if self.total_steps_per_dof and (
            self.steps_per_dof_per_sweep > self.total_steps_per_dof
        ):
            raise ValueError(
                "steps_per_dof_per_sweep cannot exceed total_steps_per_dof"
            )
        if self.x < 0 or self.y < 0 or self.x + self.y < 1:
            raise ValueError("move sizes need x, y >= 0 and x + y >= 1")
        if not self.t_initial > 0.0:
            raise ValueError("t_initial must be positive")
        if not 0.0 < self.t_final_fraction < 1.0:
            raise ValueError("t_final_fraction must lie in (0, 1)")
        if self.exchange_mode not in ("multiplicative", "additive"):
            raise ValueError(
                "exchange_mode must be 'multiplicative' or 'additive'"
            )

    @property
    def sweeps(self) -> int:
        return self.total_steps_per_dof // self.steps_per_dof_per_sweep


def temperature_schedule(config: AnnealConfig, n_total_steps: int) -> float:
    """Per-step decay factor ``alpha``.

    Chosen so that after ``n_total_steps`` multiplicative updates the
    temperature lands exactly on ``t_initial * t_final_fraction``.
    """
    if n_total_steps < 0:
        raise ValueError("step count must be nonnegative")
    if n_total_steps == 0:
        return 1.0
    return config.t_final_fraction ** (1.0 / n_total_steps)
