"""Solver state and forcing specifications shared by both steppers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .norms import sobolev_norm
from .spectral import SpectralField, WaveGrid, solve_poisson

FORCING_KINDS = ("none", "steady_modes", "kolmogorov", "time_harmonic")


@dataclass(frozen=True)
class SolverState:
    """Vorticity/streamfunction pair at discrete time t = step * dt.

    The kinematic constraint -Lap psi = omega holds by construction: psi
    is always derived from omega, never stored independently.
    """

    omega: SpectralField
    psi: SpectralField
    t: float
    step: int

    @property
    def grid(self) -> WaveGrid:
        return self.omega.grid


def make_state(omega: SpectralField, t: float = 0.0, step: int = 0) -> SolverState:
    omega = omega.zero_mean()
    return SolverState(omega=omega, psi=solve_poisson(omega), t=t, step=step)


@dataclass(frozen=True)
class ForcingSpec:
    """External vorticity forcing, band-limited and mean-zero.

    kinds:
      none          zero forcing
      steady_modes  explicit Hermitian mode list, constant in time
      kolmogorov    amplitude * sin(k x + l y) on a single mode pair
      time_harmonic mode list modulated by cos(frequency * t)
    """

    kind: str = "none"
    modes: tuple = ()            # ((k, l, complex amplitude), ...)
    amplitude: float = 0.0       # kolmogorov
    mode: tuple = (0, 4)         # kolmogorov
    frequency: float = 0.0       # time_harmonic

    def __post_init__(self):
        if self.kind not in FORCING_KINDS:
            raise InvalidInputError(
                f"unknown forcing kind {self.kind!r}; expected one of {FORCING_KINDS}"
            )
        if self.kind == "time_harmonic" and self.frequency <= 0.0:
            raise InvalidInputError("time_harmonic forcing requires a positive frequency")
        if self.kind == "kolmogorov" and self.mode == (0, 0):
            raise InvalidInputError("kolmogorov forcing mode must be nonzero")

    @property
    def steady(self) -> bool:
        return self.kind != "time_harmonic"

    def base_field(self, grid: WaveGrid) -> SpectralField:
        """The time-independent coefficient pattern, validated on the grid."""
        if self.kind == "none":
            return SpectralField.zeros(grid)
        if self.kind == "kolmogorov":
            k, l = self.mode
            # amplitude * sin(kx + ly): coefficients -+ i a / 2 at +-(k, l)
            pattern = {(k, l): -0.5j * self.amplitude}
            return SpectralField.from_modes(grid, pattern, hermitian=True)
        fld = SpectralField.zeros(grid)
        N = grid.N
        for k, l, amp in self.modes:
            if (k, l) == (0, 0):
                raise InvalidInputError("forcing must be mean-zero; mode (0,0) is not allowed")
            if abs(k) > N or abs(l) > N:
                raise InvalidInputError(f"forcing mode ({k}, {l}) outside [-{N}, {N}]^2")
            fld.coef[k + N, l + N] += amp
            fld.coef[-k + N, -l + N] += np.conj(amp)
        return fld

    def coefficients(self, grid: WaveGrid, t: float) -> np.ndarray:
        base = self.base_field(grid).coef
        if self.kind == "time_harmonic":
            return base * np.cos(self.frequency * t)
        return base

    def sup_l2(self, grid: WaveGrid) -> float:
        """||f||_inf := sup_t ||f(t)||_2 (the cosine envelope peaks at 1)."""
        return sobolev_norm(self.base_field(grid), 0.0)
