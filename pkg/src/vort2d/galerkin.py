"""Semi-implicit Fourier Galerkin stepper: fully dealiased explicit
advection, implicit diffusion, one diagonal solve per step.

Update in coefficient space:

    w_hat^{n+1}(k,l) = [w_hat^n - dt * NL_hat^n + dt * f_hat^n] / (1 + nu dt (k^2+l^2))

the unique solution of the implicit equation.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericalFailureError
from .spectral import SpectralField, advection_product, solve_poisson
from .state import ForcingSpec, SolverState


def galerkin_nonlinear(state: SolverState) -> SpectralField:
    """P_N(perp-grad psi . grad omega), alias-free in every retained mode,
    mean coefficient asserted to be roundoff and zeroed."""
    return advection_product(state.psi, state.omega)


def step_galerkin(state: SolverState, f: ForcingSpec, dt: float, nu: float) -> SolverState:
    grid = state.grid
    nl = galerkin_nonlinear(state)
    f_hat = f.coefficients(grid, state.t)
    new_coef = (state.omega.coef - dt * nl.coef + dt * f_hat) / (1.0 + nu * dt * grid.ksq)
    new_coef[grid.N, grid.N] = 0.0
    if not np.isfinite(new_coef).all():
        raise NumericalFailureError(
            f"non-finite vorticity after step {state.step + 1}", step=state.step + 1
        )
    omega = SpectralField(grid, new_coef)
    return SolverState(
        omega=omega,
        psi=solve_poisson(omega),
        t=state.t + dt,
        step=state.step + 1,
    )
