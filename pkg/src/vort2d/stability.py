"""Explicit long-time stability budgets, per-step energy-inequality
monitors, the discrete uniform Gronwall checker, and absorbing-ball
detection.

Budget formulas (c0 = Poincare constant, Cw = Jacobian-product constant,
f_inf = sup_t ||f(t)||_2, w0 = ||omega_0||_2):

    M0^2   = w0^2 + 2 c0^4 f_inf^2 / nu^2
    rho0   = sqrt(2) c0^2 f_inf / nu
    k0     = min( nu / (4 Cw^2 M0^2), 2 c0^2 / nu )
    T0     = max(0, (8 c0^2 / nu) ln(w0 / rho0))
    M1^2   = [ (4/nu)(2 rho0^2 / r + f_inf^2/(nu lambda1)) + (2/nu) f_inf^2 r ]
             * exp(16 Cw^2 rho0^2 r / nu),     lambda1 = 1/c0^2

M1 is stored in log space: the exponential factor overflows doubles for
realistic parameters and the bound is qualitative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .norms import default_wente_constant


@dataclass(frozen=True)
class StabilityBudget:
    """The computable constants certifying a run for all time."""

    c0: float
    cw: float
    m0: float
    rho0: float
    k0: float
    t0: float
    r: float
    log_m1_sq: float
    nu: float
    f_inf: float

    def report(self) -> str:
        """Flat key=value report (the CLI `budget` output)."""
        keys = ("c0", "cw", "m0", "rho0", "k0", "t0", "r", "log_m1_sq")
        return "\n".join(f"{k}={getattr(self, k):.17g}" for k in keys)


def compute_budget(
    omega0_l2: float,
    nu: float,
    f_inf: float,
    c0: float = 1.0,
    cw: float | None = None,
    r: float | None = None,
) -> StabilityBudget:
    """Stability budget from run parameters.

    cw defaults to the empirical Jacobian-product constant (see
    norms.default_wente_constant); r defaults to the minimum admissible
    Gronwall window 8 c0^2 / nu.
    """
    if nu <= 0:
        raise InvalidInputError(f"nu must be positive, got {nu}")
    if c0 <= 0:
        raise InvalidInputError(f"c0 must be positive, got {c0}")
    if f_inf < 0:
        raise InvalidInputError(f"f_inf must be >= 0, got {f_inf}")
    if omega0_l2 < 0:
        raise InvalidInputError(f"omega0_l2 must be >= 0, got {omega0_l2}")
    if cw is None:
        cw = default_wente_constant()
    if cw < 1.0:
        raise InvalidInputError(f"Cw must be >= 1 (a valid constant can always be raised), got {cw}")
    r_min = 8.0 * c0**2 / nu
    if r is None:
        r = r_min
    elif r < r_min * (1.0 - 1e-12):
        raise InvalidInputError(f"Gronwall window r = {r} below the minimum 8 c0^2/nu = {r_min}")

    m0_sq = omega0_l2**2 + 2.0 * c0**4 * f_inf**2 / nu**2
    m0 = math.sqrt(m0_sq)
    rho0 = math.sqrt(2.0) * c0**2 * f_inf / nu
    k0 = min(nu / (4.0 * cw**2 * m0_sq), 2.0 * c0**2 / nu) if m0_sq > 0 else 2.0 * c0**2 / nu

    if rho0 == 0.0:
        # Decaying-to-zero regime: no finite absorbing time unless already at 0.
        t0 = 0.0 if omega0_l2 == 0.0 else math.inf
        log_m1_sq = -math.inf
    else:
        t0 = max(0.0, (8.0 * c0**2 / nu) * math.log(omega0_l2 / rho0)) if omega0_l2 > 0 else 0.0
        lam1 = 1.0 / c0**2
        bracket = (4.0 / nu) * (2.0 * rho0**2 / r + f_inf**2 / (nu * lam1)) + (2.0 / nu) * f_inf**2 * r
        log_m1_sq = math.log(bracket) + (16.0 * cw**2 / nu) * rho0**2 * r

    return StabilityBudget(
        c0=c0, cw=cw, m0=m0, rho0=rho0, k0=k0, t0=t0, r=r,
        log_m1_sq=log_m1_sq, nu=nu, f_inf=f_inf,
    )


@dataclass(frozen=True)
class DiagnosticsRecord:
    """Per-step norms, energies, and inequality residuals.

    The CSV schema covers the first eleven fields; diff_l2/diff_h1/fn_l2
    feed the inequality monitors and are not emitted.
    """

    step: int
    t: float
    l2: float
    h1: float
    h2: float
    energy: float
    enstrophy: float
    res_l2: float
    res_h1: float
    skew_res: float
    in_ball: bool
    diff_l2: float = 0.0
    diff_h1: float = 0.0
    fn_l2: float = 0.0


def check_step_inequality_L2(
    rec_prev: DiagnosticsRecord,
    rec_next: DiagnosticsRecord,
    dt: float,
    nu: float,
    c0: float,
    fn_l2: float,
) -> float:
    """Residual (LHS - RHS) of the per-step L^2 inequality

        ||w^{n+1}||^2 - ||w^n||^2 + 1/2 ||w^{n+1}-w^n||^2
            + (nu/2) dt ||w^{n+1}||_{H1}^2  <=  (c0^2/nu) dt ||f^n||^2,

    nonpositive (up to roundoff) whenever dt <= k0.
    """
    lhs = (
        rec_next.l2**2
        - rec_prev.l2**2
        + 0.5 * rec_next.diff_l2**2
        + 0.5 * nu * dt * rec_next.h1**2
    )
    rhs = (c0**2 / nu) * dt * fn_l2**2
    return lhs - rhs


def check_step_inequality_H1(
    rec_prev: DiagnosticsRecord,
    rec_next: DiagnosticsRecord,
    dt: float,
    nu: float,
    cw: float,
    m0: float,
    fn_l2: float,
) -> float:
    """Residual (LHS - RHS) of the per-step H^1 inequality

        (1 - (2 Cw^2/nu) ||w^n||^2 dt) ||w^{n+1}||_{H1}^2 - ||w^n||_{H1}^2
            + 1/2 ||w^{n+1}-w^n||_{H1}^2
            + (nu - 2 Cw^2 dt M0^2) dt ||Lap w^{n+1}||^2
            <=  (2/nu) dt ||f^n||^2.

    Passing m0 = ||w^n||_2 gives the sharper pre-relaxation form, which is
    what the run loop emits (it depends only on current states, so resumed
    runs reproduce it bitwise).
    """
    lhs = (
        (1.0 - (2.0 * cw**2 / nu) * rec_prev.l2**2 * dt) * rec_next.h1**2
        - rec_prev.h1**2
        + 0.5 * rec_next.diff_h1**2
        + (nu - 2.0 * cw**2 * dt * m0**2) * dt * rec_next.h2**2
    )
    rhs = (2.0 / nu) * dt * fn_l2**2
    return lhs - rhs


def residual_tolerance(norm_sq: float, tol: float = 1e-10) -> float:
    """Absolute-relative hybrid: residuals are differences of O(norm^2)
    quantities, and a pure relative test fails near zero states."""
    return tol * max(1.0, norm_sq)


# ----------------------------------------------------------------------
# Discrete uniform Gronwall lemma
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class GronwallInput:
    """Data for the discrete uniform Gronwall lemma.

    Sequences are indexed from 0; entry m stands for xi_m etc.  The lemma
    requires, for all n >= n0:

        dt * eta_{n+1} < 1/2
        (1 - dt eta_{n+1}) xi_{n+1} <= xi_n + dt zeta_{n+1}

    and windowed sums dt * sum_{n=n2}^{n2+n1+1} of eta, zeta, xi bounded
    by a1, a2, a3 for every n2 >= n0.
    """

    dt: float
    n0: int
    n1: int
    xi: np.ndarray
    eta: np.ndarray
    zeta: np.ndarray
    a1: float
    a2: float
    a3: float


@dataclass(frozen=True)
class GronwallResult:
    premise_ok: bool
    bound: float
    conclusion_ok: bool


_GRONWALL_SLACK = 1.0 + 1e-12  # tolerate roundoff in data generated to meet the premises


def uniform_gronwall_check(inp: GronwallInput) -> GronwallResult:
    """Verify the premises on the supplied data and test the conclusion

        xi_{n+1} <= (a3/(dt n1) + a2) e^{4 a1}   for all n > n0 + n1.
    """
    xi = np.asarray(inp.xi, dtype=float)
    eta = np.asarray(inp.eta, dtype=float)
    zeta = np.asarray(inp.zeta, dtype=float)
    L = min(xi.size, eta.size, zeta.size)
    needed = inp.n0 + 2 * (inp.n1 + 1)
    if inp.n0 < 0 or inp.n1 < 1:
        raise InvalidInputError(f"need n0 >= 0 and n1 >= 1, got n0={inp.n0}, n1={inp.n1}")
    if L < needed:
        raise InvalidInputError(f"sequences must cover {needed} indices, got {L}")
    if inp.dt <= 0:
        raise InvalidInputError(f"dt must be positive, got {inp.dt}")
    if np.any(xi[:L] <= 0) or np.any(eta[:L] <= 0) or np.any(zeta[:L] <= 0):
        raise InvalidInputError("sequences must be positive")

    n0, n1, dt = inp.n0, inp.n1, inp.dt
    premise_ok = bool(np.all(dt * eta[n0 + 1 : L] < 0.5))
    lhs = (1.0 - dt * eta[n0 + 1 : L]) * xi[n0 + 1 : L]
    rhs = xi[n0 : L - 1] + dt * zeta[n0 + 1 : L]
    premise_ok = premise_ok and bool(np.all(lhs <= rhs * _GRONWALL_SLACK))
    window = n1 + 2  # indices n2 .. n2+n1+1 inclusive
    for seq, budget in ((eta, inp.a1), (zeta, inp.a2), (xi, inp.a3)):
        sums = np.convolve(seq[:L], np.ones(window), mode="valid") * dt
        sums = sums[n0:]  # windows starting at n2 >= n0
        if sums.size == 0 or np.any(sums > budget * _GRONWALL_SLACK):
            premise_ok = False

    bound = (inp.a3 / (dt * n1) + inp.a2) * math.exp(4.0 * inp.a1)
    tail = xi[n0 + n1 + 2 : L]
    conclusion_ok = bool(np.all(tail <= bound * _GRONWALL_SLACK))
    return GronwallResult(premise_ok=premise_ok, bound=bound, conclusion_ok=conclusion_ok)


# ----------------------------------------------------------------------
# Absorbing ball
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class AbsorbingBallResult:
    t_entry: float | None
    stayed_in: bool


def detect_absorbing_ball(records, budget: StabilityBudget) -> AbsorbingBallResult:
    """First time ||w||_2^2 <= 2 rho0^2 and whether the trajectory stays
    inside from then on.  stayed_in is False when entry never happens."""
    threshold = 2.0 * budget.rho0**2
    t_entry = None
    stayed_in = False
    for rec in records:
        inside = rec.l2**2 <= threshold
        if t_entry is None:
            if inside:
                t_entry = rec.t
                stayed_in = True
        elif not inside:
            stayed_in = False
    return AbsorbingBallResult(t_entry=t_entry, stayed_in=stayed_in)


def check_envelope(records, budget: StabilityBudget, dt: float, omega0_l2: float) -> float:
    """Max relative violation of the discrete decay envelope

        ||w^n||^2 <= (1 + nu dt/(2 c0^2))^{-n} ||w^0||^2
                     + (2 c0^4/nu^2) f_inf^2 [1 - (1 + nu dt/(2 c0^2))^{-n}],

    which holds at every step of a run with dt <= k0.  Returns the largest
    (l2^2 - bound)/max(1, bound) over the records (negative when the
    envelope holds everywhere)."""
    alpha = 1.0 + budget.nu * dt / (2.0 * budget.c0**2)
    sat = 2.0 * budget.c0**4 * budget.f_inf**2 / budget.nu**2
    worst = -math.inf
    n0 = records[0].step if records else 0
    for rec in records:
        damp = alpha ** (-(rec.step - n0))
        bound = damp * omega0_l2**2 + sat * (1.0 - damp)
        worst = max(worst, (rec.l2**2 - bound) / max(1.0, bound))
    return worst
