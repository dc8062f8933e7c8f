"""Discrete inner products, Sobolev norms, the advection trilinear form,
and numerical estimation of the inequality constants (Poincare, the
Jacobian product bounds, the interpolation bound).

Norm convention: homogeneous Sobolev norms on mean-zero fields,

    ||f||_{H^s} = 2pi * sqrt( sum_{(k,l) != 0} (k^2+l^2)^s |f_hat(k,l)|^2 ),

which agrees with the continuum L^2 norm on (0, 2pi)^2 at s = 0 and makes
the lowest-mode Poincare constant exactly 1.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .errors import BoundCheckError, InvalidInputError
from .spectral import (
    TWO_PI,
    PhysField,
    SpectralField,
    WaveGrid,
    _from_phys,
    _require_same_grid,
    _to_phys,
    evaluate_on_grid,
    full_product,
    good_fft_size,
    interpolate_IN,
)

WENTE_VARIANTS = ("Hminus1", "psiH2", "phiH2")

MAX_SOBOLEV_ORDER = 4.0  # extreme weights are meaningless at desk resolutions


def grid_inner_product(f: PhysField, g: PhysField) -> float:
    """h^2 * sum f_ij g_ij; equals the spectral Parseval sum for
    band-limited inputs."""
    _require_same_grid(f, g)
    h = f.grid.h
    return float(h * h * np.sum(f.vals * g.vals))


def spectral_inner_product(a: SpectralField, b: SpectralField) -> float:
    """(2pi)^2 * sum_k a_hat(k) conj(b_hat(k)); real for real fields."""
    _require_same_grid(a, b)
    return float(TWO_PI**2 * np.sum(a.coef * np.conj(b.coef)).real)


def _check_order(order: float) -> float:
    order = float(order)
    if abs(order) > MAX_SOBOLEV_ORDER:
        raise InvalidInputError(f"|order| must be <= {MAX_SOBOLEV_ORDER}, got {order}")
    return order


def sobolev_norm(s: SpectralField, order: float = 0.0) -> float:
    """Homogeneous Sobolev norm of the given real order; the (0,0) mode is
    always excluded.  Negative orders require a mean-zero field."""
    order = _check_order(order)
    grid = s.grid
    if order < 0 and abs(s.mean_coef) > 1e-12 * max(1.0, float(np.abs(s.coef).max())):
        raise InvalidInputError(
            f"negative-order norm of a non-mean-zero field (mean {s.mean_coef:.3e})"
        )
    w = _sobolev_weights(grid.N, order)
    return float(TWO_PI * np.sqrt(np.sum(w * np.abs(s.coef) ** 2)))


@functools.lru_cache(maxsize=None)
def _sobolev_weights(N: int, order: float) -> np.ndarray:
    k2 = np.arange(-N, N + 1, dtype=float) ** 2
    ksq = k2[:, None] + k2[None, :]
    ksq[N, N] = 1.0
    w = ksq**order
    w[N, N] = 0.0
    return w


def poincare_constant(grid: WaveGrid) -> float:
    """c0 with ||w||_2 <= c0 ||w||_{H^1} on mean-zero fields: the lowest
    nonzero Laplacian eigenvalue on (0, 2pi)^2 is 1, so c0 = 1 exactly."""
    return 1.0


def trilinear_b(psi: SpectralField, omega: SpectralField, phi: SpectralField) -> float:
    """b(psi, omega, phi) = (perp-grad psi . grad omega, phi)_{L^2},
    computed via dealiased products; exact for band-limited inputs."""
    _require_same_grid(psi, omega)
    _require_same_grid(psi, phi)
    from .spectral import advection_product  # local import keeps module load order simple

    adv = advection_product(psi, omega)
    return spectral_inner_product(adv, phi)


# ----------------------------------------------------------------------
# Random mean-zero fields for sup-ratio estimation.
#
# Unit-normal independent coefficients with decay weight (k^2+l^2)^{-2},
# Hermitian-symmetrized: mass sits near the low modes where the Jacobian
# inequalities are extremal, without biasing to a single mode.  Weaker
# decay spreads H^1 mass uniformly over all ~N^2 modes and the Jacobian
# ratio then self-averages toward 0 like 1/N, which would make the sup
# resolution-dependent instead of an estimate of the constant.  Each
# sample is a pure function of (seed, index) via a counter-based
# generator, so results are independent of chunking and thread
# scheduling.
# ----------------------------------------------------------------------

ENSEMBLE_DECAY = -2.0


def _sample_generator(seed: int, index: int) -> np.random.Generator:
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(index)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def random_mean_zero_field(grid: WaveGrid, seed: int, index: int, decay: float = ENSEMBLE_DECAY) -> SpectralField:
    """One draw of the estimation ensemble, normalized to unit H^1 norm."""
    n = grid.n_modes
    rng = _sample_generator(seed, index)
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    w = _sobolev_weights(grid.N, decay)
    c = 0.5 * (z + np.conj(z[::-1, ::-1])) * w
    c[grid.N, grid.N] = 0.0
    field = SpectralField(grid, c)
    h1 = sobolev_norm(field, 1.0)
    if h1 == 0.0:
        raise InvalidInputError("degenerate random field draw")
    return field * (1.0 / h1)


@dataclass(frozen=True)
class WenteEstimate:
    """Empirical sup of one Jacobian-inequality ratio over random fields."""

    variant: str
    sup_ratio: float
    n_samples: int
    N: int


@functools.lru_cache(maxsize=None)
def _product_grid_weights(M: int):
    """Sobolev weights and Hermitian double-count factors for the rfft2
    half-spectrum of an M x M grid."""
    k = np.fft.fftfreq(M, d=1.0 / M).astype(float)
    kx = k[:, None]
    ly = k[None, : M // 2 + 1]
    ksq = kx**2 + ly**2
    ksq[0, 0] = 1.0
    inv = 1.0 / ksq
    ksq[0, 0] = 0.0
    inv[0, 0] = 0.0
    fac = np.full((M, M // 2 + 1), 2.0)
    fac[:, 0] = 1.0
    if M % 2 == 0:
        fac[:, -1] = 1.0
    return ksq, inv, fac


def _jacobian_norms_batch(psi: np.ndarray, phi: np.ndarray, N: int) -> tuple[np.ndarray, np.ndarray]:
    """||J(psi, phi)||_{L^2} and ||J(psi, phi)||_{H^{-1}} for batches of
    centered coefficient arrays, with the product evaluated exactly in
    P^{2N} (no truncation)."""
    M = good_fft_size(4 * N + 1)
    k = np.arange(-N, N + 1, dtype=float)
    ik_col = (1j * k)[:, None]
    il_row = (1j * k)[None, :]
    stack = np.stack(
        [-il_row * psi, ik_col * psi, ik_col * phi, il_row * phi], axis=-3
    )
    vals = _to_phys(stack, N, M)
    u, v, gx, gy = (vals[..., i, :, :] for i in range(4))
    jac = u * gx + v * gy
    half = np.fft.rfft2(jac, axes=(-2, -1)) / (M * M)
    ksq, inv, fac = _product_grid_weights(M)
    p2 = fac * np.abs(half) ** 2
    l2 = TWO_PI * np.sqrt(np.sum(p2 * (ksq != 0), axis=(-2, -1)))
    hm1 = TWO_PI * np.sqrt(np.sum(p2 * inv, axis=(-2, -1)))
    return l2, hm1


def estimate_wente_constants(N: int, n_samples: int, rng_seed: int, chunk: int = 64) -> dict:
    """Empirical sup ratios for all three Jacobian inequalities at once.

    Hminus1: ||J||_{H^-1} / (||psi||_{H^1} ||phi||_{H^1})
    psiH2:   ||J||_{L^2}  / (||psi||_{H^2} ||phi||_{H^1})
    phiH2:   ||J||_{L^2}  / (||psi||_{H^1} ||phi||_{H^2})
    """
    if N < 4:
        raise InvalidInputError(f"N must be >= 4, got {N}")
    if n_samples < 1:
        raise InvalidInputError(f"n_samples must be >= 1, got {n_samples}")
    grid = WaveGrid(N, 2 * N + 1)
    w1 = _sobolev_weights(N, 1.0)
    w2 = _sobolev_weights(N, 2.0)
    sups = {v: 0.0 for v in WENTE_VARIANTS}
    for start in range(0, n_samples, chunk):
        count = min(chunk, n_samples - start)
        psis = np.empty((count, grid.n_modes, grid.n_modes), dtype=np.complex128)
        phis = np.empty_like(psis)
        for j in range(count):
            i = start + j
            psis[j] = random_mean_zero_field(grid, rng_seed, 2 * i).coef
            phis[j] = random_mean_zero_field(grid, rng_seed, 2 * i + 1).coef
        l2, hm1 = _jacobian_norms_batch(psis, phis, N)
        psi_h1 = TWO_PI * np.sqrt(np.sum(w1 * np.abs(psis) ** 2, axis=(-2, -1)))
        psi_h2 = TWO_PI * np.sqrt(np.sum(w2 * np.abs(psis) ** 2, axis=(-2, -1)))
        phi_h1 = TWO_PI * np.sqrt(np.sum(w1 * np.abs(phis) ** 2, axis=(-2, -1)))
        phi_h2 = TWO_PI * np.sqrt(np.sum(w2 * np.abs(phis) ** 2, axis=(-2, -1)))
        sups["Hminus1"] = max(sups["Hminus1"], float(np.max(hm1 / (psi_h1 * phi_h1))))
        sups["psiH2"] = max(sups["psiH2"], float(np.max(l2 / (psi_h2 * phi_h1))))
        sups["phiH2"] = max(sups["phiH2"], float(np.max(l2 / (psi_h1 * phi_h2))))
    return {
        v: WenteEstimate(variant=v, sup_ratio=sups[v], n_samples=n_samples, N=N)
        for v in WENTE_VARIANTS
    }


def estimate_wente_constant(variant: str, N: int, n_samples: int, rng_seed: int) -> WenteEstimate:
    """Empirical sup of one Jacobian-inequality ratio over random draws."""
    if variant not in WENTE_VARIANTS:
        raise InvalidInputError(f"unknown variant {variant!r}; expected one of {WENTE_VARIANTS}")
    return estimate_wente_constants(N, n_samples, rng_seed)[variant]


def jacobian_ratio(psi: SpectralField, phi: SpectralField, variant: str) -> float:
    """The inequality ratio for one explicit field pair (0 if psi == phi)."""
    if variant not in WENTE_VARIANTS:
        raise InvalidInputError(f"unknown variant {variant!r}; expected one of {WENTE_VARIANTS}")
    _require_same_grid(psi, phi)
    N = psi.grid.N
    l2, hm1 = _jacobian_norms_batch(psi.coef, phi.coef, N)
    if variant == "Hminus1":
        denom = sobolev_norm(psi, 1.0) * sobolev_norm(phi, 1.0)
        num = float(hm1)
    elif variant == "psiH2":
        denom = sobolev_norm(psi, 2.0) * sobolev_norm(phi, 1.0)
        num = float(l2)
    else:
        denom = sobolev_norm(psi, 1.0) * sobolev_norm(phi, 2.0)
        num = float(l2)
    if denom == 0.0:
        raise InvalidInputError("zero field passed to jacobian_ratio")
    return num / denom


_DEFAULT_WENTE_N = 32
_DEFAULT_WENTE_SAMPLES = 10_000
_DEFAULT_WENTE_SEED = 0
_WENTE_SAFETY = 1.25


@functools.lru_cache(maxsize=1)
def default_wente_constant() -> float:
    """Default C_w for the stability budget: the L^2-Jacobian sup ratio
    (psiH2 variant, the one the per-step estimates use) at N = 32 over
    10^4 samples, times a 1.25 safety factor, floored at 1 (a valid
    constant may always be raised to 1, and the budget requires C_w >= 1).
    """
    est = estimate_wente_constants(_DEFAULT_WENTE_N, _DEFAULT_WENTE_SAMPLES, _DEFAULT_WENTE_SEED)
    return max(1.0, _WENTE_SAFETY * est["psiH2"].sup_ratio)


# ----------------------------------------------------------------------
# Interpolation bound (collocation aliasing control)
# ----------------------------------------------------------------------

def random_p2n_field(N: int, seed: int, index: int) -> SpectralField:
    """Random element of P^{2N}: a product of two random P^N fields plus an
    independent random P^{2N} field, mean removed."""
    grid = WaveGrid(N, 2 * N + 1)
    a = random_mean_zero_field(grid, seed, 3 * index)
    b = random_mean_zero_field(grid, seed, 3 * index + 1)
    prod = full_product(a, b)
    extra = random_mean_zero_field(WaveGrid(2 * N, prod.grid.P), seed, 3 * index + 2)
    return (prod + extra).zero_mean()


def check_interpolation_bound(N: int, n_samples: int, k_order: int, rng_seed: int) -> float:
    """Max over random phi in P^{2N} of ||I_N phi||_{H^k} / ||phi||_{H^k},
    sampling phi on the critical (2N+1)^2 grid.  Raises if the (sqrt 2)^d
    bound (= 2 in dimension 2) is exceeded beyond roundoff.
    """
    if N < 2:
        raise InvalidInputError(f"N must be >= 2, got {N}")
    if k_order not in (0, 1):
        raise InvalidInputError(f"k_order must be 0 or 1, got {k_order}")
    P = 2 * N + 1
    target = WaveGrid(N, P)
    max_ratio = 0.0
    for i in range(n_samples):
        phi = random_p2n_field(N, rng_seed, i)
        vals = evaluate_on_grid(phi, P)
        interp = interpolate_IN(PhysField(target, vals)).zero_mean()
        ratio = sobolev_norm(interp, k_order) / sobolev_norm(phi, k_order)
        max_ratio = max(max_ratio, ratio)
    if max_ratio > 2.0 + 1e-10:
        raise BoundCheckError(
            f"interpolation bound violated: max ratio {max_ratio} > 2 (N={N}, k={k_order})"
        )
    return max_ratio
