"""Grids, transforms, spectral differentiation, Poisson inversion, and
exact dealiased products on the 2pi-periodic torus.

Conventions used throughout the package:

* the domain is (0, 2pi)^2 and wavenumbers are integers;
* a field with retained modes k, l in [-N, N] is stored as a complex
  (2N+1, 2N+1) array, entry [i, j] holding the coefficient of
  exp(i(k x + l y)) with k = i - N, l = j - N;
* the forward transform carries 1/P^2 so coefficients coincide with the
  analytic Fourier coefficients of band-limited fields;
* real fields have Hermitian-symmetric coefficients and, in the solver
  state, zero mean.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .errors import BoundCheckError, InvalidInputError, ResolutionError

TWO_PI = 2.0 * np.pi


def good_fft_size(n: int) -> int:
    """Smallest 5-smooth integer >= n (fast for pocketfft)."""
    m = n
    while True:
        k = m
        for p in (2, 3, 5):
            while k % p == 0:
                k //= p
        if k == 1:
            return m
        m += 1


@dataclass(frozen=True)
class WaveGrid:
    """Retained mode extent N and collocation resolution P on (0, 2pi)^2.

    P >= 2N+1 guarantees the P-point grid resolves every retained mode.
    """

    N: int
    P: int

    def __post_init__(self):
        if self.N < 1:
            raise InvalidInputError(f"N must be >= 1, got {self.N}")
        if self.P < 3:
            raise InvalidInputError(f"P must be >= 3, got {self.P}")
        if self.P < 2 * self.N + 1:
            raise ResolutionError(
                f"P = {self.P} cannot resolve modes up to N = {self.N}; need P >= {2 * self.N + 1}"
            )

    @property
    def L(self) -> float:
        return TWO_PI

    @property
    def h(self) -> float:
        """Grid spacing 2pi / P."""
        return TWO_PI / self.P

    @property
    def n_modes(self) -> int:
        return 2 * self.N + 1

    @functools.cached_property
    def k1d(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)

    @functools.cached_property
    def kx(self) -> np.ndarray:
        return self.k1d[:, None] * np.ones((1, self.n_modes), dtype=np.int64)

    @functools.cached_property
    def ky(self) -> np.ndarray:
        return np.ones((self.n_modes, 1), dtype=np.int64) * self.k1d[None, :]

    @functools.cached_property
    def ksq(self) -> np.ndarray:
        """k^2 + l^2 as float, shape (2N+1, 2N+1)."""
        k2 = self.k1d.astype(float) ** 2
        return k2[:, None] + k2[None, :]

    @functools.cached_property
    def inv_ksq(self) -> np.ndarray:
        """1/(k^2+l^2) with the (0,0) entry set to zero."""
        w = self.ksq.copy()
        w[self.N, self.N] = 1.0
        w = 1.0 / w
        w[self.N, self.N] = 0.0
        return w

    def points1d(self, P: int | None = None) -> np.ndarray:
        P = self.P if P is None else P
        return TWO_PI * np.arange(P) / P


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Complex Fourier coefficients of a real periodic scalar field."""

    grid: WaveGrid
    coef: np.ndarray

    def __post_init__(self):
        n = self.grid.n_modes
        if self.coef.shape != (n, n):
            raise InvalidInputError(
                f"coefficient array shape {self.coef.shape} does not match grid ({n}, {n})"
            )
        if self.coef.dtype != np.complex128:
            object.__setattr__(self, "coef", self.coef.astype(np.complex128))

    @classmethod
    def zeros(cls, grid: WaveGrid) -> "SpectralField":
        n = grid.n_modes
        return cls(grid, np.zeros((n, n), dtype=np.complex128))

    @classmethod
    def from_modes(cls, grid: WaveGrid, modes, hermitian: bool = True) -> "SpectralField":
        """Build a field from {(k, l): amplitude}; with hermitian=True the
        conjugate at (-k, -l) is added automatically so the field is real."""
        field = cls.zeros(grid)
        N = grid.N
        for (k, l), amp in dict(modes).items():
            if abs(k) > N or abs(l) > N:
                raise InvalidInputError(f"mode ({k}, {l}) outside [-{N}, {N}]^2")
            field.coef[k + N, l + N] += amp
            if hermitian and (k, l) != (0, 0):
                field.coef[-k + N, -l + N] += np.conj(amp)
        return field

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coef.copy())

    @property
    def mean_coef(self) -> complex:
        return complex(self.coef[self.grid.N, self.grid.N])

    def zero_mean(self) -> "SpectralField":
        c = self.coef.copy()
        c[self.grid.N, self.grid.N] = 0.0
        return SpectralField(self.grid, c)

    def hermitian_defect(self) -> float:
        """Max |coef(k,l) - conj(coef(-k,-l))| (0 for real fields)."""
        return float(np.abs(self.coef - np.conj(self.coef[::-1, ::-1])).max())

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _require_same_grid(self, other)
        return SpectralField(self.grid, self.coef + other.coef)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _require_same_grid(self, other)
        return SpectralField(self.grid, self.coef - other.coef)

    def __mul__(self, scalar) -> "SpectralField":
        return SpectralField(self.grid, self.coef * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class PhysField:
    """Real point values on the P x P collocation grid."""

    grid: WaveGrid
    vals: np.ndarray

    def __post_init__(self):
        P = self.grid.P
        if self.vals.shape != (P, P):
            raise InvalidInputError(
                f"value array shape {self.vals.shape} does not match grid ({P}, {P})"
            )
        if self.vals.dtype != np.float64:
            object.__setattr__(self, "vals", self.vals.astype(np.float64))
        if not np.isfinite(self.vals).all():
            raise InvalidInputError("physical field contains NaN/Inf")


@dataclass(frozen=True, eq=False)
class VelocityField:
    """Spectral velocity components (u, v) = (-psi_y, psi_x)."""

    u: SpectralField
    v: SpectralField

    def __post_init__(self):
        _require_same_grid(self.u, self.v)

    @property
    def grid(self) -> WaveGrid:
        return self.u.grid


def _require_same_grid(a, b) -> None:
    if a.grid != b.grid:
        raise InvalidInputError(f"grid mismatch: {a.grid} vs {b.grid}")


# ----------------------------------------------------------------------
# Mode embedding between the centered coefficient layout and the numpy
# rfft2 half-spectrum layout on an M-point grid.  Cached per (N, M).
# ----------------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def _embed_indices(N: int, M: int):
    rows = (np.arange(-N, N + 1) % M)[:, None]          # wavenumber k -> row k mod M
    cols_pos = np.arange(0, N + 1)[None, :]             # l = 0..N in the half spectrum
    rows_neg = ((-np.arange(-N, N + 1)) % M)[:, None]   # -k rows, for recovering l < 0
    return rows, cols_pos, rows_neg


def _to_phys(coefs: np.ndarray, N: int, M: int) -> np.ndarray:
    """Evaluate centered coefficients (..., 2N+1, 2N+1) on the M x M grid.

    Requires M >= 2N+1 (injective embedding).  Returns real (..., M, M).
    """
    rows, cols_pos, _ = _embed_indices(N, M)
    half = np.zeros(coefs.shape[:-2] + (M, M // 2 + 1), dtype=np.complex128)
    half[..., rows, cols_pos] = coefs[..., :, N:]
    return np.fft.irfft2(half, s=(M, M), axes=(-2, -1)) * (M * M)


def _from_phys(vals: np.ndarray, N: int, M: int) -> np.ndarray:
    """Extract centered coefficients for modes [-N, N]^2 from real values
    on the M x M grid (the 1/M^2-normalized DFT, alias-folded by the DFT
    itself when the data is not band-limited to M)."""
    half = np.fft.rfft2(vals, axes=(-2, -1)) / (M * M)
    rows, cols_pos, rows_neg = _embed_indices(N, M)
    n = 2 * N + 1
    coefs = np.empty(vals.shape[:-2] + (n, n), dtype=np.complex128)
    coefs[..., :, N:] = half[..., rows, cols_pos]
    coefs[..., :, :N] = np.conj(half[..., rows_neg, cols_pos[:, :0:-1]])
    return coefs


# ----------------------------------------------------------------------
# Transforms
# ----------------------------------------------------------------------

def forward_transform(p: PhysField) -> SpectralField:
    """Discrete Fourier coefficients of the grid values, retaining modes
    [-N, N]^2.  The (0, 0) coefficient is the grid mean; callers evolving
    mean-zero fields zero it explicitly."""
    grid = p.grid
    coef = _from_phys(p.vals, grid.N, grid.P)
    return SpectralField(grid, coef)


def inverse_transform(s: SpectralField, P: int | None = None) -> PhysField:
    """Evaluate the trigonometric polynomial at the P x P grid points.

    P must satisfy P >= 2N+1; the result is real to 1e-13 relative.
    """
    if P is None:
        P = s.grid.P
    N = s.grid.N
    if P < 2 * N + 1:
        raise ResolutionError(f"P = {P} < 2N+1 = {2 * N + 1}: grid cannot resolve the field")
    defect = s.hermitian_defect()
    scale = max(1.0, float(np.abs(s.coef).max()))
    if defect > 1e-13 * scale:
        raise InvalidInputError(
            f"coefficients are not Hermitian-symmetric (defect {defect:.3e}); field is not real"
        )
    vals = _to_phys(s.coef, N, P)
    return PhysField(WaveGrid(N, P), vals)


def evaluate_on_grid(s: SpectralField, P: int) -> np.ndarray:
    """Point values of the field at the P x P grid for any P >= 1.

    Unlike inverse_transform this permits P < 2N+1, in which case distinct
    modes land on the same grid residue class and fold together -- exactly
    the sampling that the collocation interpolation operator sees.
    """
    N = s.grid.N
    if P >= 2 * N + 1:
        return _to_phys(s.coef, N, P)
    # Fold coefficients onto residue classes mod P, then evaluate.
    folded = np.zeros((P, P), dtype=np.complex128)
    rows = np.arange(-N, N + 1) % P
    np.add.at(folded, (rows[:, None], rows[None, :]), s.coef)
    vals = np.fft.ifft2(folded) * (P * P)
    return vals.real


# ----------------------------------------------------------------------
# Differential operators (diagonal in coefficient space)
# ----------------------------------------------------------------------

def derivative(s: SpectralField, axis: str, order: int = 1) -> SpectralField:
    """Spectral partial derivative: multiply by (ik)^order or (il)^order."""
    if axis not in ("x", "y"):
        raise InvalidInputError(f"axis must be 'x' or 'y', got {axis!r}")
    if order not in (1, 2):
        raise InvalidInputError(f"order must be 1 or 2, got {order}")
    k = s.grid.k1d.astype(float)
    factor = (1j * k) ** order
    if axis == "x":
        coef = s.coef * factor[:, None]
    else:
        coef = s.coef * factor[None, :]
    return SpectralField(s.grid, coef)


def laplacian(s: SpectralField) -> SpectralField:
    return SpectralField(s.grid, s.coef * (-s.grid.ksq))


def solve_poisson(omega: SpectralField) -> SpectralField:
    """Streamfunction psi with -Lap psi = omega, mean zero.

    omega must be mean zero (|coef(0,0)| <= 1e-12), else the problem is
    insolvable in the mean-zero class.
    """
    if abs(omega.mean_coef) > 1e-12:
        raise InvalidInputError(
            f"Poisson right-hand side has nonzero mean {omega.mean_coef:.3e}"
        )
    coef = omega.coef * omega.grid.inv_ksq
    return SpectralField(omega.grid, coef)


def velocity_from_streamfunction(psi: SpectralField) -> VelocityField:
    """u = perp-grad psi = (-psi_y, psi_x); divergence-free by construction."""
    return VelocityField(
        u=derivative(psi, "y", 1) * (-1.0),
        v=derivative(psi, "x", 1),
    )


# ----------------------------------------------------------------------
# Projection / interpolation
# ----------------------------------------------------------------------

def project_PN(s: SpectralField, N_target: int, P: int | None = None) -> SpectralField:
    """Orthogonal projection onto modes [-N_target, N_target]^2."""
    N = s.grid.N
    if N_target > N:
        raise InvalidInputError(f"N_target = {N_target} exceeds source mode extent {N}")
    if P is None:
        P = s.grid.P
    lo, hi = N - N_target, N + N_target + 1
    return SpectralField(WaveGrid(N_target, P), s.coef[lo:hi, lo:hi].copy())


def interpolate_IN(p: PhysField) -> SpectralField:
    """The unique trigonometric polynomial of degree <= N matching p at all
    points of the critical (2N+1)-point grid."""
    grid = p.grid
    if grid.P != 2 * grid.N + 1:
        raise InvalidInputError(
            f"interpolation requires the critical grid P = 2N+1, got P = {grid.P}, N = {grid.N}"
        )
    return forward_transform(p)


# ----------------------------------------------------------------------
# Products
# ----------------------------------------------------------------------

def _pad_size(N: int, P: int) -> int:
    """Working grid for an alias-free degree-N truncation of a quadratic
    product: modes > N contaminate retained ones only if M < 3N+2."""
    return P if P >= 3 * N + 2 else good_fft_size(3 * N + 2)


def dealiased_product(a: SpectralField, b: SpectralField, zero_mean: bool = False) -> SpectralField:
    """P_N(a*b) with no aliasing error in any retained mode.

    Both inputs are zero-padded to M >= 3N+2 points per direction,
    multiplied pointwise, transformed back, and truncated to [-N, N]^2.
    With zero_mean=True the (0,0) coefficient of the result is dropped
    (appropriate for advection terms, whose analytic mean vanishes).
    """
    _require_same_grid(a, b)
    N = a.grid.N
    M = _pad_size(N, a.grid.P)
    va = _to_phys(a.coef, N, M)
    vb = _to_phys(b.coef, N, M)
    coef = _from_phys(va * vb, N, M)
    if zero_mean:
        coef[N, N] = 0.0
    return SpectralField(a.grid, coef)


def full_product(a: SpectralField, b: SpectralField) -> SpectralField:
    """The exact product a*b as an element of P^{2N} (no truncation).

    Uses an M >= 4N+1 working grid so every mode of the product is
    alias-free; equivalent to the full coefficient convolution.
    """
    _require_same_grid(a, b)
    N = a.grid.N
    M = good_fft_size(4 * N + 1)
    va = _to_phys(a.coef, N, M)
    vb = _to_phys(b.coef, N, M)
    coef = _from_phys(va * vb, 2 * N, M)
    return SpectralField(WaveGrid(2 * N, M), coef)


def advection_product(psi: SpectralField, omega: SpectralField) -> SpectralField:
    """P_N(perp-grad psi . grad omega), alias-free, mean re-zeroed.

    The analytic mean of the advection term vanishes (integration by
    parts); the computed (0,0) coefficient is asserted to be roundoff
    before it is dropped.
    """
    _require_same_grid(psi, omega)
    grid = psi.grid
    N = grid.N
    M = _pad_size(N, grid.P)
    k = grid.k1d.astype(float)
    ik_col = (1j * k)[:, None]
    il_row = (1j * k)[None, :]
    stack = np.stack(
        [
            -il_row * psi.coef,  # u = -psi_y
            ik_col * psi.coef,   # v =  psi_x
            ik_col * omega.coef,  # omega_x
            il_row * omega.coef,  # omega_y
        ]
    )
    u, v, wx, wy = _to_phys(stack, N, M)
    coef = _from_phys(u * wx + v * wy, N, M)
    mean = coef[N, N]
    tol = 1e-13 * max(1.0, float(np.abs(coef).max()))
    if abs(mean) > tol:
        raise BoundCheckError(
            f"advection mean {abs(mean):.3e} exceeds roundoff tolerance {tol:.3e}"
        )
    coef[N, N] = 0.0
    return SpectralField(grid, coef)
