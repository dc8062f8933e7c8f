"""Run configuration: `key = value` file format, validation, and initial
condition construction.

Mode lists (for `forcing_modes` and `initial = modes:...`) name one
representative per conjugate pair as `k,l,re,im`; the Hermitian partner at
(-k,-l) is added automatically so fields stay real.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InvalidInputError
from .norms import sobolev_norm
from .spectral import SpectralField, WaveGrid
from .state import ForcingSpec

SCHEMES = ("galerkin", "collocation")
INITIAL_PRESETS = ("zero", "taylor_green", "sin_x", "random_smooth")


@dataclass(frozen=True)
class InitialSpec:
    kind: str                      # preset name, "modes", or "checkpoint"
    l2: float | None = None        # optional L2 normalization target
    modes: tuple = ()              # ((k, l, complex), ...) for kind == "modes"
    path: str | None = None        # for kind == "checkpoint"


@dataclass(frozen=True)
class SimConfig:
    scheme: str
    N: int
    nu: float
    dt: float
    t_final: float
    forcing: ForcingSpec
    initial: InitialSpec
    P: int = 0                     # 0 = auto
    output_every: int = 1
    checkpoint_every: int = 0      # 0 = no periodic checkpoints
    seed: int = 0
    cw_override: float | None = None
    enforce_k0: bool = False

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}", key="scheme")
        if self.N < 2:
            raise ConfigError(f"N must be >= 2, got {self.N}", key="N")
        if self.nu <= 0:
            raise ConfigError("nu must be positive", key="nu")
        if self.dt <= 0:
            raise ConfigError("dt must be positive", key="dt")
        if self.t_final < self.dt:
            raise ConfigError("t_final must be >= dt", key="t_final")
        if self.output_every < 1:
            raise ConfigError("output_every must be >= 1", key="output_every")
        if self.checkpoint_every < 0:
            raise ConfigError("checkpoint_every must be >= 0", key="checkpoint_every")
        if self.P != 0 and self.P < 2 * self.N + 1:
            raise ConfigError(f"P must be 0 (auto) or >= 2N+1 = {2 * self.N + 1}", key="P")

    def resolved_P(self) -> int:
        """Auto grid: critical 2N+1 for collocation; next power of two
        >= 3N+2 for Galerkin dealiased products."""
        if self.P:
            return self.P
        if self.scheme == "collocation":
            return 2 * self.N + 1
        p = 1
        while p < 3 * self.N + 2:
            p *= 2
        return p

    def grid(self) -> WaveGrid:
        return WaveGrid(self.N, self.resolved_P())


# ----------------------------------------------------------------------
# Text format
# ----------------------------------------------------------------------

_REQUIRED = ("scheme", "N", "nu", "dt", "t_final", "forcing", "initial")
_ALL_KEYS = _REQUIRED + (
    "P",
    "forcing_amplitude",
    "forcing_mode",
    "forcing_modes",
    "forcing_frequency",
    "initial_l2",
    "output_every",
    "checkpoint_every",
    "seed",
    "cw_override",
    "enforce_k0",
)


def _parse_scalar(raw: str, kind: str, key: str, line: int):
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            low = raw.lower()
            if low in ("true", "1", "yes"):
                return True
            if low in ("false", "0", "no"):
                return False
            raise ValueError
    except ValueError:
        raise ConfigError(f"expected {kind}, got {raw!r}", key=key, line=line) from None
    return raw


def _parse_mode_list(raw: str, key: str, line: int) -> tuple:
    modes = []
    for item in raw.split(";"):
        item = item.strip()
        if not item:
            continue
        parts = [p.strip() for p in item.split(",")]
        if len(parts) != 4:
            raise ConfigError(
                f"mode entries are 'k,l,re,im', got {item!r}", key=key, line=line
            )
        try:
            k, l = int(parts[0]), int(parts[1])
            amp = complex(float(parts[2]), float(parts[3]))
        except ValueError:
            raise ConfigError(f"malformed mode entry {item!r}", key=key, line=line) from None
        modes.append((k, l, amp))
    if not modes:
        raise ConfigError("empty mode list", key=key, line=line)
    return tuple(modes)


def parse_config(text: str) -> SimConfig:
    """Parse a `key = value` configuration (one per line, `#` comments).

    Unknown keys, duplicate keys, type mismatches, and invariant
    violations all raise ConfigError naming the key and line.
    """
    seen: dict[str, tuple[str, int]] = {}
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        stripped = rawline.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"expected 'key = value', got {stripped!r}", line=lineno)
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _ALL_KEYS:
            raise ConfigError(f"unknown key {key!r}", key=key, line=lineno)
        if key in seen:
            raise ConfigError(f"duplicate key (first on line {seen[key][1]})", key=key, line=lineno)
        if not value:
            raise ConfigError("empty value", key=key, line=lineno)
        seen[key] = (value, lineno)

    for key in _REQUIRED:
        if key not in seen:
            raise ConfigError(f"missing required key {key!r}", key=key)

    def get(key, kind, default=None):
        if key not in seen:
            return default
        return _parse_scalar(seen[key][0], kind, key, seen[key][1])

    scheme = seen["scheme"][0]
    forcing = _build_forcing(seen)
    initial = _build_initial_spec(seen)

    try:
        return SimConfig(
            scheme=scheme,
            N=get("N", "int"),
            nu=get("nu", "float"),
            dt=get("dt", "float"),
            t_final=get("t_final", "float"),
            forcing=forcing,
            initial=initial,
            P=get("P", "int", 0),
            output_every=get("output_every", "int", 1),
            checkpoint_every=get("checkpoint_every", "int", 0),
            seed=get("seed", "int", 0),
            cw_override=get("cw_override", "float", None),
            enforce_k0=get("enforce_k0", "bool", False),
        )
    except ConfigError as exc:
        if exc.line is None and exc.key in seen:
            raise ConfigError(str(exc), key=None, line=seen[exc.key][1]) from None
        raise
    except InvalidInputError as exc:
        raise ConfigError(str(exc)) from None


def _build_forcing(seen) -> ForcingSpec:
    kind, line = seen["forcing"]
    if kind == "none":
        return ForcingSpec("none")
    if kind == "kolmogorov":
        if "forcing_amplitude" not in seen:
            raise ConfigError("kolmogorov forcing requires forcing_amplitude", key="forcing_amplitude")
        amp = _parse_scalar(
            seen["forcing_amplitude"][0], "float", "forcing_amplitude", seen["forcing_amplitude"][1]
        )
        mode = (0, 4)
        if "forcing_mode" in seen:
            raw, ln = seen["forcing_mode"]
            parts = [p.strip() for p in raw.split(",")]
            if len(parts) != 2:
                raise ConfigError(f"forcing_mode is 'k,l', got {raw!r}", key="forcing_mode", line=ln)
            try:
                mode = (int(parts[0]), int(parts[1]))
            except ValueError:
                raise ConfigError(f"malformed forcing_mode {raw!r}", key="forcing_mode", line=ln) from None
        return ForcingSpec("kolmogorov", amplitude=amp, mode=mode)
    if kind in ("steady_modes", "time_harmonic"):
        if "forcing_modes" not in seen:
            raise ConfigError(f"{kind} forcing requires forcing_modes", key="forcing_modes")
        modes = _parse_mode_list(seen["forcing_modes"][0], "forcing_modes", seen["forcing_modes"][1])
        freq = 0.0
        if kind == "time_harmonic":
            if "forcing_frequency" not in seen:
                raise ConfigError(
                    "time_harmonic forcing requires forcing_frequency", key="forcing_frequency"
                )
            freq = _parse_scalar(
                seen["forcing_frequency"][0], "float", "forcing_frequency", seen["forcing_frequency"][1]
            )
        try:
            return ForcingSpec(kind, modes=modes, frequency=freq)
        except InvalidInputError as exc:
            raise ConfigError(str(exc), key="forcing", line=line) from None
    raise ConfigError(
        f"forcing must be none|steady_modes|kolmogorov|time_harmonic, got {kind!r}",
        key="forcing",
        line=line,
    )


def _build_initial_spec(seen) -> InitialSpec:
    raw, line = seen["initial"]
    l2 = None
    if "initial_l2" in seen:
        l2 = _parse_scalar(seen["initial_l2"][0], "float", "initial_l2", seen["initial_l2"][1])
        if l2 <= 0:
            raise ConfigError("initial_l2 must be positive", key="initial_l2", line=seen["initial_l2"][1])
    if raw in INITIAL_PRESETS:
        if raw == "zero" and l2 is not None:
            raise ConfigError("initial_l2 cannot rescale the zero preset", key="initial_l2")
        return InitialSpec(kind=raw, l2=l2)
    if raw.startswith("modes:"):
        modes = _parse_mode_list(raw[len("modes:"):], "initial", line)
        return InitialSpec(kind="modes", l2=l2, modes=modes)
    if raw.startswith("checkpoint:"):
        if l2 is not None:
            raise ConfigError("initial_l2 cannot be combined with a checkpoint", key="initial_l2")
        path = raw[len("checkpoint:"):].strip()
        if not path:
            raise ConfigError("empty checkpoint path", key="initial", line=line)
        return InitialSpec(kind="checkpoint", path=path)
    raise ConfigError(
        f"initial must be {'|'.join(INITIAL_PRESETS)}, modes:<list>, or checkpoint:<path>; got {raw!r}",
        key="initial",
        line=line,
    )


def load_config(path) -> SimConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


# ----------------------------------------------------------------------
# Initial data
# ----------------------------------------------------------------------

def _random_smooth(grid: WaveGrid, seed: int) -> SpectralField:
    """Seeded Hermitian Gaussian field with a smooth (1 + k^2+l^2)^{-2}
    amplitude profile, mean zero."""
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(0x52534D)], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    n = grid.n_modes
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    w = (1.0 + grid.ksq) ** -2.0
    c = 0.5 * (z + np.conj(z[::-1, ::-1])) * w
    c[grid.N, grid.N] = 0.0
    return SpectralField(grid, c)


def build_initial_field(config: SimConfig, grid: WaveGrid):
    """Initial vorticity plus the (t, step) origin.

    Returns (omega, t0, step0); presets start at (0.0, 0), a checkpoint
    resumes at its stored time and step.
    """
    spec = config.initial
    t0, step0 = 0.0, 0
    if spec.kind == "zero":
        omega = SpectralField.zeros(grid)
    elif spec.kind == "taylor_green":
        omega = SpectralField.from_modes(grid, {(1, 1): -0.5, (1, -1): 0.5})
    elif spec.kind == "sin_x":
        omega = SpectralField.from_modes(grid, {(1, 0): -0.5j})
    elif spec.kind == "random_smooth":
        omega = _random_smooth(grid, config.seed)
    elif spec.kind == "modes":
        omega = SpectralField.from_modes(grid, {(k, l): amp for k, l, amp in spec.modes})
    elif spec.kind == "checkpoint":
        from .checkpoint import load_checkpoint

        data = load_checkpoint(spec.path)
        if data.omega.grid != grid:
            raise ConfigError(
                f"checkpoint grid N={data.omega.grid.N}, P={data.omega.grid.P} does not match "
                f"configured N={grid.N}, P={grid.P}",
                key="initial",
            )
        omega, t0, step0 = data.omega, data.t, data.step
    else:
        raise ConfigError(f"unknown initial kind {spec.kind!r}", key="initial")

    omega = omega.zero_mean()
    if spec.l2 is not None:
        current = sobolev_norm(omega, 0.0)
        if current == 0.0:
            raise ConfigError("cannot rescale a zero initial field", key="initial_l2")
        omega = omega * (spec.l2 / current)
    return omega, t0, step0
