"""Line-oriented ``key = value`` run configuration."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from pathlib import Path

from .integrator import SchemeConfig
from .model import InitialDataSpec, ModelParams, ParameterError, ProfileKind, require_valid

SWEEPABLE = ("gamma", "theta", "alpha", "f")
DEFAULT_SWEEP_BUDGET = 64


class ConfigError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class Mode(str, Enum):
    SINGLE = "single"
    SWEEP = "sweep"
    VERIFY = "verify"


@dataclass(frozen=True)
class RunConfig:
    gamma: float = 2.0
    theta: float = 0.5
    alpha: float = 0.0
    rho_l: float = 1.0
    A: float = 1.0
    B: float = 1.0
    f: float = 1.0
    g: float = 1.0
    n_cells: int = 400
    t_end: float = 200.0
    cfl: float = 0.4
    dt_max: float = 0.01
    pos_floor: float = 0.1
    sample_interval: float = 0.5
    profile_kind: ProfileKind = ProfileKind.SINE
    kappa_lo: float = 0.8
    kappa_hi: float = 1.2
    c_amp: float = 1.0
    u_amp: float = 0.05
    perturb_wavenumber: int = 2
    fit_t_lo: float | None = None  # None: t_end / 20
    fit_t_hi: float | None = None  # None: t_end
    mode: Mode = Mode.SINGLE
    force_out_of_regime: bool = False
    output_dir: str = "out"

    def __post_init__(self):
        if not self.sample_interval > 0:
            raise ConfigError("sample_interval must be positive")
        if int(self.n_cells) != self.n_cells or self.n_cells < 8:
            raise ConfigError("n_cells must be an integer >= 8")
        if not self.t_end >= 0:
            raise ConfigError("t_end must be nonnegative")

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.gamma, self.theta, self.alpha, self.rho_l, self.A, self.B, self.f, self.g)

    @property
    def scheme(self) -> SchemeConfig:
        return SchemeConfig(cfl=self.cfl, dt_max=self.dt_max, pos_floor=self.pos_floor, t_end=self.t_end)

    @property
    def initial(self) -> InitialDataSpec:
        return InitialDataSpec(self.profile_kind, self.kappa_lo, self.kappa_hi, self.c_amp,
                               self.u_amp, self.perturb_wavenumber)

    @property
    def fit_window(self) -> tuple[float, float]:
        lo = self.t_end / 20 if self.fit_t_lo is None else self.fit_t_lo
        hi = self.t_end if self.fit_t_hi is None else self.fit_t_hi
        return lo, hi


KEYS = {f.name: f for f in fields(RunConfig)}


def _convert(name, raw):
    default = KEYS[name].default
    raw = raw.strip()
    if name in ("fit_t_lo", "fit_t_hi"):
        return None if raw.lower() in ("", "none", "auto") else float(raw)
    if isinstance(default, bool):
        low = raw.lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if isinstance(default, Enum):
        return type(default)(raw.lower())
    if isinstance(default, int):
        v = float(raw)
        if v != int(v):
            raise ValueError(f"not an integer: {raw!r}")
        return int(v)
    if isinstance(default, float):
        v = float(raw)
        if math.isnan(v):
            raise ValueError("NaN is not allowed")
        return v
    return raw


def _lines(text):
    for no, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", no)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError("missing key", no)
        yield no, key, value


def _parse(text, allow_lists):
    values, lists = {}, {}
    for no, key, value in _lines(text):
        if key in ("max_parallel", "sweep_budget") and allow_lists:
            try:
                lists[key] = int(value)
            except ValueError:
                raise ConfigError(f"{key} must be an integer", no) from None
            continue
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", no)
        try:
            if allow_lists and key in SWEEPABLE and "," in value:
                lists[key] = [_convert(key, v) for v in value.split(",") if v.strip()]
            else:
                values[key] = _convert(key, value)
        except ValueError as e:
            raise ConfigError(f"bad value for {key}: {e}", no) from None
    return values, lists


def parse_config(text: str, force_out_of_regime: bool | None = None, check_regime: bool = True) -> RunConfig:
    """Parse `text`; missing keys keep the default scenario's values.

    Parameters outside the theorem window raise ParameterError unless
    ``force_out_of_regime`` is set (in the text or as an argument).
    """
    values, _ = _parse(text, allow_lists=False)
    if force_out_of_regime is not None:
        values["force_out_of_regime"] = force_out_of_regime
    cfg = RunConfig(**values)
    if check_regime:
        require_valid(cfg.params, force=cfg.force_out_of_regime)
    return cfg


def format_config(cfg: RunConfig) -> str:
    out = []
    for name in KEYS:
        v = getattr(cfg, name)
        if isinstance(v, Enum):
            v = v.value
        elif isinstance(v, bool):
            v = "true" if v else "false"
        elif v is None:
            v = "auto"
        elif isinstance(v, float):
            v = repr(v)
        out.append(f"{name} = {v}")
    return "\n".join(out) + "\n"


@dataclass(frozen=True)
class SweepSpec:
    values: dict = field(default_factory=dict)  # subset of SWEEPABLE -> list of floats
    max_parallel: int = 1
    budget: int = DEFAULT_SWEEP_BUDGET

    def points(self, base: RunConfig) -> list[RunConfig]:
        import itertools

        names = [k for k in SWEEPABLE if k in self.values]
        combos = list(itertools.product(*(self.values[k] for k in names)))
        if len(combos) > self.budget:
            raise ConfigError(f"sweep has {len(combos)} points, budget is {self.budget}")
        return [replace(base, **dict(zip(names, combo))) for combo in combos]


def parse_sweep(text: str, force_out_of_regime: bool | None = None) -> tuple[SweepSpec, RunConfig]:
    """Like parse_config, but gamma/theta/alpha/f may be comma-separated lists."""
    values, lists = _parse(text, allow_lists=True)
    if force_out_of_regime is not None:
        values["force_out_of_regime"] = force_out_of_regime
    max_parallel = lists.pop("max_parallel", 1)
    budget = lists.pop("sweep_budget", DEFAULT_SWEEP_BUDGET)
    if max_parallel < 1:
        raise ConfigError("max_parallel must be >= 1")
    base = RunConfig(**values, mode=Mode.SWEEP) if "mode" not in values else RunConfig(**values)
    sweep = SweepSpec(lists, max_parallel, budget)
    for point in sweep.points(base):
        require_valid(point.params, force=base.force_out_of_regime)
    return sweep, base


def load_config(path) -> str:
    return Path(path).read_text(encoding="utf-8")
