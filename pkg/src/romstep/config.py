"""Flat ``key = value`` case configuration.

One assignment per line, ``#`` starts a comment, dotted prefixes group keys::

    case = shear_layer
    grid.nx = 100
    rom.modes = 16,32,64
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from pathlib import Path

CASES = ("shear_layer", "actuator", "custom")


class ConfigError(ValueError):
    pass


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _ints(s: str) -> list:
    return [int(x) for x in s.split(",") if x.strip()]


def _floats(s: str) -> list:
    return [float(x) for x in s.split(",") if x.strip()]


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


@dataclass
class CaseConfig:
    case: str = "shear_layer"
    nx: int = 100
    ny: int = 100
    domain: list = field(default_factory=lambda: [0.0, 2 * math.pi, 0.0, 2 * math.pi])
    Re: float = 1000.0
    T: float = 20.0
    stages: int = 4
    safety: float = 1.0
    tol: float = 1e-6
    fom_dt_max: float = math.inf
    stride: int = 1
    modes: list = field(default_factory=lambda: [16, 32, 64, 128, 200])
    M_bc: int = 0
    rom_dt_max: float = math.inf
    dt_constant: float = 0.01
    eig_modes: int = 0  # 0 selects the largest entry of modes
    alphas: list = field(default_factory=lambda: [round(-1 + 0.25 * k, 2) for k in range(13)])
    alpha_meshes: list = field(default_factory=lambda: [10, 20, 40, 80])
    alpha_Re: float = 100.0
    run_fom: bool = True
    run_pod: bool = True
    run_rom: bool = True
    compare: bool = True
    output: str = "out"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.case not in CASES:
            raise ConfigError(f"case must be one of {CASES}, got {self.case!r}")
        for name in ("nx", "ny", "stages", "stride"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        for name in ("Re", "safety", "tol", "fom_dt_max", "rom_dt_max", "dt_constant",
                     "alpha_Re"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.T < 0:
            raise ConfigError("T must be non-negative")
        if self.safety > 1:
            raise ConfigError("safety must lie in (0, 1]")
        if self.stages not in (1, 2, 3, 4):
            raise ConfigError("only s = p <= 4 explicit schemes are available")
        if not self.modes or min(self.modes) < 1:
            raise ConfigError("rom.modes needs at least one positive entry")
        if self.eig_modes and self.eig_modes not in self.modes:
            raise ConfigError("eig.modes must be 0 or one of rom.modes")
        if self.M_bc < 0:
            raise ConfigError("M_bc must be non-negative")
        if len(self.domain) != 4:
            raise ConfigError("grid.domain needs four numbers x0,x1,y0,y1")

    @property
    def M_max(self) -> int:
        return max(self.modes)

    @property
    def eig_M(self) -> int:
        return self.eig_modes or self.M_max

    @property
    def out(self) -> Path:
        return Path(self.output)


# file key -> (field name, parser)
_KEYS = {
    "case": ("case", str),
    "grid.nx": ("nx", int),
    "grid.ny": ("ny", int),
    "grid.domain": ("domain", _floats),
    "flow.Re": ("Re", float),
    "time.T": ("T", float),
    "time.stages": ("stages", int),
    "time.safety": ("safety", float),
    "time.tol": ("tol", float),
    "fom.dt_max": ("fom_dt_max", float),
    "fom.stride": ("stride", int),
    "rom.modes": ("modes", _ints),
    "rom.M_bc": ("M_bc", int),
    "rom.dt_max": ("rom_dt_max", float),
    "rom.dt_constant": ("dt_constant", float),
    "eig.modes": ("eig_modes", int),
    "alpha.values": ("alphas", _floats),
    "alpha.meshes": ("alpha_meshes", _ints),
    "alpha.Re": ("alpha_Re", float),
    "stage.fom": ("run_fom", _bool),
    "stage.pod": ("run_pod", _bool),
    "stage.rom": ("run_rom", _bool),
    "stage.compare": ("compare", _bool),
    "output.dir": ("output", str),
}
_FIELD_TO_KEY = {f: k for k, (f, _) in _KEYS.items()}


def case_defaults(case: str) -> dict:
    """Per-case defaults applied before the file's own assignments."""
    if case == "actuator":
        return dict(nx=200, ny=80, domain=[0.0, 10.0, -2.0, 2.0], Re=100.0,
                    T=8 * math.pi, M_bc=2, dt_constant=4 * math.pi / 200, stride=2)
    if case == "custom":
        return dict(nx=32, ny=32, Re=100.0, T=1.0, modes=[1])
    return {}


def parse_config(text: str) -> CaseConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        name, conv = _KEYS[key]
        try:
            values[name] = conv(val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
    merged = case_defaults(values.get("case", "shear_layer"))
    merged.update(values)
    try:
        return CaseConfig(**merged)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:  # pragma: no cover - defensive
        raise ConfigError(str(exc)) from None


def load_config(path) -> CaseConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text())


def serialize_config(cfg: CaseConfig) -> str:
    return "".join(f"{_FIELD_TO_KEY[f.name]} = {_fmt(getattr(cfg, f.name))}\n"
                   for f in fields(cfg))
