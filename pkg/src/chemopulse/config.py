"""Run configuration and its flat text format.

One ``key = value`` assignment per line with dotted keys, ``#`` starts a
comment::

    params.chi1S = 6.49e-5
    grid.nx = 1800
    init.phi_red = 0.1   # fast fraction

Missing keys take the defaults below; unknown keys are rejected.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, InvalidParameterError
from .params import PhysicalParams, default_gamma
from .pde import Grid1D

FORMATS = ("csv", "ppm")


@dataclass(frozen=True)
class TimeSpec:
    t_end: float = 4000.0
    cfl: float = 0.9
    snapshot_stride: int = 10


@dataclass(frozen=True)
class InitSpec:
    M_total: float = 1.0
    phi_red: float = 0.0
    ell0: float = 0.05
    N0: float = 1.0


@dataclass(frozen=True)
class OutputSpec:
    directory: str = "out"
    formats: tuple = FORMATS


@dataclass(frozen=True)
class RunConfig:
    params: PhysicalParams = field(default_factory=PhysicalParams)
    grid: Grid1D = field(default_factory=Grid1D)
    time: TimeSpec = field(default_factory=TimeSpec)
    init: InitSpec = field(default_factory=InitSpec)
    outputs: OutputSpec = field(default_factory=OutputSpec)

    def with_phi(self, phi_red) -> RunConfig:
        return dataclasses.replace(self, init=dataclasses.replace(self.init, phi_red=phi_red))


_INT_KEYS = {"grid.nx", "time.snapshot_stride"}
_STR_KEYS = {"outputs.directory", "outputs.formats"}


def _known_keys():
    keys = {f"params.{f.name}" for f in dataclasses.fields(PhysicalParams)}
    keys |= {f"grid.{f.name}" for f in dataclasses.fields(Grid1D)}
    keys |= {f"time.{f.name}" for f in dataclasses.fields(TimeSpec)}
    keys |= {f"init.{f.name}" for f in dataclasses.fields(InitSpec)}
    keys |= {f"outputs.{f.name}" for f in dataclasses.fields(OutputSpec)}
    return keys


KNOWN_KEYS = frozenset(_known_keys())


def parse_assignments(text):
    """Map of key -> (raw value, line number)."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError("unknown key", key=key, line=lineno)
        if key in out:
            raise ConfigError("duplicate key", key=key, line=lineno)
        if not value:
            raise ConfigError("missing value", key=key, line=lineno)
        out[key] = (value, lineno)
    return out


def _convert(key, value, lineno):
    if key in _STR_KEYS:
        return value
    try:
        if key in _INT_KEYS:
            return int(value)
        return float(value)
    except ValueError:
        kind = "an integer" if key in _INT_KEYS else "a number"
        raise ConfigError(f"expected {kind}, got {value!r}", key=key, line=lineno) from None


def config_from_mapping(values) -> RunConfig:
    """Build and validate a config from ``{dotted key: value}``."""
    unknown = set(values) - KNOWN_KEYS
    if unknown:
        raise ConfigError("unknown key", key=sorted(unknown)[0])
    groups = {"params": {}, "grid": {}, "time": {}, "init": {}, "outputs": {}}
    for key, value in values.items():
        group, name = key.split(".", 1)
        groups[group][name] = value

    for group, fields in groups.items():
        for name, value in fields.items():
            if group == "outputs":
                continue
            if not math.isfinite(value):
                raise ConfigError(f"must be finite, got {value!r}", key=f"{group}.{name}")

    grid = _build(Grid1D, groups["grid"], "grid")
    time = TimeSpec(**{**dataclasses.asdict(TimeSpec()), **groups["time"]})
    init = InitSpec(**{**dataclasses.asdict(InitSpec()), **groups["init"]})
    _check_time(time)
    _check_init(init)

    pvals = dict(groups["params"])
    for g in ("gamma1", "gamma2"):
        pvals.setdefault(g, default_gamma(grid.L, init.M_total))
    params = _build(PhysicalParams, pvals, "params")

    out = groups["outputs"]
    formats = out.get("formats", ",".join(FORMATS))
    if isinstance(formats, str):
        formats = tuple(f.strip() for f in formats.split(",") if f.strip())
    bad = [f for f in formats if f not in FORMATS]
    if bad:
        raise ConfigError(f"unknown format {bad[0]!r}; choose from {FORMATS}", key="outputs.formats")
    outputs = OutputSpec(directory=str(out.get("directory", OutputSpec.directory)),
                         formats=tuple(formats))
    return RunConfig(params=params, grid=grid, time=time, init=init, outputs=outputs)


def _build(cls, values, group):
    try:
        return cls(**values)
    except InvalidParameterError as exc:
        raise ConfigError(str(exc).split(": ", 1)[-1], key=f"{group}.{exc.name}") from None


def _check_time(time):
    if not time.t_end >= 0:
        raise ConfigError("must be >= 0", key="time.t_end")
    if not 0 < time.cfl <= 1:
        raise ConfigError("must lie in (0, 1]", key="time.cfl")
    if time.snapshot_stride < 1:
        raise ConfigError("must be >= 1", key="time.snapshot_stride")


def _check_init(init):
    for name in ("M_total", "ell0", "N0"):
        if not getattr(init, name) > 0:
            raise ConfigError("must be > 0", key=f"init.{name}")
    if not 0 <= init.phi_red <= 1:
        raise ConfigError(f"must lie in [0, 1], got {init.phi_red!r}", key="init.phi_red")


def parse_config(text) -> RunConfig:
    assignments = parse_assignments(text)
    values = {}
    for key, (raw, lineno) in assignments.items():
        values[key] = _convert(key, raw, lineno)
    try:
        return config_from_mapping(values)
    except ConfigError as exc:
        if exc.key in assignments and exc.line is None:
            raise ConfigError(str(exc).split(": ", 1)[-1], key=exc.key,
                              line=assignments[exc.key][1]) from None
        raise


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text)


def dump_config(config: RunConfig) -> str:
    lines = []
    for group in ("params", "grid", "time", "init"):
        obj = getattr(config, group)
        for f in dataclasses.fields(obj):
            lines.append(f"{group}.{f.name} = {getattr(obj, f.name)!r}")
    lines.append(f"outputs.directory = {config.outputs.directory}")
    lines.append(f"outputs.formats = {','.join(config.outputs.formats)}")
    return "\n".join(lines) + "\n"
