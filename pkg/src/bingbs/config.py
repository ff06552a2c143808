"""Experiment configuration: one key=value file plus overrides."""

from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .combinatorics import sample_size
from .probability import NU_MODES

SCHEMES = ("mu", "nu", "nu_plus")
MODES = ("exact", "sampled")
DEFAULT_EPSILON = 0.06
DEFAULT_DELTA = 0.01


def default_c_grid() -> tuple:
    return tuple(10.0**e for e in range(-4, 4))


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str = "data/MUTAG"
    scheme: str = "nu"
    mode: str = "exact"
    nbar: float = 5.0
    max_clicks: int = 6
    S: int | None = None
    seed: int = 0
    C_grid: tuple = field(default_factory=default_c_grid)
    repeats: int = 10
    folds: int = 10
    gamma: str | float = "auto"
    out_dir: str = "out"
    min_vertices: int = 6
    max_vertices: int = 25

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.nbar <= 0:
            raise ValueError("nbar must be positive")
        if self.max_clicks < 0:
            raise ValueError("max_clicks must be >= 0")
        if self.S is not None and self.S < 1:
            raise ValueError("S must be >= 1")
        if self.repeats < 1 or self.folds < 2:
            raise ValueError("need repeats >= 1 and folds >= 2")
        if not self.C_grid or min(self.C_grid) <= 0:
            raise ValueError("C grid must be nonempty and positive")
        if self.gamma != "auto" and not float(self.gamma) > 0:
            raise ValueError("gamma must be 'auto' or positive")

    @property
    def omega(self) -> int:
        """Number of coarse-grained outcomes the features estimate."""
        return self.max_clicks + 1 if self.scheme == "mu" else 1 << NU_MODES

    @property
    def samples(self) -> int:
        if self.S is not None:
            return self.S
        return sample_size(self.omega, DEFAULT_EPSILON, DEFAULT_DELTA)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["C_grid"] = list(self.C_grid)
        d["samples"] = self.samples
        return d


def _coerce(name: str, raw: str):
    raw = raw.strip()
    if name in ("nbar",):
        return float(raw)
    if name in ("max_clicks", "seed", "repeats", "folds", "min_vertices", "max_vertices"):
        return int(raw)
    if name == "S":
        return None if raw.lower() in ("", "auto", "none") else int(raw)
    if name == "C_grid":
        return tuple(float(x) for x in raw.replace(",", " ").split())
    if name == "gamma":
        return "auto" if raw == "auto" else float(raw)
    return raw


def load_config(path: str | Path | None = None, **overrides) -> ExperimentConfig:
    """Read an ``[experiment]`` section, then apply non-None overrides."""
    values = {}
    known = {f.name for f in fields(ExperimentConfig)}
    if path is not None:
        parser = configparser.ConfigParser()
        with open(path) as fh:
            parser.read_file(fh)
        if "experiment" not in parser:
            raise ValueError(f"{path}: missing [experiment] section")
        for key, raw in parser["experiment"].items():
            name = next((k for k in known if k.lower() == key), None)
            if name is None:
                raise ValueError(f"{path}: unknown key {key!r}")
            values[name] = _coerce(name, raw)
    for key, val in overrides.items():
        if key not in known:
            raise ValueError(f"unknown override {key!r}")
        if val is not None:
            values[key] = val
    return replace(ExperimentConfig(), **values)
