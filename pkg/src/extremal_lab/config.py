"""Run configuration: defaults, JSON file merge and validation."""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InvalidConfig

CACHE_ENV = "EXTREMAL_LAB_CACHE"

BACKENDS = ("brute", "reduced", "structured")


@dataclass
class Tolerances:
    tol_eq: float = 0.02
    eps_band: float = 0.1
    eps_detect: float = 0.5
    eps_cubic: float = 0.5
    slope_tol: float = 0.05
    psi_tol: float = 0.01


@dataclass
class RunConfig:
    zeta_spec: str = "fib:1,2"
    n: int = 3
    side: str = "dual"
    backend: str = "structured+reduced"
    q_max: float = 60.0
    grid_step: float = 0.05
    precision_bits: int = 2048
    h_max: int | None = None
    x_max: int | None = None
    window: int = 2
    generations: int = 5
    tolerances: Tolerances = field(default_factory=Tolerances)
    cache_dir: str | None = None
    output_format: str = "both"
    out_dir: str = "."

    def validate(self) -> "RunConfig":
        if not self.q_max > 0:
            raise InvalidConfig("q_max must be positive", q_max=self.q_max)
        if not self.grid_step > 0:
            raise InvalidConfig("grid_step must be positive", grid_step=self.grid_step)
        if self.precision_bits < 128:
            raise InvalidConfig("precision_bits must be at least 128",
                                precision_bits=self.precision_bits)
        if not 1 <= self.n <= 4:
            raise InvalidConfig("n must be in 1..4", n=self.n)
        if self.side not in ("simultaneous", "dual"):
            raise InvalidConfig("side must be 'simultaneous' or 'dual'", side=self.side)
        parts = self.backend.split("+")
        if not parts or any(p not in BACKENDS for p in parts):
            raise InvalidConfig("unknown backend", backend=self.backend)
        if self.side == "simultaneous" and "structured" in parts:
            raise InvalidConfig("structured backend exists only on the dual side")
        if self.output_format not in ("csv", "json", "both"):
            raise InvalidConfig("output_format must be 'csv', 'json' or 'both'",
                                output_format=self.output_format)
        for k, v in dataclasses.asdict(self.tolerances).items():
            if not v > 0:
                raise InvalidConfig(f"tolerance {k} must be positive", **{k: v})
        for k in ("h_max", "x_max", "window", "generations"):
            v = getattr(self, k)
            if v is not None and v < 1:
                raise InvalidConfig(f"{k} must be >= 1", **{k: v})
        return self

    # derived bounds -------------------------------------------------------
    def dual_bound(self) -> int:
        if self.h_max is not None:
            return self.h_max
        if self.backend == "brute":
            return 30
        # headroom above the largest height that can matter on the grid
        return int(math.exp(self.q_max / self.n + 3))

    def sim_bound(self) -> int:
        if self.x_max is not None:
            return self.x_max
        return 10**4 if "brute" in self.backend else int(math.exp(self.q_max) + 1)

    def resolved_cache_dir(self) -> Path | None:
        d = os.environ.get(CACHE_ENV) or self.cache_dir
        return Path(d) if d else None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def key(self, *fields: str) -> str:
        """Hash of the named fields (all computational fields if none given)."""
        d = self.to_dict()
        for k in ("cache_dir", "output_format", "out_dir"):
            d.pop(k)
        if fields:
            d = {k: d[k] for k in fields}
        blob = json.dumps(d, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:24]

    @classmethod
    def from_sources(cls, path: str | os.PathLike | None = None, **overrides) -> "RunConfig":
        """Defaults, then a JSON file, then non-None overrides; validated."""
        data: dict = {}
        if path is not None:
            try:
                data = json.loads(Path(path).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise InvalidConfig(f"cannot read config file: {exc}", path=str(path)) from exc
            if not isinstance(data, dict):
                raise InvalidConfig("config file must hold a JSON object", path=str(path))
        tol = dict(data.pop("tolerances", {}) or {})
        for k in list(overrides):
            if k in Tolerances.__dataclass_fields__:
                v = overrides.pop(k)
                if v is not None:
                    tol[k] = v
        data.update({k: v for k, v in overrides.items() if v is not None})
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidConfig("unknown config keys", keys=sorted(unknown))
        try:
            tolerances = Tolerances(**tol)
        except TypeError as exc:
            raise InvalidConfig(f"bad tolerances: {exc}") from exc
        return cls(**data, tolerances=tolerances).validate()
