"""Flat ``key = value`` experiment configuration files."""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import Optional

from ..dynamics import DEFAULT_DT, INTEGRATORS, RECIPES
from ..validation import ConfigurationError

__all__ = ["ExperimentConfig", "read_config", "write_config", "parse_window"]


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: Optional[str] = None
    epsilon: float = 0.1
    sign: int = 1
    p: int = 1
    a: float = 2.0
    b: float = 0.0
    recipe: str = "cos_plus_sin"
    q: Optional[int] = None
    N: int = 32
    dt: float = DEFAULT_DT
    T_mode: str = "theorem_window"
    integrator: str = "splitstep"
    output_dir: str = "out"
    rng_seed: int = 0

    def validate(self, lines=None) -> "ExperimentConfig":
        """Check ranges; ``lines`` maps key -> line number for error messages."""
        lines = lines or {}

        def fail(key, msg):
            where = f" (line {lines[key]})" if key in lines else ""
            raise ConfigurationError(f"{key}{where}: {msg}")

        from .scenarios import CATALOG
        if self.scenario is not None and self.scenario not in CATALOG:
            fail("scenario", f"unknown scenario {self.scenario!r}; known: {', '.join(CATALOG)}")
        if not (self.epsilon > 0 and self.epsilon < 1):
            fail("epsilon", f"must lie in (0, 1), got {self.epsilon}")
        if self.sign not in (1, -1):
            fail("sign", f"must be +1 or -1, got {self.sign}")
        if self.p < 1:
            fail("p", f"must be a positive integer, got {self.p}")
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            fail("a", "weights must be finite")
        if self.recipe not in RECIPES:
            fail("recipe", f"must be one of {', '.join(RECIPES)}, got {self.recipe!r}")
        if self.recipe == "cos_plus_sin_perturbed":
            if self.q is None:
                fail("q", "required for recipe cos_plus_sin_perturbed")
            if self.q == 1 or self.q < 0:
                fail("q", f"must be a nonnegative integer other than 1, got {self.q}")
        if self.q is not None and self.q > self.N:
            fail("q", f"exceeds N={self.N}")
        if self.N < max(2 * self.p, self.q or 0, 2) + 1:
            fail("N", f"must be >= {max(2 * self.p, self.q or 0, 2) + 1}, got {self.N}")
        if not self.dt > 0:
            fail("dt", f"must be positive, got {self.dt}")
        try:
            parse_window(self.T_mode)
        except ValueError as exc:
            fail("T_mode", str(exc))
        if self.integrator not in INTEGRATORS:
            fail("integrator", f"must be one of {', '.join(INTEGRATORS)}, got {self.integrator!r}")
        return self

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw)


def parse_window(value: str):
    """``theorem_window`` (alias ``theorem``) or ``periods:K``; returns ('theorem', None) or ('periods', K)."""
    if value in ("theorem", "theorem_window"):
        return ("theorem", None)
    if value.startswith("periods:"):
        try:
            k = float(value.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"cannot parse period count in {value!r}") from None
        if k <= 0:
            raise ValueError(f"period count must be positive in {value!r}")
        return ("periods", k)
    raise ValueError(f"window must be 'theorem_window' or 'periods:K', got {value!r}")


_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _convert(key, raw):
    t = _TYPES[key]
    if raw.lower() in ("none", "") and "Optional" in str(t):
        return None
    if "int" in str(t):
        v = float(raw)
        if v != int(v):
            raise ValueError(f"expected an integer, got {raw!r}")
        return int(v)
    if "float" in str(t):
        return float(raw)
    return raw


def read_config(path, require_scenario: bool = True) -> ExperimentConfig:
    with open(path) as fh:
        text = fh.read()
    return parse_config(text, require_scenario)


def parse_config(text: str, require_scenario: bool = True) -> ExperimentConfig:
    values, lines = {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _TYPES:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigurationError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _convert(key, val)
        except ValueError as exc:
            raise ConfigurationError(f"line {lineno}: cannot parse {key}: {exc}") from None
        lines[key] = lineno
    cfg = ExperimentConfig(**values)
    if require_scenario and cfg.scenario is None:
        raise ConfigurationError("scenario: required key is missing")
    return cfg.validate(lines)


def write_config(cfg: ExperimentConfig, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_config(cfg))


def dumps_config(cfg: ExperimentConfig) -> str:
    out = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        out.append(f"{f.name} = {'none' if v is None else repr(v) if isinstance(v, float) else v}")
    return "\n".join(out) + "\n"
