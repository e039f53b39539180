"""Flat ``key=value`` configuration files.

One assignment per line; ``#`` starts a comment; blank lines are
ignored. Unknown keys are rejected so that typos cannot silently fall
back to defaults.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Any

from .errors import FormatError


def parse_key_values(text: str, source: str = "<config>") -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"{source}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise FormatError(f"{source}:{lineno}: empty key")
        if key in out:
            raise FormatError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def read_key_values(path) -> dict[str, str]:
    with open(path, encoding="utf-8") as fh:
        return parse_key_values(fh.read(), str(path))


def format_key_values(items: dict[str, Any]) -> str:
    """Render ``items`` in insertion order, one ``key=value`` per line."""
    lines = []
    for key, value in items.items():
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, float):
            value = repr(value) if math.isfinite(value) else ("inf" if value > 0 else "-inf")
        lines.append(f"{key}={value}")
    return "\n".join(lines) + "\n"


def _to_bool(value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise FormatError(f"not a boolean: {value!r}")


@dataclass
class PipelineConfig:
    """Every recognised configuration key, with its default."""

    # sensor
    layout_id: int = 0
    # glass interface and scene
    n1: float = 1.0
    n2: float = 1.5
    theta_deg: float = 45.0
    phi_perp_deg: float = 0.0
    dolp_t_extra: float = 0.0
    depolarize_transmission: bool = False
    # separation
    separation: str = "edge-search"
    p_r: str = "auto"
    alpha_min: float = 0.0
    alpha_max: float = 1.0
    alpha_step: float = 0.01
    alpha_tol: float = 1e-4
    penalty_weight: float = 10.0
    # diffusion
    T_steps: int = 1000
    beta_start: float = 1e-4
    beta_end: float = 0.02
    variance: str = "beta"
    # loss weights
    gamma1: float = 1.0
    gamma2: float = 0.0
    gamma3: float = 0.1
    gamma4: float = 0.1
    gamma5: float = 1.0
    gamma6: float = 1.0
    # pipeline inputs
    mixed_raw: str = ""
    transmission_raw: str = ""
    correspondences: str = "phase"
    reference_raw: str = ""
    metric_margin: int = 8
    # run
    seed: int = 0
    out_dir: str = "out"

    @classmethod
    def from_mapping(cls, values: dict[str, str]) -> "PipelineConfig":
        known = {f.name: f for f in fields(cls)}
        unknown = sorted(set(values) - set(known))
        if unknown:
            raise FormatError(f"unknown config key(s): {', '.join(unknown)}")
        kwargs: dict[str, Any] = {}
        for key, text in values.items():
            default = known[key].default
            try:
                if isinstance(default, bool):
                    kwargs[key] = _to_bool(text)
                elif isinstance(default, int):
                    kwargs[key] = int(text)
                elif isinstance(default, float):
                    kwargs[key] = float(text)
                else:
                    kwargs[key] = text
            except ValueError:
                raise FormatError(f"bad value for {key}: {text!r}") from None
        return cls(**kwargs)

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        return cls.from_mapping(read_key_values(path))
