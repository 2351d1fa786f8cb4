"""Value types shared by the gasket, fractal, verify and cli modules.

All types are immutable value objects.  Keeping them in one module keeps the
computational modules focused on algorithms while the data shapes remain
importable from a single place.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from errors import BadAddress, InvalidArgument, ScaleOutOfRange


# Tolerance for a bound check to be reported as passing.
PASS_SLACK = 1e-12

SAMPLED_NORM = "sampled-norm"


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")

    def distance(self, other: "Point2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def close_to(self, other: "Point2", tol: float = 1e-12) -> bool:
        return abs(self.x - other.x) <= tol and abs(self.y - other.y) <= tol


@dataclass(frozen=True)
class Address:
    """A word over {1, 2, 3} naming the cell u_{i1} o ... o u_{im}(gasket)."""

    word: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        for letter in self.word:
            if letter not in (1, 2, 3):
                raise BadAddress(f"invalid address letter {letter!r}")

    @classmethod
    def parse(cls, text: str) -> "Address":
        text = text.strip()
        bad = [ch for ch in text if ch not in "123"]
        if bad:
            raise BadAddress(
                f"address {text!r} may only contain the letters 1, 2 and 3"
            )
        return cls(tuple(int(ch) for ch in text))

    @property
    def depth(self) -> int:
        return len(self.word)

    def __str__(self) -> str:
        return "".join(str(i) for i in self.word)


@dataclass(frozen=True)
class VertexId:
    """The vertex u_word(x_corner) of the depth-``len(word)`` lattice."""

    address: Address
    corner: int
    canonical: bool = True

    def __post_init__(self) -> None:
        if self.corner not in (1, 2, 3):
            raise InvalidArgument(f"invalid corner {self.corner!r}")


@dataclass(frozen=True)
class ScaleVector:
    a1: float
    a2: float
    a3: float

    @classmethod
    def uniform(cls, value: float) -> "ScaleVector":
        return cls(value, value, value)

    @classmethod
    def parse(cls, text: str) -> "ScaleVector":
        """Parse ``"a"`` (broadcast) or ``"a1,a2,a3"``."""
        parts = [p.strip() for p in str(text).split(",") if p.strip()]
        try:
            values = [float(p) for p in parts]
        except ValueError:
            raise InvalidArgument(f"invalid scale vector {text!r}") from None
        if len(values) == 1:
            return cls.uniform(values[0])
        if len(values) != 3:
            raise InvalidArgument(
                f"scale vector needs one or three components, got {len(values)}"
            )
        return cls(*values)

    @classmethod
    def from_sequence(cls, values: Sequence[float] | float) -> "ScaleVector":
        if isinstance(values, (int, float)):
            return cls.uniform(float(values))
        items = [float(v) for v in values]
        if len(items) == 1:
            return cls.uniform(items[0])
        if len(items) != 3:
            raise InvalidArgument(
                f"scale vector needs one or three components, got {len(items)}"
            )
        return cls(*items)

    def components(self) -> tuple[float, float, float]:
        return (self.a1, self.a2, self.a3)

    def __getitem__(self, i: int) -> float:
        """Component for the 1-based cell index ``i``."""
        return self.components()[i - 1]

    def as_array(self) -> np.ndarray:
        return np.array(self.components(), dtype=float)

    @property
    def norm(self) -> float:
        return max(abs(a) for a in self.components())

    def distance(self, other: "ScaleVector") -> float:
        return max(abs(a - b) for a, b in zip(self.components(), other.components()))

    def shifted(self, radius: float, direction: Sequence[float]) -> "ScaleVector":
        return ScaleVector(
            *(a + radius * d for a, d in zip(self.components(), direction))
        )

    def require_contractive(self) -> None:
        if not self.norm < 1.0:
            raise ScaleOutOfRange(self.norm)

    def to_list(self) -> list[float]:
        return list(self.components())


@dataclass(frozen=True)
class GraphSample:
    """Points (x, y, z) on the graph of a fractal function."""

    points: np.ndarray
    provenance: str
    seed: int | None = None
    # Generating address of each chaos-game point, outermost letter first.
    addresses: tuple[str, ...] = ()

    def __len__(self) -> int:
        return int(self.points.shape[0])


@dataclass(frozen=True)
class BoundReport:
    name: str
    lhs: float
    rhs: float
    margin: float
    passed: bool
    depth_m: int
    norm_mode: str = SAMPLED_NORM
    params: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def build(
        cls,
        name: str,
        lhs: float,
        rhs: float,
        depth_m: int,
        params: dict[str, Any],
        norm_mode: str = SAMPLED_NORM,
    ) -> "BoundReport":
        lhs = float(lhs)
        rhs = float(rhs)
        return cls(
            name=name,
            lhs=lhs,
            rhs=rhs,
            margin=rhs - lhs,
            passed=lhs <= rhs + PASS_SLACK,
            depth_m=depth_m,
            norm_mode=norm_mode,
            params=params,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "pass": self.passed,
            "depth_m": self.depth_m,
            "norm_mode": self.norm_mode,
            "params": self.params,
        }


@dataclass(frozen=True)
class SweepReport:
    center: ScaleVector
    probes: tuple[tuple[ScaleVector, float], ...]
    monotone_envelope_ok: bool
    envelope_constant: float
    depth_m: int
    norm_mode: str = SAMPLED_NORM

    def to_dict(self) -> dict[str, Any]:
        return {
            "center": self.center.to_list(),
            "probes": [
                {
                    "beta": beta.to_list(),
                    "radius": self.center.distance(beta),
                    "distance": dist,
                    "envelope": self.envelope_constant * self.center.distance(beta),
                }
                for beta, dist in self.probes
            ],
            "monotone_envelope_ok": self.monotone_envelope_ok,
            "envelope_constant": self.envelope_constant,
            "depth_m": self.depth_m,
            "norm_mode": self.norm_mode,
        }


@dataclass
class RunManifest:
    """Everything needed to re-run a command and reproduce its outputs."""

    command: str
    f_text: str
    b_text: str
    alpha: ScaleVector
    m: int
    seed: int | None
    tool_version: str
    output_files: list[str] = field(default_factory=list)
    tol: float = 1e-9
    options: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "f_text": self.f_text,
            "b_text": self.b_text,
            "alpha": self.alpha.to_list(),
            "m": self.m,
            "seed": self.seed,
            "tool_version": self.tool_version,
            "output_files": list(self.output_files),
            "tol": self.tol,
            "options": self.options,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def cache_key(self) -> str:
        """Key identifying the computation, independent of output paths."""
        data = self.to_dict()
        data.pop("output_files")
        data.pop("tool_version")
        return "table:" + json.dumps(data, sort_keys=True)


__all__ = [
    "PASS_SLACK",
    "SAMPLED_NORM",
    "Point2",
    "Address",
    "VertexId",
    "ScaleVector",
    "GraphSample",
    "BoundReport",
    "SweepReport",
    "RunManifest",
]
