"""Built-in benchmark joints with known maximal correlations.

These are code-defined rather than loaded from files: their reference values
are part of the test contract and must not drift with user edits.

    disc        uniform on the open unit disc          R = 1/3
    pball:p     uniform on |x|^p + |y|^p < 1 (p > 0)   R = 1/(p+1)
    fourpoint   uniform on {(0, +-1), (+-1, 0)}        R = 1
    fgm:r       expansion model with uniform marginals
                and the single coefficient rho_1 = r   R = |r|
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .correlation import (
    DEFAULT_CURVED_GRID,
    DEFAULT_MODEL_GRID,
    DiscretizedJoint,
    discretize_joint,
    discretize_model,
    joint_from_pmf,
)
from .lancaster import LancasterModel, build_model
from .orthopoly import MarginalSpec

__all__ = ["Fixture", "resolve_fixture", "BENCH_FIXTURES"]

BENCH_FIXTURES = ("disc", "pball:1", "pball:2", "fourpoint", "fgm:0.2")

FOURPOINT_VALUES = (-1.0, 0.0, 1.0)
FOURPOINT_PMF = np.array(
    [
        [0.0, 0.25, 0.0],
        [0.25, 0.0, 0.25],
        [0.0, 0.25, 0.0],
    ]
)


@dataclass(frozen=True, eq=False)
class Fixture:
    """One named benchmark: how to build its joint, and its reference value."""

    name: str
    kind: str  # "density" | "pmf" | "model"
    reference_maxcorr: float
    default_grid: int
    density: Callable | None = None
    support: tuple[tuple[float, float], tuple[float, float]] | None = None
    pmf: np.ndarray | None = None
    model: LancasterModel | None = None

    def joint(self, grid: int | None = None) -> DiscretizedJoint:
        if self.kind == "pmf":
            return joint_from_pmf(self.pmf, FOURPOINT_VALUES, FOURPOINT_VALUES)
        nodes = int(grid) if grid else self.default_grid
        if self.kind == "model":
            return discretize_model(self.model, nodes)
        return discretize_joint(self.density, self.support, nodes)


def _pball_density(p: float) -> Callable:
    area = 4.0 * math.gamma(1.0 + 1.0 / p) ** 2 / math.gamma(1.0 + 2.0 / p)

    def density(x, y):
        inside = np.abs(x) ** p + np.abs(y) ** p < 1.0
        return np.where(inside, 1.0 / area, 0.0)

    return density


def resolve_fixture(name: str) -> Fixture:
    """Look up a built-in fixture by name; parameterized names use 'name:value'."""
    box = ((-1.0, 1.0), (-1.0, 1.0))
    if name == "disc":
        return Fixture(
            name=name,
            kind="density",
            reference_maxcorr=1.0 / 3.0,
            default_grid=DEFAULT_CURVED_GRID,
            density=lambda x, y: np.where(x * x + y * y < 1.0, 1.0 / math.pi, 0.0),
            support=box,
        )
    if name == "fourpoint":
        return Fixture(
            name=name,
            kind="pmf",
            reference_maxcorr=1.0,
            default_grid=0,
            pmf=FOURPOINT_PMF,
        )
    if name.startswith("pball:"):
        try:
            p = float(name.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"cannot parse exponent in fixture name {name!r}") from None
        if not (p > 0.0 and math.isfinite(p)):
            raise ValueError("pball exponent must be a positive finite number")
        return Fixture(
            name=name,
            kind="density",
            reference_maxcorr=1.0 / (p + 1.0),
            default_grid=DEFAULT_CURVED_GRID,
            density=_pball_density(p),
            support=box,
        )
    if name.startswith("fgm:"):
        try:
            rho1 = float(name.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"cannot parse coefficient in fixture name {name!r}") from None
        uniform = MarginalSpec("uniform", (0.0, 1.0))
        model = build_model(uniform, uniform, (rho1,))
        return Fixture(
            name=name,
            kind="model",
            reference_maxcorr=abs(rho1),
            default_grid=DEFAULT_MODEL_GRID,
            model=model,
        )
    raise ValueError(f"unknown fixture {name!r}; expected disc, pball:p, fourpoint or fgm:rho1")
