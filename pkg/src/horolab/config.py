"""Strict experiment configuration.

A config is one JSON document naming a seed, a space, an optional map, one
experiment and the output paths.  Unknown keys are rejected everywhere.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, ValidationError

from .errors import ConfigInvalid
from .geometry import Ellipsoid, PBall, Polytope
from .maps import (
    Composition,
    GeodesicPull,
    Identity,
    KleinIsometry,
    MatrixProjective,
    MobiusDisc,
    Rotation,
    conjugate_projective,
    boost_matrix,
)
from .metrics import MetricSpace

Vector = list[float]


class Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


# ---------------------------------------------------------------------------
# Bodies and spaces


class BallBody(Strict):
    type: Literal["ball"]
    dim: PositiveInt = 2
    radius: PositiveFloat = 1.0
    center: Optional[Vector] = None


class EllipseBody(Strict):
    type: Literal["ellipsoid"]
    semi_axes: list[PositiveFloat]
    center: Optional[Vector] = None


class BoxBody(Strict):
    type: Literal["box"]
    lower: Vector
    upper: Vector


class SimplexBody(Strict):
    type: Literal["simplex"]
    dim: PositiveInt = 2


class PolytopeBody(Strict):
    type: Literal["polytope"]
    normals: list[Vector]
    offsets: Vector


class PBallBody(Strict):
    type: Literal["pball"]
    p: float = Field(gt=1.0)
    radius: PositiveFloat = 1.0
    center: Vector = [0.0, 0.0]


Body = Annotated[
    Union[BallBody, EllipseBody, BoxBody, SimplexBody, PolytopeBody, PBallBody],
    Field(discriminator="type"),
]


class SpaceConfig(Strict):
    kind: Literal["hilbert_body", "hilbert_cone", "thompson_cone", "poincare_disc"]
    body: Optional[Body] = None
    dim: Optional[PositiveInt] = None
    base_point: Optional[Vector] = None


def build_body(cfg):
    if cfg.type == "ball":
        return Ellipsoid.ball(cfg.dim, cfg.radius, cfg.center)
    if cfg.type == "ellipsoid":
        return Ellipsoid.axes(cfg.semi_axes, cfg.center)
    if cfg.type == "box":
        return Polytope.box(cfg.lower, cfg.upper)
    if cfg.type == "simplex":
        return Polytope.simplex(cfg.dim)
    if cfg.type == "polytope":
        return Polytope(np.array(cfg.normals), np.array(cfg.offsets))
    return PBall(np.array(cfg.center), cfg.radius, cfg.p)


def build_space(cfg):
    if cfg.kind == "poincare_disc":
        return MetricSpace.poincare_disc(cfg.base_point)
    if cfg.kind in ("hilbert_cone", "thompson_cone"):
        if cfg.dim is None:
            raise ConfigInvalid("space.dim", "cone spaces need a dimension")
        make = MetricSpace.hilbert_cone if cfg.kind == "hilbert_cone" else MetricSpace.thompson_cone
        return make(cfg.dim, cfg.base_point)
    if cfg.body is None:
        raise ConfigInvalid("space.body", "hilbert_body needs a body")
    return MetricSpace.hilbert(build_body(cfg.body), cfg.base_point)


# ---------------------------------------------------------------------------
# Maps


class MatrixMap(Strict):
    type: Literal["matrix"]
    matrix: list[Vector]


class KleinMap(Strict):
    type: Literal["klein"]
    matrix: list[Vector]


class BoostMap(Strict):
    type: Literal["boost"]
    s: float
    dim: PositiveInt = 2
    axis: int = 0
    # conjugate by x -> linear x + shift, carrying the boost to an affine image
    linear: Optional[list[Vector]] = None
    shift: Optional[Vector] = None


class MobiusMap(Strict):
    type: Literal["mobius"]
    a: Vector = Field(min_length=2, max_length=2)
    theta: float = 0.0


class ParabolicMap(Strict):
    type: Literal["parabolic"]
    a: float


class RotationMap(Strict):
    type: Literal["rotation"]
    angle: float
    center: Vector = [0.0, 0.0]


class PullMap(Strict):
    type: Literal["pull"]
    target: Vector
    step: float = Field(gt=0.0, le=1.0)


class IdentityMap(Strict):
    type: Literal["identity"]


class ComposeMap(Strict):
    type: Literal["compose"]
    maps: list["MapConfig"] = Field(min_length=1)


MapConfig = Annotated[
    Union[MatrixMap, KleinMap, BoostMap, MobiusMap, ParabolicMap, RotationMap, PullMap, IdentityMap, ComposeMap],
    Field(discriminator="type"),
]
ComposeMap.model_rebuild()


def build_map(cfg):
    if cfg.type == "matrix":
        return MatrixProjective(np.array(cfg.matrix))
    if cfg.type == "klein":
        return KleinIsometry(np.array(cfg.matrix))
    if cfg.type == "boost":
        m = boost_matrix(cfg.s, cfg.dim, cfg.axis)
        if cfg.linear is not None:
            m = conjugate_projective(m, np.array(cfg.linear), None if cfg.shift is None else np.array(cfg.shift))
        return KleinIsometry(m)
    if cfg.type == "mobius":
        return MobiusDisc(complex(*cfg.a), cfg.theta)
    if cfg.type == "parabolic":
        return MobiusDisc.parabolic(cfg.a)
    if cfg.type == "rotation":
        return Rotation(cfg.angle, tuple(cfg.center))
    if cfg.type == "pull":
        return GeodesicPull(np.array(cfg.target), cfg.step)
    if cfg.type == "identity":
        return Identity()
    return Composition(tuple(build_map(m) for m in cfg.maps))


# ---------------------------------------------------------------------------
# Experiments


class Grid(Strict):
    lower: Vector
    upper: Vector
    size: PositiveInt


class Starts(Strict):
    points: Optional[list[Vector]] = None
    grid: Optional[Grid] = None


class ThresholdConfig(Strict):
    r_bound: PositiveFloat = 50.0
    d_escape: PositiveFloat = 25.0
    warmup: PositiveInt = 100
    window: PositiveInt = 50
    n_max: PositiveInt = 100_000
    cluster_tol: PositiveFloat = 1e-3


class DistExperiment(Strict):
    kind: Literal["dist"]
    x: Vector
    y: Vector


class OrbitExperiment(Strict):
    kind: Literal["orbit"]
    starts: Starts
    thresholds: ThresholdConfig = ThresholdConfig()


class DWExperiment(Strict):
    kind: Literal["dw"]
    starts: Starts
    n: PositiveInt
    tol: PositiveFloat = 1e-3
    thresholds: ThresholdConfig = ThresholdConfig()


class AxiomsExperiment(Strict):
    kind: Literal["axioms"]
    checks: list[Literal["axiom1", "B", "Bprime", "axiom4", "C"]] = Field(min_length=1)
    trials: PositiveInt = 10_000
    targets: Optional[list[Vector]] = None
    tol: PositiveFloat = 1e-9


class HoroballExperiment(Strict):
    kind: Literal["horoball"]
    xi: Vector
    z0: Optional[Vector] = None
    radii: list[PositiveFloat] = [1.0, 2.0, 4.0]
    invariance_radius: float = 0.0
    k: PositiveInt = 10
    samples: PositiveInt = 200
    tol: PositiveFloat = 1e-3


class GromovExperiment(Strict):
    kind: Literal["gromov"]
    quadruples: PositiveInt = 100_000
    orbit_steps: PositiveInt = 400
    start: Optional[Vector] = None


class AttractorExperiment(Strict):
    kind: Literal["attractor"]
    starts: Starts
    n: PositiveInt
    eps_acc: PositiveFloat = 1e-3


Experiment = Annotated[
    Union[DistExperiment, OrbitExperiment, DWExperiment, AxiomsExperiment,
          HoroballExperiment, GromovExperiment, AttractorExperiment],
    Field(discriminator="kind"),
]

KINDS = ("dist", "orbit", "dw", "axioms", "horoball", "gromov", "attractor")


class OutputConfig(Strict):
    report: Optional[str] = None
    orbits: Optional[str] = None
    plot: Optional[str] = None


class ExperimentConfig(Strict):
    seed: int = 0
    space: SpaceConfig
    map: Optional[MapConfig] = None
    experiment: Experiment
    output: OutputConfig = OutputConfig()


def _error_path(err):
    first = err.errors()[0]
    loc = ".".join(str(p) for p in first["loc"]) or "<root>"
    return loc, first["msg"]


def parse_config(data):
    """Validate a config given as a dict, a JSON string or a path."""
    if isinstance(data, Path) or (isinstance(data, str) and not data.lstrip().startswith("{")):
        try:
            data = Path(data).read_text()
        except OSError as exc:
            raise ConfigInvalid(str(data), f"cannot read config: {exc}") from exc
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ConfigInvalid("<root>", f"not valid JSON: {exc}") from exc
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigInvalid(*_error_path(exc)) from exc
