"""Experiment configuration: JSON loading, schema validation, measure construction.

Boundary positions are arc-length coordinates along the boundary chain
(the x coordinate in 1D; counterclockwise from the origin corner in 2D) and
snap to the nearest boundary node, lowest index on ties.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

import jsonschema

from .checks import DEFAULT_T_GRID, DEFAULT_TOL
from .measures import BoundaryMeasure, ConstantKernel, JumpMeasure, TruncatedFractionalKernel, ZeroKernel
from .mesh import Mesh, build_interval_mesh, build_rectangle_mesh

DEFAULT_TOLERANCES = {
    "propagator": DEFAULT_TOL,
    "eigen_residual": 1e-9,
    "eigen_oracle": 1e-3,
    "monotone": 1e-12,
    "gamma": 1e-8,
    "h1_floor": 0.5,
}


class ConfigError(ValueError):
    """Invalid configuration; ``path`` locates the offending field."""

    def __init__(self, path, message):
        self.path = "/".join(str(p) for p in path) or "<root>"
        super().__init__(f"{self.path}: {message}")


def _schema() -> dict:
    return json.loads(resources.files("robinlab").joinpath("config_schema.json").read_text())


@dataclass
class ExperimentConfig:
    experiment: str
    domain: dict
    kappa: dict = field(default_factory=dict)
    theta: dict = field(default_factory=dict)
    t_grid: list = field(default_factory=lambda: list(DEFAULT_T_GRID))
    scalings: list = field(default_factory=lambda: [1.0, 10.0, 100.0, 1000.0])
    lam: float = 1.0
    f: float | None = None
    levels: int = 5
    capacity_positions: list = field(default_factory=lambda: [0.0])
    n_eigenvalues: int = 3
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    output: str = "out"

    def __post_init__(self):
        self.tolerances = {**DEFAULT_TOLERANCES, **self.tolerances}

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment, "domain": self.domain, "kappa": self.kappa, "theta": self.theta,
            "t_grid": self.t_grid, "scalings": self.scalings, "lam": self.lam, "f": self.f,
            "levels": self.levels, "capacity_positions": self.capacity_positions,
            "n_eigenvalues": self.n_eigenvalues, "seed": self.seed, "tolerances": self.tolerances,
        }

    def build_mesh(self) -> Mesh:
        d = self.domain
        if d["type"] == "interval":
            return build_interval_mesh(d["n"], d.get("length", 1.0))
        return build_rectangle_mesh(d["nx"], d["ny"], d.get("lx", 1.0), d.get("ly", 1.0))

    def build_kappa(self, mesh: Mesh) -> BoundaryMeasure:
        kappa = BoundaryMeasure.uniform(mesh, self.kappa.get("density", 0.0))
        atoms = {}
        for a in self.kappa.get("atoms", []):
            node = mesh.node_at_arclength(a["position"])
            atoms[node] = atoms.get(node, 0.0) + float(a["weight"])
        return BoundaryMeasure(mesh, kappa.segment_density, kappa.node_density, atoms)

    def build_theta(self, mesh: Mesh) -> JumpMeasure:
        kernel_cfg = self.theta.get("kernel", {"type": "zero"})
        if kernel_cfg["type"] == "zero":
            kernel = ZeroKernel()
        elif kernel_cfg["type"] == "constant":
            kernel = ConstantKernel(float(kernel_cfg["c"]))
        else:
            kernel = TruncatedFractionalKernel(float(kernel_cfg["s"]), float(kernel_cfg["eps"]), mesh.dim,
                                               float(kernel_cfg.get("scale", 1.0)))
        pairs = []
        for k, pr in enumerate(self.theta.get("pairs", [])):
            p, q = mesh.node_at_arclength(pr["p"]), mesh.node_at_arclength(pr["q"])
            if p == q:
                raise ConfigError(("theta", "pairs", k), f"positions {pr['p']} and {pr['q']} snap to the same "
                                  f"boundary node {p}; pairs must avoid the diagonal")
            pairs.append((p, q, float(pr["weight"])))
        return JumpMeasure(kernel, tuple(pairs))


def _reject_constant(name):
    raise ValueError(f"non-finite number {name} is not allowed")


def parse_config(data: dict) -> ExperimentConfig:
    """Validate a decoded JSON document and build the config.

    Raises :class:`ConfigError` before any computation starts.
    """
    validator = jsonschema.Draft202012Validator(_schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        best = jsonschema.exceptions.best_match(errors)
        raise ConfigError(list(best.absolute_path), best.message)
    cfg = ExperimentConfig(**{k: v for k, v in data.items()})
    try:
        mesh = cfg.build_mesh()
        kappa = cfg.build_kappa(mesh)
        theta = cfg.build_theta(mesh)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError([], str(exc)) from None
    if cfg.experiment in ("sandwich", "convergence") and mesh.interior_nodes.size == 0:
        raise ConfigError(["domain"], "the Dirichlet comparison needs at least one interior node")
    if cfg.experiment == "convergence":
        from .convergence import penalty_is_dirichlet

        if len(cfg.scalings) < 2:
            raise ConfigError(["scalings"], "a convergence study needs at least two scalings")
        if not penalty_is_dirichlet(kappa, theta, mesh):
            raise ConfigError(["kappa"], "the pair does not charge every boundary node, so the scaled "
                              "resolvents do not converge to the Dirichlet resolvent on this mesh")
    if cfg.experiment == "capacity" and cfg.domain["type"] == "rectangle" and cfg.levels > 7:
        raise ConfigError(["levels"], "more than 7 refinement levels of a rectangle exceeds desk scale")
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh, parse_constant=_reject_constant)
    except OSError as exc:
        raise ConfigError([], f"cannot read config: {exc}") from None
    except ValueError as exc:
        raise ConfigError([], f"invalid JSON: {exc}") from None
    return parse_config(data)
