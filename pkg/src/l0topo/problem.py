"""Problem definitions, experiment presets and the key=value config format."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidArgument
from .fem import PdeKind, interpolate
from .hamiltonian import ControlLaw
from .mesh import Mesh

PRESETS = ("l0_elliptic", "l0_elliptic_alt", "l0_neumann_unsolvable", "binary")
YD_KINDS = ("product_wave", "constant", "file")


def product_wave(x1, x2):
    return 10.0 * x1 * np.sin(5.0 * x1) * np.cos(7.0 * x2)


@dataclass(frozen=True)
class ProblemSpec:
    """Everything that defines the continuous problem.

    ``beta`` is a constant or a cellwise array; for the binary law it holds
    the L1 weight of the control.  ``params`` keeps the decimal strings the
    problem was built from so that output metadata echoes them verbatim.
    """

    pde: PdeKind
    law: ControlLaw
    beta: float | np.ndarray
    yd_kind: str = "constant"
    yd_value: float = 0.0
    yd_nodal: np.ndarray | None = field(default=None, repr=False, compare=False)
    domain: tuple[float, float] = (1.0, 1.0)
    preset_name: str | None = None
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "pde", PdeKind(self.pde))
        if self.yd_kind not in YD_KINDS:
            raise InvalidArgument(f"unknown y_d kind {self.yd_kind!r}")
        if self.yd_kind == "file" and self.yd_nodal is None:
            raise InvalidArgument("y_d kind 'file' needs nodal values")
        if np.any(np.asarray(self.beta) < 0):
            raise InvalidArgument("beta must be nonnegative")
        lx, ly = self.domain
        if not (lx > 0 and ly > 0):
            raise InvalidArgument("domain sides must be positive")

    def yd_on(self, mesh: Mesh) -> np.ndarray:
        if self.yd_kind == "product_wave":
            return interpolate(mesh, product_wave)
        if self.yd_kind == "constant":
            return interpolate(mesh, self.yd_value)
        yd = np.asarray(self.yd_nodal, dtype=float)
        if yd.shape != (mesh.n_nodes,):
            raise InvalidArgument(
                f"external y_d has {yd.size} values, mesh has {mesh.n_nodes} nodes"
            )
        return yd

    def beta_on(self, mesh: Mesh) -> np.ndarray:
        b = np.asarray(self.beta, dtype=float)
        if b.ndim == 0:
            return np.full(mesh.n_cells, float(b))
        if b.shape != (mesh.n_cells,):
            raise InvalidArgument("cellwise beta does not match the mesh")
        return b


def _num(s: str) -> float:
    return float(s)


def preset(name: str) -> ProblemSpec:
    if name == "l0_elliptic":
        params = dict(pde="dirichlet_laplace", law="quadratic_box", alpha="0.01",
                      beta="0.01", ua="-4", ub="4", yd="product_wave", lx="1", ly="1")
    elif name == "l0_elliptic_alt":
        params = dict(pde="dirichlet_laplace", law="quadratic_box", alpha="0.001",
                      beta="0.1", ua="-40", ub="40", yd="product_wave", lx="1", ly="1")
    elif name == "l0_neumann_unsolvable":
        params = dict(pde="neumann_helmholtz", law="quadratic_box", alpha="1000",
                      beta="0.01", ua="-inf", ub="inf", yd="unsolvable_constant",
                      lx="1", ly="1")
    elif name == "binary":
        # domain not given with the data; (0,2)^2 is inferred from the reported set sizes
        params = dict(pde="dirichlet_laplace", law="binary_fixed_one", beta="0.002",
                      yd="0.05", lx="2", ly="2", domain_inferred="true")
    else:
        raise InvalidArgument(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return spec_from_params(params, preset_name=name)


def unsolvable_target(alpha: float, beta: float) -> float:
    """Constant desired state that makes the Neumann problem unsolvable."""
    return -math.sqrt(beta / alpha) - math.sqrt(2.0 * alpha * beta)


def spec_from_params(params: dict, preset_name: str | None = None) -> ProblemSpec:
    """Build a spec from string parameters (config file or preset table)."""
    try:
        law_kind = params.get("law", "quadratic_box")
        if law_kind == "binary_fixed_one":
            law = ControlLaw.binary()
        else:
            law = ControlLaw.quadratic_box(
                _num(params["alpha"]), _num(params.get("ua", "-inf")), _num(params.get("ub", "inf"))
            )
        beta = _num(params["beta"])
        yd = params.get("yd", "0")
        yd_nodal = None
        if yd == "product_wave":
            yd_kind, yd_value = "product_wave", 0.0
        elif yd == "unsolvable_constant":
            yd_kind, yd_value = "constant", unsolvable_target(law.alpha, beta)
        elif yd.startswith("file:"):
            yd_kind, yd_value = "file", 0.0
            yd_nodal = read_nodal_csv(yd[len("file:"):])
        else:
            yd_kind, yd_value = "constant", _num(yd)
        domain = (_num(params.get("lx", "1")), _num(params.get("ly", "1")))
        pde = PdeKind(params.get("pde", "dirichlet_laplace"))
    except KeyError as exc:
        raise InvalidArgument(f"missing parameter {exc.args[0]!r}") from exc
    except ValueError as exc:
        raise InvalidArgument(str(exc)) from exc
    return ProblemSpec(
        pde=pde,
        law=law,
        beta=beta,
        yd_kind=yd_kind,
        yd_value=yd_value,
        yd_nodal=yd_nodal,
        domain=domain,
        preset_name=preset_name,
        params=dict(params),
    )


def read_nodal_csv(path) -> np.ndarray:
    data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    if data.shape[1] == 2:
        order = np.argsort(data[:, 0], kind="stable")
        return data[order, 1]
    return data[:, 0]


def parse_config(text: str) -> dict:
    """Parse flat ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidArgument(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def load_config(path) -> dict:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def format_config(params: dict) -> str:
    return "".join(f"{k}={v}\n" for k, v in params.items())
