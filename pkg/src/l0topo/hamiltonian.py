"""Pointwise control laws and the associated Hamiltonian ``hbar(p) = min_u p*u + g(u)``."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidArgument, UnsupportedOperation


@dataclass(frozen=True)
class ControlLaw:
    """``g(u) = alpha/2 u^2`` restricted to ``[ua, ub]``, or the binary law ``u = 1``.

    For the quadratic law the strong convexity modulus is ``alpha``.
    """

    kind: str = "quadratic_box"
    alpha: float = 1.0
    ua: float = -math.inf
    ub: float = math.inf

    def __post_init__(self):
        if self.kind not in ("quadratic_box", "binary_fixed_one"):
            raise InvalidArgument(f"unknown control law {self.kind!r}")
        if self.kind == "quadratic_box":
            if not self.alpha > 0:
                raise InvalidArgument("alpha must be positive")
            if not self.ua < 0 < self.ub:
                raise InvalidArgument("box must contain 0 in its interior")

    @classmethod
    def quadratic_box(cls, alpha: float, ua: float, ub: float) -> ControlLaw:
        return cls("quadratic_box", float(alpha), float(ua), float(ub))

    @classmethod
    def binary(cls) -> ControlLaw:
        return cls("binary_fixed_one", 0.0, 1.0, 1.0)

    @property
    def is_binary(self) -> bool:
        return self.kind == "binary_fixed_one"

    @property
    def mu(self) -> float:
        return self.alpha

    @property
    def code(self) -> int:
        return kernels.BINARY if self.is_binary else kernels.QUADRATIC_BOX

    def g(self, u):
        """Cost of a control value; ``inf`` outside the box."""
        u = np.asarray(u, dtype=float)
        if self.is_binary:
            return np.zeros_like(u)
        val = 0.5 * self.alpha * u * u
        return np.where((u >= self.ua) & (u <= self.ub), val, np.inf)


def pointwise_minimizer(law: ControlLaw, p):
    """Minimizer of ``p*u + g(u)``: ``clip(-p/alpha, ua, ub)``."""
    if law.is_binary:
        raise UnsupportedOperation("the binary law has no pointwise minimization")
    out = kernels.pointwise_minimizer(np.asarray(p, dtype=float), law.alpha, law.ua, law.ub)
    return float(out) if np.ndim(p) == 0 else out


def hbar(law: ControlLaw, p):
    """``min_u p*u + g(u)``.  For the binary law this is ``p`` itself."""
    arr = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidArgument("hbar needs finite arguments")
    out = kernels.hbar(arr, law.code, law.alpha, law.ua, law.ub)
    return float(out) if np.ndim(p) == 0 else out


def hbar_lipschitz_check(law: ControlLaw, p1: float, p2: float) -> bool:
    """Check ``|hbar(p1) - hbar(p2)| <= |p1 - p2| * max(|u1|, |u2|)``."""
    if law.is_binary:
        raise UnsupportedOperation("Lipschitz bound is stated for the quadratic law")
    u1 = pointwise_minimizer(law, p1)
    u2 = pointwise_minimizer(law, p2)
    lhs = abs(hbar(law, p1) - hbar(law, p2))
    rhs = abs(p1 - p2) * max(abs(u1), abs(u2))
    # rounding slack relative to the magnitudes involved
    slack = 4 * np.finfo(float).eps * (abs(hbar(law, p1)) + abs(hbar(law, p2)) + rhs)
    return bool(lhs <= rhs + slack)
