"""Delayed hematopoiesis model: right-hand side, equilibria, linearization slope.

The state x(t) is the (dimensionless) resting-cell density, governed by

    x'(t) = -[beta(x(t)) + delta] * x(t) + k * beta(x(t-r)) * x(t-r),

with the Hill-type production rate beta(x) = beta0 / (1 + x^n).  The model
has the trivial equilibrium x = 0 and, when the parameters allow it, a
positive equilibrium x2.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Literal


class InfeasibleParamsError(ValueError):
    """Raised when an operation needs the positive equilibrium but none exists."""


@dataclass(frozen=True)
class ModelParams:
    """The five positive parameters (beta0, n, delta, k, r).

    beta0 : maximal production rate
    n     : Hill exponent
    delta : decay rate
    k     : amplification factor, constrained to (0, 2)
    r     : delay
    """

    beta0: float
    n: float
    delta: float
    k: float
    r: float

    def __post_init__(self):
        for name in ("beta0", "n", "delta", "k", "r"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0.0:
                raise ValueError(f"{name} must be a positive finite real, got {value!r}")
        if self.k >= 2.0:
            raise ValueError(f"k must be < 2, got {self.k!r}")

    @property
    def feasible(self) -> bool:
        """True iff the positive equilibrium x2 exists."""
        return (self.beta0 / self.delta) * (self.k - 1.0) - 1.0 > 0.0

    def replace(self, **changes) -> "ModelParams":
        fields = {"beta0": self.beta0, "n": self.n, "delta": self.delta,
                  "k": self.k, "r": self.r}
        fields.update(changes)
        return ModelParams(**fields)

    def to_dict(self) -> dict:
        return {"beta0": self.beta0, "n": self.n, "delta": self.delta,
                "k": self.k, "r": self.r}

    @classmethod
    def from_dict(cls, data: dict) -> "ModelParams":
        extra = set(data) - {"beta0", "n", "delta", "k", "r"}
        if extra:
            raise ValueError(f"unknown model parameter keys: {sorted(extra)}")
        missing = {"beta0", "n", "delta", "k", "r"} - set(data)
        if missing:
            raise ValueError(f"missing model parameter keys: {sorted(missing)}")
        return cls(**{key: float(value) for key, value in data.items()})

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "ModelParams":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class Equilibrium:
    value: float
    kind: Literal["trivial", "nontrivial"]


def beta(x: float, params: ModelParams) -> float:
    """Production rate beta0 / (1 + x^n); strictly decreasing on x >= 0."""
    if x < 0.0:
        raise ValueError(f"beta is defined for x >= 0, got {x!r}")
    return params.beta0 / (1.0 + x**params.n)


def beta_prime(x: float, params: ModelParams) -> float:
    """Derivative of beta: -beta0 * n * x^(n-1) / (1 + x^n)^2."""
    if x < 0.0:
        raise ValueError(f"beta_prime is defined for x >= 0, got {x!r}")
    if x == 0.0:
        # x^(n-1) at 0: zero for n > 1, one for n == 1, diverges for n < 1
        if params.n > 1.0:
            return 0.0
        if params.n == 1.0:
            return -params.beta0
        raise ValueError("beta_prime diverges at x = 0 for n < 1")
    num = -params.beta0 * params.n * x ** (params.n - 1.0)
    return num / (1.0 + x**params.n) ** 2


def rhs(x_now: float, x_delayed: float, params: ModelParams) -> float:
    """Model right-hand side at current state x_now and delayed state x_delayed."""
    if x_now < 0.0 or x_delayed < 0.0:
        raise ValueError("model states must be nonnegative")
    return (-(beta(x_now, params) + params.delta) * x_now
            + params.k * beta(x_delayed, params) * x_delayed)


def make_rhs(params: ModelParams):
    """Unchecked rhs closure for the integrator hot loop.

    Skips the nonnegativity guard so that transient sub-zero excursions of
    intermediate Runge-Kutta stages do not abort a run; for even integer n
    the formula itself remains well defined there.
    """
    beta0, n, delta, k = params.beta0, params.n, params.delta, params.k

    def f(x_now: float, x_delayed: float) -> float:
        b_now = beta0 / (1.0 + math.pow(x_now, n))
        b_del = beta0 / (1.0 + math.pow(x_delayed, n))
        return -(b_now + delta) * x_now + k * b_del * x_delayed

    return f


def feasibility(params: ModelParams) -> bool:
    """True iff (beta0/delta)(k-1) - 1 > 0, i.e. x2 exists."""
    return params.feasible


def x2(params: ModelParams) -> float:
    """The positive equilibrium ((beta0/delta)(k-1) - 1)^(1/n)."""
    arg = (params.beta0 / params.delta) * (params.k - 1.0) - 1.0
    if arg <= 0.0:
        raise InfeasibleParamsError(
            f"no positive equilibrium: (beta0/delta)(k-1)-1 = {arg} <= 0")
    return arg ** (1.0 / params.n)


def equilibria(params: ModelParams) -> list[Equilibrium]:
    """All equilibria, ascending; x2 is included only when feasible."""
    points = [Equilibrium(0.0, "trivial")]
    if params.feasible:
        points.append(Equilibrium(x2(params), "nontrivial"))
    return points


def b1(params: ModelParams) -> float:
    """Combined feedback slope B1 = beta'(x2) * x2 + beta(x2) at the positive equilibrium."""
    x = x2(params)
    return beta_prime(x, params) * x + beta(x, params)
