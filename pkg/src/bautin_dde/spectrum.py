"""Characteristic roots of the linearized delay model and the Hopf curve.

Linearizing around the positive equilibrium x2 gives

    z'(t) = -(B1 + delta) z(t) + k B1 z(t - r),

whose eigenvalues solve the transcendental equation

    lambda + delta + B1 = k B1 exp(-lambda r).

A purely imaginary pair +/- i*omega exists when (k B1)^2 > (delta + B1)^2;
solving the real and imaginary parts simultaneously yields the delay r* at
which the pair crosses the axis, as a function of delta.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

from .model import ModelParams, b1 as model_b1

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 100


class NoHopfError(ValueError):
    """No purely imaginary eigenvalue pair exists at the requested delta."""


class RootConvergenceError(RuntimeError):
    """Newton iteration failed; carries the last iterate and residual."""

    def __init__(self, message: str, last_iterate: complex, residual: float):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


@dataclass(frozen=True)
class Eigenvalue:
    """Leading characteristic root mu + i*omega (omega >= 0 by conjugacy)."""

    mu: float
    omega: float

    @property
    def lam(self) -> complex:
        return complex(self.mu, self.omega)


@dataclass(frozen=True)
class HopfPoint:
    """A point (delta, r*) on the Hopf curve with crossing frequency omega*."""

    delta: float
    r_star: float
    omega_star: float


@dataclass(frozen=True)
class HopfCurveSample:
    """One delta sample of the curve; `error` is set when no point exists there."""

    delta: float
    point: Optional[HopfPoint]
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.point is not None


def char_residual_raw(lam: complex, delta: float, b1: float, k: float,
                      r: float) -> complex:
    """lambda + delta + B1 - k*B1*exp(-lambda*r) for explicitly given coefficients."""
    return lam + delta + b1 - k * b1 * cmath.exp(-lam * r)


def char_residual(lam: complex, params: ModelParams,
                  b1: float | None = None) -> complex:
    """Residual of the characteristic equation; zero iff lam is a root.

    `b1` overrides the linearization coefficient (handy for synthetic tests);
    by default it is computed from params, which requires feasibility.
    """
    if b1 is None:
        b1 = model_b1(params)
    return char_residual_raw(lam, params.delta, b1, params.k, params.r)


def _char_derivative(lam: complex, delta: float, b1: float, k: float,
                     r: float) -> complex:
    return 1.0 + r * k * b1 * cmath.exp(-lam * r)


def leading_root(params: ModelParams, guess: complex,
                 b1: float | None = None) -> Eigenvalue:
    """Polish `guess` to a characteristic root by damped Newton iteration.

    Steps are halved while they fail to reduce the residual norm; converges
    to |residual| < 1e-12 or raises RootConvergenceError.  The returned root
    has omega >= 0 (the conjugate is a root too).
    """
    if b1 is None:
        b1 = model_b1(params)
    delta, k, r = params.delta, params.k, params.r

    lam = complex(guess)
    res = char_residual_raw(lam, delta, b1, k, r)
    for _ in range(NEWTON_MAX_ITER):
        if abs(res) < NEWTON_TOL:
            break
        deriv = _char_derivative(lam, delta, b1, k, r)
        if deriv == 0:
            raise RootConvergenceError("Newton derivative vanished",
                                       lam, abs(res))
        step = res / deriv
        # damped update: halve until the residual actually decreases;
        # an overflowing exp means the step is far too large
        factor = 1.0
        for _ in range(60):
            candidate = lam - factor * step
            try:
                cand_res = char_residual_raw(candidate, delta, b1, k, r)
                cand_norm = abs(cand_res)
            except OverflowError:
                cand_norm = math.inf
            if cand_norm < abs(res):
                lam, res = candidate, cand_res
                break
            factor *= 0.5
        else:
            raise RootConvergenceError(
                "damping failed to reduce the residual", lam, abs(res))
    else:
        raise RootConvergenceError(
            f"no convergence after {NEWTON_MAX_ITER} iterations",
            lam, abs(res))
    if lam.imag < 0.0:
        lam = lam.conjugate()
    return Eigenvalue(mu=lam.real, omega=lam.imag)


def hopf_omega(delta: float, b1: float, k: float) -> float:
    """Crossing frequency omega* = sqrt((k*B1)^2 - (delta+B1)^2)."""
    disc = (k * b1) ** 2 - (delta + b1) ** 2
    if disc <= 0.0:
        raise NoHopfError(
            f"(k*B1)^2 - (delta+B1)^2 = {disc} <= 0: no imaginary pair")
    return math.sqrt(disc)


def hopf_r(delta: float, params: ModelParams) -> HopfPoint:
    """Smallest positive delay at which the leading pair is purely imaginary.

    `params` supplies beta0, n and k; its own delta and r fields are ignored.
    Both defining conditions are enforced:

        k B1 cos(omega r) = delta + B1      (real part)
        k B1 sin(omega r) = -omega          (imaginary part)

    arccos fixes the principal angle theta in [0, pi]; the sine condition
    selects theta/omega when k*B1 < 0 and (2*pi - theta)/omega otherwise.
    """
    work = params.replace(delta=delta)
    b1 = model_b1(work)
    omega = hopf_omega(delta, b1, work.k)
    kb1 = work.k * b1
    theta = math.acos((delta + b1) / kb1)
    if kb1 < 0.0:
        r_star = theta / omega
    else:
        r_star = (2.0 * math.pi - theta) / omega
    return HopfPoint(delta=delta, r_star=r_star, omega_star=omega)


def hopf_curve(delta_lo: float, delta_hi: float, n_samples: int,
               params: ModelParams) -> list[HopfCurveSample]:
    """Sample the Hopf curve uniformly on [delta_lo, delta_hi].

    Infeasible or no-Hopf samples are flagged in the returned list rather
    than dropped.  n_samples == 1 samples delta_lo.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if delta_lo > delta_hi:
        raise ValueError("delta_lo must be <= delta_hi")
    if n_samples == 1:
        deltas = [delta_lo]
    else:
        step = (delta_hi - delta_lo) / (n_samples - 1)
        deltas = [delta_lo + i * step for i in range(n_samples)]
        deltas[-1] = delta_hi
    samples = []
    for d in deltas:
        try:
            samples.append(HopfCurveSample(d, hopf_r(d, params)))
        except (NoHopfError, ValueError) as exc:
            samples.append(HopfCurveSample(d, None, str(exc)))
    return samples


def hopf_curve_csv(samples: list[HopfCurveSample]) -> str:
    """CSV of the successful samples, header `delta,r_star,omega_star`."""
    lines = ["delta,r_star,omega_star"]
    for s in samples:
        if s.ok:
            lines.append(f"{s.delta!r},{s.point.r_star!r},{s.point.omega_star!r}")
    return "\n".join(lines) + "\n"


def leading_eigenvalue(params: ModelParams) -> Eigenvalue:
    """Leading root at `params`, seeded with i*omega*(delta) from the Hopf formula."""
    b1 = model_b1(params)
    omega = hopf_omega(params.delta, b1, params.k)
    return leading_root(params, complex(0.0, omega), b1=b1)
