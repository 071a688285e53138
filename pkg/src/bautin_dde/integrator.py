"""Method-of-steps integration of a single constant-delay equation.

The propagator is the explicit Bogacki-Shampine 3(2) embedded pair with
first-same-as-last stage reuse; dense output is the cubic Hermite built
from endpoint states and derivatives, which matches the third-order
accuracy of the propagation.  Steps never exceed the delay, so every
delayed lookup lands either in the stored history segment or in already
accepted mesh segments, and derivative discontinuities inherited from the
start of the run are pinned to the mesh at t = m*r for m = 1..4 (beyond
that the solution is smooth enough for a third-order method).
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .model import ModelParams, make_rhs

# number of multiples of the delay at which derivative discontinuities
# are forced onto the mesh
DISCONTINUITY_ORDERS = 4


class IntegrationError(RuntimeError):
    """Integration aborted; `t_last` is the last successfully reached time."""

    def __init__(self, message: str, t_last: float):
        super().__init__(f"{message} (last valid time t = {t_last})")
        self.t_last = t_last


@dataclass(frozen=True)
class HistoryFunction:
    """Initial segment of the solution: a continuous function on [-delay, 0]."""

    evaluator: Callable[[float], float]
    delay: float
    description: str = "custom"

    def __call__(self, s: float) -> float:
        slack = 1e-12 * (1.0 + self.delay)
        if s < -self.delay - slack or s > slack:
            raise ValueError(
                f"history argument {s} outside [-{self.delay}, 0]")
        s = min(0.0, max(-self.delay, s))
        return self.evaluator(s)

    @classmethod
    def constant(cls, value: float, delay: float) -> "HistoryFunction":
        return cls(lambda s: value, delay, description="constant")


@dataclass(frozen=True)
class IntegrationOptions:
    """Tolerances, step bounds and horizon for one integration run.

    `max_step` defaults to the delay itself (the largest causally safe
    step); `fixed_step` disables error control and marches with the given
    step, for convergence studies.
    """

    rel_tol: float = 1e-6
    abs_tol: float = 1e-9
    max_step: Optional[float] = None
    t_end: float = 3000.0
    fixed_step: Optional[float] = None
    first_step: Optional[float] = None

    def __post_init__(self):
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.t_end <= 0.0:
            raise ValueError("t_end must be positive")
        for name in ("max_step", "fixed_step", "first_step"):
            value = getattr(self, name)
            if value is not None and value <= 0.0:
                raise ValueError(f"{name} must be positive when given")

    def replace(self, **changes) -> "IntegrationOptions":
        fields = dict(rel_tol=self.rel_tol, abs_tol=self.abs_tol,
                      max_step=self.max_step, t_end=self.t_end,
                      fixed_step=self.fixed_step, first_step=self.first_step)
        fields.update(changes)
        return IntegrationOptions(**fields)


def _hermite(t0: float, t1: float, y0: float, y1: float, f0: float,
             f1: float, t: float) -> float:
    h = t1 - t0
    theta = (t - t0) / h
    a = 3.0 * (y1 - y0) - h * (2.0 * f0 + f1)
    b = 2.0 * (y0 - y1) + h * (f0 + f1)
    return y0 + theta * (h * f0 + theta * (a + theta * b))


class Trajectory:
    """Dense numerical solution on [0, t_end] plus its history on [-r, 0].

    Evaluation is exact (bit-for-bit) at mesh nodes and cubic-Hermite
    between them; the derivative is reconstructed through the model
    right-hand side rather than by differentiating the interpolant.
    """

    def __init__(self, ts: list[float], xs: list[float], fs: list[float],
                 history: HistoryFunction, delay: float,
                 rhs: Callable[[float, float], float],
                 params: Optional[ModelParams] = None):
        self.ts = ts
        self.xs = xs
        self.fs = fs
        self.history = history
        self.delay = delay
        self.rhs = rhs
        self.params = params

    @property
    def t0(self) -> float:
        return self.ts[0]

    @property
    def t_end(self) -> float:
        return self.ts[-1]

    def eval(self, t: float) -> float:
        if t < 0.0:
            return self.history(t)
        ts = self.ts
        if t > ts[-1]:
            slack = 1e-12 * (1.0 + abs(ts[-1]))
            if t > ts[-1] + slack:
                raise ValueError(f"t = {t} beyond trajectory end {ts[-1]}")
            return self.xs[-1]
        i = bisect_right(ts, t) - 1
        if i < 0:
            i = 0
        if t == ts[i]:
            return self.xs[i]
        if i + 1 < len(ts) and t == ts[i + 1]:
            return self.xs[i + 1]
        if i + 1 >= len(ts):
            return self.xs[-1]
        return _hermite(ts[i], ts[i + 1], self.xs[i], self.xs[i + 1],
                        self.fs[i], self.fs[i + 1], t)

    __call__ = eval

    def derivative(self, t: float) -> float:
        """x'(t) = rhs(x(t), x(t - r)); defined on [0, t_end]."""
        if t < 0.0 or t > self.t_end + 1e-12 * (1.0 + abs(self.t_end)):
            raise ValueError(f"derivative defined on [0, {self.t_end}], got {t}")
        return self.rhs(self.eval(t), self.eval(t - self.delay))

    def to_csv(self, times: Sequence[float]) -> str:
        """CSV `t,x,xdot` sampled at the given times."""
        lines = ["t,x,xdot"]
        for t in times:
            lines.append(f"{t!r},{self.eval(t)!r},{self.derivative(t)!r}")
        return "\n".join(lines) + "\n"


def _mesh_lookup(ts: list[float], xs: list[float], fs: list[float],
                 t: float) -> float:
    i = bisect_right(ts, t) - 1
    if t == ts[i]:
        return xs[i]
    if i + 1 >= len(ts):
        # causality guarantees t <= ts[-1]; equality was handled above
        raise AssertionError(f"delayed lookup at {t} beyond front {ts[-1]}")
    if t == ts[i + 1]:
        return xs[i + 1]
    return _hermite(ts[i], ts[i + 1], xs[i], xs[i + 1], fs[i], fs[i + 1], t)


def integrate_dde(rhs: Callable[[float, float], float], delay: float,
                  history: HistoryFunction, options: IntegrationOptions,
                  params: Optional[ModelParams] = None) -> Trajectory:
    """Integrate x'(t) = rhs(x(t), x(t - delay)) from the given history.

    The rhs is autonomous (time enters only through the states).  Raises
    IntegrationError on step-size underflow or a non-finite right-hand
    side; the error carries the last valid time.
    """
    if delay <= 0.0:
        raise ValueError("delay must be positive")
    if abs(history.delay - delay) > 1e-12 * (1.0 + delay):
        raise ValueError(
            f"history delay {history.delay} does not match delay {delay}")
    max_step = options.max_step if options.max_step is not None else delay
    if max_step > delay * (1.0 + 1e-12):
        raise ValueError(
            f"max_step = {max_step} exceeds the delay {delay}; delayed "
            "lookups would outrun the completed mesh")
    t_end = options.t_end

    # mesh-forced discontinuity points and the horizon
    breaks = [m * delay for m in range(1, DISCONTINUITY_ORDERS + 1)
              if m * delay < t_end]
    breaks.append(t_end)

    ts: list[float] = [0.0]
    xs: list[float] = [history(0.0)]

    def delayed(t: float) -> float:
        td = t - delay
        if td <= 0.0:
            return history(td)
        return _mesh_lookup(ts, xs, fs, td)

    def f(t: float, x: float) -> float:
        return rhs(x, delayed(t))

    fs: list[float] = []
    try:
        f0 = f(0.0, xs[0])
    except (ValueError, OverflowError) as exc:
        raise IntegrationError(f"right-hand side failed at start: {exc}", 0.0)
    if not math.isfinite(f0):
        raise IntegrationError("right-hand side not finite at start", 0.0)
    fs.append(f0)

    fixed = options.fixed_step
    if fixed is not None:
        h = min(fixed, max_step)
    else:
        h = options.first_step if options.first_step is not None \
            else min(max_step, delay / 10.0, t_end)

    t = 0.0
    x = xs[0]
    k1 = f0
    break_idx = 0
    rejections = 0

    while t < t_end:
        while breaks[break_idx] <= t:
            break_idx += 1
        next_break = breaks[break_idx]

        h = min(h, max_step)
        hit_break = t + h >= next_break
        h_step = next_break - t if hit_break else h
        if h_step < 1e-13 * max(1.0, abs(t)):
            raise IntegrationError("step size underflow", t)

        try:
            k2 = f(t + 0.5 * h_step, x + 0.5 * h_step * k1)
            k3 = f(t + 0.75 * h_step, x + 0.75 * h_step * k2)
            x_new = x + h_step * ((2.0 / 9.0) * k1 + (1.0 / 3.0) * k2
                                  + (4.0 / 9.0) * k3)
            t_new = next_break if hit_break else t + h_step
            k4 = f(t_new, x_new)
            finite = (math.isfinite(k2) and math.isfinite(k3)
                      and math.isfinite(k4) and math.isfinite(x_new))
        except (ValueError, OverflowError):
            finite = False

        if not finite:
            # shrink and retry; persistent failure ends in underflow above
            h = 0.5 * h_step
            rejections += 1
            if rejections > 200:
                raise IntegrationError("right-hand side not finite", t)
            continue

        if fixed is None:
            err = abs(h_step * ((-5.0 / 72.0) * k1 + (1.0 / 12.0) * k2
                                + (1.0 / 9.0) * k3 - (1.0 / 8.0) * k4))
            tol = options.abs_tol + options.rel_tol * max(abs(x), abs(x_new))
            if err > tol:
                factor = max(0.2, 0.9 * (tol / err) ** (1.0 / 3.0))
                h = h_step * factor
                rejections += 1
                if rejections > 200:
                    raise IntegrationError(
                        "error control failed to accept a step", t)
                continue
            rejections = 0
            factor = 5.0 if err == 0.0 else \
                min(5.0, max(0.2, 0.9 * (tol / err) ** (1.0 / 3.0)))
            h = h_step * factor
        else:
            h = fixed
            rejections = 0

        t, x, k1 = t_new, x_new, k4
        ts.append(t)
        xs.append(x)
        fs.append(k4)

    return Trajectory(ts, xs, fs, history, delay, rhs, params)


def integrate(params: ModelParams, history: HistoryFunction,
              options: IntegrationOptions) -> Trajectory:
    """Integrate the hematopoiesis model with the given history and options."""
    return integrate_dde(make_rhs(params), params.r, history, options,
                         params=params)
