"""Nelder-Mead downhill simplex for black-box objectives over R^d."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import ConfigError, NonFiniteObjective


@dataclass(frozen=True)
class SimplexConfig:
    alpha: float = 1.0  # reflection
    gamma: float = 2.0  # expansion
    rho: float = 0.5  # contraction
    sigma: float = 0.5  # shrink
    step: float = 0.5
    f_tol: float = 1e-8
    # without an extent check, two vertices straddling a symmetric minimum
    # with equal values would count as converged
    x_tol: float = 1e-6
    max_iter: int = 2000

    def validate(self) -> None:
        if not (self.alpha > 0 and self.gamma > 1 and 0 < self.rho < 1 and 0 < self.sigma < 1):
            raise ConfigError("simplex coefficients need alpha > 0, gamma > 1, 0 < rho < 1, 0 < sigma < 1")
        if self.max_iter < 1:
            raise ConfigError(f"max_iter must be >= 1, got {self.max_iter}")
        if not (self.f_tol > 0 and self.x_tol >= 0):
            raise ConfigError(f"need f_tol > 0 and x_tol >= 0, got {self.f_tol}, {self.x_tol}")
        if not self.step > 0:
            raise ConfigError(f"step must be > 0, got {self.step}")

    def halved(self) -> "SimplexConfig":
        return replace(self, step=self.step / 2)


@dataclass(frozen=True)
class MinimizeResult:
    argmin: np.ndarray
    value: float
    iterations: int
    converged: bool
    evaluations: int = 0


def minimize(objective: Callable[[np.ndarray], float], start, config: SimplexConfig | None = None) -> MinimizeResult:
    """Minimize ``objective`` starting from ``start``.

    The initial simplex is ``start`` plus ``config.step`` added to each
    coordinate in turn. Iteration stops once the spread of objective values
    over the simplex drops below ``config.f_tol`` while every vertex lies within
    ``config.x_tol`` (per coordinate) of the best one, or after
    ``config.max_iter`` iterations; in the latter case ``converged`` is False. Fully
    deterministic.

    Raises
    ------
    NonFiniteObjective
        If any evaluation returns NaN or +-Inf.
    """
    config = config or SimplexConfig()
    config.validate()
    x0 = [float(v) for v in np.asarray(start, dtype=float).reshape(-1)]
    d = len(x0)
    evals = 0
    to_array = np.array

    # vertices are plain lists: for the small d we care about this beats numpy
    def f(x):
        nonlocal evals
        evals += 1
        v = float(objective(to_array(x)))
        if not math.isfinite(v):
            raise NonFiniteObjective(f"objective returned {v} at {list(x)}")
        return v

    simplex = [x0]
    for i in range(d):
        vertex = x0[:]
        vertex[i] += config.step
        simplex.append(vertex)
    pts = sorted(((f(x), x) for x in simplex), key=_value)

    alpha, gamma, rho, sigma = config.alpha, config.gamma, config.rho, config.sigma
    iterations = 0
    converged = False
    while True:
        if pts[-1][0] - pts[0][0] < config.f_tol and _extent(pts) <= config.x_tol:
            converged = True
            break
        if iterations >= config.max_iter:
            break
        iterations += 1

        c = [sum(col) / d for col in zip(*(x for _, x in pts[:-1]))]
        f_worst, worst = pts[-1]
        xr = [cj + alpha * (cj - wj) for cj, wj in zip(c, worst)]
        fr = f(xr)
        accepted = None
        if fr < pts[0][0]:
            xe = [cj + gamma * (rj - cj) for cj, rj in zip(c, xr)]
            fe = f(xe)
            accepted = (fe, xe) if fe < fr else (fr, xr)
        elif fr < pts[-2][0]:
            accepted = (fr, xr)
        elif fr < f_worst:
            xc = [cj + rho * (rj - cj) for cj, rj in zip(c, xr)]
            fc = f(xc)
            if fc <= fr:
                accepted = (fc, xc)
        else:
            xc = [cj + rho * (wj - cj) for cj, wj in zip(c, worst)]
            fc = f(xc)
            if fc < f_worst:
                accepted = (fc, xc)

        if accepted is None:
            best = pts[0][1]
            shrunk = [[bj + sigma * (xj - bj) for bj, xj in zip(best, x)] for _, x in pts[1:]]
            pts = [pts[0]] + [(f(x), x) for x in shrunk]
        else:
            pts[-1] = accepted
        pts.sort(key=_value)

    value, argmin = pts[0]
    return MinimizeResult(np.array(argmin), value, iterations, converged, evals)


def _value(pt):
    return pt[0]


def _extent(pts) -> float:
    best = pts[0][1]
    return max((abs(xj - bj) for _, x in pts[1:] for xj, bj in zip(x, best)), default=0.0)
