"""Reference computations that share no solver code with the integrator.

The explicit run uses the same grid and boundary treatment but forward Euler
for every term, so it needs a diffusive time step and no linear solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numba import njit

from ._fastpow import fpow
from .grid import MassGrid
from .integrator import SchemeConfig, run_to_time
from .model import (InitialDataSpec, ModelParams, TransformedState, build_initial_data,
                    build_stationary)

DEFAULT_STEP_BUDGET = 10**8


class FiniteTimeDegeneracy(ArithmeticError):
    pass


class BudgetExceeded(RuntimeError):
    def __init__(self, required, budget):
        super().__init__(f"explicit run needs about {required} steps, budget is {budget}")
        self.required = required
        self.budget = budget


@dataclass(frozen=True)
class OracleReport:
    l2_diff: float
    linf_diff: float
    richardson_order: float = float("nan")


def riccati_exact(Q0, u_x, rho_l, t):
    """Solution of ``Q' = -rho_l Q^2 u_x`` with u_x held fixed."""
    Q0, u_x = np.asarray(Q0, dtype=float), np.asarray(u_x, dtype=float)
    den = 1.0 + rho_l * Q0 * u_x * t
    if np.any(den <= 0):
        raise FiniteTimeDegeneracy("1 + rho_l Q0 u_x t <= 0: Q blows up before t")
    out = Q0 / den
    return out[()] if out.ndim == 0 else out


def quadrature_oracle(integrand: Callable, a: float, b: float, panels: int):
    """Composite midpoint rule; `integrand` must accept an array of abscissae."""
    if panels < 2:
        raise ValueError("need at least 2 panels")
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("bounds must be finite")
    h = (b - a) / panels
    x = a + (np.arange(panels) + 0.5) * h
    return float(np.sum(integrand(x)) * h)


def potential_by_quadrature(c, Q, Q_inf, p: ModelParams, panels: int = 10_000) -> float:
    """The relative potential as the integral it is defined by."""
    cg = c**p.gamma
    qg = Q_inf**p.gamma
    return p.A / p.rho_l * quadrature_oracle(lambda s: cg * (s**p.gamma - qg) / (s * s), Q_inf, Q, panels)


@njit(cache=True)
def _explicit_kernel(c, Q, u, t, t_end, dx, gamma, theta, rho_l, A, B, f, g, cfl, visc_frac, max_steps):
    n = Q.shape[0]
    mu = np.empty(n)
    p = np.empty(n)
    h = np.empty(n)
    un = np.empty(n + 1)
    half = 0.5 * dx
    cth = np.empty(n)
    cga = np.empty(n)
    for j in range(n):
        cth[j] = fpow(c[j], theta)
        cga[j] = fpow(c[j], gamma)
    steps = 0
    while t < t_end:
        smax = 0.0
        mmax = 0.0
        for j in range(n):
            q = Q[j]
            mu[j] = B * cth[j] * fpow(q, 1.0 + theta)
            p[j] = A * cga[j] * fpow(q, gamma)
            r = q / (1.0 + q)
            h[j] = f * rho_l * rho_l * r * r
            s = gamma * rho_l * p[j] * q
            if s > smax:
                smax = s
            if mu[j] > mmax:
                mmax = mu[j]
        dt = visc_frac * dx * dx / (2.0 * mmax) if mmax > 0 else 1.0
        if smax > 0:
            dt = min(dt, cfl * dx / math.sqrt(smax))
        if t + dt > t_end:
            dt = t_end - t
        # stresses at cells from the old velocity
        s0 = p[0] - mu[0] * (u[1] - u[0]) / dx
        un[0] = u[0] + dt * (-(s0 - 0.0) / half + g - h[0] * u[0] * abs(u[0]))
        sl = s0
        for j in range(1, n):
            sr = p[j] - mu[j] * (u[j + 1] - u[j]) / dx
            hj = 0.5 * (h[j - 1] + h[j])
            un[j] = u[j] + dt * (-(sr - sl) / dx + g - hj * u[j] * abs(u[j]))
            sl = sr
        un[n] = 0.0
        for j in range(n):
            Q[j] = Q[j] - dt * rho_l * Q[j] * Q[j] * (u[j + 1] - u[j]) / dx
            if not (Q[j] > 0.0) or not math.isfinite(Q[j]):
                return -1, t, steps
        for j in range(n + 1):
            u[j] = un[j]
        t += dt
        steps += 1
        if steps >= max_steps:
            return 1, t, steps
    return 0, t, steps


def explicit_step_estimate(state: TransformedState, grid: MassGrid, p: ModelParams, t_end: float,
                           visc_frac: float = 0.9) -> int:
    mu = p.B * state.c**p.theta * state.Q ** (1 + p.theta)
    dt = visc_frac * grid.dx**2 / (2 * mu.max())
    return int(math.ceil((t_end - state.t) / dt))


def explicit_reference_run(spec: InitialDataSpec, p: ModelParams, n_cells: int, t_end: float,
                           cfl: float = 0.4, visc_frac: float = 0.9,
                           step_budget: int = DEFAULT_STEP_BUDGET) -> TransformedState:
    """Forward-Euler solution on a fresh grid of `n_cells` cells at `t_end`."""
    grid = MassGrid(n_cells)
    state = build_initial_data(spec, grid, p)
    need = explicit_step_estimate(state, grid, p, t_end, visc_frac)
    if need > step_budget:
        raise BudgetExceeded(need, step_budget)
    Q, u = state.Q.copy(), state.u.copy()
    status, t, steps = _explicit_kernel(state.c, Q, u, state.t, float(t_end), grid.dx, p.gamma, p.theta,
                                        p.rho_l, p.A, p.B, p.f, p.g, cfl, visc_frac, step_budget)
    if status == 1:
        raise BudgetExceeded(f">{steps}", step_budget)
    if status != 0:
        raise FloatingPointError(f"explicit reference lost positivity at t={t}")
    return TransformedState(t, state.c, Q, u)


def restrict(cell_field: np.ndarray, factor: int) -> np.ndarray:
    """Average groups of `factor` fine cells onto the coarse cells they tile."""
    return cell_field.reshape(-1, factor).mean(axis=1)


def deviation(state: TransformedState, p: ModelParams) -> np.ndarray:
    grid = MassGrid(state.Q.size)
    return state.cq - build_stationary(grid, p).cq_inf


def compare_cq(coarse: TransformedState, fine: TransformedState, p: ModelParams) -> OracleReport:
    """L2 and sup distance of cQ after restricting `fine` to `coarse`'s cells.

    The stationary profile is subtracted on each grid first so the
    restriction acts on the smooth deviation, not on the x^(1/gamma) cusp.
    """
    factor = fine.Q.size // coarse.Q.size
    if factor * coarse.Q.size != fine.Q.size:
        raise ValueError("fine grid must refine the coarse one by an integer factor")
    d = deviation(coarse, p) - restrict(deviation(fine, p), factor)
    dx = 1.0 / coarse.Q.size
    return OracleReport(float(np.sqrt(np.sum(d * d) * dx)), float(np.max(np.abs(d))))


def semi_implicit_run(spec: InitialDataSpec, p: ModelParams, n_cells: int, t_end: float,
                      cfl: float = 0.4) -> TransformedState:
    grid = MassGrid(n_cells)
    state = build_initial_data(spec, grid, p)
    cfg = SchemeConfig(cfl=cfl, t_end=t_end)
    return run_to_time(state, grid, p, cfg, build_stationary(grid, p), track_energy=False).state


def richardson_order(coarse, medium, fine, p: ModelParams) -> float:
    """Observed order from three grids refined by a common factor."""
    e1 = compare_cq(coarse, medium, p).l2_diff
    e2 = compare_cq(medium, fine, p).l2_diff
    r = medium.Q.size // coarse.Q.size
    return math.log(e1 / e2) / math.log(r)


def cross_validate(spec: InitialDataSpec, p: ModelParams, n_main: int = 400, n_ref: int = 1600,
                   t_end: float = 1.0, richardson_grids=(200, 400, 800)) -> OracleReport:
    """Semi-implicit solution against the explicit reference, plus a three-grid order."""
    main = semi_implicit_run(spec, p, n_main, t_end)
    ref = explicit_reference_run(spec, p, n_ref, t_end)
    rep = compare_cq(main, ref, p)
    runs = [main if n == n_main else semi_implicit_run(spec, p, n, t_end) for n in richardson_grids]
    return OracleReport(rep.l2_diff, rep.linf_diff, richardson_order(*runs, p))
