"""First-order IMEX time stepping for the transformed drift-flux system.

One step, given (Q^k, u^k):

1. pressure ``A (cQ^k)^gamma`` and gravity explicit;
2. viscosity ``B c^theta (Q^k)^(1+theta)`` implicit in u, friction
   linearized as ``h(Q^k) |u^k| u^(k+1)``; one tridiagonal solve;
3. ``Q^(k+1) = Q^k / (1 + rho_l Q^k u_x^(k+1) dt)``, the exact solution of
   ``Q_t = -rho_l Q^2 u_x`` with u_x frozen.

If a cell's denominator drops below ``pos_floor`` the step is halved and redone.
At the vacuum node the total stress vanishes; at the wall u = 0.

The inner loop is compiled with numba; `step` and `run_to_time` are thin
wrappers that keep the public API in plain numpy objects.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from numba import njit

from ._fastpow import fpow
from .grid import MassGrid
from .model import ModelParams, StationaryProfile, TransformedState

log = logging.getLogger(__name__)

MAX_HALVINGS = 40

# slots of the accumulator vector shared with the kernel
ACC_D_VISC = 0
ACC_D_FRIC = 1
ACC_E0 = 2
ACC_E_PREV = 3
ACC_WORST_INC = 4     # max over steps of E_tot(k+1) - E_tot(k)
ACC_WORST_EXCESS = 5  # max over steps of the same minus 10 dt^2 E0
ACC_STEPS = 6
ACC_HALVINGS = 7
ACC_LAST_DT = 8
ACC_LAST_HALVINGS = 9
ACC_LAST_RESIDUAL = 10
ACC_PREV_T = 11
ACC_DT2_CUM = 12  # sum of dt^2, for per-step energy slack over many steps
ACC_SIZE = 13

OK = 0
TOO_MANY_HALVINGS = 1
ZERO_PIVOT = 2
NONFINITE = 3
_STATUS_TEXT = {
    TOO_MANY_HALVINGS: f"more than {MAX_HALVINGS} positivity halvings (blow-up)",
    ZERO_PIVOT: "degenerate tridiagonal system (zero pivot)",
    NONFINITE: "non-finite state",
}


class IntegrationAbort(RuntimeError):
    def __init__(self, message, t, state=None):
        super().__init__(f"{message} at t={t!r}")
        self.t = t
        self.state = state


@dataclass(frozen=True)
class SchemeConfig:
    cfl: float = 0.4
    dt_max: float = 0.01
    pos_floor: float = 0.1
    t_end: float = 1.0
    solver_tol: float = 0.0  # the direct solve is exact; kept for config symmetry

    def __post_init__(self):
        if not 0 < self.cfl <= 1:
            raise ValueError(f"cfl must be in (0, 1], got {self.cfl}")
        if not 0 < self.pos_floor < 1:
            raise ValueError(f"pos_floor must be in (0, 1), got {self.pos_floor}")
        if not self.dt_max > 0:
            raise ValueError("dt_max must be positive")


@dataclass(frozen=True)
class StepResult:
    dt_used: float
    n_halvings: int
    max_residual: float
    previous: Optional[TransformedState] = None


@njit(cache=True, inline="always")
def _q_denominator(Q, u_x, rho_l, dt):
    return 1.0 + rho_l * Q * u_x * dt


@njit(cache=True)
def _q_update_array(Q, u_x, rho_l, dt):
    out = np.empty(Q.shape[0])
    for j in range(Q.shape[0]):
        out[j] = Q[j] / _q_denominator(Q[j], u_x[j], rho_l, dt[j])
    return out


@njit(cache=True)
def _acoustic_dt(c, Q, dx, gamma, rho_l, A, cfl, dt_max):
    smax = 0.0
    for j in range(Q.shape[0]):
        s = A * gamma * rho_l * fpow(c[j], gamma) * fpow(Q[j], gamma + 1.0)
        if s > smax:
            smax = s
    if smax == 0.0:
        return dt_max
    dt = cfl * dx / math.sqrt(smax)
    return min(dt, dt_max)


@njit(cache=True)
def _energy(c, Q, q_inf, u, dx, gamma, rho_l, A):
    """Kinetic (trapezoid on nodes) plus relative potential (midpoint on cells)."""
    n = Q.shape[0]
    ek = 0.5 * u[0] * u[0] * 0.5 * dx
    for j in range(1, n):
        ek += 0.5 * u[j] * u[j] * dx
    ep = 0.0
    gm1 = gamma - 1.0
    for j in range(n):
        qi = q_inf[j]
        pot = (fpow(Q[j], gm1) - fpow(qi, gm1)) / gm1 + fpow(qi, gamma) * (1.0 / Q[j] - 1.0 / qi)
        ep += A * fpow(c[j], gamma) / rho_l * pot * dx
    return ek + ep


@njit(cache=True)
def _advance(c, Q, u, q_inf, t, t_stop, t_end, max_steps, dx,
             gamma, theta, rho_l, A, B, f, g, cfl, dt_max, pos_floor,
             acc, prev_Q, prev_u, track_energy, fixed_dt):
    """Take steps until t >= t_stop, t == t_end or max_steps; returns (status, t)."""
    n = Q.shape[0]
    mu = np.empty(n)
    p = np.empty(n)
    h = np.empty(n)
    lo = np.empty(n)
    di = np.empty(n)
    up = np.empty(n)
    rhs = np.empty(n)
    cp = np.empty(n)
    dp = np.empty(n)
    us = np.empty(n + 1)
    den = np.empty(n)
    half = 0.5 * dx
    steps = 0
    while steps < max_steps and t < t_stop and t < t_end:
        if fixed_dt > 0.0:
            dt = fixed_dt
        else:
            dt = _acoustic_dt(c, Q, dx, gamma, rho_l, A, cfl, dt_max)
        if t + dt > t_end:
            dt = t_end - t
        if not (dt > 0.0) or not math.isfinite(dt):
            return NONFINITE, t
        for j in range(n):
            cq = c[j] * Q[j]
            mu[j] = B * fpow(c[j], theta) * fpow(Q[j], 1.0 + theta)
            p[j] = A * fpow(cq, gamma)
            r = Q[j] / (1.0 + Q[j])
            h[j] = f * rho_l * rho_l * r * r
        halvings = 0
        while True:
            # node 0: half cell, zero total stress at x = 0
            k0 = dt * mu[0] / (dx * half)
            lo[0] = 0.0
            di[0] = 1.0 + dt * h[0] * abs(u[0]) + k0
            up[0] = -k0
            rhs[0] = u[0] + dt * (g - p[0] / half)
            for j in range(1, n):
                a = dt * mu[j - 1] / (dx * dx)
                b = dt * mu[j] / (dx * dx)
                hj = 0.5 * (h[j - 1] + h[j])
                lo[j] = -a
                di[j] = 1.0 + dt * hj * abs(u[j]) + a + b
                up[j] = -b if j < n - 1 else 0.0
                rhs[j] = u[j] + dt * (g - (p[j] - p[j - 1]) / dx)
            # Thomas
            if di[0] == 0.0:
                return ZERO_PIVOT, t
            cp[0] = up[0] / di[0]
            dp[0] = rhs[0] / di[0]
            for j in range(1, n):
                m = di[j] - lo[j] * cp[j - 1]
                if m == 0.0:
                    return ZERO_PIVOT, t
                cp[j] = up[j] / m
                dp[j] = (rhs[j] - lo[j] * dp[j - 1]) / m
            us[n] = 0.0
            us[n - 1] = dp[n - 1]
            for j in range(n - 2, -1, -1):
                us[j] = dp[j] - cp[j] * us[j + 1]
            ok = True
            for j in range(n):
                den[j] = _q_denominator(Q[j], (us[j + 1] - us[j]) / dx, rho_l, dt)
                if not (den[j] >= pos_floor):
                    ok = False
            if ok:
                break
            halvings += 1
            if halvings > 40:
                return TOO_MANY_HALVINGS, t
            dt *= 0.5
        # residual of the linear system
        res = 0.0
        for j in range(n):
            r = di[j] * us[j] + up[j] * us[j + 1] - rhs[j]
            if j > 0:
                r += lo[j] * us[j - 1]
            if abs(r) > res:
                res = abs(r)
        # dissipation of this step, with the coefficients the solve used
        dv = 0.0
        for j in range(n):
            ux = (us[j + 1] - us[j]) / dx
            dv += mu[j] * ux * ux * dx
        df = h[0] * abs(u[0]) * us[0] * us[0] * half
        for j in range(1, n):
            df += 0.5 * (h[j - 1] + h[j]) * abs(u[j]) * us[j] * us[j] * dx
        for j in range(n):
            prev_Q[j] = Q[j]
            prev_u[j] = u[j]
        prev_u[n] = u[n]
        acc[11] = t
        for j in range(n):
            Q[j] = Q[j] / den[j]
        for j in range(n + 1):
            u[j] = us[j]
        t += dt
        acc[0] += dv * dt
        acc[1] += df * dt
        acc[12] += dt * dt
        if track_energy:
            e = _energy(c, Q, q_inf, u, dx, gamma, rho_l, A)
            tot = e + acc[0] + acc[1]
            inc = tot - acc[3]
            if inc > acc[4]:
                acc[4] = inc
            exc = inc - 10.0 * dt * dt * acc[2]
            if exc > acc[5]:
                acc[5] = exc
            acc[3] = tot
        for j in range(n):
            if not math.isfinite(Q[j]) or not math.isfinite(u[j]):
                return NONFINITE, t
        acc[6] += 1.0
        acc[7] += halvings
        acc[8] = dt
        acc[9] = halvings
        acc[10] = res
        steps += 1
    return OK, t


def _args(p: ModelParams, cfg: SchemeConfig):
    return (p.gamma, p.theta, p.rho_l, p.A, p.B, p.f, p.g, cfg.cfl, cfg.dt_max, cfg.pos_floor)


def exact_q_update(Q, u_x, rho_l, dt):
    """Q / (1 + rho_l Q u_x dt), i.e. ``1/Q += rho_l u_x dt``, through the kernel's code path."""
    Q, u_x, dt = np.broadcast_arrays(*(np.atleast_1d(np.asarray(a, dtype=float)) for a in (Q, u_x, dt)))
    out = _q_update_array(np.ascontiguousarray(Q), np.ascontiguousarray(u_x), float(rho_l),
                          np.ascontiguousarray(dt))
    return out.reshape(Q.shape)


def compute_dt(state: TransformedState, grid: MassGrid, p: ModelParams, cfg: SchemeConfig) -> float:
    """Acoustic step ``cfl dx / max sqrt(A gamma rho_l c^gamma Q^(gamma+1))``, capped by dt_max."""
    if not (np.all(np.isfinite(state.Q)) and np.all(np.isfinite(state.u))):
        raise IntegrationAbort("non-finite state", state.t, state)
    return float(_acoustic_dt(state.c, state.Q, grid.dx, p.gamma, p.rho_l, p.A, cfg.cfl, cfg.dt_max))


def new_accumulators(state, grid, p, stationary) -> np.ndarray:
    acc = np.zeros(ACC_SIZE)
    e0 = _energy(state.c, state.Q, stationary.q_inf(state.c), state.u, grid.dx, p.gamma, p.rho_l, p.A)
    acc[ACC_E0] = e0
    acc[ACC_E_PREV] = e0
    acc[ACC_WORST_INC] = -np.inf
    acc[ACC_WORST_EXCESS] = -np.inf
    return acc


def step(state: TransformedState, grid: MassGrid, p: ModelParams, cfg: SchemeConfig,
         stationary: StationaryProfile, dt: float | None = None,
         acc: np.ndarray | None = None) -> tuple[TransformedState, StepResult]:
    """Advance one step; returns a new state (the input is not modified).

    `dt` overrides the acoustic step (positivity halvings still apply).  The
    step is not clipped at ``cfg.t_end``.
    """
    new = state.copy()
    if acc is None:
        acc = np.zeros(ACC_SIZE)
    prev_Q = np.empty_like(state.Q)
    prev_u = np.empty_like(state.u)
    status, t = _advance(new.c, new.Q, new.u, stationary.q_inf(state.c), state.t, np.inf, np.inf, 1,
                         grid.dx, *_args(p, cfg), acc, prev_Q, prev_u, False,
                         0.0 if dt is None else float(dt))
    if status != OK:
        raise IntegrationAbort(_STATUS_TEXT[status], state.t, state)
    new.t = t
    return new, StepResult(acc[ACC_LAST_DT], int(acc[ACC_LAST_HALVINGS]), acc[ACC_LAST_RESIDUAL], state)


@dataclass
class RunResult:
    state: TransformedState
    n_steps: int
    n_halvings: int
    acc: np.ndarray

    @property
    def worst_energy_increase(self) -> float:
        return float(self.acc[ACC_WORST_INC])

    @property
    def worst_energy_excess(self) -> float:
        return float(self.acc[ACC_WORST_EXCESS])


Observer = Callable[[float, TransformedState, StepResult], None]


def run_to_time(state0: TransformedState, grid: MassGrid, p: ModelParams, cfg: SchemeConfig,
                stationary: StationaryProfile, observer: Observer | None = None,
                sample_interval: float | None = None, acc: np.ndarray | None = None,
                track_energy: bool = True) -> RunResult:
    """Step from `state0` to ``cfg.t_end`` (the last step is clipped to land on it).

    The observer sees the initial state, the first state at or past each
    multiple of `sample_interval`, and the final state.  It receives a
    private copy and a StepResult whose ``previous`` is the state one step
    earlier (None at t = 0).
    """
    state = state0.copy()
    if acc is None:
        acc = new_accumulators(state, grid, p, stationary)
    if cfg.t_end <= state.t:
        if observer is not None:
            observer(state.t, state.copy(), StepResult(0.0, 0, 0.0, None))
        return RunResult(state, 0, 0, acc)
    q_inf = stationary.q_inf(state.c)
    prev_Q = np.empty_like(state.Q)
    prev_u = np.empty_like(state.u)
    interval = sample_interval if sample_interval else np.inf
    if observer is not None:
        observer(state.t, state.copy(), StepResult(0.0, 0, 0.0, None))
    k = 1
    steps0 = acc[ACC_STEPS]
    t = state.t
    while t < cfg.t_end:
        t_stop = state0.t + k * interval
        status, t = _advance(state.c, state.Q, state.u, q_inf, t, t_stop, cfg.t_end, 2**62,
                             grid.dx, *_args(p, cfg), acc, prev_Q, prev_u, track_energy, 0.0)
        state.t = t
        if status != OK:
            raise IntegrationAbort(_STATUS_TEXT[status], t, state.copy())
        while state0.t + k * interval <= t:
            k += 1
        if observer is not None:
            prev = TransformedState(acc[ACC_PREV_T], state.c, prev_Q.copy(), prev_u.copy())
            res = StepResult(acc[ACC_LAST_DT], int(acc[ACC_LAST_HALVINGS]), acc[ACC_LAST_RESIDUAL], prev)
            observer(t, state.copy(), res)
    n_steps = int(acc[ACC_STEPS] - steps0)
    log.debug("reached t=%g in %d steps", t, n_steps)
    return RunResult(state, n_steps, int(acc[ACC_HALVINGS]), acc)
