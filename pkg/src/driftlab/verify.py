"""Acceptance checks for the solver, runnable from the CLI or pytest.

Each check returns a `Criterion`; heavy runs are cached so the default
trajectory is computed once per process.
"""

from __future__ import annotations

import functools
import time
from dataclasses import dataclass, replace

import numpy as np

from .config import RunConfig
from .diagnostics import fit_decay_exponent, relative_potential, theoretical_density_rate
from .grid import MassGrid
from .integrator import SchemeConfig, exact_q_update, step
from .model import (GAMMA_NOT_GT_ONE, THETA_GT_GAMMA_HALF, THETA_GT_GAMMA_MINUS_1,
                    THETA_GT_ONE_MINUS_ALPHA_GAMMA, InitialDataSpec, ModelParams, ProfileKind,
                    build_initial_data, build_stationary, validate_params)
from .oracles import cross_validate, potential_by_quadrature, riccati_exact
from .simulation import simulate

FIT_WINDOW = (10.0, 200.0)


@dataclass(frozen=True)
class Criterion:
    number: int
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d} {self.name}: {self.detail}"


def ulps(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return np.abs(a - b) / np.spacing(np.maximum(np.abs(a), np.abs(b)))


@functools.lru_cache(maxsize=None)
def default_run(cfl: float = 0.4, n_cells: int = 400, t_end: float = 200.0, sample_interval: float = 0.5):
    cfg = RunConfig(cfl=cfl, n_cells=n_cells, t_end=t_end, sample_interval=sample_interval)
    t0 = time.perf_counter()
    traj = simulate(cfg)
    return traj, time.perf_counter() - t0


def stationary_fixed_point(n_steps: int = 10_000) -> Criterion:
    p = ModelParams(gamma=2.0, g=1.0, f=1.0)
    grid = MassGrid(400)
    st = build_stationary(grid, p)
    state = build_initial_data(InitialDataSpec(profile_kind=ProfileKind.STATIONARY), grid, p)
    cfg = SchemeConfig(t_end=np.inf)
    t0 = time.perf_counter()
    for _ in range(n_steps):
        state, _ = step(state, grid, p, cfg, st)
    elapsed = time.perf_counter() - t0
    dq = float(np.max(np.abs(state.cq - st.cq_inf)))
    du = float(np.max(np.abs(state.u)))
    ok = dq <= 1e-10 and du <= 1e-10 and elapsed < 10
    return Criterion(1, "stationary fixed point", ok,
                     f"sup|cQ-cQinf|={dq:.2e}, sup|u|={du:.2e} after {n_steps} steps ({elapsed:.1f}s)")


def energy_dissipation() -> Criterion:
    traj, secs = default_run(0.4)
    half, secs_half = default_run(0.2)
    sample_excess = float(np.max(np.diff(traj.series("E_total")) - traj.energy_slack()))
    step_excess = traj.result.worst_energy_excess
    worst = max(traj.result.worst_energy_increase, 0.0)
    worst_half = max(half.result.worst_energy_increase, 0.0)
    ok = (sample_excess <= 0 and step_excess <= 0 and worst_half <= 0.5 * worst
          and secs < 60 and secs_half < 60)
    return Criterion(2, "discrete energy dissipation", ok,
                     f"max sample excess={sample_excess:.2e}, max step excess={step_excess:.2e}, "
                     f"worst increase {worst:.2e} -> {worst_half:.2e} at dt/2 ({secs:.1f}s, {secs_half:.1f}s)")


def y_band() -> Criterion:
    traj, _ = default_run()
    ymin, ymax = traj.series("Y_min"), traj.series("Y_max")
    lo, hi = 0.5 * ymin[0], 2 * max(ymax[0], 1.0)
    ok = bool(np.all(ymin >= lo) and np.all(ymax <= hi))
    return Criterion(3, "uniform Y-band", ok,
                     f"Y in [{ymin.min():.4f}, {ymax.max():.4f}] within [{lo:.4f}, {hi:.4f}]")


def uniform_convergence() -> Criterion:
    traj, _ = default_run()
    d, u = traj.series("sup_theta_dist"), traj.series("sup_u")
    ok = d[-1] <= 0.05 * d[0] and u[-1] <= 0.05 * u[0] and traj.times[-1] == 200.0
    return Criterion(4, "uniform convergence", ok,
                     f"sup_theta_dist {d[0]:.3e}->{d[-1]:.3e}, sup_u {u[0]:.3e}->{u[-1]:.3e}")


def velocity_rate() -> Criterion:
    traj, _ = default_run()
    fit = fit_decay_exponent(traj.times, traj.series("sup_u"), FIT_WINDOW)
    ok = fit.exponent <= -0.45 and fit.r2 >= 0.9
    return Criterion(5, "velocity decay rate", ok, f"exponent={fit.exponent:.3f} (<= -0.45), r2={fit.r2:.4f}")


def density_rate() -> Criterion:
    traj, _ = default_run()
    rate = theoretical_density_rate(traj.params)
    fit = fit_decay_exponent(traj.times, traj.series("sup_theta_dist"), FIT_WINDOW)
    ok = fit.exponent <= -0.9 * rate
    return Criterion(6, "density decay rate", ok,
                     f"exponent={fit.exponent:.3f} (<= {-0.9 * rate:.4f}; guaranteed rate {rate:.4f})")


def weighted_decay() -> Criterion:
    traj, _ = default_run()
    v = traj.series("w_l2") + traj.series("l2_u") ** 2
    fit = fit_decay_exponent(traj.times, v, FIT_WINDOW)
    return Criterion(7, "weighted L2 decay", fit.exponent <= -0.9, f"exponent={fit.exponent:.3f} (<= -0.9)")


def oracle_cross_validation() -> Criterion:
    t0 = time.perf_counter()
    rep = cross_validate(InitialDataSpec(), ModelParams())
    secs = time.perf_counter() - t0
    ok = rep.l2_diff <= 0.01 and rep.richardson_order >= 0.8 and secs < 300
    return Criterion(8, "explicit-oracle cross-validation", ok,
                     f"L2 diff={rep.l2_diff:.2e} (<= 0.01), order={rep.richardson_order:.3f} (>= 0.8), {secs:.0f}s")


def exact_q_update_check(n: int = 10_000, seed: int = 2024) -> Criterion:
    rng = np.random.default_rng(seed)
    Q0 = 10 ** rng.uniform(-2, 1, n)
    dt = 10 ** rng.uniform(-4, 0, n)
    z = rng.uniform(-0.5, 2.0, n)  # rho_l Q0 u_x dt, denominators in [0.5, 3]
    rho_l = 1.0
    ux = z / (rho_l * Q0 * dt)
    e_single = float(np.max(ulps(exact_q_update(Q0, ux, rho_l, dt), riccati_exact(Q0, ux, rho_l, dt))))
    d1 = dt * rng.uniform(0, 1, n)
    d2 = dt - d1
    two = exact_q_update(exact_q_update(Q0, ux, rho_l, d1), ux, rho_l, d2)
    e_comp = float(np.max(ulps(two, riccati_exact(Q0, ux, rho_l, d1 + d2))))
    ok = e_single <= 4 and e_comp <= 4
    return Criterion(9, "exact Q-update", ok, f"max ULP vs Riccati={e_single:.0f}, composition={e_comp:.0f} (<= 4)")


def potential_closed_form(n: int = 1000, seed: int = 7) -> Criterion:
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(n):
        p = ModelParams(gamma=rng.uniform(1.1, 4.0), rho_l=rng.uniform(0.5, 2.0))
        c = rng.uniform(0.1, 2.0)
        q_inf = rng.uniform(0.1, 2.0)
        q = q_inf * np.exp(rng.uniform(-1.0, 1.0))
        closed = float(relative_potential(c, q, q_inf, p))
        quad = potential_by_quadrature(c, q, q_inf, p, panels=10_000)
        worst = max(worst, abs(closed - quad) / abs(quad))
    secs = time.perf_counter() - t0
    ok = worst <= 1e-6 and secs < 5
    return Criterion(10, "relative potential closed form", ok, f"max rel err={worst:.2e} (<= 1e-6), {secs:.1f}s")


def flux_identity_convergence(t_end: float = 2.0) -> Criterion:
    coarse, _ = default_run(0.4, 400, t_end, 0.1)
    fine, _ = default_run(0.4, 800, t_end, 0.1)
    r1 = float(coarse.series("flux_residual").max())
    r2 = float(fine.series("flux_residual").max())
    ratio = r1 / r2
    return Criterion(11, "flux identity residual", ratio >= 1.8,
                     f"sup residual N=400: {r1:.3e}, N=800: {r2:.3e}, ratio={ratio:.2f} (>= 1.8)")


def validator_codes() -> Criterion:
    cases = {
        GAMMA_NOT_GT_ONE: ModelParams(gamma=1.0, theta=0.5),
        THETA_GT_GAMMA_HALF: ModelParams(gamma=1.5, theta=0.8, alpha=0.0),
        THETA_GT_GAMMA_MINUS_1: ModelParams(gamma=1.5, theta=0.6),
        THETA_GT_ONE_MINUS_ALPHA_GAMMA: ModelParams(gamma=2.0, theta=0.8, alpha=0.2),
    }
    hits = {code: code in validate_params(p).codes for code, p in cases.items()}
    ok = all(hits.values())
    return Criterion(12, "validator error codes", ok, ", ".join(f"{k}={'hit' if v else 'MISSED'}" for k, v in hits.items()))


ALL = [stationary_fixed_point, energy_dissipation, y_band, uniform_convergence, velocity_rate,
       density_rate, weighted_decay, oracle_cross_validation, exact_q_update_check,
       potential_closed_form, flux_identity_convergence, validator_codes]


def run_all(report=print, skip=()) -> list[Criterion]:
    out = []
    for check in ALL:
        if check.__name__ in skip:
            continue
        try:
            c = check()
        except Exception as e:
            num = ALL.index(check) + 1
            c = Criterion(num, check.__name__, False, f"error: {type(e).__name__}: {e}")
        report(c.line())
        out.append(c)
    return out
