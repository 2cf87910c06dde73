"""Run a configured scenario and collect its diagnostics time series."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import RunConfig
from .diagnostics import (DecayFit, DiagnosticsRecord, fit_decay_exponent, flux_identity_residual,
                          sample)
from .grid import MassGrid
from .integrator import (ACC_DT2_CUM, ACC_E0, RunResult, SchemeConfig, StepResult, compute_dt, new_accumulators,
                         run_to_time, step)
from .model import ModelParams, StationaryProfile, TransformedState, build_initial_data, build_stationary


class Sampler:
    """Observer that turns states into DiagnosticsRecords.

    The flux residual needs three consecutive states.  The third is obtained
    by stepping a copy forward, which is the same step the integrator takes
    next; at t = 0 two steps are taken and the derivative is one-sided.
    """

    def __init__(self, grid, params, stationary, scheme: SchemeConfig, acc, with_flux=True):
        self.grid = grid
        self.params = params
        self.stationary = stationary
        self.scheme = scheme
        self.acc = acc
        self.with_flux = with_flux
        self.records: list[DiagnosticsRecord] = []
        self.dt2_cum: list[float] = []

    def _peek(self, state):
        return step(state, self.grid, self.params, self.scheme, self.stationary)[0]

    def __call__(self, t, state: TransformedState, res: StepResult):
        g, p, st = self.grid, self.params, self.stationary
        dt = res.dt_used
        if res.previous is None:
            dt = compute_dt(state, g, p, self.scheme)
        rec = sample(state, g, p, st, self.acc, dt=dt)
        if self.with_flux:
            nxt = self._peek(state)
            if res.previous is None:
                window, at = [state, nxt, self._peek(nxt)], 0
            else:
                window, at = [res.previous, state, nxt], 1
            rec.flux_residual = flux_identity_residual(window, g, p, st, at=at)
        self.records.append(rec)
        self.dt2_cum.append(float(self.acc[ACC_DT2_CUM]))


@dataclass
class Trajectory:
    config: RunConfig
    grid: MassGrid
    params: ModelParams
    stationary: StationaryProfile
    initial: TransformedState
    final: TransformedState
    records: list[DiagnosticsRecord]
    result: RunResult
    dt2_cum: np.ndarray

    def series(self, name) -> np.ndarray:
        if name.startswith("l") and name.endswith("_u") and name[1:-2].isdigit():
            return np.array([r.lp_u[int(name[1:-2])] for r in self.records])
        return np.array([getattr(r, name) for r in self.records])

    @property
    def times(self) -> np.ndarray:
        return self.series("t")

    def energy_slack(self, factor: float = 10.0) -> np.ndarray:
        """Allowed energy growth between consecutive samples: factor * E(0) * sum of dt^2."""
        return factor * self.result.acc[ACC_E0] * np.diff(self.dt2_cum)

    def fit(self, values, window=None) -> DecayFit:
        return fit_decay_exponent(self.times, values, window or self.config.fit_window)


def simulate(cfg: RunConfig, with_flux: bool = True, track_energy: bool = True) -> Trajectory:
    grid = MassGrid(cfg.n_cells)
    p = cfg.params
    stationary = build_stationary(grid, p)
    state0 = build_initial_data(cfg.initial, grid, p)
    scheme = cfg.scheme
    acc = new_accumulators(state0, grid, p, stationary)
    sampler = Sampler(grid, p, stationary, scheme, acc, with_flux)
    result = run_to_time(state0, grid, p, scheme, stationary, sampler, cfg.sample_interval, acc,
                         track_energy=track_energy)
    return Trajectory(cfg, grid, p, stationary, state0, result.state, sampler.records, result,
                      np.array(sampler.dt2_cum))
