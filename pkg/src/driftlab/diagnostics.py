"""Functionals monitored along a trajectory, and power-law decay fits.

Integrals over cells use the midpoint rule; integrals of node fields use the
trapezoid weights of the grid (equivalently, u^p averaged to cells), which
form a probability measure on [0, 1].
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .grid import MassGrid, cell_gradient_of_node_field
from .integrator import ACC_D_FRIC, ACC_D_VISC
from .model import ModelParams, StationaryProfile, TransformedState, friction_coefficient, validate_params

LP_ORDERS = (2, 3, 4, 5)


class FitError(ValueError):
    pass


@dataclass
class DiagnosticsRecord:
    t: float
    E_kin: float
    E_pot: float
    D_visc_cum: float
    D_fric_cum: float
    Y_min: float
    Y_max: float
    lp_u: dict[int, float]
    sup_u: float
    sup_Qux: float
    w_l2: float
    w_grad: float
    sup_theta_dist: float
    flux_residual: float = 0.0
    dt: float = 0.0

    @property
    def E_total(self) -> float:
        return self.E_kin + self.E_pot + self.D_visc_cum + self.D_fric_cum

    def row(self) -> dict[str, float]:
        d = asdict(self)
        lp = d.pop("lp_u")
        out = {}
        for k, v in d.items():
            out[k] = v
            if k == "Y_max":
                out.update({f"l{q}_u": lp[q] for q in LP_ORDERS})
        return out


@dataclass(frozen=True)
class DecayFit:
    exponent: float
    prefactor: float
    r2: float
    window: tuple[float, float]


def relative_potential(c, Q, Q_inf, p: ModelParams):
    """Energy density of Q relative to Q_inf, in closed form.

    Equals ``(A/rho_l) int_{Q_inf}^{Q} c^gamma (s^gamma - Q_inf^gamma) / s^2 ds``,
    which is nonnegative and vanishes only at ``Q = Q_inf``.
    """
    if p.gamma == 1:
        raise ValueError("relative_potential needs gamma > 1")
    c, Q, Q_inf = (np.asarray(a, dtype=float) for a in (c, Q, Q_inf))
    gm1 = p.gamma - 1
    pot = (Q**gm1 - Q_inf**gm1) / gm1 + Q_inf**p.gamma * (1 / Q - 1 / Q_inf)
    out = p.A * c**p.gamma / p.rho_l * pot
    return out[()] if out.ndim == 0 else out


def lp_norms(u, grid: MassGrid) -> dict[int, float]:
    a = np.abs(np.asarray(u, dtype=float))
    w = grid.node_weights
    return {q: float(np.sum(w * a**q) ** (1.0 / q)) for q in LP_ORDERS}


def theta_distance(state: TransformedState, p: ModelParams, stationary: StationaryProfile) -> np.ndarray:
    return state.cq**p.theta - stationary.cq_inf**p.theta


def sample(state: TransformedState, grid: MassGrid, p: ModelParams, stationary: StationaryProfile,
           accumulators=None, dt: float = 0.0) -> DiagnosticsRecord:
    """Evaluate every monitored functional on `state`.

    `accumulators` is the integrator's accumulator vector (or None for zero
    dissipation); the flux residual is left at 0 and filled in by callers
    that hold a time window.
    """
    dx = grid.dx
    c, Q, u = state.c, state.Q, state.u
    cq = c * Q
    cq_inf = stationary.cq_inf
    w = grid.node_weights
    ux = cell_gradient_of_node_field(u, grid)
    Y = (cq / cq_inf) ** p.theta
    dist = theta_distance(state, p, stationary)
    ddist = np.diff(dist) / dx
    rec = DiagnosticsRecord(
        t=float(state.t),
        E_kin=float(np.sum(w * 0.5 * u * u)),
        E_pot=float(np.sum(relative_potential(c, Q, stationary.q_inf(c), p)) * dx),
        D_visc_cum=0.0 if accumulators is None else float(accumulators[ACC_D_VISC]),
        D_fric_cum=0.0 if accumulators is None else float(accumulators[ACC_D_FRIC]),
        Y_min=float(Y.min()),
        Y_max=float(Y.max()),
        lp_u=lp_norms(u, grid),
        sup_u=float(np.max(np.abs(u))),
        sup_Qux=float(np.max(np.abs(Q * ux))),
        w_l2=float(np.sum(stationary.w_l2 * (cq - cq_inf) ** 2) * dx),
        w_grad=float(np.sum(stationary.w_grad * ddist**2) * dx),
        sup_theta_dist=float(np.max(np.abs(dist))),
        dt=float(dt),
    )
    check_finite(rec)
    return rec


def check_finite(rec: DiagnosticsRecord) -> None:
    bad = [k for k, v in rec.row().items() if not math.isfinite(v)]
    if bad:
        raise FloatingPointError(f"non-finite diagnostics at t={rec.t}: {', '.join(bad)}")


def weighted_gradient_dissipation(state, grid, p, stationary) -> float:
    """Integrand of the time-integrated weighted gradient term (weight at nodes)."""
    dist = theta_distance(state, p, stationary)
    return float(np.sum(stationary.w_grad_time * (np.diff(dist) / grid.dx) ** 2) * grid.dx)


def _time_derivative(values, times, at):
    """Derivative at times[at] of the quadratic through three (t, value) points."""
    t0, t1, t2 = times
    v0, v1, v2 = values
    s = times[at]
    d0 = ((s - t1) + (s - t2)) / ((t0 - t1) * (t0 - t2))
    d1 = ((s - t0) + (s - t2)) / ((t1 - t0) * (t1 - t2))
    d2 = ((s - t0) + (s - t1)) / ((t2 - t0) * (t2 - t1))
    return d0 * v0 + d1 * v1 + d2 * v2


def flux_identity_residual(states: Sequence[TransformedState], grid: MassGrid, p: ModelParams,
                           stationary: StationaryProfile, at: int = 1) -> float:
    """Sup over cells of the effective-viscous-flux identity residual.

    At each cell center x,

        A((cQ)^g - (cQ_inf)^g) + B/(theta rho_l) d/dt (cQ)^theta
            + int_0^x u_t dy + int_0^x h(Q) u|u| dy

    with time derivatives from the quadratic through three states (any
    spacing) evaluated at ``states[at]``, and ``int_0^x`` a cumulative
    trapezoid sum over nodes up to the cell center.
    """
    if len(states) != 3:
        raise ValueError("need exactly three states")
    times = [s.t for s in states]
    if not (times[0] < times[1] < times[2]):
        raise ValueError("states must have strictly increasing times")
    mid = states[at]
    w = grid.node_weights[:-1]
    dq = _time_derivative([s.cq**p.theta for s in states], times, at)
    ut = _time_derivative([s.u[:-1] for s in states], times, at)
    u = mid.u[:-1]
    hq = friction_coefficient(mid.Q, p)
    h_node = np.empty_like(hq)
    h_node[0] = hq[0]
    h_node[1:] = 0.5 * (hq[1:] + hq[:-1])
    # nodes 0..j with weights dx/2, dx, ... cover [0, x_{j+1/2}]
    int_ut = np.cumsum(w * ut)
    int_fr = np.cumsum(w * h_node * u * np.abs(u))
    res = (p.A * (mid.cq**p.gamma - stationary.cq_inf**p.gamma)
           + p.B / (p.theta * p.rho_l) * dq + int_ut + int_fr)
    return float(np.max(np.abs(res)))


def fit_decay_exponent(t, values, window=None, min_samples: int = 10) -> DecayFit:
    """Least-squares fit of ``log(value) = log(C) + k log(1 + t)`` on `window`."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    if window is None:
        window = (float(t.min()), float(t.max()))
    lo, hi = window
    if not lo < hi:
        raise FitError(f"empty fit window {window}")
    sel = (t >= lo) & (t <= hi)
    if sel.sum() < min_samples:
        raise FitError(f"only {int(sel.sum())} samples in window {window}, need {min_samples}")
    if np.any(v[sel] <= 0) or not np.all(np.isfinite(v[sel])):
        raise FitError("values in the fit window must be positive and finite")
    X = np.log1p(t[sel])
    Yv = np.log(v[sel])
    slope, intercept = np.polyfit(X, Yv, 1)
    resid = Yv - (slope * X + intercept)
    ss_tot = float(np.sum((Yv - Yv.mean()) ** 2))
    if ss_tot == 0.0:
        r2 = 1.0
    else:
        r2 = max(0.0, 1.0 - float(np.sum(resid**2)) / ss_tot)
    return DecayFit(float(slope), float(math.exp(intercept)), r2, (float(lo), float(hi)))


class OutOfRegimeWarning(UserWarning):
    pass


def theoretical_density_rate(p: ModelParams) -> float:
    """Guaranteed sup-norm decay exponent 2 theta / (4 gamma + alpha gamma - 2)."""
    if not validate_params(p).strict_regime:
        warnings.warn("parameters outside the strict regime (theta < gamma - 1); "
                      "no rate is guaranteed", OutOfRegimeWarning, stacklevel=2)
    return 2 * p.theta / (4 * p.gamma + p.alpha * p.gamma - 2)


THEORETICAL_VELOCITY_RATE = 0.5
