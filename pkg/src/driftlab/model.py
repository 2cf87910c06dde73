"""Parameters, variable maps, constitutive laws and initial data.

The evolved system lives in Lagrangian mass coordinates ``x in [0, 1]``:

    c_t = 0
    Q_t + rho_l Q^2 u_x = 0
    u_t + (A (cQ)^gamma)_x = -h(Q) u|u| + g + (B c^theta Q^(1+theta) u_x)_x

with vacuum ``cQ = 0`` at ``x = 0`` and a wall ``u = 0`` at ``x = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np

from .grid import MassGrid


class DomainError(ValueError):
    """Argument outside the domain of a variable map."""


class ParameterError(ValueError):
    """Raised when parameters cannot be used; carries the violated codes."""

    def __init__(self, codes, message=None):
        self.codes = list(codes)
        super().__init__(message or "invalid parameters: " + ", ".join(self.codes))


# Fatal codes: the model is undefined. Window codes: outside the theorem's range.
GAMMA_NOT_GT_ONE = "GAMMA_NOT_GT_ONE"
NONFINITE_PARAMETER = "NONFINITE_PARAMETER"
THETA_NOT_POSITIVE = "THETA_NOT_POSITIVE"
RHO_L_NOT_POSITIVE = "RHO_L_NOT_POSITIVE"
A_NOT_POSITIVE = "A_NOT_POSITIVE"
B_NOT_POSITIVE = "B_NOT_POSITIVE"
G_NOT_POSITIVE = "G_NOT_POSITIVE"
F_NEGATIVE = "F_NEGATIVE"
ALPHA_NEGATIVE = "ALPHA_NEGATIVE"

ALPHA_GE_INV_GAMMA = "ALPHA_GE_INV_GAMMA"
THETA_GT_GAMMA_HALF = "THETA_GT_GAMMA_HALF"
THETA_GT_GAMMA_MINUS_1 = "THETA_GT_GAMMA_MINUS_1"
THETA_GT_ONE_MINUS_ALPHA_GAMMA = "THETA_GT_ONE_MINUS_ALPHA_GAMMA"


@dataclass(frozen=True)
class ModelParams:
    gamma: float = 2.0
    theta: float = 0.5
    alpha: float = 0.0
    rho_l: float = 1.0
    A: float = 1.0
    B: float = 1.0
    f: float = 1.0
    g: float = 1.0

    @property
    def theorem_regime(self) -> bool:
        return validate_params(self).theorem_regime

    @property
    def strict_regime(self) -> bool:
        return validate_params(self).strict_regime


@dataclass(frozen=True)
class ValidationReport:
    fatal: tuple[str, ...] = ()
    violations: tuple[str, ...] = ()
    theorem_regime: bool = False
    strict_regime: bool = False

    @property
    def ok(self) -> bool:
        return not self.fatal and not self.violations

    @property
    def codes(self) -> tuple[str, ...]:
        return self.fatal + self.violations


def validate_params(p: ModelParams) -> ValidationReport:
    """Check `p` against the model's hard constraints and the theorem window.

    Fatal codes mean the model cannot be evaluated at all. Window violations
    leave a runnable model that the convergence theorems say nothing about;
    callers may run those with an explicit force flag.
    """
    values = (p.gamma, p.theta, p.alpha, p.rho_l, p.A, p.B, p.f, p.g)
    if not all(math.isfinite(v) for v in values):
        return ValidationReport(fatal=(NONFINITE_PARAMETER,))

    fatal = []
    if not p.gamma > 1:
        fatal.append(GAMMA_NOT_GT_ONE)
    if not p.theta > 0:
        fatal.append(THETA_NOT_POSITIVE)
    if not p.rho_l > 0:
        fatal.append(RHO_L_NOT_POSITIVE)
    if not p.A > 0:
        fatal.append(A_NOT_POSITIVE)
    if not p.B > 0:
        fatal.append(B_NOT_POSITIVE)
    if not p.g > 0:
        fatal.append(G_NOT_POSITIVE)
    if p.f < 0:
        fatal.append(F_NEGATIVE)
    if p.alpha < 0:
        fatal.append(ALPHA_NEGATIVE)
    if fatal:
        return ValidationReport(fatal=tuple(fatal))

    window = []
    if p.alpha * p.gamma >= 1:
        window.append(ALPHA_GE_INV_GAMMA)
    if p.theta > p.gamma / 2:
        window.append(THETA_GT_GAMMA_HALF)
    if p.theta > p.gamma - 1:
        window.append(THETA_GT_GAMMA_MINUS_1)
    if p.theta > 1 - p.alpha * p.gamma:
        window.append(THETA_GT_ONE_MINUS_ALPHA_GAMMA)
    theorem = not window
    return ValidationReport(
        violations=tuple(window),
        theorem_regime=theorem,
        strict_regime=theorem and p.theta < p.gamma - 1,
    )


def require_valid(p: ModelParams, force: bool = False) -> ValidationReport:
    """Raise ParameterError unless `p` is usable (window violations pass with `force`)."""
    report = validate_params(p)
    if report.fatal or (report.violations and not force):
        raise ParameterError(report.codes)
    return report


@dataclass(frozen=True)
class PhysicalState:
    n: float
    m: float
    u: float = 0.0


def to_transformed(s: PhysicalState, p: ModelParams) -> tuple[float, float]:
    """Map gas/liquid masses (n, m) to the ratio c = n/m and Q = m/(rho_l - m)."""
    if s.m == 0:
        raise DomainError("m = 0: the ratio n/m is undefined")
    if not 0 < s.m < p.rho_l:
        raise DomainError(f"m = {s.m} outside (0, rho_l = {p.rho_l})")
    if s.n < 0:
        raise DomainError(f"n = {s.n} is negative")
    # exact rational arithmetic, rounded once, keeps the round trip within 2 ULP
    m = Fraction(s.m)
    return float(Fraction(s.n) / m), float(m / (Fraction(p.rho_l) - m))


def from_transformed(c: float, Q: float, p: ModelParams) -> tuple[float, float]:
    """Inverse of `to_transformed`: returns (n, m)."""
    if not Q > 0:
        raise DomainError(f"Q = {Q} must be positive")
    if c < 0:
        raise DomainError(f"c = {c} is negative")
    m = Fraction(p.rho_l) * Fraction(Q) / (1 + Fraction(Q))
    return float(Fraction(c) * m), float(m)


def friction_coefficient(Q, p: ModelParams):
    """h(Q) = f rho_l^2 Q^2 / (1+Q)^2; accepts scalars or arrays."""
    Q = np.asarray(Q, dtype=float)
    if np.any(Q < 0):
        raise DomainError("friction_coefficient needs Q >= 0")
    r = Q / (1 + Q)
    out = p.f * p.rho_l**2 * r * r
    if np.isinf(Q).any():
        out = np.where(np.isinf(Q), p.f * p.rho_l**2, out)
    return out[()] if out.ndim == 0 else out


def stationary_cq(x, p: ModelParams):
    """Hydrostatic profile (g x / A)^(1/gamma), zero at the vacuum end."""
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise DomainError("mass coordinate must lie in [0, 1]")
    out = (p.g * x / p.A) ** (1.0 / p.gamma)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class StationaryProfile:
    cq_inf: np.ndarray      # cells
    w_l2: np.ndarray        # cells, x^(1 - 3/gamma)
    w_grad: np.ndarray      # interior nodes 1..N-1, x^(((2+alpha)gamma - theta - 1)/gamma)
    w_grad_time: np.ndarray  # interior nodes, x^(((3+alpha)gamma - 2 theta - 1)/gamma)

    def q_inf(self, c: np.ndarray) -> np.ndarray:
        return self.cq_inf / c


def build_stationary(grid: MassGrid, p: ModelParams) -> StationaryProfile:
    x = grid.cell_centers
    xn = grid.nodes[1:-1]
    ga, th, al = p.gamma, p.theta, p.alpha
    return StationaryProfile(
        cq_inf=stationary_cq(x, p),
        w_l2=x ** (1 - 3 / ga),
        w_grad=xn ** (((2 + al) * ga - th - 1) / ga),
        w_grad_time=xn ** (((3 + al) * ga - 2 * th - 1) / ga),
    )


class ProfileKind(str, Enum):
    SINE = "sine"
    STATIONARY = "stationary"


@dataclass(frozen=True)
class InitialDataSpec:
    profile_kind: ProfileKind = ProfileKind.SINE
    kappa_lo: float = 0.8
    kappa_hi: float = 1.2
    c_amp: float = 1.0
    u_amp: float = 0.05
    perturb_wavenumber: int = 2


@dataclass(eq=False)
class TransformedState:
    t: float
    c: np.ndarray
    Q: np.ndarray
    u: np.ndarray

    @property
    def cq(self) -> np.ndarray:
        return self.c * self.Q

    def copy(self) -> "TransformedState":
        # c is never written, so it is shared.
        return TransformedState(self.t, self.c, self.Q.copy(), self.u.copy())


def envelope(x, spec: InitialDataSpec):
    """kappa(x) in [kappa_lo, kappa_hi] multiplying x^(1/gamma) in cQ_0."""
    s = 0.5 * (1 + np.sin(2 * np.pi * spec.perturb_wavenumber * x))
    return spec.kappa_lo + (spec.kappa_hi - spec.kappa_lo) * s


def initial_velocity(x, spec: InitialDataSpec):
    return spec.u_amp * np.sin(np.pi * x) * (1 - x)


def build_initial_data(spec: InitialDataSpec, grid: MassGrid, p: ModelParams) -> TransformedState:
    """Sample (c0, Q0, u0) at t = 0.

    ``c0 = c_amp x^alpha`` and ``cQ0 = kappa(x) x^(1/gamma)``; Q0 is formed as
    ``kappa x^(1/gamma - alpha) / c_amp`` so nothing is divided by a vanishing c0.
    The STATIONARY kind returns cQ0 = cQ_inf and u0 = 0 exactly.
    """
    if not spec.kappa_lo > 0:
        raise ParameterError(["KAPPA_LO_NOT_POSITIVE"])
    if spec.kappa_hi < spec.kappa_lo:
        raise ParameterError(["KAPPA_HI_LT_KAPPA_LO"])
    if not spec.c_amp > 0:
        raise ParameterError(["C_AMP_NOT_POSITIVE"])
    x = grid.cell_centers
    c = spec.c_amp * x**p.alpha
    if ProfileKind(spec.profile_kind) is ProfileKind.STATIONARY:
        Q = stationary_cq(x, p) / c
        u = np.zeros(grid.n_cells + 1)
    else:
        Q = envelope(x, spec) * x ** (1 / p.gamma - p.alpha) / spec.c_amp
        u = initial_velocity(grid.nodes, spec)
        u[-1] = 0.0
    c.setflags(write=False)
    return TransformedState(0.0, c, Q, u)
