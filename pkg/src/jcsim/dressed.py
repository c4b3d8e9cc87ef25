"""Six-level secular model of the driven three-photon resonance.

In the strong-coupling limit the coherently driven cavity-atom system is
reduced to the first six coupled eigenstates |xi_0> .. |xi_5|: the drive
enters twice, first as second-order level shifts delta_k ~ eps_d^2/g that
dress the ladder, and second as an effective multiphoton Rabi coupling
between the ground state and the target excited state (three-photon
Omega ~ eps_d^3/g^2, two-photon Omega' = 2*sqrt(2)*eps_d^2/g). Dissipation
connects the levels downward with secular rates Gamma_ij built from the
cavity and atom decay channels.

Everything here is a pure function of the rate parameters; all rates carry
one common unit (use gamma = 1) and times its inverse. The quantitative
trajectory/correlation outputs specialize to the impedance-matched case
gamma = 2*kappa, for which the cascaded decay collapses to rates
(gamma, 2*gamma, 3*gamma) down the ladder and the conditional state after
a photodetection has the fixed weights (6/25, 9/25, 10/25).

Beat coherences are never integrated numerically: after a detection the
intra-couplet coherences rho_12 and rho_34 decouple and decay as pure
damped exponentials at the couplet splittings nu_1 ~ 2g and
nu_2 ~ 2*sqrt(2)*g; both are attached in closed form.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import StepFailure, ZeroIntensity

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)
SQRT6 = math.sqrt(6.0)

#: eps_d/g at or above which the perturbative treatment is flagged.
PERTURBATIVE_DRIVE_LIMIT = 0.15

#: Maximum steady-state occupation of |xi_5> (reached as Omega -> inf).
P5_MAX = 2.0 / 13.0

#: Maximum steady-state occupation of |xi_3> in the two-photon model.
P3_MAX = 0.25

# Second-order shift coefficients delta_k = coeff * eps_d^2 / g for the
# three-photon operating point Delta_omega_d = -g/sqrt(3). Closed forms
# from degenerate perturbation theory over the coupled-state ladder.
_C1 = ((SQRT2 + 1.0) / 2.0) ** 2
_C2 = ((SQRT2 - 1.0) / 2.0) ** 2
_C3 = ((SQRT3 + SQRT2) / 2.0) ** 2
_C4 = ((SQRT3 - SQRT2) / 2.0) ** 2

_SHIFT_COEFFS = (
    SQRT3 / 2.0,
    0.5 * SQRT3 / (1.0 - SQRT3)
    + _C1 * SQRT3 / (SQRT6 - SQRT3 - 1.0)
    - _C2 * SQRT3 / (SQRT3 + 1.0 + SQRT6),
    0.5 * SQRT3 / (1.0 + SQRT3)
    + _C2 * SQRT3 / (SQRT6 + SQRT3 - 1.0)
    + _C1 * SQRT3 / (SQRT3 - 1.0 - SQRT6),
    _C3 * SQRT3 / (2.0 - SQRT6)
    - _C4 * SQRT3 / (4.0 + SQRT6)
    + _C1 * SQRT3 / (1.0 + SQRT3 - SQRT6)
    + _C2 * SQRT3 / (1.0 - SQRT3 - SQRT6),
    _C4 * SQRT3 / (2.0 + SQRT6)
    + _C3 * SQRT3 / (SQRT6 - 4.0)
    + _C1 * SQRT3 / (1.0 + SQRT6 - SQRT3)
    + _C2 * SQRT3 / (1.0 + SQRT3 + SQRT6),
    -SQRT3,
)

# Effective three-photon coupling Omega = OMEGA3_COEFF * eps_d^3 / g^2,
# the sum over the four de-excitation pathways xi_5 -> xi_0.
OMEGA3_COEFF = (3.0 / (4.0 * SQRT2)) * (
    (SQRT3 - SQRT2) * (1.0 + SQRT2) / ((2.0 + SQRT6) * (1.0 + SQRT3))
    + (SQRT3 - SQRT2) * (SQRT2 - 1.0) / ((2.0 + SQRT6) * (1.0 - SQRT3))
    + (SQRT3 + SQRT2) * (SQRT2 + 1.0) / ((2.0 - SQRT6) * (1.0 - SQRT3))
    + (SQRT3 + SQRT2) * (SQRT2 - 1.0) / ((2.0 - SQRT6) * (1.0 + SQRT3))
)


def perturbative_shifts(eps_d: float, g: float):
    """Second-order level shifts (delta_0..delta_5) at the three-photon point.

    Each shift scales exactly as eps_d^2/g. Warns (never errors) once the
    drive leaves the perturbative window eps_d/g >= 0.15.
    """
    if eps_d / g >= PERTURBATIVE_DRIVE_LIMIT:
        warnings.warn(
            f"eps_d/g = {eps_d / g:.3g} is at or beyond the perturbative "
            f"window (< {PERTURBATIVE_DRIVE_LIMIT}); shifts degrade",
            stacklevel=2,
        )
    x = eps_d * eps_d / g
    return tuple(c * x for c in _SHIFT_COEFFS)


def three_photon_rabi(eps_d: float, g: float) -> float:
    """Effective Rabi frequency Omega of the three-photon transition."""
    if eps_d < 0:
        raise ValueError("eps_d must be >= 0")
    return OMEGA3_COEFF * eps_d**3 / g**2


def two_photon_rabi(eps_d: float, g: float) -> float:
    """Effective Rabi frequency Omega' = 2*sqrt(2)*eps_d^2/g."""
    if eps_d < 0:
        raise ValueError("eps_d must be >= 0")
    return 2.0 * SQRT2 * eps_d * eps_d / g


def resonance_detuning(n_photon: int, eps_d: float, g: float) -> float:
    """Drive detuning that hits the (drive-shifted) n-photon resonance.

    n=3: Delta_omega_d = -g/sqrt(3) - (sqrt(3)/2) eps_d^2/g
    n=2: Delta_omega_d = -g/sqrt(2) - sqrt(2) eps_d^2/g
    """
    x = eps_d * eps_d / g
    if n_photon == 3:
        return -g / SQRT3 - (SQRT3 / 2.0) * x
    if n_photon == 2:
        return -g / SQRT2 - SQRT2 * x
    raise ValueError(f"only 2- and 3-photon resonances supported, got {n_photon}")


class SecularRates(NamedTuple):
    """Downward transition rates between the six dressed levels."""

    Gamma10: float
    Gamma20: float
    Gamma31: float
    Gamma42: float
    Gamma32: float
    Gamma41: float
    Gamma53: float
    Gamma54: float


def secular_rates(gamma: float, kappa: float) -> SecularRates:
    """Secular-approximation rates from the cavity (kappa) and atom (gamma)."""
    if gamma < 0 or kappa < 0:
        raise ValueError("rates must be non-negative")
    g10 = 0.5 * gamma + kappa
    g31 = 0.25 * gamma + 0.5 * kappa * (SQRT2 + 1.0) ** 2
    g32 = 0.25 * gamma + 0.5 * kappa * (SQRT2 - 1.0) ** 2
    g53 = 0.25 * gamma + 0.5 * kappa * (SQRT3 + SQRT2) ** 2
    g54 = 0.25 * gamma + 0.5 * kappa * (SQRT3 - SQRT2) ** 2
    return SecularRates(g10, g10, g31, g31, g32, g32, g53, g54)


def detailed_balance_populations(p5: float, rates: SecularRates):
    """Steady-state occupations (p0..p5) fed by the level-5 population."""
    if not 0.0 <= p5 <= P5_MAX:
        raise ValueError(f"p5 must lie in [0, 2/13], got {p5}")
    p3 = rates.Gamma53 * p5 / (rates.Gamma31 + rates.Gamma32)
    p4 = rates.Gamma54 * p5 / (rates.Gamma41 + rates.Gamma42)
    p1 = (rates.Gamma31 * p3 + rates.Gamma41 * p4) / rates.Gamma10
    p2 = (rates.Gamma32 * p3 + rates.Gamma42 * p4) / rates.Gamma20
    p0 = 1.0 - (p1 + p2 + p3 + p4 + p5)
    return (p0, p1, p2, p3, p4, p5)


def p5_steady(omega: float, gamma: float) -> float:
    """Saturation curve of the three-photon transition."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return 4.0 * omega**2 / (26.0 * omega**2 + 9.0 * gamma**2)


def p3_steady(omega_prime: float, gamma: float) -> float:
    """Saturation curve of the two-photon transition."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return omega_prime**2 / (4.0 * omega_prime**2 + gamma**2)


def omega_for_p5(p5: float, gamma: float) -> float:
    """Invert the p5 saturation curve (p5 strictly below 2/13)."""
    if not 0.0 <= p5 < P5_MAX:
        raise ValueError("p5 must lie in [0, 2/13)")
    return 3.0 * gamma * math.sqrt(p5 / (4.0 - 26.0 * p5))


def omega_prime_for_p3(p3: float, gamma: float) -> float:
    """Invert the p3 saturation curve (p3 strictly below 1/4)."""
    if not 0.0 <= p3 < P3_MAX:
        raise ValueError("p3 must lie in [0, 1/4)")
    return gamma * math.sqrt(p3 / (1.0 - 4.0 * p3))


# ---------------------------------------------------------------------------
# Parameter bundle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DressedParams:
    """Rates of the effective model plus the derived drive quantities."""

    g: float
    kappa: float
    gamma: float
    eps_d: float

    def __post_init__(self):
        if self.g <= 0:
            raise ValueError("g must be positive")
        if self.kappa < 0 or self.gamma < 0:
            raise ValueError("kappa and gamma must be non-negative")
        if self.kappa == 0 and self.gamma == 0:
            raise ValueError("at least one decay channel is required")
        if self.eps_d < 0:
            raise ValueError("eps_d must be non-negative")

    @classmethod
    def from_omega3(cls, omega, g, kappa, gamma):
        """Choose eps_d so the three-photon Rabi frequency equals omega."""
        eps = (omega * g * g / OMEGA3_COEFF) ** (1.0 / 3.0)
        return cls(g=g, kappa=kappa, gamma=gamma, eps_d=eps)

    @classmethod
    def from_omega_prime(cls, omega_prime, g, kappa, gamma):
        """Choose eps_d so the two-photon Rabi frequency equals omega_prime."""
        eps = math.sqrt(omega_prime * g / (2.0 * SQRT2))
        return cls(g=g, kappa=kappa, gamma=gamma, eps_d=eps)

    @cached_property
    def omega3(self) -> float:
        return three_photon_rabi(self.eps_d, self.g)

    @cached_property
    def omega_prime(self) -> float:
        return two_photon_rabi(self.eps_d, self.g)

    @cached_property
    def shifts(self):
        return perturbative_shifts(self.eps_d, self.g)

    @cached_property
    def rates(self) -> SecularRates:
        return secular_rates(self.gamma, self.kappa)

    @cached_property
    def nu1(self) -> float:
        """First beat frequency, the splitting of the (xi_1, xi_2) couplet."""
        d = self.shifts
        return 2.0 * self.g + (d[2] - d[1])

    @cached_property
    def nu2(self) -> float:
        """Second beat frequency, the splitting of the (xi_3, xi_4) couplet."""
        d = self.shifts
        return 2.0 * SQRT2 * self.g + (d[4] - d[3])

    @property
    def impedance_matched(self) -> bool:
        return math.isclose(self.gamma, 2.0 * self.kappa, rel_tol=1e-9)

    def require_impedance_matched(self, what: str):
        if not self.impedance_matched:
            raise ValueError(
                f"{what} is derived for gamma = 2*kappa; got "
                f"gamma={self.gamma}, kappa={self.kappa}"
            )


# ---------------------------------------------------------------------------
# Six-level state and rate-equation dynamics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SixLevelState:
    """Populations, the drive coherence D = Im(rho_05), and the two beats."""

    rho00: float
    rho11: float
    rho22: float
    rho33: float
    rho44: float
    rho55: float
    D: float = 0.0
    rho12: complex = 0.0 + 0.0j
    rho34: complex = 0.0 + 0.0j

    def populations(self) -> np.ndarray:
        return np.array([self.rho00, self.rho11, self.rho22,
                         self.rho33, self.rho44, self.rho55])

    def validate(self, pop_tol=1e-10, sum_tol=1e-8, cs_tol=1e-8):
        pops = self.populations()
        if pops.min() < -pop_tol:
            raise ValueError(f"negative population {pops.min()}")
        if abs(pops.sum() - 1.0) > sum_tol:
            raise ValueError(f"populations sum to {pops.sum()}, not 1")
        if abs(self.rho12) > math.sqrt(max(self.rho11 * self.rho22, 0.0)) + cs_tol:
            raise ValueError("rho12 violates the Cauchy-Schwarz bound")
        if abs(self.rho34) > math.sqrt(max(self.rho33 * self.rho44, 0.0)) + cs_tol:
            raise ValueError("rho34 violates the Cauchy-Schwarz bound")
        return self

    def photon_number(self) -> float:
        """Expectation of a†a in the dressed-basis form (couplet weights
        1/2, 3/2, 5/2 plus the two beat contributions)."""
        return (
            0.5 * (self.rho11 + self.rho22) + self.rho12.real
            + 1.5 * (self.rho33 + self.rho44) + self.rho34.real
            + 2.5 * self.rho55
        )


@dataclass(frozen=True)
class ConditionalState:
    """State prepared by detecting one forward-scattered photon at steady
    state (gamma = 2*kappa): a vacuum part plus two pure superpositions of
    the intermediate couplets."""

    w_vac: float
    w_super1: float
    w_super2: float
    amp_super1: tuple  # amplitudes on (xi_1, xi_2)
    amp_super2: tuple  # amplitudes on (xi_3, xi_4)

    def initial_state(self) -> SixLevelState:
        a1, a2 = self.amp_super1
        b1, b2 = self.amp_super2
        return SixLevelState(
            rho00=self.w_vac,
            rho11=self.w_super1 * a1 * a1,
            rho22=self.w_super1 * a2 * a2,
            rho33=self.w_super2 * b1 * b1,
            rho44=self.w_super2 * b2 * b2,
            rho55=0.0,
            D=0.0,
            rho12=complex(self.w_super1 * a1 * a2),
            rho34=complex(self.w_super2 * b1 * b2),
        )


def conditional_state() -> ConditionalState:
    """Post-detection state of the three-photon cascade (gamma = 2*kappa).

    Weights 6/25, 9/25, 10/25; the superpositions carry amplitude ratios
    (sqrt(2)+1)/2 : (sqrt(2)-1)/2 and (sqrt(3)+sqrt(2))/2 : (sqrt(3)-sqrt(2))/2,
    which fixes rho12(0) = 3/50 and rho34(0) = 1/25.
    """
    s23 = math.sqrt(2.0 / 3.0)
    s25 = math.sqrt(2.0 / 5.0)
    return ConditionalState(
        w_vac=6.0 / 25.0,
        w_super1=9.0 / 25.0,
        w_super2=10.0 / 25.0,
        amp_super1=(s23 * (SQRT2 + 1.0) / 2.0, s23 * (SQRT2 - 1.0) / 2.0),
        amp_super2=(s25 * (SQRT3 + SQRT2) / 2.0, s25 * (SQRT3 - SQRT2) / 2.0),
    )


def _rate_matrix(rates: SecularRates, omega: float) -> np.ndarray:
    """Generator of the coupled (populations, D) block in the rotated frame."""
    r = rates
    m = np.zeros((7, 7))
    # columns: rho00 rho11 rho22 rho33 rho44 rho55 D
    m[0, 1] = r.Gamma10
    m[0, 2] = r.Gamma20
    m[0, 6] = -2.0 * omega
    m[1, 1] = -r.Gamma10
    m[1, 3] = r.Gamma31
    m[1, 4] = r.Gamma41
    m[2, 2] = -r.Gamma20
    m[2, 3] = r.Gamma32
    m[2, 4] = r.Gamma42
    m[3, 3] = -(r.Gamma31 + r.Gamma32)
    m[3, 5] = r.Gamma53
    m[4, 4] = -(r.Gamma41 + r.Gamma42)
    m[4, 5] = r.Gamma54
    m[5, 5] = -(r.Gamma53 + r.Gamma54)
    m[5, 6] = 2.0 * omega
    m[6, 0] = omega
    m[6, 5] = -omega
    m[6, 6] = -0.5 * (r.Gamma53 + r.Gamma54)
    return m


def rate_evolve(init: SixLevelState, params: DressedParams,
                tau_grid: Sequence[float],
                rtol: float = 1e-8, atol: float = 1e-10):
    """Integrate the secular rate equations from tau = 0.

    The seven coupled real variables (six populations and D) are integrated
    with an adaptive embedded Runge-Kutta; the two beat coherences evolve by
    their closed forms rho12(0) e^((i nu1 - Gb1) tau) and
    rho34(0) e^((i nu2 - Gb2) tau) and are never integrated numerically.
    """
    tau = np.asarray(tau_grid, dtype=float)
    if tau.ndim != 1 or tau.size == 0 or np.any(np.diff(tau) <= 0) or tau[0] < 0:
        raise ValueError("tau_grid must be ascending and non-negative")
    r = params.rates
    m = _rate_matrix(r, params.omega3)
    y0 = np.array([init.rho00, init.rho11, init.rho22, init.rho33,
                   init.rho44, init.rho55, init.D])

    t_end = float(tau[-1])
    if t_end == 0.0:
        ys = y0[:, None]
    else:
        sol = solve_ivp(lambda t, y: m @ y, (0.0, t_end), y0,
                        method="DOP853", t_eval=tau, rtol=rtol, atol=atol)
        if not sol.success:
            raise StepFailure(f"rate-equation integration failed: {sol.message}",
                              t_reached=sol.t[-1] if sol.t.size else 0.0)
        ys = sol.y

    gb1 = 0.5 * (r.Gamma10 + r.Gamma20)
    gb2 = 0.5 * (r.Gamma31 + r.Gamma41 + r.Gamma32 + r.Gamma42)
    beat1 = init.rho12 * np.exp((1j * params.nu1 - gb1) * tau)
    beat2 = init.rho34 * np.exp((1j * params.nu2 - gb2) * tau)

    return [
        SixLevelState(*ys[:6, i], D=ys[6, i],
                      rho12=complex(beat1[i]), rho34=complex(beat2[i]))
        for i in range(tau.size)
    ]


def g2_analytic_3photon(params: DressedParams, tau_grid) -> np.ndarray:
    """Intensity correlation of the three-photon cascade from the six-level
    model, starting from the post-detection conditional state.

    g2(tau) = <a†a>(tau) / <a†a>_ss with <a†a>_ss = (25/4) p5; the beats
    contribute [6/(625 p5)] e^(-gamma tau) cos(nu1 tau) and
    [4/(625 p5)] e^(-2 gamma tau) cos(nu2 tau).
    """
    params.require_impedance_matched("the analytic intensity correlation")
    p5 = p5_steady(params.omega3, params.gamma)
    if p5 < 1e-12:
        raise ZeroIntensity("steady state holds no photons (p5 < 1e-12)")
    states = rate_evolve(conditional_state().initial_state(), params, tau_grid)
    n_tau = np.array([s.photon_number() for s in states])
    return n_tau / (6.25 * p5)


# ---------------------------------------------------------------------------
# Two-photon (four-level) companion model
# ---------------------------------------------------------------------------
#
# The two-photon resonance uses the minimal ladder xi_0..xi_3 with the
# effective drive Omega' acting on the (xi_0, xi_3) pair. Its rate equations
# are the xi_0..xi_3 restriction of the six-level set; the post-detection
# state is rho_cond = (2/5)|xi_0><xi_0| + (3/5)|psi_super,1><psi_super,1|,
# giving rho12(0) = 1/10. The level shifts entering the single beat
# frequency are evaluated at the two-photon operating point
# Delta_omega_d = -g/sqrt(2) (energy ladder E(n,±) = n g/sqrt(2) ± sqrt(n) g),
# where delta_0 = sqrt(2) eps_d^2/g and delta_3 = -sqrt(2) eps_d^2/g
# reproduce the quoted resonance condition -1/sqrt(2) - sqrt(2)(eps_d/g)^2.

_E1_2PH = 1.0 / SQRT2 - 1.0          # E(1,-)/g at the two-photon point
_E2_2PH = 1.0 / SQRT2 + 1.0          # E(1,+)/g
_E4_2PH = 2.0 * SQRT2                # E(2,+)/g; E(2,-) = 0 is the resonance

_SHIFT1_2PH = (0.5 + _C1) / _E1_2PH + _C2 / (_E1_2PH - _E4_2PH)
_SHIFT2_2PH = (0.5 + _C2) / _E2_2PH + _C1 / (_E2_2PH - _E4_2PH)


def two_photon_shift_pair(eps_d: float, g: float):
    """Second-order shifts (delta_1, delta_2) at the two-photon point."""
    x = eps_d * eps_d / g
    return (_SHIFT1_2PH * x, _SHIFT2_2PH * x)


def beat_frequency_2photon(eps_d: float, g: float) -> float:
    d1, d2 = two_photon_shift_pair(eps_d, g)
    return 2.0 * g + (d2 - d1)


@dataclass(frozen=True)
class FourLevelState:
    """Two-photon analog of SixLevelState (D = Im(rho_03))."""

    rho00: float
    rho11: float
    rho22: float
    rho33: float
    D: float = 0.0
    rho12: complex = 0.0 + 0.0j

    def populations(self) -> np.ndarray:
        return np.array([self.rho00, self.rho11, self.rho22, self.rho33])

    def photon_number(self) -> float:
        return 0.5 * (self.rho11 + self.rho22) + self.rho12.real + 1.5 * self.rho33


def conditional_state_2photon() -> FourLevelState:
    """Post-detection state of the two-photon cascade (gamma = 2*kappa)."""
    w1 = 3.0 / 5.0
    a1 = math.sqrt(2.0 / 3.0) * (SQRT2 + 1.0) / 2.0
    a2 = math.sqrt(2.0 / 3.0) * (SQRT2 - 1.0) / 2.0
    return FourLevelState(
        rho00=2.0 / 5.0,
        rho11=w1 * a1 * a1,
        rho22=w1 * a2 * a2,
        rho33=0.0,
        D=0.0,
        rho12=complex(w1 * a1 * a2),
    )


def rate_evolve_2photon(init: FourLevelState, params: DressedParams,
                        tau_grid, rtol=1e-8, atol=1e-10):
    """Integrate the four-level restriction of the rate equations."""
    tau = np.asarray(tau_grid, dtype=float)
    if tau.ndim != 1 or tau.size == 0 or np.any(np.diff(tau) <= 0) or tau[0] < 0:
        raise ValueError("tau_grid must be ascending and non-negative")
    r = params.rates
    w = params.omega_prime
    m = np.zeros((5, 5))
    # columns: rho00 rho11 rho22 rho33 D
    m[0, 1] = r.Gamma10
    m[0, 2] = r.Gamma20
    m[0, 4] = -2.0 * w
    m[1, 1] = -r.Gamma10
    m[1, 3] = r.Gamma31
    m[2, 2] = -r.Gamma20
    m[2, 3] = r.Gamma32
    m[3, 3] = -(r.Gamma31 + r.Gamma32)
    m[3, 4] = 2.0 * w
    m[4, 0] = w
    m[4, 3] = -w
    m[4, 4] = -0.5 * (r.Gamma31 + r.Gamma32)
    y0 = np.array([init.rho00, init.rho11, init.rho22, init.rho33, init.D])

    t_end = float(tau[-1])
    if t_end == 0.0:
        ys = y0[:, None]
    else:
        sol = solve_ivp(lambda t, y: m @ y, (0.0, t_end), y0,
                        method="DOP853", t_eval=tau, rtol=rtol, atol=atol)
        if not sol.success:
            raise StepFailure(f"four-level integration failed: {sol.message}",
                              t_reached=sol.t[-1] if sol.t.size else 0.0)
        ys = sol.y

    gb1 = 0.5 * (r.Gamma10 + r.Gamma20)
    nu1 = beat_frequency_2photon(params.eps_d, params.g)
    beat = init.rho12 * np.exp((1j * nu1 - gb1) * tau)
    return [
        FourLevelState(*ys[:4, i], D=ys[4, i], rho12=complex(beat[i]))
        for i in range(tau.size)
    ]


def g2_analytic_2photon(params: DressedParams, tau_grid) -> np.ndarray:
    """Intensity correlation of the two-photon cascade from the four-level
    model; <a†a>_ss = (5/2) p3 and the saturation limit of g2(0) is 16/25.
    """
    params.require_impedance_matched("the analytic intensity correlation")
    p3 = p3_steady(params.omega_prime, params.gamma)
    if p3 < 1e-12:
        raise ZeroIntensity("steady state holds no photons (p3 < 1e-12)")
    states = rate_evolve_2photon(conditional_state_2photon(), params, tau_grid)
    n_tau = np.array([s.photon_number() for s in states])
    return n_tau / (2.5 * p3)


# ---------------------------------------------------------------------------
# Validity diagnostics
# ---------------------------------------------------------------------------

#: isolation ratio above which the four-photon resonance is considered far.
ISOLATION_RATIO_MIN = 10.0


@dataclass(frozen=True)
class ValidityReport:
    """Numeric health checks of the secular six-level treatment."""

    drive_present: bool
    four_photon_isolation: float
    shift_to_rabi: float | None
    omega_over_gamma: float | None
    perturbative_ok: bool
    messages: tuple

    @property
    def isolated(self) -> bool:
        return self.four_photon_isolation >= ISOLATION_RATIO_MIN


def validity_report(params: DressedParams) -> ValidityReport:
    """Evaluate the stated validity scalings of the effective model.

    Reports the isolation of the four-photon resonance,
    (4-2*sqrt(3)) g / (sqrt(3) max(kappa, gamma/2)), the ratio of the
    zero-subspace shift difference to the effective Rabi frequency, and
    Omega/gamma; flags a drive outside the perturbative window.
    """
    msgs = []
    slow = max(params.kappa, 0.5 * params.gamma)
    isolation = (4.0 - 2.0 * SQRT3) * params.g / (SQRT3 * slow)
    if isolation >= ISOLATION_RATIO_MIN:
        msgs.append("isolated")
    else:
        msgs.append("four-photon resonance not well separated")

    if params.eps_d == 0.0:
        msgs.append("no drive")
        return ValidityReport(
            drive_present=False,
            four_photon_isolation=isolation,
            shift_to_rabi=None,
            omega_over_gamma=None,
            perturbative_ok=True,
            messages=tuple(msgs),
        )

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        d = perturbative_shifts(params.eps_d, params.g)
    omega = params.omega3
    shift_to_rabi = abs(d[5] - d[0]) / omega
    perturbative_ok = params.eps_d / params.g < PERTURBATIVE_DRIVE_LIMIT
    if not perturbative_ok:
        note = (f"eps_d/g = {params.eps_d / params.g:.3g} beyond the "
                f"perturbative window (>= {PERTURBATIVE_DRIVE_LIMIT})")
        msgs.append(note)
        warnings.warn(note, stacklevel=2)
    return ValidityReport(
        drive_present=True,
        four_photon_isolation=isolation,
        shift_to_rabi=shift_to_rabi,
        omega_over_gamma=omega / params.gamma if params.gamma > 0 else math.inf,
        perturbative_ok=perturbative_ok,
        messages=tuple(msgs),
    )
