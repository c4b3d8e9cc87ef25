"""Wigner quasi-probability distributions of the cavity field.

Two routes produce the same object. `wigner_numeric` transforms an
arbitrary truncated field density matrix through the displaced-parity
representation

    W(alpha) = (2/pi) sum_n (-1)^n <n| D†(alpha) rho D(alpha) |n>,

evaluated in closed form with associated Laguerre polynomials (three-term
recurrences throughout, no factorials). `wigner_ss_analytic` and
`wigner_transient` evaluate the closed forms of the six-level secular
model: a Gaussian envelope times Laguerre terms of the first four Fock
states plus a cubic term i[alpha^3 - (alpha*)^3] that breaks the azimuthal
symmetry into the three-fold pattern of the three-photon resonance.

Conventions: alpha = x + i y; a field is sampled as values[ix, iy] on the
rectangular grid; |W| <= 2/pi everywhere and the plane integral is 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import dressed, hilbert
from .dressed import DressedParams, FourLevelState, SixLevelState
from .hilbert import FieldDensityMatrix

TWO_OVER_PI = 2.0 / math.pi


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Rectangular sampling of the quadrature plane alpha = x + i y."""

    x_min: float = -3.0
    x_max: float = 3.0
    y_min: float = -3.0
    y_max: float = 3.0
    nx: int = 241
    ny: int = 241

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError("need at least two samples per axis")
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)
                and math.isfinite(self.y_min) and math.isfinite(self.y_max)):
            raise ValueError("grid ranges must be finite")
        if self.x_max <= self.x_min or self.y_max <= self.y_min:
            raise ValueError("grid ranges must be increasing")

    @property
    def x_values(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def y_values(self) -> np.ndarray:
        return np.linspace(self.y_min, self.y_max, self.ny)

    def alpha(self) -> np.ndarray:
        """Complex samples, shape (nx, ny)."""
        return self.x_values[:, None] + 1j * self.y_values[None, :]

    @property
    def radius(self) -> float:
        """Largest circle around the origin fully inside the grid."""
        return min(-self.x_min, self.x_max, -self.y_min, self.y_max)


#: Default grid of the contour figures; odd count puts a sample at 0.
DEFAULT_GRID = PhaseSpaceGrid()


@dataclass(frozen=True)
class WignerField:
    """Real Wigner samples on a phase-space grid."""

    grid: PhaseSpaceGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.values.shape != (self.grid.nx, self.grid.ny):
            raise ValueError("value array does not match the grid")

    def integral(self) -> float:
        """Trapezoidal quadrature of the field over the grid."""
        inner = np.trapezoid(self.values, self.grid.y_values, axis=1)
        return float(np.trapezoid(inner, self.grid.x_values))

    def at_origin(self) -> float:
        """Value at alpha = 0 (requires a sample on each axis zero)."""
        ix = int(np.argmin(np.abs(self.grid.x_values)))
        iy = int(np.argmin(np.abs(self.grid.y_values)))
        if abs(self.grid.x_values[ix]) > 1e-12 or abs(self.grid.y_values[iy]) > 1e-12:
            raise ValueError("grid holds no sample at the origin")
        return float(self.values[ix, iy])


def _laguerre_upto(x: np.ndarray, kmax: int) -> list[np.ndarray]:
    """Laguerre polynomials L_0..L_kmax of x by the three-term recurrence."""
    out = [np.ones_like(x)]
    if kmax >= 1:
        out.append(1.0 - x)
    for k in range(1, kmax):
        out.append(((2 * k + 1 - x) * out[k] - k * out[k - 1]) / (k + 1))
    return out


def wigner_numeric(rho_c: FieldDensityMatrix, grid: PhaseSpaceGrid = DEFAULT_GRID
                   ) -> WignerField:
    """Wigner transform of a truncated field density matrix.

    Expands rho over |m><n| and sums the displaced-parity kernels
    (2/pi) e^(-2|a|^2) (-1)^m sqrt(m!/n!) (2a)^(n-m) L_m^(n-m)(4|a|^2);
    the associated Laguerre values come from the degree recurrence and the
    sqrt(m!/n!) ladder from stepwise ratios, so no factorial overflows.
    """
    hilbert.warn_if_truncated(rho_c, "wigner_numeric")
    n = rho_c.fock_cutoff
    rho = rho_c.elements
    alpha = grid.alpha()
    r2 = 4.0 * (alpha.real**2 + alpha.imag**2)

    acc = np.zeros(alpha.shape, dtype=float)
    two_alpha = 2.0 * alpha
    pow_j = np.ones_like(alpha)  # (2 alpha)^j, built up per offset
    for j in range(n):
        if j > 0:
            pow_j = pow_j * two_alpha
        # sum over m of rho[m, m+j] (-1)^m sqrt(m!/(m+j)!) L_m^(j)(r2);
        # s walks the square-root ladder, lag_* the degree recurrence
        s = 1.0
        for i in range(1, j + 1):
            s /= math.sqrt(i)
        partial = np.zeros(alpha.shape, dtype=complex)
        lag_prev = None
        lag_curr = np.ones_like(r2)
        sign = 1.0
        for m in range(0, n - j):
            if m == 1:
                lag_prev, lag_curr = lag_curr, 1.0 + j - r2
            elif m >= 2:
                lag_next = ((2 * m - 1 + j - r2) * lag_curr
                            - (m - 1 + j) * lag_prev) / m
                lag_prev, lag_curr = lag_curr, lag_next
            w = rho[m, m + j] * sign * s
            if w != 0.0:
                partial = partial + w * lag_curr
            sign = -sign
            s *= math.sqrt((m + 1) / (m + 1 + j))
        term = pow_j * partial
        acc += term.real if j == 0 else 2.0 * term.real

    values = TWO_OVER_PI * np.exp(-0.5 * r2) * acc
    return WignerField(grid, values)


def _cubic_asymmetry(alpha: np.ndarray) -> np.ndarray:
    """The real field i[alpha^3 - (alpha*)^3] = -2 Im(alpha^3)."""
    return -2.0 * (alpha**3).imag


def wigner_ss_analytic(p5: float, grid: PhaseSpaceGrid = DEFAULT_GRID) -> WignerField:
    """Steady-state Wigner function of the six-level model, driven by the
    single saturation parameter p5 (gamma = 2*kappa populations).

    The cubic term's coefficient sqrt(p5 (4 - 26 p5)) vanishes at the
    saturation value p5 = 2/13, where azimuthal symmetry is restored.
    """
    if not 0.0 <= p5 <= dressed.P5_MAX:
        raise ValueError(f"p5 must lie in [0, 2/13], got {p5}")
    alpha = grid.alpha()
    r2 = 4.0 * (alpha.real**2 + alpha.imag**2)
    lag = _laguerre_upto(r2, 3)
    bracket = ((1.0 - 4.0 * p5) * lag[0]
               - 2.25 * p5 * lag[1]
               + 1.25 * p5 * lag[2]
               - 0.5 * p5 * lag[3]
               + (2.0 / math.sqrt(3.0)) * math.sqrt(p5 * (4.0 - 26.0 * p5))
               * _cubic_asymmetry(alpha))
    values = TWO_OVER_PI * np.exp(-0.5 * r2) * bracket
    return WignerField(grid, values)


def transient_coeffs(state: SixLevelState):
    """Fock-state weights (c0..c4) of the transient field matrix.

    c0..c3 are the diagonal occupations of Fock |0>..|3>; the beats feed
    the neighbouring diagonals with opposite signs and c4 = Im(rho_05)/sqrt(2)
    carries the (0,3) coherence that skews the distribution.
    """
    re12 = state.rho12.real
    re34 = state.rho34.real
    c0 = state.rho00 + 0.5 * (state.rho11 + state.rho22) - re12
    c1 = (0.5 * (state.rho11 + state.rho22 + state.rho33 + state.rho44)
          + re12 - re34)
    c2 = 0.5 * (state.rho33 + state.rho44 + state.rho55) + re34
    c3 = 0.5 * state.rho55
    c4 = state.D / math.sqrt(2.0)
    return (c0, c1, c2, c3, c4)


def wigner_transient(coeffs, grid: PhaseSpaceGrid = DEFAULT_GRID) -> WignerField:
    """Transient Wigner function from the five Fock-weight coefficients."""
    c0, c1, c2, c3, c4 = coeffs
    alpha = grid.alpha()
    r2 = 4.0 * (alpha.real**2 + alpha.imag**2)
    lag = _laguerre_upto(r2, 3)
    bracket = (c0 * lag[0] - c1 * lag[1] + c2 * lag[2] - c3 * lag[3]
               + c4 * (8.0 / math.sqrt(6.0)) * _cubic_asymmetry(alpha))
    values = TWO_OVER_PI * np.exp(-0.5 * r2) * bracket
    return WignerField(grid, values)


def steady_field_matrix(p5: float, fock_cutoff: int = 4) -> FieldDensityMatrix:
    """Fock-basis field density matrix of the six-level steady state.

    Diagonals (1-4p5, 9p5/4, 5p5/4, p5/2) on |0>..|3> plus the purely
    imaginary (0,3) coherence i sqrt(p5(4-26p5))/(2 sqrt(2)) fed by the
    drive; this is the state whose Wigner transform is the analytic
    steady-state expression.
    """
    if not 0.0 <= p5 <= dressed.P5_MAX:
        raise ValueError(f"p5 must lie in [0, 2/13], got {p5}")
    if fock_cutoff < 4:
        raise ValueError("need at least 4 Fock states")
    m = np.zeros((fock_cutoff, fock_cutoff), dtype=complex)
    m[0, 0] = 1.0 - 4.0 * p5
    m[1, 1] = 2.25 * p5
    m[2, 2] = 1.25 * p5
    m[3, 3] = 0.5 * p5
    coh = 1j * math.sqrt(p5 * (4.0 - 26.0 * p5)) / (2.0 * math.sqrt(2.0))
    m[0, 3] = coh
    m[3, 0] = np.conj(coh)
    return FieldDensityMatrix(fock_cutoff, m)


def transient_field_matrix(state: SixLevelState, fock_cutoff: int = 4
                           ) -> FieldDensityMatrix:
    """Fock-basis field matrix of a six-level transient state."""
    if fock_cutoff < 4:
        raise ValueError("need at least 4 Fock states")
    c0, c1, c2, c3, c4 = transient_coeffs(state)
    m = np.zeros((fock_cutoff, fock_cutoff), dtype=complex)
    m[0, 0], m[1, 1], m[2, 2], m[3, 3] = c0, c1, c2, c3
    coh = 1j * state.D / math.sqrt(2.0)
    m[0, 3] = coh
    m[3, 0] = np.conj(coh)
    return FieldDensityMatrix(fock_cutoff, m)


def wigner_origin_3photon(tau_grid, params: DressedParams) -> np.ndarray:
    """Origin value of the transient Wigner function after a detection,
    three-photon model: the alternating parity sum over Fock |0>..|3>.

    The cubic coherence term vanishes at the origin, so this exposes the
    bare Fock-weight interference of the two quantum beats.
    """
    params.require_impedance_matched("the conditional transient")
    init = dressed.conditional_state().initial_state()
    states = dressed.rate_evolve(init, params, tau_grid)
    out = np.empty(len(states))
    for i, s in enumerate(states):
        c0, c1, c2, c3, _ = transient_coeffs(s)
        out[i] = TWO_OVER_PI * (c0 - c1 + c2 - c3)
    return out


def wigner_origin_2photon(tau_grid, params: DressedParams) -> np.ndarray:
    """Origin value of the transient Wigner function, two-photon model:
    parity sum over Fock |0>..|2> of the four-level field matrix."""
    params.require_impedance_matched("the conditional transient")
    init = dressed.conditional_state_2photon()
    states = dressed.rate_evolve_2photon(init, params, tau_grid)
    out = np.empty(len(states))
    for i, s in enumerate(states):
        f0, f1, f2 = fock_diagonals_2photon(s)
        out[i] = TWO_OVER_PI * (f0 - f1 + f2)
    return out


def fock_diagonals_2photon(state: FourLevelState):
    """Occupations of Fock |0>, |1>, |2> in the four-level model."""
    re12 = state.rho12.real
    f0 = state.rho00 - re12 + 0.5 * (state.rho11 + state.rho22)
    f1 = 0.5 * (state.rho11 + state.rho22 + state.rho33) + re12
    f2 = 0.5 * state.rho33
    return (f0, f1, f2)
