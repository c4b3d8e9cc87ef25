"""Lindblad Liouvillian of the driven cavity-atom system and its solvers.

All work is done in the frame rotating at the drive frequency, where the
generator is time independent:

    H = -Delta_omega_d (a†a + sigma_+ sigma_-) + g (a sigma_+ + a† sigma_-)
        + eps_d (a + a†)

    L[rho] = -i[H, rho] + kappa (2 a rho a† - a†a rho - rho a†a)
             + (gamma/2) (2 s- rho s+ - s+s- rho - rho s+s-)

Superoperators act on column-stacked density matrices: vec(X) stacks the
columns of X, so the map X -> A X B vectorizes to (B^T kron A). Matrices
are kept sparse; at the production truncation (35 Fock states, d = 70)
the Liouvillian is 4900 x 4900 with a few-per-mille fill.

Steady states are found by sparse LU on the Liouvillian with one row
replaced by the trace functional (plus one step of iterative refinement),
falling back to a dense SVD null vector when the direct solve cannot meet
the residual target. Time propagation uses an adaptive embedded
Runge-Kutta at rtol 1e-8 / atol 1e-10; a Krylov matrix-exponential path
(`method="expm"`) serves uniform grids at equal accuracy much faster and
is what the correlation routine uses by default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp
from scipy.sparse.linalg import expm_multiply, splu

from . import hilbert
from .dressed import resonance_detuning
from .errors import DegenerateKernel, JcsimError, StepFailure, ZeroIntensity
from .hilbert import DensityMatrix, FieldDensityMatrix, HilbertSpace, Operator

#: Production Fock truncation (matches the published phase-space figures).
DEFAULT_FOCK_CUTOFF = 35
#: Truncation for fast tests; agrees with N=20 to 1e-4 in <n>_ss at the
#: drives used throughout.
FAST_FOCK_CUTOFF = 15

#: Residual target of the steady-state solve, relative to max|L|.
STEADY_RESIDUAL_REL = 1e-8

_SVD_FALLBACK_MAX_DIM = 1700  # dense SVD only below this superoperator size


@dataclass(frozen=True)
class SystemParams:
    """Rates of the driven cavity-atom system, one common unit (use gamma=1).

    `delta_omega_d` is the drive detuning omega_d - omega_0.
    """

    g: float
    kappa: float
    gamma: float
    eps_d: float
    delta_omega_d: float

    def __post_init__(self):
        if self.g <= 0:
            raise ValueError("g must be positive")
        if self.kappa < 0 or self.gamma < 0:
            raise ValueError("kappa and gamma must be non-negative")
        if self.kappa == 0 and self.gamma == 0:
            raise ValueError("at least one decay channel is required")
        if self.eps_d < 0:
            raise ValueError("eps_d must be non-negative (real drive)")

    @classmethod
    def at_resonance(cls, n_photon, g, kappa, gamma, eps_d):
        """Parameters with the drive tuned to the shifted n-photon peak."""
        return cls(g=g, kappa=kappa, gamma=gamma, eps_d=eps_d,
                   delta_omega_d=resonance_detuning(n_photon, eps_d, g))


@dataclass(frozen=True)
class Superoperator:
    """Sparse generator acting on column-stacked density matrices."""

    elements: sp.spmatrix = field(repr=False)
    dim: int
    space: HilbertSpace | None = None

    def __post_init__(self):
        d2 = self.dim * self.dim
        if self.elements.shape != (d2, d2):
            raise ValueError("superoperator shape does not match dim^2")

    def max_abs(self) -> float:
        data = self.elements.data
        return float(np.max(np.abs(data))) if data.size else 0.0

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """L[rho] for a dim x dim matrix rho."""
        return unvec(self.elements @ vec(rho), self.dim)


def vec(x: np.ndarray) -> np.ndarray:
    """Column-stack a matrix (Fortran order)."""
    return x.reshape(-1, order="F")


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    return v.reshape((d, d), order="F")


def build_hamiltonian(params: SystemParams, space: HilbertSpace) -> Operator:
    """Rotating-frame Hamiltonian of the driven system."""
    a = hilbert.cavity_annihilation(space).elements
    ad = a.conj().T
    sm = hilbert.atom_lowering(space).elements
    sp_ = sm.conj().T
    h = (-params.delta_omega_d * (ad @ a + sp_ @ sm)
         + params.g * (a @ sp_ + ad @ sm)
         + params.eps_d * (a + ad))
    return Operator(space, h)


def _lindblad_matrix(h: np.ndarray, jumps) -> sp.csr_matrix:
    """-i[H, .] plus the dissipators of the given jump operators."""
    d = h.shape[0]
    ident = sp.identity(d, format="csr", dtype=complex)
    hs = sp.csr_matrix(h)
    gen = -1j * (sp.kron(ident, hs) - sp.kron(hs.T, ident))
    for j in jumps:
        js = sp.csr_matrix(j)
        jdj = (js.conj().T @ js).tocsr()
        gen = gen + (sp.kron(js.conj(), js)
                     - 0.5 * sp.kron(ident, jdj)
                     - 0.5 * sp.kron(jdj.T, ident))
    return gen.tocsr()


def build_liouvillian(params: SystemParams, space: HilbertSpace) -> Superoperator:
    """Full Lindblad generator with cavity loss 2*kappa and atom decay gamma."""
    h = build_hamiltonian(params, space).elements
    a = hilbert.cavity_annihilation(space).elements
    sm = hilbert.atom_lowering(space).elements
    jumps = []
    if params.kappa > 0:
        jumps.append(math.sqrt(2.0 * params.kappa) * a)
    if params.gamma > 0:
        jumps.append(math.sqrt(params.gamma) * sm)
    return Superoperator(_lindblad_matrix(h, jumps), space.total_dim, space)


def _wrap_state(m: np.ndarray, liouv: Superoperator):
    if liouv.space is not None:
        return DensityMatrix(liouv.space, m)
    return FieldDensityMatrix(liouv.dim, m)


def _trace_indices(d: int) -> np.ndarray:
    return np.arange(d) * (d + 1)


def _steady_state_lu(liouv: Superoperator) -> tuple[np.ndarray, float]:
    a = liouv.elements.tocsc().astype(complex)
    d = liouv.dim
    d2 = d * d
    tr_row = np.zeros(d2, dtype=complex)
    tr_row[_trace_indices(d)] = 1.0
    a_mod = a.tolil()
    a_mod[0, :] = tr_row
    a_mod = a_mod.tocsc()
    b = np.zeros(d2, dtype=complex)
    b[0] = 1.0
    lu = splu(a_mod)
    x = lu.solve(b)
    # one refinement pass keeps the residual near round-off even for
    # badly separated relaxation scales (Kerr at kappa/chi ~ 1e-6)
    x = x + lu.solve(b - a_mod @ x)
    resid = float(np.max(np.abs(a @ x)))
    return x, resid


def _steady_state_svd(liouv: Superoperator) -> np.ndarray:
    d2 = liouv.dim**2
    if d2 > _SVD_FALLBACK_MAX_DIM**2:
        raise JcsimError(
            f"dense SVD fallback refused for superoperator of size {d2}"
        )
    dense = liouv.elements.toarray()
    _, s, vh = np.linalg.svd(dense)
    smax = s[0] if s[0] > 0 else 1.0
    near_zero = s < 1e-10 * smax
    if near_zero.sum() >= 2:
        raise DegenerateKernel(
            f"two near-zero singular values "
            f"({s[-1]:.3e}, {s[-2]:.3e}) within 1e-10 relative of zero; "
            f"the stationary state is not unique"
        )
    return vh[-1].conj()


def steady_state(liouv: Superoperator, method: str = "lu"):
    """Stationary density matrix of the generator.

    Residual target max|L[rho_ss]| < 1e-8 * max|L|; the result is
    Hermitized, trace-normalized and checked against the DensityMatrix
    invariants. `method="svd"` forces the null-space route (it is the one
    that detects and reports a degenerate kernel).
    """
    target = STEADY_RESIDUAL_REL * max(liouv.max_abs(), 1.0)
    if method == "lu":
        x, resid = _steady_state_lu(liouv)
        if resid > target:
            x = _steady_state_svd(liouv)
    elif method == "svd":
        x = _steady_state_svd(liouv)
    else:
        raise ValueError(f"unknown steady-state method {method!r}")

    rho = unvec(x, liouv.dim)
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho).real
    if abs(tr) < 1e-300:
        raise JcsimError("steady-state candidate has zero trace")
    rho = rho / tr
    resid = float(np.max(np.abs(liouv.elements @ vec(rho))))
    if resid > target:
        raise JcsimError(
            f"steady-state residual {resid:.3e} exceeds target {target:.3e}"
        )
    out = _wrap_state(rho, liouv)
    out.validate()
    hilbert.warn_if_truncated(out, "steady_state")
    return out


def propagate(liouv: Superoperator, rho0, t_grid: Sequence[float],
              method: str = "rk", rtol: float = 1e-8, atol: float = 1e-10):
    """Evolve rho0 to each time in the ascending grid, rho(t) = e^(L t) rho0.

    `method="rk"` integrates the vectorized ODE with DOP853 at the stated
    tolerances and raises StepFailure (with the time reached) if step
    control fails; `method="expm"` applies the Krylov matrix exponential
    segment by segment, which is preferable on long uniform grids.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or np.any(np.diff(t) < 0) or t[0] < 0:
        raise ValueError("t_grid must be ascending and non-negative")
    m0 = rho0.elements if hasattr(rho0, "elements") else np.asarray(rho0)
    if m0.shape != (liouv.dim, liouv.dim):
        raise ValueError("initial state does not match the superoperator")

    out = [None] * t.size
    todo = t > 0
    for i in np.nonzero(~todo)[0]:
        out[i] = rho0 if hasattr(rho0, "elements") else _wrap_state(m0, liouv)

    if todo.any():
        y0 = vec(m0).astype(complex)
        a = liouv.elements.tocsr()
        times = t[todo]
        if method == "rk":
            sol = solve_ivp(lambda _, y: a @ y, (0.0, float(times[-1])), y0,
                            method="DOP853", t_eval=times, rtol=rtol, atol=atol)
            if not sol.success:
                raise StepFailure(
                    f"propagation failed: {sol.message}",
                    t_reached=float(sol.t[-1]) if sol.t.size else 0.0,
                )
            cols = sol.y.T
        elif method == "expm":
            cols = _expm_grid(a, y0, times)
        else:
            raise ValueError(f"unknown propagation method {method!r}")

        for k, i in enumerate(np.nonzero(todo)[0]):
            rho = unvec(cols[k], liouv.dim)
            out[i] = _wrap_state(0.5 * (rho + rho.conj().T), liouv)

    hilbert.warn_if_truncated(out[-1], "propagate")
    return out


def _expm_grid(a: sp.spmatrix, y0: np.ndarray, times: np.ndarray) -> np.ndarray:
    """e^(t a) y0 on an ascending positive grid via Krylov stepping.

    Uniform grids are served by expm_multiply's linspace mode in
    memory-bounded chunks (one norm estimate per chunk); irregular grids
    fall back to segment-by-segment application.
    """
    dt = np.diff(times)
    uniform = times.size > 2 and dt.size and np.allclose(dt, dt[0], rtol=1e-12)
    cols = np.empty((times.size, y0.size), dtype=complex)
    if uniform:
        h = times[1] - times[0]
        first = expm_multiply(a * times[0], y0) if times[0] > 0 else y0.copy()
        cols[0] = first
        chunk = max(2, int(2.5e6 // max(y0.size, 1)))
        k = 0
        y = first
        while k < times.size - 1:
            m = min(chunk, times.size - 1 - k)
            seg = expm_multiply(a, y, start=0.0, stop=m * h, num=m + 1,
                                endpoint=True)
            cols[k + 1:k + 1 + m] = seg[1:]
            y = seg[-1]
            k += m
    else:
        tprev, y = 0.0, y0
        for k, tk in enumerate(times):
            if tk > tprev:
                y = expm_multiply(a * (tk - tprev), y)
            cols[k] = y
            tprev = tk
    return cols


def photon_number_matrix(space: HilbertSpace) -> np.ndarray:
    return hilbert.number_operator(space).elements


def steady_photon_number(params: SystemParams, space: HilbertSpace) -> float:
    liouv = build_liouvillian(params, space)
    rho = steady_state(liouv)
    return float(hilbert.expectation(hilbert.number_operator(space), rho).real)


def g2_zero_from_state(rho: DensityMatrix) -> float:
    """g2(0) = <a†a†aa> / <a†a>^2 evaluated directly on a state."""
    a = hilbert.cavity_annihilation(rho.space).elements
    ad = a.conj().T
    n = float(np.einsum("ij,ji->", ad @ a, rho.elements).real)
    if n < 1e-12:
        raise ZeroIntensity("state holds no photons (<a†a> < 1e-12)")
    n2 = float(np.einsum("ij,ji->", ad @ ad @ a @ a, rho.elements).real)
    return n2 / n**2


def g2_forward(params: SystemParams, space: HilbertSpace,
               tau_grid: Sequence[float], method: str = "auto") -> np.ndarray:
    """Forward-scattering intensity correlation from quantum regression.

    g2(tau) = tr(a†a e^(L tau)[a rho_ss a†]) / <a†a>_ss^2. The conditioned
    state a rho_ss a† / <n>_ss is propagated under the same Liouvillian.
    """
    tau = np.asarray(tau_grid, dtype=float)
    liouv = build_liouvillian(params, space)
    rho_ss = steady_state(liouv)
    a = hilbert.cavity_annihilation(space).elements
    ad = a.conj().T
    nmat = ad @ a
    n_ss = float(np.einsum("ij,ji->", nmat, rho_ss.elements).real)
    if n_ss < 1e-12:
        raise ZeroIntensity("steady state holds no photons (<a†a> < 1e-12)")
    conditioned = a @ rho_ss.elements @ ad / n_ss

    if method == "auto":
        uniform = tau.size > 2 and np.allclose(np.diff(tau), tau[1] - tau[0])
        method = "expm" if uniform else "rk"
    states = propagate(liouv, conditioned, tau, method=method)
    vals = np.array([np.einsum("ij,ji->", nmat, s.elements).real for s in states])
    return vals / n_ss


class SweepPoint(NamedTuple):
    """One steady-state solve of a detuning sweep."""

    delta_omega_d: float
    n_ss: float
    g2_0: float
    error: str | None = None


def sweep_detuning(params: SystemParams, space: HilbertSpace,
                   detuning_grid: Sequence[float]) -> list[SweepPoint]:
    """Steady-state photon number and g2(0) across drive detunings.

    Per-point solver failures are recorded in the row and the sweep
    continues.
    """
    grid = np.asarray(detuning_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("detuning grid must be nonempty")
    nmat = None
    rows = []
    for delta in grid:
        p = SystemParams(g=params.g, kappa=params.kappa, gamma=params.gamma,
                         eps_d=params.eps_d, delta_omega_d=float(delta))
        try:
            liouv = build_liouvillian(p, space)
            rho = steady_state(liouv)
            if nmat is None:
                a = hilbert.cavity_annihilation(space).elements
                nmat = a.conj().T @ a
            n_ss = float(np.einsum("ij,ji->", nmat, rho.elements).real)
            try:
                g2 = g2_zero_from_state(rho)
            except ZeroIntensity:
                g2 = math.nan
            rows.append(SweepPoint(float(delta), n_ss, g2))
        except (JcsimError, np.linalg.LinAlgError, RuntimeError) as exc:
            rows.append(SweepPoint(float(delta), math.nan, math.nan, str(exc)))
    return rows
