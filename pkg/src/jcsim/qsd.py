"""Quantum-state-diffusion unraveling of the master equation.

A single trajectory evolves a normalized state vector under

    |dpsi> = -iH|psi> dt
             + sum_j (<L_j†> L_j - L_j†L_j/2 - <L_j†><L_j>/2) |psi> dt
             + sum_j (L_j - <L_j>) |psi> dxi_j,

with the two channels L_1 = sqrt(2 kappa) a and L_2 = sqrt(gamma) s- and
independent complex Wiener increments, E[dxi_i dxi_j*] = delta_ij dt,
E[dxi_i dxi_j] = 0 (phase-independent noise; the heterodyne-equivalent
unraveling). Ensemble averages of |psi><psi| reproduce the Lindblad
evolution.

The drift is integrated with an adaptive Cash-Karp 5(4) embedded pair;
the diffusion increment is applied per accepted macro-step with the
accumulated Wiener increment (Euler-Maruyama in the noise) and the state
is renormalized after every accepted step. Noise is drawn from a
counter-based splitmix64 generator keyed by (seed, channel, step index),
so a record is a pure function of its configuration and trajectories can
run in parallel without shared state. The hot loop is JIT-compiled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np
from numba import njit

from . import hilbert
from .errors import NormCollapse, StepFailure
from .hilbert import HilbertSpace, StateVector
from .liouville import SystemParams, build_hamiltonian

#: Default trajectory truncation; driven states stay at low excitation.
TRAJECTORY_FOCK_CUTOFF = 15

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

# status codes returned by the compiled kernel
_OK = 0
_STEP_FAIL = 1
_NORM_COLLAPSE = 2


def _smix_py(z: int) -> int:
    """splitmix64 finalizer on Python ints (used to scramble the seed)."""
    z = (z + _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


@njit(cache=True, inline="always")
def _smix(z):
    z = (z + np.uint64(0x9E3779B97F4A7C15))
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def _normal_pair(key, idx):
    """Two standard normals for counter idx under the given key."""
    w1 = _smix(key + np.uint64(2) * idx * np.uint64(0x9E3779B97F4A7C15))
    w2 = _smix(key + (np.uint64(2) * idx + np.uint64(1))
               * np.uint64(0x9E3779B97F4A7C15))
    u1 = (np.float64(w1 >> np.uint64(11)) + 1.0) * (0.5**53)
    u2 = np.float64(w2 >> np.uint64(11)) * (0.5**53)
    r = math.sqrt(-2.0 * math.log(u1))
    return r * math.cos(2.0 * math.pi * u2), r * math.sin(2.0 * math.pi * u2)


@njit(cache=True)
def _drift(lin, psi, two_kappa, gamma, nfock, out, apsi, spsi):
    """QSD drift into `out`; returns (<a>, <s->, norm^2) of psi."""
    d = psi.shape[0]
    for i in range(d):
        apsi[i] = 0.0
        spsi[i] = 0.0
    for n in range(nfock - 1):
        rt = math.sqrt(n + 1.0)
        apsi[2 * n] = rt * psi[2 * n + 2]
        apsi[2 * n + 1] = rt * psi[2 * n + 3]
    for n in range(nfock):
        spsi[2 * n] = psi[2 * n + 1]

    nrm2 = 0.0
    ea = 0.0 + 0.0j
    es = 0.0 + 0.0j
    for i in range(d):
        c = np.conj(psi[i])
        nrm2 += (c * psi[i]).real
        ea += c * apsi[i]
        es += c * spsi[i]
    ea /= nrm2
    es /= nrm2

    cea = np.conj(ea)
    ces = np.conj(es)
    shift = 0.5 * two_kappa * (cea * ea).real + 0.5 * gamma * (ces * es).real
    for i in range(d):
        acc = 0.0 + 0.0j
        for k in range(d):
            acc += lin[i, k] * psi[k]
        out[i] = (acc + two_kappa * cea * apsi[i] + gamma * ces * spsi[i]
                  - shift * psi[i])
    return ea, es, nrm2


@njit(cache=True, nogil=True)
def _qsd_adaptive(lin, two_kappa, gamma, nfock, psi0, sample_times, key,
                  rtol, atol, max_step, noise_scale, noise_phase,
                  renormalize, n_diag):
    """Cash-Karp 5(4) drift with per-accepted-step Euler-Maruyama noise.

    Records <psi| n |psi> of the stored state at each sample time.
    Returns (samples, status, t_reached, max Fock-tail probability).
    """
    d = psi0.shape[0]
    psi = psi0.copy()
    n_samples = sample_times.shape[0]
    samples = np.zeros(n_samples)

    k1 = np.empty(d, dtype=np.complex128)
    k2 = np.empty(d, dtype=np.complex128)
    k3 = np.empty(d, dtype=np.complex128)
    k4 = np.empty(d, dtype=np.complex128)
    k5 = np.empty(d, dtype=np.complex128)
    k6 = np.empty(d, dtype=np.complex128)
    ytmp = np.empty(d, dtype=np.complex128)
    ynew = np.empty(d, dtype=np.complex128)
    apsi = np.empty(d, dtype=np.complex128)
    spsi = np.empty(d, dtype=np.complex128)

    sk = math.sqrt(two_kappa)
    sg = math.sqrt(gamma)

    t = 0.0
    t_end = sample_times[n_samples - 1]
    isample = 0
    # record any samples at t = 0
    while isample < n_samples and sample_times[isample] <= t:
        v = 0.0
        for i in range(d):
            v += n_diag[i] * (np.conj(psi[i]) * psi[i]).real
        samples[isample] = v
        isample += 1

    h = min(1e-3 / (1.0 + abs(lin[d - 1, d - 1])), max_step)
    if h <= 0.0:
        h = 1e-6
    h_min = max(t_end * 1e-14, 1e-15)
    max_tail = 0.0
    step_idx = np.uint64(0)
    rejects_in_row = 0

    while t < t_end:
        t_next_sample = sample_times[isample]
        if h > max_step:
            h = max_step
        hitting = False
        if t + h >= t_next_sample - 1e-15:
            h = t_next_sample - t
            hitting = True
        if h < h_min:
            return samples, _STEP_FAIL, t, max_tail

        ea0, es0, _ = _drift(lin, psi, two_kappa, gamma, nfock, k1, apsi, spsi)
        for i in range(d):
            ytmp[i] = psi[i] + h * 0.2 * k1[i]
        _drift(lin, ytmp, two_kappa, gamma, nfock, k2, apsi, spsi)
        for i in range(d):
            ytmp[i] = psi[i] + h * (0.075 * k1[i] + 0.225 * k2[i])
        _drift(lin, ytmp, two_kappa, gamma, nfock, k3, apsi, spsi)
        for i in range(d):
            ytmp[i] = psi[i] + h * (0.3 * k1[i] - 0.9 * k2[i] + 1.2 * k3[i])
        _drift(lin, ytmp, two_kappa, gamma, nfock, k4, apsi, spsi)
        for i in range(d):
            ytmp[i] = psi[i] + h * ((-11.0 / 54.0) * k1[i] + 2.5 * k2[i]
                                    + (-70.0 / 27.0) * k3[i]
                                    + (35.0 / 27.0) * k4[i])
        _drift(lin, ytmp, two_kappa, gamma, nfock, k5, apsi, spsi)
        for i in range(d):
            ytmp[i] = psi[i] + h * ((1631.0 / 55296.0) * k1[i]
                                    + (175.0 / 512.0) * k2[i]
                                    + (575.0 / 13824.0) * k3[i]
                                    + (44275.0 / 110592.0) * k4[i]
                                    + (253.0 / 4096.0) * k5[i])
        _drift(lin, ytmp, two_kappa, gamma, nfock, k6, apsi, spsi)

        errsum = 0.0
        for i in range(d):
            ynew[i] = psi[i] + h * ((37.0 / 378.0) * k1[i]
                                    + (250.0 / 621.0) * k3[i]
                                    + (125.0 / 594.0) * k4[i]
                                    + (512.0 / 1771.0) * k6[i])
            ei = h * ((-277.0 / 64512.0) * k1[i]
                      + (6925.0 / 370944.0) * k3[i]
                      + (-6925.0 / 202752.0) * k4[i]
                      + (-277.0 / 14336.0) * k5[i]
                      + (277.0 / 7084.0) * k6[i])
            sc = atol + rtol * max(abs(psi[i]), abs(ynew[i]))
            errsum += (abs(ei) / sc) ** 2
        err = math.sqrt(errsum / d)

        if err > 1.0:
            fac = 0.9 * err**-0.2
            if fac < 0.2:
                fac = 0.2
            h *= fac
            rejects_in_row += 1
            if rejects_in_row > 200:
                return samples, _STEP_FAIL, t, max_tail
            continue
        rejects_in_row = 0

        # accepted: apply the accumulated Wiener increment of this step
        if noise_scale != 0.0:
            rt = math.sqrt(0.5 * h) * noise_scale
            za1, za2 = _normal_pair(key, np.uint64(2) * step_idx)
            zs1, zs2 = _normal_pair(key, np.uint64(2) * step_idx + np.uint64(1))
            rot = complex(math.cos(noise_phase), math.sin(noise_phase))
            dxa = rt * complex(za1, za2) * rot
            dxs = rt * complex(zs1, zs2) * rot
            # channel operators applied to the pre-step state (Ito)
            for n in range(nfock - 1):
                r = math.sqrt(n + 1.0)
                apsi[2 * n] = r * psi[2 * n + 2]
                apsi[2 * n + 1] = r * psi[2 * n + 3]
            apsi[2 * nfock - 2] = 0.0
            apsi[2 * nfock - 1] = 0.0
            for n in range(nfock):
                spsi[2 * n] = psi[2 * n + 1]
                spsi[2 * n + 1] = 0.0
            for i in range(d):
                ynew[i] += (sk * (apsi[i] - ea0 * psi[i]) * dxa
                            + sg * (spsi[i] - es0 * psi[i]) * dxs)
        step_idx += np.uint64(1)

        nrm2 = 0.0
        for i in range(d):
            nrm2 += (np.conj(ynew[i]) * ynew[i]).real
        if renormalize:
            if nrm2 < 1e-6:
                return samples, _NORM_COLLAPSE, t, max_tail
            inv = 1.0 / math.sqrt(nrm2)
            for i in range(d):
                psi[i] = ynew[i] * inv
        else:
            for i in range(d):
                psi[i] = ynew[i]

        t = t + h if not hitting else t_next_sample
        if hitting:
            while isample < n_samples and sample_times[isample] <= t + 1e-15:
                v = 0.0
                tail = 0.0
                for i in range(d):
                    p = (np.conj(psi[i]) * psi[i]).real
                    v += n_diag[i] * p
                    if i >= d - 2:
                        tail += p
                samples[isample] = v
                if tail > max_tail:
                    max_tail = tail
                isample += 1
            if isample >= n_samples:
                break
        # grow the step for the next attempt
        fac = 0.9 * err**-0.2 if err > 1e-12 else 5.0
        if fac > 5.0:
            fac = 5.0
        h *= fac

    return samples, _OK, t, max_tail


@njit(cache=True, nogil=True)
def _qsd_fixed(lin, two_kappa, gamma, nfock, psi0, h, increments, renormalize,
               n_diag):
    """Fixed-step variant driven by a supplied noise-increment path.

    `increments` has shape (n_steps, 2): the accumulated complex Wiener
    increment per step for the cavity and atom channels. Used by the
    strong-convergence check on a frozen path.
    """
    d = psi0.shape[0]
    psi = psi0.copy()
    k1 = np.empty(d, dtype=np.complex128)
    k2 = np.empty(d, dtype=np.complex128)
    k3 = np.empty(d, dtype=np.complex128)
    k4 = np.empty(d, dtype=np.complex128)
    k5 = np.empty(d, dtype=np.complex128)
    k6 = np.empty(d, dtype=np.complex128)
    ytmp = np.empty(d, dtype=np.complex128)
    ynew = np.empty(d, dtype=np.complex128)
    apsi = np.empty(d, dtype=np.complex128)
    spsi = np.empty(d, dtype=np.complex128)
    sk = math.sqrt(two_kappa)
    sg = math.sqrt(gamma)

    for step in range(increments.shape[0]):
        ea0, es0, _ = _drift(lin, psi, two_kappa, gamma, nfock, k1, apsi, spsi)
        for i in range(d):
            ytmp[i] = psi[i] + h * 0.2 * k1[i]
        _drift(lin, ytmp, two_kappa, gamma, nfock, k2, apsi, spsi)
        for i in range(d):
            ytmp[i] = psi[i] + h * (0.075 * k1[i] + 0.225 * k2[i])
        _drift(lin, ytmp, two_kappa, gamma, nfock, k3, apsi, spsi)
        for i in range(d):
            ytmp[i] = psi[i] + h * (0.3 * k1[i] - 0.9 * k2[i] + 1.2 * k3[i])
        _drift(lin, ytmp, two_kappa, gamma, nfock, k4, apsi, spsi)
        for i in range(d):
            ytmp[i] = psi[i] + h * ((-11.0 / 54.0) * k1[i] + 2.5 * k2[i]
                                    + (-70.0 / 27.0) * k3[i]
                                    + (35.0 / 27.0) * k4[i])
        _drift(lin, ytmp, two_kappa, gamma, nfock, k5, apsi, spsi)
        for i in range(d):
            ytmp[i] = psi[i] + h * ((1631.0 / 55296.0) * k1[i]
                                    + (175.0 / 512.0) * k2[i]
                                    + (575.0 / 13824.0) * k3[i]
                                    + (44275.0 / 110592.0) * k4[i]
                                    + (253.0 / 4096.0) * k5[i])
        _drift(lin, ytmp, two_kappa, gamma, nfock, k6, apsi, spsi)
        for i in range(d):
            ynew[i] = psi[i] + h * ((37.0 / 378.0) * k1[i]
                                    + (250.0 / 621.0) * k3[i]
                                    + (125.0 / 594.0) * k4[i]
                                    + (512.0 / 1771.0) * k6[i])

        dxa = increments[step, 0]
        dxs = increments[step, 1]
        for n in range(nfock - 1):
            r = math.sqrt(n + 1.0)
            apsi[2 * n] = r * psi[2 * n + 2]
            apsi[2 * n + 1] = r * psi[2 * n + 3]
        apsi[2 * nfock - 2] = 0.0
        apsi[2 * nfock - 1] = 0.0
        for n in range(nfock):
            spsi[2 * n] = psi[2 * n + 1]
            spsi[2 * n + 1] = 0.0
        for i in range(d):
            ynew[i] += (sk * (apsi[i] - ea0 * psi[i]) * dxa
                        + sg * (spsi[i] - es0 * psi[i]) * dxs)

        nrm2 = 0.0
        for i in range(d):
            nrm2 += (np.conj(ynew[i]) * ynew[i]).real
        if renormalize:
            inv = 1.0 / math.sqrt(nrm2)
            for i in range(d):
                psi[i] = ynew[i] * inv
        else:
            for i in range(d):
                psi[i] = ynew[i]

    v = 0.0
    for i in range(d):
        v += n_diag[i] * (np.conj(psi[i]) * psi[i]).real
    return psi, v


@dataclass(frozen=True)
class TrajectoryConfig:
    """Everything a single quantum-state-diffusion run depends on."""

    params: SystemParams
    space: HilbertSpace
    seed: int
    t_sample_start: float
    t_end: float
    sample_interval: float
    rng_stream: str = "splitmix64"
    rtol: float = 1e-6
    atol: float = 1e-9
    max_step: float = math.inf
    noise_scale: float = 1.0
    noise_phase: float = 0.0
    renormalize: bool = True

    def __post_init__(self):
        if not self.t_sample_start < self.t_end:
            raise ValueError("t_sample_start must precede t_end")
        if self.sample_interval <= 0:
            raise ValueError("sample_interval must be positive")
        if self.rng_stream != "splitmix64":
            raise ValueError(f"unknown rng_stream {self.rng_stream!r}")


@dataclass(frozen=True)
class TrajectoryRecord:
    """Sampled photon-number expectation along one realization."""

    times: np.ndarray = field(repr=False)
    n_values: np.ndarray = field(repr=False)
    seed: int
    t_sample_start: float

    def __post_init__(self):
        if self.times.shape != self.n_values.shape:
            raise ValueError("times and n_values lengths differ")


def _linear_part(params: SystemParams, space: HilbertSpace) -> np.ndarray:
    """-iH - kappa a†a - (gamma/2) s+s-, the linear drift matrix."""
    h = build_hamiltonian(params, space).elements
    a = hilbert.cavity_annihilation(space).elements
    sm = hilbert.atom_lowering(space).elements
    return (-1j * h
            - params.kappa * (a.conj().T @ a)
            - 0.5 * params.gamma * (sm.conj().T @ sm))


def _noise_key(seed: int) -> np.uint64:
    return np.uint64(_smix_py(int(seed) & _MASK))


def run_trajectory(config: TrajectoryConfig,
                   initial: StateVector | None = None,
                   sample_times: Sequence[float] | None = None
                   ) -> TrajectoryRecord:
    """Integrate one quantum-state-diffusion realization.

    Samples <n> on the cadence of the configuration (or on an explicit
    ascending `sample_times` grid) starting from |0,-> unless an initial
    state is supplied. Identical configurations give bit-identical records.
    """
    space = config.space
    if initial is None:
        psi0 = hilbert.basis_state(space, 0, hilbert.ATOM_LOWER).amplitudes
    else:
        if initial.space != space:
            raise ValueError("initial state lives on a different space")
        psi0 = initial.amplitudes.astype(complex)
        nrm = np.linalg.norm(psi0)
        if nrm == 0:
            raise ValueError("initial state has zero norm")
        psi0 = psi0 / nrm

    if sample_times is None:
        n_steps = int(round(config.t_end / config.sample_interval))
        times = np.arange(n_steps + 1) * config.sample_interval
    else:
        times = np.asarray(sample_times, dtype=float)
        if times.ndim != 1 or times.size == 0 or np.any(np.diff(times) <= 0):
            raise ValueError("sample_times must be ascending")
        if times[0] < 0:
            raise ValueError("sample_times must be non-negative")

    lin = _linear_part(config.params, space)
    n_diag = np.repeat(np.arange(space.fock_cutoff, dtype=float), 2)
    samples, status, t_reached, max_tail = _qsd_adaptive(
        lin, 2.0 * config.params.kappa, config.params.gamma,
        space.fock_cutoff, psi0.astype(complex), times,
        _noise_key(config.seed), config.rtol, config.atol,
        config.max_step, config.noise_scale, config.renormalize, n_diag,
    )
    if status == _STEP_FAIL:
        raise StepFailure("QSD step control failed", t_reached=t_reached)
    if status == _NORM_COLLAPSE:
        raise NormCollapse(f"norm fell below 1e-3 at t = {t_reached:.6g}")
    if max_tail > hilbert.TRUNCATION_TAIL_TOL:
        import warnings

        warnings.warn(
            f"Fock tail reached {max_tail:.2e} during the trajectory",
            hilbert.TruncationWarning, stacklevel=2)
    return TrajectoryRecord(times=times, n_values=samples, seed=config.seed,
                            t_sample_start=config.t_sample_start)


def run_trajectory_fixed(config: TrajectoryConfig, h: float,
                         increments: np.ndarray,
                         initial: StateVector | None = None):
    """Fixed-step run on a supplied noise path; returns (psi, <n>) at the end.

    The path is a complex array of shape (n_steps, 2) holding the
    accumulated Wiener increment of each step for the two channels. This
    is the verification entry point for step-halving convergence checks:
    halving h while summing increment pairs keeps the underlying Wiener
    path fixed.
    """
    space = config.space
    if initial is None:
        psi0 = hilbert.basis_state(space, 0, hilbert.ATOM_LOWER).amplitudes
    else:
        psi0 = initial.amplitudes.astype(complex)
    increments = np.ascontiguousarray(increments, dtype=complex)
    if increments.ndim != 2 or increments.shape[1] != 2:
        raise ValueError("increments must have shape (n_steps, 2)")
    lin = _linear_part(config.params, space)
    n_diag = np.repeat(np.arange(space.fock_cutoff, dtype=float), 2)
    psi, n_final = _qsd_fixed(lin, 2.0 * config.params.kappa,
                              config.params.gamma, space.fock_cutoff,
                              psi0.astype(complex), h, increments,
                              config.renormalize, n_diag)
    return psi, float(n_final)


class HistogramResult(NamedTuple):
    bin_edges: np.ndarray
    counts: np.ndarray
    mean: float


def histogram_n(record: TrajectoryRecord, n_bins: int) -> HistogramResult:
    """Histogram the samples taken at or after t_sample_start."""
    if record.times.size == 0:
        raise ValueError("record is empty")
    mask = record.times >= record.t_sample_start - 1e-12
    vals = record.n_values[mask]
    if vals.size == 0:
        raise ValueError("no samples at or after t_sample_start")
    counts, edges = np.histogram(vals, bins=n_bins)
    return HistogramResult(edges, counts, float(vals.mean()))


class EnsembleResult(NamedTuple):
    times: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray | None
    n_trajectories: int


def ensemble_average(config: TrajectoryConfig, seeds: Sequence[int],
                     t_grid: Sequence[float], n_workers: int = 1
                     ) -> EnsembleResult:
    """Pointwise mean of <n>(t) over independent seeds, with standard error.

    The standard error is reported as absent (None) for a single seed.
    Workers share nothing; the compiled stepper releases the GIL, so a
    thread pool gives real parallelism.
    """
    seeds = list(seeds)
    if not seeds:
        raise ValueError("need at least one seed")
    t_grid = np.asarray(t_grid, dtype=float)

    def one(seed):
        rec = run_trajectory(replace(config, seed=int(seed)),
                             sample_times=t_grid)
        return rec.n_values

    if n_workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            rows = list(pool.map(one, seeds))
    else:
        rows = [one(s) for s in seeds]

    data = np.vstack(rows)
    mean = data.mean(axis=0)
    if len(seeds) >= 2:
        stderr = data.std(axis=0, ddof=1) / math.sqrt(len(seeds))
    else:
        stderr = None
    return EnsembleResult(t_grid, mean, stderr, len(seeds))
