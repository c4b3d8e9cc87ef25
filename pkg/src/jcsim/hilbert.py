"""Operators and states on the truncated cavity (x) two-level-atom space.

Basis ordering is fixed once and for all: the product state |n, s> with
n the Fock index and s in {0: lower "-", 1: upper "+"} sits at linear
index ``2*n + s``, i.e. composite operators are ``kron(cavity, atom)``
with the atom as the fast index. Every matrix element produced here is
therefore reproducible bit-for-bit.

All matrices are dense complex arrays; at the truncations used in this
package (total dimension <= 70) dense storage is the simple and fast
choice. Sparsity is an internal concern of the Liouvillian assembly only.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import TruncationWarning

ATOM_LOWER = 0   # atomic ground state "-"
ATOM_UPPER = 1   # atomic excited state "+"

#: Fock-tail probability above which a reported state triggers a
#: TruncationWarning (not an error; transients can leak).
TRUNCATION_TAIL_TOL = 1e-6


@dataclass(frozen=True)
class HilbertSpace:
    """Truncated cavity (Fock states |0>..|N-1>) times a two-level atom."""

    fock_cutoff: int
    atom_dim: int = 2

    def __post_init__(self):
        if self.fock_cutoff < 4:
            raise ValueError(
                f"fock_cutoff must be >= 4 (three-photon analytics need "
                f"Fock |3>), got {self.fock_cutoff}"
            )
        if self.atom_dim != 2:
            raise ValueError("atom_dim is fixed at 2")

    @property
    def total_dim(self) -> int:
        return 2 * self.fock_cutoff

    def index(self, n: int, s: int) -> int:
        """Linear index of |n, s>, s in {0: '-', 1: '+'}."""
        if not (0 <= n < self.fock_cutoff and s in (0, 1)):
            raise ValueError(f"state |{n},{s}> outside the space")
        return 2 * n + s


@dataclass(frozen=True)
class Operator:
    """Dense operator on a HilbertSpace."""

    space: HilbertSpace
    elements: np.ndarray = field(repr=False)

    def __post_init__(self):
        d = self.space.total_dim
        if self.elements.shape != (d, d):
            raise ValueError(
                f"operator shape {self.elements.shape} does not match "
                f"space dimension {d}"
            )

    def dag(self) -> "Operator":
        return Operator(self.space, self.elements.conj().T.copy())

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return float(np.max(np.abs(self.elements - self.elements.conj().T))) < tol

    def __matmul__(self, other: "Operator") -> "Operator":
        if self.space != other.space:
            raise ValueError("operator spaces do not match")
        return Operator(self.space, self.elements @ other.elements)

    def __add__(self, other: "Operator") -> "Operator":
        if self.space != other.space:
            raise ValueError("operator spaces do not match")
        return Operator(self.space, self.elements + other.elements)

    def __rmul__(self, scalar) -> "Operator":
        return Operator(self.space, scalar * self.elements)


@dataclass(frozen=True)
class StateVector:
    """Pure state on a HilbertSpace."""

    space: HilbertSpace
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.amplitudes.shape != (self.space.total_dim,):
            raise ValueError("amplitude vector does not match space dimension")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def density_matrix(self) -> "DensityMatrix":
        psi = self.amplitudes
        return DensityMatrix(self.space, np.outer(psi, psi.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    """System density matrix (cavity + atom)."""

    space: HilbertSpace
    elements: np.ndarray = field(repr=False)

    def __post_init__(self):
        d = self.space.total_dim
        if self.elements.shape != (d, d):
            raise ValueError("density matrix shape does not match space")

    def validate(self, trace_tol=1e-8, herm_tol=1e-10, eig_tol=1e-8):
        """Check trace-one, Hermiticity and positivity; raise on violation."""
        m = self.elements
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > trace_tol:
            raise ValueError(f"trace {tr} deviates from 1 beyond {trace_tol}")
        if np.max(np.abs(m - m.conj().T)) > herm_tol:
            raise ValueError("density matrix is not Hermitian within tolerance")
        wmin = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min())
        if wmin < -eig_tol:
            raise ValueError(f"negative eigenvalue {wmin} beyond -{eig_tol}")
        return self


@dataclass(frozen=True)
class FieldDensityMatrix:
    """Reduced density matrix of the cavity field alone."""

    fock_cutoff: int
    elements: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = self.fock_cutoff
        if self.elements.shape != (n, n):
            raise ValueError("field density matrix shape does not match cutoff")

    def validate(self, trace_tol=1e-8, herm_tol=1e-10):
        m = self.elements
        if abs(complex(np.trace(m)) - 1.0) > trace_tol:
            raise ValueError("field trace deviates from 1")
        if np.max(np.abs(m - m.conj().T)) > herm_tol:
            raise ValueError("field matrix is not Hermitian within tolerance")
        return self


def _fock_annihilation(n: int) -> np.ndarray:
    """Truncated ladder operator with <m-1|a|m> = sqrt(m)."""
    a = np.zeros((n, n), dtype=complex)
    m = np.arange(1, n)
    a[m - 1, m] = np.sqrt(m)
    return a


def cavity_annihilation(space: HilbertSpace) -> Operator:
    """a (x) 1_atom on the composite space."""
    return Operator(space, np.kron(_fock_annihilation(space.fock_cutoff),
                                   np.eye(2, dtype=complex)))


def cavity_creation(space: HilbertSpace) -> Operator:
    return cavity_annihilation(space).dag()


def number_operator(space: HilbertSpace) -> Operator:
    """Photon number a†a; diagonal with entry n at index 2n+s."""
    n = np.arange(space.fock_cutoff, dtype=float)
    diag = np.repeat(n, 2)
    return Operator(space, np.diag(diag).astype(complex))


def atom_lowering(space: HilbertSpace) -> Operator:
    """1_cavity (x) sigma_-, with sigma_- |+> = |->."""
    sm = np.zeros((2, 2), dtype=complex)
    sm[ATOM_LOWER, ATOM_UPPER] = 1.0
    return Operator(space, np.kron(np.eye(space.fock_cutoff, dtype=complex), sm))


def atom_raising(space: HilbertSpace) -> Operator:
    return atom_lowering(space).dag()


def identity(space: HilbertSpace) -> Operator:
    return Operator(space, np.eye(space.total_dim, dtype=complex))


def basis_state(space: HilbertSpace, n: int, s: int) -> StateVector:
    """Product state |n, s>."""
    psi = np.zeros(space.total_dim, dtype=complex)
    psi[space.index(n, s)] = 1.0
    return StateVector(space, psi)


# Coupled-basis content of the first six dressed states:
# (weight, fock index, atom index) pairs for |xi_0> .. |xi_5>.
_SQ2 = 1.0 / np.sqrt(2.0)
_DRESSED_CONTENT = (
    ((1.0, 0, ATOM_LOWER),),
    ((_SQ2, 1, ATOM_LOWER), (-_SQ2, 0, ATOM_UPPER)),
    ((_SQ2, 1, ATOM_LOWER), (+_SQ2, 0, ATOM_UPPER)),
    ((_SQ2, 2, ATOM_LOWER), (-_SQ2, 1, ATOM_UPPER)),
    ((_SQ2, 2, ATOM_LOWER), (+_SQ2, 1, ATOM_UPPER)),
    ((_SQ2, 3, ATOM_LOWER), (-_SQ2, 2, ATOM_UPPER)),
)


def dressed_state(k: int, space: HilbertSpace) -> StateVector:
    """The k-th coupled (dressed) eigenstate, k = 0..5.

    |xi_0> = |0,->, |xi_1,2> = (|1,-> ∓ |0,+>)/sqrt(2),
    |xi_3,4> = (|2,-> ∓ |1,+>)/sqrt(2), |xi_5> = (|3,-> - |2,+>)/sqrt(2).
    """
    if k not in range(6):
        raise ValueError(f"dressed state index must be 0..5, got {k}")
    psi = np.zeros(space.total_dim, dtype=complex)
    for w, n, s in _DRESSED_CONTENT[k]:
        psi[space.index(n, s)] = w
    return StateVector(space, psi)


def partial_trace_atom(rho: DensityMatrix) -> FieldDensityMatrix:
    """Trace out the atom: rho_c = <+|rho|+> + <-|rho|->."""
    n = rho.space.fock_cutoff
    blocks = rho.elements.reshape(n, 2, n, 2)
    return FieldDensityMatrix(n, np.einsum("msns->mn", blocks))


def expectation(op: Operator, rho: DensityMatrix) -> complex:
    """tr(op @ rho); real to 1e-10 when op is Hermitian and rho valid."""
    if op.space != rho.space:
        raise ValueError("operator and state live on different spaces")
    return complex(np.einsum("ij,ji->", op.elements, rho.elements))


def fock_populations(rho: DensityMatrix) -> np.ndarray:
    """Diagonal of the reduced field matrix, length fock_cutoff."""
    return partial_trace_atom(rho).elements.real.diagonal().copy()


def tail_population(obj) -> float:
    """Probability in the last retained Fock state |N-1>."""
    if isinstance(obj, DensityMatrix):
        return float(fock_populations(obj)[-1])
    if isinstance(obj, FieldDensityMatrix):
        return float(obj.elements[-1, -1].real)
    if isinstance(obj, StateVector):
        n = obj.space.fock_cutoff
        return float(np.sum(np.abs(obj.amplitudes[2 * (n - 1):]) ** 2))
    raise TypeError(f"no Fock tail defined for {type(obj)!r}")


def warn_if_truncated(obj, context: str = "") -> None:
    """Emit a TruncationWarning if the Fock tail exceeds 1e-6 probability."""
    tail = tail_population(obj)
    if tail > TRUNCATION_TAIL_TOL:
        where = f" in {context}" if context else ""
        warnings.warn(
            f"Fock tail population {tail:.3e} exceeds {TRUNCATION_TAIL_TOL:g}"
            f"{where}; increase fock_cutoff",
            TruncationWarning,
            stacklevel=2,
        )
