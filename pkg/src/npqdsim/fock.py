"""Truncated Fock-space kernel: coherent states, density matrices,
tensor products, partial traces and expectation values.

Composite-basis convention (used everywhere in this package): subsystem
dimensions are listed fastest-index-first, i.e. for a (photon, atom)
composite ``dims = (n_max + 1, 2)`` and the flat index is
``k = atom_index * (n_max + 1) + photon_index``.  ``tensor()`` takes its
operator arguments in the same fastest-first order.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import poisson

TRUNCATION_TAIL = 1e-9
N_MAX_FLOOR = 8


class TruncationError(ValueError):
    """Requested Fock truncation cannot hold the state to the tail tolerance."""


class InvalidStateError(ValueError):
    """A density matrix violates hermiticity, unit trace or positivity."""


def choose_n_max(alpha_sq: float, tail: float = TRUNCATION_TAIL) -> int:
    """Smallest photon-number cutoff whose Poisson tail is below `tail`.

    The cutoff is floored at N_MAX_FLOOR so that small-amplitude states
    still live in a space large enough for multi-photon observables.
    """
    if alpha_sq < 0:
        raise ValueError("mean photon number must be >= 0")
    if alpha_sq == 0:
        return N_MAX_FLOOR
    n = N_MAX_FLOOR
    while poisson.sf(n, alpha_sq) >= tail:
        n += 1
    return n


@dataclass(frozen=True)
class FockState:
    """Pure state of a single bosonic mode, truncated at `n_max` photons."""

    amplitudes: np.ndarray
    n_max: int

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.n_max + 1,):
            raise ValueError("amplitude vector must have length n_max + 1")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.n_max + 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def prob(self, n: int) -> float:
        return float(abs(self.amplitudes[n]) ** 2)

    def mean_photon(self) -> float:
        ns = np.arange(self.dim)
        return float(np.sum(ns * np.abs(self.amplitudes) ** 2))

    def density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()),
                             (self.dim,))


def coherent_state(alpha: complex, n_max: int | None = None) -> FockState:
    """Coherent state |alpha> truncated (and renormalized) at `n_max`.

    If `n_max` is omitted it is chosen by the truncation rule.  An
    explicitly passed cutoff that leaves more than TRUNCATION_TAIL of
    Poisson weight above it is rejected rather than silently clipped.
    """
    alpha = complex(alpha)
    mean = abs(alpha) ** 2
    if n_max is None:
        n_max = choose_n_max(mean)
    elif mean > 0 and poisson.sf(n_max, mean) >= TRUNCATION_TAIL:
        raise TruncationError(
            f"n_max={n_max} keeps Poisson tail "
            f"{poisson.sf(n_max, mean):.3e} >= {TRUNCATION_TAIL:g} "
            f"for |alpha|^2={mean:g}")
    ns = np.arange(n_max + 1)
    # e^{-|a|^2/2} a^n / sqrt(n!), built in log space to stay stable
    if alpha == 0:
        amps = np.zeros(n_max + 1, dtype=complex)
        amps[0] = 1.0
    else:
        from scipy.special import gammaln
        logmag = (-mean / 2 + ns * np.log(abs(alpha))
                  - 0.5 * gammaln(ns + 1.0))
        phase = np.exp(1j * ns * np.angle(alpha))
        amps = np.exp(logmag) * phase
        amps = amps / np.linalg.norm(amps)
    return FockState(amps, n_max)


@dataclass(frozen=True)
class DensityMatrix:
    """Density matrix over a composite basis.

    `dims` lists subsystem dimensions fastest-index-first; their product
    must equal the matrix size.
    """

    entries: np.ndarray
    dims: tuple = field(default=None)

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError("density matrix must be square")
        dims = self.dims if self.dims is not None else (entries.shape[0],)
        dims = tuple(int(d) for d in dims)
        if int(np.prod(dims)) != entries.shape[0]:
            raise ValueError(
                f"dims {dims} inconsistent with matrix size {entries.shape[0]}")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def trace(self) -> float:
        return float(np.real(np.trace(self.entries)))

    def purity(self) -> float:
        return float(np.real(np.trace(self.entries @ self.entries)))

    def eigmin(self) -> float:
        return float(np.min(np.linalg.eigvalsh(self.entries)))

    def validate(self, herm_tol: float = 1e-10, trace_tol: float = 1e-9,
                 psd_floor: float = -1e-9) -> "DensityMatrix":
        """Raise InvalidStateError unless Hermitian/unit-trace/PSD within
        the stated tolerances.  Returns self so calls can be chained."""
        dev = np.max(np.abs(self.entries - self.entries.conj().T))
        if dev > herm_tol:
            raise InvalidStateError(f"hermiticity violated by {dev:.3e}")
        tr = np.trace(self.entries)
        if abs(tr - 1.0) > trace_tol:
            raise InvalidStateError(f"trace {tr} deviates from 1")
        emin = self.eigmin()
        if emin < psd_floor:
            raise InvalidStateError(f"negative eigenvalue {emin:.3e}")
        return self


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product with operands listed fastest-index-first.

    tensor(A_photon, B_atom) acts on the composite basis where the photon
    index varies fastest, i.e. it equals kron(B_atom, A_photon).
    """
    if not ops:
        raise ValueError("tensor() needs at least one operand")
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(np.asarray(op, dtype=complex), out)
    return out


def tensor_state(rho_a: DensityMatrix, rho_b: DensityMatrix) -> DensityMatrix:
    """Product state of two density matrices (a fastest, b slowest)."""
    return DensityMatrix(tensor(rho_a.entries, rho_b.entries),
                         rho_a.dims + rho_b.dims)


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Trace out every subsystem not listed in `keep`.

    `keep` is an iterable of subsystem indices into rho.dims (0 = fastest
    index).  The kept subsystems retain their original relative order.
    """
    keep = sorted(set(int(k) for k in np.atleast_1d(keep)))
    n = len(rho.dims)
    if any(k < 0 or k >= n for k in keep):
        raise ValueError(f"keep indices {keep} out of range for dims {rho.dims}")
    # Row-major reshape puts the last axis fastest, so axis j of the
    # reshaped tensor is subsystem n-1-j.
    rev = tuple(reversed(rho.dims))
    out = rho.entries.reshape(rev + rev)
    traced_axes = [n - 1 - k for k in range(n) if k not in keep]
    # contract bra/ket axis pairs of traced subsystems, highest axis first,
    # so the positions of the axes still to be contracted are unaffected
    offset = len(rev)
    for ax in sorted(traced_axes, reverse=True):
        out = np.trace(out, axis1=ax, axis2=ax + offset)
        offset -= 1
    kept_dims = tuple(rho.dims[k] for k in keep)
    d = int(np.prod(kept_dims)) if kept_dims else 1
    return DensityMatrix(out.reshape(d, d), kept_dims)


def expectation(rho: DensityMatrix, observable: np.ndarray) -> float:
    """<O> = Tr(rho O) for a Hermitian observable.

    Emits a warning (and still returns the real part) if the observable is
    not Hermitian.
    """
    obs = np.asarray(observable, dtype=complex)
    if obs.shape != rho.entries.shape:
        raise ValueError(
            f"observable shape {obs.shape} does not match state {rho.entries.shape}")
    if np.max(np.abs(obs - obs.conj().T)) > 1e-10:
        warnings.warn("expectation() called with a non-Hermitian observable",
                      stacklevel=2)
    val = np.trace(rho.entries @ obs)
    return float(np.real(val))


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """(1/2) ||a - b||_1 via the eigenvalues of the Hermitian difference."""
    if a.entries.shape != b.entries.shape:
        raise ValueError("states live on different spaces")
    diff = a.entries - b.entries
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff))))


def annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def number_operator(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def vacuum_projector(dim: int) -> np.ndarray:
    p = np.zeros((dim, dim), dtype=complex)
    p[0, 0] = 1.0
    return p


def nonvacuum_projector(dim: int) -> np.ndarray:
    """Projector onto all photon-number states with n >= 1."""
    return np.eye(dim, dtype=complex) - vacuum_projector(dim)
