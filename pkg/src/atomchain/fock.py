"""Truncated multi-excitation basis, operator embedding and the master equation.

States are subsets of excited atoms (1-based labels), enumerated ground
state first, then singles, pairs and triples in lexicographic order.
Everything above ``n_max`` excitations is dropped; the spontaneous decay
channel only moves population downward, so the truncation only leaks
through the coherent drive.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np
import scipy.sparse as sp

from .errors import BasisMismatchError, ConfigError

__all__ = [
    "TruncatedBasis",
    "DensityMatrix",
    "build_basis",
    "lowering_operator",
    "number_diagonal",
    "embed_hamiltonian",
    "embed_single_vector",
    "embed_pair_vector",
    "RecyclingChannel",
    "me_rhs",
]


@dataclass(frozen=True)
class TruncatedBasis:
    """Ordered enumeration of excitation configurations up to n_max."""

    n_atoms: int
    n_max: int
    states: tuple[tuple[int, ...], ...]
    index_of: dict[tuple[int, ...], int] = field(repr=False)
    excitation: np.ndarray = field(repr=False)  # number of excitations per state
    src: np.ndarray = field(repr=False)  # (N, S): states containing atom n
    dst: np.ndarray = field(repr=False)  # (N, S): same states with atom n removed

    @property
    def dimension(self) -> int:
        return len(self.states)

    @property
    def low_dimension(self) -> int:
        """Dimension of the block with fewer than n_max excitations."""
        return sum(comb(self.n_atoms, k) for k in range(self.n_max))

    def manifold_slice(self, k: int) -> slice:
        start = sum(comb(self.n_atoms, i) for i in range(k))
        return slice(start, start + comb(self.n_atoms, k))

    def pairs(self) -> list[tuple[int, int]]:
        if self.n_max < 2:
            raise ConfigError("basis has no two-excitation manifold")
        s = self.manifold_slice(2)
        return [tuple(st) for st in self.states[s]]


def build_basis(n_atoms: int, n_max: int) -> TruncatedBasis:
    """Enumerate the truncated basis for ``n_atoms`` atoms up to ``n_max`` excitations."""
    if not 1 <= n_max <= min(3, n_atoms):
        raise ConfigError(
            f"n_max must satisfy 1 <= n_max <= min(3, n_atoms); "
            f"got n_max={n_max}, n_atoms={n_atoms}"
        )
    states: list[tuple[int, ...]] = []
    for k in range(n_max + 1):
        states.extend(combinations(range(1, n_atoms + 1), k))
    index_of = {s: i for i, s in enumerate(states)}
    excitation = np.array([len(s) for s in states], dtype=np.int64)

    src_rows, dst_rows = [], []
    for n in range(1, n_atoms + 1):
        src_n, dst_n = [], []
        for i, s in enumerate(states):
            if n in s:
                src_n.append(i)
                dst_n.append(index_of[tuple(a for a in s if a != n)])
        src_rows.append(src_n)
        dst_rows.append(dst_n)
    return TruncatedBasis(
        n_atoms=n_atoms,
        n_max=n_max,
        states=tuple(states),
        index_of=index_of,
        excitation=excitation,
        src=np.array(src_rows, dtype=np.int64),
        dst=np.array(dst_rows, dtype=np.int64),
    )


def lowering_operator(n: int, basis: TruncatedBasis) -> sp.csr_matrix:
    """Sparse sigma_ge of atom n: removes excitation n where present."""
    if not 1 <= n <= basis.n_atoms:
        raise ConfigError(f"atom index {n} outside 1..{basis.n_atoms}")
    rows = basis.dst[n - 1]
    cols = basis.src[n - 1]
    data = np.ones(len(rows))
    d = basis.dimension
    return sp.csr_matrix((data, (rows, cols)), shape=(d, d))


def number_diagonal(basis: TruncatedBasis) -> np.ndarray:
    """Diagonal of the total excitation-number operator."""
    return basis.excitation.astype(float)


def embed_hamiltonian(h_single: np.ndarray, basis: TruncatedBasis) -> sp.csr_matrix:
    """Embed a one-body (hopping) Hamiltonian into the truncated basis.

    ``h_single[i, j]`` multiplies the move of one excitation from atom j+1
    to atom i+1; the diagonal acts as an excited-state energy.
    """
    n = basis.n_atoms
    if h_single.shape != (n, n):
        raise BasisMismatchError("h_single does not match the basis size")
    rows, cols, vals = [], [], []
    for col, s in enumerate(basis.states):
        occupied = set(s)
        for src_atom in s:
            rest = occupied - {src_atom}
            for i in range(1, n + 1):
                if i in rest:
                    continue
                target = tuple(sorted(rest | {i}))
                rows.append(basis.index_of[target])
                cols.append(col)
                vals.append(h_single[i - 1, src_atom - 1])
    d = basis.dimension
    return sp.csr_matrix((np.array(vals, dtype=complex), (rows, cols)), shape=(d, d))


def embed_single_vector(amplitudes: np.ndarray, basis: TruncatedBasis) -> np.ndarray:
    """Place single-excitation amplitudes c(m) into the full basis."""
    if len(amplitudes) != basis.n_atoms:
        raise BasisMismatchError("amplitude vector does not match the basis")
    vec = np.zeros(basis.dimension, dtype=complex)
    vec[basis.manifold_slice(1)] = amplitudes
    return vec


def embed_pair_vector(amplitudes: np.ndarray, basis: TruncatedBasis) -> np.ndarray:
    """Place pair-basis amplitudes (lexicographic m < n) into the full basis."""
    s = basis.manifold_slice(2)
    if len(amplitudes) != s.stop - s.start:
        raise BasisMismatchError("pair amplitude vector does not match the basis")
    vec = np.zeros(basis.dimension, dtype=complex)
    vec[s] = amplitudes
    return vec


class RecyclingChannel:
    """Precomputed population-recycling superoperator of the master equation.

    Applies rho -> sum_{m,n} decay[m,n] * s_m rho s_n^dag with s_m the
    lowering operator of atom m, using gather/scatter index arrays instead
    of N^2 sparse products.  The result lives entirely in the block with
    fewer than n_max excitations.
    """

    def __init__(self, decay: np.ndarray, basis: TruncatedBasis):
        n = basis.n_atoms
        if decay.shape != (n, n):
            raise BasisMismatchError("decay matrix does not match the basis size")
        self.basis = basis
        self.decay = np.asarray(decay, dtype=float)
        self._decay_c = self.decay.astype(complex)
        self._src = basis.src
        self._dst = basis.dst
        self._d = basis.dimension
        self._d_low = basis.low_dimension

    def _apply_low(self, rho: np.ndarray) -> np.ndarray:
        d, d_low = self._d, self._d_low
        n = self.decay.shape[0]
        scattered = np.zeros((n, d, d_low), dtype=complex)
        for m in range(n):
            scattered[m][:, self._dst[m]] = rho[:, self._src[m]]
        # contract the decay matrix over the atom axis with one BLAS call
        weighted = (self._decay_c @ scattered.reshape(n, -1)).reshape(n, d, d_low)
        j_low = np.zeros((d_low, d_low), dtype=complex)
        for m in range(n):
            j_low[self._dst[m]] += weighted[m][self._src[m], :]
        return j_low

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = np.zeros((self._d, self._d), dtype=complex)
        out[: self._d_low, : self._d_low] = self._apply_low(rho)
        return out

    def add_to(self, rho: np.ndarray, out: np.ndarray) -> None:
        """Accumulate the recycling term of ``rho`` into ``out`` in place."""
        out[: self._d_low, : self._d_low] += self._apply_low(rho)


def me_rhs(
    rho: np.ndarray,
    h_total,
    decay: np.ndarray,
    basis: TruncatedBasis,
    recycler: RecyclingChannel | None = None,
) -> np.ndarray:
    """Right-hand side of the master equation.

    d(rho)/dt = -i (H rho - rho H^dag) + sum_{m,n} decay[m,n] s_m rho s_n^dag,
    with H the non-Hermitian total Hamiltonian embedded on ``basis``.
    """
    if rho.shape != (basis.dimension, basis.dimension):
        raise BasisMismatchError("density matrix does not match the basis dimension")
    if h_total.shape != rho.shape:
        raise BasisMismatchError("Hamiltonian does not match the basis dimension")
    if recycler is None:
        recycler = RecyclingChannel(decay, basis)
    h_rho = h_total @ rho
    rho_hdag = (h_total @ rho.conj().T).conj().T
    out = -1j * (h_rho - rho_hdag)
    recycler.add_to(rho, out)
    return out


@dataclass
class DensityMatrix:
    """Hermitian trace-one state over a truncated basis."""

    matrix: np.ndarray
    basis: TruncatedBasis

    @classmethod
    def ground_state(cls, basis: TruncatedBasis) -> "DensityMatrix":
        m = np.zeros((basis.dimension, basis.dimension), dtype=complex)
        m[0, 0] = 1.0
        return cls(matrix=m, basis=basis)

    @classmethod
    def pure(cls, vector: np.ndarray, basis: TruncatedBasis) -> "DensityMatrix":
        if len(vector) != basis.dimension:
            raise BasisMismatchError("state vector does not match the basis dimension")
        v = np.asarray(vector, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(matrix=np.outer(v, v.conj()), basis=basis)

    def validate(self, herm_tol=1e-10, trace_tol=1e-8, eig_floor=-1e-8) -> None:
        m = self.matrix
        if np.max(np.abs(m - m.conj().T)) > herm_tol:
            raise ValueError("density matrix is not Hermitian within tolerance")
        if abs(np.trace(m).real - 1.0) > trace_tol or abs(np.trace(m).imag) > trace_tol:
            raise ValueError("density matrix trace deviates from one")
        if np.min(np.linalg.eigvalsh((m + m.conj().T) / 2)) < eig_floor:
            raise ValueError("density matrix has a significantly negative eigenvalue")
