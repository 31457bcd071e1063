"""Collective eigenmodes of the chain in the one- and two-excitation manifolds.

Modes are labeled by an integer xi sorted from smallest to largest decay
rate, so xi = 1 is the most subradiant mode and xi = N the most
superradiant one.  Doubly-excited modes carry a rank (same sorting) plus
a pair label (xi1, xi2) assigned by overlap with the antisymmetrized
product of two single-excitation modes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb

import numpy as np

from .errors import (
    AmbiguousLabelWarning,
    DegenerateAnsatzError,
    DiagonalizationError,
    DomainError,
)
from .geometry import K0, CouplingMatrices

ZETA2 = np.pi**2 / 6.0
ZETA3 = 1.2020569031595942854  # zeta(3)

_GAMMA_BIN = 1e-10  # decay-rate quantum below which modes count as degenerate


@dataclass(frozen=True)
class CollectiveMode:
    """One singly-excited eigenmode: unit amplitudes c(m), shift and decay."""

    label: int
    amplitudes: np.ndarray = field(repr=False)
    shift: float
    decay: float


@dataclass(frozen=True)
class TwoExcitationMode:
    """One doubly-excited eigenmode over the pair basis (m < n, lexicographic)."""

    rank: int
    pair_label: tuple[int, int]
    amplitudes: np.ndarray = field(repr=False)
    shift: float
    decay: float
    label_overlap: float


# ---------------------------------------------------------------------------
# Polylogarithm
# ---------------------------------------------------------------------------

def _bernoulli_numbers(n_max: int) -> list[Fraction]:
    b = [Fraction(1)]
    for m in range(1, n_max + 1):
        s = Fraction(0)
        for j in range(m):
            s += Fraction(comb(m + 1, j)) * b[j]
        b.append(-s / (m + 1))
    return b


_BERNOULLI = _bernoulli_numbers(120)


def _zeta_int(n: int) -> float:
    """Riemann zeta at the integers needed by the log-series expansion."""
    if n == 2:
        return ZETA2
    if n == 3:
        return ZETA3
    if n == 0:
        return -0.5
    if n < 0:
        m = -n
        if m % 2 == 0:
            return 0.0
        return -float(_BERNOULLI[m + 1]) / (m + 1)
    raise ValueError(f"unsupported zeta argument {n}")


_HARMONIC = {2: 1.0, 3: 1.5}


def polylog(s: int, z: complex) -> complex:
    """Polylogarithm Li_s(z) = sum_{l>=1} z^l / l^s for s in {2, 3}, |z| <= 1.

    Direct summation away from the unit circle; the expansion in w = log z
    (convergent for |w| < 2*pi) close to it.  Absolute accuracy ~1e-13.
    """
    if s not in (2, 3):
        raise DomainError(f"polylog implemented for s in {{2, 3}}, got {s}")
    z = complex(z)
    if abs(z) > 1.0 + 1e-12:
        raise DomainError(f"polylog requires |z| <= 1, got |z| = {abs(z)}")
    if z == 0:
        return 0.0 + 0.0j

    if abs(z) <= 0.5:
        total = 0.0 + 0.0j
        term = 1.0 + 0.0j
        for l in range(1, 200):
            term *= z
            add = term / l**s
            total += add
            if abs(add) < 1e-16:
                break
        return total

    w = np.log(z)
    if w == 0:
        return complex(_zeta_int(s))
    # Li_s(e^w) = sum_{k != s-1} zeta(s-k) w^k / k!
    #           + (H_{s-1} - log(-w)) w^(s-1) / (s-1)!
    total = (_HARMONIC[s] - np.log(-w)) * w ** (s - 1) / (1.0 if s == 2 else 2.0)
    wk = 1.0 + 0.0j  # w^k / k!
    for k in range(0, 110):
        if k > 0:
            wk *= w / k
        if k == s - 1:
            continue
        zk = _zeta_int(s - k)
        if zk != 0.0:
            add = zk * wk
            total += add
            if k > 8 and abs(add) < 1e-17:
                break
    return complex(total)


# ---------------------------------------------------------------------------
# Analytic dispersion of the infinite chain (longitudinal polarization)
# ---------------------------------------------------------------------------

def kz_of_mode(n_atoms: int, spacing: float, xi: int) -> float:
    """Spin-wave wavenumber attached to mode xi of an N-atom chain."""
    if not 1 <= xi <= n_atoms:
        raise DomainError(f"mode label {xi} outside 1..{n_atoms}")
    return np.pi * (n_atoms + 1 - xi) / (spacing * (n_atoms + 1))


def analytic_dispersion(k_z: float, spacing: float) -> tuple[float, float]:
    """Infinite-chain decay rate and frequency shift at wavenumber k_z.

    The decay rate is the light-cone sum over reciprocal vectors
    g = 2*pi*m/spacing restricted to |k_z + g| < K0; the shift is the
    polylogarithm series of the retarded dipole sum, evaluated with
    Z1 = exp(i*(K0 + k_z)*a) and Z2 = exp(i*(K0 - k_z)*a).  Returns
    (decay, shift) in isolated-atom decay units.
    """
    if not spacing > 0:
        raise DomainError("spacing must be positive")
    if k_z < -1e-12 or k_z > np.pi / spacing + 1e-12:
        raise DomainError(
            f"k_z = {k_z} outside the first Brillouin zone [0, {np.pi / spacing:.4f}]"
        )

    x0 = K0 * spacing
    m_max = int(np.ceil((K0 + abs(k_z)) * spacing / (2 * np.pi))) + 1
    gamma = 0.0
    for m in range(-m_max, m_max + 1):
        q = k_z + 2.0 * np.pi * m / spacing
        if abs(q) < K0:
            gamma += 1.0 - (q / K0) ** 2
    gamma *= 3.0 * np.pi / (2.0 * x0)

    z1 = np.exp(1j * (K0 + k_z) * spacing)
    z2 = np.exp(1j * (K0 - k_z) * spacing)
    li = polylog(3, z1) + polylog(3, z2) - 1j * x0 * (polylog(2, z1) + polylog(2, z2))
    omega = float(np.real(-1.5 / x0**3 * li))
    return gamma, omega


# ---------------------------------------------------------------------------
# Finite-chain eigenmodes
# ---------------------------------------------------------------------------

def _fix_phase(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real positive."""
    out = vectors.copy()
    for j in range(out.shape[1]):
        i = int(np.argmax(np.abs(out[:, j])))
        phase = out[i, j] / abs(out[i, j])
        out[:, j] /= phase
    return out


def _sorted_eig(matrix: np.ndarray):
    """Eigendecomposition sorted by ascending decay, then ascending shift."""
    try:
        lam, vec = np.linalg.eig(matrix)
    except np.linalg.LinAlgError as exc:
        raise DiagonalizationError(str(exc)) from exc
    gamma = -2.0 * lam.imag
    omega = lam.real
    order = np.lexsort((omega, np.round(gamma / _GAMMA_BIN).astype(np.int64)))
    vec = vec[:, order]
    vec /= np.linalg.norm(vec, axis=0, keepdims=True)
    return gamma[order], omega[order], _fix_phase(vec)


def single_modes(coupling: CouplingMatrices) -> list[CollectiveMode]:
    """All singly-excited eigenmodes, sorted from smallest to largest decay."""
    gamma, omega, vec = _sorted_eig(coupling.h_eff_single)
    return [
        CollectiveMode(label=xi, amplitudes=vec[:, xi - 1],
                       shift=float(omega[xi - 1]), decay=float(gamma[xi - 1]))
        for xi in range(1, coupling.n_atoms + 1)
    ]


def sine_ansatz(n_atoms: int, xi: int) -> np.ndarray:
    """Spin-wave approximation of mode xi: sqrt(2/(N+1))*sin((N+1-xi)*m*pi/(N+1))."""
    if not 1 <= xi <= n_atoms:
        raise DomainError(f"mode label {xi} outside 1..{n_atoms}")
    m = np.arange(1, n_atoms + 1)
    return np.sqrt(2.0 / (n_atoms + 1)) * np.sin((n_atoms + 1 - xi) * m * np.pi / (n_atoms + 1))


def pair_basis(n_atoms: int) -> list[tuple[int, int]]:
    """Lexicographic enumeration of doubly-excited configurations (m < n)."""
    return list(combinations(range(1, n_atoms + 1), 2))


def pair_block_hamiltonian(coupling: CouplingMatrices) -> np.ndarray:
    """Restriction of the many-body effective Hamiltonian to two excitations."""
    n = coupling.n_atoms
    h = coupling.h_eff_single
    pairs = pair_basis(n)
    index = {p: k for k, p in enumerate(pairs)}
    dim = len(pairs)
    block = np.zeros((dim, dim), dtype=complex)
    for col, (p, q) in enumerate(pairs):
        # hop p -> i (i != q) and q -> i (i != p); i == source gives the diagonal
        for src, other in ((p, q), (q, p)):
            for i in range(1, n + 1):
                if i == other:
                    continue
                row = index[(i, other) if i < other else (other, i)]
                block[row, col] += h[i - 1, src - 1]
    return block


def fermionic_ansatz(modes: list[CollectiveMode], xi1: int, xi2: int) -> np.ndarray:
    """Antisymmetrized product of two single-excitation modes, unit norm.

    Component (m < n) is proportional to c1(m)c2(n) - c2(m)c1(n) over the
    lexicographic pair basis; swapping labels flips the global sign.
    """
    n = len(modes)
    if not (1 <= xi1 <= n and 1 <= xi2 <= n):
        raise DomainError(f"mode labels ({xi1}, {xi2}) outside 1..{n}")
    if xi1 == xi2:
        raise DegenerateAnsatzError("antisymmetric pair state vanishes for xi1 == xi2")
    c1 = modes[xi1 - 1].amplitudes
    c2 = modes[xi2 - 1].amplitudes
    vec = np.array([c1[p - 1] * c2[q - 1] - c2[p - 1] * c1[q - 1]
                    for (p, q) in pair_basis(n)])
    return vec / np.linalg.norm(vec)


def double_modes(coupling: CouplingMatrices, basis=None) -> list[TwoExcitationMode]:
    """Doubly-excited eigenmodes, sorted by decay and labeled by ansatz overlap.

    Labels (xi1, xi2) with xi1 < xi2 are assigned greedily by descending
    overlap with the antisymmetrized-product states, one-to-one; an
    AmbiguousLabelWarning is emitted when a mode is claimed with best
    overlap below 0.5.
    """
    n = coupling.n_atoms
    if n < 2:
        raise DomainError("two-excitation manifold requires at least 2 atoms")
    if basis is not None and basis.n_atoms != n:
        raise DomainError("basis size does not match the coupling matrices")

    gamma, omega, vec = _sorted_eig(pair_block_hamiltonian(coupling))
    dim = vec.shape[1]

    singles = single_modes(coupling)
    v1 = np.column_stack([m.amplitudes for m in singles])
    pairs = pair_basis(n)
    p_idx = np.array(pairs) - 1
    labels = list(combinations(range(1, n + 1), 2))
    l_idx = np.array(labels) - 1
    # ansatz matrix: column j is the antisymmetrized product for labels[j]
    fmat = (v1[p_idx[:, 0]][:, l_idx[:, 0]] * v1[p_idx[:, 1]][:, l_idx[:, 1]]
            - v1[p_idx[:, 0]][:, l_idx[:, 1]] * v1[p_idx[:, 1]][:, l_idx[:, 0]])
    fmat /= np.linalg.norm(fmat, axis=0, keepdims=True)

    overlap = np.abs(fmat.conj().T @ vec)  # (label, rank)
    lab_flat, rank_flat = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    order = np.lexsort((rank_flat.ravel(), lab_flat.ravel(), -overlap.ravel()))

    assigned_label = [-1] * dim
    assigned_ovl = np.zeros(dim)
    label_used = [False] * dim
    remaining = dim
    for k in order:
        lab, rank = divmod(int(k), dim)
        if label_used[lab] or assigned_label[rank] >= 0:
            continue
        assigned_label[rank] = lab
        assigned_ovl[rank] = overlap[lab, rank]
        label_used[lab] = True
        remaining -= 1
        if remaining == 0:
            break

    weak = int(np.sum(assigned_ovl < 0.5))
    if weak:
        warnings.warn(
            f"{weak} doubly-excited mode(s) labeled with best overlap < 0.5",
            AmbiguousLabelWarning,
            stacklevel=2,
        )

    return [
        TwoExcitationMode(
            rank=r + 1,
            pair_label=labels[assigned_label[r]],
            amplitudes=vec[:, r],
            shift=float(omega[r]),
            decay=float(gamma[r]),
            label_overlap=float(assigned_ovl[r]),
        )
        for r in range(dim)
    ]


def two_photon_drive_overlap(n_atoms: int, xi1: int, xi2: int, rabi: float = 1.0) -> float:
    """Normalized coupling of a doubly-applied shaped drive to pair (xi1, xi2).

    Evaluates the double sum over atom pairs of the product of the drive
    spin-wave profile with the antisymmetrized sine-ansatz coefficients,
    normalized by the drive strength squared (the result is independent
    of ``rabi``).  Returns 0 for xi1 == xi2.
    """
    if not (1 <= xi1 <= n_atoms and 1 <= xi2 <= n_atoms):
        raise DomainError(f"mode labels ({xi1}, {xi2}) outside 1..{n_atoms}")
    if xi1 == xi2:
        return 0.0
    theta = np.pi / (n_atoms + 1)
    m = np.arange(1, n_atoms + 1)
    drive = np.sin(m * theta)
    s1 = np.sin((n_atoms + 1 - xi1) * m * theta)
    s2 = np.sin((n_atoms + 1 - xi2) * m * theta)
    # antisymmetrized outer products restricted to i < j
    anti = np.outer(s1, s2) - np.outer(s2, s1)
    dd = np.outer(drive, drive)
    iu = np.triu_indices(n_atoms, k=1)
    total = np.sum(dd[iu] * anti[iu])
    return float(4.0 / (n_atoms + 1) ** 2 * total)
