"""Chain geometry and electromagnetic couplings.

Natural units throughout the package: the isolated-atom decay rate is 1
(it sets the time unit) and lengths are measured in units of the atomic
transition wavelength, so the vacuum wavenumber is ``K0 = 2*pi``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, SelfInteractionError

K0 = 2.0 * np.pi

_MIN_SEPARATION = 1e-12


@dataclass(frozen=True)
class ChainGeometry:
    """Uniform 1D chain of identical dipoles along z.

    Atom m (m = 1..n_atoms) sits at (0, 0, m*spacing); all dipoles share
    one unit orientation vector (default: along the chain).
    """

    n_atoms: int
    spacing: float
    dipole_orientation: tuple[float, float, float] = (0.0, 0.0, 1.0)

    def __post_init__(self):
        if self.n_atoms < 1:
            raise ConfigError(f"n_atoms must be >= 1, got {self.n_atoms}")
        if not self.spacing > 0:
            raise ConfigError(f"spacing must be > 0, got {self.spacing}")
        p = np.asarray(self.dipole_orientation, dtype=float)
        if p.shape != (3,) or abs(np.linalg.norm(p) - 1.0) > 1e-12:
            raise ConfigError("dipole_orientation must be a unit 3-vector")
        object.__setattr__(self, "dipole_orientation", tuple(p))

    @property
    def positions(self) -> np.ndarray:
        """(N, 3) array of atom positions, strictly increasing along z."""
        r = np.zeros((self.n_atoms, 3))
        r[:, 2] = self.spacing * np.arange(1, self.n_atoms + 1)
        return r


@dataclass(frozen=True)
class CouplingMatrices:
    """Decay matrix and single-excitation effective Hamiltonian of a chain.

    ``decay`` is the real symmetric matrix of collective decay rates with
    unit diagonal; ``h_eff_single`` is the complex symmetric one-excitation
    Hamiltonian whose anti-Hermitian part is -i*decay/2.  Both are stored
    in isolated-atom decay units.
    """

    geometry: ChainGeometry
    decay: np.ndarray = field(repr=False)
    h_eff_single: np.ndarray = field(repr=False)

    @property
    def n_atoms(self) -> int:
        return self.geometry.n_atoms


def dyadic_green(r_src, r_obs) -> np.ndarray:
    """Free-space dyadic Green tensor between two points (in wavelength units).

    Returns the 3x3 complex tensor at wavenumber K0; the self term is
    excluded (coincident points raise SelfInteractionError).
    """
    r_src = np.asarray(r_src, dtype=float)
    r_obs = np.asarray(r_obs, dtype=float)
    dr = r_obs - r_src
    r = np.linalg.norm(dr)
    if r <= _MIN_SEPARATION:
        raise SelfInteractionError(
            "Green tensor is singular at coincident points; the self term "
            "is handled by the unit diagonal of the decay matrix"
        )
    rhat = dr / r
    x = K0 * r
    scalar = np.exp(1j * x) / (4.0 * np.pi * r)
    c_iso = 1.0 + 1j / x - 1.0 / x**2
    c_rr = -1.0 - 3.0j / x + 3.0 / x**2
    return scalar * (c_iso * np.eye(3) + c_rr * np.outer(rhat, rhat))


def green_projection(separation: float, orientation) -> complex:
    """Dipole-projected Green function p .G(r1, r2). p for two chain sites."""
    p = np.asarray(orientation, dtype=float)
    g = dyadic_green((0.0, 0.0, 0.0), (0.0, 0.0, separation))
    return complex(p @ g @ p)


def coupling_matrices(geometry: ChainGeometry) -> CouplingMatrices:
    """Build the decay matrix and single-excitation H_eff for a chain.

    Off-diagonal entries follow from the dipole-projected Green tensor,
    normalized so an isolated atom decays at rate 1; the single-atom
    energy shift is gauged to zero, so the diagonal of h_eff_single is
    exactly -i/2.
    """
    n = geometry.n_atoms
    # Uniform chain: only N-1 distinct separations.
    proj = np.array(
        [green_projection(d * geometry.spacing, geometry.dipole_orientation)
         for d in range(1, n)],
        dtype=complex,
    )
    h_by_dist = -(3.0 * np.pi / K0) * proj

    h = np.full((n, n), -0.5j, dtype=complex)
    idx = np.arange(n)
    dist = np.abs(idx[:, None] - idx[None, :])
    off = dist > 0
    h[off] = h_by_dist[dist[off] - 1]

    decay = -2.0 * h.imag
    return CouplingMatrices(geometry=geometry, decay=decay, h_eff_single=h)
