"""Far-field radiation patterns of the chain's dipole coherences.

A spin wave with wavenumber k_z inside the light cone phase-matches to
vacuum modes on a cone around the chain axis; its opening angle follows
directly from k_z and fixes where a lens should sit to collect the
emitted photon.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ZeroFieldError
from .geometry import K0, ChainGeometry
from .modes import kz_of_mode

DEFAULT_N_THETA = 181
DEFAULT_N_PHI = 361


@dataclass(frozen=True)
class FarFieldPattern:
    """Peak-normalized radiated intensity on a (theta, phi) grid.

    theta is measured from the chain axis; intensity has shape
    (len(theta), len(phi)).
    """

    theta: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    intensity: np.ndarray = field(repr=False)

    def peak_angles(self) -> tuple[float, float]:
        i, j = np.unravel_index(int(np.argmax(self.intensity)), self.intensity.shape)
        return float(self.theta[i]), float(self.phi[j])


def far_field_pattern(
    coherences: np.ndarray,
    geometry: ChainGeometry,
    theta: np.ndarray | None = None,
    phi: np.ndarray | None = None,
) -> FarFieldPattern:
    """Radiated intensity of the lowering-operator expectation values.

    Uses the leading far-field asymptotic of the Green tensor (transverse
    projector times a phase factor per atom); the overall distance factor
    drops out of the peak-normalized pattern.
    """
    coherences = np.asarray(coherences, dtype=complex)
    if coherences.shape != (geometry.n_atoms,):
        raise ConfigError("need one coherence per atom")
    if not np.any(np.abs(coherences) > 0):
        raise ZeroFieldError("all dipole coherences vanish; no radiated field")
    if theta is None:
        theta = np.linspace(0.0, np.pi, DEFAULT_N_THETA)
    if phi is None:
        phi = np.linspace(0.0, 2.0 * np.pi, DEFAULT_N_PHI)
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if theta.size == 0 or phi.size == 0:
        raise ConfigError("angular grid must be non-empty")

    st, ct = np.sin(theta), np.cos(theta)
    sp_, cp = np.sin(phi), np.cos(phi)
    # unit observation directions, shape (3, n_theta, n_phi)
    rhat = np.stack([
        np.outer(st, cp),
        np.outer(st, sp_),
        np.outer(ct, np.ones_like(phi)),
    ])
    p = np.asarray(geometry.dipole_orientation)
    # |(1 - rr) p|^2 = 1 - (r.p)^2 for a real unit dipole
    rp = np.tensordot(p, rhat, axes=1)
    polar_factor = 1.0 - rp**2

    z = geometry.positions[:, 2]
    # array factor sum_n c_n exp(-i K0 cos(theta) z_n); phi-independent positions
    phase = np.exp(-1j * K0 * np.outer(ct, z))
    array_factor = phase @ coherences
    intensity = polar_factor * np.abs(array_factor[:, None]) ** 2

    peak = float(np.max(intensity))
    if peak <= 0.0:
        raise ZeroFieldError("radiated intensity vanishes on the whole grid")
    return FarFieldPattern(theta=theta, phi=phi, intensity=intensity / peak)


def cone_angle(xi_aim: int, n_atoms: int, spacing: float):
    """Opening angle of the emission cone of mode xi_aim, None if evanescent.

    Propagating modes satisfy k_z < K0 and radiate at
    theta = atan(k_perp / k_z) with k_perp = sqrt(K0^2 - k_z^2).
    """
    k_z = kz_of_mode(n_atoms, spacing, xi_aim)
    if k_z >= K0:
        return None
    k_perp = np.sqrt(K0**2 - k_z**2)
    return float(np.arctan2(k_perp, k_z))
