"""Three-state rate model for the storage dynamics.

After the transfer, the surviving population sits almost entirely in the
most subradiant single mode and the most subradiant pair mode; a linear
cascade (pair mode feeding two single modes) then reproduces the full
master equation at late times in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .fock import RecyclingChannel, TruncatedBasis, build_basis, embed_pair_vector, embed_single_vector
from .geometry import ChainGeometry, CouplingMatrices, coupling_matrices
from .modes import CollectiveMode, TwoExcitationMode, double_modes, single_modes


@dataclass(frozen=True)
class RateModelConfig:
    """Rates and initial populations of the three-state cascade.

    ``pulse_area`` (drive strength times illumination time) fixes the
    initial conditions: the subradiant single mode starts at pulse_area^2,
    the pair mode at pulse_area^4/2 so that its atomic population is
    pulse_area^4, and the second single mode starts empty.
    """

    gamma1: float  # most subradiant single mode
    gamma2: float  # second most subradiant single mode
    gamma12: float  # most subradiant pair mode
    branch1: float  # pair -> mode 1 feed rate
    branch2: float  # pair -> mode 2 feed rate
    pulse_area: float

    def __post_init__(self):
        if min(self.gamma1, self.gamma2, self.gamma12) <= 0:
            raise ConfigError("all decay rates must be positive")
        if self.branch1 < 0 or self.branch2 < 0:
            raise ConfigError("branch rates must be non-negative")
        if self.branch1 + self.branch2 > self.gamma12 + 1e-9:
            raise ConfigError("branch rates exceed the total pair decay rate")

    @property
    def initial(self) -> tuple[float, float, float]:
        x2 = self.pulse_area**2
        return x2**2 / 2.0, x2, 0.0  # (pair, single 1, single 2)


def pair_decay_rate(
    single_mode: CollectiveMode,
    double_mode: TwoExcitationMode,
    coupling: CouplingMatrices,
    basis: TruncatedBasis,
) -> float:
    """Feed rate from a pair mode into one single mode through photon emission.

    Projects the recycling channel applied to the pair-mode projector onto
    the single-mode projector; non-negative by construction.
    """
    if basis.n_max < 2 or basis.n_atoms != coupling.n_atoms:
        raise ConfigError("basis must match the coupling and hold two excitations")
    v2 = embed_pair_vector(double_mode.amplitudes, basis)
    v1 = embed_single_vector(single_mode.amplitudes, basis)
    recycled = RecyclingChannel(coupling.decay, basis).apply(np.outer(v2, v2.conj()))
    return float(np.real(v1.conj() @ recycled @ v1))


def rate_config_from_chain(
    geometry: ChainGeometry,
    pulse_area: float,
    *,
    coupling: CouplingMatrices | None = None,
    basis: TruncatedBasis | None = None,
) -> RateModelConfig:
    """Assemble the cascade rates of a chain from its eigenmodes."""
    coupling = coupling if coupling is not None else coupling_matrices(geometry)
    basis = basis if basis is not None else build_basis(geometry.n_atoms, 2)
    singles = single_modes(coupling)
    pair = _pair_12(coupling, basis)
    return RateModelConfig(
        gamma1=singles[0].decay,
        gamma2=singles[1].decay,
        gamma12=pair.decay,
        branch1=pair_decay_rate(singles[0], pair, coupling, basis),
        branch2=pair_decay_rate(singles[1], pair, coupling, basis),
        pulse_area=pulse_area,
    )


def _pair_12(coupling: CouplingMatrices, basis: TruncatedBasis | None) -> TwoExcitationMode:
    for mode in double_modes(coupling, basis):
        if mode.pair_label == (1, 2):
            return mode
    raise ConfigError("no doubly-excited mode carries the label (1, 2)")


def _decay_with_source(c0, gamma, feed, gamma_src, t):
    """Solution of c' = -gamma c + feed * exp(-gamma_src t), c(0) = c0."""
    t = np.asarray(t, dtype=float)
    own = c0 * np.exp(-gamma * t)
    if feed == 0.0:
        return own
    if abs(gamma - gamma_src) < 1e-12 * max(gamma, gamma_src):
        return own + feed * t * np.exp(-gamma * t)
    return own + feed * (np.exp(-gamma_src * t) - np.exp(-gamma * t)) / (gamma - gamma_src)


def evolve_rate_model(cfg: RateModelConfig, t):
    """Closed-form populations (pair, single 1, single 2) at time(s) t."""
    c2_0, c1_0, c1b_0 = cfg.initial
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ConfigError("rate model defined for t >= 0")
    c2 = c2_0 * np.exp(-cfg.gamma12 * t)
    c1 = _decay_with_source(c1_0, cfg.gamma1, cfg.branch1 * c2_0, cfg.gamma12, t)
    c1b = _decay_with_source(c1b_0, cfg.gamma2, cfg.branch2 * c2_0, cfg.gamma12, t)
    return c2, c1, c1b


def rate_model_population(cfg: RateModelConfig, t):
    """Total atomic population of the cascade (pair states count twice)."""
    c2, c1, c1b = evolve_rate_model(cfg, t)
    return c1 + c1b + 2.0 * c2


def pop_closed_form(pulse_area: float, gamma1: float, gamma12: float, t):
    """Last-two-survivors population: x^2 e^(-gamma1 t) + x^4 e^(-gamma12 t)."""
    t = np.asarray(t, dtype=float)
    x2 = pulse_area**2
    return x2 * np.exp(-gamma1 * t) + x2**2 * np.exp(-gamma12 * t)


def gamma_closed_form(pulse_area: float, gamma1: float, kappa: float, t):
    """Instantaneous decay rate of the last-two-survivors population.

    Evaluated in the numerically stable form with the common factor
    exp(-gamma1 t) removed; tends to gamma1 at long times.
    """
    t = np.asarray(t, dtype=float)
    u = pulse_area**2 * np.exp(-(kappa - 1.0) * gamma1 * t)
    return gamma1 * (1.0 + kappa * u) / (1.0 + u)


def transition_time_formula(pulse_area: float, kappa: float, alpha1: float, n_atoms: int):
    """Time at which single- and two-photon decay weights become equal.

    Returns None when the two-photon channel never dominates, i.e. when
    kappa * pulse_area^2 <= 1.
    """
    if kappa <= 1 or alpha1 <= 0:
        raise ConfigError("requires kappa > 1 and alpha1 > 0")
    arg = kappa * pulse_area**2
    if arg <= 1.0:
        return None
    return float(np.log(arg) * n_atoms**3 / ((kappa - 1.0) * alpha1))


def equal_weight_band(kappa: float) -> float:
    """Relative band around gamma1 whose upper edge is the equal-weight level.

    The cascade predicts gamma = 2*kappa/(kappa+1) * gamma1 at the moment
    the two decay channels carry equal weight; detecting the transition at
    that level makes the extracted time comparable with the closed form.
    """
    if kappa <= 1:
        raise ConfigError("requires kappa > 1")
    return (kappa - 1.0) / (kappa + 1.0)


def kappa_ratio(
    geometry: ChainGeometry,
    basis: TruncatedBasis | None = None,
    *,
    coupling: CouplingMatrices | None = None,
) -> float:
    """Decay-rate ratio of the most subradiant pair and single modes."""
    if geometry.n_atoms < 3:
        raise ConfigError("kappa is defined for chains of at least 3 atoms")
    coupling = coupling if coupling is not None else coupling_matrices(geometry)
    gamma1 = single_modes(coupling)[0].decay
    pair = _pair_12(coupling, basis)
    return pair.decay / gamma1


@dataclass(frozen=True)
class SubradiantFit:
    """Power-law fit of the most subradiant decay rate against chain size."""

    alpha1: float  # prefactor of the fixed-exponent law alpha1 / N^3
    slope: float  # free-exponent fit, expected near -3


def fit_subradiant_scaling(spacing: float, n_values=None) -> SubradiantFit:
    """Fit gamma_1(N) = alpha1 * N^-3 over a range of chain sizes."""
    if n_values is None:
        n_values = range(10, 41)
    n_arr = np.array(list(n_values), dtype=float)
    g1 = np.array([
        single_modes(coupling_matrices(ChainGeometry(int(n), spacing)))[0].decay
        for n in n_arr
    ])
    slope, intercept = np.polyfit(np.log(n_arr), np.log(g1), 1)
    alpha1 = float(np.exp(np.mean(np.log(g1 * n_arr**3))))
    return SubradiantFit(alpha1=alpha1, slope=float(slope))
