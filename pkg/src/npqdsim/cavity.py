"""Steady-state input-output model of the single-sided fibre cavity.

All rates and detunings are angular frequencies in rad/us (i.e. a value of
2*pi*34.6 means "2pi x 34.6 MHz").  Config ingestion converts plain MHz to
these units once; nothing else in the package multiplies by 2pi.

With N atoms coupled (N=0 for the noncoupling atomic state, N=1 for the
coupling one) the five outgoing coherent amplitudes for a drive alpha are

    r   = (1 - mu^2 2 kr / D) alpha          reflection into the fibre
    r_o = sqrt(1-mu^2) mu 2 kr / D alpha      mode-mismatch reflection
    t   = mu 2 sqrt(kr kt) / D alpha          transmission
    m   = mu 2 sqrt(kr km) / D alpha          mirror scattering/absorption
    a   = mu 2 g sqrt(kr gamma N)/(i da + gamma) / D alpha   atomic scattering

with D = N g^2/(i da + gamma) + i dc + kappa and kappa = kr + kt + km.
The five squared moduli sum to |alpha|^2 exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import curve_fit

TWO_PI = 2.0 * math.pi

SPECTRUM_COLUMNS = ("delta_mhz", "r_empty", "r_coupled")


@dataclass(frozen=True)
class SystemParams:
    """Physical constants of the atom-cavity-detector system.

    g, gamma, kappa_*, delta_* are angular frequencies (rad/us); mu_fc is
    the fibre-cavity field mode matching; p_dc is the detector dark-count
    probability per run and p_spd the conventional single-photon-detector
    dark-count probability per qubit gate.
    """

    g: float
    gamma: float
    kappa_r: float
    kappa_t: float
    kappa_m: float
    mu_fc: float
    delta_a: float = 0.0
    delta_c: float = 0.0
    p_dc: float = 0.0
    p_spd: float = 0.0

    def __post_init__(self):
        for name in ("g", "gamma", "kappa_r", "kappa_t", "kappa_m"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.kappa <= 0:
            raise ValueError("total field decay rate kappa must be > 0")
        for name in ("mu_fc", "p_dc", "p_spd"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be within [0, 1], got {v}")

    @property
    def kappa(self) -> float:
        return self.kappa_r + self.kappa_t + self.kappa_m

    @property
    def coupling_strength(self) -> float:
        """mu_fc^2 * kappa_r, the only combination of the reflection-channel
        parameters that enters any reflection intensity."""
        return self.mu_fc ** 2 * self.kappa_r

    @classmethod
    def from_mhz(cls, g_mhz, gamma_mhz, kappa_r_mhz, kappa_t_mhz, kappa_m_mhz,
                 mu_fc, delta_a_mhz=0.0, delta_c_mhz=0.0, p_dc=0.0, p_spd=0.0):
        """Build from plain-MHz rates (the config file unit)."""
        return cls(g=TWO_PI * g_mhz, gamma=TWO_PI * gamma_mhz,
                   kappa_r=TWO_PI * kappa_r_mhz, kappa_t=TWO_PI * kappa_t_mhz,
                   kappa_m=TWO_PI * kappa_m_mhz, mu_fc=mu_fc,
                   delta_a=TWO_PI * delta_a_mhz, delta_c=TWO_PI * delta_c_mhz,
                   p_dc=p_dc, p_spd=p_spd)

    def without_dark_counts(self) -> "SystemParams":
        return replace(self, p_dc=0.0, p_spd=0.0)


@dataclass(frozen=True)
class BranchAmplitudes:
    """The five outgoing coherent amplitudes for one atomic branch."""

    r: complex
    r_o: complex
    t: complex
    m: complex
    a: complex
    branch: str  # "0_a" (coupling, N=1) or "1_a" (noncoupling, N=0)

    def as_array(self) -> np.ndarray:
        return np.array([self.r, self.r_o, self.t, self.m, self.a])

    def loss_array(self) -> np.ndarray:
        """The four amplitudes that leave the heralded reflection path."""
        return np.array([self.r_o, self.t, self.m, self.a])

    def total_power(self) -> float:
        return float(np.sum(np.abs(self.as_array()) ** 2))


def branch_amplitudes(params: SystemParams, n_atoms: int,
                      alpha: complex = 1.0) -> BranchAmplitudes:
    """Outgoing amplitudes for a drive `alpha` with `n_atoms` coupled atoms."""
    if n_atoms not in (0, 1):
        raise ValueError("n_atoms must be 0 or 1")
    if params.kappa <= 0:
        raise ValueError("kappa must be > 0")
    if n_atoms == 1 and params.gamma == 0 and params.delta_a == 0:
        raise ValueError("singular atomic denominator: gamma=0 at delta_a=0")
    alpha = complex(alpha)
    mu = params.mu_fc
    kr, kt, km = params.kappa_r, params.kappa_t, params.kappa_m
    atom_denom = 1j * params.delta_a + params.gamma
    denom = n_atoms * params.g ** 2 / atom_denom + 1j * params.delta_c + params.kappa
    drive = mu * 2.0 * kr / denom
    return BranchAmplitudes(
        r=(1.0 - mu * drive) * alpha,
        r_o=math.sqrt(max(1.0 - mu ** 2, 0.0)) * drive * alpha,
        t=mu * 2.0 * math.sqrt(kr * kt) / denom * alpha,
        m=mu * 2.0 * math.sqrt(kr * km) / denom * alpha,
        a=mu * 2.0 * params.g * math.sqrt(kr * params.gamma * n_atoms)
          / atom_denom / denom * alpha,
        branch="0_a" if n_atoms == 1 else "1_a",
    )


def reflection_coefficient(params: SystemParams, n_atoms: int,
                           deltas=0.0) -> complex | np.ndarray:
    """Field reflection coefficient r/alpha at probe detuning offsets.

    A probe offset shifts delta_a and delta_c together (sweeping the probe
    frequency relative to a co-resonant atom and cavity).  Accepts a scalar
    or an array of offsets in rad/us and is vectorized over the latter.
    """
    if n_atoms not in (0, 1):
        raise ValueError("n_atoms must be 0 or 1")
    if params.kappa <= 0:
        raise ValueError("kappa must be > 0")
    deltas = np.asarray(deltas, dtype=float)
    da = params.delta_a + deltas
    if n_atoms == 1 and params.gamma == 0 and np.any(da == 0):
        raise ValueError("singular atomic denominator: gamma=0 at delta_a=0")
    denom = (n_atoms * params.g ** 2 / (1j * da + params.gamma)
             + 1j * (params.delta_c + deltas) + params.kappa)
    r = 1.0 - 2.0 * params.mu_fc ** 2 * params.kappa_r / denom
    return complex(r) if r.ndim == 0 else r


def reflection_spectrum(params: SystemParams, detunings) -> np.ndarray:
    """Intensity reflection vs probe detuning for both atomic branches.

    `detunings` are probe offsets in rad/us; returns an (n, 3) array with
    columns (delta_mhz, r_empty, r_coupled) where the reflections are
    |r/alpha|^2.
    """
    detunings = np.atleast_1d(np.asarray(detunings, dtype=float))
    if detunings.size == 0:
        raise ValueError("detuning grid must be nonempty")
    r_empty = np.abs(reflection_coefficient(params, 0, detunings)) ** 2
    r_coupled = np.abs(reflection_coefficient(params, 1, detunings)) ** 2
    return np.column_stack([detunings / TWO_PI, r_empty, r_coupled])


def cooperativity(params: SystemParams) -> float:
    """g^2 / (2 kappa gamma)."""
    if params.kappa <= 0 or params.gamma <= 0:
        raise ValueError("kappa and gamma must be > 0")
    return params.g ** 2 / (2.0 * params.kappa * params.gamma)


def solve_coupling_strength(kappa: float, r_empty: float,
                            overcoupled: bool = True) -> float:
    """mu_fc^2 * kappa_r consistent with an on-resonance empty-cavity
    intensity reflection `r_empty`.

    The quadratic has two roots; the overcoupled one (reflection phase pi,
    the regime this detector needs) is the default.
    """
    if not 0.0 <= r_empty <= 1.0:
        raise ValueError("r_empty must be within [0, 1]")
    root = math.sqrt(r_empty)
    u = (1.0 + root) * kappa if overcoupled else (1.0 - root) * kappa
    return u / 2.0


def with_fitted_reflection(params: SystemParams, r_empty: float,
                           overcoupled: bool = True) -> SystemParams:
    """Rescale kappa_r (at fixed mu_fc and total kappa) so the empty-cavity
    on-resonance reflection equals `r_empty`.  The freed decay is split
    evenly between kappa_t and kappa_m; only mu_fc^2*kappa_r is observable
    in any reflection intensity, so the split is a documented convention."""
    target = solve_coupling_strength(params.kappa, r_empty, overcoupled)
    kappa_r = target / params.mu_fc ** 2
    if kappa_r > params.kappa:
        raise ValueError(
            f"r_empty={r_empty} needs kappa_r={kappa_r/TWO_PI:.3f} MHz "
            f"> total kappa={params.kappa/TWO_PI:.3f} MHz at mu_fc={params.mu_fc}")
    rest = params.kappa - kappa_r
    return replace(params, kappa_r=kappa_r, kappa_t=rest / 2.0, kappa_m=rest / 2.0)


def idealized(params: SystemParams) -> SystemParams:
    """Zero-imperfection variant: perfect mode matching, no parasitic decay
    channels, coupling deep in the strong-coupling regime, no dark counts.
    The empty cavity then reflects with amplitude exactly -1 and the
    coupled branch approaches +1."""
    return replace(params, mu_fc=1.0, kappa_r=params.kappa, kappa_t=0.0,
                   kappa_m=0.0, g=params.g * 1e3, p_dc=0.0, p_spd=0.0)


def _empty_reflection_model(delta, u, kappa):
    return ((kappa - u) ** 2 + delta ** 2) / (kappa ** 2 + delta ** 2)


def fit_empty_cavity(detunings, reflectances) -> tuple[float, float]:
    """Fit (mu^2 2 kappa_r, kappa) to an empty-cavity reflection spectrum.

    Deterministic: the initial guess is computed from the on-resonance
    contrast and the half-contrast width of the supplied curve.
    """
    detunings = np.asarray(detunings, dtype=float)
    reflectances = np.asarray(reflectances, dtype=float)
    r0 = reflectances[np.argmin(np.abs(detunings))]
    contrast = 1.0 - reflectances
    half = np.max(contrast) / 2.0
    above = detunings[contrast >= half]
    kappa0 = (np.max(above) - np.min(above)) / 2.0 if above.size > 1 else 1.0
    u0 = (1.0 + math.sqrt(max(r0, 0.0))) * kappa0
    popt, _ = curve_fit(_empty_reflection_model, detunings, reflectances,
                        p0=(u0, kappa0))
    return float(popt[0]), float(abs(popt[1]))
