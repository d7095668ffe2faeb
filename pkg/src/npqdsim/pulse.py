"""Temporal-waveform transfer through the cavity reflection.

The reflection is linear and stationary, so a pulse envelope is propagated
spectrally: FFT the envelope, multiply each frequency bin by the steady
state reflection coefficient r(delta)/alpha, transform back.  Valid as
long as the pulse spectrum sits well inside the sampled band, which the
precondition below enforces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cavity import SystemParams, reflection_coefficient

TWO_PI = 2.0 * math.pi

WAVEFORM_COLUMNS = ("t_us", "i_in", "i_out_empty", "i_out_coupled")

# Nyquist band must exceed the cavity linewidth (angular FWHM 2*kappa)
# by this factor before the spectral transfer is trusted.
NYQUIST_MARGIN = 4.0


class AliasingError(ValueError):
    """Sample spacing too coarse for the cavity response bandwidth."""


@dataclass(frozen=True)
class Waveform:
    """Complex field envelope sampled on a uniform grid (dt in us)."""

    samples: np.ndarray
    dt: float
    t0: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.ndim != 1 or s.size == 0:
            raise ValueError("samples must be a nonempty 1-D array")
        if self.dt <= 0:
            raise ValueError("dt must be > 0")
        if not np.all(np.isfinite(s)):
            raise ValueError("samples must be finite")
        object.__setattr__(self, "samples", s)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.samples.size)

    @property
    def duration(self) -> float:
        return self.dt * self.samples.size

    def energy(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) * self.dt)

    def intensity(self) -> np.ndarray:
        return np.abs(self.samples) ** 2


def gaussian_pulse(fwhm_us: float, dt: float = 1e-3,
                   n_samples: int = 8192) -> Waveform:
    """Gaussian intensity profile of the given FWHM, centred in the window."""
    t = (np.arange(n_samples) - n_samples / 2) * dt
    sigma = fwhm_us / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    field = np.exp(-t ** 2 / (4.0 * sigma ** 2))
    return Waveform(field, dt, t0=float(t[0]))


def rising_exponential_pulse(rise_us: float, dt: float = 1e-3,
                             n_samples: int = 8192) -> Waveform:
    """Exponentially rising intensity with a sharp cutoff at the centre."""
    t = (np.arange(n_samples) - n_samples / 2) * dt
    field = np.where(t <= 0.0, np.exp(t / (2.0 * rise_us)), 0.0)
    return Waveform(field.astype(complex), dt, t0=float(t[0]))


def double_hump_pulse(fwhm_us: float, separation_us: float | None = None,
                      dt: float = 1e-3, n_samples: int = 8192) -> Waveform:
    """Two equal Gaussian humps; separation defaults to 1.5x the FWHM."""
    if separation_us is None:
        separation_us = 1.5 * fwhm_us
    t = (np.arange(n_samples) - n_samples / 2) * dt
    sigma = fwhm_us / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    field = (np.exp(-(t - separation_us / 2) ** 2 / (4.0 * sigma ** 2))
             + np.exp(-(t + separation_us / 2) ** 2 / (4.0 * sigma ** 2)))
    return Waveform(field, dt, t0=float(t[0]))


PULSE_SHAPES = {
    "gaussian": gaussian_pulse,
    "rising-exponential": rising_exponential_pulse,
    "double-hump": double_hump_pulse,
}


def apply_transfer(wave: Waveform, params: SystemParams,
                   n_atoms: int) -> Waveform:
    """Reflect a pulse envelope off the cavity with 0 or 1 coupled atoms.

    Raises AliasingError when the sampled band does not exceed the cavity
    linewidth by NYQUIST_MARGIN; output energy never exceeds input energy.
    """
    nyquist_angular = math.pi / wave.dt  # rad/us
    linewidth = 2.0 * params.kappa
    if nyquist_angular < NYQUIST_MARGIN * linewidth:
        raise AliasingError(
            f"Nyquist band {nyquist_angular:.1f} rad/us is below "
            f"{NYQUIST_MARGIN:g} x cavity linewidth {linewidth:.1f} rad/us; "
            f"use dt <= {math.pi / (NYQUIST_MARGIN * linewidth):.2e} us")
    spectrum = np.fft.fft(wave.samples)
    detunings = TWO_PI * np.fft.fftfreq(wave.samples.size, wave.dt)
    response = reflection_coefficient(params, n_atoms, detunings)
    out = np.fft.ifft(spectrum * response)
    return Waveform(out, wave.dt, wave.t0)


def intensity_overlap(a: Waveform, b: Waveform, delay_search: bool = False,
                      max_delay_us: float | None = None) -> float:
    """Bhattacharyya overlap of the normalized intensity profiles.

    overlap = sum_t sqrt(Ia(t) Ib(t)) with each profile normalized to unit
    area; insensitive to amplitude scaling.  With `delay_search`, `b` is
    shifted on the sample grid within +-max_delay_us (default: a tenth of
    the window) and the best overlap is returned.
    """
    if a.samples.size != b.samples.size or abs(a.dt - b.dt) > 1e-15:
        raise ValueError("waveforms must share the same sampling grid")
    ia = a.intensity()
    ib = b.intensity()
    if ia.sum() <= 0.0 or ib.sum() <= 0.0:
        raise ValueError("zero-energy waveform")
    ia = ia / ia.sum()
    ib = ib / ib.sum()
    if not delay_search:
        return float(np.sum(np.sqrt(ia * ib)))
    if max_delay_us is None:
        max_delay_us = a.duration / 10.0
    max_shift = max(int(round(max_delay_us / a.dt)), 0)
    best = 0.0
    for shift in range(-max_shift, max_shift + 1):
        shifted = np.zeros_like(ib)
        if shift >= 0:
            shifted[shift:] = ib[:ib.size - shift] if shift else ib
        else:
            shifted[:shift] = ib[-shift:]
        denom = shifted.sum()
        if denom <= 0.0:
            continue
        best = max(best, float(np.sum(np.sqrt(ia * shifted / denom))))
    return best
