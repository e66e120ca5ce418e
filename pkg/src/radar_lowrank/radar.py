"""Pulsed Doppler radar signal model.

Point-scatterer and weather slow-time IQ series for a single range gate,
Doppler periodograms, pulse-pair moment estimation and reflectivity in dBZ.

Sign convention: positive radial velocity means the target approaches the
radar and produces a positive Doppler shift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import speed_of_light

from .errors import (
    NonPositiveRange,
    TooFewSamples,
    UnreliableEstimate,
    ValidationError,
    ZeroWidth,
)

C = speed_of_light
MIN_MOMENT_SAMPLES = 16
# spectral images summed on each side when folding the weather PSD into the Nyquist interval
_ALIASES = 3


@dataclass(frozen=True)
class RadarParams:
    """Radar constants.  Defaults describe an X-band system at PRF 2 kHz."""

    wavelength: float = 0.032
    prf: float = 2000.0
    pulse_width: float = 1e-6
    max_range: float = 30e3
    radar_constant: float = 70.0

    def __post_init__(self):
        for name in ("wavelength", "prf", "pulse_width", "max_range"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be positive")
        if self.prf * 2.0 * self.max_range / C > 1.0:
            raise ValidationError(
                f"max_range {self.max_range:g} m exceeds the unambiguous range "
                f"{C / (2 * self.prf):g} m at PRF {self.prf:g} Hz"
            )

    @property
    def nyquist_velocity(self):
        return self.wavelength * self.prf / 4.0


@dataclass(frozen=True, eq=False)
class ScattererScene:
    """Discrete point scatterers: ranges (m), complex amplitudes, radial velocities (m/s)."""

    ranges: np.ndarray
    amplitudes: np.ndarray
    velocities: np.ndarray

    def __post_init__(self):
        r = np.atleast_1d(np.asarray(self.ranges, dtype=np.float64))
        a = np.atleast_1d(np.asarray(self.amplitudes, dtype=np.complex128))
        v = np.atleast_1d(np.asarray(self.velocities, dtype=np.float64))
        if not (r.size == a.size == v.size):
            raise ValidationError("ranges, amplitudes and velocities must have equal length")
        if np.any(r <= 0):
            raise ValidationError("scatterer ranges must be positive")
        object.__setattr__(self, "ranges", r)
        object.__setattr__(self, "amplitudes", a)
        object.__setattr__(self, "velocities", v)

    @property
    def count(self):
        return int(self.ranges.size)


@dataclass(frozen=True, eq=False)
class IqSeries:
    samples: np.ndarray
    prf: float

    def __post_init__(self):
        s = np.atleast_1d(np.asarray(self.samples, dtype=np.complex128))
        if s.size < 1:
            raise ValidationError("IQ series must contain at least one sample")
        if not np.all(np.isfinite(s)):
            raise ValidationError("IQ samples must be finite")
        if not self.prf > 0:
            raise ValidationError("prf must be positive")
        object.__setattr__(self, "samples", s)

    def __len__(self):
        return int(self.samples.size)


@dataclass(frozen=True)
class SpectrumMoments:
    power_dbm: float
    mean_velocity: float
    spectrum_width: float

    def __post_init__(self):
        if self.spectrum_width < 0:
            raise ValidationError("spectrum_width must be >= 0")


def dbm_to_mw(p_dbm):
    return 10.0 ** (np.asarray(p_dbm, dtype=np.float64) / 10.0)


def mw_to_dbm(p_mw):
    return 10.0 * np.log10(p_mw)


def range_bin_length(params):
    """Range resolution ``c tau0 / 2`` in meters."""
    return C * params.pulse_width / 2.0


def num_range_bins(params):
    return int(math.floor(params.max_range / range_bin_length(params)))


def doppler_frequency(v, params):
    """Doppler shift ``2 v / lambda`` in Hz."""
    fd = 2.0 * np.asarray(v, dtype=np.float64) / params.wavelength
    return float(fd) if fd.ndim == 0 else fd


def synthesize_point_target_iq(scene, params, n_pulses):
    """Slow-time series of one gate holding the scatterers in ``scene``."""
    if scene.count < 1:
        raise ValidationError("scene needs at least one scatterer")
    if n_pulses < 2:
        raise ValidationError("n_pulses must be >= 2")
    if np.any(scene.ranges > params.max_range):
        raise ValidationError("scatterer beyond max_range")
    p = np.arange(n_pulses)
    fd = 2.0 * scene.velocities / params.wavelength
    phase = 2.0 * np.pi * np.outer(p, fd) / params.prf
    return IqSeries(np.exp(1j * phase) @ scene.amplitudes, params.prf)


def gaussian_psd(v_grid, moments):
    """Gaussian weather spectrum in mW per (m/s), integrating to the mean power."""
    if moments.spectrum_width <= 0:
        raise ZeroWidth("spectrum width must be positive")
    v = np.asarray(v_grid, dtype=np.float64)
    sw = moments.spectrum_width
    peak = dbm_to_mw(moments.power_dbm) / (sw * math.sqrt(2.0 * math.pi))
    return peak * np.exp(-((v - moments.mean_velocity) ** 2) / (2.0 * sw * sw))


def doppler_velocities(n_pulses, params):
    """Velocity of each FFT bin in ascending order (fftshifted)."""
    f = np.fft.fftshift(np.fft.fftfreq(n_pulses, d=1.0 / params.prf))
    return f * params.wavelength / 2.0


def periodogram(iq, params):
    """Windowless periodogram ``|FFT|^2 / N^2`` (mW per bin) on the velocity axis.

    Returns ``(velocities, power)``, both fftshifted; the powers sum to the
    mean sample power.
    """
    n = len(iq)
    power = np.abs(np.fft.fft(iq.samples)) ** 2 / float(n * n)
    return doppler_velocities(n, params), np.fft.fftshift(power)


def expected_weather_spectrum(moments, params, n_pulses, noise_power_dbm=None):
    """Expected per-bin power (fftshifted) of :func:`synthesize_weather_iq` output."""
    v = doppler_velocities(n_pulses, params)
    dv = params.wavelength * params.prf / (2.0 * n_pulses)
    span = 2.0 * params.nyquist_velocity
    folded = sum(gaussian_psd(v + k * span, moments) for k in range(-_ALIASES, _ALIASES + 1))
    bins = folded * dv
    if noise_power_dbm is not None and np.isfinite(noise_power_dbm):
        bins = bins + dbm_to_mw(noise_power_dbm) / n_pulses
    return v, bins


def synthesize_weather_iq(moments, params, n_pulses, noise_power_dbm=None, seed=0):
    """Weather echo by frequency-domain spectral synthesis.

    Each Doppler bin gets an independent circular complex Gaussian amplitude
    whose variance is the folded Gaussian PSD times the bin width, plus a flat
    noise floor; the inverse FFT gives the IQ series.  ``noise_power_dbm``
    of ``None`` or ``-inf`` means noise-free.
    """
    if n_pulses < MIN_MOMENT_SAMPLES:
        raise ValidationError(f"n_pulses must be >= {MIN_MOMENT_SAMPLES}")
    if moments.spectrum_width <= 0:
        raise ZeroWidth("spectrum width must be positive")
    _, bins = expected_weather_spectrum(moments, params, n_pulses, noise_power_dbm)
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal(n_pulses) + 1j * rng.standard_normal(n_pulses)) / math.sqrt(2.0)
    spectrum = np.sqrt(np.fft.ifftshift(bins)) * z
    return IqSeries(n_pulses * np.fft.ifft(spectrum), params.prf)


def estimate_moments(iq, params):
    """Pulse-pair estimates of power, mean velocity and spectrum width.

    Raises
    ------
    TooFewSamples
        With fewer than 16 pulses.
    UnreliableEstimate
        When the lag-1 correlation coefficient falls below ``3 / sqrt(N)``,
        the level reached by white noise alone.  The exception carries the
        moments with the width set to zero.
    """
    x = iq.samples
    n = x.size
    if n < MIN_MOMENT_SAMPLES:
        raise TooFewSamples(f"need at least {MIN_MOMENT_SAMPLES} samples, got {n}")
    r0 = float(np.mean(np.abs(x) ** 2))
    r1 = complex(np.mean(np.conj(x[:-1]) * x[1:]))
    if r0 == 0.0:
        raise UnreliableEstimate("zero received power", None)
    va = params.wavelength * params.prf
    mean_v = va / (4.0 * math.pi) * math.atan2(r1.imag, r1.real)
    rho = abs(r1) / r0
    if rho < 3.0 / math.sqrt(n):
        partial = SpectrumMoments(float(mw_to_dbm(r0)), mean_v, 0.0)
        raise UnreliableEstimate(
            f"lag-1 correlation {rho:.3f} below the noise floor {3.0 / math.sqrt(n):.3f}",
            partial,
        )
    width = va / (2.0 * math.pi * math.sqrt(2.0)) * math.sqrt(max(0.0, math.log(1.0 / rho)))
    return SpectrumMoments(float(mw_to_dbm(r0)), mean_v, width)


def reflectivity_dbz(p_dbm, r, params):
    """Reflectivity ``P + C + 20 log10(r_km)``; ``r`` is given in meters."""
    r = np.asarray(r, dtype=np.float64)
    if np.any(r <= 0):
        raise NonPositiveRange("range must be positive")
    z = np.asarray(p_dbm, dtype=np.float64) + params.radar_constant + 20.0 * np.log10(r / 1000.0)
    return float(z) if z.ndim == 0 else z
