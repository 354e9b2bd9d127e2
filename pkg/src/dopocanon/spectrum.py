"""Squeezing spectrum of the orthogonal-LO homodyne signal and its estimation.

Spectra are normalized to shot noise: V = 1 for white (coherent) noise and
V = 0 for a perfectly squeezed quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal

MIN_SEGMENTS = 8


@dataclass(frozen=True)
class SpectrumParams:
    psi_L: float
    gamma_s: float = 1.0
    omega: float = 0.0

    def __post_init__(self):
        if not self.gamma_s > 0:
            raise ValueError("gamma_s must be positive")


def squeezing_spectrum(psi_L, gamma_s, omega):
    """V(omega) = 1 - sin^2(psi_L) / (1 + (omega / 2 gamma_s)^2)."""
    if np.any(np.asarray(gamma_s) <= 0):
        raise ValueError("gamma_s must be positive")
    x = np.asarray(omega, dtype=float) / (2.0 * np.asarray(gamma_s, dtype=float))
    return 1.0 - np.sin(psi_L) ** 2 / (1.0 + x * x)


def spectrum_at(p: SpectrumParams) -> float:
    return float(squeezing_spectrum(p.psi_L, p.gamma_s, p.omega))


@dataclass(frozen=True)
class TimeSeries:
    dt: float
    samples: np.ndarray
    seed: int
    target: SpectrumParams

    def __len__(self) -> int:
        return self.samples.shape[0]


def _is_pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def synthesize_photocurrent(p: SpectrumParams, n: int, dt: float, seed: int) -> TimeSeries:
    """Stationary Gaussian record whose normalized spectrum is V(omega).

    Independent complex Gaussian amplitudes with variance n V(omega_k) are
    placed on the one-sided FFT grid (real at DC and Nyquist) and inverse
    transformed, so a target V = 1 gives unit-variance white noise.
    """
    if not _is_pow2(n):
        raise ValueError(f"record length {n} is not a power of two")
    if not dt > 0:
        raise ValueError("dt must be positive")
    nyquist = np.pi / dt
    if nyquist < 10 * p.gamma_s:
        raise ValueError(
            f"Nyquist frequency {nyquist:g} rad/s is below 10 gamma_s = {10 * p.gamma_s:g}"
        )
    rng = np.random.default_rng(seed)
    k = np.arange(n // 2 + 1)
    omega = 2 * np.pi * k / (n * dt)
    v = squeezing_spectrum(p.psi_L, p.gamma_s, omega)
    amp = np.sqrt(v * n / 2) * (rng.standard_normal(k.size) + 1j * rng.standard_normal(k.size))
    amp[0] = np.sqrt(v[0] * n) * rng.standard_normal()
    amp[-1] = np.sqrt(v[-1] * n) * rng.standard_normal()
    x = np.fft.irfft(amp, n)
    return TimeSeries(dt, x, seed, p)


@dataclass(frozen=True)
class SpectrumEstimate:
    frequencies: np.ndarray  # rad/s
    values: np.ndarray
    stderr: np.ndarray
    segments: int


def _effective_segments(window: np.ndarray, step: int, segments: int) -> float:
    # Welch: variance of the average grows with the overlap correlation of
    # the window, rho(k) = (sum w[i] w[i + k step])^2 / (sum w^2)^2
    total = np.sum(window**2) ** 2
    corr = 0.0
    for lag in range(1, segments):
        shift = lag * step
        if shift >= window.size:
            break
        r = np.sum(window[:-shift] * window[shift:]) ** 2 / total
        corr += 2 * (1 - lag / segments) * r
    return segments / (1 + corr)


def estimate_spectrum(
    ts: TimeSeries,
    segment_length: int = 4096,
    overlap: float = 0.5,
    window: str = "hann",
) -> SpectrumEstimate:
    """Welch estimate normalized so unit-variance white noise gives 1."""
    n = len(ts)
    if segment_length > n:
        raise ValueError("segment longer than the record")
    if not 0 <= overlap < 1:
        raise ValueError("overlap must be in [0, 1)")
    win = {"hann": "hann", "rectangular": "boxcar", "boxcar": "boxcar"}.get(window)
    if win is None:
        raise ValueError(f"unsupported window {window!r}")
    noverlap = int(round(overlap * segment_length))
    step = segment_length - noverlap
    segments = (n - noverlap) // step
    if segments < MIN_SEGMENTS:
        raise ValueError(f"only {segments} segments; need at least {MIN_SEGMENTS}")
    f, pxx = signal.welch(
        ts.samples,
        fs=1.0,
        window=win,
        nperseg=segment_length,
        noverlap=noverlap,
        detrend=False,
        return_onesided=True,
        scaling="density",
    )
    # one-sided density doubles the interior bins; undo to get the normalized spectrum
    values = pxx.copy()
    values[1:-1] /= 2.0
    w = signal.get_window(win, segment_length)
    k_eff = _effective_segments(w, step, segments)
    rel = np.full(values.shape, 1.0 / np.sqrt(k_eff))
    # DC and Nyquist bins are real: chi-square with one degree of freedom
    rel[0] *= np.sqrt(2)
    rel[-1] *= np.sqrt(2)
    return SpectrumEstimate(2 * np.pi * f / ts.dt, values, values * rel, segments)
