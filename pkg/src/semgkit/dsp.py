"""IIR filter design and signal conditioning for multichannel sEMG.

Filters are designed as cascades of biquad sections (analog Butterworth
prototype mapped through the bilinear transform with frequency pre-warping,
plus single-biquad notches) and applied causally by default; a zero-phase
mode runs the cascade forward and then time-reversed.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import signal as _sig


class DegenerateChannelError(ValueError):
    """A channel has zero variance and cannot be standardized."""


@dataclass(frozen=True)
class SecondOrderSections:
    """Cascade of biquad sections.

    Parameters
    ----------
    sections : ndarray, shape (n_sections, 5)
        Rows of (b0, b1, b2, a1, a2) with a0 normalized to 1.
    overall_gain : float
        Scalar gain applied once per filtering pass.
    """

    sections: np.ndarray
    overall_gain: float = 1.0

    def __post_init__(self) -> None:
        arr = np.atleast_2d(np.asarray(self.sections, dtype=np.float64))
        if arr.size == 0 or arr.shape[1] != 5:
            raise ValueError("sections must be a non-empty (n, 5) array")
        object.__setattr__(self, "sections", arr)
        object.__setattr__(self, "overall_gain", float(self.overall_gain))

    @property
    def n_sections(self) -> int:
        return self.sections.shape[0]

    def poles(self) -> np.ndarray:
        """Roots of every section denominator, concatenated."""
        out = []
        for _, _, _, a1, a2 in self.sections:
            out.extend(np.roots([1.0, a1, a2]))
        return np.asarray(out, dtype=np.complex128)

    def is_stable(self) -> bool:
        return bool(np.all(np.abs(self.poles()) < 1.0))

    def _scipy_sos(self) -> np.ndarray:
        b = self.sections[:, :3].copy()
        a = self.sections[:, 3:]
        return np.hstack([b, np.ones((self.n_sections, 1)), a])


def cascade(*filters: SecondOrderSections) -> SecondOrderSections:
    """Concatenate several section cascades into one filter."""
    if not filters:
        raise ValueError("cascade requires at least one filter")
    sections = np.vstack([f.sections for f in filters])
    gain = float(np.prod([f.overall_gain for f in filters]))
    return SecondOrderSections(sections, gain)


def design_bandpass(
    low_hz: float,
    high_hz: float,
    order: int = 5,
    sample_rate: float = 2000.0,
) -> SecondOrderSections:
    """Butterworth bandpass as second-order sections.

    An analog prototype of the given order is band-transformed and
    discretized via the bilinear transform with frequency pre-warping,
    giving ``order`` biquad sections (discrete order 2*order).

    Parameters
    ----------
    low_hz, high_hz : float
        -3 dB band edges, 0 < low_hz < high_hz < sample_rate / 2.
    order : int
        Analog prototype order (>= 1).
    sample_rate : float
        Sampling frequency in Hz.
    """
    nyq = sample_rate / 2.0
    if not 0.0 < low_hz < high_hz < nyq:
        raise ValueError(
            f"band edges must satisfy 0 < low < high < {nyq}; "
            f"got ({low_hz}, {high_hz})"
        )
    if order < 1:
        raise ValueError("order must be >= 1")
    sos = _sig.butter(order, [low_hz, high_hz], btype="bandpass",
                      fs=sample_rate, output="sos")
    out = SecondOrderSections(np.hstack([sos[:, :3], sos[:, 4:]]))
    if not out.is_stable():
        raise ValueError("designed bandpass is unstable")
    return out


def design_notch(
    f0_hz: float,
    quality: float = 30.0,
    sample_rate: float = 2000.0,
) -> SecondOrderSections:
    """Single-biquad notch with unit gain at DC and Nyquist.

    Parameters
    ----------
    f0_hz : float
        Center frequency to reject, 0 < f0_hz < sample_rate / 2.
    quality : float
        Q factor; bandwidth is f0_hz / quality.
    """
    nyq = sample_rate / 2.0
    if not 0.0 < f0_hz < nyq:
        raise ValueError(f"notch frequency must be in (0, {nyq}); got {f0_hz}")
    if quality <= 0.0:
        raise ValueError("quality must be > 0")
    b, a = _sig.iirnotch(f0_hz, quality, fs=sample_rate)
    b = b / a[0]
    a = a / a[0]
    out = SecondOrderSections(np.array([[b[0], b[1], b[2], a[1], a[2]]]))
    if not out.is_stable():
        raise ValueError("designed notch is unstable")
    return out


def filter_signal(
    sos: SecondOrderSections,
    signal: Sequence[float],
    zero_phase: bool = False,
) -> np.ndarray:
    """Run a 1-D signal through the cascade.

    Causal mode evaluates each section in direct-form II transposed with
    zero initial state. Zero-phase mode filters forward, then filters the
    time-reversed output and reverses again, removing phase distortion and
    doubling the attenuation in dB.
    """
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("signal must be 1-D")
    if x.size == 0:
        raise ValueError("signal must be non-empty")
    y = _sig.sosfilt(sos._scipy_sos(), x) * sos.overall_gain
    if zero_phase:
        y = _sig.sosfilt(sos._scipy_sos(), y[::-1]) * sos.overall_gain
        y = y[::-1]
    return y


def filter_channels(
    sos: SecondOrderSections,
    channels: np.ndarray,
    zero_phase: bool = False,
) -> np.ndarray:
    """Filter each row of a (n_channels, n_samples) array."""
    x = np.asarray(channels, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] == 0:
        raise ValueError("channels must be a non-empty 2-D array")
    y = _sig.sosfilt(sos._scipy_sos(), x, axis=1) * sos.overall_gain
    if zero_phase:
        y = _sig.sosfilt(sos._scipy_sos(), y[:, ::-1], axis=1) * sos.overall_gain
        y = y[:, ::-1]
    return y


def frequency_response(
    sos: SecondOrderSections,
    freqs_hz: Sequence[float],
    sample_rate: float,
) -> np.ndarray:
    """|H(e^{jw})| at the given frequencies.

    The response is the product of the section responses times the
    overall gain, evaluated at z = exp(j*2*pi*f/sample_rate).
    """
    f = np.asarray(freqs_hz, dtype=np.float64)
    nyq = sample_rate / 2.0
    if f.size and (f.min() < 0.0 or f.max() > nyq):
        raise ValueError(f"frequencies must lie in [0, {nyq}]")
    z1 = np.exp(-1j * 2.0 * np.pi * f / sample_rate)
    z2 = z1 * z1
    h = np.full(f.shape, sos.overall_gain, dtype=np.complex128)
    for b0, b1, b2, a1, a2 in sos.sections:
        h = h * (b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2)
    return np.abs(h)


@dataclass(frozen=True)
class ChannelStats:
    """Per-channel mean and standard deviation, computed from training data."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.mean, dtype=np.float64)
        s = np.asarray(self.std, dtype=np.float64)
        if m.shape != s.shape or m.ndim != 1:
            raise ValueError("mean and std must be 1-D arrays of equal length")
        object.__setattr__(self, "mean", m)
        object.__setattr__(self, "std", s)
        bad = np.flatnonzero(s <= 0.0)
        if bad.size:
            names = ", ".join(f"ch{i + 1}" for i in bad)
            raise DegenerateChannelError(
                f"zero-variance channel(s): {names}"
            )


def _window_data(window) -> np.ndarray:
    data = getattr(window, "data", window)
    return np.asarray(data, dtype=np.float64)


def compute_stats(train_windows: Iterable) -> ChannelStats:
    """Pooled per-channel mean and standard deviation over training windows.

    Accepts a sequence of Window objects or of (n_channels, n_samples)
    arrays. Statistics must come from training data only; the split is the
    caller's responsibility.
    """
    total = None
    total_sq = None
    count = 0
    for w in train_windows:
        data = _window_data(w)
        if total is None:
            total = data.sum(axis=1)
            total_sq = (data * data).sum(axis=1)
        else:
            total += data.sum(axis=1)
            total_sq += (data * data).sum(axis=1)
        count += data.shape[1]
    if total is None or count == 0:
        raise ValueError("at least one training window is required")
    mean = total / count
    var = total_sq / count - mean * mean
    std = np.sqrt(np.maximum(var, 0.0))
    return ChannelStats(mean, std)


def standardize(stats: ChannelStats, window):
    """Map each channel c to (x - mean_c) / std_c.

    Returns the same kind of value it was given: a Window comes back as a
    Window with transformed data, a bare array as an array.
    """
    data = _window_data(window)
    scaled = (data - stats.mean[:, None]) / stats.std[:, None]
    if dataclasses.is_dataclass(window) and hasattr(window, "data"):
        return dataclasses.replace(window, data=scaled)
    return scaled
