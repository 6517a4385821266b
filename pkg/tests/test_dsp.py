"""Filter design, application, and channel standardization."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import signal as sp_signal

from semgkit.dsp import (
    ChannelStats,
    DegenerateChannelError,
    SecondOrderSections,
    cascade,
    compute_stats,
    design_bandpass,
    design_notch,
    filter_channels,
    filter_signal,
    frequency_response,
    standardize,
)
from semgkit.dataset import Window

FS = 2000.0


def naive_sosfilt(sections: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Direct-form II transposed biquad cascade, one sample at a time."""
    y = x.astype(np.float64).copy()
    for b0, b1, b2, a1, a2 in sections:
        out = np.empty_like(y)
        z1 = 0.0
        z2 = 0.0
        for n in range(y.size):
            out[n] = b0 * y[n] + z1
            z1 = b1 * y[n] - a1 * out[n] + z2
            z2 = b2 * y[n] - a2 * out[n]
        y = out
    return y


class TestDesign:
    def test_bandpass_edges_at_half_power(self):
        sos = design_bandpass(20.0, 200.0, order=5, sample_rate=FS)
        response = frequency_response(sos, [20.0, 200.0], FS)
        target = 1.0 / np.sqrt(2.0)
        assert np.all(np.abs(response - target) <= 0.05 * target)

    def test_bandpass_passband_and_stopband(self):
        sos = design_bandpass(20.0, 200.0, order=5, sample_rate=FS)
        mid = frequency_response(sos, [60.0, 100.0, 150.0], FS)
        assert np.all(mid > 0.95)
        outside = frequency_response(sos, [2.0, 600.0], FS)
        assert np.all(outside < 0.05)

    def test_bandpass_section_count(self):
        sos = design_bandpass(20.0, 200.0, order=5, sample_rate=FS)
        assert sos.n_sections == 5

    @pytest.mark.parametrize("f0", [74.0, 148.0])
    def test_notch_depth(self, f0):
        sos = design_notch(f0, quality=30.0, sample_rate=FS)
        gain = frequency_response(sos, [f0], FS)[0]
        assert -20.0 * np.log10(gain) >= 26.0

    def test_notch_spares_neighbours(self):
        sos = design_notch(74.0, quality=30.0, sample_rate=FS)
        neighbours = frequency_response(sos, [60.0, 90.0], FS)
        assert np.all(neighbours > 0.9)

    def test_designed_filters_stable(self):
        assert design_bandpass(20.0, 200.0, 5, FS).is_stable()
        assert design_notch(74.0, 30.0, FS).is_stable()
        assert design_notch(148.0, 30.0, FS).is_stable()

    @settings(max_examples=50, deadline=None)
    @given(
        low=st.floats(min_value=1.0, max_value=300.0),
        width=st.floats(min_value=5.0, max_value=500.0),
        order=st.integers(min_value=1, max_value=8),
    )
    def test_bandpass_always_stable(self, low, width, order):
        high = min(low + width, FS / 2 - 1.0)
        sos = design_bandpass(low, high, order=order, sample_rate=FS)
        assert np.all(np.abs(sos.poles()) < 1.0)

    @settings(max_examples=50, deadline=None)
    @given(
        f0=st.floats(min_value=1.0, max_value=990.0),
        quality=st.floats(min_value=2.0, max_value=100.0),
    )
    def test_notch_always_stable(self, f0, quality):
        sos = design_notch(f0, quality=quality, sample_rate=FS)
        assert np.all(np.abs(sos.poles()) < 1.0)

    def test_degenerate_notch_rejected(self):
        # bandwidth f0/Q beyond the spectrum has no stable realization
        with pytest.raises(ValueError, match="unstable"):
            design_notch(900.0, quality=0.6, sample_rate=FS)

    def test_bad_edges_rejected(self):
        with pytest.raises(ValueError):
            design_bandpass(200.0, 20.0, 5, FS)
        with pytest.raises(ValueError):
            design_bandpass(20.0, 1100.0, 5, FS)
        with pytest.raises(ValueError):
            design_notch(0.0, 30.0, FS)
        with pytest.raises(ValueError):
            design_notch(74.0, -1.0, FS)

    def test_cascade_response_is_product(self):
        bp = design_bandpass(20.0, 200.0, 5, FS)
        nt = design_notch(74.0, 30.0, FS)
        both = cascade(bp, nt)
        freqs = np.linspace(5.0, 900.0, 40)
        combined = frequency_response(both, freqs, FS)
        product = frequency_response(bp, freqs, FS) * frequency_response(nt, freqs, FS)
        np.testing.assert_allclose(combined, product, rtol=1e-12)


class TestApply:
    def test_matches_naive_biquad_loop(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal(400)
        sos = design_bandpass(20.0, 200.0, order=3, sample_rate=FS)
        got = filter_signal(sos, x)
        want = naive_sosfilt(sos.sections, x)
        np.testing.assert_allclose(got, want, rtol=1e-10, atol=1e-12)

    def test_notch_matches_naive_loop(self):
        rng = np.random.default_rng(4)
        x = rng.standard_normal(300)
        sos = design_notch(74.0, 30.0, FS)
        got = filter_signal(sos, x)
        want = naive_sosfilt(sos.sections, x)
        np.testing.assert_allclose(got, want, rtol=1e-10, atol=1e-12)

    def test_zero_phase_matches_forward_backward_reference(self):
        # forward pass, then a forward pass over the reversal, both from
        # zero state (no edge-matched initial conditions)
        rng = np.random.default_rng(5)
        x = rng.standard_normal(512)
        sos = design_bandpass(20.0, 200.0, order=4, sample_rate=FS)
        got = filter_signal(sos, x, zero_phase=True)
        fwd = sp_signal.sosfilt(sos._scipy_sos(), x) * sos.overall_gain
        want = (sp_signal.sosfilt(sos._scipy_sos(), fwd[::-1]) * sos.overall_gain)[::-1]
        np.testing.assert_allclose(got, want, rtol=1e-10, atol=1e-12)

    def test_zero_phase_removes_delay(self):
        # a passband tone should come back aligned with itself
        t = np.arange(4096) / FS
        x = np.sin(2.0 * np.pi * 80.0 * t)
        sos = design_bandpass(20.0, 200.0, 5, FS)
        y = filter_signal(sos, x, zero_phase=True)
        core = slice(1024, 3072)  # ignore edge transients
        lags = [np.dot(y[core], np.roll(x, k)[core]) for k in (-2, -1, 0, 1, 2)]
        assert int(np.argmax(lags)) == 2

    def test_notch_suppresses_tone(self):
        t = np.arange(8000) / FS
        tone = np.sin(2.0 * np.pi * 74.0 * t)
        sos = design_notch(74.0, 30.0, FS)
        y = filter_signal(sos, tone)
        steady = y[4000:]
        assert np.sqrt(np.mean(steady**2)) < 0.05 * np.sqrt(np.mean(tone**2))

    def test_filter_channels_rowwise(self):
        rng = np.random.default_rng(6)
        x = rng.standard_normal((4, 256))
        sos = design_bandpass(20.0, 200.0, 3, FS)
        got = filter_channels(sos, x)
        for i in range(4):
            np.testing.assert_array_equal(got[i], filter_signal(sos, x[i]))
        got_zp = filter_channels(sos, x, zero_phase=True)
        for i in range(4):
            np.testing.assert_array_equal(
                got_zp[i], filter_signal(sos, x[i], zero_phase=True)
            )

    def test_input_validation(self):
        sos = design_notch(74.0, 30.0, FS)
        with pytest.raises(ValueError):
            filter_signal(sos, np.zeros((2, 2)))
        with pytest.raises(ValueError):
            filter_signal(sos, np.zeros(0))
        with pytest.raises(ValueError):
            filter_channels(sos, np.zeros(5))

    def test_overall_gain_applied(self):
        base = design_notch(74.0, 30.0, FS)
        scaled = SecondOrderSections(base.sections, overall_gain=2.0)
        x = np.random.default_rng(7).standard_normal(64)
        np.testing.assert_allclose(
            filter_signal(scaled, x), 2.0 * filter_signal(base, x), rtol=1e-12
        )


class TestStandardize:
    def test_stats_match_concatenated_population_moments(self):
        rng = np.random.default_rng(8)
        windows = [rng.standard_normal((3, 50)) + 2.0 for _ in range(4)]
        stats = compute_stats(windows)
        pooled = np.concatenate(windows, axis=1)
        np.testing.assert_allclose(stats.mean, pooled.mean(axis=1), rtol=1e-12)
        np.testing.assert_allclose(stats.std, pooled.std(axis=1), rtol=1e-9)

    def test_standardize_normalizes_training_pool(self):
        rng = np.random.default_rng(9)
        windows = [5.0 + 3.0 * rng.standard_normal((2, 80)) for _ in range(5)]
        stats = compute_stats(windows)
        pooled = np.concatenate([standardize(stats, w) for w in windows], axis=1)
        np.testing.assert_allclose(pooled.mean(axis=1), 0.0, atol=1e-12)
        np.testing.assert_allclose(pooled.std(axis=1), 1.0, rtol=1e-12)

    def test_standardize_keeps_window_kind(self):
        rng = np.random.default_rng(10)
        w = Window(data=rng.standard_normal((2, 40)), label=1, repetition=1, subject_id=0)
        stats = compute_stats([w])
        out = standardize(stats, w)
        assert isinstance(out, Window)
        assert out.label == 1 and out.repetition == 1
        arr = standardize(stats, w.data)
        assert isinstance(arr, np.ndarray)
        np.testing.assert_array_equal(out.data, arr)

    def test_zero_variance_channel_is_named(self):
        windows = [np.vstack([np.ones(30), np.random.default_rng(0).standard_normal(30)])]
        with pytest.raises(DegenerateChannelError, match="ch1"):
            compute_stats(windows)

    def test_stats_require_data(self):
        with pytest.raises(ValueError):
            compute_stats([])

    def test_channel_stats_shape_checks(self):
        with pytest.raises(ValueError):
            ChannelStats(np.zeros(3), np.ones(2))
        with pytest.raises(DegenerateChannelError, match="ch2"):
            ChannelStats(np.zeros(3), np.array([1.0, 0.0, 1.0]))
