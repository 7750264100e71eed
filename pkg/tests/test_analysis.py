"""Spectral and exponential-fit extraction from sampled time series."""

import numpy as np
import pytest

from qswitch.analysis import decay_rate, dominant_frequency, swap_rate


def grid(t_final=400.0, n=2001):
    return np.linspace(0.0, t_final, n)


def test_clean_tone_recovered():
    t = grid()
    f = 0.031
    y = np.cos(2.0 * np.pi * f * t + 0.3)
    assert dominant_frequency(t, y) == pytest.approx(f, rel=1e-3)


def test_decaying_tone_recovered():
    t = grid()
    f = 0.025
    y = np.exp(-0.004 * t) * np.cos(2.0 * np.pi * f * t)
    assert dominant_frequency(t, y) == pytest.approx(f, rel=1e-2)


def test_offset_does_not_bias_the_peak():
    t = grid()
    f = 0.018
    y = 5.0 + np.exp(-0.003 * t) * np.cos(2.0 * np.pi * f * t)
    assert dominant_frequency(t, y) == pytest.approx(f, rel=1e-2)


def test_swap_rate_is_half_the_population_tone():
    # a full swap cycle returns the photon after 1/(2g), so <n> oscillates
    # at twice the exchange rate
    t = grid(2000.0)
    g = 0.0019
    y = np.cos(2.0 * np.pi * g * t) ** 2
    assert swap_rate(t, y) == pytest.approx(g, rel=1e-2)


def test_decay_rate_fit_is_exact_on_pure_exponential():
    t = grid(200.0, 401)
    y = 3.0 * np.exp(-0.04 * t)
    assert decay_rate(t, y) == pytest.approx(0.04, rel=1e-12)


def test_decay_rate_ignores_underflowed_tail():
    t = grid(4000.0, 801)
    y = np.exp(-0.05 * t)
    y[y < 1e-300] = 0.0
    assert decay_rate(t, y) == pytest.approx(0.05, rel=1e-6)


@pytest.mark.parametrize(
    "times,values,message",
    [
        (np.linspace(0, 10, 6), np.ones(6), "samples"),
        (np.linspace(0, 10, 64), np.ones(64), "constant"),
        (np.array([0.0, 1.0, 2.5, 3.0] + list(range(4, 12))), np.ones(12), "uniform"),
        (np.linspace(0, 10, 12), np.full(12, np.nan), "finite"),
    ],
)
def test_dominant_frequency_input_guards(times, values, message):
    with pytest.raises(ValueError, match=message):
        dominant_frequency(times, values)


def test_decay_rate_rejects_nonpositive_series():
    t = np.linspace(0, 10, 16)
    with pytest.raises(ValueError):
        decay_rate(t, np.zeros(16))
    with pytest.raises(ValueError):
        decay_rate(t, -np.exp(-0.1 * t))


def test_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        dominant_frequency(np.linspace(0, 10, 12), np.ones(11))
