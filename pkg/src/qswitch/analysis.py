"""Extraction of oscillation frequencies and decay rates from sampled series.

These are the post-processing steps behind sweep summaries: given a sampled
population trace, estimate how fast two modes exchange excitations and how
fast the envelope decays. Both work on uniformly sampled real series and
raise ValueError when the series cannot support the estimate, so callers
can record a missing value instead of crashing a batch.
"""

from __future__ import annotations

import numpy as np

_PAD_FACTOR = 8


def _uniform_grid(times, values):
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.ndim != 1 or y.shape != t.shape:
        raise ValueError("times and values must be 1-d arrays of equal length")
    if t.size < 4:
        raise ValueError("need at least four samples")
    if np.any(~np.isfinite(y)):
        raise ValueError("series contains non-finite samples")
    steps = np.diff(t)
    if np.any(steps <= 0.0):
        raise ValueError("times must be strictly increasing")
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
        raise ValueError("times must be uniformly spaced")
    return t, y, float(steps[0])


def dominant_frequency(times, values):
    """Frequency of the strongest spectral component, in cycles per time unit.

    The series is first-differenced (which flattens slow exponential
    envelopes that would otherwise bury a low-frequency peak under the DC
    lobe), Hann-windowed, and zero-padded; the peak bin is refined by
    parabolic interpolation on its two neighbours. Good to a fraction of a
    bin for a sinusoid sampled over a few periods.
    """
    t, y, dt = _uniform_grid(times, values)
    if t.size < 8:
        raise ValueError("need at least eight samples for a frequency estimate")
    y = np.diff(y)
    y = y - y.mean()
    if not np.any(y):
        raise ValueError("series is constant; no oscillation to extract")
    padded = _PAD_FACTOR * y.size
    spectrum = np.abs(np.fft.rfft(y * np.hanning(y.size), n=padded))
    freqs = np.fft.rfftfreq(padded, d=dt)
    peak = int(np.argmax(spectrum[1:])) + 1
    shift = 0.0
    if peak < spectrum.size - 1:
        left, mid, right = spectrum[peak - 1 : peak + 2]
        denom = left - 2.0 * mid + right
        if denom != 0.0:
            # the parabolic refinement is only valid within half a bin
            shift = float(np.clip(0.5 * (left - right) / denom, -0.5, 0.5))
    return float(freqs[peak] + shift * (freqs[1] - freqs[0]))


def swap_rate(times, populations):
    """Exchange strength g, in cycles per time unit, from a population trace.

    Two modes trading one excitation through 2*pi*g (a b^dag + h.c.) have
    populations cos^2(2*pi*g*t), oscillating at frequency 2g; the dominant
    spectral peak is therefore halved.
    """
    return 0.5 * dominant_frequency(times, populations)


def decay_rate(times, values):
    """Rate r of an exponential envelope values ~ v0 * exp(-r * t).

    Least-squares on the log of the samples, keeping only points safely
    above zero. An oscillating input yields an order-of-magnitude envelope
    estimate; a clean exponential is recovered accurately.
    """
    t, y, _ = _uniform_grid(times, values)
    top = float(np.max(y))
    if top <= 0.0:
        raise ValueError("series has no positive samples")
    mask = y > top * 1e-9
    if int(np.count_nonzero(mask)) < 2:
        raise ValueError("too few positive samples for a decay fit")
    slope = np.polyfit(t[mask], np.log(y[mask]), 1)[0]
    return float(-slope)
