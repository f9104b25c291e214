"""Reference stereo spatializer driven by a bounding-box track.

A mono source is panned with the constant-power law along the horizontal
box-center trajectory, optionally attenuated by per-frame depth. This is
the ground-truth oracle used to validate the spatial alignment metric: the
pan law encodes direction purely in channel level, which is exactly what
the level-difference estimator reads back out.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio_io import StereoBuffer
from .track_io import BBoxTrack, bbox_center_x_normalized

DEFAULT_SMOOTHING = 0.02  # seconds; avoids zipper artifacts on moving boxes


@dataclass(frozen=True)
class RenderConfig:
    depth_exponent: float = 0.0  # gain = (depth / median_depth) ** -exponent
    smoothing: float = DEFAULT_SMOOTHING

    def __post_init__(self):
        if not np.isfinite(self.depth_exponent) or self.depth_exponent < 0:
            raise ValueError("depth_exponent must be finite and >= 0")
        if self.smoothing < 0:
            raise ValueError("smoothing must be >= 0")


_INV_SQRT2 = 1.0 / np.sqrt(2.0)


def constant_power_gains(p: float):
    """Constant-power (-3 dB center) stereo gains for pan p in [-1, 1].

    Equivalent to gL = cos((p+1) pi/4), gR = sin((p+1) pi/4), written via
    the angle-sum identity so that negating the pan swaps the two gains
    bit-exactly (cos is even, sin is odd).
    """
    p = min(1.0, max(-1.0, p))
    if p == -1.0:
        return 1.0, 0.0
    if p == 1.0:
        return 0.0, 1.0
    phi = p * np.pi / 4.0
    c, s = np.cos(phi), np.sin(phi)
    return (c - s) * _INV_SQRT2, (c + s) * _INV_SQRT2


def _interp_track_values(times, values, sample_rate, n_samples):
    # boundary values hold before the first / after the last entry
    t_axis = (np.arange(n_samples) + 0.5) / sample_rate
    return np.interp(t_axis, times, values)


def _smooth(x: np.ndarray, sample_rate: int, smoothing: float) -> np.ndarray:
    if smoothing <= 0:
        return x
    coeff = 1.0 - np.exp(-1.0 / (smoothing * sample_rate))
    y = np.empty_like(x)
    acc = x[0]
    for i, v in enumerate(x):
        acc += coeff * (v - acc)
        y[i] = acc
    return y


def pan_curve(
    track: BBoxTrack,
    sample_rate: int,
    n_samples: int,
    smoothing: float = DEFAULT_SMOOTHING,
) -> np.ndarray:
    """Per-sample pan positions from the horizontal box-center trajectory.

    Entry pans are linearly interpolated to the sample grid, then run
    through a first-order low-pass with the given time constant
    (smoothing=0 is exact piecewise-linear interpolation).
    """
    if not track.entries:
        raise ValueError("track has no entries")
    times = np.array([e.t for e in track.entries])
    pans = np.array(
        [bbox_center_x_normalized(e.box, track.frame_width) for e in track.entries]
    )
    # average concurrent boxes at the same timestamp so interp stays monotone
    uniq_times, inverse = np.unique(times, return_inverse=True)
    if len(uniq_times) != len(times):
        sums = np.zeros(len(uniq_times))
        counts = np.zeros(len(uniq_times))
        np.add.at(sums, inverse, pans)
        np.add.at(counts, inverse, 1)
        times, pans = uniq_times, sums / counts
    curve = _interp_track_values(times, pans, sample_rate, n_samples)
    return _smooth(curve, sample_rate, smoothing)


def _depth_gain_curve(track: BBoxTrack, cfg: RenderConfig, sample_rate, n_samples):
    depths = [(e.t, e.depth) for e in track.entries if e.depth is not None]
    if cfg.depth_exponent == 0 or not depths:
        return None
    times = np.array([t for t, _ in depths])
    values = np.array([d for _, d in depths])
    median = np.median(values)
    gains = (values / median) ** (-cfg.depth_exponent)
    return _interp_track_values(times, gains, sample_rate, n_samples)


def render_stereo(
    source,
    track: BBoxTrack,
    cfg: RenderConfig,
    sample_rate: int,
) -> StereoBuffer:
    """Pan a mono source along the track; output clipped to [-1, 1]."""
    source = np.asarray(source, dtype=np.float64)
    if source.ndim != 1 or len(source) == 0:
        raise ValueError("source must be a non-empty 1-D sequence")
    pans = np.clip(pan_curve(track, sample_rate, len(source), cfg.smoothing), -1.0, 1.0)
    phi = pans * (np.pi / 4.0)
    c, s = np.cos(phi), np.sin(phi)
    g_left = (c - s) * _INV_SQRT2
    g_right = (c + s) * _INV_SQRT2
    # pin the hard-pan endpoints so the opposite channel is exactly silent
    g_left[pans == -1.0] = 1.0
    g_right[pans == -1.0] = 0.0
    g_left[pans == 1.0] = 0.0
    g_right[pans == 1.0] = 1.0
    left = source * g_left
    right = source * g_right
    depth_gain = _depth_gain_curve(track, cfg, sample_rate, len(source))
    if depth_gain is not None:
        left = left * depth_gain
        right = right * depth_gain
    return StereoBuffer(
        left=np.clip(left, -1.0, 1.0),
        right=np.clip(right, -1.0, 1.0),
        sample_rate=sample_rate,
    )
