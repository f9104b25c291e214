import numpy as np
import pytest

from stereoeval.track_io import BBoxTrack, TrackEntry


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_track(centers, fps=30.0, frame_width=1280.0, frame_height=720.0,
               half_width=80.0, depths=None):
    """Build a track whose box centers follow `centers` (pixels), one per frame."""
    entries = []
    for k, cx in enumerate(centers):
        x_i = max(0.0, cx - half_width)
        x_f = min(frame_width, cx + half_width)
        depth = None if depths is None else depths[k]
        entries.append(
            TrackEntry(frame_index=k, t=k / fps, box=(x_i, 100.0, x_f, 600.0), depth=depth)
        )
    return BBoxTrack(
        frame_width=frame_width, frame_height=frame_height, fps=fps, entries=tuple(entries)
    )


def burst_source(n_samples, sample_rate, burst_len=0.08, period=0.25,
                 amplitude=0.5, rng=None):
    """Footstep-like source: periodic noise bursts with silence between."""
    if rng is None:
        rng = np.random.default_rng(0)
    out = np.zeros(n_samples)
    step = int(period * sample_rate)
    blen = int(burst_len * sample_rate)
    for start in range(0, n_samples, step):
        end = min(start + blen, n_samples)
        env = np.hanning(2 * (end - start))[: end - start]
        out[start:end] = amplitude * env * rng.standard_normal(end - start)
    return np.clip(out, -1.0, 1.0)
