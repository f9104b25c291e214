"""RMS envelope extraction and the E-L1 temporal alignment metric.

Frames use centered windowing with zero padding at the boundaries, so an
input of L samples with hop h yields ceil(L / h) frames. This framing
convention is an assumption baked into all E-L1 values produced here; see
the README for details.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio_io import linear_resample

DEFAULT_WINDOW = 512
DEFAULT_HOP = 128


@dataclass(frozen=True)
class Envelope:
    """Per-frame RMS values with the framing metadata that produced them."""

    frames: np.ndarray
    window: int
    hop: int
    source_len: int

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float64)
        if frames.ndim != 1 or len(frames) == 0:
            raise ValueError("frames must be a non-empty 1-D sequence")
        if not np.isfinite(frames).all() or (frames < 0).any():
            raise ValueError("frame values must be finite and non-negative")
        if self.window < 1 or self.hop < 1:
            raise ValueError("window and hop must be >= 1")
        object.__setattr__(self, "frames", frames)

    def __len__(self):
        return len(self.frames)


def rms_envelope(signal, window: int = DEFAULT_WINDOW, hop: int = DEFAULT_HOP) -> Envelope:
    """Root-mean-square envelope over centered, zero-padded windows.

    Frame i covers ``window`` samples centered on sample ``i * hop``; the
    frame count is ceil(len(signal) / hop).
    """
    signal = np.asarray(signal, dtype=np.float64)
    if signal.ndim != 1 or len(signal) == 0:
        raise ValueError("signal must be a non-empty 1-D sequence")
    if window < 1 or hop < 1:
        raise ValueError("window and hop must be >= 1")

    n = len(signal)
    n_frames = -(-n // hop)  # ceil
    pad_left = window // 2
    last_start = (n_frames - 1) * hop - pad_left
    pad_right = max(0, last_start + pad_left + window - n)
    padded = np.concatenate(
        [np.zeros(pad_left), signal, np.zeros(pad_right)]
    )
    windows = np.lib.stride_tricks.sliding_window_view(padded, window)[::hop][:n_frames]
    frames = np.sqrt(np.mean(windows**2, axis=1))
    return Envelope(frames=frames, window=window, hop=hop, source_len=n)


def interpolate_envelope(env: Envelope, target_len: int, channels: int = 2) -> np.ndarray:
    """Linearly interpolate envelope frames to ``target_len`` samples and
    replicate across ``channels`` rows (shape: channels x target_len)."""
    if channels < 1:
        raise ValueError(f"channels must be >= 1, got {channels}")
    row = linear_resample(env.frames, target_len)
    return np.tile(row, (channels, 1))


def e_l1(a: Envelope, b: Envelope) -> float:
    """Mean absolute difference between two frame-aligned envelopes.

    Inputs must share length, window, and hop; interpolate beforehand if the
    sources differ in duration.
    """
    if len(a) != len(b):
        raise ValueError(f"envelope length mismatch: {len(a)} vs {len(b)}")
    if a.window != b.window or a.hop != b.hop:
        raise ValueError("envelopes use different window/hop settings")
    return float(np.mean(np.abs(a.frames - b.frames)))
