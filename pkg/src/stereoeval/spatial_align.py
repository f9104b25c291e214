"""Spatial alignment scoring between stereo audio and bounding-box tracks.

The pipeline: detect sound events in 100 ms windows by energy threshold,
estimate each event's lateral direction from the interaural level
difference, then check the direction against the tracked object's
horizontal span in the nearest 4 fps evaluation frame (adjacent frames also
count). Score = TP / (TP + FN).

The event detector and direction estimator are deterministic signal-level
stand-ins for a learned localizer; the metric structure (events x
directions x overlap) is what matters here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .audio_io import StereoBuffer
from .track_io import AlignmentReport, BBoxTrack

DEFAULT_WINDOW_LEN = 0.1
DEFAULT_THRESHOLD_DB = -40.0
DEFAULT_EVAL_FPS = 4.0
DEFAULT_TOLERANCE = 0.15


@dataclass(frozen=True)
class DirectionWindow:
    active: bool
    energy: float
    direction: float | None = None


@dataclass(frozen=True)
class DirectionTrack:
    window_len: float
    windows: tuple = field(default_factory=tuple)

    def __len__(self):
        return len(self.windows)


def _window_bounds(n_samples: int, sample_rate: int, window_len: float):
    win = max(1, round(window_len * sample_rate))
    n_windows = -(-n_samples // win)  # ceil
    for i in range(n_windows):
        yield i, i * win, min((i + 1) * win, n_samples)


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.square(x, dtype=np.float64))))


def detect_events(
    buf: StereoBuffer,
    window_len: float = DEFAULT_WINDOW_LEN,
    threshold_db: float = DEFAULT_THRESHOLD_DB,
) -> DirectionTrack:
    """Mark a window active when its mono RMS exceeds ``threshold_db`` dBFS."""
    mono = (buf.left.astype(np.float64) + buf.right.astype(np.float64)) / 2.0
    threshold = 10.0 ** (threshold_db / 20.0)
    windows = []
    for _, lo, hi in _window_bounds(len(buf), buf.sample_rate, window_len):
        energy = _rms(mono[lo:hi])
        windows.append(DirectionWindow(active=energy > threshold, energy=energy))
    return DirectionTrack(window_len=window_len, windows=tuple(windows))


def estimate_direction(buf: StereoBuffer, track: DirectionTrack) -> DirectionTrack:
    """Fill lateral direction for active windows from the level difference.

    direction = (E_R - E_L) / (E_R + E_L) over per-channel window RMS,
    clamped to [-1, 1]. An active window with zero total energy is demoted
    to inactive.
    """
    windows = []
    for i, lo, hi in _window_bounds(len(buf), buf.sample_rate, track.window_len):
        if i >= len(track.windows):
            break
        w = track.windows[i]
        if not w.active:
            windows.append(w)
            continue
        e_l = _rms(buf.left[lo:hi])
        e_r = _rms(buf.right[lo:hi])
        total = e_r + e_l
        if total == 0.0:
            windows.append(DirectionWindow(active=False, energy=w.energy))
            continue
        direction = min(1.0, max(-1.0, (e_r - e_l) / total))
        windows.append(DirectionWindow(active=True, energy=w.energy, direction=direction))
    return DirectionTrack(window_len=track.window_len, windows=tuple(windows))


def localize(
    buf: StereoBuffer,
    window_len: float = DEFAULT_WINDOW_LEN,
    threshold_db: float = DEFAULT_THRESHOLD_DB,
) -> DirectionTrack:
    """Convenience: detect_events then estimate_direction on the same buffer."""
    return estimate_direction(buf, detect_events(buf, window_len, threshold_db))


def _nearest_index(t: float, rate: float, n: int) -> int:
    # ties (exactly halfway) break toward the earlier frame
    idx = math.ceil(t * rate - 0.5)
    return min(max(idx, 0), n - 1)


def _eval_frame_spans(track: BBoxTrack, eval_fps: float, tolerance: float,
                      duration: float):
    """Resample bbox entries onto the evaluation frame grid.

    Each evaluation frame takes the boxes of the nearest source frame and
    holds their normalized x-intervals, widened by ``tolerance`` on each
    side. Frames whose nearest source frame has no boxes stay empty.
    """
    by_frame = {}
    for e in track.entries:
        by_frame.setdefault(e.frame_index, []).append(e.box)
    n_eval = max(1, math.ceil(duration * eval_fps))
    spans = []
    for j in range(n_eval):
        t = j / eval_fps
        src = math.ceil(t * track.fps - 0.5)  # tie toward earlier source frame
        frame_spans = []
        for box in by_frame.get(src, []):
            x_i, _, x_f, _ = box
            lo = 2.0 * x_i / track.frame_width - 1.0 - tolerance
            hi = 2.0 * x_f / track.frame_width - 1.0 + tolerance
            frame_spans.append((lo, hi))
        spans.append(frame_spans)
    return spans


def spatial_av_align(
    dir_track: DirectionTrack,
    track: BBoxTrack,
    video_fps_eval: float = DEFAULT_EVAL_FPS,
    tolerance_halfwidth: float = DEFAULT_TOLERANCE,
) -> AlignmentReport:
    """Score active audio windows against tracked horizontal spans.

    A window is a true positive when its estimated direction falls inside
    any widened box span of the nearest evaluation frame or either adjacent
    frame; otherwise a false negative.
    """
    if not track.entries:
        return AlignmentReport(tp=0, fn_=0, per_event=())

    # the evaluation grid spans whichever runs longer, so sound events past
    # the end of the track are scored against empty frames (false negatives)
    duration = max(track.duration, len(dir_track.windows) * dir_track.window_len)
    spans = _eval_frame_spans(track, video_fps_eval, tolerance_halfwidth, duration)
    tp = 0
    fn = 0
    per_event = []
    for i, w in enumerate(dir_track.windows):
        if not w.active or w.direction is None:
            continue
        center_t = (i + 0.5) * dir_track.window_len
        j = _nearest_index(center_t, video_fps_eval, len(spans))
        candidates = []
        for k in (j - 1, j, j + 1):
            if 0 <= k < len(spans):
                candidates.extend(spans[k])
        matched = any(lo <= w.direction <= hi for lo, hi in candidates)
        if matched:
            tp += 1
        else:
            fn += 1
        per_event.append(
            {"window_index": i, "direction": w.direction, "matched": matched}
        )
    return AlignmentReport(tp=tp, fn_=fn, per_event=tuple(per_event))


def shuffled_track(track: BBoxTrack, rng: np.random.Generator) -> BBoxTrack:
    """Diagnostic baseline: permute which boxes appear at which frames.

    Quantifies how much of a score comes from center bias rather than
    actual direction tracking.
    """
    from .track_io import TrackEntry

    frames = [e.frame_index for e in track.entries]
    boxes = [(e.box, e.depth) for e in track.entries]
    perm = rng.permutation(len(boxes))
    entries = tuple(
        TrackEntry(
            frame_index=frames[i],
            t=frames[i] / track.fps,
            box=boxes[p][0],
            depth=boxes[p][1],
        )
        for i, p in enumerate(perm)
    )
    return BBoxTrack(
        frame_width=track.frame_width,
        frame_height=track.frame_height,
        fps=track.fps,
        entries=entries,
    )
