"""Bounding-box track files and alignment metric reports.

Track files are JSONL: a header line with frame geometry and rate, then one
entry per tracked box. Example:

    {"frame_width": 1280, "frame_height": 720, "fps": 30}
    {"frame": 0, "box": [600.0, 200.0, 700.0, 560.0]}
    {"frame": 1, "box": [604.0, 200.0, 704.0, 560.0], "depth": 3.2}

Frames may be missing (tracking gaps) and a frame may carry several boxes.
The optional "depth" scalar feeds the renderer's distance attenuation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

TIME_TOL = 1e-6


class TrackValidationError(Exception):
    """Track file violates the schema or a geometric invariant."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class TrackEntry:
    frame_index: int
    t: float
    box: tuple  # (x_i, y_i, x_f, y_f) in pixels
    depth: float | None = None


@dataclass(frozen=True)
class BBoxTrack:
    frame_width: float
    frame_height: float
    fps: float
    entries: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.fps <= 0:
            raise TrackValidationError(f"fps must be positive, got {self.fps}")
        if self.frame_width <= 0 or self.frame_height <= 0:
            raise TrackValidationError("frame dimensions must be positive")
        prev_frame = None
        for e in self.entries:
            _validate_box(e.box, self.frame_width, self.frame_height)
            if prev_frame is not None and e.frame_index < prev_frame:
                raise TrackValidationError(
                    f"entries out of order at frame {e.frame_index}"
                )
            if abs(e.t - e.frame_index / self.fps) > TIME_TOL:
                raise TrackValidationError(
                    f"timestamp {e.t} inconsistent with frame {e.frame_index} at {self.fps} fps"
                )
            prev_frame = e.frame_index

    @property
    def duration(self) -> float:
        """Span covered by the track, one frame past the last entry."""
        if not self.entries:
            return 0.0
        return (self.entries[-1].frame_index + 1) / self.fps

    def boxes_at_frame(self, frame_index: int) -> list:
        return [e for e in self.entries if e.frame_index == frame_index]


def _validate_box(box, frame_width, frame_height, line=None):
    if len(box) != 4:
        raise TrackValidationError(f"box must have 4 components, got {len(box)}", line)
    x_i, y_i, x_f, y_f = box
    if not (0 <= x_i <= x_f <= frame_width):
        raise TrackValidationError(
            f"x extent [{x_i}, {x_f}] invalid for frame width {frame_width}", line
        )
    if not (0 <= y_i <= y_f <= frame_height):
        raise TrackValidationError(
            f"y extent [{y_i}, {y_f}] invalid for frame height {frame_height}", line
        )


def bbox_center_x_normalized(box, frame_width: float) -> float:
    """Horizontal box center mapped affinely to [-1, 1] (0 -> -1, width -> +1)."""
    x_i, _, x_f, _ = box
    return (x_i + x_f) / frame_width - 1.0


def load_track(path) -> BBoxTrack:
    """Parse and validate a JSONL track file; errors carry line numbers."""
    with open(path, "r", encoding="utf-8") as f:
        lines = [ln for ln in (raw.strip() for raw in f) if ln]
    if not lines:
        raise TrackValidationError("empty track file", line=1)

    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise TrackValidationError(f"invalid JSON: {exc}", line=1) from exc
    for key in ("frame_width", "frame_height", "fps"):
        if key not in header:
            raise TrackValidationError(f"header missing {key!r}", line=1)
    frame_width = float(header["frame_width"])
    frame_height = float(header["frame_height"])
    fps = float(header["fps"])
    if fps <= 0:
        raise TrackValidationError("fps must be positive", line=1)

    entries = []
    prev_frame = None
    for lineno, raw in enumerate(lines[1:], start=2):
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise TrackValidationError(f"invalid JSON: {exc}", line=lineno) from exc
        if "frame" not in obj or "box" not in obj:
            raise TrackValidationError("entry needs 'frame' and 'box'", line=lineno)
        frame_index = int(obj["frame"])
        if frame_index < 0:
            raise TrackValidationError("frame index must be >= 0", line=lineno)
        if prev_frame is not None and frame_index < prev_frame:
            raise TrackValidationError(
                f"frame {frame_index} out of order (after {prev_frame})", line=lineno
            )
        box = tuple(float(v) for v in obj["box"])
        _validate_box(box, frame_width, frame_height, line=lineno)
        depth = obj.get("depth")
        if depth is not None:
            depth = float(depth)
            if depth <= 0:
                raise TrackValidationError("depth must be positive", line=lineno)
        entries.append(
            TrackEntry(frame_index=frame_index, t=frame_index / fps, box=box, depth=depth)
        )
        prev_frame = frame_index

    return BBoxTrack(
        frame_width=frame_width,
        frame_height=frame_height,
        fps=fps,
        entries=tuple(entries),
    )


def write_track(track: BBoxTrack, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(
            json.dumps(
                {
                    "frame_width": track.frame_width,
                    "frame_height": track.frame_height,
                    "fps": track.fps,
                }
            )
            + "\n"
        )
        for e in track.entries:
            obj = {"frame": e.frame_index, "box": list(e.box)}
            if e.depth is not None:
                obj["depth"] = e.depth
            f.write(json.dumps(obj) + "\n")


@dataclass(frozen=True)
class AlignmentReport:
    """TP/FN tally of the spatial alignment score, with per-event detail.

    ``score`` is None (and no_events True) when there were no sound events
    to score: the ratio is undefined there, and neither 0 nor 1 would be an
    honest value for silent audio.
    """

    tp: int
    fn_: int
    per_event: tuple = field(default_factory=tuple)

    @property
    def no_events(self) -> bool:
        return self.tp + self.fn_ == 0

    @property
    def score(self) -> float | None:
        if self.no_events:
            return None
        return self.tp / (self.tp + self.fn_)


def report_to_dict(r: AlignmentReport) -> dict:
    return {
        "tp": r.tp,
        "fn": r.fn_,
        "score": r.score,
        "no_events": r.no_events,
        "per_event": [
            {
                "window_index": ev["window_index"],
                "direction": ev["direction"],
                "matched": ev["matched"],
            }
            for ev in r.per_event
        ],
    }


def write_report(r: AlignmentReport, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(report_to_dict(r), f, indent=2, sort_keys=True)
        f.write("\n")


def load_report(path) -> AlignmentReport:
    with open(path, "r", encoding="utf-8") as f:
        obj = json.load(f)
    return AlignmentReport(
        tp=int(obj["tp"]),
        fn_=int(obj["fn"]),
        per_event=tuple(
            {
                "window_index": int(ev["window_index"]),
                "direction": ev["direction"],
                "matched": bool(ev["matched"]),
            }
            for ev in obj.get("per_event", [])
        ),
    )
