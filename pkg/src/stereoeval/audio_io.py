"""WAV file I/O and basic signal utilities for stereo audio.

Supports RIFF/WAVE containers with PCM-16 (format code 1) and IEEE float-32
(format code 3) data, 1 or 2 channels, any sample rate. Mono files are
duplicated to both channels on read; files with more than 2 channels are
rejected rather than silently downmixed.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

PCM16_FULL_SCALE = 32768  # -1.0 maps to -32768; +1.0 clips to 32767

_FMT_PCM = 1
_FMT_IEEE_FLOAT = 3


class WavFormatError(Exception):
    """Malformed RIFF/WAVE container."""


class UnsupportedWavError(WavFormatError):
    """Well-formed WAV that uses a codec or layout we do not handle."""


@dataclass(frozen=True)
class StereoBuffer:
    """Two-channel audio with samples in [-1, 1] at a declared sample rate."""

    left: np.ndarray
    right: np.ndarray
    sample_rate: int

    def __post_init__(self):
        left = np.asarray(self.left, dtype=np.float32)
        right = np.asarray(self.right, dtype=np.float32)
        if left.ndim != 1 or right.ndim != 1:
            raise ValueError("channels must be 1-D sample sequences")
        if len(left) != len(right):
            raise ValueError(
                f"channel length mismatch: left={len(left)} right={len(right)}"
            )
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if not (np.isfinite(left).all() and np.isfinite(right).all()):
            raise ValueError("samples must be finite")
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    def __len__(self):
        return len(self.left)

    @property
    def duration(self) -> float:
        return len(self.left) / self.sample_rate


def to_mono(buf: StereoBuffer) -> np.ndarray:
    """Elementwise channel mean (left + right) / 2."""
    return (buf.left.astype(np.float64) + buf.right.astype(np.float64)) / 2.0


def linear_resample(signal, target_len: int) -> np.ndarray:
    """Resample a sequence to ``target_len`` points by linear interpolation.

    Endpoints are preserved; a length-1 input yields a constant output.
    """
    signal = np.asarray(signal, dtype=np.float64)
    if signal.ndim != 1 or len(signal) == 0:
        raise ValueError("signal must be a non-empty 1-D sequence")
    if target_len < 1:
        raise ValueError(f"target_len must be >= 1, got {target_len}")
    if len(signal) == 1:
        return np.full(target_len, signal[0])
    if target_len == len(signal):
        return signal.copy()
    src_x = np.arange(len(signal), dtype=np.float64)
    dst_x = np.linspace(0.0, len(signal) - 1, target_len)
    return np.interp(dst_x, src_x, signal)


def _quantize_pcm16(x: np.ndarray) -> np.ndarray:
    # round half away from zero, then clip to the asymmetric 16-bit grid
    scaled = x.astype(np.float64) * PCM16_FULL_SCALE
    rounded = np.sign(scaled) * np.floor(np.abs(scaled) + 0.5)
    return np.clip(rounded, -32768, 32767).astype(np.int16)


def read_wav(path) -> StereoBuffer:
    """Read a PCM-16 or float-32 WAV file into a StereoBuffer.

    Mono inputs are duplicated to both channels. Raises WavFormatError on a
    malformed container and UnsupportedWavError for codecs, bit depths, or
    channel counts outside the supported set.
    """
    with open(path, "rb") as f:
        data = f.read()

    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise WavFormatError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos : pos + 4]
        (chunk_size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8 : pos + 8 + chunk_size]
        if chunk_id == b"fmt ":
            if len(body) < 16:
                raise WavFormatError(f"{path}: truncated fmt chunk")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            if len(body) < chunk_size:
                raise WavFormatError(f"{path}: truncated data chunk")
            payload = body
        pos += 8 + chunk_size + (chunk_size & 1)  # chunks are word-aligned

    if fmt is None:
        raise WavFormatError(f"{path}: missing fmt chunk")
    if payload is None:
        raise WavFormatError(f"{path}: missing data chunk")

    audio_format, n_channels, sample_rate, _, _, bits = fmt
    if n_channels not in (1, 2):
        raise UnsupportedWavError(f"{path}: {n_channels} channels (want 1 or 2)")

    if audio_format == _FMT_PCM and bits == 16:
        raw = np.frombuffer(payload, dtype="<i2")
        samples = raw.astype(np.float32) / PCM16_FULL_SCALE
    elif audio_format == _FMT_IEEE_FLOAT and bits == 32:
        samples = np.frombuffer(payload, dtype="<f4").astype(np.float32)
    else:
        raise UnsupportedWavError(
            f"{path}: unsupported format code {audio_format} / {bits}-bit"
        )

    n_frames = len(samples) // n_channels
    samples = samples[: n_frames * n_channels].reshape(n_frames, n_channels)
    if n_channels == 1:
        left = right = samples[:, 0]
    else:
        left, right = samples[:, 0], samples[:, 1]
    return StereoBuffer(left=left.copy(), right=right.copy(), sample_rate=sample_rate)


def write_wav(buf: StereoBuffer, path, format: str = "pcm16") -> None:
    """Write a StereoBuffer as a standard little-endian RIFF/WAVE file.

    ``format`` is "pcm16" (round-half-away-from-zero quantization, clipped at
    full scale) or "float32".
    """
    interleaved = np.empty(2 * len(buf), dtype=np.float64)
    interleaved[0::2] = buf.left
    interleaved[1::2] = buf.right

    if format == "pcm16":
        payload = _quantize_pcm16(interleaved).tobytes()
        audio_format, bits = _FMT_PCM, 16
    elif format == "float32":
        payload = interleaved.astype("<f4").tobytes()
        audio_format, bits = _FMT_IEEE_FLOAT, 32
    else:
        raise ValueError(f"format must be 'pcm16' or 'float32', got {format!r}")

    n_channels = 2
    block_align = n_channels * bits // 8
    byte_rate = buf.sample_rate * block_align
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF",
        36 + len(payload),
        b"WAVE",
        b"fmt ",
        16,
        audio_format,
        n_channels,
        buf.sample_rate,
        byte_rate,
        block_align,
        bits,
        b"data",
        len(payload),
    )
    with open(path, "wb") as f:
        f.write(header)
        f.write(payload)
