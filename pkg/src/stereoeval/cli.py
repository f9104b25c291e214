"""Command-line interface: every operation as a subcommand.

Exit codes: 0 success, 1 data/validation error, 2 usage error, 3 I/O error.
All randomness flows from --seed (default 0); identical argv plus seed
produce byte-identical stdout.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .audio_io import StereoBuffer, WavFormatError, read_wav, to_mono, write_wav
from .diffusion_core import make_schedule, forward_sample, reverse_sample, ConditioningBundle
from .embedding_metrics import (
    EmbeddingFormatError,
    fit_gaussian,
    frechet_distance,
    load_embeddings,
    EmbeddingSet,
)
from .envelope import Envelope, e_l1, rms_envelope
from .spatial_align import (
    DEFAULT_THRESHOLD_DB,
    DEFAULT_TOLERANCE,
    localize,
    shuffled_track,
    spatial_av_align,
)
from .spatial_render import RenderConfig, render_stereo
from .track_io import (
    TrackValidationError,
    load_track,
    report_to_dict,
    write_report,
)

EXIT_OK = 0
EXIT_DATA = 1
EXIT_USAGE = 2
EXIT_IO = 3


class DataError(Exception):
    pass


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def _emit(args, payload: dict, plain: str):
    if getattr(args, "json", False):
        print(json.dumps(payload, sort_keys=True))
    else:
        print(plain)


def _envelope_of_wav(path, window, hop) -> Envelope:
    buf = read_wav(path)
    return rms_envelope(to_mono(buf), window=window, hop=hop)


def cmd_envelope(args):
    env = _envelope_of_wav(args.input, args.window, args.hop)
    if args.binary:
        sys.stdout.buffer.write(env.frames.astype("<f4").tobytes())
        return
    if args.json:
        print(
            json.dumps(
                {
                    "window": env.window,
                    "hop": env.hop,
                    "frames": [round(float(v), 8) for v in env.frames],
                },
                sort_keys=True,
            )
        )
        return
    print("frame_index,value")
    for i, v in enumerate(env.frames):
        print(f"{i},{v:.8f}")


def cmd_el1(args):
    env_a = _envelope_of_wav(args.a, args.window, args.hop)
    env_b = _envelope_of_wav(args.b, args.window, args.hop)
    # interpolate the shorter envelope to the longer before comparing
    if len(env_a) != len(env_b):
        from .audio_io import linear_resample

        target = max(len(env_a), len(env_b))
        if len(env_a) < target:
            env_a = Envelope(
                frames=linear_resample(env_a.frames, target),
                window=env_a.window,
                hop=env_a.hop,
                source_len=env_a.source_len,
            )
        else:
            env_b = Envelope(
                frames=linear_resample(env_b.frames, target),
                window=env_b.window,
                hop=env_b.hop,
                source_len=env_b.source_len,
            )
    value = e_l1(env_a, env_b)
    _emit(args, {"e_l1": value}, _fmt(value))


def _frechet_from_files(path_a, path_b) -> float:
    a = load_embeddings(path_a)
    b = load_embeddings(path_b)
    if a.n < 2 or b.n < 2:
        raise DataError("each embedding set needs at least 2 rows")
    if a.d != b.d:
        raise DataError(f"embedding dimension mismatch: {a.d} vs {b.d}")
    return frechet_distance(fit_gaussian(a), fit_gaussian(b))


def cmd_fad(args):
    value = _frechet_from_files(args.real, args.gen)
    _emit(args, {"fad": value}, _fmt(value))


def cmd_favd(args):
    value = _frechet_from_files(args.video, args.audio)
    _emit(args, {"favd": value}, _fmt(value))


def _align_one(audio_path, track_path, threshold_db, tolerance):
    buf = read_wav(audio_path)
    track = load_track(track_path)
    dirs = localize(buf, threshold_db=threshold_db)
    return spatial_av_align(dirs, track, tolerance_halfwidth=tolerance), dirs, track


def cmd_av_align(args):
    report, dirs, track = _align_one(
        args.audio, args.track, args.threshold_db, args.tolerance
    )
    payload = report_to_dict(report)
    if args.shuffle_baseline:
        rng = np.random.default_rng(args.seed)
        base = spatial_av_align(
            dirs, shuffled_track(track, rng), tolerance_halfwidth=args.tolerance
        )
        payload["shuffle_baseline_score"] = base.score
    if args.report:
        write_report(report, args.report)
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        score = report.score
        print("no_events" if score is None else _fmt(score))


def cmd_localize(args):
    buf = read_wav(args.audio)
    dirs = localize(buf, threshold_db=args.threshold_db)
    if args.json:
        print(
            json.dumps(
                {
                    "window_len": dirs.window_len,
                    "windows": [
                        {
                            "index": i,
                            "active": w.active,
                            "direction": None if w.direction is None else round(w.direction, 6),
                            "energy": round(w.energy, 8),
                        }
                        for i, w in enumerate(dirs.windows)
                    ],
                },
                sort_keys=True,
            )
        )
        return
    print("window_index,active,direction,energy")
    for i, w in enumerate(dirs.windows):
        d = "" if w.direction is None else f"{w.direction:.6f}"
        print(f"{i},{int(w.active)},{d},{w.energy:.8f}")


def cmd_render(args):
    buf = read_wav(args.source)
    track = load_track(args.track)
    cfg = RenderConfig(
        depth_exponent=args.depth_exponent, smoothing=args.smoothing_ms / 1000.0
    )
    out = render_stereo(to_mono(buf), track, cfg, buf.sample_rate)
    write_wav(out, args.out, format=args.format)
    _emit(
        args,
        {"out": args.out, "samples": len(out), "sample_rate": out.sample_rate},
        f"wrote {args.out} ({len(out)} frames @ {out.sample_rate} Hz)",
    )


def cmd_validate_track(args):
    track = load_track(args.track)
    _emit(
        args,
        {
            "valid": True,
            "entries": len(track.entries),
            "fps": track.fps,
            "frame_width": track.frame_width,
            "frame_height": track.frame_height,
        },
        f"valid track: {len(track.entries)} entries at {track.fps} fps",
    )


def cmd_diffusion_demo(args):
    """Forward-then-reverse oracle round trip; prints max reconstruction error."""
    rng = np.random.default_rng(args.seed)
    schedule = make_schedule("linear-beta", args.t)
    z0 = rng.standard_normal(args.dim)

    def oracle_predictor(z, t, cond):
        ab = schedule.alpha_bar(t)
        return (z - np.sqrt(ab) * z0) / np.sqrt(1.0 - ab)

    z_t, _ = forward_sample(z0, schedule.num_steps, schedule, rng)
    recon = reverse_sample(
        oracle_predictor,
        ConditioningBundle(),
        schedule,
        rng,
        dim=args.dim,
        deterministic=True,
        z_init=z_t,
    )
    err = float(np.max(np.abs(recon - z0)))
    _emit(
        args,
        {"t": args.t, "dim": args.dim, "seed": args.seed, "max_error": err},
        f"max reconstruction error: {err:.12e}",
    )


def cmd_batch(args):
    with open(args.manifest, "r", encoding="utf-8") as f:
        lines = [ln for ln in (raw.strip() for raw in f) if ln]
    if not lines:
        raise UsageError("empty manifest")
    clips = [json.loads(ln) for ln in lines]

    per_clip = []
    tp_total = fn_total = 0
    el1_values = []
    real_rows, gen_rows = [], []
    for idx, clip in enumerate(clips):
        name = clip.get("audio", f"clip_{idx}")
        for key in ("audio", "track"):
            if key not in clip:
                raise DataError(f"{name}: manifest entry missing {key!r}")
        try:
            report, _, _ = _align_one(
                clip["audio"], clip["track"], args.threshold_db, args.tolerance
            )
        except FileNotFoundError as exc:
            raise DataError(f"{name}: missing file {exc.filename}") from exc
        tp_total += report.tp
        fn_total += report.fn_
        entry = {"audio": name, "tp": report.tp, "fn": report.fn_, "score": report.score}
        if clip.get("ref_audio"):
            env_gen = _envelope_of_wav(clip["audio"], 512, 128)
            env_ref = _envelope_of_wav(clip["ref_audio"], 512, 128)
            if len(env_gen) != len(env_ref):
                from .audio_io import linear_resample

                env_ref = Envelope(
                    frames=linear_resample(env_ref.frames, len(env_gen)),
                    window=env_ref.window,
                    hop=env_ref.hop,
                    source_len=env_ref.source_len,
                )
            entry["e_l1"] = e_l1(env_gen, env_ref)
            el1_values.append(entry["e_l1"])
        if clip.get("emb_real") and clip.get("emb_gen"):
            real_rows.append(load_embeddings(clip["emb_real"]).data)
            gen_rows.append(load_embeddings(clip["emb_gen"]).data)
        per_clip.append(entry)

    aggregate = {
        "tp": tp_total,
        "fn": fn_total,
        "av_align": (tp_total / (tp_total + fn_total)) if tp_total + fn_total else None,
        "mean_e_l1": float(np.mean(el1_values)) if el1_values else None,
    }
    if real_rows:
        real = EmbeddingSet(np.vstack(real_rows))
        gen = EmbeddingSet(np.vstack(gen_rows))
        aggregate["fad"] = frechet_distance(fit_gaussian(real), fit_gaussian(gen))
    else:
        aggregate["fad"] = None

    payload = {"clips": per_clip, "aggregate": aggregate}
    print(json.dumps(payload, sort_keys=True))


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stereoeval",
        description="Stereo spatial audio evaluation toolkit",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--seed", type=int, default=0, help="seed for all randomness")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    parser.add_argument(
        "--parallelism", type=int, default=0, help="worker count, 0 = auto"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        # accepted after the subcommand too; SUPPRESS keeps the parent value
        # when the flag is absent here
        p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
        p.add_argument("--json", action="store_true", default=argparse.SUPPRESS)

    p = sub.add_parser("envelope", help="RMS envelope of a WAV file")
    p.add_argument("input")
    p.add_argument("--window", type=int, default=512)
    p.add_argument("--hop", type=int, default=128)
    p.add_argument("--binary", action="store_true", help="raw f32 LE instead of CSV")
    p.set_defaults(func=cmd_envelope)
    add_common(p)

    p = sub.add_parser("el1", help="envelope L1 distance between two WAV files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--window", type=int, default=512)
    p.add_argument("--hop", type=int, default=128)
    p.set_defaults(func=cmd_el1)
    add_common(p)

    p = sub.add_parser("fad", help="Frechet distance: real vs generated audio embeddings")
    p.add_argument("--real", required=True)
    p.add_argument("--gen", required=True)
    p.set_defaults(func=cmd_fad)
    add_common(p)

    p = sub.add_parser("favd", help="Frechet distance: video vs audio embeddings")
    p.add_argument("--video", required=True)
    p.add_argument("--audio", required=True)
    p.set_defaults(func=cmd_favd)
    add_common(p)

    p = sub.add_parser("av-align", help="spatial alignment score of audio vs track")
    p.add_argument("--audio", required=True)
    p.add_argument("--track", required=True)
    p.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)
    p.add_argument("--threshold-db", type=float, default=DEFAULT_THRESHOLD_DB)
    p.add_argument("--report", help="write full JSON report to this path")
    p.add_argument(
        "--shuffle-baseline",
        action="store_true",
        help="also score against a time-permuted track (center-bias diagnostic)",
    )
    p.set_defaults(func=cmd_av_align)
    add_common(p)

    p = sub.add_parser("localize", help="per-window event detection and direction")
    p.add_argument("--audio", required=True)
    p.add_argument("--threshold-db", type=float, default=DEFAULT_THRESHOLD_DB)
    p.set_defaults(func=cmd_localize)
    add_common(p)

    p = sub.add_parser("render", help="spatialize a mono source along a bbox track")
    p.add_argument("--source", required=True)
    p.add_argument("--track", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--depth-exponent", type=float, default=0.0)
    p.add_argument("--smoothing-ms", type=float, default=20.0)
    p.add_argument("--format", choices=["pcm16", "float32"], default="pcm16")
    p.set_defaults(func=cmd_render)
    add_common(p)

    p = sub.add_parser("validate-track", help="validate a JSONL track file")
    p.add_argument("track")
    p.set_defaults(func=cmd_validate_track)
    add_common(p)

    p = sub.add_parser("diffusion-demo", help="diffusion oracle round-trip check")
    p.add_argument("--t", type=int, default=50)
    p.add_argument("--dim", type=int, default=16)
    p.set_defaults(func=cmd_diffusion_demo)
    add_common(p)

    p = sub.add_parser("batch", help="evaluate a JSONL manifest of clips")
    p.add_argument("manifest")
    p.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)
    p.add_argument("--threshold-db", type=float, default=DEFAULT_THRESHOLD_DB)
    p.set_defaults(func=cmd_batch)
    add_common(p)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (WavFormatError, EmbeddingFormatError, TrackValidationError, DataError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
