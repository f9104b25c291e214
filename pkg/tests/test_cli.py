import io
import json
import struct

import numpy as np
import pytest

from stereoeval.audio_io import StereoBuffer, write_wav
from stereoeval.cli import EXIT_DATA, EXIT_IO, EXIT_OK, EXIT_USAGE, main
from stereoeval.embedding_metrics import EmbeddingSet, save_embeddings
from stereoeval.track_io import write_track

from conftest import burst_source, make_track

SR = 44100


@pytest.fixture
def wav_file(tmp_path, rng):
    s = rng.uniform(-0.5, 0.5, SR).astype(np.float32)
    buf = StereoBuffer(left=s, right=s.copy(), sample_rate=SR)
    path = tmp_path / "a.wav"
    write_wav(buf, path)
    return str(path)


@pytest.fixture
def emb_file(tmp_path, rng):
    path = tmp_path / "e.emb"
    save_embeddings(EmbeddingSet(rng.standard_normal((20, 6))), path)
    return str(path)


@pytest.fixture
def oracle_clip(tmp_path, rng):
    """Rendered audio plus the very track that produced it."""
    from stereoeval.spatial_render import RenderConfig, render_stereo

    source = burst_source(2 * SR, SR, rng=rng)
    track = make_track(np.linspace(250, 1050, 60))
    buf = render_stereo(source, track, RenderConfig(), SR)
    wav_path = tmp_path / "rendered.wav"
    track_path = tmp_path / "t.jsonl"
    write_wav(buf, wav_path)
    write_track(track, track_path)
    return str(wav_path), str(track_path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestBasicCommands:
    def test_el1_identity(self, capsys, wav_file):
        code, out, _ = run(capsys, "el1", "--a", wav_file, "--b", wav_file)
        assert code == EXIT_OK
        assert float(out.strip()) == 0.0

    def test_fad_identity(self, capsys, emb_file):
        code, out, _ = run(capsys, "fad", "--real", emb_file, "--gen", emb_file)
        assert code == EXIT_OK
        assert float(out.strip()) == pytest.approx(0.0, abs=1e-6)

    def test_favd_same_machinery(self, capsys, emb_file):
        code, out, _ = run(capsys, "favd", "--video", emb_file, "--audio", emb_file)
        assert code == EXIT_OK
        assert float(out.strip()) == pytest.approx(0.0, abs=1e-6)

    def test_envelope_csv(self, capsys, wav_file):
        code, out, _ = run(capsys, "envelope", wav_file)
        assert code == EXIT_OK
        lines = out.strip().splitlines()
        assert lines[0] == "frame_index,value"
        assert len(lines) == 1 + -(-SR // 128)

    def test_validate_track_ok(self, capsys, tmp_path):
        path = tmp_path / "t.jsonl"
        write_track(make_track([640.0] * 10), path)
        code, out, _ = run(capsys, "validate-track", str(path))
        assert code == EXIT_OK
        assert "10 entries" in out

    def test_validate_track_bad_exits_1(self, capsys, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text(
            '{"frame_width": 1280, "frame_height": 720, "fps": 30}\n'
            '{"frame": 0, "box": [500, 0, 100, 100]}\n'
        )
        code, _, err = run(capsys, "validate-track", str(path))
        assert code == EXIT_DATA
        assert "line 2" in err

    def test_missing_file_exits_3(self, capsys):
        code, _, err = run(capsys, "el1", "--a", "/nonexistent.wav", "--b", "/nonexistent.wav")
        assert code == EXIT_IO

    def test_unknown_command_exits_2(self, capsys):
        code, _, _ = run(capsys, "frobnicate")
        assert code == EXIT_USAGE


class TestAvAlign:
    def test_oracle_pair_scores_high(self, capsys, oracle_clip):
        wav_path, track_path = oracle_clip
        code, out, _ = run(capsys, "av-align", "--audio", wav_path, "--track", track_path)
        assert code == EXIT_OK
        assert float(out.strip()) >= 0.9

    def test_report_written(self, capsys, oracle_clip, tmp_path):
        wav_path, track_path = oracle_clip
        report_path = tmp_path / "report.json"
        code, _, _ = run(
            capsys, "av-align", "--audio", wav_path, "--track", track_path,
            "--report", str(report_path),
        )
        assert code == EXIT_OK
        obj = json.loads(report_path.read_text())
        assert obj["score"] >= 0.9
        assert obj["tp"] + obj["fn"] == len(obj["per_event"])

    def test_shuffle_baseline_included(self, capsys, oracle_clip):
        wav_path, track_path = oracle_clip
        code, out, _ = run(
            capsys, "--json", "av-align", "--audio", wav_path, "--track", track_path,
            "--shuffle-baseline",
        )
        assert code == EXIT_OK
        obj = json.loads(out)
        assert "shuffle_baseline_score" in obj


class TestRenderCommand:
    def test_render_then_align(self, capsys, wav_file, tmp_path):
        track_path = tmp_path / "t.jsonl"
        write_track(make_track([640.0] * 30), track_path)
        out_path = tmp_path / "out.wav"
        code, _, _ = run(
            capsys, "render", "--source", wav_file, "--track", str(track_path),
            "--out", str(out_path),
        )
        assert code == EXIT_OK
        assert out_path.exists()


class TestDiffusionDemo:
    def test_deterministic_stdout(self, capsys):
        code1, out1, _ = run(capsys, "diffusion-demo", "--seed", "7")
        code2, out2, _ = run(capsys, "diffusion-demo", "--seed", "7")
        assert code1 == code2 == EXIT_OK
        assert out1 == out2

    def test_reconstruction_error_small(self, capsys):
        code, out, _ = run(capsys, "--json", "diffusion-demo", "--t", "50", "--dim", "16")
        obj = json.loads(out)
        assert obj["max_error"] < 1e-3


class TestBatch:
    def test_single_oracle_clip(self, capsys, oracle_clip, emb_file, tmp_path):
        wav_path, track_path = oracle_clip
        manifest = tmp_path / "m.jsonl"
        manifest.write_text(
            json.dumps(
                {
                    "audio": wav_path,
                    "track": track_path,
                    "ref_audio": wav_path,
                    "emb_real": emb_file,
                    "emb_gen": emb_file,
                }
            )
            + "\n"
        )
        code, out, _ = run(capsys, "batch", str(manifest))
        assert code == EXIT_OK
        obj = json.loads(out)
        agg = obj["aggregate"]
        assert agg["av_align"] >= 0.9
        assert agg["mean_e_l1"] == 0.0
        assert agg["fad"] == pytest.approx(0.0, abs=1e-6)

    def test_empty_manifest_is_usage_error(self, capsys, tmp_path):
        manifest = tmp_path / "empty.jsonl"
        manifest.write_text("")
        code, _, _ = run(capsys, "batch", str(manifest))
        assert code == EXIT_USAGE

    def test_pooling_not_averaging(self, capsys, tmp_path, rng):
        # asymmetric fixtures: the clips differ in event count and hit rate,
        # so pooled TP/(TP+FN) differs from the mean of per-clip scores
        from stereoeval.spatial_render import RenderConfig, render_stereo

        def clip(name, seconds, render_track, score_track):
            source = burst_source(seconds * SR, SR, rng=rng)
            buf = render_stereo(source, render_track, RenderConfig(), SR)
            wav_path = tmp_path / f"{name}.wav"
            track_path = tmp_path / f"{name}.jsonl"
            write_wav(buf, wav_path)
            write_track(score_track, track_path)
            return {"audio": str(wav_path), "track": str(track_path)}

        good = make_track(np.linspace(250, 1050, 60))
        far_left = make_track([120.0] * 30, half_width=40)
        far_right = make_track([1160.0] * 30, half_width=40)
        entries = [
            clip("c1", 2, good, good),           # mostly TP, many events
            clip("c2", 1, far_left, far_right),  # all FN, fewer events
        ]
        manifest = tmp_path / "m2.jsonl"
        manifest.write_text("\n".join(json.dumps(e) for e in entries) + "\n")
        code, out, _ = run(capsys, "batch", str(manifest))
        assert code == EXIT_OK
        obj = json.loads(out)
        agg = obj["aggregate"]
        tp = sum(c["tp"] for c in obj["clips"])
        fn = sum(c["fn"] for c in obj["clips"])
        assert tp > 0 and fn > 0
        assert agg["av_align"] == pytest.approx(tp / (tp + fn))
        mean_of_scores = np.mean([c["score"] for c in obj["clips"]])
        assert agg["av_align"] != pytest.approx(mean_of_scores, abs=1e-3)


class TestDeterminism:
    def test_same_argv_same_stdout(self, capsys, oracle_clip):
        wav_path, track_path = oracle_clip
        argv = ["--json", "av-align", "--audio", wav_path, "--track", track_path,
                "--shuffle-baseline", "--seed", "3"]
        _, out1, _ = run(capsys, *argv)
        _, out2, _ = run(capsys, *argv)
        assert out1 == out2
