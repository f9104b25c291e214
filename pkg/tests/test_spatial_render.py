import numpy as np
import pytest

from stereoeval.audio_io import linear_resample
from stereoeval.spatial_render import (
    RenderConfig,
    constant_power_gains,
    pan_curve,
    render_stereo,
)
from stereoeval.track_io import bbox_center_x_normalized

from conftest import burst_source, make_track

SR = 44100


class TestConstantPowerGains:
    def test_center(self):
        gl, gr = constant_power_gains(0.0)
        assert gl == pytest.approx(np.sqrt(2) / 2, abs=1e-12)
        assert gr == pytest.approx(np.sqrt(2) / 2, abs=1e-12)

    def test_hard_left(self):
        gl, gr = constant_power_gains(-1.0)
        assert gl == pytest.approx(1.0, abs=1e-12)
        assert gr == pytest.approx(0.0, abs=1e-15)

    def test_hard_right(self):
        gl, gr = constant_power_gains(1.0)
        assert gl == pytest.approx(0.0, abs=1e-15)
        assert gr == pytest.approx(1.0, abs=1e-12)

    def test_power_preserved_everywhere(self):
        for p in np.linspace(-1, 1, 101):
            gl, gr = constant_power_gains(p)
            assert gl * gl + gr * gr == pytest.approx(1.0, abs=1e-6)

    def test_negating_pan_swaps_gains_exactly(self):
        for p in np.linspace(-1, 1, 41):
            gl, gr = constant_power_gains(p)
            gl2, gr2 = constant_power_gains(-p)
            assert gl2 == gr and gr2 == gl

    def test_out_of_range_clamped(self):
        assert constant_power_gains(5.0) == constant_power_gains(1.0)


class TestPanCurve:
    def test_static_centered_box_is_zero(self):
        track = make_track([640.0] * 30)
        curve = pan_curve(track, SR, SR, smoothing=0)
        np.testing.assert_array_equal(curve, 0.0)

    def test_sweep_is_monotone(self):
        centers = np.linspace(80, 1200, 60)
        track = make_track(centers)
        curve = pan_curve(track, SR, 2 * SR, smoothing=0)
        assert (np.diff(curve) >= 0).all()
        assert curve[0] < 0 < curve[-1]

    def test_no_smoothing_matches_interpolation_oracle(self):
        centers = [100.0, 700.0, 400.0, 1200.0]
        track = make_track(centers, fps=2.0)
        n = SR
        curve = pan_curve(track, SR, n, smoothing=0)
        times = np.array([e.t for e in track.entries])
        pans = np.array(
            [bbox_center_x_normalized(e.box, track.frame_width) for e in track.entries]
        )
        t_axis = (np.arange(n) + 0.5) / SR
        expected = np.interp(t_axis, times, pans)
        np.testing.assert_allclose(curve, expected, atol=1e-12)

    def test_boundary_hold(self):
        track = make_track([200.0, 1000.0], fps=2.0)  # entries at t=0, 0.5
        curve = pan_curve(track, SR, 2 * SR, smoothing=0)
        assert curve[-1] == curve[SR]  # held after the last entry

    def test_empty_track_rejected(self):
        from stereoeval.track_io import BBoxTrack

        track = BBoxTrack(frame_width=1280, frame_height=720, fps=30, entries=())
        with pytest.raises(ValueError):
            pan_curve(track, SR, 100, smoothing=0)


class TestRenderStereo:
    def test_centered_static_track(self, rng):
        source = rng.uniform(-0.5, 0.5, SR)
        track = make_track([640.0] * 30)
        out = render_stereo(source, track, RenderConfig(smoothing=0), SR)
        np.testing.assert_allclose(out.left, source / np.sqrt(2), atol=1e-7)
        np.testing.assert_allclose(out.right, source / np.sqrt(2), atol=1e-7)

    def test_hard_left_track_silences_right(self, rng):
        source = rng.uniform(-0.5, 0.5, SR)
        track = make_track([0.0] * 30, half_width=0)
        out = render_stereo(source, track, RenderConfig(smoothing=0), SR)
        np.testing.assert_array_equal(out.right, np.zeros(SR))

    def test_mirrored_pan_swaps_channels_exactly(self, rng):
        source = rng.uniform(-0.5, 0.5, SR).astype(np.float32).astype(np.float64)
        # dyadic centers keep the normalized pans exactly negated under mirroring
        centers = np.array([160.0, 320.0, 480.0, 640.0, 800.0, 960.0, 1120.0])
        mirror = 1280.0 - centers
        track = make_track(centers, half_width=60)
        track_m = make_track(mirror, half_width=60)
        a = render_stereo(source, track, RenderConfig(), SR)
        b = render_stereo(source, track_m, RenderConfig(), SR)
        np.testing.assert_array_equal(a.left, b.right)
        np.testing.assert_array_equal(a.right, b.left)

    def test_depth_attenuation(self, rng):
        source = np.full(SR, 0.25)
        near = make_track([640.0] * 30, depths=[1.0] * 30)
        far = make_track([640.0] * 30, depths=[4.0] * 30)
        cfg = RenderConfig(depth_exponent=1.0, smoothing=0)
        out_near = render_stereo(source, near, cfg, SR)
        out_far = render_stereo(source, far, cfg, SR)
        # both tracks normalize to their own median, so constant depth is unity gain
        np.testing.assert_allclose(out_near.left, out_far.left, atol=1e-7)
        # varying depth attenuates the far half relative to the near half
        ramp = make_track([640.0] * 30, depths=[1.0] * 15 + [4.0] * 15)
        out = render_stereo(source, ramp, cfg, SR)
        assert np.abs(out.left[-1000:]).mean() < np.abs(out.left[:1000]).mean()

    def test_swept_track_direction_follows_pan(self, rng):
        from stereoeval.spatial_align import localize
        from stereoeval.audio_io import StereoBuffer

        source = burst_source(2 * SR, SR, rng=rng)
        centers = np.concatenate(
            [np.full(30, 150.0), np.full(30, 1100.0)]
        )  # left then right
        track = make_track(centers)
        out = render_stereo(source, track, RenderConfig(), SR)
        dirs = localize(out)
        first = [w.direction for w in dirs.windows[:9] if w.active]
        second = [w.direction for w in dirs.windows[11:] if w.active]
        assert first and max(first) < 0
        assert second and min(second) > 0

    def test_output_clipped(self):
        source = np.full(1000, 1.0)
        track = make_track([0.0] * 5, half_width=0)
        out = render_stereo(source, track, RenderConfig(smoothing=0), SR)
        assert np.abs(out.left).max() <= 1.0

    def test_empty_source_rejected(self):
        track = make_track([640.0] * 5)
        with pytest.raises(ValueError):
            render_stereo(np.array([]), track, RenderConfig(), SR)
