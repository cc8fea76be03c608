import colorsys
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neucf.errors import CollinearPoints, OutOfFrame
from neucf.vision import (
    AffineMap,
    RasterImage,
    SegmentationConfig,
    WorkspaceCalib,
    apply_affine,
    estimate_affine,
    load_calibration,
    pixel_to_world,
    read_ppm,
    rgb_to_hsv,
    save_calibration,
    segment_beacons,
    world_to_pixel,
    write_ppm,
)

TRI = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]


def solve_affine_6x6(src, dst):
    """Independent oracle: one 6x6 linear solve for all affine parameters."""
    rows, rhs = [], []
    for (x, y), (xp, yp) in zip(src, dst):
        rows.append([x, y, 1, 0, 0, 0])
        rhs.append(xp)
        rows.append([0, 0, 0, x, y, 1])
        rhs.append(yp)
    a00, a01, b00, a10, a11, b10 = np.linalg.solve(np.array(rows), np.array(rhs))
    return AffineMap(a00, a01, a10, a11, b00, b10)


class TestAffine:
    def test_identity(self):
        m = estimate_affine(TRI, TRI)
        assert np.allclose(m.linear(), np.eye(2), atol=1e-12)
        assert np.allclose(m.offset(), 0, atol=1e-12)

    def test_pure_translation(self):
        dst = [(x + 5, y + 7) for x, y in TRI]
        m = estimate_affine(TRI, dst)
        assert np.allclose(m.linear(), np.eye(2), atol=1e-12)
        assert np.allclose(m.offset(), [5, 7], atol=1e-12)

    def test_half_scale_matches_6x6_oracle(self):
        src = [(0.0, 0.0), (2.0, 0.0), (0.0, 2.0)]
        m = estimate_affine(src, TRI)
        oracle = solve_affine_6x6(src, TRI)
        for attr in ("a00", "a01", "a10", "a11", "b00", "b10"):
            assert getattr(m, attr) == pytest.approx(getattr(oracle, attr), abs=1e-12)
        assert apply_affine(m, (2.0, 0.0)) == pytest.approx((1.0, 0.0), abs=1e-12)

    def test_apply_identity_and_translation(self):
        assert apply_affine(AffineMap.identity(), (3.0, 4.0)) == (3.0, 4.0)
        m = AffineMap(1, 0, 0, 1, 5, 7)
        assert apply_affine(m, (0.0, 0.0)) == (5.0, 7.0)

    def test_collinear_rejected(self):
        with pytest.raises(CollinearPoints):
            estimate_affine([(0, 0), (1, 1), (2, 2)], TRI)

    def test_singular_map_rejected(self):
        with pytest.raises(ValueError):
            AffineMap(1, 0, 2, 0, 0, 0)

    @given(
        pts=st.lists(
            st.tuples(st.floats(-50, 50), st.floats(-50, 50)), min_size=6, max_size=6
        )
    )
    @settings(max_examples=60)
    def test_fit_reproduces_correspondences(self, pts):
        src, dst = pts[:3], pts[3:]
        for triple in (src, dst):  # both triples must span the plane for an invertible map
            m = np.column_stack([np.array(triple), np.ones(3)])
            if abs(np.linalg.det(m)) < 1e-2:
                return
        fitted = estimate_affine(src, dst)
        for s, d in zip(src, dst):
            assert apply_affine(fitted, s) == pytest.approx(d, abs=1e-9)


class TestWorkspaceMapping:
    def test_origin(self):
        assert pixel_to_world(WorkspaceCalib(), (0.0, 0.0)) == (0.0, 0.0)

    def test_far_corner_is_workspace_size(self):
        c = WorkspaceCalib()
        assert pixel_to_world(c, (c.x_max_prime, c.y_max_prime)) == (52.0, 47.0)

    def test_linearity_midpoint(self):
        c = WorkspaceCalib()
        assert pixel_to_world(c, (c.x_max_prime / 2, 0.0)) == (26.0, 0.0)

    def test_out_of_frame(self):
        c = WorkspaceCalib()
        with pytest.raises(OutOfFrame):
            pixel_to_world(c, (c.x_max_prime + 1.5, 0.0))
        # within one pixel of slack is tolerated
        pixel_to_world(c, (c.x_max_prime + 0.5, 0.0))

    def test_world_pixel_round_trip(self):
        c = WorkspaceCalib()
        p = world_to_pixel(c, (27.0, 35.0))
        assert pixel_to_world(c, p) == pytest.approx((27.0, 35.0), abs=1e-12)

    def test_positive_extents_required(self):
        with pytest.raises(ValueError):
            WorkspaceCalib(x_max_prime=0.0)

    def test_calibration_json_round_trip(self, tmp_path):
        m = AffineMap(1.1, 0.02, -0.01, 0.95, 3.0, -2.0)
        c = WorkspaceCalib(640, 480, 52, 47)
        save_calibration(tmp_path / "calib.json", m, c)
        m2, c2 = load_calibration(tmp_path / "calib.json")
        assert m2 == m
        assert c2 == c


class TestHsv:
    def test_pure_red(self):
        assert rgb_to_hsv((255, 0, 0)) == (0.0, 1.0, 1.0)

    def test_pure_green(self):
        assert rgb_to_hsv((0, 255, 0)) == (120.0, 1.0, 1.0)

    def test_gray_hue_convention(self):
        h, s, v = rgb_to_hsv((128, 128, 128))
        assert h == 0.0
        assert s == 0.0
        assert v == pytest.approx(128 / 255)

    @given(st.tuples(st.integers(0, 255), st.integers(0, 255), st.integers(0, 255)))
    @settings(max_examples=200)
    def test_round_trip_within_one_unit(self, rgb):
        h, s, v = rgb_to_hsv(rgb)
        back = colorsys.hsv_to_rgb(h / 360.0, s, v)
        for orig, rec in zip(rgb, back):
            assert abs(orig - rec * 255) <= 1.0

    def test_every_8bit_pixel_round_trips(self):
        """Exhaustive round trip of the vectorized converter over all 256^3
        pixels, against an independent numpy hsv->rgb inverse."""
        from neucf.vision import _hsv_planes

        lv = np.arange(256, dtype=np.uint8)
        g, b = np.meshgrid(lv, lv, indexing="ij")
        worst = 0.0
        for r in range(256):  # one 256x256 slice per red level keeps this fast
            img = np.stack([np.full_like(g, r), g, b], axis=-1)
            h, s, v = _hsv_planes(img)
            # standard sector-based inverse
            hp = (h / 60.0) % 6.0
            i = np.floor(hp).astype(int)
            f = hp - i
            p, q, t = v * (1 - s), v * (1 - s * f), v * (1 - s * (1 - f))
            rr = np.choose(i, [v, q, p, p, t, v])
            gg = np.choose(i, [t, v, v, q, p, p])
            bb = np.choose(i, [p, p, t, v, v, q])
            back = np.stack([rr, gg, bb], axis=-1) * 255.0
            worst = max(worst, float(np.abs(back - img.astype(np.float64)).max()))
        assert worst <= 1.0

    @given(st.tuples(st.integers(0, 255), st.integers(0, 255), st.integers(0, 255)))
    @settings(max_examples=100)
    def test_scalar_matches_vectorized(self, rgb):
        from neucf.vision import _hsv_planes

        h, s, v = rgb_to_hsv(rgb)
        planes = _hsv_planes(np.array([[rgb]], dtype=np.uint8))
        assert h == pytest.approx(float(planes[0][0, 0]), abs=1e-9)
        assert s == pytest.approx(float(planes[1][0, 0]), abs=1e-12)
        assert v == pytest.approx(float(planes[2][0, 0]), abs=1e-12)


class TestPpm:
    def test_round_trip(self, tmp_path):
        img = RasterImage.filled(7, 5, (10, 20, 30))
        img.pixels[2, 3] = (200, 100, 50)
        write_ppm(img, tmp_path / "x.ppm")
        back = read_ppm(tmp_path / "x.ppm")
        assert back.width == 7 and back.height == 5
        assert np.array_equal(back.pixels, img.pixels)

    def test_comment_handling(self, tmp_path):
        img = RasterImage.filled(2, 2)
        raw = b"P6\n# a comment\n2 2\n255\n" + img.pixels.tobytes()
        (tmp_path / "c.ppm").write_bytes(raw)
        back = read_ppm(tmp_path / "c.ppm")
        assert np.array_equal(back.pixels, img.pixels)


ORANGE = (255, 140, 0)
GREEN = (0, 200, 0)


class TestSegmentation:
    def test_black_image_empty(self):
        img = RasterImage.filled(64, 64, (0, 0, 0))
        assert segment_beacons(img) == []

    def test_single_orange_disc(self):
        img = RasterImage.filled(200, 200)
        img.draw_disc((100.0, 100.0), 40.0, ORANGE)
        blobs = segment_beacons(img)
        assert len(blobs) == 1
        b = blobs[0]
        assert b.color_class == "orange"
        assert math.dist(b.centroid, (100, 100)) <= 1.0
        assert abs(b.area - math.pi * 40**2) / (math.pi * 40**2) <= 0.03

    def test_orange_and_green(self):
        img = RasterImage.filled(200, 120)
        img.draw_disc((50.0, 60.0), 25.0, ORANGE)
        img.draw_disc((150.0, 60.0), 20.0, GREEN)
        blobs = segment_beacons(img)
        assert sorted(b.color_class for b in blobs) == ["green", "orange"]
        # sorted by descending area
        assert blobs[0].area >= blobs[1].area

    def test_area_filter_drops_specks(self):
        img = RasterImage.filled(200, 200)
        img.draw_disc((40.0, 40.0), 2.0, ORANGE)  # ~12 px << 0.1% of 40k
        assert segment_beacons(img) == []

    def test_literal_fifteen_percent_filter_rejects_balls(self):
        img = RasterImage.filled(200, 200)
        img.draw_disc((100.0, 100.0), 40.0, ORANGE)
        cfg = SegmentationConfig(min_area_fraction=0.15)
        assert segment_beacons(img, cfg) == []

    @given(
        cx=st.floats(20, 140),
        cy=st.floats(20, 100),
        radius=st.floats(10, 18),
    )
    @settings(max_examples=25, deadline=None)
    def test_centroid_recovery_anywhere(self, cx, cy, radius):
        img = RasterImage.filled(160, 120)
        img.draw_disc((cx, cy), radius, ORANGE)
        blobs = segment_beacons(img)
        assert len(blobs) == 1
        assert math.dist(blobs[0].centroid, (cx, cy)) <= 1.0
