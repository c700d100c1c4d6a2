import numpy as np
import pytest

from touchgait.tactile import (
    GRAVITY,
    ContactModel,
    CylinderPose,
    TaxelGrid,
    active_taxels,
    active_taxels_batch,
    ascii_map,
    contact_segment,
    force_from_active,
    force_map,
)

GRID = TaxelGrid()
MM = 1000.0


def oracle_active(grid, pose, half_w_mm, half_h_mm, step_mm=0.1):
    """Independent oracle: sample the contact segment densely and test each
    point against every (closed) rectangle."""
    p0, p1 = contact_segment(pose)
    p0, p1 = p0 * MM, p1 * MM
    n = max(int(np.ceil(np.linalg.norm(p1 - p0) / step_mm)), 1) + 1
    pts = p0 + np.linspace(0.0, 1.0, n)[:, None] * (p1 - p0)
    in_x = np.abs(pts[:, 0][:, None] - grid.centers_x[None, :]) <= half_w_mm  # (n, rows)
    in_y = np.abs(pts[:, 1][:, None] - grid.centers_y[None, :]) <= half_h_mm  # (n, cols)
    return np.einsum("nr,nc->rc", in_x, in_y) > 0


class TestGridInvariants:
    def test_defaults_fit_coverage(self):
        g = GRID
        assert g.rows * g.pitch_x <= g.coverage_x + g.pitch_x
        assert g.cols * g.pitch_y <= g.coverage_y + g.pitch_y

    def test_expanded_overlaps_and_intersect_does_not(self):
        assert GRID.expanded_w > GRID.pitch_x and GRID.expanded_h > GRID.pitch_y
        assert GRID.intersect_w < GRID.pitch_x and GRID.intersect_h < GRID.pitch_y

    def test_bad_geometry_rejected(self):
        with pytest.raises(ValueError):
            TaxelGrid(expanded_w=10.0)  # would not overlap neighbours
        with pytest.raises(ValueError):
            TaxelGrid(intersect_w=20.0)  # physical rects would overlap

    def test_pose_validation(self):
        with pytest.raises(ValueError):
            CylinderPose(radius=0.01)
        with pytest.raises(ValueError):
            CylinderPose(length=0.0)
        with pytest.raises(ValueError):
            CylinderPose(mass=-1.0)


class TestContactSegment:
    def test_centered(self):
        p0, p1 = contact_segment(CylinderPose(x=0, y=0, yaw=0, length=0.30))
        np.testing.assert_allclose(p0, [-0.15, 0.0], atol=1e-15)
        np.testing.assert_allclose(p1, [0.15, 0.0], atol=1e-15)

    def test_translated(self):
        p0, p1 = contact_segment(CylinderPose(x=0.01, y=0, yaw=0, length=0.30))
        np.testing.assert_allclose(p0, [-0.14, 0.0], atol=1e-15)
        np.testing.assert_allclose(p1, [0.16, 0.0], atol=1e-15)

    def test_rotated_matches_closed_form(self):
        yaw = np.pi / 6
        p0, p1 = contact_segment(CylinderPose(x=0, y=0, yaw=yaw, length=0.30))
        c, s = np.cos(yaw), np.sin(yaw)
        np.testing.assert_allclose(p0, [-0.15 * c, -0.15 * s])
        np.testing.assert_allclose(p1, [0.15 * c, 0.15 * s])
        # same as rotating the yaw=0 endpoints
        q0, q1 = contact_segment(CylinderPose(x=0, y=0, yaw=0, length=0.30))
        rot = np.array([[c, -s], [s, c]])
        np.testing.assert_allclose(p0, rot @ q0)
        np.testing.assert_allclose(p1, rot @ q1)


class TestActiveTaxels:
    def test_segment_on_center_line_stays_one_column_wide(self):
        # yaw=0 along the taxel center line at y=0: both rectangle sizes catch
        # exactly that one lateral line (17.5/2 = 8.75 mm < pitch_y)
        pose = CylinderPose(x=0.0, y=0.0, yaw=0.0, length=0.30)
        for model, half in (
            (ContactModel.intersect(), (GRID.intersect_w / 2, GRID.intersect_h / 2)),
            (ContactModel.expanded(), (GRID.expanded_w / 2, GRID.expanded_h / 2)),
        ):
            got = active_taxels(GRID, pose, model).astype(bool)
            want = oracle_active(GRID, pose, *half)
            assert np.array_equal(got, want)
            cols_hit = np.nonzero(got.any(axis=0))[0]
            assert list(cols_hit) == [6]
            assert got[:, 6].all()  # the 0.30 m segment covers every row

    def test_boundary_offset_couples_two_columns(self):
        # half a pitch off the center line reproduces the coupling: expanded
        # fires both neighbours, the physical rectangles fire neither
        pose = CylinderPose(x=0.0, y=GRID.pitch_y / 2 / MM, yaw=0.0, length=0.30)
        expanded = active_taxels(GRID, pose, ContactModel.expanded()).astype(bool)
        intersect = active_taxels(GRID, pose, ContactModel.intersect()).astype(bool)
        assert list(np.nonzero(expanded.any(axis=0))[0]) == [6, 7]
        assert intersect.sum() == 0
        want = oracle_active(GRID, pose, GRID.expanded_w / 2, GRID.expanded_h / 2)
        assert np.array_equal(expanded, want)

    def test_off_grid_pose_is_all_zero(self):
        pose = CylinderPose(x=1.0, y=1.0, yaw=0.3, length=0.30)
        for model in (ContactModel.intersect(), ContactModel.filtered(),
                      ContactModel.expanded()):
            assert active_taxels(GRID, pose, model).sum() == 0

    def test_boundary_touch_counts(self):
        # closed rectangles: an endpoint exactly on the edge is a hit (numbers
        # chosen exactly representable in binary)
        from touchgait.tactile import _segment_hits_rects

        hits = _segment_hits_rects(
            np.array([0.0, 0.0]), np.array([10.0, 0.0]),
            centers_x=np.array([14.0]), centers_y=np.array([0.0]),
            half_w=4.0, half_h=4.0,
        )
        assert hits[0, 0]
        # ... and 2^-20 beyond the edge is a miss
        hits = _segment_hits_rects(
            np.array([0.0, 0.0]), np.array([10.0 - 2.0**-20, 0.0]),
            centers_x=np.array([14.0]), centers_y=np.array([0.0]),
            half_w=4.0, half_h=4.0,
        )
        assert not hits[0, 0]

    @pytest.mark.parametrize("yaw", [0.0, 0.35, np.pi / 6, 1.1])
    @pytest.mark.parametrize("variant", ["intersect", "expanded"])
    def test_matches_point_sampling_oracle(self, yaw, variant):
        # rotated segments can clip a rectangle corner over a span shorter
        # than any finite sampling step, so the oracle runs at 0.005 mm and
        # the poses are seed-pinned
        rng = np.random.default_rng(7)
        model = ContactModel(variant=variant)
        half_w, half_h = GRID.half_extents(variant)
        for _ in range(4):
            pose = CylinderPose(
                x=float(rng.uniform(-0.08, 0.08)),
                y=float(rng.uniform(-0.06, 0.06)),
                yaw=yaw,
                length=float(rng.uniform(0.1, 0.4)),
            )
            got = active_taxels(GRID, pose, model).astype(bool)
            want = oracle_active(GRID, pose, half_w, half_h, step_mm=0.005)
            assert np.array_equal(got, want)

    def test_monotone_nesting(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            pose = CylinderPose(
                x=float(rng.uniform(-0.1, 0.1)),
                y=float(rng.uniform(-0.08, 0.08)),
                yaw=float(rng.uniform(-np.pi, np.pi)),
                length=float(rng.uniform(0.1, 0.4)),
            )
            inner = active_taxels(GRID, pose, ContactModel.intersect())
            outer = active_taxels(GRID, pose, ContactModel.expanded())
            assert not np.any(inner & ~outer)

    def test_translation_equivariance(self):
        pose = CylinderPose(x=-0.02, y=0.013, yaw=0.4, length=0.2)
        shifted = CylinderPose(
            x=pose.x + GRID.pitch_x / MM, y=pose.y, yaw=pose.yaw, length=pose.length
        )
        a = active_taxels(GRID, pose, ContactModel.expanded())
        b = active_taxels(GRID, shifted, ContactModel.expanded())
        # shifting one pitch in +x moves the pattern one row up (modulo edges)
        assert np.array_equal(a[1:-1, :], b[2:, :])

    def test_yaw_mirror_symmetry(self):
        pose = CylinderPose(x=0.01, y=0.02, yaw=0.5, length=0.25)
        mirrored = CylinderPose(x=pose.x, y=-pose.y, yaw=-pose.yaw, length=pose.length)
        a = active_taxels(GRID, pose, ContactModel.expanded())
        b = active_taxels(GRID, mirrored, ContactModel.expanded())
        assert np.array_equal(a, b[:, ::-1])

    def test_batch_matches_single(self):
        rng = np.random.default_rng(11)
        poses = np.stack(
            [rng.uniform(-0.1, 0.1, 40), rng.uniform(-0.08, 0.08, 40),
             rng.uniform(-np.pi, np.pi, 40)], axis=1
        )
        for model in (ContactModel.intersect(), ContactModel.filtered(),
                      ContactModel.expanded()):
            batch = active_taxels_batch(GRID, poses, 0.3, model)
            for k in range(len(poses)):
                pose = CylinderPose(x=poses[k, 0], y=poses[k, 1], yaw=poses[k, 2], length=0.3)
                assert np.array_equal(batch[k], active_taxels(GRID, pose, model))

    def test_filtered_spreads_a_line_contact(self):
        pose = CylinderPose(x=0.0, y=0.0, yaw=0.0, length=0.30)
        base = active_taxels(GRID, pose, ContactModel.intersect())
        blurred = active_taxels(GRID, pose, ContactModel.filtered(1.0, 0.25))
        assert blurred.sum() > base.sum()
        assert not np.any(base & ~blurred)


class TestForceMap:
    def test_weight_spread_over_20_taxels(self):
        active = np.zeros((17, 13), dtype=np.uint8)
        active.reshape(-1)[:20] = 1
        fm = force_from_active(active, mass=1.45)
        per_taxel = 1.45 * GRAVITY / 20
        assert per_taxel == pytest.approx(0.7112, abs=5e-5)
        np.testing.assert_allclose(fm.values.reshape(-1)[:20], per_taxel)
        assert not fm.no_support

    def test_zero_mass(self):
        pose = CylinderPose(x=0, y=0, yaw=0, length=0.3, mass=0.0)
        fm = force_map(GRID, pose, ContactModel.expanded())
        assert np.all(fm.values == 0.0)
        assert not fm.no_support

    def test_light_object_below_threshold(self):
        active = np.zeros((17, 13), dtype=np.uint8)
        active.reshape(-1)[:6] = 1
        fm = force_from_active(active, mass=0.03)
        assert fm.values.max() == pytest.approx(0.04905, abs=1e-9)
        assert fm.values.max() < 0.05

    def test_no_support_flag(self):
        pose = CylinderPose(x=1.0, y=1.0, yaw=0.0, length=0.1, mass=1.0)
        fm = force_map(GRID, pose, ContactModel.expanded())
        assert fm.no_support
        assert np.all(fm.values == 0.0)

    def test_weight_conservation(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            pose = CylinderPose(
                x=float(rng.uniform(-0.08, 0.08)),
                y=float(rng.uniform(-0.06, 0.06)),
                yaw=float(rng.uniform(-np.pi, np.pi)),
                length=float(rng.uniform(0.1, 0.4)),
                mass=float(rng.uniform(0.5, 2.5)),
            )
            fm = force_map(GRID, pose, ContactModel.expanded())
            if fm.values.any():
                assert fm.values.sum() == pytest.approx(pose.mass * GRAVITY, rel=1e-9)


def test_ascii_map_render():
    mask = np.zeros((3, 4), dtype=bool)
    mask[0, 1] = True
    out = ascii_map(mask)
    assert out.splitlines() == ["....", "....", ".#.."]
