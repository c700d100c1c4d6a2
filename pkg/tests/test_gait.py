import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from touchgait.gait import (
    DIAG_PAIRS,
    FL,
    FR,
    LAT_PAIRS,
    RL,
    RR,
    GaitTracker,
    SymParams,
    gait_reward,
    gamma_sym,
    symmetricity,
)

P = SymParams()  # alpha_tol 0.2, alpha1 2.0, bounds [-1, 1]

times = st.floats(min_value=0.0, max_value=5.0, allow_nan=False)


class TestSymmetricity:
    def test_origin(self):
        assert symmetricity(0.0, 0.4, 0.4, P) == 0.0

    def test_short_reference_branch_caps(self):
        # slope 2.0 at 0.6 s would give 1.2; capped at the upper bound
        assert symmetricity(0.6, 0.3, 0.5, P) == 1.0

    def test_zero_at_tolerance_time(self):
        # t_prev_alt 0.5, t_prev 0.6: t_tol = 0.6, so the score hits 0 there
        assert symmetricity(0.6, 0.6, 0.5, P) == 0.0

    def test_zero_reference_treated_as_branch_a(self):
        assert symmetricity(0.2, 0.3, 0.0, P) == pytest.approx(0.4)

    def test_negative_times_rejected(self):
        with pytest.raises(ValueError):
            symmetricity(-0.1, 0.3, 0.3, P)

    def test_decline_segment_values(self):
        # t_prev_alt 1.0, t_prev 1.1: t_tol 1.2, t_ext 1.1, v_ext = 1 (capped)
        t_tol = 1.2 * 1.0
        t_diff = 1.1 - 1.0
        for t_curr in (1.12, 1.15, 1.18):
            expected = 1.0 * (t_tol - t_curr) / t_diff
            assert symmetricity(t_curr, 1.1, 1.0, P) == pytest.approx(expected)

    def test_third_segment_slope_and_clamp(self):
        # small asymmetry: t_prev_alt 1.0, t_prev 1.05 -> t_ext 1.15 > 1.0
        t_prev, t_alt = 1.05, 1.0
        t_tol = 1.2 * t_alt
        t_ext = t_tol - (t_prev - t_alt)
        v_ext = 1.0  # 2.0 * 1.15 capped
        slope = -v_ext / (t_ext - t_alt)
        f_dlb = (t_prev - t_alt) / (0.2 * t_alt) * P.f_lb
        just_past = t_tol + 0.01
        assert symmetricity(just_past, t_prev, t_alt, P) == pytest.approx(
            max(slope * 0.01, f_dlb)
        )
        # far past the tolerance the dynamic floor binds
        assert symmetricity(5.0, t_prev, t_alt, P) == pytest.approx(max(f_dlb, P.f_lb))

    def test_degenerate_jump_to_floor(self):
        # t_diff well above alpha_tol * t_prev_alt: no segment-3 slope, the
        # score drops straight to the (saturated) floor past t_tol
        t_prev, t_alt = 0.75, 0.5  # t_ext = 0.35 < t_prev_alt
        t_tol = (1.0 + P.alpha_tol) * t_alt
        assert symmetricity(t_tol + 0.01, t_prev, t_alt, P) == P.f_lb

    @given(t_curr=times, t_prev=times, t_prev_alt=times)
    @settings(max_examples=500)
    def test_range_bounds(self, t_curr, t_prev, t_prev_alt):
        f = symmetricity(t_curr, t_prev, t_prev_alt, P)
        assert P.f_lb <= f <= P.f_ub

    @given(
        t_prev_alt=st.floats(min_value=0.05, max_value=2.0),
        d1=st.floats(min_value=1e-6, max_value=3.0),
        d2=st.floats(min_value=1e-6, max_value=3.0),
    )
    @settings(max_examples=300)
    def test_non_increasing_in_previous_asymmetry(self, t_prev_alt, d1, d2):
        lo, hi = sorted((d1, d2))
        t_curr = t_prev_alt
        f_lo = symmetricity(t_curr, t_prev_alt + lo, t_prev_alt, P)
        f_hi = symmetricity(t_curr, t_prev_alt + hi, t_prev_alt, P)
        assert f_hi <= f_lo + 1e-12

    @given(
        t_prev=st.floats(min_value=0.0, max_value=2.0),
        t_prev_alt=st.floats(min_value=0.05, max_value=2.0),
    )
    @settings(max_examples=200)
    def test_continuity_except_documented_jump(self, t_prev, t_prev_alt):
        t_diff = t_prev - t_prev_alt
        t_tol = (1.0 + P.alpha_tol) * t_prev_alt
        t_ext = t_tol - t_diff
        degenerate = t_diff > 0 and t_ext <= t_prev_alt
        # local Lipschitz bound: the segment slopes grow as t_diff shrinks
        lip = P.alpha1
        if t_diff > 0:
            v_ext = min(P.alpha1 * t_ext, P.f_ub) if t_ext > 0 else P.f_ub
            lip = max(lip, abs(v_ext) / t_diff)
            if t_ext > t_prev_alt:
                lip = max(lip, abs(v_ext) / (t_ext - t_prev_alt))
        step = 1e-6
        for t in np.arange(0.0, 2.5, 0.01):
            if degenerate and (t <= t_tol <= t + step or abs(t - t_tol) < 2 * step):
                continue
            a = symmetricity(t, t_prev, t_prev_alt, P)
            b = symmetricity(t + step, t_prev, t_prev_alt, P)
            assert abs(b - a) <= lip * step * 1.01 + 1e-12


class TestGammaSym:
    def test_contact_pair_scores_one(self):
        assert gamma_sym(True, -0.7, 0.3) == 1.0
        assert gamma_sym(True, 0.9, 0.0) == 1.0

    def test_positive_scaled_by_task(self):
        assert gamma_sym(False, 0.8, 0.5) == pytest.approx(0.4)

    def test_negative_passes_unscaled(self):
        assert gamma_sym(False, -0.3, 0.5) == -0.3

    def test_alpha_outside_unit_interval_rejected(self):
        with pytest.raises(ValueError):
            gamma_sym(False, 0.1, 1.5)


def trot_tracker(f_target=1.0):
    """Tracker whose swing pair evaluates to a chosen symmetricity score."""
    tracker = GaitTracker()
    for pair in tracker.pairs:
        pair.t_prev = 0.3
        pair.t_prev_alt = 0.3
    # branch A: f = min(2 * t_curr, 1)
    tracker.pairs[0].t_curr = f_target / P.alpha1
    tracker.pairs[1].t_curr = f_target / P.alpha1
    return tracker


class TestGaitReward:
    def test_all_contact(self):
        r = gait_reward([True, True, True, True], GaitTracker(), 1.0, P)
        assert r == 1.0

    def test_perfect_trot(self):
        # FR=RL=1 in stance, FL=RR swinging with f=1 and full task score
        tracker = trot_tracker(1.0)
        contacts = [True, False, False, True]
        assert gait_reward(contacts, tracker, 1.0, P) == pytest.approx(2.0)

    def test_pace_gait(self):
        contacts = [True, True, False, False]  # FR=FL=1, RR=RL=0
        assert gait_reward(contacts, GaitTracker(), 1.0, P) == pytest.approx(0.5)

    def test_bounds(self):
        rng = np.random.default_rng(4)
        for _ in range(500):
            contacts = rng.random(4) < 0.5
            tracker = GaitTracker()
            for pair in tracker.pairs:
                pair.t_curr = float(rng.uniform(0, 2))
                pair.t_prev = float(rng.uniform(0, 2))
                pair.t_prev_alt = float(rng.uniform(0, 2))
            r = gait_reward(contacts, tracker, float(rng.uniform(0, 1)), P)
            assert -1.0 <= r <= 2.0


class TestTracker:
    def test_constant_swing_accumulates(self):
        tracker = GaitTracker()
        for _ in range(10):
            tracker.update([False, True, True, False], dt=0.025)
        assert tracker.pairs[0].t_curr == pytest.approx(0.25)
        assert tracker.pairs[1].t_curr == 0.0

    def test_touchdown_records_and_crosses_reference(self):
        tracker = GaitTracker()
        for _ in range(12):
            tracker.update([False, True, True, False], dt=0.025)
        tracker.update([True, True, True, True], dt=0.025)
        assert tracker.pairs[0].t_prev == pytest.approx(0.3)
        assert tracker.pairs[0].t_curr == 0.0
        assert tracker.pairs[1].t_prev_alt == pytest.approx(0.3)

    def test_command_change_resets_references(self):
        tracker = GaitTracker()
        for _ in range(12):
            tracker.update([False, True, True, False], dt=0.025)
        tracker.update([True, True, True, True], dt=0.025)
        tracker.update([True, True, True, True], dt=0.025, command_changed=True)
        for pair in tracker.pairs:
            assert pair.t_prev == 0.0
            assert pair.t_prev_alt == 0.0
        # next evaluation takes the unconstrained branch
        assert symmetricity(0.4, tracker.pairs[0].t_prev,
                            tracker.pairs[0].t_prev_alt, P) == pytest.approx(0.8)

    def test_staggered_liftoff_uses_mean_air_time(self):
        tracker = GaitTracker()
        # FR lifts first, RL two ticks later
        tracker.update([False, True, True, True], dt=0.1)
        tracker.update([False, True, True, True], dt=0.1)
        tracker.update([False, True, True, False], dt=0.1)
        # FR has been up 0.3, RL 0.1 -> pair mean 0.2
        assert tracker.pairs[0].t_curr == pytest.approx(0.2)

    def test_state_roundtrip(self):
        tracker = GaitTracker()
        for k in range(9):
            tracker.update([k % 2 == 0, True, True, k % 3 == 0], dt=0.025)
        clone = GaitTracker.from_dict(tracker.to_dict())
        assert clone == tracker


def synthetic_sequence(kind: str, n_ticks: int, dt: float):
    """Equal-duty-factor contact scripts (one group always on the ground)."""
    contacts = np.ones((n_ticks, 4), dtype=bool)
    if kind == "trot":
        a_sw, b_sw = 0.3, 0.3
        groups = ((FR, RL), (FL, RR))
    elif kind == "trot_asym":
        a_sw, b_sw = 0.4, 0.2
        groups = ((FR, RL), (FL, RR))
    elif kind == "pace":
        a_sw, b_sw = 0.3, 0.3
        groups = ((FL, RL), (FR, RR))
    elif kind == "bound":
        a_sw, b_sw = 0.3, 0.3
        groups = ((FR, FL), (RR, RL))
    else:
        raise ValueError(kind)
    period = a_sw + b_sw
    for t in range(n_ticks):
        phase = (t * dt) % period
        swing = groups[0] if phase < a_sw else groups[1]
        for leg in swing:
            contacts[t, leg] = False
    return contacts


def accumulate_gait_reward(contacts, dt):
    tracker = GaitTracker()
    total = 0.0
    for row in contacts:
        tracker.update(row, dt)
        total += gait_reward(row, tracker, 1.0, P)
    return total


def test_trot_dominates_other_gaits():
    dt = 0.02
    n = int(10.0 / dt)
    totals = {
        kind: accumulate_gait_reward(synthetic_sequence(kind, n, dt), dt)
        for kind in ("trot", "trot_asym", "pace", "bound")
    }
    assert totals["trot"] > totals["trot_asym"]
    assert totals["trot"] > totals["pace"]
    assert totals["trot"] > totals["bound"]
