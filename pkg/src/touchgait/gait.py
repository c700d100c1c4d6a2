"""Adaptive gait reward: diagonal-pair synchrony weighted by a symmetricity score.

The reward for one control tick is

    r = 1/2 * sum over diagonal pairs of gamma * 1{c_i == c_j}
      + 1/4 * sum over lateral pairs of 1{c_i != c_j}

where gamma is 1 for a diagonal pair in stance and, for a pair in swing, the
task-gated symmetricity score of its current air time.  The symmetricity
score needs no external timing reference: each pair is judged against the
other pair's previous air time, so the policy is free to pick its own gait
frequency as long as the two diagonal pairs stay balanced.
"""

from __future__ import annotations

from dataclasses import dataclass, field

# Leg indexing used throughout: front-right, front-left, rear-right, rear-left.
FR, FL, RR, RL = 0, 1, 2, 3
LEG_NAMES = ("fr", "fl", "rr", "rl")

DIAG_PAIRS = ((FR, RL), (FL, RR))
LAT_PAIRS = ((FR, FL), (FL, RL), (RL, RR), (RR, FR))


@dataclass(frozen=True)
class SymParams:
    """Shape of the symmetricity score.

    ``alpha_tol`` is the tolerated relative overshoot of the reference air
    time, ``alpha1`` the reward slope per second of swing, and
    ``f_lb < 0 < f_ub`` the global score bounds.
    """

    alpha_tol: float = 0.2
    alpha1: float = 2.0
    f_ub: float = 1.0
    f_lb: float = -1.0

    def __post_init__(self):
        if self.alpha_tol <= 0.0 or self.alpha1 <= 0.0:
            raise ValueError("alpha_tol and alpha1 must be positive")
        if not -1.0 <= self.f_lb < 0.0 < self.f_ub <= 1.0:
            raise ValueError("need -1 <= f_lb < 0 < f_ub <= 1")


def symmetricity(t_curr: float, t_prev: float, t_prev_alt: float, p: SymParams) -> float:
    """Score the current pair's running air time against both previous ones.

    With t_diff = t_prev - t_prev_alt:

    * t_diff <= 0 (this pair swung shorter last cycle, or no reference yet):
      the score grows at slope alpha1 and saturates at f_ub -- long swings are
      encouraged outright.
    * t_diff > 0 (this pair swung longer last cycle): the same ramp holds only
      up to t_ext = t_tol - t_diff, where t_tol = (1 + alpha_tol) * t_prev_alt.
      It then falls linearly, crossing zero exactly at t_tol, and continues
      below zero at slope -v_ext / (t_ext - t_prev_alt), clamped at the
      dynamic lower bound f_dlb = (t_diff / (alpha_tol * t_prev_alt)) * f_lb
      and never below f_lb.  When t_ext <= t_prev_alt that slope is no longer
      meaningful and the score drops straight to the clamp past t_tol; this is
      the one discontinuity of the function.

    The larger the previous asymmetry, the earlier the decline, the steeper
    the fall and the deeper the floor.
    """
    if t_curr < 0.0 or t_prev < 0.0 or t_prev_alt < 0.0:
        raise ValueError("air times must be non-negative")

    t_diff = t_prev - t_prev_alt
    tol_width = p.alpha_tol * t_prev_alt
    # no usable reference yet (covers subnormal t_prev_alt underflowing to 0)
    if t_diff <= 0.0 or tol_width <= 0.0:
        return min(p.alpha1 * t_curr, p.f_ub)

    t_tol = (1.0 + p.alpha_tol) * t_prev_alt
    t_ext = t_tol - t_diff
    floor = max((t_diff / tol_width) * p.f_lb, p.f_lb)

    if t_curr <= t_ext:
        return min(p.alpha1 * t_curr, p.f_ub)
    v_ext = min(p.alpha1 * t_ext, p.f_ub)
    if t_curr <= t_tol:
        # decline from v_ext at t_ext to exactly 0 at t_tol; the floor only
        # binds when t_diff exceeds t_tol and the ramp region is gone entirely
        return max(v_ext * (t_tol - t_curr) / t_diff, floor)
    if t_ext <= t_prev_alt:
        return floor
    slope = -v_ext / (t_ext - t_prev_alt)
    return max(slope * (t_curr - t_tol), floor)


def gamma_sym(pair_in_contact: bool, f: float, alpha_task: float) -> float:
    """Diagonal-pair weight: 1 in stance; in swing the task-gated score.

    Only the positive part is rescaled by task performance -- negative scores
    pass through so the symmetry constraint keeps its full strength even when
    tracking is poor.
    """
    if not 0.0 <= alpha_task <= 1.0:
        raise ValueError("alpha_task must lie in [0, 1]")
    if pair_in_contact:
        return 1.0
    return alpha_task * f if f >= 0.0 else f


@dataclass
class PairTracker:
    """Air-time bookkeeping for one diagonal pair."""

    t_curr: float = 0.0  # running mean air time of the two feet while airborne
    t_prev: float = 0.0  # this pair's completed air time last cycle
    t_prev_alt: float = 0.0  # the other pair's completed air time last cycle
    was_airborne: bool = False


@dataclass
class GaitTracker:
    """Per-environment swing-phase state for both diagonal pairs.

    A pair is airborne only while *both* its feet are off the ground; its
    running air time is the mean of the two feet's individual air times.  On
    pair touchdown the completed time becomes this pair's t_prev and the other
    pair's reference t_prev_alt.  A velocity-command change wipes both
    references so the gait may re-time itself without penalty.
    """

    pairs: list[PairTracker] = field(default_factory=lambda: [PairTracker(), PairTracker()])
    foot_air: list[float] = field(default_factory=lambda: [0.0, 0.0, 0.0, 0.0])

    def update(self, contacts, dt: float, command_changed: bool = False):
        if dt <= 0.0:
            raise ValueError("dt must be positive")
        if command_changed:
            for pair in self.pairs:
                pair.t_prev = 0.0
                pair.t_prev_alt = 0.0

        for leg in range(4):
            if not contacts[leg]:
                self.foot_air[leg] += dt

        for idx, (i, j) in enumerate(DIAG_PAIRS):
            pair = self.pairs[idx]
            airborne = not contacts[i] and not contacts[j]
            if airborne:
                pair.t_curr = 0.5 * (self.foot_air[i] + self.foot_air[j])
            elif pair.was_airborne:
                completed = pair.t_curr
                pair.t_prev = completed
                self.pairs[1 - idx].t_prev_alt = completed
                pair.t_curr = 0.0
            pair.was_airborne = airborne

        for leg in range(4):
            if contacts[leg]:
                self.foot_air[leg] = 0.0

    def to_dict(self) -> dict:
        return {
            "foot_air": list(self.foot_air),
            "pairs": [
                {
                    "t_curr": p.t_curr,
                    "t_prev": p.t_prev,
                    "t_prev_alt": p.t_prev_alt,
                    "was_airborne": p.was_airborne,
                }
                for p in self.pairs
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GaitTracker":
        tracker = cls()
        tracker.foot_air = [float(v) for v in d["foot_air"]]
        tracker.pairs = [PairTracker(**p) for p in d["pairs"]]
        return tracker


def gait_reward(contacts, tracker: GaitTracker, alpha_task: float, p: SymParams) -> float:
    """Evaluate the per-tick gait reward from current contacts and air times."""
    c0, c1, c2, c3 = (bool(v) for v in contacts)
    diag_sum = 0.0
    for idx, (ci, cj) in enumerate(((c0, c3), (c1, c2))):
        if ci != cj:
            continue
        if ci:
            diag_sum += 1.0
        else:
            pair = tracker.pairs[idx]
            f = symmetricity(pair.t_curr, pair.t_prev, pair.t_prev_alt, p)
            diag_sum += gamma_sym(False, f, alpha_task)
    lat_sum = (c0 != c1) + (c1 != c3) + (c3 != c2) + (c2 != c0)
    return 0.5 * diag_sum + 0.25 * lat_sum
