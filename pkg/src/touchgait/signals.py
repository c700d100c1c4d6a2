"""Binary tactile signal pipeline: threshold, flip noise, latency, 40 Hz stream.

Mirrors what the real readout does to the simulated force maps before the
policy sees them: forces are binarised at a fixed threshold, a small fraction
of entries is flipped both ways, and frames arrive late by a per-episode
latency.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class PipelineConfig:
    force_threshold: float = 0.05  # N
    flip_rate: float = 0.005
    min_delay: float = 0.025  # s
    max_delay: float = 0.05
    sample_rate: float = 40.0  # Hz
    rng_seed: int = 0
    per_frame_delay: bool = False  # resample latency every frame instead of per episode

    def __post_init__(self):
        if not 0.0 <= self.flip_rate < 0.5:
            raise ValueError("flip_rate must lie in [0, 0.5)")
        if not 0.0 <= self.min_delay <= self.max_delay:
            raise ValueError("need 0 <= min_delay <= max_delay")
        if self.sample_rate <= 0.0:
            raise ValueError("sample_rate must be positive")


@dataclass
class TactileFrame:
    binary: np.ndarray  # rows x cols, entries in {0, 1}
    timestamp: float
    cold_start: bool = False


def binarize(force_values: np.ndarray, cfg: PipelineConfig, timestamp: float = 0.0) -> TactileFrame:
    """Entry is 1 iff its force reaches the simulation threshold."""
    binary = (np.asarray(force_values) >= cfg.force_threshold).astype(np.uint8)
    return TactileFrame(binary=binary, timestamp=timestamp)


def flip_noise(frame: TactileFrame, cfg: PipelineConfig, rng: np.random.Generator) -> TactileFrame:
    """Flip each entry independently with probability ``flip_rate`` (both ways)."""
    flips = rng.random(frame.binary.shape) < cfg.flip_rate
    return TactileFrame(
        binary=frame.binary ^ flips.astype(np.uint8),
        timestamp=frame.timestamp,
        cold_start=frame.cold_start,
    )


class DelayBuffer:
    """Per-stream latency model.

    ``push`` ingests one input frame and emits the frame the sensor would
    report at that instant: the newest input whose timestamp is at most
    ``t - d``, where d is drawn uniformly from [min_delay, max_delay] once per
    episode (or per frame when configured).  Before any input is old enough,
    an all-zero frame flagged ``cold_start`` is emitted.
    """

    # Tolerance for "timestamp <= t - d" so that exact multiples of the tick
    # are not lost to float rounding (keeps lag == ceil(d * rate) exact).
    _EPS = 1e-9

    def __init__(self, cfg: PipelineConfig, rng: np.random.Generator):
        self._cfg = cfg
        self._rng = rng
        self._frames: deque[TactileFrame] = deque()
        self._delay = self._draw_delay()

    def _draw_delay(self) -> float:
        if self._cfg.max_delay == self._cfg.min_delay:
            return self._cfg.min_delay
        return float(self._rng.uniform(self._cfg.min_delay, self._cfg.max_delay))

    @property
    def delay(self) -> float:
        return self._delay

    def reset(self):
        """New episode: clear the backlog and redraw the latency."""
        self._frames.clear()
        self._delay = self._draw_delay()

    def push(self, frame: TactileFrame) -> TactileFrame:
        if self._frames and frame.timestamp <= self._frames[-1].timestamp:
            raise ValueError("timestamps must be strictly increasing within a stream")
        self._frames.append(frame)
        if self._cfg.per_frame_delay:
            self._delay = self._draw_delay()

        cutoff = frame.timestamp - self._delay + self._EPS
        emitted = None
        for past in self._frames:
            if past.timestamp <= cutoff:
                emitted = past
            else:
                break
        # Any future cutoff exceeds t - max_delay, so once the *second* oldest
        # frame is older than that, the oldest can never be selected again.
        floor = frame.timestamp - self._cfg.max_delay - self._EPS
        while len(self._frames) >= 2 and self._frames[1].timestamp <= floor:
            self._frames.popleft()
        if emitted is None:
            zero = np.zeros_like(frame.binary)
            return TactileFrame(binary=zero, timestamp=frame.timestamp, cold_start=True)
        return TactileFrame(binary=emitted.binary, timestamp=frame.timestamp)


def frame_csv_header(rows: int, cols: int) -> list[str]:
    return ["timestamp"] + [f"taxel_{i}" for i in range(rows * cols)]


def write_frames_csv(path, frames: list[TactileFrame]):
    """One row per frame: timestamp then the binary map in row-major order."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        first = True
        for frame in frames:
            if first:
                writer.writerow(frame_csv_header(*frame.binary.shape))
                first = False
            writer.writerow([repr(frame.timestamp)] + [int(v) for v in frame.binary.reshape(-1)])


def read_frames_csv(path, rows: int, cols: int) -> list[TactileFrame]:
    frames = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != frame_csv_header(rows, cols):
            raise ValueError(f"unexpected frame CSV header in {path}")
        for row in reader:
            binary = np.array([int(v) for v in row[1:]], dtype=np.uint8).reshape(rows, cols)
            frames.append(TactileFrame(binary=binary, timestamp=float(row[0])))
    return frames
