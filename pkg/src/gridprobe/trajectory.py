"""Trajectory recording, canonical JSON persistence, and deterministic replay.

A trajectory is a list of room segments (level file + seed + action script)
plus planted probes. Replaying the same file always reproduces the same world
at every step; probes surface exactly at their recorded steps.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .levels import LevelSpec, parse_level
from .observe import Observation, observe
from .probes import (
    ANSWER_TYPES,
    CANNOT_DETERMINE,
    GroundTruth,
    Probe,
    compute_ground_truth,
    get_probe_type,
    registered_probe_types,
)
from .world import Action, World, init_world, step as world_step

_ABSTAIN_LITERALS = {"can't determine", "cannot determine"}

# default probe category by probe type; overridable via metadata["category"]
_DEFAULT_CATEGORY = {
    "presence": "P",
    "count": "P",
    "state": "P",
    "location": "P",
    "causal": "C",
    "uncertainty": "U",
}


class TrajectoryError(ValueError):
    """Trajectory file failed validation; message carries the offending field."""


@dataclass
class Segment:
    level_file: str
    seed: int
    actions: list[int] = field(default_factory=list)


@dataclass
class PlantedProbe:
    segment: int
    step: int
    probe_type: str
    question: str
    ground_truth: object = None  # literal; None when metadata carries a query
    metadata: dict = field(default_factory=dict)

    @property
    def category(self) -> str:
        return self.metadata.get("category", _DEFAULT_CATEGORY.get(self.probe_type, "X"))

    def probe_id(self, index: int) -> str:
        return self.metadata.get("id", f"s{self.segment}_t{self.step}_p{index}")


@dataclass
class Trajectory:
    segments: list[Segment] = field(default_factory=list)
    probes: list[PlantedProbe] = field(default_factory=list)

    def validate(self, base_dir: str = ".") -> None:
        if not self.segments:
            raise TrajectoryError("trajectory has no segments")
        for i, seg in enumerate(self.segments):
            path = os.path.join(base_dir, seg.level_file)
            if not os.path.exists(path):
                raise TrajectoryError(f"segment {i}: level file {seg.level_file!r} not found")
            for j, a in enumerate(seg.actions):
                if not isinstance(a, int) or not 0 <= a <= max(Action):
                    raise TrajectoryError(f"segment {i}: action {j} out of range: {a!r}")
        for k, probe in enumerate(self.probes):
            if not 0 <= probe.segment < len(self.segments):
                raise TrajectoryError(f"probe {k}: segment {probe.segment} out of range")
            n = len(self.segments[probe.segment].actions)
            if not 0 <= probe.step <= n:
                raise TrajectoryError(
                    f"probe {k}: step {probe.step} outside segment action range 0..{n}"
                )
            if probe.probe_type not in registered_probe_types():
                raise TrajectoryError(f"probe {k}: unregistered probe type {probe.probe_type!r}")
            if probe.ground_truth is None and "query" not in probe.metadata:
                raise TrajectoryError(
                    f"probe {k}: needs either a literal ground_truth or metadata.query"
                )


# ---------------------------------------------------------------------------
# persistence (canonical: UTF-8, 2-space indent, sorted keys)


def trajectory_to_dict(traj: Trajectory) -> dict:
    return {
        "segments": [
            {"level_file": s.level_file, "seed": s.seed, "actions": list(s.actions)}
            for s in traj.segments
        ],
        "probes": [
            {
                "segment": p.segment,
                "step": p.step,
                "probe_type": p.probe_type,
                "question": p.question,
                "ground_truth": p.ground_truth,
                "metadata": p.metadata,
            }
            for p in traj.probes
        ],
    }


def trajectory_from_dict(data: dict) -> Trajectory:
    try:
        segments = [
            Segment(
                level_file=s["level_file"],
                seed=int(s["seed"]),
                actions=list(s["actions"]),
            )
            for s in data["segments"]
        ]
        probes = [
            PlantedProbe(
                segment=int(p["segment"]),
                step=int(p["step"]),
                probe_type=p["probe_type"],
                question=p["question"],
                ground_truth=p.get("ground_truth"),
                metadata=dict(p.get("metadata", {})),
            )
            for p in data.get("probes", [])
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise TrajectoryError(f"malformed trajectory JSON: {exc}") from None
    return Trajectory(segments=segments, probes=probes)


def dumps_trajectory(traj: Trajectory) -> str:
    return json.dumps(trajectory_to_dict(traj), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def save_trajectory(traj: Trajectory, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_trajectory(traj))


def load_trajectory(path: str) -> Trajectory:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise TrajectoryError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return trajectory_from_dict(data)


# ---------------------------------------------------------------------------
# ground truth resolution


def resolve_truth(
    probe: PlantedProbe, world: World, obs_history: list[Observation]
) -> GroundTruth:
    """Literal truths (operator-verified) are authoritative; query-backed
    truths are recomputed from the replayed world."""
    answer_type = probe.probe_type if probe.probe_type in ANSWER_TYPES else "state"
    if "query" in probe.metadata:
        p = Probe(
            id="q",
            category=probe.category,
            answer_type=answer_type,
            question=probe.question,
            query=probe.metadata["query"],
        )
        return compute_ground_truth(p, world, obs_history)
    value = probe.ground_truth
    if isinstance(value, str) and value.lower() in _ABSTAIN_LITERALS:
        return GroundTruth(value=CANNOT_DETERMINE, answer_type=answer_type)
    return GroundTruth(value=value, answer_type=answer_type)


def grade_response(probe: PlantedProbe, truth: GroundTruth, response: str) -> str:
    """Verdict via the probe type's registered evaluator."""
    return get_probe_type(probe.probe_type).evaluate(truth, response)


# ---------------------------------------------------------------------------
# replay


@dataclass
class ReplayEvent:
    segment: int
    step: int  # step index within the segment
    world: World
    obs_history: list[Observation]  # cross-segment, for the memory serializer
    due_probes: list[tuple[PlantedProbe, GroundTruth]]


def replay(traj: Trajectory, base_dir: str = ".") -> Iterator[ReplayEvent]:
    """Deterministically replay; yields one event per (segment, step) with any
    probes planted there. Inventory carries forward across segments; the
    observation narrative accumulates across the whole trajectory."""
    traj.validate(base_dir)
    by_pos: dict[tuple[int, int], list[PlantedProbe]] = {}
    for probe in traj.probes:
        by_pos.setdefault((probe.segment, probe.step), []).append(probe)

    obs_history: list[Observation] = []
    inventory = None
    for si, seg in enumerate(traj.segments):
        level = _load_level(os.path.join(base_dir, seg.level_file))
        world = init_world(level, seg.seed)
        world.inventory = inventory
        obs_history.append(observe(world))
        yield _event(si, 0, world, obs_history, by_pos)
        for t, action in enumerate(seg.actions, start=1):
            world = world_step(world, action)
            obs_history.append(observe(world))
            yield _event(si, t, world, obs_history, by_pos)
        inventory = world.inventory


def _event(si: int, t: int, world: World, obs_history, by_pos) -> ReplayEvent:
    due = []
    for probe in by_pos.get((si, t), []):
        due.append((probe, resolve_truth(probe, world, obs_history)))
    return ReplayEvent(segment=si, step=t, world=world, obs_history=list(obs_history), due_probes=due)


def _load_level(path: str) -> LevelSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_level(fh.read())


def final_world(traj: Trajectory, base_dir: str = ".") -> World:
    last: Optional[World] = None
    for ev in replay(traj, base_dir):
        last = ev.world
    assert last is not None
    return last


# ---------------------------------------------------------------------------
# recorder


class RecorderSession:
    """Single-writer session for live navigation and probe planting.

    Undo is history-replay: the segment's action list is truncated and the
    world recomputed from the segment's initial state.
    """

    def __init__(self, level_file: str, seed: int, base_dir: str = "."):
        self.base_dir = base_dir
        self.segments: list[Segment] = []
        self.probes: list[PlantedProbe] = []
        self._seg_start_worlds: list[World] = []
        self._carry_obs: list[Observation] = []  # history from finished segments
        self.world: Optional[World] = None
        self.obs_history: list[Observation] = []
        self.new_segment(level_file, seed)

    @property
    def segment_index(self) -> int:
        return len(self.segments) - 1

    @property
    def step_index(self) -> int:
        return len(self.segments[-1].actions)

    def new_segment(self, level_file: str, seed: int) -> None:
        level = _load_level(os.path.join(self.base_dir, level_file))
        start = init_world(level, seed)
        if self.world is not None:
            start.inventory = self.world.inventory
            self._carry_obs = list(self.obs_history)
        self.segments.append(Segment(level_file=level_file, seed=seed))
        self._seg_start_worlds.append(start.copy())
        self.world = start
        self.obs_history = self._carry_obs + [observe(start)]

    def append(self, action: Action | int) -> str:
        """Apply one action; returns the event narration."""
        self.world = world_step(self.world, action)
        self.segments[-1].actions.append(int(action))
        self.obs_history.append(observe(self.world))
        return self.world.events[-1]

    def undo(self) -> str:
        """Remove the last action of the current segment; no-op when empty."""
        actions = self.segments[-1].actions
        if not actions:
            return "Nothing to undo in this segment."
        actions.pop()
        world = self._seg_start_worlds[-1].copy()
        self.obs_history = self._carry_obs + [observe(world)]
        for action in actions:
            world = world_step(world, action)
            self.obs_history.append(observe(world))
        self.world = world
        return "Undid the last action."

    def plant(
        self,
        probe_type: str,
        question: str,
        ground_truth: object = None,
        metadata: Optional[dict] = None,
    ) -> PlantedProbe:
        probe = PlantedProbe(
            segment=self.segment_index,
            step=self.step_index,
            probe_type=probe_type,
            question=question,
            ground_truth=ground_truth,
            metadata=dict(metadata or {}),
        )
        if probe.probe_type not in registered_probe_types():
            raise TrajectoryError(f"unregistered probe type {probe_type!r}")
        if ground_truth is None and "query" not in probe.metadata:
            raise TrajectoryError("probe needs a literal ground_truth or metadata.query")
        self.probes.append(probe)
        return probe

    def finalize(self) -> Trajectory:
        traj = Trajectory(
            segments=[Segment(s.level_file, s.seed, list(s.actions)) for s in self.segments],
            probes=list(self.probes),
        )
        traj.validate(self.base_dir)
        return traj
