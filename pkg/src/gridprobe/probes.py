"""Probe definitions, ground-truth computation from simulator state, and the
rule-based grader.

Ground truth never comes from testimony text: under the default conflict
policy, direct observation of the simulator state is authoritative.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from .observe import Observation, ego_to_world
from .world import Action, World, simulate

CATEGORIES = ("P", "M", "C", "U", "X")
ANSWER_TYPES = ("presence", "count", "state", "location", "causal", "uncertainty")


class CannotDetermine:
    """Distinguished ground-truth value for unanswerable probes."""

    _instance: Optional["CannotDetermine"] = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "CANNOT_DETERMINE"


CANNOT_DETERMINE = CannotDetermine()

GroundTruthValue = Union[str, int, dict, CannotDetermine]


class ProbeQueryError(ValueError):
    """The query is ill-posed for the given scope (distinct from unanswerable)."""


@dataclass
class GroundTruth:
    value: GroundTruthValue
    answer_type: str

    def render(self) -> str:
        """Canonical textual answer; grading this always yields 'correct'."""
        if isinstance(self.value, CannotDetermine):
            return "can't determine"
        if self.answer_type == "location":
            return f"steps_ahead={self.value['steps_ahead']}, lateral={self.value['lateral']}"
        return str(self.value)


@dataclass
class Probe:
    id: str
    category: str
    answer_type: str
    question: str
    query: Optional[dict] = None  # machine-computable ground truth
    literal: Optional[str] = None  # operator-recorded ground truth
    conflict_policy: str = "observation"
    segment: int = 0
    step: int = 0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if (self.query is None) == (self.literal is None):
            raise ValueError(f"probe {self.id}: exactly one of query/literal required")
        if self.category not in CATEGORIES:
            raise ValueError(f"probe {self.id}: bad category {self.category!r}")
        if self.answer_type not in ANSWER_TYPES:
            raise ValueError(f"probe {self.id}: bad answer_type {self.answer_type!r}")


# ---------------------------------------------------------------------------
# ground truth


def _state_of(obj) -> str:
    # WorldObject exposes state_token(); VisibleObject carries a plain field
    return obj.state_token() if hasattr(obj, "state_token") else obj.state


def _match(obj, kind: Optional[str], color: Optional[str], state: Optional[str] = None) -> bool:
    return (
        (kind is None or obj.kind == kind)
        and (color is None or obj.color == color)
        and (state is None or _state_of(obj) == state)
    )


def _scope_objects(query: dict, world: World, obs: Observation):
    """Yield (descriptor, steps_ahead, lateral) for objects in scope."""
    scope = query.get("scope", "fov")
    if scope == "fov":
        for o in obs.objects:
            yield o, o.steps_ahead, o.lateral
    elif scope == "room":
        for col, row, cell in world.iter_cells():
            if cell.obj is not None:
                yield cell.obj, None, None
    elif scope == "region":
        c0, r0, c1, r1 = query["region"]
        for col, row, cell in world.iter_cells():
            if cell.obj is not None and c0 <= col <= c1 and r0 <= row <= r1:
                yield cell.obj, None, None
    else:
        raise ProbeQueryError(f"unknown scope {scope!r}")


def compute_ground_truth(
    probe: Probe, world: World, obs_history: list[Observation]
) -> GroundTruth:
    """Evaluate the probe's query against the authoritative simulator state."""
    if probe.literal is not None:
        return GroundTruth(value=probe.literal, answer_type=probe.answer_type)
    query = probe.query
    assert query is not None
    obs = obs_history[-1] if obs_history else None
    op = query.get("op", probe.answer_type)

    handler = _REGISTRY.get(op)
    if handler is None:
        raise ProbeQueryError(f"unknown probe op {op!r}")
    value = handler.compute(query, world, obs, obs_history)
    return GroundTruth(value=value, answer_type=probe.answer_type)


def _compute_presence(query, world, obs, history) -> str:
    kind, color, state = query.get("kind"), query.get("color"), query.get("state")
    for obj, _, _ in _scope_objects(query, world, obs):
        if _match(obj, kind, color, state):
            return "yes"
    return "no"


def _compute_count(query, world, obs, history) -> int:
    kind, color, state = query.get("kind"), query.get("color"), query.get("state")
    return sum(
        1 for obj, _, _ in _scope_objects(query, world, obs) if _match(obj, kind, color, state)
    )


def _compute_state(query, world, obs, history) -> str:
    attribute = query.get("attribute", "state")
    if "at" in query:
        ahead, lateral = query["at"]
        col, row = ego_to_world(world, ahead, lateral)
        if not world.in_bounds(col, row) or world.cell(col, row).obj is None:
            raise ProbeQueryError(f"no object at steps_ahead={ahead}, lateral={lateral}")
        obj = world.cell(col, row).obj
    else:
        kind, color = query.get("kind"), query.get("color")
        matches = [o for o, _, _ in _scope_objects(query, world, obs) if _match(o, kind, color)]
        if len(matches) != 1:
            raise ProbeQueryError(
                f"state query for {color} {kind} matched {len(matches)} objects"
            )
        obj = matches[0]
    if attribute == "color":
        return obj.color
    if attribute == "kind":
        return obj.kind
    if attribute == "state":
        return _state_of(obj)
    raise ProbeQueryError(f"unknown attribute {attribute!r}")


def _compute_location(query, world, obs, history) -> dict:
    kind, color = query.get("kind"), query.get("color")
    matches = [
        (ahead, lateral)
        for obj, ahead, lateral in _scope_objects({**query, "scope": "fov"}, world, obs)
        if _match(obj, kind, color)
    ]
    if len(matches) != 1:
        raise ProbeQueryError(f"location query for {color} {kind} matched {len(matches)} objects")
    ahead, lateral = matches[0]
    return {"steps_ahead": ahead, "lateral": lateral}


def _compute_causal(query, world, obs, history) -> str:
    script = query.get("script", [])
    if isinstance(script, dict) and "wait" in script:
        script = [Action.WAIT] * int(script["wait"])
    future = simulate(world, script)
    check = query["check"]
    if "passable" in check:
        col, row = check["passable"]
        return "yes" if future.passable(col, row) else "no"
    if "fire_active" in check:
        col, row = check["fire_active"]
        ov = future.cell(col, row).overlay
        return "yes" if (ov is not None and ov.variant == "fire" and ov.active) else "no"
    if "flood_active" in check:
        col, row = check["flood_active"]
        ov = future.cell(col, row).overlay
        return "yes" if (ov is not None and ov.variant == "flood" and ov.active) else "no"
    if "door_state" in check:
        door = future.find_doors().get(check["door_state"])
        if door is None:
            raise ProbeQueryError(f"no door with id {check['door_state']!r}")
        return door.door_state
    if "object_at" in check:
        col, row = check["object_at"]
        cell_obj = future.cell(col, row).obj
        return f"{cell_obj.color} {cell_obj.kind}" if cell_obj is not None else "nothing"
    raise ProbeQueryError(f"unknown causal check {check!r}")


def _region_dynamic(world: World, region: tuple[int, int, int, int]) -> bool:
    """Whether mechanics can still change cells inside the region."""
    c0, r0, c1, r1 = region
    for col, row, cell in world.iter_cells():
        ov = cell.overlay
        if ov is None:
            continue
        if ov.variant == "river":
            return True  # rivers move objects arbitrarily far
        if not (c0 <= col <= c1 and r0 <= row <= r1):
            continue
        if ov.variant == "flood" and not ov.active:
            return True
        if ov.variant == "fire" and ov.active:
            return True
    return False


def _compute_uncertainty(query, world, obs, history):
    """CANNOT_DETERMINE unless every cell the fact depends on was observed and
    is static since that observation (or is visible right now)."""
    region = tuple(query["region"])
    c0, r0, c1, r1 = region
    cells_needed = {(c, r) for r in range(r0, r1 + 1) for c in range(c0, c1 + 1)}
    current_seen = set(history[-1].world_coords.values()) if history else set()
    ever_seen: set[tuple[int, int]] = set()
    for o in history:
        ever_seen.update(o.world_coords.values())

    if cells_needed <= current_seen:
        determinable = True
    elif cells_needed <= ever_seen and not _region_dynamic(world, region):
        determinable = True
    else:
        determinable = False
    if not determinable:
        return CANNOT_DETERMINE
    inner = dict(query.get("fact", {}))
    inner.setdefault("scope", "room")
    op = inner.get("op", "presence")
    handler = _REGISTRY.get(op)
    if handler is None:
        raise ProbeQueryError(f"unknown inner op {op!r}")
    return handler.compute(inner, world, obs, history)


# ---------------------------------------------------------------------------
# grading

_ANSWER_RE = re.compile(r"^\s*answer\s*:\s*(.+?)\s*$", re.IGNORECASE | re.MULTILINE)

_WORD_DIGITS = {
    "zero": 0, "one": 1, "two": 2, "three": 3, "four": 4, "five": 5,
    "six": 6, "seven": 7, "eight": 8, "nine": 9, "ten": 10, "eleven": 11,
    "twelve": 12, "thirteen": 13, "fourteen": 14, "fifteen": 15,
    "sixteen": 16, "seventeen": 17, "eighteen": 18, "nineteen": 19,
    "twenty": 20,
}

_ABSTAIN = {"can't determine", "cannot determine", "cant determine"}

YES = {"yes", "true", "y"}
NO = {"no", "false", "n"}


def extract_answer(text: str) -> Optional[str]:
    """Final ``ANSWER: <value>`` line, case-insensitive; None if absent."""
    matches = _ANSWER_RE.findall(text or "")
    return matches[-1].strip() if matches else None


def _norm_yesno(raw: str) -> Optional[str]:
    token = raw.lower().strip(" .\"'")
    if token in YES:
        return "yes"
    if token in NO:
        return "no"
    return None


def _norm_count(raw: str) -> Optional[int]:
    token = raw.lower().strip(" .\"'")
    if token in _WORD_DIGITS:
        return _WORD_DIGITS[token]
    m = re.search(r"-?\d+", token)
    return int(m.group()) if m else None


def _norm_location(raw: str) -> Optional[tuple[int, int]]:
    ints = re.findall(r"-?\d+", raw)
    if len(ints) >= 2:
        return int(ints[0]), int(ints[1])
    return None


def grade(answer_text: str, truth: GroundTruth, answer_type: Optional[str] = None) -> str:
    """Rule-based verdict: 'correct', 'hallucinated', or 'unparseable'."""
    answer_type = answer_type or truth.answer_type
    raw = extract_answer(answer_text)
    if raw is None:
        return "unparseable"
    lowered = raw.lower().strip(" .\"'")

    if isinstance(truth.value, CannotDetermine):
        return "correct" if lowered in _ABSTAIN else "hallucinated"
    if lowered in _ABSTAIN:
        # concrete fact answered with an abstention: not correct
        return "hallucinated"

    truth_yesno = _norm_yesno(str(truth.value)) if isinstance(truth.value, str) else None
    if answer_type == "presence" or truth_yesno is not None:
        norm = _norm_yesno(raw)
        if norm is None:
            return "unparseable"
        return "correct" if norm == truth_yesno else "hallucinated"
    if answer_type == "count":
        norm_count = _norm_count(raw)
        if norm_count is None:
            return "unparseable"
        return "correct" if norm_count == int(truth.value) else "hallucinated"
    if answer_type == "location":
        loc = _norm_location(raw)
        if loc is None:
            return "unparseable"
        expected = (truth.value["steps_ahead"], truth.value["lateral"])
        return "correct" if loc == expected else "hallucinated"
    # state / causal / uncertainty-with-concrete-truth: token match
    return "correct" if lowered == str(truth.value).lower() else "hallucinated"


# ---------------------------------------------------------------------------
# probe-type registry


@dataclass
class ProbeType:
    name: str
    compute: Callable  # (query, world, obs, obs_history) -> value
    evaluate: Callable  # (truth: GroundTruth, response: str) -> str verdict
    generate: Optional[Callable] = None  # (world, trajectory, step) -> (question, truth)


def _builtin(name: str, compute: Callable) -> ProbeType:
    return ProbeType(name=name, compute=compute, evaluate=lambda t, r: grade(r, t))


_REGISTRY: dict[str, ProbeType] = {}

for _name, _fn in (
    ("presence", _compute_presence),
    ("count", _compute_count),
    ("state", _compute_state),
    ("location", _compute_location),
    ("causal", _compute_causal),
    ("uncertainty", _compute_uncertainty),
):
    _REGISTRY[_name] = _builtin(_name, _fn)

BUILTIN_PROBE_TYPES = tuple(_REGISTRY)


def register_probe_plugin(
    name: str,
    generate: Callable,
    evaluate: Callable,
    compute: Optional[Callable] = None,
) -> ProbeType:
    """Add a probe type usable in trajectories and the recorder UI."""
    if name in _REGISTRY:
        raise ValueError(f"probe type {name!r} already registered")
    pt = ProbeType(name=name, compute=compute or (lambda *a: CANNOT_DETERMINE),
                   evaluate=evaluate, generate=generate)
    _REGISTRY[name] = pt
    return pt


def get_probe_type(name: str) -> ProbeType:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unregistered probe type {name!r}") from None


def registered_probe_types() -> tuple[str, ...]:
    return tuple(_REGISTRY)
