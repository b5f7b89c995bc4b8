"""Egocentric view extraction and the three textual serializers.

Egocentric coordinates: ``steps_ahead`` >= 0 in the facing direction,
``lateral`` in [-w//2, +w//2] with left negative. Cells behind walls (when
see_through_walls is off) and behind dark zones are rendered as ``??``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .levels import CODE_FOR_COLOR, CODE_FOR_KIND
from .world import DIR_VECTORS, World, WorldObject, _occlusion_transparent

UNKNOWN = "??"

OVERLAY_CODES = {
    "river": "vv",
    "fire": "ff",
    "flood": "ww",
    "pressure_plate": "pp",
    "dark_zone": "dd",
}

LEGEND_KINDS = (
    "K=key, B=ball, D=door, @=agent, #=wall, .=floor, "
    "X=box, O=boulder, G=goal, N=notice board, S=signpost, ?=unknown"
)
LEGEND_COLORS = "r=red, b=blue, g=green, y=yellow, p=purple, e=grey"
LEGEND_TILES = "vv=river, ff=fire (active), ww=flood (active), pp=pressure plate, dd=dark zone"


@dataclass
class VisibleObject:
    color: str
    kind: str
    state: str
    steps_ahead: int
    lateral: int


@dataclass
class Testimony:
    source: str  # notice_board | signpost
    text: str
    stated_accuracy: Optional[float] = None


@dataclass
class Observation:
    step_index: int
    agent_facing: str
    depth: int
    width: int
    # fov[ahead][lateral_index]; lateral_index 0 is the far left (-w//2)
    fov: list[list[str]]
    objects: list[VisibleObject] = field(default_factory=list)
    testimony: list[Testimony] = field(default_factory=list)
    # visible world coordinates keyed by (steps_ahead, lateral)
    world_coords: dict[tuple[int, int], tuple[int, int]] = field(default_factory=dict)
    last_event: str = ""

    def half_width(self) -> int:
        return self.width // 2

    def code_at(self, steps_ahead: int, lateral: int) -> str:
        return self.fov[steps_ahead][lateral + self.half_width()]


def ego_to_world(world: World, steps_ahead: int, lateral: int) -> tuple[int, int]:
    dc, dr = DIR_VECTORS[world.agent.facing]
    # right-hand lateral vector relative to facing
    lc, lr = -dr, dc
    return (
        world.agent.col + dc * steps_ahead + lc * lateral,
        world.agent.row + dr * steps_ahead + lr * lateral,
    )


def _cell_code(world: World, col: int, row: int) -> str:
    cell = world.cell(col, row)
    if (col, row) == (world.agent.col, world.agent.row):
        return "@."
    if cell.wall:
        return "##"
    if cell.obj is not None:
        return CODE_FOR_COLOR[cell.obj.color] + CODE_FOR_KIND[cell.obj.kind]
    if cell.overlay is not None:
        ov = cell.overlay
        if ov.variant in ("fire", "flood") and not ov.active:
            return ".."
        return OVERLAY_CODES[ov.variant]
    return ".."


def observe(world: World, view_size: Optional[tuple[int, int]] = None) -> Observation:
    """Extract the agent's field of view with occlusion, plus testimony."""
    depth, width = view_size or world.view_size
    half = width // 2
    visible: dict[tuple[int, int], bool] = {(0, 0): True}

    _transparent_cache: dict[tuple[int, int], bool] = {}

    def transparent(ahead: int, lat: int) -> bool:
        cached = _transparent_cache.get((ahead, lat))
        if cached is not None:
            return cached
        wc = ego_to_world(world, ahead, lat)
        result = world.in_bounds(*wc) and _occlusion_transparent(world, *wc)
        _transparent_cache[(ahead, lat)] = result
        return result

    # outward sweep: a cell is visible if a neighbour nearer the agent is
    # visible and transparent (mirrors minigrid-style shadow casting)
    for ahead in range(depth):
        for lat in sorted(range(-half, half + 1), key=abs):
            if (ahead, lat) in visible:
                continue
            toward = 0 if lat == 0 else (lat - 1 if lat > 0 else lat + 1)
            candidates = []
            if ahead > 0:
                candidates.append((ahead - 1, lat))
                candidates.append((ahead - 1, toward))
            if lat != 0:
                candidates.append((ahead, toward))
            visible[(ahead, lat)] = any(
                visible.get(c, False) and transparent(*c) for c in candidates
            )

    fov: list[list[str]] = []
    objects: list[VisibleObject] = []
    coords: dict[tuple[int, int], tuple[int, int]] = {}
    for ahead in range(depth):
        row_codes = []
        for lat in range(-half, half + 1):
            wc = ego_to_world(world, ahead, lat)
            if not visible.get((ahead, lat), False) or not world.in_bounds(*wc):
                row_codes.append(UNKNOWN)
                continue
            coords[(ahead, lat)] = wc
            row_codes.append(_cell_code(world, *wc))
            obj = world.cell(*wc).obj
            if obj is not None:
                objects.append(
                    VisibleObject(
                        color=obj.color,
                        kind=obj.kind,
                        state=obj.state_token(),
                        steps_ahead=ahead,
                        lateral=lat,
                    )
                )
        fov.append(row_codes)

    testimony = _collect_testimony(world, coords)
    return Observation(
        step_index=world.step_count,
        agent_facing=world.agent.facing,
        depth=depth,
        width=width,
        fov=fov,
        objects=objects,
        testimony=testimony,
        world_coords=coords,
        last_event=world.events[-1] if world.events else "",
    )


def _iter_testimony_cells(world: World):
    if world.testimony_positions is None:
        yield from world.iter_cells()
        return
    for col, row in world.testimony_positions:
        yield col, row, world.cell(col, row)


def _collect_testimony(world: World, coords: dict) -> list[Testimony]:
    in_fov = set(coords.values())
    testimony = []
    for col, row, cell in _iter_testimony_cells(world):
        obj = cell.obj
        if obj is None:
            continue
        if obj.kind == "notice_board":
            testimony.append(Testimony("notice_board", obj.text))
        elif obj.kind == "signpost" and (col, row) in in_fov:
            testimony.append(Testimony("signpost", obj.text, obj.stated_accuracy))
    return testimony


# ---------------------------------------------------------------------------
# serializers


def _kind_label(kind: str) -> str:
    return kind.replace("_", " ")


def serialize_symbolic(obs: Observation) -> str:
    lines = [f"Observation at step {obs.step_index}, facing {obs.agent_facing}."]
    visible = [o for o in obs.objects if not (o.steps_ahead == 0 and o.lateral == 0)]
    if visible:
        lines.append("Visible objects:")
        for o in visible:
            lines.append(
                f"- {o.color} {_kind_label(o.kind)} ({o.state}) at "
                f"steps_ahead={o.steps_ahead}, lateral={o.lateral}"
            )
    else:
        lines.append("No objects visible.")
    lines.extend(_testimony_lines(obs))
    return "\n".join(lines) + "\n"


def serialize_grid(obs: Observation) -> str:
    half = obs.half_width()
    header_cells = [f"L{abs(l)}" if l < 0 else (f"R{l}" if l > 0 else "0") for l in range(-half, half + 1)]
    label_w = len(f"ahead {obs.depth - 1}")
    lines = [" " * label_w + "  " + " ".join(f"{h:>2}" for h in header_cells)]
    for ahead in range(obs.depth):
        row = obs.fov[ahead]
        lines.append(f"{f'ahead {ahead}':<{label_w}}  " + " ".join(row))
    lines.append(f"Legend: {LEGEND_KINDS}")
    lines.append(f"Colors: {LEGEND_COLORS}")
    lines.append(f"Tiles: {LEGEND_TILES}")
    lines.extend(_testimony_lines(obs))
    return "\n".join(lines) + "\n"


def serialize_memory(history: list[Observation]) -> str:
    """Narrative of prior steps plus the current observation in both formats."""
    if not history:
        raise ValueError("memory serialization needs a non-empty observation history")
    current = history[-1]
    lines = []
    narrative = [o.last_event for o in history[:-1] if o.last_event]
    if current.last_event:
        narrative.append(current.last_event)
    if narrative:
        lines.append("What happened so far: " + " ".join(narrative))
    else:
        lines.append("Nothing has happened yet.")
    lines.append("")
    lines.append(serialize_symbolic(current).rstrip("\n"))
    lines.append("")
    lines.append(serialize_grid(current).rstrip("\n"))
    return "\n".join(lines) + "\n"


def _testimony_lines(obs: Observation) -> list[str]:
    if not obs.testimony:
        return []
    lines = ["Testimony:"]
    for t in obs.testimony:
        if t.source == "signpost" and t.stated_accuracy is not None:
            lines.append(f'- signpost (stated accuracy {t.stated_accuracy:.0%}): "{t.text}"')
        else:
            lines.append(f'- {_kind_label(t.source)}: "{t.text}"')
    return lines


SERIALIZERS = ("symbolic", "grid", "memory")


def render(serializer: str, history: list[Observation]) -> str:
    """Render the latest observation (or full history for memory)."""
    if serializer == "symbolic":
        return serialize_symbolic(history[-1])
    if serializer == "grid":
        return serialize_grid(history[-1])
    if serializer == "memory":
        return serialize_memory(history)
    raise ValueError(f"unknown serializer {serializer!r}")
