"""Deterministic grid simulator: terrain, objects, tile mechanics, agent actions.

The world is the single source of truth for every probe ground truth. All
mechanics resolve in a fixed phase order inside :func:`step` so that replaying
the same (level, seed, actions) always yields a bit-identical state.
"""

from __future__ import annotations

import copy
import random
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Optional

COLORS = ("red", "green", "blue", "yellow", "purple", "grey")
DIRECTIONS = ("north", "east", "south", "west")

# (dcol, drow) per facing; row 0 is the top row.
DIR_VECTORS = {
    "north": (0, -1),
    "east": (1, 0),
    "south": (0, 1),
    "west": (-1, 0),
}

PORTABLE_KINDS = frozenset({"key", "ball", "box"})
SOLID_KINDS = frozenset(
    {"wall", "door", "key", "ball", "box", "boulder", "notice_board", "signpost"}
)


class Action(IntEnum):
    TURN_LEFT = 0
    TURN_RIGHT = 1
    FORWARD = 2
    PICKUP = 3
    DROP = 4
    TOGGLE = 5
    WAIT = 6


@dataclass
class Pose:
    col: int
    row: int
    facing: str

    def __post_init__(self) -> None:
        if self.facing not in DIRECTIONS:
            raise ValueError(f"bad facing {self.facing!r}")

    def ahead(self, steps: int = 1) -> tuple[int, int]:
        dc, dr = DIR_VECTORS[self.facing]
        return self.col + dc * steps, self.row + dr * steps


@dataclass
class WorldObject:
    kind: str
    color: str = "grey"
    door_state: str = "closed"  # doors only: open | closed | locked
    condition: str = "dry"  # dry | wet | soaked
    wet_turns_remaining: int = 0
    text: str = ""  # notice_board / signpost only
    stated_accuracy: Optional[float] = None  # signposts only
    door_id: str = ""  # doors only, for plate links

    def is_wet(self) -> bool:
        return self.wet_turns_remaining > 0

    def state_token(self) -> str:
        if self.kind == "door":
            return self.door_state
        return self.condition


@dataclass
class TileOverlay:
    variant: str  # river | fire | flood | pressure_plate | dark_zone
    direction: str = "east"  # river
    speed: int = 1  # river
    active: bool = False  # fire / flood
    rise_step: int = 0  # flood; on fire: step at which flood water arrives
    flooded: bool = False  # fire: set once the flood has put it out
    effect: str = "continuous"  # pressure_plate: continuous | trigger
    link: str = ""  # pressure_plate -> door id
    fired: bool = False  # trigger plate


@dataclass
class Cell:
    wall: bool = False
    obj: Optional[WorldObject] = None
    overlay: Optional[TileOverlay] = None


@dataclass
class World:
    width: int
    height: int
    cells: list[list[Cell]]  # cells[row][col]
    agent: Pose
    inventory: Optional[WorldObject] = None
    step_count: int = 0
    seed: int = 0
    soak_duration: int = 3
    see_through_walls: bool = False
    view_size: tuple[int, int] = (8, 13)  # (depth, width)
    level_id: str = ""
    max_steps: int = 200
    history: list[int] = field(default_factory=list)
    # plain-prose event log, one entry per applied action (memory serializer)
    events: list[str] = field(default_factory=list)
    # static position indexes (overlays, doors, and testimony never move);
    # None means "unknown, fall back to a full grid scan"
    overlay_positions: Optional[tuple[tuple[int, int], ...]] = None
    door_positions: Optional[tuple[tuple[int, int], ...]] = None
    testimony_positions: Optional[tuple[tuple[int, int], ...]] = None

    def in_bounds(self, col: int, row: int) -> bool:
        return 0 <= col < self.width and 0 <= row < self.height

    def cell(self, col: int, row: int) -> Cell:
        return self.cells[row][col]

    def iter_cells(self) -> Iterable[tuple[int, int, Cell]]:
        for row in range(self.height):
            for col in range(self.width):
                yield col, row, self.cells[row][col]

    def iter_overlay_cells(self) -> Iterable[tuple[int, int, Cell]]:
        if self.overlay_positions is None:
            for col, row, cell in self.iter_cells():
                if cell.overlay is not None:
                    yield col, row, cell
            return
        for col, row in self.overlay_positions:
            yield col, row, self.cells[row][col]

    def find_doors(self) -> dict[str, WorldObject]:
        doors = {}
        if self.door_positions is None:
            candidates = ((cell.obj) for _, _, cell in self.iter_cells())
        else:
            candidates = (self.cells[row][col].obj for col, row in self.door_positions)
        for obj in candidates:
            if obj is not None and obj.kind == "door" and obj.door_id:
                doors[obj.door_id] = obj
        return doors

    def passable(self, col: int, row: int) -> bool:
        """Whether the agent may stand on (col, row)."""
        if not self.in_bounds(col, row):
            return False
        cell = self.cell(col, row)
        if cell.wall:
            return False
        if cell.overlay is not None:
            ov = cell.overlay
            if ov.variant in ("fire", "flood") and ov.active:
                return False
        if cell.obj is not None:
            obj = cell.obj
            if obj.kind == "goal":
                return True
            if obj.kind == "door":
                return obj.door_state == "open"
            return False
        return True

    def object_free(self, col: int, row: int, *, allow_fire: bool = True) -> bool:
        """Whether an object may be placed on (col, row) by drop or push."""
        if not self.in_bounds(col, row):
            return False
        cell = self.cell(col, row)
        if cell.wall or cell.obj is not None:
            return False
        if cell.overlay is not None:
            ov = cell.overlay
            if ov.variant == "flood" and ov.active:
                return False
            if ov.variant == "fire" and ov.active and not allow_fire:
                return False
        return True

    def copy(self) -> "World":
        # hand-rolled: objects and overlays hold only scalar fields, so a
        # per-field copy is equivalent to deepcopy at a fraction of the cost
        cells = [
            [
                Cell(
                    wall=cell.wall,
                    obj=copy.copy(cell.obj) if cell.obj is not None else None,
                    overlay=copy.copy(cell.overlay) if cell.overlay is not None else None,
                )
                for cell in row
            ]
            for row in self.cells
        ]
        return World(
            width=self.width,
            height=self.height,
            cells=cells,
            agent=Pose(self.agent.col, self.agent.row, self.agent.facing),
            inventory=copy.copy(self.inventory) if self.inventory is not None else None,
            step_count=self.step_count,
            seed=self.seed,
            soak_duration=self.soak_duration,
            see_through_walls=self.see_through_walls,
            view_size=self.view_size,
            level_id=self.level_id,
            max_steps=self.max_steps,
            history=list(self.history),
            events=list(self.events),
            overlay_positions=self.overlay_positions,
            door_positions=self.door_positions,
            testimony_positions=self.testimony_positions,
        )


def _occlusion_transparent(world: World, col: int, row: int) -> bool:
    """Whether sight passes through (col, row). Used by the view extractor."""
    cell = world.cell(col, row)
    if cell.overlay is not None and cell.overlay.variant == "dark_zone":
        return False
    if world.see_through_walls:
        return True
    if cell.wall:
        return False
    if cell.obj is not None and cell.obj.kind == "door" and cell.obj.door_state != "open":
        return False
    return True


def init_world(level: "LevelSpec", seed: int) -> World:  # noqa: F821
    """Build a fresh world from a validated level, with seeded placement of
    any randomized object sets. Identical (level, seed) pairs are bit-identical.
    """
    from .levels import LevelSpec  # local import: levels depends on world types

    assert isinstance(level, LevelSpec)
    cells = [[Cell() for _ in range(level.width)] for _ in range(level.height)]
    for (col, row), code in level.grid_objects.items():
        cells[row][col] = _cell_from_code(code)
    for (col, row), overlay in level.overlays.items():
        cells[row][col].overlay = copy.deepcopy(overlay)
    for (col, row), obj in level.placed_objects.items():
        cells[row][col].obj = copy.deepcopy(obj)

    world = World(
        width=level.width,
        height=level.height,
        cells=cells,
        agent=Pose(level.agent_start[0], level.agent_start[1], level.agent_dir),
        seed=seed,
        soak_duration=level.soak_duration,
        see_through_walls=level.see_through_walls,
        view_size=level.view_size,
        level_id=level.id,
        max_steps=level.max_steps,
    )

    rng = random.Random(seed)
    for rset in level.randomized_sets:
        c0, r0, c1, r1 = rset.region
        free = [
            (c, r)
            for r in range(r0, r1 + 1)
            for c in range(c0, c1 + 1)
            if world.object_free(c, r) and (c, r) != (world.agent.col, world.agent.row)
        ]
        if len(free) < rset.count:
            raise ValueError(
                f"randomized set {rset.color} {rset.kind}: region holds "
                f"{len(free)} free cells, need {rset.count}"
            )
        for c, r in rng.sample(free, rset.count):
            world.cells[r][c].obj = WorldObject(kind=rset.kind, color=rset.color)

    world.overlay_positions = tuple(
        (c, r) for c, r, cell in world.iter_cells() if cell.overlay is not None
    )
    world.door_positions = tuple(
        (c, r)
        for c, r, cell in world.iter_cells()
        if cell.obj is not None and cell.obj.kind == "door"
    )
    world.testimony_positions = tuple(
        (c, r)
        for c, r, cell in world.iter_cells()
        if cell.obj is not None and cell.obj.kind in ("notice_board", "signpost")
    )

    # floods may already be active at step 0
    _activate_floods(world, 0)
    _fire_extinguish(world, 0)
    _resolve_plates(world)
    if not world.passable(world.agent.col, world.agent.row):
        raise ValueError("agent start is not on a passable cell")
    return world


def _cell_from_code(code: str) -> Cell:
    if code == "##":
        return Cell(wall=True)
    return Cell()


# ---------------------------------------------------------------------------
# step mechanics


def step(world: World, action: Action | int) -> World:
    """Apply one action plus the mechanics tick, returning a new World.

    Phase order (fixed for determinism): agent action, river drift, wetness
    update, flood activation, fire extinguish checks, plate/door resolution.
    Impossible moves are silent no-ops; step is total.
    """
    action = Action(int(action))
    w = world.copy()
    event = _apply_agent_action(w, action)
    new_step = w.step_count + 1
    _river_drift(w)
    _wetness_update(w)
    _activate_floods(w, new_step)
    _fire_extinguish(w, new_step)
    _resolve_plates(w)
    w.step_count = new_step
    w.history.append(int(action))
    w.events.append(event)
    return w


def simulate(world: World, script: Iterable[Action | int]) -> World:
    """Pure forward simulation on a copy; the input world is untouched."""
    w = world
    for action in script:
        w = step(w, action)
    return w if w is not world else world.copy()


def _apply_agent_action(w: World, action: Action) -> str:
    agent = w.agent
    if action == Action.TURN_LEFT:
        agent.facing = DIRECTIONS[(DIRECTIONS.index(agent.facing) - 1) % 4]
        return f"You turned left, now facing {agent.facing}."
    if action == Action.TURN_RIGHT:
        agent.facing = DIRECTIONS[(DIRECTIONS.index(agent.facing) + 1) % 4]
        return f"You turned right, now facing {agent.facing}."
    if action == Action.FORWARD:
        return _move_forward(w)
    if action == Action.PICKUP:
        return _pickup(w)
    if action == Action.DROP:
        return _drop(w)
    if action == Action.TOGGLE:
        return _toggle(w)
    return "You waited."


def _move_forward(w: World) -> str:
    dest = w.agent.ahead()
    if not w.in_bounds(*dest):
        return "You walked into the edge of the world."
    cell = w.cell(*dest)
    if cell.obj is not None and cell.obj.kind == "boulder":
        beyond = w.agent.ahead(2)
        if w.object_free(*beyond):
            boulder = cell.obj
            cell.obj = None
            w.cell(*beyond).obj = boulder
            w.agent.col, w.agent.row = dest
            dc, dr = DIR_VECTORS[w.agent.facing]
            return f"You pushed the {boulder.color} boulder {w.agent.facing}."
        return "You pushed against a boulder that would not move."
    if w.passable(*dest):
        w.agent.col, w.agent.row = dest
        return f"You moved one step {w.agent.facing}."
    return "You bumped into something and stayed put."


def _pickup(w: World) -> str:
    if w.inventory is not None:
        return "Your hands are full."
    target = w.agent.ahead()
    if not w.in_bounds(*target):
        return "Nothing there to pick up."
    cell = w.cell(*target)
    if cell.obj is not None and cell.obj.kind in PORTABLE_KINDS:
        w.inventory = cell.obj
        cell.obj = None
        return f"You picked up the {w.inventory.color} {w.inventory.kind}."
    return "Nothing there to pick up."


def _drop(w: World) -> str:
    if w.inventory is None:
        return "You have nothing to drop."
    target = w.agent.ahead()
    if w.object_free(*target):
        obj = w.inventory
        w.inventory = None
        w.cell(*target).obj = obj
        return f"You dropped the {obj.color} {obj.kind}."
    return "No room to drop anything there."


def _toggle(w: World) -> str:
    target = w.agent.ahead()
    if not w.in_bounds(*target):
        return "Nothing to toggle."
    obj = w.cell(*target).obj
    if obj is None or obj.kind != "door":
        return "Nothing to toggle."
    if obj.door_state == "open":
        obj.door_state = "closed"
        return f"You closed the {obj.color} door."
    if obj.door_state == "closed":
        obj.door_state = "open"
        return f"You opened the {obj.color} door."
    # locked: needs a same-color key in hand
    if w.inventory is not None and w.inventory.kind == "key" and w.inventory.color == obj.color:
        obj.door_state = "open"
        return f"You unlocked the {obj.color} door with your {obj.color} key."
    return f"The {obj.color} door is locked."


def _river_cells(w: World) -> dict[tuple[int, int], TileOverlay]:
    return {
        (c, r): cell.overlay
        for c, r, cell in w.iter_overlay_cells()
        if cell.overlay is not None and cell.overlay.variant == "river"
    }


def _river_drift(w: World) -> None:
    rivers = _river_cells(w)
    if not rivers:
        return
    # move objects resting on river cells, processed downstream-first so a
    # chain of objects on one river does not self-block
    movers = [(pos, rivers[pos]) for pos in rivers if w.cell(*pos).obj is not None]

    def downstream_key(item: tuple[tuple[int, int], TileOverlay]) -> int:
        (c, r), ov = item
        dc, dr = DIR_VECTORS[ov.direction]
        return -(c * dc + r * dr)

    for (c, r), ov in sorted(movers, key=downstream_key):
        obj = w.cell(c, r).obj
        if obj is None or obj.kind in ("notice_board", "signpost", "door", "goal"):
            continue
        dc, dr = DIR_VECTORS[ov.direction]
        nc, nr = c, r
        for _ in range(ov.speed):
            cand = (nc + dc, nr + dr)
            if not w.object_free(*cand):
                break
            nc, nr = cand
        if (nc, nr) != (c, r):
            w.cell(c, r).obj = None
            w.cell(nc, nr).obj = obj
    # everything sitting on a river cell gets soaked
    for (c, r) in _river_cells(w):
        obj = w.cell(c, r).obj
        if obj is not None and obj.kind not in ("notice_board", "signpost", "door", "goal"):
            obj.condition = "wet"
            obj.wet_turns_remaining = w.soak_duration


def _wetness_update(w: World) -> None:
    rivers = _river_cells(w)
    for c, r, cell in w.iter_cells():
        obj = cell.obj
        if obj is None or (c, r) in rivers:
            continue
        if obj.wet_turns_remaining > 0:
            obj.wet_turns_remaining -= 1
            if obj.wet_turns_remaining == 0:
                obj.condition = "dry"
    # carried objects are off-river and dry out at the same rate
    if w.inventory is not None and w.inventory.wet_turns_remaining > 0:
        w.inventory.wet_turns_remaining -= 1
        if w.inventory.wet_turns_remaining == 0:
            w.inventory.condition = "dry"


def _activate_floods(w: World, step_count: int) -> None:
    for _, _, cell in w.iter_overlay_cells():
        ov = cell.overlay
        if ov is not None and ov.variant == "flood" and step_count >= ov.rise_step:
            ov.active = True


def _fire_extinguish(w: World, step_count: int) -> None:
    for _, _, cell in w.iter_overlay_cells():
        ov = cell.overlay
        if ov is None or ov.variant != "fire" or not ov.active:
            continue
        # a fire with rise_step > 0 sits in the path of a flood; once the
        # water reaches it the fire goes out for good and the cell is clear
        if ov.rise_step > 0 and step_count >= ov.rise_step:
            ov.active = False
            ov.flooded = True
            continue
        if cell.obj is not None and cell.obj.is_wet():
            ov.active = False


def _resolve_plates(w: World) -> None:
    doors = w.find_doors()
    for c, r, cell in w.iter_overlay_cells():
        ov = cell.overlay
        if ov is None or ov.variant != "pressure_plate" or not ov.link:
            continue
        door = doors.get(ov.link)
        if door is None:
            continue
        weighted = cell.obj is not None or (w.agent.col, w.agent.row) == (c, r)
        if ov.effect == "trigger":
            if weighted:
                ov.fired = True
            if ov.fired:
                door.door_state = "open"
        else:  # continuous
            door.door_state = "open" if weighted else "closed"


