"""Plain-text level format: parsing, validation, canonical emission.

Grammar (UTF-8, ``#`` comments, blank lines ignored):

    [META]
    id = p1_dense_array
    agent_start = 7,9
    agent_dir = north
    view_size = 8x13          # depth x width, or a single odd integer
    see_through_walls = false
    max_steps = 200
    soak_duration = 3
    [GRID]
    ## ## ## ##
    ## @. bB ##
    ## .. rK ##
    ## ## ## ##
    [OVERLAYS]
    door 2 1 id=exit state=locked
    flood 1 2 rise_step=3
    fire 2 2 active=true rise_step=14
    river 1 1 direction=east speed=1
    plate 1 2 effect=trigger link=exit
    dark 1 1
    [TEXTS]
    notice 1 1 text="..."
    signpost 2 1 text="..." accuracy=0.8
    [RANDOM]
    set blue ball count=14 region=3,6,11,8

Grid cells are space-separated 2-character codes: first char color
(r,g,b,y,p,e for grey), second char kind (K key, B ball, X box, D door,
O boulder, G goal, N notice board, S signpost); ``##`` wall, ``..`` floor,
``@.`` agent start. Every validation failure carries a line/column position.
"""

from __future__ import annotations

import shlex
from dataclasses import dataclass, field

from .world import COLORS, DIRECTIONS, TileOverlay, WorldObject

COLOR_CODES = {"r": "red", "g": "green", "b": "blue", "y": "yellow", "p": "purple", "e": "grey"}
CODE_FOR_COLOR = {v: k for k, v in COLOR_CODES.items()}
KIND_CODES = {
    "K": "key",
    "B": "ball",
    "X": "box",
    "D": "door",
    "O": "boulder",
    "G": "goal",
    "N": "notice_board",
    "S": "signpost",
}
CODE_FOR_KIND = {v: k for k, v in KIND_CODES.items()}

SECTION_ORDER = ("[META]", "[GRID]", "[OVERLAYS]", "[TEXTS]", "[RANDOM]")


class LevelError(ValueError):
    """Validation failure with a source position."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        if line:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


@dataclass
class RandomizedSet:
    color: str
    kind: str
    count: int
    region: tuple[int, int, int, int]  # col0, row0, col1, row1 inclusive


@dataclass
class LevelSpec:
    id: str
    width: int
    height: int
    agent_start: tuple[int, int]
    agent_dir: str = "north"
    view_size: tuple[int, int] = (8, 13)
    see_through_walls: bool = False
    max_steps: int = 200
    soak_duration: int = 3
    grid_objects: dict[tuple[int, int], str] = field(default_factory=dict)  # "##" cells
    placed_objects: dict[tuple[int, int], WorldObject] = field(default_factory=dict)
    overlays: dict[tuple[int, int], TileOverlay] = field(default_factory=dict)
    randomized_sets: list[RandomizedSet] = field(default_factory=list)

    def validate(self) -> None:
        if self.width < 3 or self.height < 3:
            raise LevelError("grid must be at least 3x3")
        for col in range(self.width):
            for row in (0, self.height - 1):
                if self.grid_objects.get((col, row)) != "##":
                    raise LevelError(f"perimeter cell ({col},{row}) must be a wall")
        for row in range(self.height):
            for col in (0, self.width - 1):
                if self.grid_objects.get((col, row)) != "##":
                    raise LevelError(f"perimeter cell ({col},{row}) must be a wall")
        ac, ar = self.agent_start
        if not (0 < ac < self.width - 1 and 0 < ar < self.height - 1):
            raise LevelError(f"agent start {self.agent_start} out of bounds")
        if self.agent_dir not in DIRECTIONS:
            raise LevelError(f"bad agent_dir {self.agent_dir!r}")
        door_ids = {
            o.door_id for o in self.placed_objects.values() if o.kind == "door" and o.door_id
        }
        for (col, row), ov in self.overlays.items():
            if not (0 <= col < self.width and 0 <= row < self.height):
                raise LevelError(f"overlay at ({col},{row}) out of bounds")
            if ov.variant == "pressure_plate" and ov.link and ov.link not in door_ids:
                raise LevelError(f"plate at ({col},{row}) links to unknown door {ov.link!r}")
        for (col, row), obj in self.placed_objects.items():
            if not (0 <= col < self.width and 0 <= row < self.height):
                raise LevelError(f"object at ({col},{row}) out of bounds")
            if obj.kind in ("notice_board", "signpost") and not obj.text:
                raise LevelError(f"{obj.kind} at ({col},{row}) has no text")
        for rset in self.randomized_sets:
            c0, r0, c1, r1 = rset.region
            if not (0 <= c0 <= c1 < self.width and 0 <= r0 <= r1 < self.height):
                raise LevelError(f"randomized region {rset.region} out of bounds")
            if rset.kind not in CODE_FOR_KIND or rset.color not in COLORS:
                raise LevelError(f"randomized set has unknown kind/color {rset.kind}/{rset.color}")


def parse_level(text: str) -> LevelSpec:
    sections: dict[str, list[tuple[int, str]]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        # whole-line comments only: grid wall codes themselves contain '#'
        if raw.lstrip().startswith("#") and not raw.lstrip().startswith("##"):
            continue
        line = raw.rstrip()
        if not line.strip():
            continue
        stripped = line.strip()
        if stripped.startswith("[") and stripped.endswith("]"):
            name = stripped.upper()
            if name not in SECTION_ORDER:
                raise LevelError(f"unknown section {stripped!r}", lineno, 1)
            current = name
            sections[current] = []
            continue
        if current is None:
            raise LevelError("content before first section header", lineno, 1)
        sections[current].append((lineno, line))

    meta = _parse_meta(sections.get("[META]", []))
    grid_rows = sections.get("[GRID]", [])
    if not grid_rows:
        raise LevelError("missing [GRID] section")
    grid_objects, placed, agent_from_grid = _parse_grid(grid_rows)
    width = len(grid_rows[0][1].split())
    height = len(grid_rows)

    agent_start = meta.pop("agent_start", agent_from_grid)
    if agent_start is None:
        raise LevelError("no agent start: neither meta agent_start nor '@.' in grid")
    if agent_from_grid is not None and tuple(agent_start) != agent_from_grid:
        raise LevelError(
            f"meta agent_start {agent_start} disagrees with '@.' at {agent_from_grid}"
        )

    spec = LevelSpec(
        id=meta.pop("id", "unnamed"),
        width=width,
        height=height,
        agent_start=tuple(agent_start),
        grid_objects=grid_objects,
        placed_objects=placed,
    )
    for key, value in meta.items():
        if not hasattr(spec, key):
            raise LevelError(f"unknown meta key {key!r}")
        setattr(spec, key, value)

    _parse_overlays(sections.get("[OVERLAYS]", []), spec)
    _parse_texts(sections.get("[TEXTS]", []), spec)
    _parse_random(sections.get("[RANDOM]", []), spec)
    spec.validate()
    return spec


def _parse_meta(lines: list[tuple[int, str]]) -> dict:
    meta: dict = {}
    for lineno, line in lines:
        if "=" not in line:
            raise LevelError("expected 'key = value'", lineno, 1)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        try:
            if key == "agent_start":
                c, r = value.split(",")
                meta[key] = (int(c), int(r))
            elif key == "view_size":
                if "x" in value:
                    d, w = value.split("x")
                    meta[key] = (int(d), int(w))
                else:
                    n = int(value)
                    if n % 2 == 0:
                        raise LevelError("square view_size must be odd", lineno, 1)
                    meta[key] = (n, n)
            elif key in ("max_steps", "soak_duration"):
                meta[key] = int(value)
            elif key == "see_through_walls":
                if value not in ("true", "false"):
                    raise LevelError(f"expected true/false, got {value!r}", lineno, 1)
                meta[key] = value == "true"
            else:
                meta[key] = value
        except LevelError:
            raise
        except ValueError as exc:
            raise LevelError(f"bad value for {key}: {exc}", lineno, 1) from None
    return meta


def _parse_grid(lines: list[tuple[int, str]]):
    grid_objects: dict[tuple[int, int], str] = {}
    placed: dict[tuple[int, int], WorldObject] = {}
    agent = None
    width = None
    for row, (lineno, line) in enumerate(lines):
        codes = line.split()
        if width is None:
            width = len(codes)
        elif len(codes) != width:
            raise LevelError(f"ragged grid: expected {width} cells, got {len(codes)}", lineno, 1)
        for col, code in enumerate(codes):
            column = line.index(code) + 1 if len(code) != 2 else col * 3 + 1
            if len(code) != 2:
                raise LevelError(f"cell code {code!r} is not 2 characters", lineno, column)
            if code == "..":
                continue
            if code == "##":
                grid_objects[(col, row)] = "##"
                continue
            if code == "@.":
                if agent is not None:
                    raise LevelError("more than one agent start", lineno, column)
                agent = (col, row)
                continue
            if code == "??":
                raise LevelError("'??' is an observation marker, not a level code", lineno, column)
            color_c, kind_c = code[0], code[1]
            if color_c not in COLOR_CODES:
                raise LevelError(f"unknown color code {color_c!r} in {code!r}", lineno, column)
            if kind_c not in KIND_CODES:
                raise LevelError(f"unknown kind code {kind_c!r} in {code!r}", lineno, column)
            placed[(col, row)] = WorldObject(kind=KIND_CODES[kind_c], color=COLOR_CODES[color_c])
    return grid_objects, placed, agent


def _kv_args(parts: list[str], lineno: int) -> dict[str, str]:
    args = {}
    for part in parts:
        if "=" not in part:
            raise LevelError(f"expected key=value, got {part!r}", lineno, 1)
        k, _, v = part.partition("=")
        args[k] = v
    return args


def _parse_overlays(lines: list[tuple[int, str]], spec: LevelSpec) -> None:
    for lineno, line in lines:
        parts = shlex.split(line)
        if len(parts) < 3:
            raise LevelError("expected 'kind col row key=value...'", lineno, 1)
        kind, col_s, row_s, *rest = parts
        try:
            col, row = int(col_s), int(row_s)
        except ValueError:
            raise LevelError(f"bad coordinates {col_s!r},{row_s!r}", lineno, 1) from None
        args = _kv_args(rest, lineno)
        if kind == "door":
            obj = spec.placed_objects.get((col, row))
            if obj is None or obj.kind != "door":
                raise LevelError(f"door overlay at ({col},{row}) has no door in grid", lineno, 1)
            obj.door_id = args.get("id", obj.door_id)
            state = args.get("state", obj.door_state)
            if state not in ("open", "closed", "locked"):
                raise LevelError(f"bad door state {state!r}", lineno, 1)
            obj.door_state = state
            continue
        if kind == "river":
            direction = args.get("direction", "east")
            if direction not in DIRECTIONS:
                raise LevelError(f"bad river direction {direction!r}", lineno, 1)
            ov = TileOverlay("river", direction=direction, speed=int(args.get("speed", 1)))
        elif kind == "fire":
            ov = TileOverlay(
                "fire",
                active=args.get("active", "true") == "true",
                rise_step=int(args.get("rise_step", 0)),
            )
        elif kind == "flood":
            if "rise_step" not in args:
                raise LevelError("flood needs rise_step", lineno, 1)
            ov = TileOverlay("flood", rise_step=int(args["rise_step"]))
        elif kind == "plate":
            effect = args.get("effect", "continuous")
            if effect not in ("continuous", "trigger"):
                raise LevelError(f"bad plate effect {effect!r}", lineno, 1)
            ov = TileOverlay(
                "pressure_plate",
                effect=effect,
                link=args.get("link", ""),
                fired=args.get("fired", "false") == "true",
            )
        elif kind == "dark":
            ov = TileOverlay("dark_zone")
        else:
            raise LevelError(f"unknown overlay kind {kind!r}", lineno, 1)
        if (col, row) in spec.overlays:
            raise LevelError(f"duplicate overlay at ({col},{row})", lineno, 1)
        spec.overlays[(col, row)] = ov


def _parse_texts(lines: list[tuple[int, str]], spec: LevelSpec) -> None:
    for lineno, line in lines:
        parts = shlex.split(line)
        if len(parts) < 4:
            raise LevelError("expected 'notice|signpost col row text=\"...\"'", lineno, 1)
        kind, col_s, row_s, *rest = parts
        try:
            col, row = int(col_s), int(row_s)
        except ValueError:
            raise LevelError(f"bad coordinates {col_s!r},{row_s!r}", lineno, 1) from None
        args = _kv_args(rest, lineno)
        obj = spec.placed_objects.get((col, row))
        expected = {"notice": "notice_board", "signpost": "signpost"}.get(kind)
        if expected is None:
            raise LevelError(f"unknown text kind {kind!r}", lineno, 1)
        if obj is None or obj.kind != expected:
            raise LevelError(f"text at ({col},{row}) has no {expected} in grid", lineno, 1)
        if "text" not in args:
            raise LevelError("missing text=...", lineno, 1)
        obj.text = args["text"]
        if "accuracy" in args:
            if expected != "signpost":
                raise LevelError("accuracy only applies to signposts", lineno, 1)
            acc = float(args["accuracy"])
            if not 0.0 <= acc <= 1.0:
                raise LevelError(f"accuracy {acc} outside [0,1]", lineno, 1)
            obj.stated_accuracy = acc


def _parse_random(lines: list[tuple[int, str]], spec: LevelSpec) -> None:
    for lineno, line in lines:
        parts = shlex.split(line)
        if len(parts) < 5 or parts[0] != "set":
            raise LevelError("expected 'set <color> <kind> count=N region=c0,r0,c1,r1'", lineno, 1)
        _, color, kind, *rest = parts
        args = _kv_args(rest, lineno)
        try:
            count = int(args["count"])
            region = tuple(int(x) for x in args["region"].split(","))
        except (KeyError, ValueError):
            raise LevelError("randomized set needs count=N and region=c0,r0,c1,r1", lineno, 1) from None
        if len(region) != 4:
            raise LevelError("region must have 4 coordinates", lineno, 1)
        spec.randomized_sets.append(RandomizedSet(color=color, kind=kind, count=count, region=region))


# ---------------------------------------------------------------------------
# emission


def emit_level(spec: LevelSpec) -> str:
    """Canonical text form: fixed section order, sorted keys, byte-stable."""
    spec.validate()
    out: list[str] = []
    out.append("[META]")
    out.append(f"agent_dir = {spec.agent_dir}")
    out.append(f"agent_start = {spec.agent_start[0]},{spec.agent_start[1]}")
    out.append(f"id = {spec.id}")
    out.append(f"max_steps = {spec.max_steps}")
    out.append(f"see_through_walls = {'true' if spec.see_through_walls else 'false'}")
    out.append(f"soak_duration = {spec.soak_duration}")
    out.append(f"view_size = {spec.view_size[0]}x{spec.view_size[1]}")
    out.append("[GRID]")
    for row in range(spec.height):
        codes = []
        for col in range(spec.width):
            codes.append(_code_at(spec, col, row))
        out.append(" ".join(codes))

    overlay_lines = []
    for (col, row), obj in sorted(spec.placed_objects.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        if obj.kind == "door" and (obj.door_id or obj.door_state != "closed"):
            attrs = []
            if obj.door_id:
                attrs.append(f"id={obj.door_id}")
            if obj.door_state != "closed":
                attrs.append(f"state={obj.door_state}")
            overlay_lines.append(f"door {col} {row} " + " ".join(attrs))
    for (col, row), ov in sorted(spec.overlays.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        overlay_lines.append(_overlay_line(col, row, ov))
    if overlay_lines:
        out.append("[OVERLAYS]")
        out.extend(overlay_lines)

    text_lines = []
    for (col, row), obj in sorted(spec.placed_objects.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        if obj.kind == "notice_board":
            text_lines.append(f'notice {col} {row} text="{obj.text}"')
        elif obj.kind == "signpost":
            line = f'signpost {col} {row} text="{obj.text}"'
            if obj.stated_accuracy is not None:
                line += f" accuracy={obj.stated_accuracy:g}"
            text_lines.append(line)
    if text_lines:
        out.append("[TEXTS]")
        out.extend(text_lines)

    if spec.randomized_sets:
        out.append("[RANDOM]")
        for rset in spec.randomized_sets:
            c0, r0, c1, r1 = rset.region
            out.append(
                f"set {rset.color} {rset.kind} count={rset.count} region={c0},{r0},{c1},{r1}"
            )
    return "\n".join(out) + "\n"


def _code_at(spec: LevelSpec, col: int, row: int) -> str:
    if (col, row) == tuple(spec.agent_start):
        return "@."
    if spec.grid_objects.get((col, row)) == "##":
        return "##"
    obj = spec.placed_objects.get((col, row))
    if obj is None:
        return ".."
    return CODE_FOR_COLOR[obj.color] + CODE_FOR_KIND[obj.kind]


def _overlay_line(col: int, row: int, ov: TileOverlay) -> str:
    if ov.variant == "river":
        return f"river {col} {row} direction={ov.direction} speed={ov.speed}"
    if ov.variant == "fire":
        line = f"fire {col} {row} active={'true' if ov.active else 'false'}"
        if ov.rise_step:
            line += f" rise_step={ov.rise_step}"
        return line
    if ov.variant == "flood":
        return f"flood {col} {row} rise_step={ov.rise_step}"
    if ov.variant == "pressure_plate":
        line = f"plate {col} {row} effect={ov.effect}"
        if ov.link:
            line += f" link={ov.link}"
        if ov.fired:
            line += " fired=true"
        return line
    if ov.variant == "dark_zone":
        return f"dark {col} {row}"
    raise LevelError(f"unknown overlay variant {ov.variant!r}")
