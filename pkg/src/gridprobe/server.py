"""Local HTTP service exposing the level editor and trajectory recorder to a
browser UI. Localhost-only, single-user, no auth; state is polled via
get_state and every mutation is visible in the next poll.
"""

from __future__ import annotations

import copy
import threading
import uuid
from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .levels import (
    CODE_FOR_COLOR,
    CODE_FOR_KIND,
    COLOR_CODES,
    KIND_CODES,
    LevelError,
    LevelSpec,
    emit_level,
    parse_level,
)
from .observe import OVERLAY_CODES, serialize_memory
from .probes import registered_probe_types
from .trajectory import RecorderSession, TrajectoryError, dumps_trajectory
from .world import Action, DIRECTIONS, TileOverlay, World, WorldObject

OVERLAY_KINDS = ("river", "fire", "flood", "plate", "dark")


class CreateSession(BaseModel):
    mode: str  # edit | record
    level_text: Optional[str] = None
    width: int = 9
    height: int = 9
    seed: int = 0
    base_dir: str = "."
    level_file: Optional[str] = None


class Placement(BaseModel):
    col: int
    row: int
    code: str  # 2-char cell code, overlay kind, or "erase"
    params: dict = {}


class MetaUpdate(BaseModel):
    key: str
    value: str


class StepRequest(BaseModel):
    action: int


class ProbeRequest(BaseModel):
    probe_type: str
    question: str
    ground_truth: Optional[object] = None
    metadata: dict = {}


class _Session:
    def __init__(self, mode: str):
        self.id = uuid.uuid4().hex[:12]
        self.mode = mode
        self.lock = threading.Lock()
        self.dirty = False
        self.spec: Optional[LevelSpec] = None  # edit mode
        self.recorder: Optional[RecorderSession] = None  # record mode


def _blank_spec(width: int, height: int) -> LevelSpec:
    grid = {}
    for col in range(width):
        grid[(col, 0)] = "##"
        grid[(col, height - 1)] = "##"
    for row in range(height):
        grid[(0, row)] = "##"
        grid[(width - 1, row)] = "##"
    return LevelSpec(
        id="untitled",
        width=width,
        height=height,
        agent_start=(1, 1),
        grid_objects=grid,
    )


def _spec_grid(spec: LevelSpec) -> list[list[str]]:
    grid = []
    for row in range(spec.height):
        cells = []
        for col in range(spec.width):
            if (col, row) == tuple(spec.agent_start):
                code = "@."
            elif spec.grid_objects.get((col, row)) == "##":
                code = "##"
            else:
                obj = spec.placed_objects.get((col, row))
                if obj is not None:
                    code = CODE_FOR_COLOR[obj.color] + CODE_FOR_KIND[obj.kind]
                else:
                    ov = spec.overlays.get((col, row))
                    code = OVERLAY_CODES[ov.variant] if ov is not None else ".."
            cells.append(code)
        grid.append(cells)
    return grid


def _world_grid(world: World) -> list[list[str]]:
    grid = []
    for row in range(world.height):
        cells = []
        for col in range(world.width):
            cell = world.cell(col, row)
            if (col, row) == (world.agent.col, world.agent.row):
                code = "@."
            elif cell.wall:
                code = "##"
            elif cell.obj is not None:
                code = CODE_FOR_COLOR[cell.obj.color] + CODE_FOR_KIND[cell.obj.kind]
            elif cell.overlay is not None:
                ov = cell.overlay
                code = ".." if ov.variant in ("fire", "flood") and not ov.active else OVERLAY_CODES[ov.variant]
            else:
                code = ".."
            cells.append(code)
        grid.append(cells)
    return grid


def create_app() -> FastAPI:
    app = FastAPI(title="gridworld editor API")
    sessions: dict[str, _Session] = {}

    def get_session(session_id: str, mode: Optional[str] = None) -> _Session:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(404, f"no session {session_id}")
        if mode is not None and session.mode != mode:
            raise HTTPException(409, f"session is in {session.mode} mode, endpoint needs {mode}")
        return session

    @app.get("/capabilities")
    def capabilities():
        """Registered vocabulary; the UI palette derives from this, never hardcodes."""
        return {
            "kinds": {code: kind for code, kind in KIND_CODES.items()},
            "colors": {code: color for code, color in COLOR_CODES.items()},
            "overlays": list(OVERLAY_KINDS),
            "probe_types": list(registered_probe_types()),
            "actions": {a.name.lower(): int(a) for a in Action},
            "directions": list(DIRECTIONS),
        }

    @app.post("/sessions")
    def create_session(req: CreateSession):
        if req.mode not in ("edit", "record"):
            raise HTTPException(422, f"mode must be edit or record, got {req.mode!r}")
        session = _Session(req.mode)
        if req.mode == "edit":
            if req.level_text:
                try:
                    session.spec = parse_level(req.level_text)
                except LevelError as exc:
                    raise HTTPException(422, str(exc))
            else:
                session.spec = _blank_spec(req.width, req.height)
        else:
            if req.level_file:
                try:
                    session.recorder = RecorderSession(req.level_file, req.seed, req.base_dir)
                except (LevelError, FileNotFoundError, ValueError) as exc:
                    raise HTTPException(422, str(exc))
            elif req.level_text:
                import tempfile, os

                tmp = tempfile.NamedTemporaryFile(
                    "w", suffix=".txt", delete=False, encoding="utf-8"
                )
                tmp.write(req.level_text)
                tmp.close()
                try:
                    session.recorder = RecorderSession(
                        os.path.basename(tmp.name), req.seed, os.path.dirname(tmp.name)
                    )
                except (LevelError, ValueError) as exc:
                    raise HTTPException(422, str(exc))
            else:
                raise HTTPException(422, "record mode needs level_file or level_text")
        sessions[session.id] = session
        return {"session_id": session.id, "mode": session.mode}

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str):
        session = get_session(session_id)
        with session.lock:
            if session.mode == "edit":
                spec = session.spec
                return {
                    "mode": "edit",
                    "dirty": session.dirty,
                    "width": spec.width,
                    "height": spec.height,
                    "grid": _spec_grid(spec),
                    "meta": {
                        "id": spec.id,
                        "agent_dir": spec.agent_dir,
                        "agent_start": list(spec.agent_start),
                        "view_size": list(spec.view_size),
                        "see_through_walls": spec.see_through_walls,
                        "max_steps": spec.max_steps,
                        "soak_duration": spec.soak_duration,
                    },
                }
            rec = session.recorder
            world = rec.world
            return {
                "mode": "record",
                "dirty": session.dirty,
                "grid": _world_grid(world),
                "observation": serialize_memory(rec.obs_history),
                "step_count": world.step_count,
                "segment": rec.segment_index,
                "step": rec.step_index,
                "facing": world.agent.facing,
                "inventory": (
                    f"{world.inventory.color} {world.inventory.kind}"
                    if world.inventory
                    else None
                ),
                "level_id": world.level_id,
                "probes_planted": len(rec.probes),
                "last_event": world.events[-1] if world.events else "",
            }

    @app.post("/sessions/{session_id}/place")
    def place_object(session_id: str, placement: Placement):
        session = get_session(session_id, "edit")
        with session.lock:
            candidate = copy.deepcopy(session.spec)
            try:
                _apply_placement(candidate, placement)
                candidate.validate()
            except LevelError as exc:
                raise HTTPException(422, str(exc))
            session.spec = candidate
            session.dirty = True
        return {"ok": True}

    @app.post("/sessions/{session_id}/meta")
    def set_meta(session_id: str, update: MetaUpdate):
        session = get_session(session_id, "edit")
        with session.lock:
            candidate = copy.deepcopy(session.spec)
            try:
                _apply_meta(candidate, update.key, update.value)
                candidate.validate()
            except LevelError as exc:
                raise HTTPException(422, str(exc))
            session.spec = candidate
            session.dirty = True
        return {"ok": True}

    @app.get("/sessions/{session_id}/export")
    def export_level(session_id: str):
        session = get_session(session_id, "edit")
        with session.lock:
            try:
                text = emit_level(session.spec)
            except LevelError as exc:
                raise HTTPException(422, str(exc))
            session.dirty = False
        return {"level_text": text}

    @app.post("/sessions/{session_id}/step")
    def step_action(session_id: str, req: StepRequest):
        session = get_session(session_id, "record")
        with session.lock:
            if not 0 <= req.action <= max(Action):
                raise HTTPException(422, f"action {req.action} out of range")
            event = session.recorder.append(req.action)
            session.dirty = True
        return {"ok": True, "event": event}

    @app.post("/sessions/{session_id}/undo")
    def undo(session_id: str):
        session = get_session(session_id, "record")
        with session.lock:
            notice = session.recorder.undo()
        return {"ok": True, "notice": notice}

    @app.post("/sessions/{session_id}/probe")
    def plant_probe(session_id: str, req: ProbeRequest):
        session = get_session(session_id, "record")
        with session.lock:
            try:
                probe = session.recorder.plant(
                    req.probe_type, req.question, req.ground_truth, req.metadata
                )
            except TrajectoryError as exc:
                raise HTTPException(422, str(exc))
        return {"ok": True, "segment": probe.segment, "step": probe.step}

    @app.get("/sessions/{session_id}/trajectory")
    def save_trajectory(session_id: str):
        session = get_session(session_id, "record")
        with session.lock:
            try:
                traj = session.recorder.finalize()
            except TrajectoryError as exc:
                raise HTTPException(422, str(exc))
            session.dirty = False
        return {"trajectory_json": dumps_trajectory(traj)}

    return app


def _apply_placement(spec: LevelSpec, placement: Placement) -> None:
    col, row, code = placement.col, placement.row, placement.code
    if not (0 <= col < spec.width and 0 <= row < spec.height):
        raise LevelError(f"placement ({col},{row}) out of bounds")
    current = _spec_grid(spec)[row][col]
    if code == current and code != "erase":
        raise LevelError(f"({col},{row}) already holds {code!r}")
    if code == "erase":
        spec.grid_objects.pop((col, row), None)
        spec.placed_objects.pop((col, row), None)
        spec.overlays.pop((col, row), None)
        return
    if code == "##":
        spec.placed_objects.pop((col, row), None)
        spec.overlays.pop((col, row), None)
        spec.grid_objects[(col, row)] = "##"
        return
    if code == "@.":
        spec.agent_start = (col, row)
        spec.grid_objects.pop((col, row), None)
        spec.placed_objects.pop((col, row), None)
        return
    if code in OVERLAY_KINDS:
        spec.overlays[(col, row)] = _overlay_from_params(code, placement.params)
        spec.grid_objects.pop((col, row), None)
        return
    if len(code) == 2 and code[0] in COLOR_CODES and code[1] in KIND_CODES:
        obj = WorldObject(kind=KIND_CODES[code[1]], color=COLOR_CODES[code[0]])
        params = placement.params
        if obj.kind == "door":
            obj.door_id = str(params.get("id", ""))
            state = params.get("state", "closed")
            if state not in ("open", "closed", "locked"):
                raise LevelError(f"bad door state {state!r}")
            obj.door_state = state
        if obj.kind in ("notice_board", "signpost"):
            obj.text = str(params.get("text", ""))
            if obj.kind == "signpost" and "accuracy" in params:
                obj.stated_accuracy = float(params["accuracy"])
        spec.grid_objects.pop((col, row), None)
        spec.placed_objects[(col, row)] = obj
        return
    raise LevelError(f"unknown placement code {code!r}")


def _overlay_from_params(kind: str, params: dict) -> TileOverlay:
    if kind == "river":
        direction = params.get("direction", "east")
        if direction not in DIRECTIONS:
            raise LevelError(f"bad river direction {direction!r}")
        return TileOverlay("river", direction=direction, speed=int(params.get("speed", 1)))
    if kind == "fire":
        return TileOverlay(
            "fire",
            active=bool(params.get("active", True)),
            rise_step=int(params.get("rise_step", 0)),
        )
    if kind == "flood":
        if "rise_step" not in params:
            raise LevelError("flood needs rise_step")
        return TileOverlay("flood", rise_step=int(params["rise_step"]))
    if kind == "plate":
        effect = params.get("effect", "continuous")
        if effect not in ("continuous", "trigger"):
            raise LevelError(f"bad plate effect {effect!r}")
        return TileOverlay("pressure_plate", effect=effect, link=str(params.get("link", "")))
    if kind == "dark":
        return TileOverlay("dark_zone")
    raise LevelError(f"unknown overlay kind {kind!r}")


def _apply_meta(spec: LevelSpec, key: str, value: str) -> None:
    if key == "id":
        spec.id = value
    elif key == "agent_dir":
        if value not in DIRECTIONS:
            raise LevelError(f"bad agent_dir {value!r}")
        spec.agent_dir = value
    elif key == "agent_start":
        c, r = value.split(",")
        spec.agent_start = (int(c), int(r))
    elif key == "view_size":
        d, w = value.split("x")
        spec.view_size = (int(d), int(w))
    elif key in ("max_steps", "soak_duration"):
        setattr(spec, key, int(value))
    elif key == "see_through_walls":
        spec.see_through_walls = value == "true"
    else:
        raise LevelError(f"unknown meta key {key!r}")


app = create_app()


def serve(host: str = "127.0.0.1", port: int = 8722) -> None:
    import uvicorn

    uvicorn.run(create_app(), host=host, port=port)
