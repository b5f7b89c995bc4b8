"""Field-of-view extraction, occlusion, and the three view serializers."""

from __future__ import annotations

import pytest

from gridprobe.levels import parse_level
from gridprobe.observe import (
    UNKNOWN,
    ego_to_world,
    observe,
    render,
    serialize_grid,
    serialize_memory,
    serialize_symbolic,
)
from gridprobe.world import Action, init_world, step


def make_world(grid: str, meta: str = "agent_dir = north\n", overlays: str = "", texts: str = ""):
    text = "[META]\nid = t\n" + meta + "[GRID]\n" + grid.strip() + "\n"
    if overlays.strip():
        text += "[OVERLAYS]\n" + overlays.strip() + "\n"
    if texts.strip():
        text += "[TEXTS]\n" + texts.strip() + "\n"
    return init_world(parse_level(text), 0)


BASIC = """
## ## ## ## ##
## .. .. .. ##
## .. @. .. ##
## .. .. .. ##
## ## ## ## ##
"""


def test_ego_to_world_per_facing():
    w = make_world(BASIC)
    cases = {
        "north": {(1, 0): (2, 1), (0, 1): (3, 2), (0, -1): (1, 2)},
        "east": {(1, 0): (3, 2), (0, 1): (2, 3), (0, -1): (2, 1)},
        "south": {(1, 0): (2, 3), (0, 1): (1, 2), (0, -1): (3, 2)},
        "west": {(1, 0): (1, 2), (0, 1): (2, 1), (0, -1): (2, 3)},
    }
    for facing, table in cases.items():
        w.agent.facing = facing
        for (ahead, lat), expected in table.items():
            assert ego_to_world(w, ahead, lat) == expected, (facing, ahead, lat)


def test_fov_shape_and_agent_marker():
    w = make_world(BASIC, meta="agent_dir = north\nview_size = 3x5\n")
    obs = observe(w)
    assert len(obs.fov) == 3 and all(len(r) == 5 for r in obs.fov)
    assert obs.fov[0][2] == "@."
    assert obs.fov[0] == ["##", "..", "@.", "..", "##"]
    assert obs.fov[1] == ["##", "..", "..", "..", "##"]
    assert obs.fov[2] == ["##", "##", "##", "##", "##"]


def test_wall_occludes_cells_behind_it():
    grid = """
## ## ## ## ##
## .. .. .. ##
## .. ## .. ##
## .. @. .. ##
## ## ## ## ##
"""
    w = make_world(grid, meta="agent_dir = north\nview_size = 3x5\n")
    obs = observe(w)
    assert obs.fov[1][2] == "##"  # the wall itself is visible
    assert obs.fov[2][2] == UNKNOWN  # the cell straight behind it is not
    assert obs.fov[2][1] != UNKNOWN and obs.fov[2][3] != UNKNOWN

    # with see_through_walls the same cell is revealed
    w2 = make_world(
        grid, meta="agent_dir = north\nview_size = 3x5\nsee_through_walls = true\n"
    )
    assert observe(w2).fov[2][2] != UNKNOWN


def test_dark_zone_is_opaque_even_with_xray():
    grid = """
## ## ## ## ##
## .. .. .. ##
## .. .. .. ##
## .. @. .. ##
## ## ## ## ##
"""
    w = make_world(
        grid,
        meta="agent_dir = north\nview_size = 3x5\nsee_through_walls = true\n",
        overlays="dark 2 2",
    )
    obs = observe(w)
    assert obs.fov[2][2] == UNKNOWN


def test_out_of_bounds_is_unknown():
    w = make_world(BASIC, meta="agent_dir = north\nview_size = 6x5\n")
    obs = observe(w)
    assert all(code == UNKNOWN for code in obs.fov[5])


def test_symbolic_serializer_golden():
    grid = """
## ## ## ## ##
## .. bB .. ##
## .. @. rK ##
## ## ## ## ##
"""
    w = make_world(grid, meta="agent_dir = north\nview_size = 3x5\n")
    out = serialize_symbolic(observe(w))
    assert out.splitlines()[0] == "Observation at step 0, facing north."
    assert "- blue ball (dry) at steps_ahead=1, lateral=0" in out
    assert "- red key (dry) at steps_ahead=0, lateral=1" in out


def test_grid_serializer_golden_layout():
    w = make_world(BASIC, meta="agent_dir = north\nview_size = 3x5\n")
    lines = serialize_grid(observe(w)).splitlines()
    assert lines[0] == "         L2 L1  0 R1 R2"
    assert lines[1] == "ahead 0  ## .. @. .. ##"
    assert lines[2] == "ahead 1  ## .. .. .. ##"
    assert lines[3] == "ahead 2  ## ## ## ## ##"
    assert lines[4].startswith("Legend: ")
    assert lines[5].startswith("Colors: ")
    assert lines[6].startswith("Tiles: ")


def test_notice_boards_always_heard_signposts_only_in_fov():
    grid = """
## ## ## ## ## ## ##
## eN .. .. .. eS ##
## .. .. @. .. .. ##
## ## ## ## ## ## ##
"""
    w = make_world(
        grid,
        meta="agent_dir = north\nview_size = 3x3\n",
        texts='notice 1 1 text="Hall is empty." \nsignpost 5 1 text="Key ahead." accuracy=0.8',
    )
    obs = observe(w)
    sources = [t.source for t in obs.testimony]
    assert sources == ["notice_board"]  # signpost out of the 3x3 cone
    # turn to face east: signpost enters the FOV
    w2 = step(w, Action.TURN_RIGHT)
    obs2 = observe(w2)
    assert {t.source for t in obs2.testimony} == {"notice_board", "signpost"}
    sign = next(t for t in obs2.testimony if t.source == "signpost")
    assert sign.stated_accuracy == 0.8
    rendered = serialize_symbolic(obs2)
    assert '- signpost (stated accuracy 80%): "Key ahead."' in rendered
    assert '- notice board: "Hall is empty."' in rendered


def test_memory_serializer_includes_narrative_and_current_views():
    w = make_world(BASIC, meta="agent_dir = north\nview_size = 3x5\n")
    history = [observe(w)]
    for action in (Action.FORWARD, Action.TURN_RIGHT, Action.FORWARD):
        w = step(w, action)
        history.append(observe(w))
    out = serialize_memory(history)
    assert out.startswith("What happened so far: ")
    assert "Observation at step 3" in out  # symbolic block of current state
    assert "ahead 0" in out  # grid block of current state
    with pytest.raises(ValueError):
        serialize_memory([])


def test_render_dispatch():
    w = make_world(BASIC, meta="agent_dir = north\nview_size = 3x5\n")
    history = [observe(w)]
    assert render("symbolic", history) == serialize_symbolic(history[-1])
    assert render("grid", history) == serialize_grid(history[-1])
    assert render("memory", history) == serialize_memory(history)
    with pytest.raises(ValueError):
        render("yaml", history)


def test_observation_is_a_pure_function_of_world():
    w = make_world(BASIC, meta="agent_dir = north\nview_size = 3x5\n")
    assert serialize_grid(observe(w)) == serialize_grid(observe(w))
