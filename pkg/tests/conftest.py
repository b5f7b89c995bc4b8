from __future__ import annotations

import os
import random

import pytest

from gridprobe.levels import LevelSpec, RandomizedSet, parse_level
from gridprobe.world import TileOverlay, WorldObject

PKG_DIR = os.path.join(os.path.dirname(__file__), "..", "src", "gridprobe")
LEVELS_DIR = os.path.join(PKG_DIR, "levels")
TRAJ_DIR = os.path.join(PKG_DIR, "trajectories")


def fixture_level(name: str) -> LevelSpec:
    with open(os.path.join(LEVELS_DIR, f"{name}.txt"), encoding="utf-8") as fh:
        return parse_level(fh.read())


def fixture_level_names() -> list[str]:
    return sorted(
        os.path.splitext(f)[0] for f in os.listdir(LEVELS_DIR) if f.endswith(".txt")
    )


def fixture_trajectory_names() -> list[str]:
    return sorted(
        os.path.splitext(f)[0] for f in os.listdir(TRAJ_DIR) if f.endswith(".json")
    )


@pytest.fixture
def pkg_dir() -> str:
    return PKG_DIR


# ---------------------------------------------------------------------------
# randomized level construction (shared by round-trip and mechanics tests)

_KINDS = ("key", "ball", "box", "boulder", "goal")
_COLORS = ("red", "green", "blue", "yellow", "purple", "grey")
_DIRS = ("north", "east", "south", "west")


def random_level_spec(rng: random.Random, *, dynamic: bool = True) -> LevelSpec:
    """A small random valid LevelSpec: perimeter walls, scattered objects,
    optional overlays. Suitable for round-trip and brute-force mechanics tests."""
    width = rng.randint(5, 12)
    height = rng.randint(5, 10)
    grid = {}
    for col in range(width):
        grid[(col, 0)] = "##"
        grid[(col, height - 1)] = "##"
    for row in range(height):
        grid[(0, row)] = "##"
        grid[(width - 1, row)] = "##"

    interior = [(c, r) for r in range(1, height - 1) for c in range(1, width - 1)]
    rng.shuffle(interior)
    agent_start = interior.pop()

    placed: dict[tuple[int, int], WorldObject] = {}
    overlays: dict[tuple[int, int], TileOverlay] = {}
    n_objects = rng.randint(0, min(6, len(interior)))
    for _ in range(n_objects):
        pos = interior.pop()
        kind = rng.choice(_KINDS)
        placed[pos] = WorldObject(kind=kind, color=rng.choice(_COLORS))
    if interior and rng.random() < 0.5:
        pos = interior.pop()
        text = rng.choice(
            ["The vault is empty.", "Three keys lie ahead.", "Beware the fire."]
        )
        if rng.random() < 0.5:
            placed[pos] = WorldObject(kind="notice_board", color="grey", text=text)
        else:
            placed[pos] = WorldObject(
                kind="signpost",
                color="grey",
                text=text,
                stated_accuracy=rng.choice([None, 0.2, 0.5, 0.8]),
            )
    if dynamic:
        n_overlays = rng.randint(0, min(5, len(interior)))
        for _ in range(n_overlays):
            pos = interior.pop()
            variant = rng.choice(["river", "fire", "flood", "dark"])
            if variant == "river":
                overlays[pos] = TileOverlay(
                    "river", direction=rng.choice(_DIRS), speed=rng.randint(1, 2)
                )
            elif variant == "fire":
                overlays[pos] = TileOverlay(
                    "fire", active=True, rise_step=rng.choice([0, 0, rng.randint(1, 8)])
                )
            elif variant == "flood":
                overlays[pos] = TileOverlay("flood", rise_step=rng.randint(1, 8))
            else:
                overlays[pos] = TileOverlay("dark_zone")
        # occasionally a plate linked to a door placed in the interior
        if interior and rng.random() < 0.4:
            door_pos = interior.pop()
            placed[door_pos] = WorldObject(
                kind="door",
                color=rng.choice(_COLORS),
                door_state=rng.choice(["open", "closed", "locked"]),
                door_id="d1",
            )
            if interior:
                plate_pos = interior.pop()
                overlays[plate_pos] = TileOverlay(
                    "pressure_plate",
                    effect=rng.choice(["continuous", "trigger"]),
                    link="d1",
                )

    randomized = []
    if interior and rng.random() < 0.3:
        c0 = rng.randint(1, width - 2)
        r0 = rng.randint(1, height - 2)
        c1 = rng.randint(c0, width - 2)
        r1 = rng.randint(r0, height - 2)
        region_free = sum(
            1
            for r in range(r0, r1 + 1)
            for c in range(c0, c1 + 1)
            if (c, r) not in placed
            and (c, r) != agent_start
            and grid.get((c, r)) != "##"
        )
        if region_free >= 1:
            randomized.append(
                RandomizedSet(
                    color=rng.choice(_COLORS),
                    kind=rng.choice(["key", "ball", "box"]),
                    count=rng.randint(1, min(3, region_free)),
                    region=(c0, r0, c1, r1),
                )
            )

    spec = LevelSpec(
        id=f"rand_{rng.randint(0, 10**6)}",
        width=width,
        height=height,
        agent_start=agent_start,
        agent_dir=rng.choice(_DIRS),
        view_size=rng.choice([(8, 13), (7, 7), (5, 9)]),
        see_through_walls=rng.random() < 0.2,
        max_steps=rng.choice([100, 200]),
        soak_duration=rng.randint(2, 5),
        grid_objects=grid,
        placed_objects=placed,
        overlays=overlays,
        randomized_sets=randomized,
    )
    spec.validate()
    return spec
