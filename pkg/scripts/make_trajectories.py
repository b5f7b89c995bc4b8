#!/usr/bin/env python3
"""Regenerate the bundled trajectory fixtures from their probe designs and
print each probe's replay-resolved ground truth for manual inspection."""

from __future__ import annotations

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from gridprobe.trajectory import (  # noqa: E402
    PlantedProbe,
    Segment,
    Trajectory,
    replay,
    save_trajectory,
)

PKG_DIR = os.path.join(os.path.dirname(__file__), "..", "src", "gridprobe")
OUT_DIR = os.path.join(PKG_DIR, "trajectories")

W = 6  # wait


def q(step, probe_type, question, query, category, segment=0):
    return PlantedProbe(
        segment=segment,
        step=step,
        probe_type=probe_type,
        question=question,
        metadata={"category": category, "query": query},
    )


def lit(step, probe_type, question, truth, category=None, segment=0):
    metadata = {} if category is None else {"category": category}
    return PlantedProbe(
        segment=segment,
        step=step,
        probe_type=probe_type,
        question=question,
        ground_truth=truth,
        metadata=metadata,
    )


def seg(level, seed, actions):
    return Segment(level_file=f"levels/{level}.txt", seed=seed, actions=actions)


TRAJECTORIES = {
    "p1_s0": Trajectory(
        segments=[seg("p1_dense_array", 0, [W, W])],
        probes=[
            q(0, "presence", "Is there a green ball in your current field of view?",
              {"op": "presence", "kind": "ball", "color": "green", "scope": "fov"}, "P"),
            q(0, "count", "How many blue balls do you see?",
              {"op": "count", "kind": "ball", "color": "blue", "scope": "fov"}, "P"),
            q(0, "state", "What color is the ball at R1, ahead 2?",
              {"op": "state", "at": [2, 1], "attribute": "color"}, "P"),
            q(0, "location", "Where is the blue key relative to you?",
              {"op": "location", "kind": "key", "color": "blue", "scope": "fov"}, "P"),
        ],
    ),
    "p2": Trajectory(
        segments=[seg("p2_corridor", 0, [2, 2, 2, 2])],
        probes=[
            q(0, "count", "How many balls are in your field of view?",
              {"op": "count", "kind": "ball", "scope": "fov"}, "P"),
            q(2, "presence", "Is there a yellow key in your field of view?",
              {"op": "presence", "kind": "key", "color": "yellow", "scope": "fov"}, "P"),
            q(4, "state", "What is the condition of the green box?",
              {"op": "state", "kind": "box", "color": "green", "scope": "fov"}, "P"),
            q(4, "location", "Where is the blue ball relative to you?",
              {"op": "location", "kind": "ball", "color": "blue", "scope": "fov"}, "P"),
        ],
    ),
    "p3_s0": Trajectory(
        segments=[seg("p3_rotation", 0, [1, 1])],
        probes=[
            q(0, "location", "Where is the red ball relative to you?",
              {"op": "location", "kind": "ball", "color": "red", "scope": "fov"}, "P"),
            q(0, "count", "How many grey balls can you see?",
              {"op": "count", "kind": "ball", "color": "grey", "scope": "fov"}, "P"),
            q(1, "location", "Where is the green key relative to you?",
              {"op": "location", "kind": "key", "color": "green", "scope": "fov"}, "P"),
            q(2, "location", "Where is the yellow box relative to you?",
              {"op": "location", "kind": "box", "color": "yellow", "scope": "fov"}, "P"),
            q(2, "presence", "Is the red ball in your current field of view?",
              {"op": "presence", "kind": "ball", "color": "red", "scope": "fov"}, "P"),
        ],
    ),
    "m1_s0": Trajectory(
        segments=[seg("m1_river_field", 0, [W] * 9)],
        probes=[
            q(3, "count", "How many balls in the room are wet right now?",
              {"op": "count", "kind": "ball", "state": "wet", "scope": "room"}, "M"),
            q(6, "state", "What is the condition of the red ball right now?",
              {"op": "state", "kind": "ball", "color": "red", "scope": "room"}, "M"),
            q(9, "location", "Where is the blue ball relative to you right now?",
              {"op": "location", "kind": "ball", "color": "blue", "scope": "fov"}, "M"),
            q(9, "count", "How many balls in the room have dried out?",
              {"op": "count", "kind": "ball", "state": "dry", "scope": "room"}, "M"),
        ],
    ),
    "m4": Trajectory(
        segments=[seg("m4_unreliable_narrator", 0, [W, W])],
        probes=[
            q(0, "count", "How many red balls are in this room?",
              {"op": "count", "kind": "ball", "color": "red", "scope": "room"}, "M"),
            q(1, "presence", "Is there a blue key anywhere in this room?",
              {"op": "presence", "kind": "key", "color": "blue", "scope": "room"}, "M"),
            q(2, "count", "How many blue balls do you see?",
              {"op": "count", "kind": "ball", "color": "blue", "scope": "fov"}, "M"),
        ],
    ),
    "c1a": Trajectory(
        segments=[seg("c1a_persistent_chain", 0, [2, 2, 2, 2, 2, 2])],
        probes=[
            q(0, "causal", "If you walk two steps forward onto the plate, will the gate be open?",
              {"op": "causal", "script": [2, 2], "check": {"door_state": "gate"}}, "C"),
            q(2, "causal", "What is the state of the gate right now?",
              {"op": "causal", "script": [], "check": {"door_state": "gate"}}, "C"),
            q(3, "causal", "You have stepped off the plate. Is the gate cell passable?",
              {"op": "causal", "script": [], "check": {"passable": [4, 3]}}, "C"),
        ],
    ),
    "c1b": Trajectory(
        segments=[seg("c1b_continuous_chain", 0, [2, 2, 2, 2])],
        probes=[
            q(2, "causal", "What is the state of the gate right now?",
              {"op": "causal", "script": [], "check": {"door_state": "gate"}}, "C"),
            q(4, "causal", "You have stepped off the plate. Is the gate cell passable?",
              {"op": "causal", "script": [], "check": {"passable": [4, 3]}}, "C"),
        ],
    ),
    "c5a": Trajectory(
        segments=[seg("c5a_adversarial_board", 0, [2, 2, 2, 2, 2, 2])],
        probes=[
            q(2, "causal", "What is the state of the gate right now?",
              {"op": "causal", "script": [], "check": {"door_state": "gate"}}, "C"),
            q(3, "causal",
              "The notice board says the gate slams shut when you leave the plate. "
              "You have stepped off. Is the gate cell passable?",
              {"op": "causal", "script": [], "check": {"passable": [4, 3]}}, "C"),
        ],
    ),
    "c2": Trajectory(
        segments=[seg("c2_fire_crossing", 0, [W, W, 3, 0, 4])],
        probes=[
            q(0, "causal", "If you just wait three steps, will the fire at (4,4) still be burning?",
              {"op": "causal", "script": [W, W, W], "check": {"fire_active": [4, 4]}}, "C"),
            q(2, "state", "What is the condition of the blue ball right now?",
              {"op": "state", "kind": "ball", "color": "blue", "scope": "room"}, "C"),
            q(2, "state", "What is the condition of the yellow ball right now?",
              {"op": "state", "kind": "ball", "color": "yellow", "scope": "room"}, "C"),
            q(5, "causal", "Is the fire at (4,4) still burning?",
              {"op": "causal", "script": [], "check": {"fire_active": [4, 4]}}, "C"),
        ],
    ),
    "c3": Trajectory(
        segments=[seg("c3_flood_room", 0, [2, 2, 2, 2, 2, 2])],
        probes=[
            q(0, "causal", "If you wait three steps instead of moving, will cell (4,5) be passable?",
              {"op": "causal", "script": [W, W, W], "check": {"passable": [4, 5]}}, "C"),
            q(2, "causal", "Is the cell directly ahead of you passable right now?",
              {"op": "causal", "script": [], "check": {"passable": [4, 4]}}, "C"),
            q(4, "causal", "Is the flood active on cell (4,5)?",
              {"op": "causal", "script": [], "check": {"flood_active": [4, 5]}}, "C"),
        ],
    ),
    "c6_s42": Trajectory(
        segments=[seg("c6_flood_fire_escape", 42,
                      [W] * 14 + [2, 2, 2, 1, 2, 2, 2, 1, 2, 0, 2, 2, 0, 2, 2, 2, 1, 2, 2, 2])],
        probes=[
            lit(5, "state",
                "According to the notice board, when does the flood reach the fire barrier?",
                "step 2", "X"),
            lit(8, "presence", "Is the fire barrier at row 6 currently passable?", "false", "C"),
            lit(12, "presence", "Is the fire barrier at row 6 currently passable?", "false"),
            lit(16, "presence", "Is the fire barrier passable now?", "true", "C"),
            q(26, "causal", "What is the state of the exit door right now?",
              {"op": "causal", "script": [], "check": {"door_state": "exit"}}, "C"),
            q(34, "causal", "What occupies cell (11,3), where you are standing?",
              {"op": "causal", "script": [], "check": {"object_at": [11, 3]}}, "C"),
        ],
    ),
    "u1": Trajectory(
        segments=[seg("u1_fog_of_war", 0, [W, W])],
        probes=[
            q(0, "uncertainty", "Is there a red key in the sealed west vault?",
              {"op": "uncertainty", "region": [1, 1, 2, 2],
               "fact": {"op": "presence", "kind": "key", "color": "red",
                        "scope": "region", "region": [1, 1, 2, 2]}}, "U"),
            q(1, "uncertainty", "Is there a golden crown in the sealed east vault?",
              {"op": "uncertainty", "region": [8, 1, 9, 2],
               "fact": {"op": "presence", "kind": "box",
                        "scope": "region", "region": [8, 1, 9, 2]}}, "U"),
            q(2, "uncertainty", "Is there a notice board directly ahead of you?",
              {"op": "uncertainty", "region": [5, 3, 5, 3],
               "fact": {"op": "presence", "kind": "notice_board",
                        "scope": "region", "region": [5, 3, 5, 3]}}, "U"),
        ],
    ),
    "u2": Trajectory(
        segments=[
            seg("u2_oracle_high", 0, [W]),
            seg("u2_oracle_mid", 0, [W]),
            seg("u2_oracle_low", 0, [W]),
        ],
        probes=[
            q(0, "uncertainty",
              "A signpost with 80% stated accuracy says the sealed chamber holds a blue key. "
              "Does it?",
              {"op": "uncertainty", "region": [4, 1, 4, 1],
               "fact": {"op": "presence", "kind": "key", "color": "blue",
                        "scope": "region", "region": [4, 1, 4, 1]}}, "U", segment=0),
            q(0, "uncertainty",
              "A signpost with 50% stated accuracy says the sealed chamber holds a blue key. "
              "Does it?",
              {"op": "uncertainty", "region": [4, 1, 4, 1],
               "fact": {"op": "presence", "kind": "key", "color": "blue",
                        "scope": "region", "region": [4, 1, 4, 1]}}, "U", segment=1),
            q(1, "uncertainty",
              "How many signposts are in your field of view right now?",
              {"op": "uncertainty", "region": [3, 3, 5, 3],
               "fact": {"op": "count", "kind": "signpost",
                        "scope": "region", "region": [3, 3, 5, 3]}}, "U", segment=2),
        ],
    ),
    "x1": Trajectory(
        segments=[
            seg("p2_corridor", 0, [2, 2, 2, 2]),
            seg("c1a_persistent_chain", 0, [2, 2, 2, 2, 2, 2]),
            seg("u1_fog_of_war", 0, [W]),
        ],
        probes=[
            lit(0, "count", "How many balls did you see in the corridor zone?",
                1, "X", segment=1),
            lit(2, "state", "What color was the key in the corridor zone?",
                "yellow", "X", segment=1),
            lit(0, "presence", "Did the gate zone contain a goal tile?",
                "yes", "X", segment=2),
            lit(1, "count", "Across all three zones, how many notice boards have you seen?",
                2, "X", segment=2),
        ],
    ),
}


def main() -> None:
    os.makedirs(OUT_DIR, exist_ok=True)
    for name, traj in TRAJECTORIES.items():
        traj.validate(PKG_DIR)
        print(f"== {name} ==")
        for ev in replay(traj, PKG_DIR):
            for probe, truth in ev.due_probes:
                print(f"  seg {ev.segment} step {ev.step:>2} [{probe.category}] "
                      f"{probe.question[:60]!r} -> {truth.render()!r}")
        save_trajectory(traj, os.path.join(OUT_DIR, f"{name}.json"))
    print(f"wrote {len(TRAJECTORIES)} trajectories to {OUT_DIR}")


if __name__ == "__main__":
    main()
