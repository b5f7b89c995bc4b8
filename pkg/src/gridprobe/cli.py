"""Command-line interface: level tools, trajectory tools, evaluation runs,
reporting, and the local editor service."""

from __future__ import annotations

import os
import sys

import click

from .harness import (
    FixedAdapter,
    HTTPAdapter,
    OracleAdapter,
    StaleMemoryAdapter,
    read_records,
    run_protocol,
    write_records,
)
from .levels import LevelError, emit_level, parse_level
from .observe import SERIALIZERS, render
from .report import write_report
from .trajectory import TrajectoryError, load_trajectory, replay


@click.group()
def main() -> None:
    """Gridworld simulator, trajectory replay, and hallucination probing."""


# ---------------------------------------------------------------------------
# levels


@main.group()
def level() -> None:
    """Level file tools."""


@level.command("validate")
@click.argument("path", type=click.Path(exists=True))
def level_validate(path: str) -> None:
    """Parse and validate a level file; exit nonzero with a positioned error."""
    try:
        spec = parse_level(open(path, encoding="utf-8").read())
    except LevelError as exc:
        click.echo(f"INVALID {path}: {exc}", err=True)
        sys.exit(1)
    click.echo(f"OK {path}: {spec.id} ({spec.width}x{spec.height})")


@level.command("emit")
@click.argument("path", type=click.Path(exists=True))
def level_emit(path: str) -> None:
    """Print the canonical form of a level file."""
    try:
        spec = parse_level(open(path, encoding="utf-8").read())
    except LevelError as exc:
        click.echo(f"INVALID {path}: {exc}", err=True)
        sys.exit(1)
    click.echo(emit_level(spec), nl=False)


# ---------------------------------------------------------------------------
# trajectories


def _default_base(traj, traj_path: str) -> str:
    """Directory that level_file paths resolve against: the trajectory's own
    directory, or its parent when the level files only resolve there (the
    bundled layout keeps trajectories/ and levels/ as siblings)."""
    base = os.path.dirname(os.path.abspath(traj_path))
    if all(os.path.exists(os.path.join(base, s.level_file)) for s in traj.segments):
        return base
    parent = os.path.dirname(base)
    if all(os.path.exists(os.path.join(parent, s.level_file)) for s in traj.segments):
        return parent
    return base


@main.group()
def trajectory() -> None:
    """Trajectory file tools."""


@trajectory.command("validate")
@click.argument("path", type=click.Path(exists=True))
@click.option("--base-dir", default=None, help="Directory level_file paths resolve against.")
def trajectory_validate(path: str, base_dir: str) -> None:
    try:
        traj = load_trajectory(path)
        traj.validate(base_dir or _default_base(traj, path))
    except TrajectoryError as exc:
        click.echo(f"INVALID {path}: {exc}", err=True)
        sys.exit(1)
    n_actions = sum(len(s.actions) for s in traj.segments)
    click.echo(
        f"OK {path}: {len(traj.segments)} segment(s), {n_actions} action(s), "
        f"{len(traj.probes)} probe(s)"
    )


@trajectory.command("replay")
@click.argument("path", type=click.Path(exists=True))
@click.option("--base-dir", default=None, help="Directory level_file paths resolve against.")
@click.option("--serializer", type=click.Choice(SERIALIZERS), default="grid")
@click.option("--show-steps/--probes-only", default=False)
def trajectory_replay(path: str, base_dir: str, serializer: str, show_steps: bool) -> None:
    """Deterministically replay a trajectory, printing probes (and states)."""
    try:
        traj = load_trajectory(path)
        for ev in replay(traj, base_dir or _default_base(traj, path)):
            if show_steps:
                click.echo(f"--- segment {ev.segment} step {ev.step} ---")
                click.echo(render(serializer, ev.obs_history), nl=False)
            for probe, truth in ev.due_probes:
                click.echo(
                    f"[probe] segment={ev.segment} step={ev.step} "
                    f"type={probe.probe_type} q={probe.question!r} truth={truth.render()!r}"
                )
    except TrajectoryError as exc:
        click.echo(f"INVALID {path}: {exc}", err=True)
        sys.exit(1)
    click.echo("replay complete")


# ---------------------------------------------------------------------------
# evaluation


@main.group(name="eval")
def eval_group() -> None:
    """Run evaluations and build reports."""


@eval_group.command("run")
@click.option("--trajectory", "traj_path", required=True, type=click.Path(exists=True))
@click.option("--serializer", type=click.Choice(SERIALIZERS), required=True)
@click.option("--protocol", type=click.Choice(["ctrlstatic", "innav"]), required=True)
@click.option("--model", "model_id", required=True, help="Model id, or oracle / stale-memory / fixed:<text>.")
@click.option("--endpoint", default="", help="Chat-completions base URL for HTTP models.")
@click.option("--api-key-env", default="GRIDPROBE_API_KEY", show_default=True)
@click.option("--base-dir", default=None)
@click.option("--run-id", default="run")
@click.option("--out", "out_path", required=True, type=click.Path())
def eval_run(traj_path, serializer, protocol, model_id, endpoint, api_key_env,
             base_dir, run_id, out_path) -> None:
    """Evaluate one model on one trajectory and write JSONL records."""
    traj = load_trajectory(traj_path)
    base = base_dir or _default_base(traj, traj_path)
    if model_id == "oracle":
        adapter = OracleAdapter()
    elif model_id.startswith("stale-memory"):
        lag = int(model_id.rsplit("-", 1)[1]) if model_id[-1].isdigit() else 3
        adapter = StaleMemoryAdapter(lag)
    elif model_id.startswith("fixed:"):
        adapter = FixedAdapter(model_id.split(":", 1)[1])
    else:
        if not endpoint:
            raise click.UsageError("--endpoint is required for HTTP model ids")
        adapter = HTTPAdapter(endpoint, model_id, api_key=os.environ.get(api_key_env, ""))
    records = run_protocol(
        protocol, traj, serializer, adapter,
        base_dir=base, run_id=run_id,
        trajectory_id=os.path.splitext(os.path.basename(traj_path))[0],
    )
    write_records(records, out_path)
    graded = [r for r in records if r.verdict in ("correct", "hallucinated")]
    hall = sum(1 for r in graded if r.verdict == "hallucinated")
    rate = f"{hall / len(graded):.1%}" if graded else "n/a"
    click.echo(f"wrote {len(records)} records to {out_path} (hallucination rate {rate})")


@eval_group.command("report")
@click.option("--records", "records_paths", multiple=True, required=True, type=click.Path(exists=True))
@click.option("--group-by", default="category,serializer", show_default=True)
@click.option("--out-dir", default="report", show_default=True, type=click.Path())
def eval_report(records_paths, group_by, out_dir) -> None:
    """Aggregate JSONL records into a delimited table plus figures."""
    records = []
    for path in records_paths:
        records.extend(read_records(path))
    if not records:
        raise click.UsageError("no records found")
    groups = tuple(g.strip() for g in group_by.split(",") if g.strip())
    paths = write_report(records, out_dir, group_by=groups)
    for name, path in sorted(paths.items()):
        click.echo(f"{name}: {path}")


# ---------------------------------------------------------------------------
# editor service


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=int(os.environ.get("GRIDPROBE_PORT", 8722)), show_default=True)
def serve_cmd(host: str, port: int) -> None:
    """Start the local editor/recorder HTTP service."""
    from .server import serve

    serve(host=host, port=port)


if __name__ == "__main__":
    main()
