"""Evaluation harness: drive model adapters through the two probing protocols
over recorded trajectories and persist graded results.

Protocols:
  * ctrlstatic — each probe is an isolated, self-contained prompt.
  * innav — the conversation accumulates (action, observation) turns from the
    replay; probes are injected as extra user turns at their recorded steps.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, asdict
from importlib import resources
from typing import Optional, Protocol, runtime_checkable

import httpx

from .observe import Observation, render
from .probes import GroundTruth, ProbeQueryError
from .trajectory import (
    PlantedProbe,
    Trajectory,
    grade_response,
    replay,
    resolve_truth,
)
from .world import World

SCHEMA_VERSION = 1
PROTOCOLS = ("ctrlstatic", "innav")


def _prompt(name: str) -> str:
    return resources.files("gridprobe").joinpath(f"prompts/{name}.txt").read_text(encoding="utf-8")


@dataclass
class DecodingConfig:
    temperature: float = 0.0
    answer_tokens: int = 256
    thinking_tokens: int = 16384
    reasoning_effort: str = "medium"


@dataclass
class RetryPolicy:
    max_attempts: int = 3
    backoff_seconds: float = 0.5


class TransportError(Exception):
    """Endpoint failure after exhausting retries."""


@dataclass
class ProbeContext:
    """Out-of-band state handed to scripted adapters; HTTP adapters ignore it."""

    probe: PlantedProbe
    truth: GroundTruth
    world: World
    worlds: list[World]  # one per observation, oldest first
    obs_history: list[Observation]
    serializer: str


@runtime_checkable
class ModelAdapter(Protocol):
    model_id: str

    def complete(self, messages: list[dict], context: Optional[ProbeContext] = None) -> str:
        ...


class OracleAdapter:
    """Reads the authoritative ground truth; defines the 0%-hallucination floor."""

    model_id = "oracle"

    def complete(self, messages, context=None) -> str:
        assert context is not None
        return f"ANSWER: {context.truth.render()}"


class StaleMemoryAdapter:
    """Answers every probe from the world as it was `lag` observations earlier.

    Wrong exactly when the probed state changed within the window, which makes
    it a positive control for memory-category probes.
    """

    def __init__(self, lag: int = 3):
        self.lag = lag
        self.model_id = f"stale-memory-{lag}"

    def complete(self, messages, context=None) -> str:
        assert context is not None
        idx = max(0, len(context.worlds) - 1 - self.lag)
        stale_world = context.worlds[idx]
        stale_history = context.obs_history[: idx + 1]
        try:
            truth = resolve_truth(context.probe, stale_world, stale_history)
        except ProbeQueryError:
            # the question is unanswerable against the lagged view; abstain
            return "ANSWER: can't determine"
        return f"ANSWER: {truth.render()}"


class FixedAdapter:
    """Always returns the same text; useful for grading-path tests."""

    def __init__(self, text: str, model_id: str = "fixed"):
        self.text = text
        self.model_id = model_id

    def complete(self, messages, context=None) -> str:
        return self.text


class HTTPAdapter:
    """OpenAI-style chat-completions endpoint over HTTP with bounded retries."""

    def __init__(
        self,
        base_url: str,
        model_id: str,
        api_key: str = "",
        config: Optional[DecodingConfig] = None,
        retry: Optional[RetryPolicy] = None,
        timeout: float = 120.0,
    ):
        self.base_url = base_url.rstrip("/")
        self.model_id = model_id
        self.api_key = api_key
        self.config = config or DecodingConfig()
        self.retry = retry or RetryPolicy()
        self.timeout = timeout

    def complete(self, messages, context=None) -> str:
        payload = {
            "model": self.model_id,
            "messages": messages,
            "temperature": self.config.temperature,
            "max_tokens": self.config.answer_tokens + self.config.thinking_tokens,
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_error: Optional[Exception] = None
        for attempt in range(self.retry.max_attempts):
            try:
                resp = httpx.post(
                    f"{self.base_url}/chat/completions",
                    json=payload,
                    headers=headers,
                    timeout=self.timeout,
                )
                resp.raise_for_status()
                return resp.json()["choices"][0]["message"]["content"]
            except (httpx.HTTPError, KeyError, ValueError) as exc:
                last_error = exc
                time.sleep(self.retry.backoff_seconds * (2**attempt))
        raise TransportError(f"{self.model_id}: {last_error}") from last_error


# ---------------------------------------------------------------------------
# records


@dataclass
class EvalRecord:
    run_id: str
    model_id: str
    trajectory_id: str
    probe_id: str
    protocol: str  # ctrlstatic | innav
    serializer: str
    category: str
    question: str
    model_output: str
    verdict: str  # correct | hallucinated | unparseable | transport_failure
    latency: float
    quintile: int
    level_id: str = ""
    seed: int = 0
    ground_truth: str = ""
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return asdict(self)


def write_records(records: list[EvalRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_dict(), sort_keys=True, ensure_ascii=False) + "\n")


def read_records(path: str) -> list[EvalRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                data = json.loads(line)
                data.pop("schema_version", None)
                records.append(EvalRecord(**data))
    return records


def quintile_of(step: int, segment_length: int) -> int:
    """ceil(5 * step / segment_length), clamped to [1, 5]."""
    if segment_length <= 0:
        return 1
    return min(5, max(1, math.ceil(5 * step / segment_length)))


# ---------------------------------------------------------------------------
# protocol runners


def _probe_prompt(probe: PlantedProbe) -> str:
    return f"{_prompt('probe_framing')}\n{probe.question}\n\n{_prompt('answer_format')}"


def _ask(
    adapter: ModelAdapter, messages: list[dict], context: ProbeContext
) -> tuple[str, str, float]:
    """Returns (model_output, verdict, latency)."""
    t0 = time.perf_counter()
    try:
        output = adapter.complete(messages, context)
    except TransportError as exc:
        return f"[transport failure: {exc}]", "transport_failure", time.perf_counter() - t0
    latency = time.perf_counter() - t0
    verdict = grade_response(context.probe, context.truth, output)
    return output, verdict, latency


def _make_record(
    run_id: str,
    adapter: ModelAdapter,
    trajectory_id: str,
    protocol: str,
    serializer: str,
    probe: PlantedProbe,
    index: int,
    truth: GroundTruth,
    output: str,
    verdict: str,
    latency: float,
    segment_length: int,
    level_id: str,
    seed: int,
) -> EvalRecord:
    return EvalRecord(
        run_id=run_id,
        model_id=adapter.model_id,
        trajectory_id=trajectory_id,
        probe_id=probe.probe_id(index),
        protocol=protocol,
        serializer=serializer,
        category=probe.category,
        question=probe.question,
        model_output=output,
        verdict=verdict,
        latency=latency,
        quintile=quintile_of(probe.step, segment_length),
        level_id=level_id,
        seed=seed,
        ground_truth=truth.render(),
    )


def run_ctrl_static(
    traj: Trajectory,
    serializer: str,
    adapter: ModelAdapter,
    base_dir: str = ".",
    run_id: str = "run",
    trajectory_id: str = "traj",
) -> list[EvalRecord]:
    """One self-contained prompt per probe; probes are independent."""
    system = _prompt("system")
    records: list[EvalRecord] = []
    worlds: list[World] = []
    probe_index = {id(p): i for i, p in enumerate(traj.probes)}
    for ev in replay(traj, base_dir):
        worlds.append(ev.world)
        for probe, truth in ev.due_probes:
            view = render(serializer, ev.obs_history)
            messages = [
                {"role": "system", "content": system},
                {"role": "user", "content": f"{view}\n{_probe_prompt(probe)}"},
            ]
            context = ProbeContext(
                probe=probe,
                truth=truth,
                world=ev.world,
                worlds=list(worlds),
                obs_history=ev.obs_history,
                serializer=serializer,
            )
            output, verdict, latency = _ask(adapter, messages, context)
            seg = traj.segments[probe.segment]
            records.append(
                _make_record(
                    run_id, adapter, trajectory_id, "ctrlstatic", serializer,
                    probe, probe_index[id(probe)], truth, output, verdict, latency,
                    len(seg.actions), ev.world.level_id, seg.seed,
                )
            )
    return records


def run_in_nav(
    traj: Trajectory,
    serializer: str,
    adapter: ModelAdapter,
    base_dir: str = ".",
    run_id: str = "run",
    trajectory_id: str = "traj",
) -> list[EvalRecord]:
    """Probes asked inside an accumulating navigation dialogue. The recorded
    trajectory plays the navigator; the evaluated model only answers probes."""
    system = _prompt("system")
    messages: list[dict] = [{"role": "system", "content": system}]
    records: list[EvalRecord] = []
    worlds: list[World] = []
    probe_index = {id(p): i for i, p in enumerate(traj.probes)}
    for ev in replay(traj, base_dir):
        worlds.append(ev.world)
        view = render(serializer, ev.obs_history)
        if ev.step == 0:
            messages.append({"role": "user", "content": f"New room.\n{view}"})
        else:
            action = traj.segments[ev.segment].actions[ev.step - 1]
            messages.append({"role": "assistant", "content": f"ACTION: {action}"})
            messages.append({"role": "user", "content": view})
        for probe, truth in ev.due_probes:
            messages.append({"role": "user", "content": _probe_prompt(probe)})
            context = ProbeContext(
                probe=probe,
                truth=truth,
                world=ev.world,
                worlds=list(worlds),
                obs_history=ev.obs_history,
                serializer=serializer,
            )
            output, verdict, latency = _ask(adapter, messages, context)
            messages.append({"role": "assistant", "content": output})
            seg = traj.segments[probe.segment]
            records.append(
                _make_record(
                    run_id, adapter, trajectory_id, "innav", serializer,
                    probe, probe_index[id(probe)], truth, output, verdict, latency,
                    len(seg.actions), ev.world.level_id, seg.seed,
                )
            )
    return records


def run_protocol(protocol: str, *args, **kwargs) -> list[EvalRecord]:
    if protocol == "ctrlstatic":
        return run_ctrl_static(*args, **kwargs)
    if protocol == "innav":
        return run_in_nav(*args, **kwargs)
    raise ValueError(f"unknown protocol {protocol!r}")
