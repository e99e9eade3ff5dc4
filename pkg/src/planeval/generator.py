"""Model-agnostic decoding against an external text generator.

The generator sits behind a tiny wire protocol: POST a JSON body
``{goal, env, steps, mode}`` and get back ``{text, end}``. Iterative
decoding asks for one step at a time, feeding every previously
*generated* step back into the next request, until the generator signals
END; an N-step plan therefore costs N+1 calls. Single-pass decoding asks
once for the whole plan string. A scripted in-process generator plays
the same contract for tests.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Protocol, Sequence

import requests

from .errors import (
    EmptyFirstStepError,
    GeneratorUnreachableError,
    ProtocolError,
)
from .plan import SEPARATOR, Plan, TaskRecord, parse_plan

DEFAULT_MAX_STEPS = 15


class DecodeMode(str, Enum):
    ITERATIVE = "iterative"
    SINGLE_PASS = "single_pass"


@dataclass(frozen=True)
class GeneratorRequest:
    goal: str
    env_encoding: str | None
    steps_so_far: tuple[str, ...]
    mode: DecodeMode

    def __post_init__(self) -> None:
        if not isinstance(self.steps_so_far, tuple):
            object.__setattr__(self, "steps_so_far", tuple(self.steps_so_far))
        if self.mode is DecodeMode.SINGLE_PASS and self.steps_so_far:
            raise ProtocolError("single-pass requests carry no prior steps")

    def to_wire(self) -> dict:
        return {
            "goal": self.goal,
            "env": self.env_encoding,
            "steps": list(self.steps_so_far),
            "mode": self.mode.value,
        }


@dataclass(frozen=True)
class GeneratorResponse:
    text: str
    is_end: bool

    def __post_init__(self) -> None:
        if not self.is_end and not self.text.strip():
            raise ProtocolError("a non-END response must carry text")

    def to_wire(self) -> dict:
        return {"text": self.text, "end": self.is_end}


@dataclass(frozen=True)
class DecodeTrace:
    """What a decoding session produced, and every exchange behind it."""

    plan: Plan
    call_count: int
    truncated_by_cap: bool
    log: tuple[tuple[GeneratorRequest, GeneratorResponse], ...] = field(repr=False, default=())


class GeneratorClient(Protocol):
    def generate(self, request: GeneratorRequest) -> GeneratorResponse: ...


class HttpGeneratorClient:
    """POSTs the wire protocol to a configurable endpoint."""

    def __init__(self, endpoint: str, timeout: float = 30.0, retries: int = 2):
        self.endpoint = endpoint
        self.timeout = timeout
        self.retries = retries

    def generate(self, request: GeneratorRequest) -> GeneratorResponse:
        last_exc: Exception | None = None
        for _ in range(self.retries + 1):
            try:
                response = requests.post(
                    self.endpoint, json=request.to_wire(), timeout=self.timeout
                )
                break
            except (requests.ConnectionError, requests.Timeout) as exc:
                last_exc = exc
        else:
            raise GeneratorUnreachableError(
                f"generator at {self.endpoint} unreachable: {last_exc}"
            ) from last_exc
        if response.status_code != 200:
            raise ProtocolError(f"generator returned HTTP {response.status_code}")
        try:
            body = response.json()
        except ValueError as exc:
            raise ProtocolError(f"generator response is not JSON: {exc}") from exc
        if not isinstance(body, dict) or not isinstance(body.get("text"), str) or not isinstance(
            body.get("end"), bool
        ):
            raise ProtocolError(f"malformed generator response body: {body!r}")
        return GeneratorResponse(text=body["text"], is_end=body["end"])


class ScriptedGenerator:
    """In-process generator that replays a fixed script.

    Yields each script entry as a non-END response, then a clean END.
    With ``loop=True`` it cycles the script forever and never ends,
    which is how the decode cap gets exercised.
    """

    def __init__(self, script: Sequence[str], loop: bool = False):
        self.requests: list[GeneratorRequest] = []
        if loop:
            self._replies: Iterator[GeneratorResponse] = (
                GeneratorResponse(text, False) for text in itertools.cycle(script)
            )
        else:
            self._replies = iter(
                [GeneratorResponse(text, False) for text in script]
                + [GeneratorResponse("", True)]
            )

    def generate(self, request: GeneratorRequest) -> GeneratorResponse:
        self.requests.append(request)
        try:
            return next(self._replies)
        except StopIteration:
            return GeneratorResponse("", True)


def build_prompt(goal: str, steps: Sequence[str], env: str | None = None) -> str:
    """Input text for the next call: goal, prior steps, then the environment.

    Prior steps render as ``STEP i: <text>`` joined by the separator, so
    each prompt is a pure prefix-extension of the previous one.
    """
    parts = [goal]
    if steps:
        rendered = f" {SEPARATOR} ".join(
            f"STEP {i}: {text}" for i, text in enumerate(steps, start=1)
        )
        parts.append(rendered)
    if env is not None:
        parts.append(env)
    return " ".join(parts)


def _trim_step_text(text: str) -> str:
    # Chatty generators sometimes emit several steps at once; keep only
    # the first so the call-count contract holds.
    return text.split(SEPARATOR, 1)[0].strip()


def run_iterative(
    client: GeneratorClient,
    task: TaskRecord,
    env_encoding: str | None = None,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> DecodeTrace:
    """Decode one step per call until END or the step cap.

    Accumulated steps are always the model's own predictions; the
    reference plan never enters a prompt.
    """
    if max_steps < 1:
        raise ProtocolError(f"max_steps must be >= 1, got {max_steps}")
    steps: list[str] = []
    log: list[tuple[GeneratorRequest, GeneratorResponse]] = []
    truncated = False
    while True:
        request = GeneratorRequest(
            goal=task.goal,
            env_encoding=env_encoding,
            steps_so_far=tuple(steps),
            mode=DecodeMode.ITERATIVE,
        )
        response = client.generate(request)
        log.append((request, response))
        if response.is_end:
            trailing = _trim_step_text(response.text)
            if trailing:
                steps.append(trailing)
            break
        text = _trim_step_text(response.text)
        if not text:
            raise ProtocolError("generator sent an empty step")
        steps.append(text)
        if len(steps) >= max_steps:
            truncated = True
            break
    if not steps:
        raise EmptyFirstStepError(
            f"task {task.task_id}: generator emitted END on the first call"
        )
    return DecodeTrace(
        plan=Plan(tuple(steps)),
        call_count=len(log),
        truncated_by_cap=truncated,
        log=tuple(log),
    )


def run_single_pass(
    client: GeneratorClient,
    task: TaskRecord,
    env_encoding: str | None = None,
) -> DecodeTrace:
    """Ask for the whole plan in one call and parse it leniently."""
    request = GeneratorRequest(
        goal=task.goal,
        env_encoding=env_encoding,
        steps_so_far=(),
        mode=DecodeMode.SINGLE_PASS,
    )
    response = client.generate(request)
    plan = parse_plan(response.text, mode="lenient")
    return DecodeTrace(
        plan=plan,
        call_count=1,
        truncated_by_cap=False,
        log=((request, response),),
    )
