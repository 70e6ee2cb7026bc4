"""Decision oracles and the prompt plumbing that feeds them.

An oracle answers one question: given a context (task, progress so far, what
the pending choice produces, and the numbered options), which option do we
take?  Deterministic oracles (scripted, exhaustive-first, seeded-random)
never see rendered text; the interactive and HTTP oracles render the context
through a named prompt template and parse the textual reply back into a
1-based index.
"""

from __future__ import annotations

import os
import re
import sys
from abc import ABC, abstractmethod
from dataclasses import dataclass
from random import Random
from typing import Sequence, TextIO


class OracleFailure(Exception):
    """The oracle could not produce a usable decision."""


class ReplyError(ValueError):
    """A textual reply did not contain a usable choice index."""


@dataclass(frozen=True)
class PromptContext:
    task_description: str
    progress_lines: tuple[str, ...]
    target_item: str
    choices: tuple[str, ...]  # labels, presented 1-based


@dataclass(frozen=True)
class OracleConfig:
    kind: str = "exhaustive"  # scripted | exhaustive | random | interactive | http
    seed: int = 0
    script: tuple[int, ...] = ()
    endpoint: str = ""
    model: str = ""
    api_key_env: str = "STACKPLAN_API_KEY"
    template: str = "openagi"
    temperature: float = 0.0
    timeout: float = 60.0
    max_retries: int = 3


def _numbered(choices: Sequence[str], sep: str, terminator: str = "") -> str:
    lines = [f"{i}{sep}{label}" for i, label in enumerate(choices, start=1)]
    if terminator:
        return (",\n".join(lines)) + terminator
    return "\n".join(lines)


def _openagi(ctx: PromptContext) -> str:
    progress = "\n".join(ctx.progress_lines)
    return (
        f'You will help me generate a plan for the problem: "{ctx.task_description}" '
        "by answering a series of my questions.\n"
        "\n"
        "Current Progress:\n"
        "\n"
        f"{progress}\n"
        "\n"
        f"To get {ctx.target_item}, we have the following choices:\n"
        "\n"
        f"{_numbered(ctx.choices, ': ', '.')}\n"
        "\n"
        "Your answer should be only an integer, referring to the desired choice."
    )


def _daily(ctx: PromptContext) -> str:
    progress = "\n".join(ctx.progress_lines)
    return (
        f"{ctx.task_description}\n"
        "\n"
        "Let's start planning from the end.\n"
        "\n"
        "Current Progress:\n"
        "\n"
        f"{progress}\n"
        "\n"
        f"Decide on the activity ending at {ctx.target_item}:00.\n"
        "\n"
        "Here are possible options:\n"
        "\n"
        f"{_numbered(ctx.choices, '. ')}\n"
        "\n"
        "Your reply should be only one number, such as 1, referring to the option."
    )


def _cooking(ctx: PromptContext) -> str:
    progress = "\n".join(ctx.progress_lines)
    return (
        f"{ctx.task_description}\n"
        "\n"
        "Current Progress:\n"
        "\n"
        f"{progress}\n"
        "\n"
        "Decide on the previous step before current progress.\n"
        "\n"
        f"Here are possible options to get {ctx.target_item}.\n"
        "\n"
        f"{_numbered(ctx.choices, ': ')}\n"
        "\n"
        "Your reply should be only one number, such as 1, referring to the option."
    )


def _risk(ctx: PromptContext) -> str:
    progress = "\n".join(ctx.progress_lines)
    return (
        "Task: You are a plan maker to design a risk management plan for deals "
        "related to companies.\n"
        "\n"
        f"Scenario: {ctx.task_description}\n"
        "\n"
        "Current Progress:\n"
        "\n"
        f"{progress}\n"
        "\n"
        f"Decide on the next action regarding {ctx.target_item}.\n"
        "\n"
        f"{_numbered(ctx.choices, ': ')}\n"
        "\n"
        "Your answer should be only one number, such as 1, referring to the option."
    )


TEMPLATES = {
    "openagi": _openagi,
    "daily": _daily,
    "cooking": _cooking,
    "risk": _risk,
}


def build_prompt(ctx: PromptContext, template: str) -> str:
    """Render the context through a named template; byte-stable per input."""
    if not ctx.choices:
        raise ReplyError("cannot build a prompt with no choices")
    try:
        render = TEMPLATES[template]
    except KeyError:
        raise ReplyError(f"unknown template {template!r}") from None
    return render(ctx)


_INT = re.compile(r"\d+")


def parse_reply(reply: str, n_choices: int) -> int:
    """First maximal decimal integer in the reply, validated against [1, n]."""
    if n_choices < 1:
        raise ReplyError("no choices to pick from")
    match = _INT.search(reply)
    if match is None:
        raise ReplyError(f"no integer found in reply {reply!r}")
    value = int(match.group())
    if not 1 <= value <= n_choices:
        raise ReplyError(f"reply {value} out of range 1..{n_choices}")
    return value


class DecisionOracle(ABC):
    """Maps a prompt context to a 1-based choice index, or raises OracleFailure."""

    @abstractmethod
    def decide(self, ctx: PromptContext) -> int:
        ...


class ExhaustiveOracle(DecisionOracle):
    """Always the first option; with backtracking this is a full DFS."""

    def decide(self, ctx: PromptContext) -> int:
        return 1


class ScriptedOracle(DecisionOracle):
    """Replays a fixed index sequence, optionally falling back to another oracle."""

    def __init__(self, script: Sequence[int], fallback: DecisionOracle | None = None):
        if any(v < 1 for v in script):
            raise OracleFailure("scripted indices must be >= 1")
        self._script = list(script)
        self._pos = 0
        self._fallback = fallback

    def decide(self, ctx: PromptContext) -> int:
        if self._pos >= len(self._script):
            if self._fallback is not None:
                return self._fallback.decide(ctx)
            raise OracleFailure("script exhausted")
        value = self._script[self._pos]
        self._pos += 1
        if value > len(ctx.choices):
            raise OracleFailure(
                f"scripted choice {value} out of range 1..{len(ctx.choices)}")
        return value


class RandomOracle(DecisionOracle):
    """Uniform choice from a seeded stream; bit-reproducible per seed."""

    def __init__(self, seed: int = 0):
        self._rng = Random(seed)

    def decide(self, ctx: PromptContext) -> int:
        return self._rng.randint(1, len(ctx.choices))


class InteractiveOracle(DecisionOracle):
    """Prompts on standard error and reads the answer from standard input."""

    def __init__(self, template: str = "openagi", max_retries: int = 3,
                 stdin: TextIO | None = None, stderr: TextIO | None = None):
        self._template = template
        self._max_retries = max_retries
        self._stdin = stdin if stdin is not None else sys.stdin
        self._stderr = stderr if stderr is not None else sys.stderr

    def decide(self, ctx: PromptContext) -> int:
        prompt = build_prompt(ctx, self._template)
        last: Exception | None = None
        for _ in range(self._max_retries):
            self._stderr.write(prompt + "\n> ")
            self._stderr.flush()
            line = self._stdin.readline()
            if not line:
                raise OracleFailure("standard input closed")
            try:
                return parse_reply(line, len(ctx.choices))
            except ReplyError as exc:
                last = exc
        raise OracleFailure(f"retries exhausted: {last}")


class HttpOracle(DecisionOracle):
    """Minimal chat-completion client: one fresh single-turn request per decision."""

    def __init__(self, endpoint: str, model: str, api_key_env: str = "STACKPLAN_API_KEY",
                 template: str = "openagi", temperature: float = 0.0,
                 timeout: float = 60.0, max_retries: int = 3):
        self._endpoint = endpoint
        self._model = model
        self._api_key_env = api_key_env
        self._template = template
        self._temperature = temperature
        self._timeout = timeout
        self._max_retries = max_retries

    def _reply_text(self, prompt: str) -> str:
        import requests

        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self._api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        payload = {
            "model": self._model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self._temperature,
        }
        try:
            response = requests.post(self._endpoint, json=payload, headers=headers,
                                     timeout=self._timeout)
            response.raise_for_status()
            data = response.json()
        except requests.RequestException as exc:
            raise OracleFailure(f"transport error: {exc}") from exc
        try:
            return str(data["choices"][0]["message"]["content"])
        except (KeyError, IndexError, TypeError) as exc:
            raise ReplyError(f"malformed chat-completion response: {exc}") from exc

    def decide(self, ctx: PromptContext) -> int:
        prompt = build_prompt(ctx, self._template)
        last: Exception | None = None
        for _ in range(self._max_retries):
            try:
                reply = self._reply_text(prompt)
                return parse_reply(reply, len(ctx.choices))
            except ReplyError as exc:
                last = exc
        raise OracleFailure(f"retries exhausted: {last}")


def make_oracle(config: OracleConfig) -> DecisionOracle:
    if config.kind == "exhaustive":
        return ExhaustiveOracle()
    if config.kind == "scripted":
        return ScriptedOracle(config.script)
    if config.kind == "random":
        return RandomOracle(config.seed)
    if config.kind == "interactive":
        return InteractiveOracle(config.template, config.max_retries)
    if config.kind == "http":
        if not config.endpoint:
            raise OracleFailure("http oracle needs an endpoint")
        return HttpOracle(config.endpoint, config.model, config.api_key_env,
                          config.template, config.temperature, config.timeout,
                          config.max_retries)
    raise OracleFailure(f"unknown oracle kind {config.kind!r}")
