"""Pushdown automata: model, file format, nondeterministic acceptance.

States and stack symbols are plain token strings.  A transition is the
triplet form (input, pop; push...): from a state, on an input terminal (or
epsilon) with a given stack top, replace the top by a sequence of symbols
(leftmost pushed symbol becomes the new top) and move to a target state.
A DFA is the stackless special case where every transition pops and
re-pushes a single dummy symbol.

Acceptance is by final state: a word is accepted when some nondeterministic
path consumes it entirely and ends in an accept state, whatever the stack.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

Word = tuple[str, ...]

EPSILON_MARK = "~"  # spelling of epsilon input / empty push in automaton files
WILDCARD = "*"      # pop-position wildcard, expanded at load time

DEFAULT_CONFIG_LIMIT = 100_000


class AutomatonError(ValueError):
    """Malformed automaton source or inconsistent automaton."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UndecidedError(AutomatonError):
    """Acceptance search hit its exploration cap before deciding."""


@dataclass(frozen=True)
class Transition:
    from_state: str
    input: str | None          # None = epsilon
    pop: str                   # exactly one symbol, per the triplet form
    push: tuple[str, ...]      # leftmost = new top; empty = pop only
    to_state: str
    index: int
    prod_index: int | None = None  # production ordinal when built from a grammar

    def __str__(self) -> str:
        inp = self.input if self.input is not None else EPSILON_MARK
        push = " ".join(self.push) if self.push else EPSILON_MARK
        return f"{self.from_state} ( {inp} , {self.pop} ; {push} ) {self.to_state}"


@dataclass(frozen=True)
class Configuration:
    state: str
    stack: tuple[str, ...]  # top first
    consumed: int


@dataclass(frozen=True)
class Pda:
    states: tuple[str, ...]
    stack_alphabet: tuple[str, ...]
    input_alphabet: tuple[str, ...]
    transitions: tuple[Transition, ...]
    start_state: str
    initial_stack: str
    accept_states: tuple[str, ...]

    @cached_property
    def transitions_from(self) -> dict[tuple[str, str], tuple[Transition, ...]]:
        table: dict[tuple[str, str], list[Transition]] = {}
        for t in self.transitions:
            table.setdefault((t.from_state, t.pop), []).append(t)
        return {key: tuple(ts) for key, ts in table.items()}

    @cached_property
    def accept_set(self) -> frozenset[str]:
        return frozenset(self.accept_states)

    def initial_configuration(self) -> Configuration:
        return Configuration(self.start_state, (self.initial_stack,), 0)


def validate_pda(p: Pda) -> Pda:
    states = set(p.states)
    stack = set(p.stack_alphabet)
    inputs = set(p.input_alphabet)
    if p.start_state not in states:
        raise AutomatonError(f"start state {p.start_state!r} not declared")
    if p.initial_stack not in stack:
        raise AutomatonError(f"initial stack symbol {p.initial_stack!r} not declared")
    for q in p.accept_states:
        if q not in states:
            raise AutomatonError(f"accept state {q!r} not declared")
    for t in p.transitions:
        if t.from_state not in states:
            raise AutomatonError(f"transition {t.index}: undeclared state {t.from_state!r}")
        if t.to_state not in states:
            raise AutomatonError(f"transition {t.index}: undeclared state {t.to_state!r}")
        if t.pop not in stack:
            raise AutomatonError(f"transition {t.index}: undeclared stack symbol {t.pop!r}")
        for sym in t.push:
            if sym not in stack:
                raise AutomatonError(f"transition {t.index}: undeclared stack symbol {sym!r}")
        if t.input is not None and t.input not in inputs:
            raise AutomatonError(f"transition {t.index}: undeclared input symbol {t.input!r}")
    return p


def load_pda(text: str) -> Pda:
    """Parse automaton source text.

    Sections: ``states``, ``stack``, ``inputs`` (each may repeat and
    accumulates), ``start <state> <stack-symbol>``, ``accept <state>...``,
    then transition lines ``from ( input , pop ; push... ) to`` where ``~``
    stands for epsilon input or an empty push.  A ``*`` in pop position
    expands into one transition per declared stack symbol; ``*`` is illegal
    in input or push position.  ``#`` starts a comment.
    """
    states: list[str] = []
    stack_alphabet: list[str] = []
    input_alphabet: list[str] = []
    accept: list[str] = []
    start_state: str | None = None
    initial_stack: str | None = None
    raw_transitions: list[tuple[str, str | None, str, tuple[str, ...], str, int]] = []

    def extend_unique(target: list[str], items: Sequence[str], what: str, lineno: int) -> None:
        for item in items:
            if item in (EPSILON_MARK, WILDCARD):
                raise AutomatonError(f"reserved token {item!r} cannot be a {what}", line=lineno)
            if item not in target:
                target.append(item)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip("\r").strip()
        if not line:
            continue
        tokens = line.split()
        head = tokens[0]
        if head == "states":
            extend_unique(states, tokens[1:], "state", lineno)
        elif head == "stack":
            extend_unique(stack_alphabet, tokens[1:], "stack symbol", lineno)
        elif head == "inputs":
            extend_unique(input_alphabet, tokens[1:], "input symbol", lineno)
        elif head == "start":
            if start_state is not None:
                raise AutomatonError("duplicate start declaration", line=lineno)
            if len(tokens) != 3:
                raise AutomatonError("start line must be 'start <state> <stack-symbol>'",
                                     line=lineno)
            start_state, initial_stack = tokens[1], tokens[2]
        elif head == "accept":
            if len(tokens) < 2:
                raise AutomatonError("accept line needs at least one state", line=lineno)
            extend_unique(accept, tokens[1:], "state", lineno)
        else:
            # transition: from ( input , pop ; push... ) to
            if len(tokens) < 9 or tokens[1] != "(" or tokens[3] != "," or tokens[5] != ";" \
                    or tokens[-2] != ")":
                raise AutomatonError(
                    "expected transition 'from ( input , pop ; push... ) to'", line=lineno)
            from_state, inp, pop = tokens[0], tokens[2], tokens[4]
            push_tokens = tokens[6:-2]
            to_state = tokens[-1]
            if not push_tokens:
                raise AutomatonError("empty push list (write '~' for no push)", line=lineno)
            if inp == WILDCARD:
                raise AutomatonError("wildcard '*' is only legal in pop position", line=lineno)
            if WILDCARD in push_tokens:
                raise AutomatonError("wildcard '*' is only legal in pop position", line=lineno)
            if push_tokens == [EPSILON_MARK]:
                push: tuple[str, ...] = ()
            elif EPSILON_MARK in push_tokens:
                raise AutomatonError("'~' cannot be mixed with push symbols", line=lineno)
            else:
                push = tuple(push_tokens)
            input_sym = None if inp == EPSILON_MARK else inp
            raw_transitions.append((from_state, input_sym, pop, push, to_state, lineno))

    if start_state is None or initial_stack is None:
        raise AutomatonError("missing start declaration")
    if not accept:
        raise AutomatonError("missing accept declaration")

    # Wildcard pops expand only now, once the stack alphabet is complete.
    expanded: list[tuple[str, str | None, str, tuple[str, ...], str]] = []
    for from_state, inp, pop, push, to_state, lineno in raw_transitions:
        if pop == WILDCARD:
            if not stack_alphabet:
                raise AutomatonError("wildcard pop with empty stack alphabet", line=lineno)
            for sym in stack_alphabet:
                expanded.append((from_state, inp, sym, push, to_state))
        else:
            expanded.append((from_state, inp, pop, push, to_state))

    transitions = tuple(
        Transition(from_state, inp, pop, push, to_state, index=i)
        for i, (from_state, inp, pop, push, to_state) in enumerate(expanded)
    )
    pda = Pda(
        states=tuple(states),
        stack_alphabet=tuple(stack_alphabet),
        input_alphabet=tuple(input_alphabet),
        transitions=transitions,
        start_state=start_state,
        initial_stack=initial_stack,
        accept_states=tuple(accept),
    )
    return validate_pda(pda)


def serialize_pda(p: Pda) -> str:
    lines = [
        "states " + " ".join(p.states),
        "stack " + " ".join(p.stack_alphabet),
        "inputs " + " ".join(p.input_alphabet),
        f"start {p.start_state} {p.initial_stack}",
        "accept " + " ".join(p.accept_states),
        "",
    ]
    lines.extend(str(t) for t in p.transitions)
    return "\n".join(lines) + "\n"


def accepts(p: Pda, word: Sequence[str], max_configs: int = DEFAULT_CONFIG_LIMIT) -> bool:
    """True iff some path consumes the whole word and ends in an accept state.

    Breadth-first over configurations with epsilon cycles cut by a visited
    set on (state, stack, consumed).  Raises UndecidedError when more than
    ``max_configs`` configurations were explored without a verdict — never a
    silent False.
    """
    inputs = set(p.input_alphabet)
    for tok in word:
        if tok not in inputs:
            raise AutomatonError(f"unknown input symbol {tok!r} in word")
    w = tuple(word)
    n = len(w)
    table = p.transitions_from
    accept_set = p.accept_set

    start = (p.start_state, (p.initial_stack,), 0)
    queue: deque[tuple[str, tuple[str, ...], int]] = deque([start])
    visited = {start}
    explored = 0
    while queue:
        state, stack, consumed = queue.popleft()
        if consumed == n and state in accept_set:
            return True
        explored += 1
        if explored > max_configs:
            raise UndecidedError(
                f"exploration cap of {max_configs} configurations exceeded")
        if not stack:
            continue
        for t in table.get((state, stack[0]), ()):
            if t.input is None:
                nxt = (t.to_state, t.push + stack[1:], consumed)
            elif consumed < n and w[consumed] == t.input:
                nxt = (t.to_state, t.push + stack[1:], consumed + 1)
            else:
                continue
            if nxt not in visited:
                visited.add(nxt)
                queue.append(nxt)
    return False


def outgoing(p: Pda, c: Configuration) -> list[Transition]:
    """Transitions applicable at the configuration, in source order."""
    if not c.stack:
        return []
    return list(p.transitions_from.get((c.state, c.stack[0]), ()))
