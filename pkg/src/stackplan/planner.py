"""Automaton-supervised plan generation with budgets, provenance and backtracking.

A generation session walks a pushdown automaton, asking a decision oracle to
pick one option whenever the automaton offers choices.  Every stack entry
carries provenance — which plan-tree node it belongs to and which input slot
of its parent it will eventually fill — so that emitting a terminal wires a
new tree node into the right place.  Emitted words are therefore always
prefix (operator-first) serializations of the growing tree.

Dead ends (no feasible option, or the per-path step cap) trigger exact
backtracking: every decision is snapshotted with full copies of the
configuration, budgets and tree, and exhausted branches are excluded from
the restored choice list.  The search is a complete depth-first exploration
of the budget-bounded, step-capped space, so a plan is found whenever one
exists in that space.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from .automaton import Configuration, Pda, Transition
from .oracles import DecisionOracle, OracleFailure, PromptContext

Word = tuple[str, ...]

KIND_EXPAND = "expand-production"
KIND_CONSUME = "consume-terminal"
KIND_ACCEPT = "accept-move"


class PlanError(ValueError):
    """Invalid session input or misuse of the generation API."""


class NoValidPlan(PlanError):
    """The whole budget-bounded, step-capped search space is exhausted."""


class StepCapExceeded(PlanError):
    """A path hit the step cap; the driver treats this as a dead end."""


@dataclass(frozen=True)
class ToolSpec:
    """One usable terminal: display text, data modalities, and a use budget.

    ``budget=None`` means the terminal may be used any number of times.
    Input modalities are listed in the argument order of the corresponding
    production (the stack symbols pushed after the tool's category symbol).
    """

    terminal: str
    display_name: str
    input_modalities: tuple[str, ...] = ()
    output_modality: str = ""
    budget: int | None = 1


@dataclass(frozen=True)
class StackEntry:
    """A stack symbol tagged with the tree slot it will eventually resolve."""

    symbol: str
    node_id: int
    parent_node: int | None = None
    arg_index: int | None = None


@dataclass(frozen=True)
class Choice:
    label: str
    kind: str  # KIND_EXPAND | KIND_CONSUME | KIND_ACCEPT
    terminal: str | None
    transitions: tuple[Transition, ...]
    prod_index: int | None = None


@dataclass
class PlanNode:
    node_id: int
    terminal: str | None = None      # None while the head terminal is pending
    parent: int | None = None
    arg_index: int | None = None
    slots: int = 0                   # input slots allocated so far
    children: list[tuple[int, int]] = field(default_factory=list)  # (arg, child id)


@dataclass
class PlanTree:
    nodes: dict[int, PlanNode] = field(default_factory=dict)
    roots: list[int] = field(default_factory=list)
    complete: bool = False

    def node(self, node_id: int) -> PlanNode:
        existing = self.nodes.get(node_id)
        if existing is None:
            existing = PlanNode(node_id)
            self.nodes[node_id] = existing
        return existing

    @property
    def root(self) -> int:
        if len(self.roots) != 1:
            raise PlanError(f"tree has {len(self.roots)} roots, expected exactly one")
        return self.roots[0]

    def preorder(self) -> list[PlanNode]:
        out: list[PlanNode] = []

        def visit(node_id: int) -> None:
            node = self.nodes[node_id]
            out.append(node)
            for _arg, child in node.children:
                visit(child)

        for root in self.roots:
            visit(root)
        return out

    def preorder_terminals(self) -> Word:
        return tuple(n.terminal for n in self.preorder() if n.terminal is not None)

    def copy(self) -> "PlanTree":
        clone = PlanTree(roots=list(self.roots), complete=self.complete)
        clone.nodes = {
            nid: PlanNode(n.node_id, n.terminal, n.parent, n.arg_index, n.slots,
                          list(n.children))
            for nid, n in self.nodes.items()
        }
        return clone


@dataclass
class Snapshot:
    """Everything needed to re-enter a decision point during backtracking."""

    state: str
    stack: tuple[StackEntry, ...]
    emitted: Word
    budgets: dict[str, int]
    tree: PlanTree
    steps_taken: int
    next_node_id: int
    choice_list: tuple[Choice, ...]
    tried: set[int]  # 0-based indices into choice_list


@dataclass
class GenState:
    """One live generation session; confined to a single thread of control."""

    pda: Pda
    tools: dict[str, ToolSpec]
    task_description: str
    state: str
    stack: tuple[StackEntry, ...]
    step_cap: int
    emitted: Word = ()
    budgets_remaining: dict[str, int] = field(default_factory=dict)
    tree: PlanTree = field(default_factory=PlanTree)
    trail: list[Snapshot] = field(default_factory=list)
    steps_taken: int = 0
    next_node_id: int = 0
    pending: tuple[tuple[Choice, ...], set[int]] | None = None
    backtracks: int = 0

    @property
    def config(self) -> Configuration:
        return Configuration(self.state, tuple(e.symbol for e in self.stack),
                             len(self.emitted))

    @property
    def completed(self) -> bool:
        return self.state in self.pda.accept_set and len(self.stack) <= 1


def load_tools(text: str) -> list[ToolSpec]:
    """Parse a tool registry: ``terminal | display | in, in -> out | budget``.

    The budget field is a nonnegative integer or ``*`` for unlimited.
    """
    specs: list[ToolSpec] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip("\r").strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split("|")]
        if len(fields) != 4:
            raise PlanError(f"line {lineno}: expected 'terminal | display | io | budget'")
        terminal, display, io_field, budget_field = fields
        if not terminal or not display:
            raise PlanError(f"line {lineno}: empty terminal or display name")
        if terminal in seen:
            raise PlanError(f"line {lineno}: duplicate tool {terminal!r}")
        seen.add(terminal)
        if "->" not in io_field:
            raise PlanError(f"line {lineno}: modalities must be 'in, in -> out'")
        ins, _, out = io_field.partition("->")
        inputs = tuple(m.strip() for m in ins.split(",") if m.strip())
        if budget_field == "*":
            budget: int | None = None
        else:
            try:
                budget = int(budget_field)
            except ValueError:
                raise PlanError(f"line {lineno}: bad budget {budget_field!r}") from None
            if budget < 0:
                raise PlanError(f"line {lineno}: negative budget")
        specs.append(ToolSpec(terminal, display, inputs, out.strip(), budget))
    return specs


def init_session(
    pda: Pda,
    tools: Sequence[ToolSpec],
    task_description: str = "",
    step_cap: int | None = None,
) -> GenState:
    """Fresh session at the automaton's start configuration.

    The automatic step cap is (sum of finite budgets) x (longest push) + 16,
    which comfortably bounds any plan the budgets allow while guaranteeing
    termination on automata that could otherwise loop.
    """
    tool_map: dict[str, ToolSpec] = {}
    for spec in tools:
        if spec.terminal in tool_map:
            raise PlanError(f"duplicate tool {spec.terminal!r}")
        tool_map[spec.terminal] = spec
    inputs = set(pda.input_alphabet)
    budgets: dict[str, int] = {}
    for spec in tool_map.values():
        if spec.budget is None:
            continue
        if spec.terminal not in inputs:
            raise PlanError(f"tool terminal {spec.terminal!r} unknown to the automaton")
        budgets[spec.terminal] = spec.budget
    if step_cap is None:
        longest_push = max((len(t.push) for t in pda.transitions), default=1)
        step_cap = sum(budgets.values()) * max(longest_push, 1) + 16
    if step_cap < 1:
        raise PlanError("step cap must be >= 1")

    root_entry = StackEntry(pda.initial_stack, node_id=0)
    return GenState(
        pda=pda,
        tools=tool_map,
        task_description=task_description,
        state=pda.start_state,
        stack=(root_entry,),
        step_cap=step_cap,
        budgets_remaining=budgets,
        next_node_id=1,
    )


def _display(s: GenState, terminal: str) -> str:
    spec = s.tools.get(terminal)
    return spec.display_name if spec else terminal


def _in_budget(s: GenState, terminal: str) -> bool:
    return s.budgets_remaining.get(terminal, 1) > 0


def _find_consume(s: GenState, from_state: str, terminal: str) -> Transition | None:
    for t in s.pda.transitions_from.get((from_state, terminal), ()):
        if t.input == terminal:
            return t
    return None


def _category_productions(s: GenState, state: str, symbol: str) -> list[Transition] | None:
    """Productions of a fusable category: all epsilon expansions of ``symbol``
    at ``state`` push exactly one terminal.  None when not a category."""
    prods = [t for t in s.pda.transitions_from.get((state, symbol), ())]
    if not prods:
        return None
    inputs = set(s.pda.input_alphabet)
    for t in prods:
        if t.input is not None or len(t.push) != 1 or t.push[0] not in inputs:
            return None
    return prods


def _expansion_label(t: Transition) -> str:
    rhs = " ".join(t.push) if t.push else "eps"
    return f"{t.pop} -> {rhs}"


def _uniquify(choices: list[Choice]) -> list[Choice]:
    seen: dict[str, int] = {}
    out: list[Choice] = []
    for choice in choices:
        count = seen.get(choice.label, 0) + 1
        seen[choice.label] = count
        if count > 1:
            choice = replace(choice, label=f"{choice.label} (option {count})")
        out.append(choice)
    return out


def feasible_choices(s: GenState) -> list[Choice]:
    """Options the oracle may pick from, in automaton source order.

    Epsilon expansions whose first pushed symbol is a category (a nonterminal
    whose every production pushes a single terminal) are replaced by one
    fused choice per in-budget member terminal: the fused choice applies the
    expansion, the member production and the terminal consumption atomically.
    A single-terminal expansion is likewise fused with its consumption.
    Choices out of budget, and branches already tried at a restored decision
    point, are excluded.  An empty list signals a dead end or completion.
    """
    if s.completed:
        return []
    if s.pending is not None:
        choice_list, tried = s.pending
        return [c for i, c in enumerate(choice_list) if i not in tried]

    if not s.stack:
        return []
    inputs = set(s.pda.input_alphabet)
    top = s.stack[0].symbol
    choices: list[Choice] = []
    for t in s.pda.transitions_from.get((s.state, top), ()):
        if t.input is not None:
            if not _in_budget(s, t.input):
                continue
            choices.append(Choice(
                label=_display(s, t.input), kind=KIND_CONSUME,
                terminal=t.input, transitions=(t,), prod_index=t.prod_index))
            continue
        first = t.push[0] if t.push else None
        if first is not None and first in inputs and len(t.push) == 1:
            # single-terminal expansion, fused with its consumption
            consume = _find_consume(s, t.to_state, first)
            if consume is None or not _in_budget(s, first):
                continue
            choices.append(Choice(
                label=_display(s, first), kind=KIND_EXPAND,
                terminal=first, transitions=(t, consume), prod_index=t.prod_index))
            continue
        category = _category_productions(s, t.to_state, first) if first is not None \
            and first not in inputs else None
        if category is not None:
            for u in category:
                terminal = u.push[0]
                if not _in_budget(s, terminal):
                    continue
                consume = _find_consume(s, u.to_state, terminal)
                if consume is None:
                    continue
                choices.append(Choice(
                    label=f"the output of {_display(s, terminal)}", kind=KIND_EXPAND,
                    terminal=terminal, transitions=(t, u, consume),
                    prod_index=t.prod_index))
            continue
        kind = KIND_ACCEPT if t.to_state in s.pda.accept_set and t.prod_index is None \
            else KIND_EXPAND
        label = "Finish the plan." if kind == KIND_ACCEPT else _expansion_label(t)
        choices.append(Choice(
            label=label, kind=kind, terminal=None, transitions=(t,),
            prod_index=t.prod_index))
    return _uniquify(choices)


def _apply_transition(s: GenState, t: Transition) -> None:
    entry = s.stack[0]
    if entry.symbol != t.pop:
        raise PlanError(f"transition {t.index} does not match stack top {entry.symbol!r}")
    below = s.stack[1:]
    # An epsilon move on the lone bottom entry that pushes new work over a
    # re-push of the popped symbol (the marker-over-bottom pattern, e.g. the
    # initial push of a converted grammar) keeps that entry untouched at the
    # bottom instead of turning it into an input slot.
    pass_through = (t.input is None and len(s.stack) == 1 and len(t.push) >= 2
                    and t.push[-1] == t.pop)
    pushed = t.push[:-1] if pass_through else t.push
    kept = (entry,) if pass_through else ()

    new_entries: list[StackEntry] = []
    if t.input is not None:
        # Emit a terminal: materialize the node at the consumed entry's slot,
        # then open one input slot per pushed symbol.
        node_id = entry.node_id
        node = s.tree.node(node_id)
        node.terminal = t.input
        node.parent = entry.parent_node
        node.arg_index = entry.arg_index
        if entry.parent_node is None:
            s.tree.roots.append(node_id)
        else:
            s.tree.node(entry.parent_node).children.append((entry.arg_index, node_id))
        for sym in pushed:
            child_id = s.next_node_id
            s.next_node_id += 1
            new_entries.append(StackEntry(sym, child_id, node_id, node.slots))
            node.slots += 1
        if t.input in s.budgets_remaining:
            remaining = s.budgets_remaining[t.input] - 1
            if remaining < 0:
                raise PlanError(f"budget for {t.input!r} would go negative")
            s.budgets_remaining[t.input] = remaining
        s.emitted = s.emitted + (t.input,)
    elif pushed:
        if pass_through:
            # fresh subplan slot over the preserved bottom marker
            head_id = s.next_node_id
            s.next_node_id += 1
            new_entries.append(StackEntry(pushed[0], head_id))
        else:
            # leftmost pushed symbol inherits the popped entry's slot
            head_id = entry.node_id
            new_entries.append(StackEntry(pushed[0], head_id, entry.parent_node,
                                          entry.arg_index))
        head = s.tree.node(head_id)
        for sym in pushed[1:]:
            child_id = s.next_node_id
            s.next_node_id += 1
            new_entries.append(StackEntry(sym, child_id, head_id, head.slots))
            head.slots += 1
    # epsilon production with nothing pushed: the slot dissolves

    s.stack = tuple(new_entries) + kept + below
    s.state = t.to_state


def _capture(s: GenState, choice_list: tuple[Choice, ...], tried: set[int]) -> Snapshot:
    return Snapshot(
        state=s.state,
        stack=s.stack,
        emitted=s.emitted,
        budgets=dict(s.budgets_remaining),
        tree=s.tree.copy(),
        steps_taken=s.steps_taken,
        next_node_id=s.next_node_id,
        choice_list=choice_list,
        tried=tried,
    )


def apply_choice(s: GenState, idx: int) -> GenState:
    """Apply the idx-th (1-based) feasible choice, snapshotting first."""
    if s.steps_taken >= s.step_cap:
        raise StepCapExceeded(f"step cap {s.step_cap} reached")
    current = feasible_choices(s)
    if not 1 <= idx <= len(current):
        raise PlanError(f"choice index {idx} out of range 1..{len(current)}")
    chosen = current[idx - 1]
    if s.pending is not None:
        choice_list, tried = s.pending
        orig_idx = choice_list.index(chosen)
        tried = set(tried) | {orig_idx}
    else:
        choice_list = tuple(current)
        tried = {idx - 1}
    s.trail.append(_capture(s, choice_list, tried))
    s.pending = None
    for t in chosen.transitions:
        _apply_transition(s, t)
    s.steps_taken += 1
    return s


def backtrack(s: GenState) -> GenState:
    """Rewind to the nearest decision point with an unexplored branch."""
    while s.trail:
        snap = s.trail.pop()
        s.state = snap.state
        s.stack = snap.stack
        s.emitted = snap.emitted
        s.budgets_remaining = snap.budgets
        s.tree = snap.tree
        s.steps_taken = snap.steps_taken
        s.next_node_id = snap.next_node_id
        s.backtracks += 1
        if len(snap.tried) < len(snap.choice_list):
            s.pending = (snap.choice_list, snap.tried)
            return s
    s.pending = None
    raise NoValidPlan("every branch of the bounded search space is exhausted")


def _progress_lines(s: GenState) -> tuple[str, ...]:
    """Reverse-numbered step lines for materialized nodes, root first."""
    done = [n for n in s.tree.preorder() if n.terminal is not None]
    lines = []
    for offset, node in enumerate(done):
        step = "Step n" if offset == 0 else f"Step (n-{offset})"
        lines.append(f"{step}: Use {_display(s, node.terminal).rstrip('.')};")
    pending = "Step n" if not done else f"Step (n-{len(done)})"
    lines.append(f"{pending}: ?")
    return tuple(lines)


def _target_item(s: GenState) -> str:
    converted = any(t.prod_index is not None for t in s.pda.transitions)
    if s.stack:
        top = s.stack[0]
        if top.parent_node is not None:
            parent = s.tree.nodes.get(top.parent_node)
            if parent is not None and parent.terminal is not None:
                spec = s.tools.get(parent.terminal)
                if spec and top.arg_index is not None \
                        and top.arg_index < len(spec.input_modalities):
                    modality = spec.input_modalities[top.arg_index]
                    return f'the input {modality} of "{spec.display_name}"'
    if converted:
        return "the final result"
    return s.state


def build_context(s: GenState, choices: Sequence[Choice]) -> PromptContext:
    return PromptContext(
        task_description=s.task_description,
        progress_lines=_progress_lines(s),
        target_item=_target_item(s),
        choices=tuple(c.label for c in choices),
    )


def generate(s: GenState, oracle: DecisionOracle) -> PlanTree:
    """Drive the session to a complete plan tree, or raise NoValidPlan.

    Loop: when the automaton accepts with a resolved stack, the tree is done;
    a dead end or the step cap triggers backtracking; otherwise the oracle
    picks from the feasible choices and the pick is applied.  Oracle
    malfunction surfaces as OracleFailure and is never treated as a dead end.
    """
    while True:
        if s.completed:
            s.tree.complete = True
            return s.tree
        if s.steps_taken >= s.step_cap:
            backtrack(s)
            continue
        choices = feasible_choices(s)
        if not choices:
            backtrack(s)
            continue
        idx = oracle.decide(build_context(s, choices))
        if not 1 <= idx <= len(choices):
            raise OracleFailure(f"oracle returned out-of-range index {idx}")
        apply_choice(s, idx)


def render_plan(tree: PlanTree, tools: Sequence[ToolSpec] | Mapping[str, ToolSpec],
                style: str = "steps") -> str:
    """Render a completed tree as a prefix word, functional call, or step list."""
    if not tree.complete:
        raise PlanError("cannot render an incomplete tree")
    if isinstance(tools, Mapping):
        tool_map = dict(tools)
    else:
        tool_map = {spec.terminal: spec for spec in tools}

    def display(terminal: str) -> str:
        spec = tool_map.get(terminal)
        return spec.display_name if spec else terminal

    if style == "prefix":
        return " ".join(tree.preorder_terminals())

    if style == "functional":
        def call(node_id: int) -> str:
            node = tree.nodes[node_id]
            if not node.children:
                return node.terminal or ""
            args = ", ".join(call(child) for _arg, child in node.children)
            return f"{node.terminal}({args})"
        return "; ".join(call(r) for r in tree.roots)

    if style == "dump":
        lines = []
        for node in tree.preorder():
            parent = node.parent if node.parent is not None else "-"
            arg = node.arg_index if node.arg_index is not None else "-"
            lines.append(f"{node.node_id} {node.terminal} {parent} {arg}")
        return "\n".join(lines)

    if style == "steps":
        def is_tool(node: PlanNode) -> bool:
            spec = tool_map.get(node.terminal or "")
            return node.slots > 0 or bool(spec and spec.input_modalities)

        numbered: dict[int, int] = {}
        lines: list[str] = []

        def visit(node_id: int) -> None:
            node = tree.nodes[node_id]
            for _arg, child in node.children:
                visit(child)
            if not is_tool(node):
                return
            parts = []
            for _arg, child in node.children:
                child_node = tree.nodes[child]
                if child in numbered:
                    parts.append(f"the output of step {numbered[child]}")
                else:
                    parts.append(display(child_node.terminal or ""))
            numbered[node_id] = len(numbered) + 1
            line = f"Step {numbered[node_id]}: use {display(node.terminal or '').rstrip('.')}"
            if parts:
                if len(parts) > 1:
                    line += " on " + ", ".join(parts[:-1]) + " and " + parts[-1]
                else:
                    line += " on " + parts[0]
            lines.append(line + ".")

        for root in tree.roots:
            visit(root)
        if not lines:
            return "Step 1: use the task input."
        return "\n".join(lines)

    raise PlanError(f"unknown render style {style!r}")


def validate_word(pda: Pda, tools: Sequence[ToolSpec], word: Sequence[str]) -> bool:
    """True iff the automaton accepts the word and no tool budget is exceeded."""
    from .automaton import AutomatonError, UndecidedError, accepts

    counts: dict[str, int] = {}
    for tok in word:
        counts[tok] = counts.get(tok, 0) + 1
    for spec in tools:
        if spec.budget is not None and counts.get(spec.terminal, 0) > spec.budget:
            return False
    try:
        return accepts(pda, word)
    except UndecidedError:
        raise
    except AutomatonError:
        return False
