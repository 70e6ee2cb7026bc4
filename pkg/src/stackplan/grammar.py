"""Context-free grammars: file format, validation, membership, word enumeration.

A grammar is read from a line-oriented source where symbols are
whitespace-separated tokens (so multi-character names like ``a_1`` are single
symbols).  Nonterminals are exactly the symbols appearing on the left-hand
side of at least one production; everything else mentioned is a terminal.
The token ``eps`` denotes the empty right-hand side and may not be mixed
with other symbols.

Membership is decided by an Earley chart parser that copes with epsilon
productions and arbitrary (non-normal-form) grammars; it is deliberately
independent of the stack-machine simulation elsewhere in this package so the
two can be cross-checked against each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

TERMINAL = "terminal"
NONTERMINAL = "nonterminal"

EPSILON_TOKEN = "eps"

Word = tuple[str, ...]


class GrammarError(ValueError):
    """Malformed grammar source or structurally inconsistent grammar."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None and column is not None:
            message = f"line {line}, column {column}: {message}"
        elif line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Symbol:
    name: str
    kind: str  # TERMINAL or NONTERMINAL

    def __post_init__(self):
        if not self.name or any(ch.isspace() for ch in self.name):
            raise GrammarError(f"bad symbol name {self.name!r}")
        if self.kind not in (TERMINAL, NONTERMINAL):
            raise GrammarError(f"bad symbol kind {self.kind!r}")


@dataclass(frozen=True)
class Production:
    lhs: Symbol
    rhs: tuple[Symbol, ...]  # empty tuple encodes the epsilon production
    index: int

    def __str__(self) -> str:
        rhs = " ".join(s.name for s in self.rhs) if self.rhs else EPSILON_TOKEN
        return f"{self.lhs.name} -> {rhs}"


@dataclass(frozen=True)
class Grammar:
    """Immutable grammar; production order is source order and is significant."""

    symbols: tuple[Symbol, ...]
    productions: tuple[Production, ...]
    start: Symbol

    @cached_property
    def symbol_by_name(self) -> dict[str, Symbol]:
        return {s.name: s for s in self.symbols}

    @cached_property
    def nonterminals(self) -> tuple[Symbol, ...]:
        return tuple(s for s in self.symbols if s.kind == NONTERMINAL)

    @cached_property
    def terminals(self) -> tuple[Symbol, ...]:
        return tuple(s for s in self.symbols if s.kind == TERMINAL)

    @cached_property
    def productions_by_lhs(self) -> dict[str, tuple[int, ...]]:
        table: dict[str, list[int]] = {}
        for prod in self.productions:
            table.setdefault(prod.lhs.name, []).append(prod.index)
        return {name: tuple(ids) for name, ids in table.items()}

    @cached_property
    def nullable(self) -> frozenset[str]:
        """Nonterminal names that can derive the empty string."""
        nullable: set[str] = set()
        changed = True
        while changed:
            changed = False
            for prod in self.productions:
                if prod.lhs.name in nullable:
                    continue
                if all(s.kind == NONTERMINAL and s.name in nullable for s in prod.rhs):
                    nullable.add(prod.lhs.name)
                    changed = True
        return frozenset(nullable)

    def is_terminal(self, name: str) -> bool:
        sym = self.symbol_by_name.get(name)
        return sym is not None and sym.kind == TERMINAL


def build_grammar(rules: Sequence[tuple[str, Sequence[str]]], start: str) -> Grammar:
    """Assemble a grammar from (lhs, rhs) name pairs, inferring symbol kinds.

    Symbol order is canonical: start symbol first, then first appearance in
    production order (lhs before rhs).  Raises GrammarError when the start
    symbol is never produced or a name would need to be both kinds.
    """
    if not rules:
        raise GrammarError("grammar has no productions")
    lhs_names = {lhs for lhs, _ in rules}
    if start not in lhs_names:
        raise GrammarError(f"start symbol {start!r} never appears as a left-hand side")

    order: list[str] = [start]
    seen = {start}
    for lhs, rhs in rules:
        for name in (lhs, *rhs):
            if name == EPSILON_TOKEN:
                raise GrammarError(f"reserved token {EPSILON_TOKEN!r} used as a symbol")
            if name not in seen:
                seen.add(name)
                order.append(name)

    symbols = tuple(
        Symbol(name, NONTERMINAL if name in lhs_names else TERMINAL) for name in order
    )
    by_name = {s.name: s for s in symbols}
    productions = tuple(
        Production(by_name[lhs], tuple(by_name[n] for n in rhs), i)
        for i, (lhs, rhs) in enumerate(rules)
    )
    return Grammar(symbols=symbols, productions=productions, start=by_name[start])


def parse_grammar(text: str) -> Grammar:
    """Parse grammar source text.  See the module docstring for the format."""
    rules: list[tuple[str, tuple[str, ...]]] = []
    start: str | None = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip("\r").strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] == "start":
            if start is not None:
                raise GrammarError("duplicate start declaration", line=lineno)
            if len(tokens) != 2:
                raise GrammarError("start line must be 'start <SYMBOL>'", line=lineno,
                                   column=raw.find("start") + 1)
            start = tokens[1]
            continue
        if start is None:
            raise GrammarError("first declaration must be 'start <SYMBOL>'", line=lineno)
        if len(tokens) < 3 or tokens[1] != "->":
            col = raw.find(tokens[1]) + 1 if len(tokens) > 1 else len(raw)
            raise GrammarError("expected '<LHS> -> <alternatives>'", line=lineno, column=col)
        lhs = tokens[0]
        if lhs == EPSILON_TOKEN:
            raise GrammarError(f"{EPSILON_TOKEN!r} cannot be a left-hand side", line=lineno)
        alts: list[list[str]] = [[]]
        for tok in tokens[2:]:
            if tok == "|":
                alts.append([])
            else:
                alts[-1].append(tok)
        for alt in alts:
            if not alt:
                raise GrammarError("empty alternative (write 'eps' for the empty string)",
                                   line=lineno)
            if EPSILON_TOKEN in alt:
                if len(alt) != 1:
                    raise GrammarError(f"{EPSILON_TOKEN!r} cannot be mixed with other symbols",
                                       line=lineno)
                rules.append((lhs, ()))
            else:
                rules.append((lhs, tuple(alt)))

    if start is None:
        raise GrammarError("no start declaration")
    if not rules:
        raise GrammarError("grammar has no productions")
    return build_grammar(rules, start)


def serialize_grammar(g: Grammar) -> str:
    """Canonical source text; parse_grammar(serialize_grammar(g)) == g."""
    lines = [f"start {g.start.name}"]
    for prod in g.productions:
        lines.append(str(prod))
    return "\n".join(lines) + "\n"


def member(g: Grammar, word: Sequence[str]) -> bool:
    """True iff the word (a sequence of terminal names) is derivable from the start.

    Earley parsing with the nullable-prediction shortcut: when a nullable
    nonterminal is predicted, the predicting item is advanced immediately,
    which is what makes same-position (epsilon) completions sound.
    """
    for tok in word:
        if not g.is_terminal(tok):
            raise GrammarError(f"unknown terminal {tok!r} in word")
    w = tuple(word)
    n = len(w)

    prods = g.productions
    by_lhs = g.productions_by_lhs
    nullable = g.nullable
    nt_names = {s.name for s in g.nonterminals}

    # item = (production index, dot, origin)
    chart: list[set[tuple[int, int, int]]] = [set() for _ in range(n + 1)]
    waiting: list[dict[str, list[tuple[int, int, int]]]] = [{} for _ in range(n + 1)]

    def seed(k: int, items: Iterable[tuple[int, int, int]], work: list) -> None:
        for it in items:
            if it not in chart[k]:
                chart[k].add(it)
                work.append(it)

    start_items = [(p, 0, 0) for p in by_lhs[g.start.name]]
    for k in range(n + 1):
        work: list[tuple[int, int, int]] = []
        if k == 0:
            seed(0, start_items, work)
        else:
            work.extend(chart[k])
        predicted: set[str] = set()
        while work:
            p, dot, origin = work.pop()
            rhs = prods[p].rhs
            if dot < len(rhs):
                sym = rhs[dot]
                if sym.name in nt_names:
                    waiting[k].setdefault(sym.name, []).append((p, dot, origin))
                    if sym.name not in predicted:
                        predicted.add(sym.name)
                        seed(k, ((q, 0, k) for q in by_lhs[sym.name]), work)
                    if sym.name in nullable:
                        seed(k, [(p, dot + 1, origin)], work)
                elif k < n and w[k] == sym.name:
                    # scanner: advances into the next chart position
                    nxt = (p, dot + 1, origin)
                    chart[k + 1].add(nxt)
            else:
                lhs = prods[p].lhs.name
                if origin < k:
                    seed(k, ((q, d + 1, o) for q, d, o in waiting[origin].get(lhs, ())), work)
                # origin == k means an epsilon span, already covered by the
                # nullable shortcut above

    start_name = g.start.name
    return any(
        prods[p].lhs.name == start_name and dot == len(prods[p].rhs) and origin == 0
        for p, dot, origin in chart[n]
    )


def enumerate_words(
    g: Grammar,
    budgets: Mapping[str, int] | None = None,
    max_steps: int = 20,
) -> tuple[list[Word], bool]:
    """All derivable terminal words within per-terminal budgets and a step bound.

    Explores leftmost derivations depth-first in production source order; a
    step is one production application.  Branches that would need more than
    ``max_steps`` applications are pruned and reported through the returned
    truncation flag.  Budgeted terminals (by name) may appear at most their
    budget; unlisted terminals are unbounded.  Duplicates from ambiguous
    derivations are removed, keeping first emission order.
    """
    if max_steps < 1:
        raise GrammarError("max_steps must be >= 1")
    budgets = dict(budgets or {})
    for name, cap in budgets.items():
        if not g.is_terminal(name):
            raise GrammarError(f"budget for unknown terminal {name!r}")
        if cap < 0:
            raise GrammarError(f"negative budget for terminal {name!r}")

    by_lhs = g.productions_by_lhs
    prods = g.productions
    nt_names = {s.name for s in g.nonterminals}

    words: list[Word] = []
    seen: set[Word] = set()
    truncated = False

    # Frames carry (sentential form, steps used, budget counts) — an explicit
    # stack keeps deep derivations off the Python call stack.
    root_counts = dict.fromkeys(budgets, 0)
    stack: list[tuple[tuple[str, ...], int, dict[str, int]]] = [((g.start.name,), 0, root_counts)]
    while stack:
        form, steps, counts = stack.pop()
        leftmost = next((i for i, s in enumerate(form) if s in nt_names), None)
        if leftmost is None:
            if form not in seen:
                seen.add(form)
                words.append(form)
            continue
        if steps >= max_steps:
            truncated = True
            continue
        children = []
        for p in by_lhs[form[leftmost]]:
            rhs = prods[p].rhs
            new_counts = counts
            over = False
            for sym in rhs:
                if sym.name in budgets:
                    if new_counts is counts:
                        new_counts = dict(counts)
                    new_counts[sym.name] += 1
                    if new_counts[sym.name] > budgets[sym.name]:
                        over = True
                        break
            if over:
                continue
            new_form = form[:leftmost] + tuple(s.name for s in rhs) + form[leftmost + 1:]
            children.append((new_form, steps + 1, new_counts))
        stack.extend(reversed(children))

    return words, truncated
