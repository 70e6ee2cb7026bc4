"""Shared test oracles: naive language saturation and random structure generators.

The saturation oracle computes, bottom-up, every terminal word of bounded
length each nonterminal can derive; it searches derivations exhaustively and
never touches the chart parser or the stack machine, so it can referee both.
"""

from __future__ import annotations

import itertools
import random

from stackplan.automaton import Pda, Transition, validate_pda
from stackplan.grammar import NONTERMINAL, Grammar, build_grammar


def words_up_to(g: Grammar, max_len: int) -> set[tuple[str, ...]]:
    """All terminal words of length <= max_len derivable from the start symbol."""
    gen: dict[str, set[tuple[str, ...]]] = {
        s.name: ({(s.name,)} if s.kind != NONTERMINAL else set()) for s in g.symbols
    }

    def concat(parts: list[set[tuple[str, ...]]]) -> set[tuple[str, ...]]:
        acc: set[tuple[str, ...]] = {()}
        for part in parts:
            nxt: set[tuple[str, ...]] = set()
            for left in acc:
                room = max_len - len(left)
                for right in part:
                    if len(right) <= room:
                        nxt.add(left + right)
            acc = nxt
            if not acc:
                break
        return acc

    changed = True
    while changed:
        changed = False
        for prod in g.productions:
            parts = [gen[s.name] for s in prod.rhs]
            if any(not p for p in parts):
                continue
            fresh = concat(parts) - gen[prod.lhs.name]
            if fresh:
                gen[prod.lhs.name].update(fresh)
                changed = True
    return gen[g.start.name]


def all_words(alphabet: list[str], max_len: int):
    for length in range(max_len + 1):
        yield from itertools.product(alphabet, repeat=length)


def random_grammar(rng: random.Random, max_nonterminals: int = 4,
                   max_terminals: int = 3, max_productions: int = 8) -> Grammar:
    """Small random grammar within the given size bounds; start symbol is S."""
    nts = ["S", "T", "U", "V"][: rng.randint(1, max_nonterminals)]
    terms = ["x", "y", "z"][: rng.randint(1, max_terminals)]
    n_prods = rng.randint(len(nts), max_productions)

    rules: list[tuple[str, tuple[str, ...]]] = []
    for nt in nts:  # every nonterminal must be produced at least once
        rules.append((nt, _random_rhs(rng, nts, terms)))
    while len(rules) < n_prods:
        rules.append((rng.choice(nts), _random_rhs(rng, nts, terms)))
    rng.shuffle(rules)
    # keep at least one S production first-class; build_grammar needs S on a lhs
    if all(lhs != "S" for lhs, _ in rules):
        rules[0] = ("S", rules[0][1])
    return build_grammar(rules, "S")


def _random_rhs(rng: random.Random, nts: list[str], terms: list[str]) -> tuple[str, ...]:
    length = rng.randint(0, 3)
    pool = nts + terms + terms  # bias toward terminals so languages are nonempty-ish
    return tuple(rng.choice(pool) for _ in range(length))


def random_flat_pda(rng: random.Random) -> Pda:
    """Random automaton whose pushes never grow the stack (so accepts always decides)."""
    states = ["p0", "p1", "p2"][: rng.randint(1, 3)]
    stack = ["X", "Y"][: rng.randint(1, 2)]
    inputs = ["x", "y"][: rng.randint(1, 2)]
    transitions = []
    for i in range(rng.randint(1, 10)):
        push = (rng.choice(stack),) if rng.random() < 0.7 else ()
        transitions.append(Transition(
            from_state=rng.choice(states),
            input=rng.choice(inputs + [None]),
            pop=rng.choice(stack),
            push=push,
            to_state=rng.choice(states),
            index=i,
        ))
    pda = Pda(
        states=tuple(states),
        stack_alphabet=tuple(stack),
        input_alphabet=tuple(inputs),
        transitions=tuple(transitions),
        start_state=states[0],
        initial_stack=stack[0],
        accept_states=(states[-1],),
    )
    return validate_pda(pda)


def with_extra_transition(p: Pda, rng: random.Random) -> Pda:
    """Same automaton plus one random stack-preserving transition."""
    extra = Transition(
        from_state=rng.choice(p.states),
        input=rng.choice(list(p.input_alphabet) + [None]),
        pop=rng.choice(p.stack_alphabet),
        push=(rng.choice(p.stack_alphabet),),
        to_state=rng.choice(p.states),
        index=len(p.transitions),
    )
    return validate_pda(Pda(
        states=p.states,
        stack_alphabet=p.stack_alphabet,
        input_alphabet=p.input_alphabet,
        transitions=p.transitions + (extra,),
        start_state=p.start_state,
        initial_stack=p.initial_stack,
        accept_states=p.accept_states,
    ))
