"""Grammar-to-automaton conversion via the standard three-state construction."""

from __future__ import annotations

from .automaton import Pda, Transition, validate_pda
from .grammar import Grammar

STATES = ("q0", "q1", "q2")


def _fresh_bottom(taken: set[str]) -> str:
    name = "Z"
    while name in taken:
        name = "_" + name
    return name


def cfg_to_pda(g: Grammar) -> Pda:
    """Equivalent nondeterministic PDA simulating leftmost derivations.

    Three states: q0 pushes the start symbol over the bottom marker and hands
    over to q1; q1 carries one epsilon transition per production (expanding
    the popped nonterminal) and one consuming transition per terminal
    (matching it against the stack top); q1 moves to the accepting q2 when
    only the bottom marker remains.  Production transitions record the source
    production index so downstream choice bookkeeping can refer back to the
    grammar.
    """
    q0, q1, q2 = STATES
    bottom = _fresh_bottom({s.name for s in g.symbols})
    nonterminals = [s.name for s in g.nonterminals]
    terminals = [s.name for s in g.terminals]

    transitions: list[Transition] = []

    def add(from_state: str, inp: str | None, pop: str, push: tuple[str, ...],
            to_state: str, prod_index: int | None = None) -> None:
        transitions.append(Transition(
            from_state, inp, pop, push, to_state,
            index=len(transitions), prod_index=prod_index))

    add(q0, None, bottom, (g.start.name, bottom), q1)
    for prod in g.productions:
        add(q1, None, prod.lhs.name, tuple(s.name for s in prod.rhs), q1,
            prod_index=prod.index)
    for t in terminals:
        add(q1, t, t, (), q1)
    add(q1, None, bottom, (bottom,), q2)

    pda = Pda(
        states=STATES,
        stack_alphabet=tuple([bottom, *nonterminals, *terminals]),
        input_alphabet=tuple(terminals),
        transitions=tuple(transitions),
        start_state=q0,
        initial_stack=bottom,
        accept_states=(q2,),
    )
    return validate_pda(pda)
