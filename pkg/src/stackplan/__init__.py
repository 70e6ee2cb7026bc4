"""Automaton-supervised plan generation.

Planning constraints are written as context-free grammars (or directly as
pushdown automata), compiled into stack machines, and a decision oracle is
walked through the machine under tool-use budgets with full backtracking, so
every emitted plan is valid by construction.
"""

from .automaton import (AutomatonError, Configuration, Pda, Transition,
                        UndecidedError, accepts, load_pda, outgoing, serialize_pda)
from .convert import cfg_to_pda
from .grammar import (Grammar, GrammarError, Production, Symbol, build_grammar,
                      enumerate_words, member, parse_grammar, serialize_grammar)
from .oracles import (DecisionOracle, ExhaustiveOracle, HttpOracle,
                      InteractiveOracle, OracleConfig, OracleFailure,
                      PromptContext, RandomOracle, ReplyError, ScriptedOracle,
                      build_prompt, make_oracle, parse_reply)
from .planner import (Choice, GenState, NoValidPlan, PlanError, PlanTree,
                      Snapshot, StackEntry, StepCapExceeded, ToolSpec,
                      apply_choice, backtrack, feasible_choices, generate,
                      init_session, load_tools, render_plan, validate_word)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
