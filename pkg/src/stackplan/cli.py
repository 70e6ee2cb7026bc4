"""Command-line surface: convert, accept, enumerate, plan, validate."""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from .automaton import AutomatonError, Pda, accepts, load_pda, serialize_pda
from .convert import cfg_to_pda
from .grammar import GrammarError, enumerate_words, parse_grammar
from .oracles import OracleConfig, OracleFailure, make_oracle
from .planner import (NoValidPlan, PlanError, ToolSpec, generate, init_session,
                      load_tools, render_plan, validate_word)

EXIT_OK = 0
EXIT_NEGATIVE = 1   # reject / invalid / no valid plan / empty enumeration
EXIT_ERROR = 2      # bad input, parse error, usage error
EXIT_ORACLE = 3     # oracle failure

USER_ERRORS = (GrammarError, AutomatonError, PlanError, OSError, ValueError)


@dataclass
class RunConfig:
    grammar: str | None = None
    automaton: str | None = None
    tools: str | None = None
    oracle: str = "exhaustive"
    script: str = ""
    seed: int = 0
    step_cap: int | None = None
    style: str = "steps"
    task: str = ""
    template: str = "openagi"
    endpoint: str = ""
    model: str = ""
    api_key_env: str = "STACKPLAN_API_KEY"


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load_machine(grammar: str | None, automaton: str | None) -> Pda:
    if bool(grammar) == bool(automaton):
        raise PlanError("exactly one of --grammar/--automaton is required")
    if grammar:
        return cfg_to_pda(parse_grammar(_read(grammar)))
    return load_pda(_read(automaton))


def _load_tools(path: str | None) -> list[ToolSpec]:
    if not path:
        return []
    return load_tools(_read(path))


def _word(arg: str) -> tuple[str, ...]:
    return tuple(arg.split())


def cmd_convert(args: argparse.Namespace) -> int:
    grammar = parse_grammar(_read(args.grammar))
    text = serialize_pda(cfg_to_pda(grammar))
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_accept(args: argparse.Namespace) -> int:
    pda = load_pda(_read(args.automaton))
    ok = accepts(pda, _word(args.word))
    print("accept" if ok else "reject")
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_enumerate(args: argparse.Namespace) -> int:
    grammar = parse_grammar(_read(args.grammar))
    budgets = {spec.terminal: spec.budget for spec in _load_tools(args.tools)
               if spec.budget is not None and grammar.is_terminal(spec.terminal)}
    words, truncated = enumerate_words(grammar, budgets, args.max_steps)
    for word in words:
        print(" ".join(word))
    if truncated:
        print("note: enumeration truncated at the step bound", file=sys.stderr)
    return EXIT_OK if words else EXIT_NEGATIVE


def _parse_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(_read(path).splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise PlanError(f"{path}:{lineno}: expected 'key=value'")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _run_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig()
    if args.config:
        file_values = _parse_config_file(args.config)
        for key, value in file_values.items():
            if not hasattr(config, key):
                raise PlanError(f"unknown config key {key!r}")
            if key == "seed":
                setattr(config, key, int(value))
            elif key == "step_cap":
                config.step_cap = int(value)
            else:
                setattr(config, key, value)
    for key in ("grammar", "automaton", "tools", "oracle", "script", "seed",
                "step_cap", "style", "task", "template", "endpoint", "model",
                "api_key_env"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(config, key, value)
    return config


def _build_oracle(config: RunConfig):
    script = tuple(int(tok) for tok in config.script.replace(",", " ").split()) \
        if config.script else ()
    oracle_config = OracleConfig(
        kind=config.oracle,
        seed=config.seed,
        script=script,
        endpoint=config.endpoint,
        model=config.model,
        api_key_env=config.api_key_env,
        template=config.template,
    )
    return make_oracle(oracle_config)


def cmd_plan(args: argparse.Namespace) -> int:
    config = _run_config(args)
    pda = _load_machine(config.grammar, config.automaton)
    tools = _load_tools(config.tools)
    session = init_session(pda, tools, config.task, config.step_cap)
    oracle = _build_oracle(config)
    try:
        tree = generate(session, oracle)
    except NoValidPlan:
        print("no valid plan exists under the given budgets", file=sys.stderr)
        return EXIT_NEGATIVE
    print(render_plan(tree, tools, config.style))
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    pda = _load_machine(args.grammar, args.automaton)
    tools = _load_tools(args.tools)
    ok = validate_word(pda, tools, _word(args.word))
    print("valid" if ok else "invalid")
    return EXIT_OK if ok else EXIT_NEGATIVE


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stackplan",
        description="Automaton-supervised plan generation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="compile a grammar into an automaton file")
    p.add_argument("--grammar", required=True)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("accept", help="test whether an automaton accepts a word")
    p.add_argument("--automaton", required=True)
    p.add_argument("word", help="space-separated symbol tokens")
    p.set_defaults(func=cmd_accept)

    p = sub.add_parser("enumerate", help="list derivable words under budgets")
    p.add_argument("--grammar", required=True)
    p.add_argument("--tools", default=None)
    p.add_argument("--max-steps", type=int, default=20, dest="max_steps")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("plan", help="generate a plan with a decision oracle")
    p.add_argument("--grammar", default=None)
    p.add_argument("--automaton", default=None)
    p.add_argument("--tools", default=None)
    p.add_argument("--oracle", default=None,
                   choices=["scripted", "exhaustive", "random", "interactive", "http"])
    p.add_argument("--script", default=None, help="comma-separated 1-based indices")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--step-cap", type=int, default=None, dest="step_cap")
    p.add_argument("--style", default=None,
                   choices=["prefix", "functional", "steps", "dump"])
    p.add_argument("--task", default=None)
    p.add_argument("--template", default=None,
                   choices=["openagi", "daily", "cooking", "risk"])
    p.add_argument("--endpoint", default=None)
    p.add_argument("--model", default=None)
    p.add_argument("--api-key-env", default=None, dest="api_key_env")
    p.add_argument("--config", default=None, help="key=value file with the same options")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("validate", help="check a word against automaton and budgets")
    p.add_argument("--grammar", default=None)
    p.add_argument("--automaton", default=None)
    p.add_argument("--tools", default=None)
    p.add_argument("word", help="space-separated symbol tokens")
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        return args.func(args)
    except OracleFailure as exc:
        print(f"oracle failure: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    except USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
