"""``pondguard`` command line: check, verify, sim, campaign, report.

Exit codes: 0 success or all properties hold, 1 violation or validation
error, 2 usage or configuration error, 3 internal error.
"""

from __future__ import annotations

import argparse
import logging
import sys
import traceback
from pathlib import Path
from typing import Sequence

from . import __version__
from .evidence import (
    CaeError,
    EvidencePayload,
    HashConflict,
    InvalidGraph,
    NodeNotFound,
    NotEvidenceNode,
    attach_evidence,
    default_cae_skeleton,
    load_graph,
    run_campaign,
)
from .pond_sim import ConfigInvalid, Outcome, load_scenario, run_episode
from .rule_dsl import RuleDslError, RuleSet, Severity, load, validate
from .verifier import (
    EnvAbstraction,
    EnvSpec,
    Inconclusive,
    LimitExceeded,
    Limits,
    PropertySyntaxError,
    ReplayMismatch,
    build_state_space,
    check,
    parse_properties,
    replay,
    report_json,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3

log = logging.getLogger("pondguard")


class UsageError(Exception):
    """Bad input files or arguments; maps to exit code 2."""


def _err(msg: str) -> None:
    print(f"pondguard: {msg}", file=sys.stderr)


def _read_rules(path: str) -> RuleSet:
    try:
        return load(path)
    except OSError as exc:
        raise UsageError(f"cannot read rules {path}: {exc.strerror or exc}") from exc
    except RuleDslError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _write(path: str | None, text: str) -> None:
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")


# -- check ------------------------------------------------------------------------


def cmd_check(args: argparse.Namespace) -> int:
    rs = _read_rules(args.rules)
    diags = validate(rs)
    for d in diags:
        print(f"{d.severity.value} {d.code} {d.rule_id}: {d.message}")
    if any(d.severity is Severity.ERROR for d in diags):
        return EXIT_FAIL
    if not diags:
        print("OK")
    return EXIT_OK


# -- verify -----------------------------------------------------------------------


def _env_spec(path: str | None) -> EnvSpec:
    if path is None:
        return EnvSpec()
    try:
        return EnvSpec.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read environment {path}: {exc.strerror or exc}") from exc
    except ValueError as exc:
        raise UsageError(f"{path}: invalid environment: {exc}") from exc


def cmd_verify(args: argparse.Namespace) -> int:
    rs = _read_rules(args.rules)
    try:
        props = parse_properties(Path(args.props).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read properties {args.props}: {exc.strerror or exc}") from exc
    except PropertySyntaxError as exc:
        raise UsageError(f"{args.props}: {exc}") from exc
    errors = [d for d in validate(rs) if d.severity is Severity.ERROR]
    if errors:
        for d in errors:
            print(f"{d.severity.value} {d.code} {d.rule_id}: {d.message}")
        return EXIT_FAIL
    env = EnvAbstraction.from_ruleset(rs, _env_spec(args.env))
    try:
        g = build_state_space(rs, env, Limits(args.max_states, args.max_depth))
    except LimitExceeded as exc:
        _err(f"{exc}; checking the {len(exc.graph)} explored states")
        g = exc.graph

    verdicts = []
    code = EXIT_OK
    for p in props:
        try:
            v = check(g, p)
        except Inconclusive as exc:
            print(f"INCONCLUSIVE {p.name}: {exc}")
            code = EXIT_FAIL
            continue
        if v.counterexample is not None:
            try:
                rep = replay(v.counterexample, rs)
            except ReplayMismatch as exc:
                _err(f"counterexample for {p.name} failed replay: {exc}")
                return EXIT_INTERNAL
            if not rep.valid:
                _err(f"counterexample for {p.name} does not violate the property on replay")
                return EXIT_INTERNAL
            code = EXIT_FAIL
        print(f"{'HOLDS' if v.holds else 'VIOLATED'} {p.name}  states={v.states_explored} "
              f"transitions={v.transitions}")
        verdicts.append(v)
    _write(args.report, report_json(verdicts, rs.source_hash))
    return code


# -- sim --------------------------------------------------------------------------


def _scenario_and_rules(scenario: str, rules: str | None):
    try:
        cfg = load_scenario(scenario)
    except OSError as exc:
        raise UsageError(f"cannot read scenario {scenario}: {exc.strerror or exc}") from exc
    except ConfigInvalid as exc:
        raise UsageError(f"{scenario}: invalid scenario: {exc}") from exc
    if rules is None:
        if cfg.controller.ruleset_path is None:
            raise UsageError("no rules file given and the scenario names none")
        rules = str(Path(scenario).parent / cfg.controller.ruleset_path)
    rs = _read_rules(rules)
    errors = [d for d in validate(rs) if d.severity is Severity.ERROR]
    if errors:
        raise UsageError(f"{rules}: " + "; ".join(d.message for d in errors))
    return cfg, rs


def cmd_sim(args: argparse.Namespace) -> int:
    cfg, rs = _scenario_and_rules(args.scenario, args.rules)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    try:
        res = run_episode(cfg, rs)
    except ConfigInvalid as exc:
        raise UsageError(str(exc)) from exc
    _write(args.trace, res.trace_csv())
    print(f"outcome={res.outcome.value} ticks={res.ticks} demands={res.demand_count}")
    return EXIT_FAIL if res.outcome is Outcome.COLLISION else EXIT_OK


# -- campaign ---------------------------------------------------------------------


def cmd_campaign(args: argparse.Namespace) -> int:
    if args.episodes < 1:
        raise UsageError("--episodes must be at least 1")
    cfg, rs = _scenario_and_rules(args.scenario, args.rules)
    try:
        res = run_campaign(cfg, rs, args.episodes, args.seed)
    except ConfigInvalid as exc:
        raise UsageError(str(exc)) from exc
    _write(args.report, res.to_json())
    low, high = res.ci95
    ok = high <= cfg.acceptance_threshold
    print(
        f"episodes={res.episodes} collisions={res.collisions} p_hat={res.p_collision_hat:.6f} "
        f"ci95=[{low:.6f}, {high:.6f}] threshold={cfg.acceptance_threshold} "
        f"demands={res.guard_demands} escalations={res.wdt_escalations} "
        f"{'ACCEPT' if ok else 'REJECT'}"
    )
    return EXIT_OK if ok else EXIT_FAIL


# -- report -----------------------------------------------------------------------


def cmd_report(args: argparse.Namespace) -> int:
    path = Path(args.cae)
    if args.init and not path.exists():
        graph = default_cae_skeleton()
    else:
        try:
            graph = load_graph(path)
        except OSError as exc:
            raise UsageError(f"cannot read CAE graph {path}: {exc.strerror or exc}") from exc
        except InvalidGraph as exc:
            raise UsageError(f"{path}: {exc}") from exc

    conflict = False
    for spec in args.attach:
        node_id, sep, artifact = spec.partition("=")
        if not sep or not node_id or not artifact:
            raise UsageError(f"--attach expects NODE=PATH, got {spec!r}")
        try:
            payload = EvidencePayload.for_file(artifact)
        except OSError as exc:
            raise UsageError(f"cannot read evidence {artifact}: {exc.strerror or exc}") from exc
        try:
            graph = attach_evidence(graph, node_id, payload, force=args.force)
        except (NodeNotFound, NotEvidenceNode) as exc:
            raise UsageError(str(exc)) from exc
        except HashConflict as exc:
            _err(f"{exc} (use --force to revise)")
            conflict = True

    print(graph.render())
    if conflict:
        return EXIT_FAIL
    out = args.out if args.out is not None else (str(path) if args.attach or args.init else None)
    _write(out, graph.to_json())
    missing = graph.missing()
    if missing:
        print(f"missing evidence: {', '.join(missing)}")
        return EXIT_FAIL
    return EXIT_OK


# -- entry point ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pondguard", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    c = sub.add_parser("check", help="parse and validate a rule file")
    c.add_argument("rules")
    c.set_defaults(func=cmd_check)

    c = sub.add_parser("verify", help="model-check properties of a rule file")
    c.add_argument("rules")
    c.add_argument("props")
    c.add_argument("env", nargs="?", help="environment abstraction JSON (default settings if omitted)")
    c.add_argument("--max-states", type=int, default=Limits.max_states)
    c.add_argument("--max-depth", type=int, default=Limits.max_depth)
    c.add_argument("--report", metavar="OUT.json")
    c.set_defaults(func=cmd_verify)

    c = sub.add_parser("sim", help="run one simulated episode")
    c.add_argument("scenario")
    c.add_argument("rules", nargs="?", help="rule file (default: the scenario's ruleset_path)")
    c.add_argument("--trace", metavar="OUT.csv")
    c.add_argument("--seed", type=int, help="override the scenario's rng_seed")
    c.set_defaults(func=cmd_sim)

    c = sub.add_parser("campaign", help="run a seeded Monte Carlo campaign")
    c.add_argument("scenario")
    c.add_argument("rules", nargs="?", help="rule file (default: the scenario's ruleset_path)")
    c.add_argument("--episodes", type=int, default=1000)
    c.add_argument("--seed", type=int, default=0, help="root seed")
    c.add_argument("--report", metavar="OUT.json")
    c.set_defaults(func=cmd_campaign)

    c = sub.add_parser("report", help="attach evidence to a CAE graph and show its status")
    c.add_argument("cae")
    c.add_argument("--init", action="store_true", help="start from the default skeleton if CAE does not exist")
    c.add_argument("--attach", action="append", default=[], metavar="NODE=PATH")
    c.add_argument("--force", action="store_true", help="allow replacing evidence with a different hash")
    c.add_argument("--out", metavar="OUT.json")
    c.set_defaults(func=cmd_report)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        _err(str(exc))
        return EXIT_USAGE
    except CaeError as exc:
        _err(str(exc))
        return EXIT_USAGE
    except Exception:  # pragma: no cover - last-resort guard for the exit-code contract
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
