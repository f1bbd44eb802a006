"""Command line interface.

Subcommands:
  run <config> [--seed N] [--out DIR]   run a full election scenario
  audit <dump> <keys>                   independently verify and recount a dump
  cost [...]                           print the per-vote cost and throughput model
  attack <config>                      run a scenario and report its attacks

run and attack exit 0 only if every election property holds; audit exits 0
only if the dump verifies and recounts cleanly.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional

from .audit import AuditError, audit_tally
from .config import ConfigError, load_config
from .costs import (
    DEFAULT_BLOCK_GAS_LIMIT,
    DEFAULT_BLOCK_INTERVAL_S,
    DEFAULT_ETH_USD,
    cost_report,
    render_text,
)
from .ledger import DEFAULT_GAS_PRICE_WEI, ChainError, ReplayError
from .properties import render_results, run_property_suite
from .scenario import run_election


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wardenvote",
        description="Deterministic simulator for a token-based, warden-escrowed voting protocol.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an election scenario from a config file")
    p_run.add_argument("config", help="path to a scenario config (JSON)")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--out", default="wardenvote-out", help="output directory")

    p_audit = sub.add_parser("audit", help="verify a ledger dump and recount the tally")
    p_audit.add_argument("dump", help="path to a ledger dump (JSON lines)")
    p_audit.add_argument("keys", help="path to the published decryption key file")

    p_cost = sub.add_parser("cost", help="print the cost and throughput model")
    p_cost.add_argument("--n", type=int, default=1000, help="number of voters")
    p_cost.add_argument("--wardens", type=int, default=1, help="number of wardens")
    p_cost.add_argument("--optimized", action="store_true", help="apply the published optimizations")
    p_cost.add_argument("--gas-table", default=None, help="JSON file overriding gas charges")
    p_cost.add_argument("--eth-usd", type=float, default=DEFAULT_ETH_USD)
    p_cost.add_argument("--gas-price", type=int, default=DEFAULT_GAS_PRICE_WEI, help="wei per gas")
    p_cost.add_argument("--block-gas-limit", type=int, default=DEFAULT_BLOCK_GAS_LIMIT)
    p_cost.add_argument("--block-interval", type=int, default=DEFAULT_BLOCK_INTERVAL_S)
    p_cost.add_argument("--json", action="store_true", help="emit JSON instead of text")

    p_attack = sub.add_parser("attack", help="run a scenario and report adversary outcomes")
    p_attack.add_argument("config", help="path to a scenario config (JSON)")
    p_attack.add_argument("--seed", type=int, default=None, help="override the config seed")

    return parser


def _load(config_path: str, seed_override: Optional[int]):
    config = load_config(config_path)
    if seed_override is not None:
        config.seed = seed_override
        config.validate()
    return config


def _cmd_run(args) -> int:
    try:
        config = _load(args.config, args.seed)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    report = run_election(config)
    results = run_property_suite(report)

    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "ledger.jsonl"), "w", encoding="utf-8") as fh:
        fh.write(report.dump_text)
    with open(os.path.join(args.out, "keys.json"), "w", encoding="utf-8") as fh:
        fh.write(report.keys_text)
    report_doc = report.to_dict()
    report_doc["properties"] = [
        {"name": r.name, "passed": r.passed, "details": r.details} for r in results
    ]
    with open(os.path.join(args.out, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(report_doc, fh, indent=2, sort_keys=True)
        fh.write("\n")

    print(f"accepted casts: {report.accepted_casts} of {report.issued_tokens} issued tokens")
    print(f"contract tally: {report.contract_tally}")
    print(f"spoiled: {report.spoiled}  undecryptable: {report.undecryptable}")
    print(f"auditor tally:  {report.auditor['tally']}")
    failed_invariants = [k for k, ok in report.invariants.items() if not ok]
    if failed_invariants:
        print(f"invariant failures: {failed_invariants}")
    print(render_results(results))
    print(f"wrote {args.out}/ledger.jsonl, keys.json, report.json")
    ok = all(r.passed for r in results) and not failed_invariants
    return 0 if ok else 1


def _cmd_audit(args) -> int:
    try:
        with open(args.dump, "r", encoding="utf-8") as fh:
            dump_text = fh.read()
        with open(args.keys, "r", encoding="utf-8") as fh:
            keys_text = fh.read()
    except OSError as exc:
        print(f"cannot read input: {exc}", file=sys.stderr)
        return 2
    try:
        result = audit_tally(dump_text, keys_text)
    except ChainError as exc:
        print(f"chain verification failed: {exc}", file=sys.stderr)
        return 1
    except (AuditError, ReplayError) as exc:
        print(f"audit failed: {exc}", file=sys.stderr)
        return 1
    print(f"records verified: {result.records_verified}")
    print(f"accepted casts: {result.accepted_casts}")
    print(f"tally: {result.tally}")
    print(f"spoiled: {result.spoiled}  undecryptable: {result.undecryptable}")
    return 0


def _cmd_cost(args) -> int:
    gas_table = None
    if args.gas_table:
        try:
            with open(args.gas_table, "r", encoding="utf-8") as fh:
                gas_table = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"cannot read gas table: {exc}", file=sys.stderr)
            return 2
    try:
        report = cost_report(
            voters=args.n,
            wardens=args.wardens,
            optimized=args.optimized,
            gas_table=gas_table,
            gas_price_wei=args.gas_price,
            eth_usd=args.eth_usd,
            block_gas_limit=args.block_gas_limit,
            block_interval_s=args.block_interval,
        )
    except ValueError as exc:
        print(f"cost model error: {exc}", file=sys.stderr)
        return 2
    if args.json:
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    else:
        print(render_text(report))
    return 0


def _cmd_attack(args) -> int:
    try:
        config = _load(args.config, args.seed)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if not config.adversaries:
        print("config declares no adversaries", file=sys.stderr)
        return 2
    report = run_election(config)
    for attack in report.attacks:
        line = (
            f"{attack['strategy']}: attempts={attack['attempts']} "
            f"successes={attack['successes']} expected={attack['expected']:.6g} "
            f"stddev={attack['stddev']:.6g}"
        )
        print(line)
    results = [
        r
        for r in run_property_suite(report)
        if r.name in ("voter-anonymity", "double-vote-immunity")
    ]
    print(render_results(results))
    return 0 if all(r.passed for r in results) else 1


def main(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "audit": _cmd_audit,
        "cost": _cmd_cost,
        "attack": _cmd_attack,
    }
    return handlers[args.command](args)


def run_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run_main()
