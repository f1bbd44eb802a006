"""Executable election properties.

Each check inspects a finished election report (and re-reads its dump) and
states a verdict: voter anonymity, bounded vote concealment under leaked
keys, vote integrity of the record chain, and double-vote immunity. The
harness treats a failed property as a failed run.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

from .ledger import ChainError, Ledger, ReplayError
from .scenario import ElectionReport


@dataclass(frozen=True)
class PropertyResult:
    name: str
    passed: bool
    details: str


def _check_anonymity(report: ElectionReport) -> PropertyResult:
    """No identity bytes in the dump, fresh addresses per cast, guesses bounded."""
    problems: List[str] = []

    identities = [
        identity
        for group in report.identities.values()
        for identity in group
    ]
    dump = report.dump_text
    for identity in identities:
        if identity in dump or identity.encode("utf-8").hex() in dump:
            problems.append(f"identity material {identity!r} appears in the dump")
            break

    try:
        records = Ledger.parse_dump(dump)
    except ChainError as exc:
        records = []
        problems.append(f"dump failed verification: {exc}")
    cast_senders = [r.sender for r in records if r.method == "CastVote" and r.accepted]
    if len(cast_senders) != len(set(cast_senders)):
        problems.append("an address cast more than one accepted vote")

    tokens = [
        r.payload["args"]["token"]
        for r in records
        if r.method == "CastVote" and r.accepted
    ]
    if len(tokens) != len(set(tokens)):
        problems.append("a token appears in more than one accepted cast")

    for attack in report.attacks:
        if attack["strategy"] != "token-guessing":
            continue
        bound = 3.0 * attack["stddev"]
        if abs(attack["successes"] - attack["expected"]) > bound:
            problems.append(
                f"guessing successes {attack['successes']} outside "
                f"{attack['expected']:.6g} +/- {bound:.6g}"
            )

    return PropertyResult(
        name="voter-anonymity",
        passed=not problems,
        details="; ".join(problems) or "no linkage material on chain; guessing within bounds",
    )


def _check_concealment(report: ElectionReport) -> PropertyResult:
    """Leaked keys expose exactly their own batches, nothing more."""
    exposure = report.exposure
    expected = sum(report.batch_sizes.get(kid, 0) for kid in exposure.leaked_key_ids)
    problems: List[str] = []
    if exposure.decryptable_votes != expected:
        problems.append(
            f"decryptable votes {exposure.decryptable_votes} != leaked batch union {expected}"
        )
    if not exposure.leaked_key_ids and exposure.decryptable_votes != 0:
        problems.append("votes decryptable with no leaked keys")
    if not exposure.decryption_matches_book:
        problems.append("leaked-key decryption disagrees with the ground-truth book")
    return PropertyResult(
        name="vote-concealment",
        passed=not problems,
        details="; ".join(problems)
        or (
            f"{exposure.decryptable_votes} of {exposure.total_accepted} votes exposed "
            f"by {len(exposure.leaked_key_ids)} leaked key(s)"
        ),
    )


def _check_integrity(report: ElectionReport) -> PropertyResult:
    """The chain verifies, replays to the same state, and the recount agrees."""
    problems: List[str] = []
    try:
        replayed = Ledger.from_dump(report.dump_text)
        if replayed.state_digest() != report.final_state_digest:
            problems.append("replayed state digest differs from the live run")
    except (ChainError, ReplayError) as exc:
        problems.append(f"dump failed verification: {exc}")
    if not report.invariants.get("auditor_equivalent", False):
        problems.append("independent recount disagrees with the contract tally")
    if not report.invariants.get("tally_partition", False):
        problems.append("tally + spoiled + undecryptable does not cover accepted casts")
    return PropertyResult(
        name="vote-integrity",
        passed=not problems,
        details="; ".join(problems) or "chain verified, replay bit-exact, recount equal",
    )


def _check_double_vote_immunity(report: ElectionReport) -> PropertyResult:
    """Every token lands at most one accepted cast, attacks included."""
    problems: List[str] = []
    try:
        records = Ledger.parse_dump(report.dump_text)
    except ChainError as exc:
        records = []
        problems.append(f"dump failed verification: {exc}")
    per_token: dict = {}
    for record in records:
        if record.method == "CastVote" and record.accepted:
            token = record.payload["args"]["token"]
            per_token[token] = per_token.get(token, 0) + 1
    if any(count > 1 for count in per_token.values()):
        problems.append("a token produced more than one accepted cast")
    for attack in report.attacks:
        if attack["strategy"] == "double-vote" and attack["successes"] != 0:
            problems.append(f"double-vote attack landed {attack['successes']} extra cast(s)")
    return PropertyResult(
        name="double-vote-immunity",
        passed=not problems,
        details="; ".join(problems) or "every token counted at most once",
    )


def run_property_suite(report: ElectionReport) -> List[PropertyResult]:
    return [
        _check_anonymity(report),
        _check_concealment(report),
        _check_integrity(report),
        _check_double_vote_immunity(report),
    ]


def render_results(results: List[PropertyResult]) -> str:
    lines = []
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        lines.append(f"[{status}] {result.name}: {result.details}")
    return "\n".join(lines)
