"""End-to-end election runner.

One call takes a validated config and plays out the whole protocol on a
fresh ledger: candidacy, token distribution, deployment, warden setup,
ballot lookups, casting (with any configured adversaries and key leaks),
key reveal, tally, payouts. The returned report carries the full ledger
dump, the published key file, the sealed ground-truth book the runner kept
off to the side, and the independent auditor's recount.

Everything is driven by one master seed; two runs of the same config
produce byte-identical dumps.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set

from . import audit as audit_module
from .actors import (
    DoubleVoteAgent,
    VoterAgent,
    WardenAgent,
    cast_ballot,
    leaked_key,
    lookup_ballot,
    run_double_vote,
    run_token_guessing,
    warden_generate_keys,
    warden_reveal,
    warden_setup,
    warden_withdraw,
)
from .commission import ElectionCommission
from .config import ScenarioConfig
from .contract import in_window
from .crypto import ElGamalSecretKey, VoteCiphertext, decrypt, derive_seed
from .encoding import int_to_hex
from .ledger import GENESIS_METHOD, Ledger, build_genesis, random_address


@dataclass
class WardenResult:
    address: str
    key_id: int
    behavior: str
    leak_time: Optional[int]
    initial_balance: int
    final_balance: int
    gas_spent: int
    revealed: bool
    withdrew: bool

    @property
    def balance_delta(self) -> int:
        return self.final_balance - self.initial_balance

    def to_dict(self) -> Dict[str, object]:
        return {
            "address": self.address,
            "key_id": self.key_id,
            "behavior": self.behavior,
            "leak_time": self.leak_time,
            "initial_balance": self.initial_balance,
            "final_balance": self.final_balance,
            "balance_delta": self.balance_delta,
            "gas_spent": self.gas_spent,
            "revealed": self.revealed,
            "withdrew": self.withdrew,
        }


@dataclass
class ExposureReport:
    """What leaked keys reveal before the casting window closes."""

    leaked_key_ids: List[int]
    decryptable_votes: int
    total_accepted: int
    decryption_matches_book: bool

    def to_dict(self) -> Dict[str, object]:
        return {
            "leaked_key_ids": list(self.leaked_key_ids),
            "decryptable_votes": self.decryptable_votes,
            "total_accepted": self.total_accepted,
            "decryption_matches_book": self.decryption_matches_book,
        }


@dataclass
class ElectionReport:
    config: Dict[str, object]
    seed: int
    identities: Dict[str, List[str]]
    candidate_ids: List[int]
    issued_tokens: int
    accepted_casts: int
    failed_casts: int
    contract_tally: Dict[int, int]
    spoiled: int
    undecryptable: int
    ground_truth_tally: Dict[int, int]
    batch_sizes: Dict[int, int]
    warden_results: List[WardenResult]
    exposure: ExposureReport
    attacks: List[Dict[str, object]]
    invariants: Dict[str, bool]
    auditor: Dict[str, object]
    final_state_digest: str
    dump_text: str
    keys_text: str

    def to_dict(self) -> Dict[str, object]:
        """JSON-ready view; the dump and key file travel as separate files."""
        return {
            "config": self.config,
            "seed": self.seed,
            "identities": self.identities,
            "candidate_ids": self.candidate_ids,
            "issued_tokens": self.issued_tokens,
            "accepted_casts": self.accepted_casts,
            "failed_casts": self.failed_casts,
            "contract_tally": {str(k): v for k, v in self.contract_tally.items()},
            "spoiled": self.spoiled,
            "undecryptable": self.undecryptable,
            "ground_truth_tally": {str(k): v for k, v in self.ground_truth_tally.items()},
            "batch_sizes": {str(k): v for k, v in self.batch_sizes.items()},
            "warden_results": [w.to_dict() for w in self.warden_results],
            "exposure": self.exposure.to_dict(),
            "attacks": list(self.attacks),
            "invariants": dict(self.invariants),
            "auditor": dict(self.auditor),
            "final_state_digest": self.final_state_digest,
            "records": len(self.dump_text.splitlines()),
        }


def _unique_address(rng: random.Random, taken: Set[str]) -> str:
    addr = random_address(rng)
    while addr in taken:
        addr = random_address(rng)
    taken.add(addr)
    return addr


def run_election(config: ScenarioConfig) -> ElectionReport:
    config.validate()
    seed = config.seed
    timeline = config.timeline
    group = config.group

    # ------------------------------------------------------------------
    # off-chain: candidacy and token distribution

    voter_ids = [f"voter-{i}" for i in range(1, config.voters + 1)]
    candidate_ids_str = [f"cand-{i}" for i in range(1, config.candidates + 1)]
    dv_specs = [a for a in config.adversaries if a.strategy == "double-vote"]
    guess_specs = [a for a in config.adversaries if a.strategy == "token-guessing"]
    dv_ids = [f"adv-dv-{i}" for i in range(1, len(dv_specs) + 1)]

    commission = ElectionCommission(
        timeline=timeline,
        eligible_candidates=set(candidate_ids_str),
        eligible_voters=set(voter_ids) | set(dv_ids),
        token_bits=config.token_bits,
        rng=random.Random(derive_seed(seed, "commission")),
    )

    t_register = (timeline.candidacy_opens + timeline.candidacy_closes) // 2
    for identity in candidate_ids_str:
        commission.register_candidate(identity, t_register)
    candidate_ids = commission.candidate_list()

    t_issue = (timeline.distribution_opens + timeline.distribution_closes) // 2
    voter_tokens = {v: commission.issue_token(v, t_issue) for v in voter_ids}
    dv_tokens = {a: commission.issue_token(a, t_issue) for a in dv_ids}
    token_digests = commission.export_hash_database(timeline.distribution_closes)
    issued_tokens = len(token_digests)

    # ------------------------------------------------------------------
    # agents and genesis

    addr_rng = random.Random(derive_seed(seed, "addresses"))
    taken: Set[str] = set()

    wardens: List[WardenAgent] = []
    for i, behavior in enumerate(config.warden_behaviors, start=1):
        agent = WardenAgent(
            address=_unique_address(addr_rng, taken),
            key_id=i,
            behavior=behavior.kind,
            rng=random.Random(derive_seed(seed, "warden", i)),
            leak_time=behavior.leak_time,
        )
        warden_generate_keys(agent, group)
        wardens.append(agent)

    voters: List[VoterAgent] = []
    for i, identity in enumerate(voter_ids, start=1):
        rng = random.Random(derive_seed(seed, "voter", i))
        voters.append(
            VoterAgent(
                identity=identity,
                address=_unique_address(addr_rng, taken),
                preference=rng.choice(candidate_ids),
                rng=rng,
                token=voter_tokens[identity],
            )
        )

    dv_agents: List[DoubleVoteAgent] = []
    for i, (identity, spec) in enumerate(zip(dv_ids, dv_specs), start=1):
        rng = random.Random(derive_seed(seed, "adversary", "double-vote", i))
        dv_agents.append(
            DoubleVoteAgent(
                identity=identity,
                addresses=[_unique_address(addr_rng, taken) for _ in range(spec.attempts + 1)],
                preference=rng.choice(candidate_ids),
                rng=rng,
                token=dv_tokens[identity],
            )
        )

    operator = _unique_address(addr_rng, taken)
    contract_address = _unique_address(addr_rng, taken)
    fee_sink = _unique_address(addr_rng, taken)

    price = config.gas_price_wei
    table = config.gas_table
    deposit_value = config.security_amount + config.deposit_excess
    voter_fund = 4 * (table["GetCandidateList"] + table["GetEncryptionKey"] + table["CastVote"]) * price + 1
    warden_fund = (
        deposit_value
        + 4
        * (
            table["DepositSecurity"]
            + table["SubmitEncryptionKey"]
            + table["SubmitDecryptionKey"]
            + table["WithdrawReward"]
        )
        * price
        + 1
    )
    operator_fund = 4 * (table["TallyVote"] + table["GetDecryptionKeys"] + table["GetCandidateList"]) * price + 1
    dv_fund = 4 * (table["GetEncryptionKey"] + table["CastVote"]) * price + 1

    accounts: Dict[str, int] = {w.address: warden_fund for w in wardens}
    for voter in voters:
        accounts[voter.address] = voter_fund
    for agent in dv_agents:
        for addr in agent.addresses:
            accounts[addr] = dv_fund
    accounts[operator] = operator_fund
    accounts[contract_address] = config.wardens * config.reward
    accounts[fee_sink] = 0

    genesis = build_genesis(
        group=group,
        timeline=timeline,
        candidates=candidate_ids,
        num_keys=config.wardens,
        security_amount=config.security_amount,
        reward=config.reward,
        key_check_messages=config.key_check_messages(),
        wardens={w.address: w.key_id for w in wardens},
        token_digests=token_digests,
        token_bits=config.token_bits,
        accounts=accounts,
        contract_address=contract_address,
        fee_sink=fee_sink,
        genesis_time=timeline.distribution_closes,
        gas_table=table,
        gas_price_wei=price,
    )
    ledger = Ledger(genesis)
    initial_supply = ledger.total_supply()
    initial_balances = dict(ledger.accounts)

    # ------------------------------------------------------------------
    # warden setup, then voter ballot lookups, all before casting opens

    for warden in wardens:
        receipts = warden_setup(warden, ledger, deposit_value)
        for receipt in receipts:
            if not receipt.accepted:
                raise RuntimeError(
                    f"warden setup failed: {receipt.record.method}: {receipt.record.outcome}"
                )

    if timeline.casting_opens - timeline.distribution_closes > 1:
        ledger.advance_clock(1)
    for voter in voters:
        receipt = lookup_ballot(voter, ledger)
        if not receipt.accepted:
            raise RuntimeError(f"ballot lookup failed: {receipt.record.outcome}")

    # ------------------------------------------------------------------
    # casting window

    ledger.advance_clock(timeline.casting_opens - ledger.clock.now)

    attacks: List[Dict[str, object]] = []
    # Guessing adversaries probe the public digest database before any
    # token is spent, when every issued entry is still live.
    for i, spec in enumerate(guess_specs, start=1):
        rng = random.Random(derive_seed(seed, "adversary", "token-guessing", i))
        report = run_token_guessing(
            rng,
            dict(ledger.contract.hash_database),
            token_bits=config.token_bits,
            attempts=spec.attempts,
        )
        attacks.append(report.to_dict())

    vote_time = min(timeline.casting_opens + 1, timeline.casting_closes - 1)
    ledger.advance_clock(vote_time - ledger.clock.now)

    # Sealed ground-truth book, kept off-chain by the runner only.
    book_rows: List[Dict[str, object]] = []
    book_batches: Dict[int, List[int]] = {kid: [] for kid in range(1, config.wardens + 1)}
    accepted_casts = 0
    failed_casts = 0

    for voter in voters:
        outcome = cast_ballot(voter, ledger)
        book_rows.append(
            {
                "identity": voter.identity,
                "candidate": voter.preference,
                "key_id": outcome.key_id,
                "accepted": outcome.accepted,
            }
        )
        if outcome.accepted:
            accepted_casts += 1
            book_batches[outcome.key_id].append(voter.preference)
        else:
            failed_casts += 1

    for agent, spec in zip(dv_agents, dv_specs):
        report = run_double_vote(agent, ledger)
        attacks.append(report.to_dict())
        accepted_total = report.details["accepted_total"]
        accepted_casts += accepted_total
        failed_casts += report.attempts - accepted_total
        # The adversary's accepted casts (normally exactly one) are real
        # votes for its preference; locate their batches from the ledger.
        for record in ledger.records:
            if (
                record.method == "CastVote"
                and record.accepted
                and record.sender in agent.addresses
            ):
                kid = record.payload["args"]["key_id"]
                book_batches[kid].append(agent.preference)
                book_rows.append(
                    {
                        "identity": agent.identity,
                        "candidate": agent.preference,
                        "key_id": kid,
                        "accepted": True,
                    }
                )

    # ------------------------------------------------------------------
    # exposure from leaked keys, measured while casting is still open

    leaks = [
        (w.key_id, leaked_key(w)[1], w.leak_time)
        for w in wardens
        if w.behavior == "leak" and w.leak_time is not None and w.leak_time < timeline.casting_closes
    ]
    leaked_ids = [kid for kid, _, _ in leaks]
    decryptable = sum(len(ledger.contract.batches[kid]) for kid in leaked_ids)
    matches = True
    for kid, x, _ in leaks:
        sk = ElGamalSecretKey(group=group, x=x)
        for (beta, gamma), intended in zip(ledger.contract.batches[kid], book_batches[kid]):
            if decrypt(sk, VoteCiphertext(beta=beta, gamma=gamma)) != intended:
                matches = False
    exposure = ExposureReport(
        leaked_key_ids=leaked_ids,
        decryptable_votes=decryptable,
        total_accepted=accepted_casts,
        decryption_matches_book=matches,
    )

    # ------------------------------------------------------------------
    # reveal, tally, payouts

    ledger.advance_clock(timeline.casting_closes + 1 - ledger.clock.now)
    revealed: Dict[int, bool] = {}
    for warden in wardens:
        receipt = warden_reveal(warden, ledger)
        revealed[warden.key_id] = bool(receipt and receipt.accepted)

    ledger.advance_clock(timeline.tally_opens + 1 - ledger.clock.now)
    keys_receipt = ledger.submit(operator, "GetDecryptionKeys")
    tally_receipt = ledger.submit(operator, "TallyVote")
    withdrew: Dict[int, bool] = {}
    for warden in wardens:
        receipt = warden_withdraw(warden, ledger)
        withdrew[warden.key_id] = receipt.accepted

    tally_result = tally_receipt.result
    contract_tally = dict(tally_result["tally"])
    spoiled = tally_result["spoiled"]
    undecryptable = tally_result["undecryptable"]

    keys_text = (
        json.dumps(
            {
                "group": {"p": int_to_hex(group.p), "g": int_to_hex(group.g)},
                "keys": [
                    {"key_id": kid, "x": None if x is None else int_to_hex(x)}
                    for kid, x in keys_receipt.result
                ],
            },
            indent=2,
            sort_keys=True,
        )
        + "\n"
    )
    dump_text = ledger.dump()

    # ------------------------------------------------------------------
    # bookkeeping, invariants, independent audit

    ground_truth_tally = {c: 0 for c in candidate_ids}
    for row in book_rows:
        if row["accepted"]:
            ground_truth_tally[row["candidate"]] += 1

    expected_decryptable_tally = {c: 0 for c in candidate_ids}
    for kid, intents in book_batches.items():
        if revealed.get(kid):
            for candidate in intents:
                expected_decryptable_tally[candidate] += 1

    gas_by_sender: Dict[str, int] = {}
    for record in ledger.records:
        if record.method != GENESIS_METHOD:
            gas_by_sender[record.sender] = gas_by_sender.get(record.sender, 0) + record.gas_charged

    warden_results = [
        WardenResult(
            address=w.address,
            key_id=w.key_id,
            behavior=w.behavior,
            leak_time=w.leak_time,
            initial_balance=initial_balances[w.address],
            final_balance=ledger.accounts[w.address],
            gas_spent=gas_by_sender.get(w.address, 0),
            revealed=revealed[w.key_id],
            withdrew=withdrew[w.key_id],
        )
        for w in wardens
    ]

    auditor_result = audit_module.audit_tally(dump_text, keys_text)

    cast_accepted_records = [
        r for r in ledger.records if r.method == "CastVote" and r.accepted
    ]
    spent_entries = sum(1 for live in ledger.contract.hash_database.values() if not live)
    batch_sizes = {kid: len(b) for kid, b in ledger.contract.batches.items()}

    invariants = {
        "currency_conserved": ledger.total_supply() == initial_supply,
        "phase_completeness": all(
            in_window(r.method, timeline, r.timestamp)
            for r in ledger.records
            if r.method != GENESIS_METHOD
        ),
        "hash_database_keys_fixed": set(ledger.contract.hash_database) == set(token_digests),
        "spent_equals_accepted": spent_entries == len(cast_accepted_records),
        "batch_partition": sum(batch_sizes.values()) == accepted_casts,
        "tally_partition": sum(contract_tally.values()) + spoiled + undecryptable
        == accepted_casts,
        "auditor_equivalent": (
            auditor_result.tally == contract_tally
            and auditor_result.spoiled == spoiled
            and auditor_result.undecryptable == undecryptable
            and auditor_result.accepted_casts == accepted_casts
        ),
        "tally_matches_book": contract_tally == expected_decryptable_tally,
        "exposure_decryption_consistent": matches,
    }

    return ElectionReport(
        config=config.to_dict(),
        seed=seed,
        identities={
            "voters": voter_ids,
            "candidates": candidate_ids_str,
            "adversaries": dv_ids,
        },
        candidate_ids=candidate_ids,
        issued_tokens=issued_tokens,
        accepted_casts=accepted_casts,
        failed_casts=failed_casts,
        contract_tally=contract_tally,
        spoiled=spoiled,
        undecryptable=undecryptable,
        ground_truth_tally=ground_truth_tally,
        batch_sizes=batch_sizes,
        warden_results=warden_results,
        exposure=exposure,
        attacks=attacks,
        invariants=invariants,
        auditor={
            "tally": auditor_result.tally,
            "spoiled": auditor_result.spoiled,
            "undecryptable": auditor_result.undecryptable,
            "accepted_casts": auditor_result.accepted_casts,
            "records_verified": auditor_result.records_verified,
        },
        final_state_digest=ledger.state_digest(),
        dump_text=dump_text,
        keys_text=keys_text,
    )
