"""Scripted election participants.

Voters follow the fixed ballot procedure: read the candidate list, fetch an
encryption key (which also assigns the batch), encrypt the preference
off-chain, and cast the token with the ciphertext. Wardens run their escrow
lifecycle in three phases driven by the scenario clock. Adversaries come in
two flavors: an offline token guesser probing the public digest database,
and an on-ledger double voter burning fresh addresses.

Every agent owns a dedicated rng so whole runs replay from one master seed.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .crypto import ElGamalKeyPair, ElGamalPublicKey, GroupParams, encrypt, hash_token, keygen, random_token
from .encoding import bytes_to_hex, int_to_hex
from .ledger import Ledger, Receipt

WARDEN_BEHAVIORS = ("honest", "abort", "leak")


# ----------------------------------------------------------------------
# voters


@dataclass
class VoterAgent:
    identity: str
    address: str
    preference: int
    rng: random.Random
    token: Optional[bytes] = None
    seen_candidates: Optional[List[int]] = None


@dataclass
class CastOutcome:
    accepted: bool
    key_id: Optional[int]
    reason: Optional[str] = None


def lookup_ballot(agent: VoterAgent, ledger: Ledger) -> Receipt:
    """First voter step: read the candidate list on-chain."""
    receipt = ledger.submit(agent.address, "GetCandidateList")
    if receipt.accepted:
        agent.seen_candidates = list(receipt.result)
    return receipt


def cast_ballot(agent: VoterAgent, ledger: Ledger) -> CastOutcome:
    """Second voter step: fetch a key, encrypt the preference, cast the token.

    Honest voters never retry: whatever the ledger answers is the outcome.
    """
    if agent.token is None:
        raise ValueError(f"{agent.identity} has no token")
    if agent.seen_candidates is None:
        raise ValueError(f"{agent.identity} has not read the candidate list")
    if agent.preference not in agent.seen_candidates:
        raise ValueError(f"{agent.identity} prefers an unlisted candidate")

    key_receipt = ledger.submit(agent.address, "GetEncryptionKey")
    if not key_receipt.accepted:
        return CastOutcome(accepted=False, key_id=None, reason=key_receipt.record.revert_reason)
    key_id, h = key_receipt.result

    group = ledger.contract.group
    ciphertext = encrypt(ElGamalPublicKey(group=group, h=h), agent.preference, agent.rng)
    cast_receipt = ledger.submit(
        agent.address,
        "CastVote",
        args={
            "token": bytes_to_hex(agent.token),
            "key_id": key_id,
            "beta": int_to_hex(ciphertext.beta),
            "gamma": int_to_hex(ciphertext.gamma),
        },
    )
    return CastOutcome(
        accepted=cast_receipt.accepted,
        key_id=key_id,
        reason=cast_receipt.record.revert_reason,
    )


# ----------------------------------------------------------------------
# wardens


@dataclass
class WardenAgent:
    address: str
    key_id: int
    behavior: str
    rng: random.Random
    pair: Optional[ElGamalKeyPair] = None
    leak_time: Optional[int] = None

    def __post_init__(self):
        if self.behavior not in WARDEN_BEHAVIORS:
            raise ValueError(f"unknown warden behavior {self.behavior!r}")
        if self.behavior == "leak" and self.leak_time is None:
            raise ValueError("leak behavior needs a leak_time")


def warden_generate_keys(agent: WardenAgent, group: GroupParams) -> None:
    agent.pair = keygen(group, agent.rng)


def warden_setup(agent: WardenAgent, ledger: Ledger, deposit_value: int) -> Tuple[Receipt, Receipt]:
    """Escrow phase one: put down the security deposit, publish the encryption key."""
    if agent.pair is None:
        raise ValueError("warden has no key pair yet")
    deposit = ledger.submit(agent.address, "DepositSecurity", value=deposit_value)
    submit = ledger.submit(
        agent.address, "SubmitEncryptionKey", args={"h": int_to_hex(agent.pair.public.h)}
    )
    return deposit, submit


def warden_reveal(agent: WardenAgent, ledger: Ledger) -> Optional[Receipt]:
    """Escrow phase two: reveal the decryption key. Aborting wardens stay silent."""
    if agent.behavior == "abort":
        return None
    return ledger.submit(
        agent.address, "SubmitDecryptionKey", args={"x": int_to_hex(agent.pair.secret.x)}
    )


def warden_withdraw(agent: WardenAgent, ledger: Ledger) -> Receipt:
    """Escrow phase three: collect whatever refund is on the books."""
    return ledger.submit(agent.address, "WithdrawReward")


def leaked_key(agent: WardenAgent) -> Tuple[int, int]:
    """What a leaking warden hands the adversary: its slot and secret exponent."""
    if agent.pair is None:
        raise ValueError("warden has no key pair yet")
    return agent.key_id, agent.pair.secret.x


# ----------------------------------------------------------------------
# adversaries


@dataclass
class AttackReport:
    strategy: str
    attempts: int
    successes: int
    expected: float
    stddev: float
    details: Dict[str, object] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, object]:
        return {
            "strategy": self.strategy,
            "attempts": self.attempts,
            "successes": self.successes,
            "expected": self.expected,
            "stddev": self.stddev,
            "details": dict(self.details),
        }


def run_token_guessing(
    rng: random.Random,
    hash_database: Dict[str, bool],
    token_bits: int,
    attempts: int,
) -> AttackReport:
    """Offline guessing attack against the public spent-token digest database.

    The adversary draws uniform l-bit guesses and checks whether the digest
    of a guess is a live entry. Success probability per draw is
    live / 2**l, so successes follow a binomial distribution around
    attempts * live / 2**l.
    """
    if attempts < 0:
        raise ValueError("attempts must be non-negative")
    live = {k for k, is_live in hash_database.items() if is_live}
    hits = 0
    for _ in range(attempts):
        guess = random_token(token_bits, rng)
        if bytes_to_hex(hash_token(guess)) in live:
            hits += 1
    rate = len(live) / 2**token_bits
    expected = attempts * rate
    stddev = math.sqrt(attempts * rate * (1.0 - rate))
    return AttackReport(
        strategy="token-guessing",
        attempts=attempts,
        successes=hits,
        expected=expected,
        stddev=stddev,
        details={"live_entries": len(live), "token_bits": token_bits},
    )


@dataclass
class DoubleVoteAgent:
    identity: str
    addresses: List[str]  # one fresh funded address per cast attempt
    preference: int
    rng: random.Random
    token: Optional[bytes] = None


def run_double_vote(agent: DoubleVoteAgent, ledger: Ledger) -> AttackReport:
    """Cast once legitimately, then replay the same token from fresh addresses.

    successes counts accepted casts beyond the first; the spent-token
    database should pin it at zero.
    """
    if agent.token is None:
        raise ValueError(f"{agent.identity} has no token")
    group = ledger.contract.group
    accepted = 0
    reasons: List[Optional[str]] = []
    for address in agent.addresses:
        key_receipt = ledger.submit(address, "GetEncryptionKey")
        if not key_receipt.accepted:
            reasons.append(key_receipt.record.revert_reason)
            continue
        key_id, h = key_receipt.result
        ciphertext = encrypt(ElGamalPublicKey(group=group, h=h), agent.preference, agent.rng)
        cast = ledger.submit(
            address,
            "CastVote",
            args={
                "token": bytes_to_hex(agent.token),
                "key_id": key_id,
                "beta": int_to_hex(ciphertext.beta),
                "gamma": int_to_hex(ciphertext.gamma),
            },
        )
        if cast.accepted:
            accepted += 1
        reasons.append(cast.record.revert_reason)
    return AttackReport(
        strategy="double-vote",
        attempts=len(agent.addresses),
        successes=max(0, accepted - 1),
        expected=0.0,
        stddev=0.0,
        details={"accepted_total": accepted, "reasons": reasons},
    )
