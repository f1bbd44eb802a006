"""The on-ledger voting contract: a deterministic, time-gated state machine.

State lives entirely in plain dicts so it can be snapshotted, hashed, and
replayed bit-exactly. Every method follows a strict check-then-mutate
discipline: all requires run before the first state write, which is what
makes the host ledger's revert semantics (state untouched, gas kept) hold
without copy-on-write machinery.

Voting tokens never appear in contract state; only their 256-bit digests
do. A digest entry moves from live (True) to spent (False) exactly once and
never back.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .crypto import (
    ElGamalPublicKey,
    ElGamalSecretKey,
    GroupParams,
    VoteCiphertext,
    decrypt,
    derive_seed,
    encrypt,
    hash_token,
)
from .encoding import bytes_to_hex, hex_to_bytes, hex_to_int, int_to_hex


class Revert(Exception):
    """Raised by contract methods to reject a transaction; gas is still charged."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass(frozen=True)
class ElectionTimeline:
    """The seven logical instants that gate every contract method."""

    candidacy_opens: int
    candidacy_closes: int
    distribution_opens: int
    distribution_closes: int
    casting_opens: int
    casting_closes: int
    tally_opens: int

    def validate(self) -> None:
        fields = (
            self.candidacy_opens,
            self.candidacy_closes,
            self.distribution_opens,
            self.distribution_closes,
            self.casting_opens,
            self.casting_closes,
            self.tally_opens,
        )
        for value in fields:
            if not isinstance(value, int) or value < 0:
                raise ValueError(f"timeline entries must be non-negative ints, got {value!r}")
        # Adjacent phases may touch but never overlap; casting must close
        # strictly before the tally opens so key submission has room.
        ok = (
            self.candidacy_opens < self.candidacy_closes <= self.distribution_opens
            and self.distribution_opens < self.distribution_closes <= self.casting_opens
            and self.casting_opens < self.casting_closes < self.tally_opens
        )
        if not ok:
            raise ValueError("timeline instants out of order")

    def to_dict(self) -> Dict[str, int]:
        return {
            "candidacy_opens": self.candidacy_opens,
            "candidacy_closes": self.candidacy_closes,
            "distribution_opens": self.distribution_opens,
            "distribution_closes": self.distribution_closes,
            "casting_opens": self.casting_opens,
            "casting_closes": self.casting_closes,
            "tally_opens": self.tally_opens,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, int]) -> "ElectionTimeline":
        timeline = cls(**data)
        timeline.validate()
        return timeline


@dataclass(frozen=True)
class Window:
    """Activity window of a method, expressed over timeline field names.

    A None bound is unbounded on that side. The upper bound is always
    exclusive; the lower bound is inclusive unless ``lower_strict``.
    """

    lower: Optional[str]
    upper: Optional[str]
    lower_strict: bool = False


# One row per method. Read methods that fetch results after the tally opens
# use strict lower bounds; everything else is half-open [begin, end).
METHOD_WINDOWS: Dict[str, Window] = {
    "GetCandidateList": Window("candidacy_closes", "casting_opens"),
    "GetEncryptionKey": Window("casting_opens", "casting_closes"),
    "CastVote": Window("casting_opens", "casting_closes"),
    "GetDecryptionKeys": Window("tally_opens", None, lower_strict=True),
    "TallyVote": Window("tally_opens", None, lower_strict=True),
    "DepositSecurity": Window(None, "casting_opens"),
    "SubmitEncryptionKey": Window(None, "casting_opens"),
    "SubmitDecryptionKey": Window("casting_closes", "tally_opens", lower_strict=True),
    "WithdrawReward": Window("tally_opens", None, lower_strict=True),
}


def in_window(method: str, timeline: ElectionTimeline, now: int) -> bool:
    window = METHOD_WINDOWS[method]
    if window.lower is not None:
        lower = getattr(timeline, window.lower)
        if now < lower or (window.lower_strict and now == lower):
            return False
    if window.upper is not None and now >= getattr(timeline, window.upper):
        return False
    return True


# Only DepositSecurity accepts attached value.
_PAYABLE = frozenset({"DepositSecurity"})


class VotingContract:
    """Ballot box plus warden escrow, driven entirely through execute()."""

    METHODS = frozenset(METHOD_WINDOWS)

    def __init__(
        self,
        group: GroupParams,
        timeline: ElectionTimeline,
        candidates: List[int],
        num_keys: int,
        security_amount: int,
        reward: int,
        key_check_messages: List[int],
        wardens: Dict[str, int],
        token_digests: List[bytes],
    ):
        group.validate()
        timeline.validate()
        if num_keys < 1:
            raise ValueError("at least one escrow key slot is required")
        if security_amount < 0 or reward < 0:
            raise ValueError("security amount and reward must be non-negative")
        if sorted(wardens.values()) != list(range(1, num_keys + 1)):
            raise ValueError("warden addresses must map one-to-one onto key ids 1..num_keys")
        if len(set(candidates)) != len(candidates):
            raise ValueError("duplicate candidate ids")
        for cand in candidates:
            if not 1 <= cand <= group.p - 1:
                raise ValueError(f"candidate id {cand} not encryptable in this group")
        if not key_check_messages:
            raise ValueError("at least one key-check message is required")
        for msg in key_check_messages:
            if not 1 <= msg <= group.p - 1:
                raise ValueError(f"key-check message {msg} outside message space")
        digests = [bytes(d) for d in token_digests]
        for d in digests:
            if len(d) != 32:
                raise ValueError("token digests must be 32 bytes")
        if len(set(digests)) != len(digests):
            raise ValueError("duplicate token digests")

        self.group = group
        self.timeline = timeline
        self.candidates = list(candidates)
        self.num_keys = num_keys
        self.security_amount = security_amount
        self.reward = reward
        self.key_check_messages = list(key_check_messages)
        self.wardens = dict(wardens)

        # hash digest (hex) -> True while the token is live, False once spent.
        self.hash_database: Dict[str, bool] = {bytes_to_hex(d): True for d in digests}
        self.id_counter = 0
        self.encryption_keys: Dict[int, int] = {}
        self.decryption_keys: Dict[int, int] = {}
        self.refunds: Dict[str, int] = {}
        self.batches: Dict[int, List[Tuple[int, int]]] = {
            kid: [] for kid in range(1, num_keys + 1)
        }
        self.tally_done = False
        self.tally: Dict[int, int] = {}
        self.spoiled = 0
        self.undecryptable = 0

    # ------------------------------------------------------------------
    # dispatch

    def execute(
        self,
        method: str,
        sender: str,
        value: int,
        now: int,
        args: Dict[str, object],
        contract_balance: int,
    ):
        """Run one transaction. Returns (result, transfers-out-of-contract).

        Raises Revert on any rule violation; the caller rolls back value
        movement and keeps the gas.
        """
        if method not in self.METHODS:
            raise KeyError(method)
        if not in_window(method, self.timeline, now):
            raise Revert(f"outside activity window for {method}")
        if value > 0 and method not in _PAYABLE:
            raise Revert(f"{method} is not payable")
        handler = getattr(self, "_" + _SNAKE[method])
        return handler(sender=sender, value=value, args=args, contract_balance=contract_balance)

    # ------------------------------------------------------------------
    # voter-facing methods

    def _get_candidate_list(self, sender, value, args, contract_balance):
        return list(self.candidates), []

    def _get_encryption_key(self, sender, value, args, contract_balance):
        """Hand out the next escrow key round-robin: ids 1..num_keys, repeating."""
        if len(self.encryption_keys) != self.num_keys:
            raise Revert("encryption keys incomplete")
        key_id = self.id_counter + 1
        result = (key_id, self.encryption_keys[key_id])
        self.id_counter = (self.id_counter + 1) % self.num_keys
        return result, []

    def _cast_vote(self, sender, value, args, contract_balance):
        token = _arg_bytes(args, "token")
        key_id = _arg_int(args, "key_id")
        beta = _arg_big(args, "beta")
        gamma = _arg_big(args, "gamma")
        if not 1 <= key_id <= self.num_keys:
            raise Revert("key id out of range")
        p = self.group.p
        if not (1 <= beta <= p - 1 and 1 <= gamma <= p - 1):
            raise Revert("ciphertext out of range")
        digest = bytes_to_hex(hash_token(token))
        if self.hash_database.get(digest) is not True:
            raise Revert("unknown or spent token")
        self.hash_database[digest] = False
        self.batches[key_id].append((beta, gamma))
        return None, []

    # ------------------------------------------------------------------
    # warden-facing methods

    def _require_warden(self, sender: str) -> int:
        key_id = self.wardens.get(sender)
        if key_id is None:
            raise Revert("not a registered warden")
        return key_id

    def _deposit_security(self, sender, value, args, contract_balance):
        self._require_warden(sender)
        if value <= self.security_amount:
            raise Revert("deposit must exceed security amount")
        self.refunds[sender] = value - self.security_amount
        return None, []

    def _submit_encryption_key(self, sender, value, args, contract_balance):
        key_id = self._require_warden(sender)
        if self.refunds.get(sender, 0) <= 0:
            raise Revert("security deposit required")
        h = _arg_big(args, "h")
        if not 1 <= h <= self.group.p - 1:
            raise Revert("encryption key out of range")
        self.encryption_keys[key_id] = h
        return None, []

    def _submit_decryption_key(self, sender, value, args, contract_balance):
        key_id = self._require_warden(sender)
        if self.refunds.get(sender, 0) <= 0:
            raise Revert("security deposit required")
        x = _arg_big(args, "x")
        if not 1 <= x <= self.group.p - 2:
            raise Revert("decryption key out of range")
        h = self.encryption_keys.get(key_id)
        if h is None:
            raise Revert("encryption key not on record")
        if not self._key_round_trips(key_id, h, x):
            raise Revert("key verification failed")
        self.decryption_keys[key_id] = x
        self.refunds[sender] += self.security_amount + self.reward
        return None, []

    def _key_round_trips(self, key_id: int, h: int, x: int) -> bool:
        """Check h/x form a working pair by encrypting and decrypting probes.

        The ephemeral exponent is derived from the inputs so replays of the
        same transaction reproduce the identical check.
        """
        pk = ElGamalPublicKey(group=self.group, h=h)
        sk = ElGamalSecretKey(group=self.group, x=x)
        for round_index, message in enumerate(self.key_check_messages):
            seed = derive_seed("key-check", key_id, h, x, message, round_index)
            probe = encrypt(pk, message, random.Random(seed))
            if decrypt(sk, probe) != message:
                return False
        return True

    def _withdraw_reward(self, sender, value, args, contract_balance):
        self._require_warden(sender)
        amount = self.refunds.get(sender, 0)
        if amount > contract_balance:
            raise Revert("contract balance insufficient")
        self.refunds[sender] = 0
        transfers = [(sender, amount)] if amount > 0 else []
        return amount, transfers

    # ------------------------------------------------------------------
    # tally

    def _get_decryption_keys(self, sender, value, args, contract_balance):
        keys = [(kid, self.decryption_keys.get(kid)) for kid in range(1, self.num_keys + 1)]
        return keys, []

    def _tally_vote(self, sender, value, args, contract_balance):
        """Decrypt every batch once; later calls return the cached result."""
        if not self.tally_done:
            tally = {cand: 0 for cand in self.candidates}
            spoiled = 0
            undecryptable = 0
            for kid in range(1, self.num_keys + 1):
                x = self.decryption_keys.get(kid)
                if x is None:
                    undecryptable += len(self.batches[kid])
                    continue
                sk = ElGamalSecretKey(group=self.group, x=x)
                for beta, gamma in self.batches[kid]:
                    m = decrypt(sk, VoteCiphertext(beta=beta, gamma=gamma))
                    if m in tally:
                        tally[m] += 1
                    else:
                        spoiled += 1
            self.tally = tally
            self.spoiled = spoiled
            self.undecryptable = undecryptable
            self.tally_done = True
        return (
            {
                "tally": dict(self.tally),
                "spoiled": self.spoiled,
                "undecryptable": self.undecryptable,
            },
            [],
        )

    # ------------------------------------------------------------------
    # snapshots

    def state_dict(self) -> Dict[str, object]:
        """Full contract state in wire form; equal dicts mean equal machines."""
        return {
            "candidates": list(self.candidates),
            "hash_database": dict(sorted(self.hash_database.items())),
            "id_counter": self.id_counter,
            "encryption_keys": {str(k): int_to_hex(v) for k, v in sorted(self.encryption_keys.items())},
            "decryption_keys": {str(k): int_to_hex(v) for k, v in sorted(self.decryption_keys.items())},
            "refunds": dict(sorted(self.refunds.items())),
            "batches": {
                str(k): [[int_to_hex(b), int_to_hex(g)] for b, g in v]
                for k, v in sorted(self.batches.items())
            },
            "tally_done": self.tally_done,
            "tally": {str(k): v for k, v in sorted(self.tally.items())},
            "spoiled": self.spoiled,
            "undecryptable": self.undecryptable,
        }

    @classmethod
    def from_genesis(cls, payload: Dict[str, object]) -> "VotingContract":
        group = GroupParams(p=hex_to_int(payload["group"]["p"]), g=hex_to_int(payload["group"]["g"]))
        return cls(
            group=group,
            timeline=ElectionTimeline.from_dict(payload["timeline"]),
            candidates=list(payload["candidates"]),
            num_keys=payload["num_keys"],
            security_amount=payload["security_amount"],
            reward=payload["reward"],
            key_check_messages=list(payload["key_check_messages"]),
            wardens=dict(payload["wardens"]),
            token_digests=[hex_to_bytes(d) for d in payload["token_digests"]],
        )


_SNAKE = {
    "GetCandidateList": "get_candidate_list",
    "GetEncryptionKey": "get_encryption_key",
    "CastVote": "cast_vote",
    "GetDecryptionKeys": "get_decryption_keys",
    "TallyVote": "tally_vote",
    "DepositSecurity": "deposit_security",
    "SubmitEncryptionKey": "submit_encryption_key",
    "SubmitDecryptionKey": "submit_decryption_key",
    "WithdrawReward": "withdraw_reward",
}


def _arg_bytes(args: Dict[str, object], name: str) -> bytes:
    try:
        return hex_to_bytes(args[name])
    except (KeyError, ValueError, TypeError):
        raise Revert(f"malformed argument: {name}")


def _arg_big(args: Dict[str, object], name: str) -> int:
    try:
        return hex_to_int(args[name])
    except (KeyError, ValueError, TypeError):
        raise Revert(f"malformed argument: {name}")


def _arg_int(args: Dict[str, object], name: str) -> int:
    value = args.get(name)
    if isinstance(value, bool) or not isinstance(value, int):
        raise Revert(f"malformed argument: {name}")
    return value
