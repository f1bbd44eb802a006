"""Single-process simulated ledger: logical clock, gas, hash-chained records.

The ledger hosts exactly one voting contract. Time only moves when the
driver advances the logical clock. Every submitted transaction charges a
flat per-method gas fee up front (kept even on revert), executes against
the contract, and lands in an append-only record whose hash covers all of
its fields plus the previous record's hash. Record zero is the genesis: it
embeds the entire starting world, so a dump alone is enough to rebuild and
re-run the election bit-exactly.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass
from typing import Dict, List, Optional

from .contract import Revert, VotingContract
from .encoding import canonical, canonical_json

ZERO_ADDRESS = "0x" + "00" * 20
GENESIS_PREV_HASH = "0x" + "00" * 32
GENESIS_METHOD = "Genesis"
FORMAT_VERSION = 1

# Flat per-method charges, in gas units.
DEFAULT_GAS_TABLE: Dict[str, int] = {
    "GetCandidateList": 26,
    "GetEncryptionKey": 667,
    "CastVote": 739,
    "GetDecryptionKeys": 26,
    "TallyVote": 300_000,
    "DepositSecurity": 23,
    "SubmitEncryptionKey": 629,
    "SubmitDecryptionKey": 600_755,
    "WithdrawReward": 21_629,
}

DEFAULT_GAS_PRICE_WEI = 4 * 10**10


class LedgerError(Exception):
    """Transaction rejected before execution; nothing is recorded or charged."""


class ChainError(Exception):
    """A dump failed hash-chain verification."""

    def __init__(self, index: int, reason: str):
        super().__init__(f"record {index}: {reason}")
        self.index = index
        self.reason = reason


class ReplayError(Exception):
    """Re-execution of a verified dump diverged from its records."""


@dataclass
class Clock:
    """Logical time; advances only by explicit non-negative deltas."""

    now: int = 0

    def advance(self, delta: int) -> None:
        if not isinstance(delta, int) or delta < 0:
            raise ValueError(f"clock can only advance by a non-negative int, got {delta!r}")
        self.now += delta


@dataclass(frozen=True)
class LedgerRecord:
    index: int
    timestamp: int
    sender: str
    method: str
    payload: Dict[str, object]
    gas_charged: int
    outcome: str
    prev_hash: str
    record_hash: str

    def to_line(self) -> str:
        # Envelope keys keep this fixed order; payload is canonical inside.
        obj = {
            "index": self.index,
            "timestamp": self.timestamp,
            "sender": self.sender,
            "method": self.method,
            "payload": self.payload,
            "gas_charged": self.gas_charged,
            "outcome": self.outcome,
            "prev_hash": self.prev_hash,
            "record_hash": self.record_hash,
        }
        return json.dumps(obj, separators=(",", ":"))

    @property
    def accepted(self) -> bool:
        return self.outcome == "accepted"

    @property
    def revert_reason(self) -> Optional[str]:
        if self.outcome.startswith("reverted:"):
            return self.outcome.split(":", 1)[1]
        return None


def compute_record_hash(
    index: int,
    timestamp: int,
    sender: str,
    method: str,
    payload: Dict[str, object],
    gas_charged: int,
    outcome: str,
    prev_hash: str,
) -> str:
    body = canonical_json(
        {
            "index": index,
            "timestamp": timestamp,
            "sender": sender,
            "method": method,
            "payload": payload,
            "gas_charged": gas_charged,
            "outcome": outcome,
            "prev_hash": prev_hash,
        }
    )
    return "0x" + hashlib.sha3_256(body.encode("ascii")).hexdigest()


@dataclass
class Receipt:
    """What a caller gets back from submit(): the record plus any return value."""

    record: LedgerRecord
    result: object

    @property
    def accepted(self) -> bool:
        return self.record.accepted

    @property
    def gas_charged(self) -> int:
        return self.record.gas_charged


_RECORD_FIELDS = (
    "index",
    "timestamp",
    "sender",
    "method",
    "payload",
    "gas_charged",
    "outcome",
    "prev_hash",
    "record_hash",
)


class Ledger:
    """Host for one election: accounts, clock, contract, record chain."""

    def __init__(self, genesis: Dict[str, object]):
        genesis = canonical(genesis)
        self._check_genesis(genesis)
        self.genesis = genesis
        self.clock = Clock(now=genesis["genesis_time"])
        self.accounts: Dict[str, int] = dict(genesis["accounts"])
        self.gas_table: Dict[str, int] = dict(genesis["gas_table"])
        self.gas_price_wei: int = genesis["gas_price_wei"]
        self.contract_address: str = genesis["contract_address"]
        self.fee_sink: str = genesis["fee_sink"]
        self.contract = VotingContract.from_genesis(genesis)
        first = LedgerRecord(
            index=0,
            timestamp=self.clock.now,
            sender=ZERO_ADDRESS,
            method=GENESIS_METHOD,
            payload=genesis,
            gas_charged=0,
            outcome="accepted",
            prev_hash=GENESIS_PREV_HASH,
            record_hash=compute_record_hash(
                0, self.clock.now, ZERO_ADDRESS, GENESIS_METHOD, genesis, 0, "accepted", GENESIS_PREV_HASH
            ),
        )
        self.records: List[LedgerRecord] = [first]

    @staticmethod
    def _check_genesis(genesis: Dict[str, object]) -> None:
        required = {
            "format_version",
            "hash_alg",
            "genesis_time",
            "group",
            "timeline",
            "candidates",
            "num_keys",
            "security_amount",
            "reward",
            "key_check_messages",
            "wardens",
            "token_digests",
            "token_bits",
            "accounts",
            "gas_table",
            "gas_price_wei",
            "contract_address",
            "fee_sink",
        }
        missing = required - genesis.keys()
        if missing:
            raise ValueError(f"genesis missing fields: {sorted(missing)}")
        if genesis["format_version"] != FORMAT_VERSION:
            raise ValueError(f"unsupported dump format version {genesis['format_version']}")
        if genesis["hash_alg"] != "sha3-256":
            raise ValueError(f"unsupported hash algorithm {genesis['hash_alg']!r}")
        accounts = genesis["accounts"]
        for addr, balance in accounts.items():
            if not (isinstance(balance, int) and balance >= 0):
                raise ValueError(f"account {addr} has invalid balance {balance!r}")
        for special in ("contract_address", "fee_sink"):
            if genesis[special] not in accounts:
                raise ValueError(f"{special} has no account entry")
        for addr in genesis["wardens"]:
            if addr not in accounts:
                raise ValueError(f"warden {addr} has no account entry")
        gas_table = genesis["gas_table"]
        for method in VotingContract.METHODS:
            charge = gas_table.get(method)
            if not (isinstance(charge, int) and charge >= 0):
                raise ValueError(f"gas table entry for {method} missing or invalid")
        if not (isinstance(genesis["gas_price_wei"], int) and genesis["gas_price_wei"] >= 0):
            raise ValueError("gas price must be a non-negative int")
        if not (isinstance(genesis["genesis_time"], int) and genesis["genesis_time"] >= 0):
            raise ValueError("genesis time must be a non-negative int")

    # ------------------------------------------------------------------
    # core operations

    def advance_clock(self, delta: int) -> None:
        self.clock.advance(delta)

    def transfer(self, sender: str, recipient: str, amount: int) -> None:
        """Move value directly between accounts; used by genesis-time setup
        and by contract payouts inside submit(). Not recorded on its own, so
        drivers must not call it after genesis if they want replayable dumps."""
        if sender not in self.accounts:
            raise LedgerError(f"unknown account {sender}")
        if recipient not in self.accounts:
            raise LedgerError(f"unknown account {recipient}")
        if not isinstance(amount, int) or amount < 0:
            raise LedgerError(f"invalid transfer amount {amount!r}")
        if self.accounts[sender] < amount:
            raise LedgerError("insufficient funds")
        self.accounts[sender] -= amount
        self.accounts[recipient] += amount

    def submit(
        self,
        sender: str,
        method: str,
        args: Optional[Dict[str, object]] = None,
        value: int = 0,
    ) -> Receipt:
        """Execute one transaction at the current clock and append its record."""
        args = canonical(args or {})
        if sender not in self.accounts:
            raise LedgerError(f"unknown account {sender}")
        if method not in VotingContract.METHODS or method not in self.gas_table:
            raise LedgerError(f"unknown method {method}")
        if not isinstance(value, int) or value < 0:
            raise LedgerError(f"invalid value {value!r}")
        fee = self.gas_table[method] * self.gas_price_wei
        if self.accounts[sender] < fee + value:
            raise LedgerError("insufficient balance for gas and value")

        # Gas is consumed no matter how execution ends.
        self.accounts[sender] -= fee
        self.accounts[self.fee_sink] += fee

        result = None
        transfers = []
        try:
            result, transfers = self.contract.execute(
                method,
                sender=sender,
                value=value,
                now=self.clock.now,
                args=args,
                contract_balance=self.accounts[self.contract_address],
            )
        except Revert as exc:
            outcome = f"reverted:{exc.reason}"
        else:
            outcome = "accepted"
            if value > 0:
                self.accounts[sender] -= value
                self.accounts[self.contract_address] += value
            for recipient, amount in transfers:
                self.transfer(self.contract_address, recipient, amount)

        prev = self.records[-1]
        payload = canonical({"args": args, "value": value})
        record = LedgerRecord(
            index=prev.index + 1,
            timestamp=self.clock.now,
            sender=sender,
            method=method,
            payload=payload,
            gas_charged=self.gas_table[method],
            outcome=outcome,
            prev_hash=prev.record_hash,
            record_hash=compute_record_hash(
                prev.index + 1,
                self.clock.now,
                sender,
                method,
                payload,
                self.gas_table[method],
                outcome,
                prev.record_hash,
            ),
        )
        self.records.append(record)
        return Receipt(record=record, result=result)

    # ------------------------------------------------------------------
    # inspection

    def total_supply(self) -> int:
        return sum(self.accounts.values())

    def state_digest(self) -> str:
        """Hash of clock, balances, and full contract state."""
        body = canonical_json(
            {
                "now": self.clock.now,
                "accounts": self.accounts,
                "contract": self.contract.state_dict(),
            }
        )
        return "0x" + hashlib.sha3_256(body.encode("ascii")).hexdigest()

    def dump(self) -> str:
        return "\n".join(record.to_line() for record in self.records) + "\n"

    # ------------------------------------------------------------------
    # verification and replay

    @staticmethod
    def parse_dump(text: str) -> List[LedgerRecord]:
        """Parse and verify a dump; raises ChainError at the first bad record."""
        # Strictly newline-delimited: splitlines() would also split on
        # control characters like \v, letting a flipped separator byte
        # produce an identical parse.
        lines = [line for line in text.split("\n") if line.strip()]
        if not lines:
            raise ChainError(0, "empty dump")
        records: List[LedgerRecord] = []
        prev_hash = GENESIS_PREV_HASH
        prev_time = None
        for position, line in enumerate(lines):
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ChainError(position, f"invalid JSON: {exc}") from None
            if not isinstance(obj, dict) or set(obj) != set(_RECORD_FIELDS):
                raise ChainError(position, "record fields malformed")
            if obj["index"] != position:
                raise ChainError(position, f"index {obj['index']} out of sequence")
            if prev_time is not None and obj["timestamp"] < prev_time:
                raise ChainError(position, "timestamp decreased")
            if obj["prev_hash"] != prev_hash:
                raise ChainError(position, "previous-hash link broken")
            expected = compute_record_hash(
                obj["index"],
                obj["timestamp"],
                obj["sender"],
                obj["method"],
                obj["payload"],
                obj["gas_charged"],
                obj["outcome"],
                obj["prev_hash"],
            )
            if obj["record_hash"] != expected:
                raise ChainError(position, "record hash mismatch")
            record = LedgerRecord(**obj)
            if position == 0:
                if (
                    record.method != GENESIS_METHOD
                    or record.sender != ZERO_ADDRESS
                    or record.gas_charged != 0
                    or record.outcome != "accepted"
                ):
                    raise ChainError(0, "malformed genesis record")
            elif record.method == GENESIS_METHOD:
                raise ChainError(position, "genesis method after record zero")
            records.append(record)
            prev_hash = record.record_hash
            prev_time = record.timestamp
        return records

    @classmethod
    def from_dump(cls, text: str) -> "Ledger":
        """Rebuild the world from a dump and re-execute every transaction.

        The replay must reproduce each record hash exactly; any divergence
        raises ReplayError.
        """
        records = cls.parse_dump(text)
        ledger = cls(records[0].payload)
        if ledger.records[0].record_hash != records[0].record_hash:
            raise ReplayError("genesis record does not reproduce")
        for record in records[1:]:
            ledger.advance_clock(record.timestamp - ledger.clock.now)
            try:
                receipt = ledger.submit(
                    record.sender,
                    record.method,
                    args=record.payload["args"],
                    value=record.payload["value"],
                )
            except LedgerError as exc:
                raise ReplayError(f"record {record.index}: replay rejected: {exc}") from None
            if receipt.record.record_hash != record.record_hash:
                raise ReplayError(f"record {record.index}: replay diverged")
        return ledger


def random_address(rng: random.Random) -> str:
    return "0x" + rng.getrandbits(160).to_bytes(20, "big").hex()


def build_genesis(
    *,
    group,
    timeline,
    candidates: List[int],
    num_keys: int,
    security_amount: int,
    reward: int,
    key_check_messages: List[int],
    wardens: Dict[str, int],
    token_digests: List[str],
    token_bits: int,
    accounts: Dict[str, int],
    contract_address: str,
    fee_sink: str,
    genesis_time: int,
    gas_table: Optional[Dict[str, int]] = None,
    gas_price_wei: int = DEFAULT_GAS_PRICE_WEI,
) -> Dict[str, object]:
    """Assemble the genesis payload in wire form."""
    from .encoding import int_to_hex

    return {
        "format_version": FORMAT_VERSION,
        "hash_alg": "sha3-256",
        "genesis_time": genesis_time,
        "group": {"p": int_to_hex(group.p), "g": int_to_hex(group.g)},
        "timeline": timeline.to_dict(),
        "candidates": list(candidates),
        "num_keys": num_keys,
        "security_amount": security_amount,
        "reward": reward,
        "key_check_messages": list(key_check_messages),
        "wardens": dict(wardens),
        "token_digests": sorted(token_digests),
        "token_bits": token_bits,
        "accounts": dict(accounts),
        "gas_table": dict(gas_table or DEFAULT_GAS_TABLE),
        "gas_price_wei": gas_price_wei,
        "contract_address": contract_address,
        "fee_sink": fee_sink,
    }
