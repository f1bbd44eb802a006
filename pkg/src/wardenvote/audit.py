"""Independent tally audit over a ledger dump and a published key file.

The auditor never talks to a live contract. It verifies the dump's hash
chain, rebuilds the ballot batches from the raw records, checks the
published decryption keys against the encryption keys that appear on
chain, and recounts by decrypting every ciphertext itself. Decryption here
deliberately takes a different arithmetic route than the contract
(beta^(p-1-x) via Fermat instead of a modular inverse) so the two counts
cannot share a bug in the exponent algebra.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, List, Optional

from .encoding import hex_to_bytes, hex_to_int
from .crypto import hash_token
from .ledger import Ledger, LedgerRecord


class AuditError(Exception):
    """The dump verified as a chain but its contents are inconsistent."""


@dataclass
class AuditResult:
    tally: Dict[int, int]
    spoiled: int
    undecryptable: int
    accepted_casts: int
    batch_sizes: Dict[int, int]
    records_verified: int

    def to_dict(self) -> Dict[str, object]:
        return {
            "tally": {str(k): v for k, v in self.tally.items()},
            "spoiled": self.spoiled,
            "undecryptable": self.undecryptable,
            "accepted_casts": self.accepted_casts,
            "batch_sizes": {str(k): v for k, v in self.batch_sizes.items()},
            "records_verified": self.records_verified,
        }


def parse_keys_file(text: str) -> Dict[int, Optional[int]]:
    """Read the published key file: key id -> secret exponent or None."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise AuditError(f"key file is not valid JSON: {exc}") from None
    if not isinstance(data, dict) or "keys" not in data:
        raise AuditError("key file must contain a 'keys' list")
    keys: Dict[int, Optional[int]] = {}
    for entry in data["keys"]:
        if not isinstance(entry, dict) or "key_id" not in entry or "x" not in entry:
            raise AuditError(f"bad key entry: {entry!r}")
        x = entry["x"]
        keys[entry["key_id"]] = None if x is None else hex_to_int(x)
    return keys


def _fermat_decrypt(p: int, x: int, beta: int, gamma: int) -> int:
    # m = gamma * beta^(p-1-x) mod p; Fermat's little theorem gives the
    # inverse of beta^x without computing a modular inverse.
    return (gamma * pow(beta, p - 1 - x, p)) % p


def audit_tally(dump_text: str, keys_text: str) -> AuditResult:
    """Recount an election from its dump and published keys alone.

    Raises ChainError if the dump fails hash-chain verification and
    AuditError if the records are internally inconsistent (a cast that
    spends an unknown or spent token, a published key that does not match
    the on-chain encryption key, and so on).
    """
    records: List[LedgerRecord] = Ledger.parse_dump(dump_text)
    genesis = records[0].payload
    p = hex_to_int(genesis["group"]["p"])
    g = hex_to_int(genesis["group"]["g"])
    candidates = list(genesis["candidates"])
    num_keys = genesis["num_keys"]

    published = parse_keys_file(keys_text)
    if set(published) - set(range(1, num_keys + 1)):
        raise AuditError("key file names key ids outside the election")

    # Replay only what the recount needs: token spends, batch contents,
    # and the latest accepted encryption key per slot.
    live = {digest: True for digest in genesis["token_digests"]}
    batches: Dict[int, List] = {kid: [] for kid in range(1, num_keys + 1)}
    encryption_keys: Dict[int, int] = {}
    wardens = genesis["wardens"]
    accepted_casts = 0

    for record in records[1:]:
        if not record.accepted:
            continue
        args = record.payload["args"]
        if record.method == "CastVote":
            digest = "0x" + hash_token(hex_to_bytes(args["token"])).hex()
            if live.get(digest) is not True:
                raise AuditError(
                    f"record {record.index}: accepted cast with unknown or spent token"
                )
            live[digest] = False
            kid = args["key_id"]
            if not 1 <= kid <= num_keys:
                raise AuditError(f"record {record.index}: accepted cast with bad key id")
            batches[kid].append((hex_to_int(args["beta"]), hex_to_int(args["gamma"])))
            accepted_casts += 1
        elif record.method == "SubmitEncryptionKey":
            kid = wardens.get(record.sender)
            if kid is None:
                raise AuditError(
                    f"record {record.index}: encryption key from a non-warden"
                )
            encryption_keys[kid] = hex_to_int(args["h"])

    # A published key must invert the encryption key actually used on chain.
    for kid, x in published.items():
        if x is None:
            continue
        h = encryption_keys.get(kid)
        if h is None:
            raise AuditError(f"published key {kid} has no on-chain encryption key")
        if pow(g, x, p) != h:
            raise AuditError(f"published key {kid} does not match the on-chain encryption key")

    tally = {c: 0 for c in candidates}
    spoiled = 0
    undecryptable = 0
    for kid in range(1, num_keys + 1):
        x = published.get(kid)
        if x is None:
            undecryptable += len(batches[kid])
            continue
        for beta, gamma in batches[kid]:
            m = _fermat_decrypt(p, x, beta, gamma)
            if m in tally:
                tally[m] += 1
            else:
                spoiled += 1

    return AuditResult(
        tally=tally,
        spoiled=spoiled,
        undecryptable=undecryptable,
        accepted_casts=accepted_casts,
        batch_sizes={kid: len(b) for kid, b in batches.items()},
        records_verified=len(records),
    )


def verify_replay(dump_text: str) -> str:
    """Re-execute a dump end to end; returns the final state digest."""
    return Ledger.from_dump(dump_text).state_digest()
