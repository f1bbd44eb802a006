"""Off-chain election commission: candidate registry and anonymous token issuance.

The commission is the only party that ever sees both an identity and a
token. Linkage lives in a single salted commitment map, kept only so that
repeated requests from the same identity return the identical token instead
of a second one. Exporting the digest database destroys that map and the
salt; afterwards no commission query can tie any token to any identity, and
the on-chain world only ever sees token digests.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Dict, List, Set

from .contract import ElectionTimeline
from .crypto import DEFAULT_TOKEN_BITS, hash_token, random_token
from .encoding import bytes_to_hex


class CommissionError(Exception):
    """An off-chain request the commission refuses."""


@dataclass
class CandidateRecord:
    candidate_id: int
    identity: str
    withdrawn: bool = False


class ElectionCommission:
    def __init__(
        self,
        timeline: ElectionTimeline,
        eligible_candidates: Set[str],
        eligible_voters: Set[str],
        token_bits: int = DEFAULT_TOKEN_BITS,
        rng: random.Random | None = None,
    ):
        timeline.validate()
        if token_bits < 1:
            raise ValueError("token width must be at least one bit")
        self.timeline = timeline
        self.eligible_candidates = set(eligible_candidates)
        self.eligible_voters = set(eligible_voters)
        self.token_bits = token_bits
        self._rng = rng or random.Random()

        self._candidates: Dict[str, CandidateRecord] = {}
        self._next_candidate_id = 1

        # Toxic waste: the salt and commitment map are destroyed at export.
        self._salt: bytes | None = self._rng.getrandbits(256).to_bytes(32, "big")
        self._commitments: Dict[bytes, bytes] = {}
        self._digests: Set[bytes] = set()
        self._purged = False

    # ------------------------------------------------------------------
    # candidacy

    def register_candidate(self, identity: str, now: int) -> int:
        """Enroll an eligible identity; ids are handed out sequentially from 1."""
        tl = self.timeline
        if not tl.candidacy_opens <= now < tl.candidacy_closes:
            raise CommissionError("outside candidacy window")
        if identity not in self.eligible_candidates:
            raise CommissionError(f"identity not eligible for candidacy: {identity}")
        if identity in self._candidates:
            raise CommissionError(f"candidate already registered: {identity}")
        record = CandidateRecord(candidate_id=self._next_candidate_id, identity=identity)
        self._next_candidate_id += 1
        self._candidates[identity] = record
        return record.candidate_id

    def withdraw_candidacy(self, identity: str, now: int) -> None:
        """A registered candidate backs out; its id leaves the ballot."""
        tl = self.timeline
        if not tl.candidacy_opens <= now < tl.candidacy_closes:
            raise CommissionError("outside candidacy window")
        record = self._candidates.get(identity)
        if record is None:
            raise CommissionError(f"no such candidate: {identity}")
        record.withdrawn = True

    def candidate_list(self) -> List[int]:
        """Ballot as it stands: ids of registered, non-withdrawn candidates."""
        return sorted(
            record.candidate_id
            for record in self._candidates.values()
            if not record.withdrawn
        )

    # ------------------------------------------------------------------
    # token distribution

    def issue_token(self, identity: str, now: int) -> bytes:
        """Hand the identity its voting token; repeat calls return the same bytes.

        Idempotence is what stops an identity from stockpiling tokens: the
        commitment lookup, not the caller's honesty, enforces one token per
        identity.
        """
        tl = self.timeline
        if not tl.distribution_opens <= now < tl.distribution_closes:
            raise CommissionError("outside token distribution window")
        if identity not in self.eligible_voters:
            raise CommissionError(f"identity not eligible to vote: {identity}")
        if self._purged or self._salt is None:
            raise CommissionError("token issuance records destroyed")
        commitment = hash_token(self._salt + identity.encode("utf-8"))
        existing = self._commitments.get(commitment)
        if existing is not None:
            return existing
        token = random_token(self.token_bits, self._rng)
        while hash_token(token) in self._digests:
            token = random_token(self.token_bits, self._rng)
        self._commitments[commitment] = token
        self._digests.add(hash_token(token))
        return token

    def export_hash_database(self, now: int) -> List[str]:
        """Publish the sorted token digests and destroy all linkage material."""
        if now < self.timeline.distribution_closes:
            raise CommissionError("token distribution still open")
        self._commitments = {}
        self._salt = None
        self._purged = True
        return sorted(bytes_to_hex(d) for d in self._digests)

    # ------------------------------------------------------------------
    # inspection

    @property
    def linkage_purged(self) -> bool:
        return self._purged and not self._commitments and self._salt is None

    def state_export(self) -> Dict[str, object]:
        """Everything the commission still holds, in serializable form.

        Used by audits that scan for residual token material after export.
        """
        return {
            "timeline": self.timeline.to_dict(),
            "token_bits": self.token_bits,
            "purged": self._purged,
            "candidates": [
                {
                    "candidate_id": rec.candidate_id,
                    "identity": rec.identity,
                    "withdrawn": rec.withdrawn,
                }
                for rec in self._candidates.values()
            ],
            "issued_digests": sorted(bytes_to_hex(d) for d in self._digests),
            "commitments_held": len(self._commitments),
            "salt_held": self._salt is not None,
        }
