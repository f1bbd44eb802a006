"""Shared world-building helpers for the test suite."""

import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from wardenvote.contract import ElectionTimeline
from wardenvote.crypto import (
    TINY_GROUP,
    ElGamalKeyPair,
    GroupParams,
    encrypt,
    hash_token,
    keygen,
    random_token,
)
from wardenvote.encoding import bytes_to_hex, int_to_hex
from wardenvote.ledger import (
    DEFAULT_GAS_TABLE,
    Ledger,
    build_genesis,
    random_address,
)

# Shared test timeline: candidacy [1000,2000), distribution [2000,3000),
# deploy at 3000, casting [4000,5000), tally opens at 6000.
TEST_TIMELINE = ElectionTimeline(
    candidacy_opens=1000,
    candidacy_closes=2000,
    distribution_opens=2000,
    distribution_closes=3000,
    casting_opens=4000,
    casting_closes=5000,
    tally_opens=6000,
)

SECURITY = 5 * 10**15
REWARD = 2 * 10**15
DEPOSIT_VALUE = SECURITY + 7


@dataclass
class WardenFixture:
    address: str
    key_id: int
    pair: ElGamalKeyPair


@dataclass
class World:
    ledger: Ledger
    group: GroupParams
    timeline: ElectionTimeline
    wardens: List[WardenFixture]
    tokens: List[bytes]
    operator: str
    voters: List[str]
    security: int = SECURITY
    reward: int = REWARD
    extra: dict = field(default_factory=dict)

    # ------------------------------------------------------------------

    def advance_to(self, when: int) -> None:
        self.ledger.advance_clock(when - self.ledger.clock.now)

    def setup_wardens(self, skip: Optional[List[int]] = None) -> None:
        """Every warden deposits and submits its encryption key at the current time."""
        skip = skip or []
        for w in self.wardens:
            if w.key_id in skip:
                continue
            r1 = self.ledger.submit(w.address, "DepositSecurity", value=DEPOSIT_VALUE)
            assert r1.accepted, r1.record.outcome
            r2 = self.ledger.submit(
                w.address, "SubmitEncryptionKey", args={"h": int_to_hex(w.pair.public.h)}
            )
            assert r2.accepted, r2.record.outcome

    def cast(self, voter: str, token: bytes, candidate: int, rng: random.Random):
        """Full voter path at the current time: fetch key, encrypt, cast."""
        receipt = self.ledger.submit(voter, "GetEncryptionKey")
        assert receipt.accepted, receipt.record.outcome
        key_id, h = receipt.result
        pk = next(w.pair.public for w in self.wardens if w.key_id == key_id)
        assert pk.h == h
        ct = encrypt(pk, candidate, rng)
        return self.ledger.submit(
            voter,
            "CastVote",
            args={
                "token": bytes_to_hex(token),
                "key_id": key_id,
                "beta": int_to_hex(ct.beta),
                "gamma": int_to_hex(ct.gamma),
            },
        )

    def reveal_keys(self, skip: Optional[List[int]] = None) -> None:
        skip = skip or []
        for w in self.wardens:
            if w.key_id in skip:
                continue
            receipt = self.ledger.submit(
                w.address, "SubmitDecryptionKey", args={"x": int_to_hex(w.pair.secret.x)}
            )
            assert receipt.accepted, receipt.record.outcome


def make_world(
    num_keys: int = 2,
    num_tokens: int = 4,
    candidates=(1, 2, 3),
    group: GroupParams = TINY_GROUP,
    security: int = SECURITY,
    reward: int = REWARD,
    gas_table: Optional[Dict[str, int]] = None,
    timeline: ElectionTimeline = TEST_TIMELINE,
    seed: int = 1,
    num_voters: int = 6,
) -> World:
    rng = random.Random(seed)
    wardens = [
        WardenFixture(address=random_address(rng), key_id=kid, pair=keygen(group, rng))
        for kid in range(1, num_keys + 1)
    ]
    tokens = [random_token(256, rng) for _ in range(num_tokens)]
    operator = random_address(rng)
    voters = [random_address(rng) for _ in range(num_voters)]
    contract_address = random_address(rng)
    fee_sink = random_address(rng)

    accounts = {w.address: 10**18 for w in wardens}
    accounts[operator] = 10**18
    for v in voters:
        accounts[v] = 10**16
    accounts[contract_address] = num_keys * reward
    accounts[fee_sink] = 0

    genesis = build_genesis(
        group=group,
        timeline=timeline,
        candidates=list(candidates),
        num_keys=num_keys,
        security_amount=security,
        reward=reward,
        key_check_messages=[2],
        wardens={w.address: w.key_id for w in wardens},
        token_digests=[bytes_to_hex(hash_token(t)) for t in tokens],
        token_bits=256,
        accounts=accounts,
        contract_address=contract_address,
        fee_sink=fee_sink,
        genesis_time=timeline.distribution_closes,
        gas_table=gas_table or DEFAULT_GAS_TABLE,
    )
    return World(
        ledger=Ledger(genesis),
        group=group,
        timeline=timeline,
        wardens=wardens,
        tokens=tokens,
        operator=operator,
        voters=voters,
        security=security,
        reward=reward,
    )
