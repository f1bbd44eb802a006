"""Cost and throughput model for the voting protocol.

The voter side of one ballot is three transactions (candidate list,
encryption key, cast); the warden side is the four escrow transactions,
amortized over the n/|W| votes each warden serves. The per-vote budget is
the exact per-vote gas rounded up to the next full hundred, and everything
downstream (wei, ETH, USD, block capacity, throughput) derives from that
budget.

Optimized mode models two published refinements: the decryption key is
verified against a precomputed ciphertext (collapsing its submission cost
to 755 gas) and the tally's decrypt loop is amortized at 68 gas per vote,
which lands on the voter side of the ledger.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional

from .ledger import DEFAULT_GAS_PRICE_WEI, DEFAULT_GAS_TABLE

DEFAULT_ETH_USD = 627.0
DEFAULT_BLOCK_GAS_LIMIT = 8_000_000
DEFAULT_BLOCK_INTERVAL_S = 15

OPTIMIZED_SUBMIT_DECRYPTION_KEY_GAS = 755
OPTIMIZED_TALLY_GAS_PER_VOTE = 68

VOTER_METHODS = ("GetCandidateList", "GetEncryptionKey", "CastVote")
WARDEN_METHODS = (
    "DepositSecurity",
    "SubmitEncryptionKey",
    "SubmitDecryptionKey",
    "WithdrawReward",
)

WEI_PER_ETH = 10**18


@dataclass(frozen=True)
class CostReport:
    voters: int
    wardens: int
    optimized: bool
    gas_price_wei: int
    eth_usd: float
    block_gas_limit: int
    block_interval_s: int
    voter_side_gas: int
    tally_gas_per_vote: int
    warden_side_gas: int
    per_vote_gas_exact: float
    per_vote_gas_budget: int
    wei_per_vote: int
    eth_per_vote: float
    usd_per_vote: float
    votes_per_block: int
    votes_per_minute: float
    votes_per_hour: float

    def to_dict(self) -> Dict[str, object]:
        return dict(self.__dict__)


def cost_report(
    voters: int,
    wardens: int,
    optimized: bool = False,
    gas_table: Optional[Dict[str, int]] = None,
    gas_price_wei: int = DEFAULT_GAS_PRICE_WEI,
    eth_usd: float = DEFAULT_ETH_USD,
    block_gas_limit: int = DEFAULT_BLOCK_GAS_LIMIT,
    block_interval_s: int = DEFAULT_BLOCK_INTERVAL_S,
) -> CostReport:
    """Compute the per-vote cost and chain throughput for an election shape."""
    if voters < 1:
        raise ValueError("cost model needs at least one voter")
    if wardens < 1:
        raise ValueError("cost model needs at least one warden")
    if gas_price_wei < 0:
        raise ValueError("gas price must be non-negative")
    if eth_usd <= 0:
        raise ValueError("exchange rate must be positive")
    if block_gas_limit < 1 or block_interval_s < 1:
        raise ValueError("block parameters must be positive")

    table = dict(DEFAULT_GAS_TABLE)
    if gas_table:
        table.update(gas_table)
    for method in VOTER_METHODS + WARDEN_METHODS:
        if method not in table:
            raise ValueError(f"gas table is missing {method}")

    if optimized:
        table["SubmitDecryptionKey"] = OPTIMIZED_SUBMIT_DECRYPTION_KEY_GAS
        tally_per_vote = OPTIMIZED_TALLY_GAS_PER_VOTE
    else:
        tally_per_vote = 0

    voter_side = sum(table[m] for m in VOTER_METHODS)
    warden_side = sum(table[m] for m in WARDEN_METHODS)

    per_vote_exact = voter_side + tally_per_vote + warden_side * wardens / voters
    per_vote_budget = math.ceil(per_vote_exact / 100) * 100

    wei_per_vote = per_vote_budget * gas_price_wei
    eth_per_vote = wei_per_vote / WEI_PER_ETH
    usd_per_vote = eth_per_vote * eth_usd

    votes_per_block = block_gas_limit // per_vote_budget
    votes_per_minute = votes_per_block * 60.0 / block_interval_s

    return CostReport(
        voters=voters,
        wardens=wardens,
        optimized=optimized,
        gas_price_wei=gas_price_wei,
        eth_usd=eth_usd,
        block_gas_limit=block_gas_limit,
        block_interval_s=block_interval_s,
        voter_side_gas=voter_side,
        tally_gas_per_vote=tally_per_vote,
        warden_side_gas=warden_side,
        per_vote_gas_exact=per_vote_exact,
        per_vote_gas_budget=per_vote_budget,
        wei_per_vote=wei_per_vote,
        eth_per_vote=eth_per_vote,
        usd_per_vote=usd_per_vote,
        votes_per_block=votes_per_block,
        votes_per_minute=votes_per_minute,
        votes_per_hour=votes_per_minute * 60.0,
    )


def render_text(report: CostReport) -> str:
    lines = [
        f"election shape: {report.voters} voters, {report.wardens} wardens"
        + (" (optimized)" if report.optimized else ""),
        f"voter-side gas per vote: {report.voter_side_gas}"
        + (
            f" + {report.tally_gas_per_vote} amortized tally"
            if report.tally_gas_per_vote
            else ""
        ),
        f"warden-side gas per warden: {report.warden_side_gas}",
        f"per-vote gas: exact {report.per_vote_gas_exact:.3f}, budget {report.per_vote_gas_budget}",
        f"cost per vote: {report.wei_per_vote} wei = {report.eth_per_vote:.6f} ETH"
        f" = {report.usd_per_vote:.6f} USD (at {report.eth_usd} USD/ETH,"
        f" {report.gas_price_wei} wei/gas)",
        f"throughput: {report.votes_per_block} votes per {report.block_gas_limit}-gas block,"
        f" {report.votes_per_minute:.0f} votes/minute,"
        f" {report.votes_per_hour:.0f} votes/hour"
        f" (one block every {report.block_interval_s}s)",
    ]
    return "\n".join(lines)
