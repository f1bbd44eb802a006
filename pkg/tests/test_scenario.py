"""End-to-end scenario runner tests.

Everything here runs on the tiny group so a whole election finishes in
milliseconds; the full-width group is exercised in the crypto and
acceptance suites.
"""

import json

import pytest

from wardenvote.config import parse_config
from wardenvote.ledger import Ledger
from wardenvote.scenario import run_election


def make_config(**overrides):
    base = {"voters": 6, "wardens": 2, "candidates": 3, "seed": 11}
    base.update(overrides)
    return parse_config(base)


class TestDeterminism:
    def test_same_seed_same_artifacts(self):
        first = run_election(make_config())
        second = run_election(make_config())
        assert first.dump_text == second.dump_text
        assert first.keys_text == second.keys_text
        assert first.final_state_digest == second.final_state_digest

    def test_different_seed_different_dump(self):
        first = run_election(make_config(seed=11))
        second = run_election(make_config(seed=12))
        assert first.dump_text != second.dump_text

    def test_dump_replays_to_same_digest(self):
        report = run_election(make_config())
        replayed = Ledger.from_dump(report.dump_text)
        assert replayed.state_digest() == report.final_state_digest


class TestHonestElection:
    def test_tally_matches_ground_truth(self):
        report = run_election(make_config())
        assert report.contract_tally == report.ground_truth_tally
        assert report.spoiled == 0
        assert report.undecryptable == 0

    def test_all_invariants_hold(self):
        report = run_election(make_config())
        failures = [name for name, ok in report.invariants.items() if not ok]
        assert failures == []

    def test_every_voter_cast_once(self):
        report = run_election(make_config(voters=9))
        assert report.accepted_casts == 9
        assert report.failed_casts == 0
        assert report.issued_tokens == 9
        assert sum(report.contract_tally.values()) == 9

    def test_batches_partition_and_balance(self):
        report = run_election(make_config(voters=10, wardens=3))
        sizes = list(report.batch_sizes.values())
        assert sum(sizes) == report.accepted_casts
        # Round-robin key distribution keeps batches within one vote of
        # each other.
        assert max(sizes) - min(sizes) <= 1

    def test_auditor_recount_agrees(self):
        report = run_election(make_config())
        assert report.auditor["tally"] == report.contract_tally
        assert report.auditor["accepted_casts"] == report.accepted_casts
        assert report.invariants["auditor_equivalent"] is True

    def test_empty_election(self):
        report = run_election(make_config(voters=0))
        assert report.accepted_casts == 0
        assert all(v == 0 for v in report.contract_tally.values())
        assert all(report.invariants.values())

    def test_published_keys_verify_against_group(self):
        report = run_election(make_config())
        keys = json.loads(report.keys_text)
        p = int(keys["group"]["p"], 16)
        g = int(keys["group"]["g"], 16)
        assert len(keys["keys"]) == 2
        for entry in keys["keys"]:
            assert entry["x"] is not None


class TestWardenEconomics:
    def test_honest_delta_is_reward_minus_gas(self):
        config = make_config()
        report = run_election(config)
        price = config.gas_price_wei
        for result in report.warden_results:
            assert result.behavior == "honest"
            assert result.revealed and result.withdrew
            assert result.balance_delta == config.reward - result.gas_spent * price
            assert result.gas_spent == 23 + 629 + 600755 + 21629

    def test_abort_delta_forfeits_security(self):
        config = make_config(warden_behaviors=["honest", "abort"])
        report = run_election(config)
        price = config.gas_price_wei
        abort = report.warden_results[1]
        assert abort.behavior == "abort"
        assert not abort.revealed
        assert abort.balance_delta == -config.security_amount - abort.gas_spent * price
        # An aborting warden never pays for SubmitDecryptionKey.
        assert abort.gas_spent == 23 + 629 + 21629

    def test_large_enough_deposit_makes_abort_worse(self):
        # The deposit only deters aborting when it exceeds what the warden
        # saves by skipping the expensive key reveal, so pick one that does.
        config = make_config(
            warden_behaviors=["honest", "abort"],
            security_amount=50 * 10**15,
        )
        report = run_election(config)
        honest, abort = report.warden_results
        assert abort.balance_delta < honest.balance_delta


class TestAbortWarden:
    def test_aborted_batch_is_undecryptable(self):
        config = make_config(voters=8, warden_behaviors=["honest", "abort"])
        report = run_election(config)
        assert report.undecryptable == report.batch_sizes[2]
        assert sum(report.contract_tally.values()) == report.batch_sizes[1]
        assert all(report.invariants.values())

    def test_aborted_key_is_null_in_key_file(self):
        config = make_config(warden_behaviors=["abort", "honest"])
        report = run_election(config)
        keys = json.loads(report.keys_text)
        assert keys["keys"][0]["x"] is None
        assert keys["keys"][1]["x"] is not None


class TestLeakWarden:
    def test_leak_exposes_exactly_its_batch(self):
        config = make_config(voters=10, warden_behaviors=["leak@4500", "honest"])
        report = run_election(config)
        assert report.exposure.leaked_key_ids == [1]
        assert report.exposure.decryptable_votes == report.batch_sizes[1]
        assert report.exposure.decryption_matches_book is True
        assert report.invariants["exposure_decryption_consistent"] is True

    def test_no_leak_no_exposure(self):
        report = run_election(make_config())
        assert report.exposure.leaked_key_ids == []
        assert report.exposure.decryptable_votes == 0

    def test_leaking_warden_still_tallies(self):
        config = make_config(warden_behaviors=["leak@4500", "honest"])
        report = run_election(config)
        assert report.contract_tally == report.ground_truth_tally
        assert report.undecryptable == 0


class TestAdversaries:
    def test_token_guessing_report(self):
        config = make_config(
            token_bits=8,
            adversaries=[{"strategy": "token-guessing", "attempts": 500}],
        )
        report = run_election(config)
        attack = report.attacks[0]
        assert attack["strategy"] == "token-guessing"
        assert attack["attempts"] == 500
        live = report.issued_tokens
        assert attack["expected"] == pytest.approx(500 * live / 2**8)
        band = 3 * attack["stddev"]
        assert abs(attack["successes"] - attack["expected"]) <= band

    def test_full_width_guessing_never_hits(self):
        config = make_config(
            adversaries=[{"strategy": "token-guessing", "attempts": 2000}],
        )
        report = run_election(config)
        assert report.attacks[0]["successes"] == 0

    def test_double_vote_never_double_counts(self):
        config = make_config(
            adversaries=[{"strategy": "double-vote", "attempts": 3}],
        )
        report = run_election(config)
        attack = report.attacks[0]
        assert attack["strategy"] == "double-vote"
        assert attack["successes"] == 0
        # The adversary's one legitimate token produced one accepted cast;
        # the three extra attempts all show up as failures.
        assert report.accepted_casts == 7
        assert report.failed_casts == 3
        assert report.issued_tokens == 7
        assert all(report.invariants.values())

    def test_double_vote_counts_toward_tally_once(self):
        config = make_config(
            adversaries=[{"strategy": "double-vote", "attempts": 4}],
        )
        report = run_election(config)
        assert sum(report.contract_tally.values()) == 7
        assert report.contract_tally == report.ground_truth_tally


class TestReportShape:
    def test_to_dict_is_json_ready(self):
        report = run_election(make_config(
            warden_behaviors=["leak@4500", "abort"],
            adversaries=[{"strategy": "double-vote", "attempts": 2}],
        ))
        blob = json.dumps(report.to_dict())
        parsed = json.loads(blob)
        assert parsed["seed"] == 11
        assert parsed["records"] == len(report.dump_text.splitlines())

    def test_identities_cover_roles(self):
        config = make_config(
            voters=4,
            adversaries=[{"strategy": "double-vote", "attempts": 2}],
        )
        report = run_election(config)
        assert len(report.identities["voters"]) == 4
        assert len(report.identities["candidates"]) == 3
        assert len(report.identities["adversaries"]) == 1

    def test_config_echo_matches_input(self):
        config = make_config()
        report = run_election(config)
        assert report.config == config.to_dict()
