"""Independent auditor tests: recount equivalence and forgery detection."""

import json

import pytest

from wardenvote.audit import AuditError, audit_tally, parse_keys_file, verify_replay
from wardenvote.config import parse_config
from wardenvote.ledger import ChainError, ReplayError, compute_record_hash
from wardenvote.scenario import run_election


def run(**overrides):
    base = {"voters": 8, "wardens": 2, "candidates": 3, "seed": 21}
    base.update(overrides)
    return run_election(parse_config(base))


def rechain(dump_text, mutate):
    """Apply `mutate` to the parsed record dicts, then rebuild a
    hash-consistent chain so only content checks can catch the forgery."""
    rows = [json.loads(line) for line in dump_text.splitlines()]
    mutate(rows)
    prev_hash = "0x" + "0" * 64
    for row in rows:
        row["prev_hash"] = prev_hash
        row["record_hash"] = compute_record_hash(
            index=row["index"],
            timestamp=row["timestamp"],
            sender=row["sender"],
            method=row["method"],
            payload=row["payload"],
            gas_charged=row["gas_charged"],
            outcome=row["outcome"],
            prev_hash=prev_hash,
        )
        prev_hash = row["record_hash"]
    return "\n".join(json.dumps(r, separators=(",", ":")) for r in rows) + "\n"


class TestRecount:
    def test_recount_matches_contract(self):
        report = run()
        result = audit_tally(report.dump_text, report.keys_text)
        assert result.tally == report.contract_tally
        assert result.spoiled == report.spoiled
        assert result.undecryptable == report.undecryptable
        assert result.accepted_casts == report.accepted_casts
        assert result.batch_sizes == report.batch_sizes

    def test_recount_with_missing_key(self):
        report = run(warden_behaviors=["honest", "abort"])
        result = audit_tally(report.dump_text, report.keys_text)
        assert result.undecryptable == report.batch_sizes[2]
        assert result.tally == report.contract_tally

    def test_recount_counts_rejected_casts_as_nothing(self):
        report = run(adversaries=[{"strategy": "double-vote", "attempts": 3}])
        result = audit_tally(report.dump_text, report.keys_text)
        assert result.accepted_casts == report.accepted_casts
        assert sum(result.tally.values()) == report.accepted_casts

    def test_records_verified_covers_whole_dump(self):
        report = run()
        result = audit_tally(report.dump_text, report.keys_text)
        assert result.records_verified == len(report.dump_text.splitlines())

    def test_to_dict_stringifies_keys(self):
        report = run()
        data = audit_tally(report.dump_text, report.keys_text).to_dict()
        assert all(isinstance(k, str) for k in data["tally"])
        json.dumps(data)


class TestKeyFile:
    def test_parse_keys_file(self):
        keys = parse_keys_file(run().keys_text)
        assert set(keys) == {1, 2}

    def test_rejects_bad_json(self):
        with pytest.raises(AuditError, match="not valid JSON"):
            parse_keys_file("{broken")

    def test_rejects_missing_keys_list(self):
        with pytest.raises(AuditError, match="'keys' list"):
            parse_keys_file(json.dumps({"group": {}}))

    def test_rejects_malformed_entry(self):
        with pytest.raises(AuditError, match="bad key entry"):
            parse_keys_file(json.dumps({"keys": [{"key_id": 1}]}))

    def test_wrong_exponent_is_caught(self):
        report = run()
        keys = json.loads(report.keys_text)
        x = int(keys["keys"][0]["x"], 16)
        keys["keys"][0]["x"] = hex(x + 1)
        with pytest.raises(AuditError, match="does not match"):
            audit_tally(report.dump_text, json.dumps(keys))

    def test_foreign_key_id_is_caught(self):
        report = run()
        keys = json.loads(report.keys_text)
        keys["keys"].append({"key_id": 9, "x": "0x3"})
        with pytest.raises(AuditError, match="outside the election"):
            audit_tally(report.dump_text, json.dumps(keys))

    def test_key_without_onchain_counterpart(self):
        # Strip the encryption key submissions out of the dump; the
        # published keys then have nothing to verify against.
        report = run()

        def drop_submissions(rows):
            rows[:] = [r for r in rows if r["method"] != "SubmitEncryptionKey"]
            for i, r in enumerate(rows):
                r["index"] = i

        forged = rechain(report.dump_text, drop_submissions)
        with pytest.raises(AuditError, match="no on-chain encryption key"):
            audit_tally(forged, report.keys_text)


class TestForgery:
    def test_tampered_dump_fails_chain_verification(self):
        report = run()
        lines = report.dump_text.splitlines()
        row = json.loads(lines[3])
        row["gas_charged"] += 1
        lines[3] = json.dumps(row, separators=(",", ":"))
        with pytest.raises(ChainError):
            audit_tally("\n".join(lines), report.keys_text)

    def test_rechained_unknown_token_cast_is_caught(self):
        report = run()

        def corrupt_token(rows):
            for r in rows:
                if r["method"] == "CastVote" and r["outcome"] == "accepted":
                    token = r["payload"]["args"]["token"]
                    flipped = hex(int(token, 16) ^ 1)
                    r["payload"]["args"]["token"] = flipped
                    return
            raise AssertionError("no accepted cast in dump")

        forged = rechain(report.dump_text, corrupt_token)
        with pytest.raises(AuditError, match="unknown or spent token"):
            audit_tally(forged, report.keys_text)

    def test_rechained_duplicate_spend_is_caught(self):
        report = run()

        def duplicate_cast(rows):
            cast = next(
                r for r in rows
                if r["method"] == "CastVote" and r["outcome"] == "accepted"
            )
            copy = json.loads(json.dumps(cast))
            rows.append(copy)
            for i, r in enumerate(rows):
                r["index"] = i
            rows[-1]["timestamp"] = rows[-2]["timestamp"]

        forged = rechain(report.dump_text, duplicate_cast)
        with pytest.raises(AuditError, match="unknown or spent token"):
            audit_tally(forged, report.keys_text)

    def test_rechained_bad_key_id_is_caught(self):
        report = run()

        def corrupt_key_id(rows):
            for r in rows:
                if r["method"] == "CastVote" and r["outcome"] == "accepted":
                    r["payload"]["args"]["key_id"] = 9
                    return

        forged = rechain(report.dump_text, corrupt_key_id)
        with pytest.raises(AuditError, match="bad key id"):
            audit_tally(forged, report.keys_text)

    def test_rechained_nonwarden_encryption_key_is_caught(self):
        report = run()

        def corrupt_sender(rows):
            for r in rows:
                if r["method"] == "SubmitEncryptionKey" and r["outcome"] == "accepted":
                    r["sender"] = "0x" + "ab" * 20
                    return

        forged = rechain(report.dump_text, corrupt_sender)
        with pytest.raises(AuditError, match="non-warden"):
            audit_tally(forged, report.keys_text)


class TestReplay:
    def test_replay_digest_matches_report(self):
        report = run()
        assert verify_replay(report.dump_text) == report.final_state_digest

    def test_replay_rejects_rechained_forgery(self):
        # A forged-but-consistent chain survives hash verification, yet
        # re-execution diverges because the contract would have rejected
        # the altered transaction.
        report = run()

        def corrupt_token(rows):
            for r in rows:
                if r["method"] == "CastVote" and r["outcome"] == "accepted":
                    token = r["payload"]["args"]["token"]
                    r["payload"]["args"]["token"] = hex(int(token, 16) ^ 1)
                    return

        forged = rechain(report.dump_text, corrupt_token)
        with pytest.raises(ReplayError):
            verify_replay(forged)

    def test_replay_rejects_plain_tamper(self):
        report = run()
        lines = report.dump_text.splitlines()
        row = json.loads(lines[5])
        row["sender"] = "0x" + "cd" * 20
        lines[5] = json.dumps(row, separators=(",", ":"))
        with pytest.raises(ChainError):
            verify_replay("\n".join(lines))
