"""Wire-format helpers shared by the ledger, contract, and auditor.

Everything that crosses a record boundary is JSON with a fixed canonical
form: dict keys sorted, compact separators, no floats. Big integers (group
elements, exponents, tokens, digests) travel as 0x-prefixed lowercase hex
strings; small counters stay as plain ints.
"""

from __future__ import annotations

import json


def int_to_hex(value: int) -> str:
    if value < 0:
        raise ValueError("negative values have no wire form")
    return format(value, "#x")


def hex_to_int(text: str) -> int:
    if not isinstance(text, str) or not text.startswith("0x"):
        raise ValueError(f"expected 0x-prefixed hex string, got {text!r}")
    return int(text, 16)


def bytes_to_hex(data: bytes) -> str:
    return "0x" + data.hex()


def hex_to_bytes(text: str) -> bytes:
    if not isinstance(text, str) or not text.startswith("0x"):
        raise ValueError(f"expected 0x-prefixed hex string, got {text!r}")
    return bytes.fromhex(text[2:])


def canonical(obj):
    """Normalize a JSON-able object: sort dict keys, reject floats."""
    if isinstance(obj, dict):
        out = {}
        for key in sorted(obj):
            if not isinstance(key, str):
                raise ValueError(f"payload keys must be strings, got {key!r}")
            out[key] = canonical(obj[key])
        return out
    if isinstance(obj, list):
        return [canonical(item) for item in obj]
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, int):
        return obj
    if isinstance(obj, str):
        return obj
    # Floats would make record hashes platform-sensitive.
    raise ValueError(f"unsupported payload value: {obj!r}")


def canonical_json(obj) -> str:
    return json.dumps(canonical(obj), sort_keys=True, separators=(",", ":"))
