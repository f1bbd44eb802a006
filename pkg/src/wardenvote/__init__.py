"""Deterministic simulator for a token-based, warden-escrowed voting protocol.

The package hosts a gas-metered single-process ledger, the voting contract
that runs on it, the off-chain election commission that issues anonymous
voting tokens, scripted voter/warden/adversary agents, and a harness that
runs whole elections, audits their dumps independently, and reproduces the
protocol's cost model.
"""

from .crypto import (
    DEFAULT_GROUP,
    TINY_GROUP,
    ElGamalKeyPair,
    ElGamalPublicKey,
    ElGamalSecretKey,
    GroupParams,
    VoteCiphertext,
    decrypt,
    encrypt,
    hash_token,
    keygen,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_GROUP",
    "TINY_GROUP",
    "ElGamalKeyPair",
    "ElGamalPublicKey",
    "ElGamalSecretKey",
    "GroupParams",
    "VoteCiphertext",
    "decrypt",
    "encrypt",
    "hash_token",
    "keygen",
    "__version__",
]
