"""Multiplicative-group ElGamal and token hashing primitives.

Ballots are textbook ElGamal ciphertexts over Z_p^*: the plaintext is the
candidate id itself, so decryption needs no extraction step beyond a range
check performed by the caller. Two group configurations ship built in: a
tiny classroom group (p = 23) that keeps unit tests exhaustive, and a
160-bit safe-prime group used as the default for realistic runs. Both are
plain data; any caller-supplied group passes the same validation.

All randomness is drawn from caller-supplied ``random.Random`` instances so
that every run is replayable from a seed.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass

import gmpy2

# Fixed once for the whole build: every digest in the system (token database,
# record chain, derived seeds) comes from this one standardized 256-bit hash.
HASH_ALG = "sha3-256"
DIGEST_BITS = 256
DIGEST_BYTES = DIGEST_BITS // 8

DEFAULT_TOKEN_BITS = 256


def _hash(data: bytes) -> bytes:
    return hashlib.sha3_256(data).digest()


@dataclass(frozen=True)
class GroupParams:
    """Public parameters of the multiplicative group: modulus p and generator g."""

    p: int
    g: int

    def validate(self) -> None:
        """Reject parameters that cannot host the scheme.

        p must be an odd prime and g an element of [2, p - 1] whose order
        exceeds 2; an order-2 generator would leak the plaintext's sign
        immediately and breaks the round-trip guarantee.
        """
        if self.p < 5 or not gmpy2.is_prime(self.p):
            raise ValueError(f"group modulus must be prime, got {self.p}")
        if not 2 <= self.g <= self.p - 1:
            raise ValueError(f"generator {self.g} outside [2, p-1]")
        if pow(self.g, 2, self.p) == 1:
            raise ValueError("generator order must exceed 2")

    @property
    def message_space(self) -> range:
        """Valid plaintexts: integers in [1, p - 1]."""
        return range(1, self.p)


# Classroom group: small enough to enumerate every message and exponent.
TINY_GROUP = GroupParams(p=23, g=5)

# 160-bit safe prime (p = 2q + 1 with q prime), g = 2 verified primitive:
# g^2 != 1 and g^q != 1 (mod p). Found by deterministic search, then frozen.
DEFAULT_GROUP = GroupParams(p=0xD83FBF551DC78E8A80B1C48464760F3A5C23A66B, g=2)


@dataclass(frozen=True)
class ElGamalPublicKey:
    group: GroupParams
    h: int  # g^x mod p


@dataclass(frozen=True)
class ElGamalSecretKey:
    group: GroupParams
    x: int  # exponent in [1, p - 2]


@dataclass(frozen=True)
class ElGamalKeyPair:
    public: ElGamalPublicKey
    secret: ElGamalSecretKey


@dataclass(frozen=True)
class VoteCiphertext:
    """An encrypted ballot: beta = g^r, gamma = m * h^r (both mod p)."""

    beta: int
    gamma: int


def keygen(group: GroupParams, rng: random.Random) -> ElGamalKeyPair:
    """Draw a fresh key pair: x uniform in [1, p - 2], h = g^x mod p."""
    x = rng.randrange(1, group.p - 1)
    h = pow(group.g, x, group.p)
    return ElGamalKeyPair(
        public=ElGamalPublicKey(group=group, h=h),
        secret=ElGamalSecretKey(group=group, x=x),
    )


def encrypt(pk: ElGamalPublicKey, m: int, rng: random.Random) -> VoteCiphertext:
    """Encrypt plaintext m under pk with a fresh ephemeral exponent.

    Args:
        pk: recipient public key.
        m: plaintext, must lie in [1, p - 1].
        rng: source of the ephemeral exponent r in [1, p - 2].

    Raises:
        ValueError: if m is outside the message space.
    """
    p = pk.group.p
    if not 1 <= m <= p - 1:
        raise ValueError(f"plaintext {m} outside message space [1, {p - 1}]")
    r = rng.randrange(1, p - 1)
    beta = pow(pk.group.g, r, p)
    gamma = (m * pow(pk.h, r, p)) % p
    return VoteCiphertext(beta=beta, gamma=gamma)


def decrypt(sk: ElGamalSecretKey, ct: VoteCiphertext) -> int:
    """Recover the plaintext: m = gamma * (beta^x)^-1 mod p.

    Args:
        sk: secret key matching the encryption key.
        ct: ciphertext to open; both elements must lie in [1, p - 1].

    Raises:
        ValueError: if either ciphertext element is out of range (zero
            included; a zero beta has no modular inverse).
    """
    p = sk.group.p
    if not 1 <= ct.beta <= p - 1:
        raise ValueError(f"ciphertext beta {ct.beta} outside [1, {p - 1}]")
    if not 1 <= ct.gamma <= p - 1:
        raise ValueError(f"ciphertext gamma {ct.gamma} outside [1, {p - 1}]")
    shared = pow(ct.beta, sk.x, p)
    return (ct.gamma * pow(shared, -1, p)) % p


def hash_token(token: bytes) -> bytes:
    """Digest of a voting token; total over all byte strings."""
    return _hash(token)


def random_token(bits: int, rng: random.Random) -> bytes:
    """Draw a uniform l-bit token, packed big-endian into ceil(l/8) bytes."""
    if bits < 1:
        raise ValueError("token width must be at least one bit")
    return rng.getrandbits(bits).to_bytes((bits + 7) // 8, "big")


def derive_seed(*parts: object) -> int:
    """Deterministic 256-bit sub-seed from a tagged tuple of values.

    Each part is serialized with a length prefix so distinct tuples can
    never collide by concatenation.
    """
    acc = hashlib.sha3_256()
    for part in parts:
        if isinstance(part, bytes):
            blob = part
        elif isinstance(part, int):
            blob = part.to_bytes((part.bit_length() + 8) // 8, "big", signed=True)
        else:
            blob = str(part).encode("utf-8")
        acc.update(len(blob).to_bytes(4, "big"))
        acc.update(blob)
    return int.from_bytes(acc.digest(), "big")
