"""Unit and property tests for the ElGamal and token-hash primitives."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wardenvote.crypto import (
    DEFAULT_GROUP,
    TINY_GROUP,
    ElGamalPublicKey,
    ElGamalSecretKey,
    GroupParams,
    VoteCiphertext,
    decrypt,
    derive_seed,
    encrypt,
    hash_token,
    keygen,
    random_token,
)


class FixedRandom(random.Random):
    """Random that returns a scripted randrange value once, for oracle tests."""

    def __init__(self, value: int):
        super().__init__()
        self._value = value

    def randrange(self, *args, **kwargs):  # noqa: D102
        return self._value


def naive_modexp(base: int, exp: int, mod: int) -> int:
    # Independent oracle: repeated multiplication, no pow() shortcut.
    acc = 1
    for _ in range(exp):
        acc = (acc * base) % mod
    return acc


class TestGroupParams:
    def test_tiny_group_validates(self):
        TINY_GROUP.validate()

    def test_default_group_validates(self):
        DEFAULT_GROUP.validate()
        assert DEFAULT_GROUP.p.bit_length() == 160

    def test_default_group_is_safe_prime_with_primitive_generator(self):
        p, g = DEFAULT_GROUP.p, DEFAULT_GROUP.g
        q = (p - 1) // 2
        import gmpy2

        assert gmpy2.is_prime(p)
        assert gmpy2.is_prime(q)
        assert pow(g, 2, p) != 1
        assert pow(g, q, p) != 1

    def test_composite_modulus_rejected(self):
        with pytest.raises(ValueError):
            GroupParams(p=21, g=2).validate()

    def test_generator_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            GroupParams(p=23, g=1).validate()
        with pytest.raises(ValueError):
            GroupParams(p=23, g=23).validate()

    def test_order_two_generator_rejected(self):
        # p - 1 squares to 1 mod p.
        with pytest.raises(ValueError):
            GroupParams(p=23, g=22).validate()

    def test_message_space(self):
        assert list(TINY_GROUP.message_space) == list(range(1, 23))


class TestKeygenOracle:
    def test_keygen_known_exponent(self):
        # With x = 6 in the tiny group: h = 5^6 mod 23 = 8.
        pair = keygen(TINY_GROUP, FixedRandom(6))
        assert pair.secret.x == 6
        assert pair.public.h == 8
        assert naive_modexp(5, 6, 23) == 8

    def test_keygen_range(self):
        rng = random.Random(7)
        for _ in range(200):
            pair = keygen(TINY_GROUP, rng)
            assert 1 <= pair.secret.x <= TINY_GROUP.p - 2
            assert pair.public.h == pow(TINY_GROUP.g, pair.secret.x, TINY_GROUP.p)


class TestEncryptDecryptOracle:
    def test_encrypt_known_ephemeral(self):
        # h = 8, m = 4, r = 3: beta = 5^3 mod 23 = 10, gamma = 4 * 8^3 mod 23 = 1.
        pk = ElGamalPublicKey(group=TINY_GROUP, h=8)
        ct = encrypt(pk, 4, FixedRandom(3))
        assert (ct.beta, ct.gamma) == (10, 1)
        assert naive_modexp(5, 3, 23) == 10
        assert (4 * naive_modexp(8, 3, 23)) % 23 == 1

    def test_decrypt_known_ciphertext(self):
        sk = ElGamalSecretKey(group=TINY_GROUP, x=6)
        assert decrypt(sk, VoteCiphertext(beta=10, gamma=1)) == 4

    def test_plaintext_out_of_range(self):
        pk = ElGamalPublicKey(group=TINY_GROUP, h=8)
        for bad in (0, 23, -1, 24):
            with pytest.raises(ValueError):
                encrypt(pk, bad, random.Random(1))

    def test_zero_ciphertext_elements_rejected(self):
        sk = ElGamalSecretKey(group=TINY_GROUP, x=6)
        with pytest.raises(ValueError):
            decrypt(sk, VoteCiphertext(beta=0, gamma=1))
        with pytest.raises(ValueError):
            decrypt(sk, VoteCiphertext(beta=1, gamma=0))
        with pytest.raises(ValueError):
            decrypt(sk, VoteCiphertext(beta=23, gamma=1))

    def test_exhaustive_round_trip_tiny_group(self):
        # Every message under every key with a few ephemerals: 22 * 22 * 3 cases.
        p = TINY_GROUP.p
        for x in range(1, p - 1):
            pair_pk = ElGamalPublicKey(group=TINY_GROUP, h=pow(5, x, p))
            sk = ElGamalSecretKey(group=TINY_GROUP, x=x)
            for m in range(1, p):
                for r in (1, 7, 20):
                    ct = encrypt(pair_pk, m, FixedRandom(r))
                    assert decrypt(sk, ct) == m

    def test_sampled_round_trip_default_group(self):
        rng = random.Random(160)
        pair = keygen(DEFAULT_GROUP, rng)
        for _ in range(1000):
            m = rng.randrange(1, DEFAULT_GROUP.p)
            ct = encrypt(pair.public, m, rng)
            assert decrypt(pair.secret, ct) == m

    def test_randomization_distinct_betas(self):
        # 1000 encryptions of one message should nearly all differ.
        rng = random.Random(11)
        pair = keygen(DEFAULT_GROUP, rng)
        betas = {encrypt(pair.public, 5, rng).beta for _ in range(1000)}
        assert len(betas) >= 990


class TestHashToken:
    def test_digest_width(self):
        assert len(hash_token(b"")) == 32
        assert len(hash_token(b"\x00" * 32)) == 32

    def test_deterministic(self):
        assert hash_token(b"abc") == hash_token(b"abc")
        assert hash_token(b"abc") != hash_token(b"abd")

    def test_known_vector(self):
        # SHA3-256 of the empty string, from the standard's test vectors.
        assert (
            hash_token(b"").hex()
            == "a7ffc6f8bf1ed76651c14756a061d662f580ff4de43b49fa82d80a4b80f8434a"
        )


class TestRandomToken:
    def test_width_and_packing(self):
        rng = random.Random(3)
        t = random_token(256, rng)
        assert len(t) == 32
        t20 = random_token(20, rng)
        assert len(t20) == 3
        assert int.from_bytes(t20, "big") < 2**20

    def test_rejects_zero_width(self):
        with pytest.raises(ValueError):
            random_token(0, random.Random(1))

    def test_uniqueness_at_full_width(self):
        rng = random.Random(9)
        seen = {random_token(256, rng) for _ in range(10_000)}
        assert len(seen) == 10_000


class TestDeriveSeed:
    def test_deterministic_and_sensitive(self):
        assert derive_seed("a", 1) == derive_seed("a", 1)
        assert derive_seed("a", 1) != derive_seed("a", 2)
        assert derive_seed("ab", "c") != derive_seed("a", "bc")

    def test_range(self):
        assert 0 <= derive_seed("x") < 2**256


@settings(max_examples=200)
@given(
    m=st.integers(min_value=1, max_value=22),
    x=st.integers(min_value=1, max_value=21),
    seed=st.integers(min_value=0, max_value=2**32),
)
def test_round_trip_property_tiny(m, x, seed):
    pk = ElGamalPublicKey(group=TINY_GROUP, h=pow(5, x, 23))
    sk = ElGamalSecretKey(group=TINY_GROUP, x=x)
    assert decrypt(sk, encrypt(pk, m, random.Random(seed))) == m


@settings(max_examples=50)
@given(seed=st.integers(min_value=0, max_value=2**48), m=st.integers(min_value=1))
def test_round_trip_property_default_group(seed, m):
    rng = random.Random(seed)
    pair = keygen(DEFAULT_GROUP, rng)
    msg = 1 + (m % (DEFAULT_GROUP.p - 1))
    assert decrypt(pair.secret, encrypt(pair.public, msg, rng)) == msg


@settings(max_examples=100)
@given(data=st.binary(max_size=64))
def test_hash_token_total_and_fixed_width(data):
    assert len(hash_token(data)) == 32
