"""
Keyed MAC and hash primitives.

The MAC is CBC-MAC with AES-128 and a zero IV. Every data-plane MAC input is a single
16-byte block, so the tag is one block encryption of the packed input. Control-plane MACs
cover a 32-byte digest, i.e. a fixed two-block input.

References:
- NIST. (2001). FIPS 197: Advanced Encryption Standard (AES).
- NIST. (2015). FIPS 202: SHA-3 Standard.
"""
import hashlib
from functools import lru_cache

import numpy as np
from Crypto.Cipher import AES

from features.crypto.models import MacTag, SymKey
from lib.constants import BLOCK_LEN
from lib.utils import pack_fields

ZERO_IV = b"\x00" * BLOCK_LEN


@lru_cache(maxsize=4096)
def _block_cipher(key: bytes):
    # ECB objects are stateless, so one instance per key can be reused for every block
    return AES.new(key, AES.MODE_ECB)


def prf_block(key: SymKey, block: bytes) -> bytes:
    """
    Compute the 128-bit tag of a single block.

    :param key: The symmetric key.
    :param block: Exactly 16 bytes.

    returns: AES-128 encryption of the block under the key.

    :raises ValueError: If the block is not 16 bytes long.
    """
    if len(block) != BLOCK_LEN:
        raise ValueError(f"A MAC block must be exactly {BLOCK_LEN} bytes.")
    return _block_cipher(key.value).encrypt(block)


def cbc_mac(key: SymKey, message: bytes) -> bytes:
    """
    CBC-MAC of a fixed-length message whose length is a multiple of the block size.

    :param key: The symmetric key.
    :param message: The message (multiple of 16 bytes).

    returns: The last ciphertext block.

    Warnings:
        CBC-MAC is insecure for variable size messages; callers only pass fixed-size digests.
    """
    if not message or len(message) % BLOCK_LEN:
        raise ValueError("CBC-MAC input must be a non-empty multiple of the block size.")
    cipher = AES.new(key.value, AES.MODE_CBC, ZERO_IV)
    return cipher.encrypt(message)[-BLOCK_LEN:]


def truncate_msb(tag: bytes | int, m: int) -> MacTag:
    """
    Keep the m most significant bits of a 128-bit tag.

    :param tag: The tag as 16 bytes or as an integer below 2^128.
    :param m: Number of bits to keep (1..128).

    returns: The truncated tag.

    :raises ValueError: If m is out of range.
    """
    if not 1 <= m <= 128:
        raise ValueError("Truncation width must be between 1 and 128 bits.")
    value = int.from_bytes(tag, "big") if isinstance(tag, (bytes, bytearray)) else tag
    return MacTag(value=value >> (128 - m), width=m)


def mac_fields(key: SymKey, width: int, *fields: tuple[int, int]) -> int:
    """
    MAC a list of integer fields packed big-endian into one zero-padded block.

    :param key: The symmetric key.
    :param width: Truncation width in bits.
    :param fields: (value, byte width) pairs.

    returns: The truncated tag value.
    """
    block = pack_fields(*fields, size=BLOCK_LEN)
    return truncate_msb(prf_block(key, block), width).value


def hash_message(message: bytes) -> bytes:
    """Return the SHA3-256 digest of a message."""
    return hashlib.sha3_256(message).digest()


def forged_pass_rate(width: int, trials: int, seed: int = 0) -> float:
    """
    Measure how often a MAC fabricated without the key verifies.

    Each trial draws a random key and input block, and a uniformly random tag of the given
    width; the trial passes if the guess equals the real truncated tag.

    :param width: MAC width in bits.
    :param trials: Number of fabricated MACs.
    :param seed: Seed of the random generator.

    returns: The fraction of fabricated MACs that verify.
    """
    rng = np.random.default_rng(seed)
    passes = 0
    for _ in range(trials):
        key = SymKey(rng.bytes(16))
        real = truncate_msb(prf_block(key, rng.bytes(BLOCK_LEN)), width).value
        guess = int.from_bytes(rng.bytes(16), "big") >> (128 - width)
        passes += guess == real
    return passes / trials
