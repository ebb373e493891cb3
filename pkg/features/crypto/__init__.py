"""Cryptographic primitives.

Truncated CBC-MAC, SHA-3 hashing, Ed25519 signatures over hashes, and X25519 shared-key
derivation backed by a key registry.
"""
from .keys import AsKeyring, KeyPair, KeyRegistry, PublicKey, derive_shared_key, sign, verify
from .mac import cbc_mac, forged_pass_rate, hash_message, mac_fields, prf_block, truncate_msb
from .models import MacTag, SymKey

__all__ = [
    "AsKeyring",
    "KeyPair",
    "KeyRegistry",
    "MacTag",
    "PublicKey",
    "SymKey",
    "cbc_mac",
    "derive_shared_key",
    "forged_pass_rate",
    "hash_message",
    "mac_fields",
    "prf_block",
    "sign",
    "truncate_msb",
    "verify",
]
