"""
Asymmetric keys, the key registry and local secret keyrings.

The registry stands in for the RPKI: it maps an ASN to the public half of the AS key pair
(and, for simulated entities, to the private half). Every AS key pair carries an Ed25519
signing key and an X25519 agreement key so that two registered ASes can derive their
shared key without interaction.

References:
- Bernstein, D. J. et al. (2012). High-speed high-security signatures (Ed25519).
- RFC 7748. (2016). Elliptic Curves for Security (X25519).
"""
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey, Ed25519PublicKey
from cryptography.hazmat.primitives.asymmetric.x25519 import X25519PrivateKey, X25519PublicKey

from features.crypto.mac import hash_message
from features.crypto.models import SymKey
from lib.constants import KEY_LEN, PROTEST_MARGIN_SECONDS
from lib.errors import UnknownAsnError

logger = logging.getLogger(__name__)

_RAW = dict(encoding=serialization.Encoding.Raw, format=serialization.PublicFormat.Raw)


@dataclass(frozen=True, eq=False)
class PublicKey:
    """Public half of an AS key pair (PK_i^+)."""
    signing: Ed25519PublicKey
    agreement: X25519PublicKey

    def raw(self) -> bytes:
        """Return both public keys as 64 raw bytes."""
        return self.signing.public_bytes(**_RAW) + self.agreement.public_bytes(**_RAW)


@dataclass(frozen=True, eq=False)
class KeyPair:
    """An AS key pair (PK_i^- and PK_i^+)."""
    signing: Ed25519PrivateKey
    agreement: X25519PrivateKey

    @classmethod
    def generate(cls) -> "KeyPair":
        """Create a fresh random key pair."""
        return cls(Ed25519PrivateKey.generate(), X25519PrivateKey.generate())

    @classmethod
    def from_seed(cls, seed: bytes) -> "KeyPair":
        """
        Derive a key pair deterministically from a seed.

        :param seed: Arbitrary seed bytes (scenario seed and ASN).

        returns: The key pair.
        """
        signing = Ed25519PrivateKey.from_private_bytes(hash_message(b"sign|" + seed))
        agreement = X25519PrivateKey.from_private_bytes(hash_message(b"agree|" + seed))
        return cls(signing, agreement)

    @property
    def public(self) -> PublicKey:
        """Return the public half."""
        return PublicKey(self.signing.public_key(), self.agreement.public_key())


def sign(private: KeyPair, message: bytes) -> bytes:
    """
    Sign the hash of a message.

    :param private: The signer's key pair.
    :param message: The canonical byte encoding to sign.

    returns: The 64-byte Ed25519 signature over hash(message).
    """
    return private.signing.sign(hash_message(message))


def verify(public: PublicKey, message: bytes, signature: bytes) -> bool:
    """
    Verify a signature produced by `sign`.

    :param public: The claimed signer's public key.
    :param message: The canonical byte encoding.
    :param signature: The signature to check.

    returns: True if the signature is valid; malformed signatures yield False.
    """
    try:
        public.signing.verify(bytes(signature), hash_message(message))
        return True
    except (InvalidSignature, ValueError, TypeError):
        return False


@lru_cache(maxsize=1024)
def _shared_secret(private_raw: bytes, public_raw: bytes) -> bytes:
    shared = X25519PrivateKey.from_private_bytes(private_raw).exchange(X25519PublicKey.from_public_bytes(public_raw))
    return hash_message(b"ksd|" + shared)[:KEY_LEN]


def derive_shared_key(private: KeyPair, public: PublicKey) -> SymKey:
    """
    Derive K_SD with a non-interactive Diffie-Hellman exchange.

    derive(a, B) equals derive(b, A); results are cached per key pair.

    :param private: Own key pair.
    :param public: The peer's public key.

    returns: The 16-byte shared key.
    """
    private_raw = private.agreement.private_bytes(
        encoding=serialization.Encoding.Raw,
        format=serialization.PrivateFormat.Raw,
        encryption_algorithm=serialization.NoEncryption(),
    )
    public_raw = public.agreement.public_bytes(**_RAW)
    return SymKey(_shared_secret(private_raw, public_raw))


class KeyRegistry:
    """
    A class to represent the public key infrastructure.

    The registry is filled during scenario setup and only read afterwards.
    """
    def __init__(self):
        self.__public = {}
        self.__private = {}

    def register(self, asn: int, keypair: KeyPair | None = None, public: PublicKey | None = None):
        """
        Register an AS.

        :param asn: The AS number.
        :param keypair: The full key pair of a simulated entity.
        :param public: Only the public key (for entities whose private key is unknown).

        :raises ValueError: If neither key is given.
        """
        if keypair is None and public is None:
            raise ValueError("Please provide a key pair or a public key.")
        if keypair is not None:
            self.__private[asn] = keypair
            public = keypair.public
        self.__public[asn] = public
        logger.debug("registered AS%s", asn)

    def public_key(self, asn: int) -> PublicKey:
        """Return the public key of an AS or raise UnknownAsnError."""
        try:
            return self.__public[asn]
        except KeyError:
            raise UnknownAsnError(asn) from None

    def keypair(self, asn: int) -> KeyPair:
        """Return the key pair of a simulated AS or raise UnknownAsnError."""
        try:
            return self.__private[asn]
        except KeyError:
            raise UnknownAsnError(asn) from None

    def __contains__(self, asn: int) -> bool:
        return asn in self.__public

    def asns(self) -> list[int]:
        """Return the registered AS numbers."""
        return sorted(self.__public)


@dataclass
class AsKeyring:
    """
    Local secrets of a cooperating AS: data-plane keys K_i and control-plane keys K̂_i.

    Keys rotate every `rotation` seconds (None means a single epoch). Epoch keys are
    derived from the AS seed and stay retrievable until they are pruned, which happens
    once their epoch ended more than `retention` seconds ago.
    """
    seed: bytes
    rotation: float | None = None
    retention: float = PROTEST_MARGIN_SECONDS
    oldest_epoch: int | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def epoch_of(self, t: float) -> int:
        """Return the epoch index covering time t."""
        return 0 if self.rotation is None else math.floor(t / self.rotation)

    def _key(self, kind: bytes, epoch: int) -> SymKey:
        cached = self._cache.get((kind, epoch))
        if cached is None:
            cached = SymKey(hash_message(kind + b"|" + self.seed + epoch.to_bytes(8, "big", signed=True))[:KEY_LEN])
            self._cache[(kind, epoch)] = cached
        return cached

    def data_key(self, t: float) -> SymKey:
        """Return K_i for the epoch covering t."""
        return self._key(b"data", self.epoch_of(t))

    def control_key(self, t: float) -> SymKey:
        """Return K̂_i for the epoch covering t."""
        return self._key(b"control", self.epoch_of(t))

    def keys_near(self, t: float, tolerance: float, control: bool = False) -> list[SymKey]:
        """
        Return every retained key whose epoch overlaps [t - tolerance, t + tolerance].

        The epoch covering t comes first.

        :param t: Time of interest.
        :param tolerance: Boundary tolerance in seconds.
        :param control: Return K̂_i instead of K_i.
        """
        kind = b"control" if control else b"data"
        centre = self.epoch_of(t)
        epochs = [centre] + [e for e in range(self.epoch_of(t - tolerance), self.epoch_of(t + tolerance) + 1) if e != centre]
        if self.oldest_epoch is not None:
            epochs = [e for e in epochs if e >= self.oldest_epoch]
        return [self._key(kind, epoch) for epoch in epochs]

    def prune(self, now: float):
        """Forget keys whose epoch ended more than `retention` seconds before now."""
        if self.rotation is None:
            return
        # The epoch covering now - retention may still be needed
        self.oldest_epoch = self.epoch_of(now - self.retention)
        self._cache = {key: value for key, value in self._cache.items() if key[1] >= self.oldest_epoch}
