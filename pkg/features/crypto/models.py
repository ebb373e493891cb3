from dataclasses import dataclass

from lib.constants import KEY_LEN


@dataclass(frozen=True, slots=True)
class SymKey:
    """A 128-bit symmetric key (K_SD, K_i or the long-term K̂_i)."""
    value: bytes

    def __post_init__(self):
        if not isinstance(self.value, bytes) or len(self.value) != KEY_LEN:
            raise ValueError(f"A symmetric key must be exactly {KEY_LEN} bytes.")

    def __repr__(self):
        # Never print key material
        return "SymKey(****)"


@dataclass(frozen=True, slots=True)
class MacTag:
    """A MAC truncated to its `width` most significant bits."""
    value: int
    width: int

    def __post_init__(self):
        if not 1 <= self.width <= 128:
            raise ValueError("MAC width must be between 1 and 128 bits.")
        if not 0 <= self.value < (1 << self.width):
            raise ValueError(f"MAC value does not fit into {self.width} bits.")

    def to_bytes(self) -> bytes:
        """Return the tag as big-endian bytes, rounded up to whole bytes."""
        return self.value.to_bytes((self.width + 7) // 8, "big")
