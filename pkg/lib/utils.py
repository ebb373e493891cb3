import hashlib
import json
import math

import numpy as np

from lib.constants import TIMESTAMP_MOD

def low16(seconds: float) -> int:
    """
    Return the 16 least significant bits of a Unix time in whole seconds.

    :param seconds: The (fractional) Unix time.

    returns: The 16-bit timestamp carried in the FAIR header.
    """
    return int(math.floor(seconds)) % TIMESTAMP_MOD

def expand_timestamp(ts16: int, reference: float) -> int:
    """
    Expand a 16-bit timestamp to full seconds.

    The result is the Unix time closest to the reference whose low 16 bits equal ts16.
    Stored records use their arrival time as reference; the clock check bounds the
    difference to a few seconds, far below the 2^15 ambiguity.

    :param ts16: The 16-bit timestamp.
    :param reference: A full Unix time close to the stamped time.

    returns: The expanded timestamp in whole seconds.
    """
    base = int(math.floor(reference))
    delta = (ts16 - base) % TIMESTAMP_MOD
    if delta >= TIMESTAMP_MOD // 2:
        delta -= TIMESTAMP_MOD
    return base + delta

def pack_fields(*fields: tuple[int, int], size: int | None = None) -> bytes:
    """
    Concatenate unsigned integers big-endian.

    :param fields: (value, byte width) pairs in order.
    :param size: Zero-pad the result on the right to this many bytes.

    returns: The packed bytes.
    """
    out = b"".join(value.to_bytes(width, "big") for value, width in fields)
    if size is not None:
        if len(out) > size:
            raise ValueError(f"Packed fields need {len(out)} bytes, more than {size}.")
        out = out.ljust(size, b"\x00")
    return out

def binomial_sigma(trials: int, p: float) -> float:
    """Standard deviation of a binomial proportion."""
    return math.sqrt(p * (1 - p) / trials)

def within_binomial(passes: int, trials: int, p: float, sigmas: float = 4) -> bool:
    """
    Check whether an observed pass count matches a success probability.

    :param passes: Observed successes.
    :param trials: Number of trials.
    :param p: Expected success probability.
    :param sigmas: Tolerance in standard deviations.

    returns: True if |passes/trials - p| <= sigmas * sigma.
    """
    return abs(passes / trials - p) <= sigmas * binomial_sigma(trials, p)

def mean_and_std(samples) -> tuple[float, float]:
    """Return the mean and sample standard deviation (0 for a single sample)."""
    values = np.asarray(samples, dtype=float)
    std = float(values.std(ddof=1)) if len(values) > 1 else 0.0
    return float(values.mean()), std

def canonical_json(data) -> bytes:
    """Serialize data with sorted keys and no whitespace."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"), default=str).encode()

def digest_hex(data) -> str:
    """Return the SHA3-256 hex digest of the canonical JSON of data."""
    return hashlib.sha3_256(canonical_json(data)).hexdigest()
