"""Token bucket shaper and policer."""
from .token_bucket import TokenBucket

__all__ = [
    "TokenBucket",
]
