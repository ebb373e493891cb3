""" Exceptions raised by the FAIR features. """


class FairError(Exception):
    """Base class for every error raised by this project."""


class UnknownAsnError(FairError, KeyError):
    """The key registry has no entry for the requested ASN."""

    def __init__(self, asn: int):
        super().__init__(f"AS{asn} is not registered")
        self.asn = asn

    def __str__(self):
        return self.args[0]


# Wire format

class WireFormatError(FairError, ValueError):
    """A byte sequence cannot be decoded or a header cannot be encoded."""


class TruncatedBufferError(WireFormatError):
    """The buffer is shorter than the fixed part of the structure."""


class HeaderLengthError(WireFormatError):
    """A declared length disagrees with the buffer."""


class HeaderInvariantError(WireFormatError):
    """A header field is out of its allowed range."""


class DumpFormatError(WireFormatError):
    """A FAIRDUMP file is corrupt."""


class PolicyFormatError(WireFormatError):
    """A policy packet is malformed or its records are out of order."""


# Control plane

class PolicyError(FairError):
    """Policy construction or verification failed."""


class EndorsementRefusedError(PolicyError):
    """A transit AS is not part of the declared cooperating path."""


class SignatureRejectedError(PolicyError):
    """A policy signature does not verify."""


class PolicyTimeError(PolicyError):
    """The validity window of a policy is inconsistent."""


# Token bucket

class TokenBucketError(FairError):
    """Invalid use of a token bucket."""


class ClockRegressionError(TokenBucketError):
    """Time passed to the bucket went backwards."""


class PacketTooLargeError(TokenBucketError):
    """A shaper can never release a packet larger than the burst size."""


# Data plane

class UnroutableError(FairError, LookupError):
    """No FIB entry matches the destination address."""


# Protest

class EvidenceError(FairError):
    """Evidence cannot be assembled or examined."""


class EmptyWindowError(EvidenceError):
    """No stored records fall into the requested window."""


class StaleEvidenceError(EvidenceError):
    """The complaint arrives later than the protest margin allows."""


class ProtestError(FairError):
    """Adjudication input is invalid."""


class BadResponseSignatureError(ProtestError):
    """A complaint response carries a signature that does not verify."""


class ReplayGroupError(ProtestError):
    """A duplicate group is too small to localize an adversary."""


# Simulation

class ScenarioValidationError(FairError, ValueError):
    """A scenario file or configuration is invalid."""
