""" This file contains the enums used in the application. """
from enum import Enum

class Stage(Enum):
    """ Stages of the dashboard """
    START = "start"
    RESULTS = "results"

class Framing(Enum):
    """ How the FAIR header is framed on the wire """
    RAW = "raw"
    IPV6_EH = "ipv6_eh"
    IPV6_EH_STRICT = "ipv6_eh_strict"

class Role(Enum):
    """ Role of an AS on a communication channel """
    SOURCE = "source"
    TRANSIT_COOP = "transit_coop"
    TRANSIT_NONCOOP = "transit_noncoop"
    DESTINATION = "destination"

class AdversaryKind(Enum):
    """ Scripted adversary behaviors """
    FLOOD = "flood"
    CORRUPT_UPSTREAM_MACS = "corrupt_upstream_macs"
    REPLAY = "replay"
    INJECT = "inject"
    TIMESTAMP_SHIFT = "timestamp_shift"
    FRAME_DUPLICATE_EVIDENCE = "frame_duplicate_evidence"

class PoliceResult(Enum):
    """ Token bucket policer decision """
    CONFORM = "conform"
    VIOLATE = "violate"

class ClockCheck(Enum):
    """ Result of the timestamp freshness check """
    PASS = "pass"
    DROP = "drop"

class Decision(Enum):
    """ Outcome of a complaint examination """
    ADMIT = "admit"
    REJECT = "reject"

class Outcome(Enum):
    """ Classification produced by the second protest round """
    SOURCE_GUILTY = "source_guilty"
    ENROUTE_ADVERSARY = "enroute_adversary"
    REPLAY_DETECTED = "replay_detected"
    FRAMING_SUSPECTED = "framing_suspected"
    REJECTED = "rejected"

class SbAction(Enum):
    """ Treatment of traffic flagged as suspicious """
    FORWARD = "forward"
    DROP = "drop"
    DELAY = "delay"

class Weighting(Enum):
    """ How IP-version shares are interpreted by the overhead calculator """
    BYTE = "byte"
    PACKET = "packet"

class DropReason(Enum):
    """ Why a FAIR router discarded a packet """
    CLOCK = "clock"
    MALFORMED = "malformed"
    ICV = "icv"
    UNROUTABLE = "unroutable"
    SUSPICIOUS = "suspicious"
