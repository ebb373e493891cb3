"""Sending-policy negotiation and communication channels."""
from features.wire import DestRecord, PolicyPacket, SourceRecord, TransitRecord

from .channel import Channel, channel_id_for, establish_channel, renegotiate
from .policy import (
    DefaultPolicy,
    PolicyReport,
    create_policy,
    default_policy_for,
    dest_complete,
    negotiate_policy,
    transit_endorse,
    transit_mac,
    verify_policy,
)

__all__ = [
    "Channel",
    "DefaultPolicy",
    "DestRecord",
    "PolicyPacket",
    "PolicyReport",
    "SourceRecord",
    "TransitRecord",
    "channel_id_for",
    "create_policy",
    "default_policy_for",
    "dest_complete",
    "establish_channel",
    "negotiate_policy",
    "renegotiate",
    "transit_endorse",
    "transit_mac",
    "verify_policy",
]
