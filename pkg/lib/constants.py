""" Protocol constants shared by all features. """

# Field widths of the FAIR header
TIMESTAMP_BITS = 16
SEQNO_BITS = 24
ICV_BITS = 8
NONCE_BITS = 4
SLOT_MAC_BITS = 4

TIMESTAMP_MOD = 1 << TIMESTAMP_BITS
SEQNO_MOD = 1 << SEQNO_BITS

# next_as byte: MSB is the suspicious bit, the 7 LSBs index the next cooperating AS
SUSPICIOUS_BIT = 0x80
AS_INDEX_MASK = 0x7F
MAX_SLOTS = 127

# Fixed part of the FAIR header (timestamp 2, seqno 3, icv 1, next_as 1)
FAIR_FIXED_LEN = 7
# IPv6 extension header framing adds next-header and header-length bytes
EH_EXTRA_LEN = 2

# Protocol number used in the IPv6 next-header chain for the FAIR header (RFC 3692 experimental)
FAIR_PROTOCOL = 253
UDP_PROTOCOL = 17

IPV4_HEADER_LEN = 20
IPV6_HEADER_LEN = 40

# Symmetric keys and MAC blocks
KEY_LEN = 16
BLOCK_LEN = 16

# Maximum clock deviation accepted by transit and destination ASes (seconds)
CLOCK_TOLERANCE = 3

# Protest time margin T_m
PROTEST_MARGIN_SECONDS = 12 * 3600

# Extended FIB entry for IPv6: 16-byte prefix, 16-byte key, 3-byte seqno, 1-byte port
FIB_ENTRY_SIZE_V6 = 16 + KEY_LEN + 3 + 1

# Dump file
DUMP_MAGIC = b"FAIRDUMP"
DUMP_VERSION = 1
