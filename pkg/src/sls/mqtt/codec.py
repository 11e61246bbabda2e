"""MQTT 3.1.1 wire framing for the protocol subset this project speaks.

Supported packets: CONNECT, CONNACK, PUBLISH (QoS 0 only), SUBSCRIBE,
SUBACK, PINGREQ, PINGRESP, DISCONNECT. Encoding is byte-exact per the
MQTT 3.1.1 framing rules: fixed header (type nibble + flags), variable
length integer for the remaining length (1-4 bytes, minimal form), then
the per-type variable header and payload.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

__all__ = [
    "Connect", "ConnAck", "Publish", "Subscribe", "SubAck",
    "PingReq", "PingResp", "Disconnect",
    "MalformedPacket", "NeedMoreBytes", "TooLarge",
    "encode_varint", "decode_varint",
    "encode_packet", "decode_packet", "StreamDecoder",
    "MAX_REMAINING_LENGTH",
]

MAX_REMAINING_LENGTH = 268_435_455  # 4 varint bytes of 7 payload bits each

PROTOCOL_NAME = b"MQTT"
PROTOCOL_LEVEL = 4  # 3.1.1


class MalformedPacket(ValueError):
    """Byte stream violates the framing rules; the connection should close."""


class NeedMoreBytes(Exception):
    """Not an error: more bytes are required. `needed` is a lower bound on
    the total buffer size required to make progress."""

    def __init__(self, needed: int):
        self.needed = needed
        super().__init__(f"need at least {needed} bytes")


class TooLarge(ValueError):
    """Packet body exceeds the 4-byte varint maximum."""


@dataclass(frozen=True)
class Connect:
    client_id: str
    keep_alive: int = 60
    clean_session: bool = True


@dataclass(frozen=True)
class ConnAck:
    session_present: bool = False
    return_code: int = 0


@dataclass(frozen=True)
class Publish:
    topic: str
    payload: bytes
    retain: bool = False
    # QoS 0 only: no packet id, no dup flag.


@dataclass(frozen=True)
class Subscribe:
    packet_id: int
    topics: tuple[str, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class SubAck:
    packet_id: int
    return_codes: tuple[int, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class PingReq:
    pass


@dataclass(frozen=True)
class PingResp:
    pass


@dataclass(frozen=True)
class Disconnect:
    pass


_TYPE_CODES = {
    Connect: 1, ConnAck: 2, Publish: 3, Subscribe: 8,
    SubAck: 9, PingReq: 12, PingResp: 13, Disconnect: 14,
}

Packet = Connect | ConnAck | Publish | Subscribe | SubAck | PingReq | PingResp | Disconnect


def encode_varint(value: int) -> bytes:
    """Minimal-form variable length integer (7 bits per byte, MSB = continue)."""
    if value < 0 or value > MAX_REMAINING_LENGTH:
        raise TooLarge(f"remaining length {value} out of range")
    out = bytearray()
    while True:
        byte = value % 128
        value //= 128
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


def decode_varint(buf: bytes, offset: int = 0) -> tuple[int, int]:
    """Decode a varint; returns (value, bytes consumed after offset)."""
    value = 0
    multiplier = 1
    for i in range(4):
        if offset + i >= len(buf):
            raise NeedMoreBytes(offset + i + 1)
        byte = buf[offset + i]
        value += (byte & 0x7F) * multiplier
        if not byte & 0x80:
            return value, i + 1
        multiplier *= 128
    raise MalformedPacket("varint continuation past 4 bytes")


def _mqtt_string(s: str) -> bytes:
    data = s.encode("utf-8")
    if len(data) > 0xFFFF:
        raise TooLarge("string exceeds 65535 bytes")
    return struct.pack(">H", len(data)) + data


def _read_mqtt_string(body: bytes, pos: int) -> tuple[str, int]:
    if pos + 2 > len(body):
        raise MalformedPacket("truncated string length")
    (length,) = struct.unpack_from(">H", body, pos)
    pos += 2
    if pos + length > len(body):
        raise MalformedPacket("truncated string body")
    try:
        return body[pos:pos + length].decode("utf-8"), pos + length
    except UnicodeDecodeError as exc:
        raise MalformedPacket("invalid UTF-8 string") from exc


def encode_packet(packet: Packet) -> bytes:
    """Serialize a packet to its exact MQTT 3.1.1 byte representation."""
    kind = _TYPE_CODES.get(type(packet))
    if kind is None:
        raise MalformedPacket(f"unsupported packet type {type(packet).__name__}")

    flags = 0
    if isinstance(packet, Connect):
        connect_flags = 0x02 if packet.clean_session else 0x00
        body = (_mqtt_string(PROTOCOL_NAME.decode()) + bytes([PROTOCOL_LEVEL, connect_flags])
                + struct.pack(">H", packet.keep_alive) + _mqtt_string(packet.client_id))
    elif isinstance(packet, ConnAck):
        body = bytes([1 if packet.session_present else 0, packet.return_code])
    elif isinstance(packet, Publish):
        flags = 0x01 if packet.retain else 0x00  # QoS bits stay 00
        body = _mqtt_string(packet.topic) + packet.payload
    elif isinstance(packet, Subscribe):
        flags = 0x02  # reserved flags mandated by the protocol
        body = struct.pack(">H", packet.packet_id)
        for topic in packet.topics:
            body += _mqtt_string(topic) + b"\x00"  # requested QoS 0
    elif isinstance(packet, SubAck):
        body = struct.pack(">H", packet.packet_id) + bytes(packet.return_codes)
    else:  # PingReq / PingResp / Disconnect carry no body
        body = b""

    return bytes([(kind << 4) | flags]) + encode_varint(len(body)) + body


def decode_packet(buf: bytes) -> tuple[Packet, int]:
    """Inverse of encode_packet; returns (packet, bytes consumed).

    Raises NeedMoreBytes when the buffer holds only a packet prefix.
    """
    if len(buf) < 1:
        raise NeedMoreBytes(1)
    first = buf[0]
    kind = first >> 4
    flags = first & 0x0F
    remaining, var_len = decode_varint(buf, 1)
    total = 1 + var_len + remaining
    if len(buf) < total:
        raise NeedMoreBytes(total)
    body = buf[1 + var_len:total]

    if kind == 1:
        name, pos = _read_mqtt_string(body, 0)
        if name != "MQTT" or pos + 4 > len(body):
            raise MalformedPacket("bad CONNECT variable header")
        level = body[pos]
        connect_flags = body[pos + 1]
        (keep_alive,) = struct.unpack_from(">H", body, pos + 2)
        if level != PROTOCOL_LEVEL:
            raise MalformedPacket(f"unsupported protocol level {level}")
        client_id, _ = _read_mqtt_string(body, pos + 4)
        return Connect(client_id, keep_alive, bool(connect_flags & 0x02)), total
    if kind == 2:
        if len(body) != 2:
            raise MalformedPacket("CONNACK body must be 2 bytes")
        return ConnAck(bool(body[0] & 0x01), body[1]), total
    if kind == 3:
        if flags & 0x06:
            raise MalformedPacket("only QoS 0 PUBLISH is supported")
        topic, pos = _read_mqtt_string(body, 0)
        return Publish(topic, body[pos:], retain=bool(flags & 0x01)), total
    if kind == 8:
        if flags != 0x02:
            raise MalformedPacket("SUBSCRIBE reserved flags must be 0010")
        if len(body) < 2:
            raise MalformedPacket("truncated SUBSCRIBE")
        (packet_id,) = struct.unpack_from(">H", body, 0)
        pos, topics = 2, []
        while pos < len(body):
            topic, pos = _read_mqtt_string(body, pos)
            if pos >= len(body):
                raise MalformedPacket("missing requested QoS byte")
            pos += 1  # requested QoS, ignored (QoS 0 subset)
            topics.append(topic)
        if not topics:
            raise MalformedPacket("SUBSCRIBE with no topics")
        return Subscribe(packet_id, tuple(topics)), total
    if kind == 9:
        if len(body) < 2:
            raise MalformedPacket("truncated SUBACK")
        (packet_id,) = struct.unpack_from(">H", body, 0)
        return SubAck(packet_id, tuple(body[2:])), total
    if kind == 12:
        return PingReq(), total
    if kind == 13:
        return PingResp(), total
    if kind == 14:
        return Disconnect(), total
    raise MalformedPacket(f"unsupported packet type {kind}")


class StreamDecoder:
    """Incremental decoder: feed arbitrary byte chunks, iterate packets."""

    def __init__(self):
        self._buf = bytearray()

    def feed(self, data: bytes) -> list[Packet]:
        self._buf.extend(data)
        packets = []
        while self._buf:
            try:
                packet, consumed = decode_packet(bytes(self._buf))
            except NeedMoreBytes:
                break
            del self._buf[:consumed]
            packets.append(packet)
        return packets
