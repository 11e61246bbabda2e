"""Minimal MQTT 3.1.1 subset (QoS 0) carrying the ON/OFF trigger contract."""

from .codec import (  # noqa: F401
    Connect, ConnAck, Publish, Subscribe, SubAck, PingReq, PingResp, Disconnect,
    encode_packet, decode_packet, encode_varint, decode_varint,
    MalformedPacket, NeedMoreBytes, TooLarge, StreamDecoder,
)
from .broker import Broker  # noqa: F401
from .client import MqttClient, TriggerClient, DEFAULT_TRIGGER_TOPIC  # noqa: F401
