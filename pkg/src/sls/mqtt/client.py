"""MQTT client side: a generic QoS-0 client and the trigger-button emulator.

TriggerClient plays the role of the wireless push button: it connects to
the broker and publishes the ASCII strings "ON"/"OFF" on the trigger topic.
"""

from __future__ import annotations

import logging
import socket
import threading
import time
from typing import Callable

from . import codec

__all__ = ["MqttClient", "TriggerClient", "DEFAULT_TRIGGER_TOPIC", "ConnectionLost"]

log = logging.getLogger(__name__)

DEFAULT_TRIGGER_TOPIC = "sls/trigger"


class ConnectionLost(ConnectionError):
    """Broker connection failed and reconnect attempts were exhausted."""


class MqttClient:
    """Small synchronous QoS-0 client with a background receive loop."""

    def __init__(self, host: str, port: int, client_id: str,
                 keep_alive: int = 60,
                 on_message: Callable[[str, bytes], None] | None = None):
        self.host = host
        self.port = port
        self.client_id = client_id
        self.keep_alive = keep_alive
        self.on_message = on_message
        self._sock: socket.socket | None = None
        self._send_lock = threading.Lock()
        self._recv_thread: threading.Thread | None = None
        self._connack = threading.Event()
        self._suback = threading.Event()
        self._closed = threading.Event()

    def connect(self, timeout: float = 5.0):
        self._sock = socket.create_connection((self.host, self.port), timeout=timeout)
        self._sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        self._sock.settimeout(0.5)
        self._connack.clear()
        self._closed.clear()
        self._recv_thread = threading.Thread(target=self._recv_loop, daemon=True)
        self._recv_thread.start()
        self._send(codec.Connect(self.client_id, self.keep_alive))
        if not self._connack.wait(timeout):
            raise ConnectionLost("no CONNACK from broker")

    def connect_with_retry(self, attempts: int = 20, backoff: float = 0.1,
                           max_backoff: float = 2.0):
        """Bounded reconnect with exponential backoff."""
        delay = backoff
        for attempt in range(attempts):
            try:
                self.connect()
                return
            except OSError as exc:
                log.debug("connect attempt %d failed: %s", attempt + 1, exc)
                time.sleep(delay)
                delay = min(delay * 2, max_backoff)
        raise ConnectionLost(f"broker unreachable after {attempts} attempts")

    def subscribe(self, topic: str, timeout: float = 5.0):
        self._suback.clear()
        self._send(codec.Subscribe(packet_id=1, topics=(topic,)))
        if not self._suback.wait(timeout):
            raise ConnectionLost("no SUBACK from broker")

    def publish(self, topic: str, payload: bytes):
        self._send(codec.Publish(topic, payload))

    def ping(self):
        self._send(codec.PingReq())

    def disconnect(self):
        if self._sock is not None:
            try:
                self._send(codec.Disconnect())
            except OSError:
                pass
        self.close()

    def close(self):
        self._closed.set()
        if self._sock is not None:
            try:
                self._sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            self._sock.close()
            self._sock = None
        if self._recv_thread is not None and self._recv_thread is not threading.current_thread():
            self._recv_thread.join(timeout=2.0)

    def _send(self, packet):
        if self._sock is None:
            raise ConnectionLost("not connected")
        data = codec.encode_packet(packet)
        with self._send_lock:
            self._sock.sendall(data)

    def _recv_loop(self):
        decoder = codec.StreamDecoder()
        sock = self._sock
        while not self._closed.is_set() and sock is not None:
            try:
                data = sock.recv(4096)
            except socket.timeout:
                continue
            except OSError:
                return
            if not data:
                return
            try:
                packets = decoder.feed(bytes(data))
            except codec.MalformedPacket as exc:
                log.warning("malformed packet from broker: %s", exc)
                return
            for packet in packets:
                if isinstance(packet, codec.ConnAck):
                    self._connack.set()
                elif isinstance(packet, codec.SubAck):
                    self._suback.set()
                elif isinstance(packet, codec.Publish) and self.on_message:
                    self.on_message(packet.topic, packet.payload)


class TriggerClient:
    """Emulates the push-button device: publishes scheduled ON/OFF states."""

    def __init__(self, host: str, port: int, topic: str = DEFAULT_TRIGGER_TOPIC,
                 client_id: str = "sls-trigger"):
        self.topic = topic
        self._client = MqttClient(host, port, client_id)
        self._connected = False

    def connect(self, attempts: int = 20, backoff: float = 0.1):
        self._client.connect_with_retry(attempts=attempts, backoff=backoff)
        self._connected = True

    def press(self):
        self.send_state("ON")

    def release(self):
        self.send_state("OFF")

    def send_state(self, state: str):
        if state not in ("ON", "OFF"):
            raise ValueError("trigger state must be 'ON' or 'OFF'")
        if not self._connected:
            self.connect()
        self._client.publish(self.topic, state.encode("ascii"))

    def run_schedule(self, schedule: list[tuple[float, str]],
                     sleep=time.sleep):
        """Publish (time, state) pairs in order; times are offsets in seconds."""
        if not self._connected:
            self.connect()
        start = time.monotonic()
        for offset, state in schedule:
            delay = offset - (time.monotonic() - start)
            if delay > 0:
                sleep(delay)
            self.send_state(state)

    def close(self):
        self._client.disconnect()
        self._connected = False
