"""Embedded MQTT broker (QoS 0 subset) played by the controller host.

One reader thread per connection; a shared subscription table guarded by a
lock. Delivery to a slow subscriber never blocks others: each session has a
bounded outbound queue drained by its own writer thread, and overflow drops
the QoS-0 message (logged).
"""

from __future__ import annotations

import logging
import queue
import socket
import threading
import time

from . import codec

__all__ = ["Broker", "topic_matches"]

log = logging.getLogger(__name__)

OUTBOUND_QUEUE_SIZE = 256


def topic_matches(topic_filter: str, topic: str) -> bool:
    """Exact match plus the single-level '+' wildcard."""
    filter_parts = topic_filter.split("/")
    topic_parts = topic.split("/")
    if len(filter_parts) != len(topic_parts):
        return False
    return all(f == "+" or f == t for f, t in zip(filter_parts, topic_parts))


class _Session:
    def __init__(self, sock: socket.socket, addr):
        self.sock = sock
        self.addr = addr
        self.client_id: str | None = None
        self.keep_alive = 0
        self.last_seen = time.monotonic()
        self.outbound: queue.Queue[bytes | None] = queue.Queue(maxsize=OUTBOUND_QUEUE_SIZE)
        self.alive = True

    def enqueue(self, data: bytes):
        try:
            self.outbound.put_nowait(data)
        except queue.Full:
            log.warning("dropping QoS-0 message for slow subscriber %s", self.client_id)

    def close(self):
        if self.alive:
            self.alive = False
            try:
                self.outbound.put_nowait(None)
            except queue.Full:
                pass
            try:
                self.sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            self.sock.close()


class Broker:
    """Stream-socket MQTT broker; use as `Broker().start()` and `.stop()`."""

    def __init__(self, host: str = "127.0.0.1", port: int = 0):
        self._server = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._server.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._server.bind((host, port))
        self._server.listen(16)
        self._server.settimeout(0.2)
        self.host = host
        self.port: int = self._server.getsockname()[1]
        self._lock = threading.Lock()
        self._sessions: dict[str, _Session] = {}
        self._subscriptions: dict[str, set[_Session]] = {}
        self._stop = threading.Event()
        self._accept_thread: threading.Thread | None = None

    # -- lifecycle ----------------------------------------------------------

    def start(self) -> "Broker":
        self._accept_thread = threading.Thread(target=self._accept_loop,
                                               name="mqtt-broker-accept", daemon=True)
        self._accept_thread.start()
        return self

    def stop(self):
        self._stop.set()
        if self._accept_thread is not None:
            self._accept_thread.join(timeout=2.0)
        with self._lock:
            sessions = list(self._sessions.values())
        for session in sessions:
            session.close()

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()

    # -- internals ----------------------------------------------------------

    def _accept_loop(self):
        try:
            while not self._stop.is_set():
                try:
                    sock, addr = self._server.accept()
                except socket.timeout:
                    continue
                except OSError:
                    break
                sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
                session = _Session(sock, addr)
                threading.Thread(target=self._reader, args=(session,), daemon=True).start()
                threading.Thread(target=self._writer, args=(session,), daemon=True).start()
        finally:
            self._server.close()

    def _writer(self, session: _Session):
        while True:
            data = session.outbound.get()
            if data is None:
                return
            try:
                session.sock.sendall(data)
            except OSError:
                self._drop(session)
                return

    def _reader(self, session: _Session):
        decoder = codec.StreamDecoder()
        session.sock.settimeout(0.5)
        try:
            while not self._stop.is_set() and session.alive:
                try:
                    data = session.sock.recv(4096)
                except socket.timeout:
                    if self._idle_expired(session):
                        log.info("keep-alive expired for %s", session.client_id)
                        return
                    continue
                except OSError:
                    return
                if not data:
                    return
                session.last_seen = time.monotonic()
                for packet in decoder.feed(bytes(data)):
                    if not self._handle(session, packet):
                        return
        except codec.MalformedPacket as exc:
            log.warning("protocol violation from %s: %s", session.addr, exc)
        finally:
            self._drop(session)

    def _idle_expired(self, session: _Session) -> bool:
        if session.keep_alive <= 0:
            return False
        return time.monotonic() - session.last_seen > 1.5 * session.keep_alive

    def _handle(self, session: _Session, packet) -> bool:
        if isinstance(packet, codec.Connect):
            with self._lock:
                stale = self._sessions.get(packet.client_id)
                if stale is not None and stale is not session:
                    self._drop_locked(stale)
                    stale.close()
                self._sessions[packet.client_id] = session
            session.client_id = packet.client_id
            session.keep_alive = packet.keep_alive
            session.enqueue(codec.encode_packet(codec.ConnAck(False, 0)))
            return True
        if isinstance(packet, codec.Subscribe):
            with self._lock:
                for topic in packet.topics:
                    self._subscriptions.setdefault(topic, set()).add(session)
            codes = tuple(0 for _ in packet.topics)
            session.enqueue(codec.encode_packet(codec.SubAck(packet.packet_id, codes)))
            return True
        if isinstance(packet, codec.Publish):
            self._fan_out(packet)
            return True
        if isinstance(packet, codec.PingReq):
            session.enqueue(codec.encode_packet(codec.PingResp()))
            return True
        if isinstance(packet, codec.Disconnect):
            return False
        log.warning("unexpected packet %s from %s", type(packet).__name__, session.client_id)
        return False

    def _fan_out(self, publish: codec.Publish):
        data = codec.encode_packet(publish)
        with self._lock:
            targets = {session
                       for topic_filter, sessions in self._subscriptions.items()
                       if topic_matches(topic_filter, publish.topic)
                       for session in sessions if session.alive}
        for session in targets:
            session.enqueue(data)

    def _drop(self, session: _Session):
        with self._lock:
            self._drop_locked(session)
        session.close()

    def _drop_locked(self, session: _Session):
        for sessions in self._subscriptions.values():
            sessions.discard(session)
        if session.client_id and self._sessions.get(session.client_id) is session:
            del self._sessions[session.client_id]
