"""Two-party protocol runner over a reliable ordered byte stream.

Wire format (normative, bit-exact):

    frame   := length(4 bytes, little-endian, payload only) tag(1 byte) payload
    tags    := HELLO=0x01 SEED=0x02 SYNDROME_SHARE=0x03 IDENT=0x04 DONE=0x05
    payload := HELLO          version(1) role(1) n(2 LE) m(2 LE)
               SEED           trial seed (8 LE)
               SYNDROME_SHARE role(1) nbits(2 LE) packed bits
               IDENT          success(1) nbits(2 LE) packed bits (empty on failure)
               DONE           success(1)

BitStrings are packed little-endian-within-byte per the gf2 convention.
The scramble matrix is never shipped: both parties derive it (and the
simulated measurement outcomes) deterministically from the SEED payload,
so one run of the two-party protocol reproduces the in-process engine
field for field. The sender's hidden frame stays on the sender's side;
the receiver holds only its own outcomes.
"""

from __future__ import annotations

import socket
import struct
import threading
from dataclasses import dataclass

from .distill import DistillConfig, trial_streams
from .gf2 import BitString, Gf2Matrix, mat_vec_mul, sample_invertible

__all__ = [
    "Message",
    "PartyResult",
    "LoccOutcome",
    "ProtocolViolation",
    "TAG_HELLO",
    "TAG_SEED",
    "TAG_SYNDROME_SHARE",
    "TAG_IDENT",
    "TAG_DONE",
    "PROTOCOL_VERSION",
    "MAX_PAYLOAD",
    "encode",
    "decode",
    "read_message",
    "run_party",
    "run_loopback",
]

TAG_HELLO = 0x01
TAG_SEED = 0x02
TAG_SYNDROME_SHARE = 0x03
TAG_IDENT = 0x04
TAG_DONE = 0x05
_TAG_NAMES = {
    TAG_HELLO: "HELLO",
    TAG_SEED: "SEED",
    TAG_SYNDROME_SHARE: "SYNDROME_SHARE",
    TAG_IDENT: "IDENT",
    TAG_DONE: "DONE",
}

PROTOCOL_VERSION = 1
MAX_PAYLOAD = 1 << 20
ROLE_ALICE = 1
ROLE_BOB = 2
_ROLE_IDS = {"alice": ROLE_ALICE, "bob": ROLE_BOB}


class ProtocolViolation(RuntimeError):
    """Peer sent something the current phase does not accept."""


class TransportClosed(RuntimeError):
    """Byte stream ended mid-protocol."""


@dataclass(frozen=True)
class Message:
    tag: int
    payload: bytes = b""

    def __post_init__(self) -> None:
        if self.tag not in _TAG_NAMES:
            raise ValueError(f"unknown tag 0x{self.tag:02X}")
        if len(self.payload) > MAX_PAYLOAD:
            raise ValueError("payload exceeds the frame cap")

    @property
    def tag_name(self) -> str:
        return _TAG_NAMES[self.tag]


def encode(m: Message) -> bytes:
    return struct.pack("<I", len(m.payload)) + bytes([m.tag]) + m.payload


def decode(data: bytes) -> Message:
    """Parse exactly one frame; raises ValueError on malformed input."""
    if len(data) < 5:
        raise ValueError("truncated frame: header incomplete")
    (length,) = struct.unpack("<I", data[:4])
    if length > MAX_PAYLOAD:
        raise ValueError(f"frame length {length} exceeds cap {MAX_PAYLOAD}")
    tag = data[4]
    if tag not in _TAG_NAMES:
        raise ValueError(f"unknown tag 0x{tag:02X}")
    if len(data) != 5 + length:
        raise ValueError(f"truncated frame: expected {5 + length} bytes, got {len(data)}")
    return Message(tag, data[5:])


def _recv_exact(transport, k: int) -> bytes:
    buf = b""
    while len(buf) < k:
        chunk = transport.recv(k - len(buf))
        if not chunk:
            raise TransportClosed("transport closed mid-protocol")
        buf += chunk
    return buf


def read_message(transport) -> tuple[Message, bytes]:
    """Read one frame from a socket-like transport; returns (message, raw)."""
    header = _recv_exact(transport, 5)
    (length,) = struct.unpack("<I", header[:4])
    if length > MAX_PAYLOAD:
        raise ValueError(f"frame length {length} exceeds cap {MAX_PAYLOAD}")
    payload = _recv_exact(transport, length) if length else b""
    return decode(header + payload), header + payload


# payload construction / parsing


def _hello_payload(role_id: int, n: int, m: int) -> bytes:
    return struct.pack("<BBHH", PROTOCOL_VERSION, role_id, n, m)


def _parse_hello(payload: bytes) -> tuple[int, int, int, int]:
    if len(payload) != 6:
        raise ProtocolViolation("malformed HELLO payload")
    return struct.unpack("<BBHH", payload)


def _bits_payload(prefix: bytes, bits: BitString) -> bytes:
    return prefix + struct.pack("<H", bits.n) + bits.to_bytes()


def _parse_bits(payload: bytes, offset: int) -> BitString:
    if len(payload) < offset + 2:
        raise ProtocolViolation("malformed bit payload")
    (nbits,) = struct.unpack("<H", payload[offset : offset + 2])
    raw = payload[offset + 2 :]
    try:
        return BitString.from_bytes(nbits, raw)
    except ValueError as exc:
        raise ProtocolViolation(f"malformed bit payload: {exc}") from None


@dataclass(frozen=True)
class LoccOutcome:
    """One party's view of the joint run; the receiver never sees hidden_x."""

    role: str
    trial_seed: int
    hidden_x: BitString | None
    scramble: Gf2Matrix
    syndrome: BitString
    y_a: BitString
    y_b: BitString
    identified_x: BitString | None
    success: bool
    ebits_out: int

    def to_dict(self) -> dict:
        return {
            "role": self.role,
            "trial_seed": self.trial_seed,
            "hidden_x": None if self.hidden_x is None else self.hidden_x.to_hex(),
            "syndrome": self.syndrome.to_hex(),
            "y_a": self.y_a.to_hex(),
            "y_b": self.y_b.to_hex(),
            "identified_x": None if self.identified_x is None else self.identified_x.to_hex(),
            "success": self.success,
            "ebits_out": self.ebits_out,
        }


@dataclass(frozen=True)
class PartyResult:
    role: str
    outcome: LoccOutcome | None
    transcript: tuple[tuple[str, bytes], ...]
    aborted: bool
    abort_reason: str | None

    @property
    def wire_bits(self) -> int:
        return 8 * sum(len(frame) for _, frame in self.transcript)

    def transcript_hex(self) -> list[dict]:
        return [{"dir": d, "hex": f.hex()} for d, f in self.transcript]


class _Party:
    """Sequential state machine for one protocol endpoint."""

    def __init__(self, role: str, transport, cfg: DistillConfig):
        if role not in _ROLE_IDS:
            raise ValueError("role must be 'alice' or 'bob'")
        self.role = role
        self.transport = transport
        self.cfg = cfg
        self.phase = "handshake"
        self.transcript: list[tuple[str, bytes]] = []

    def send(self, msg: Message) -> None:
        frame = encode(msg)
        self.transport.sendall(frame)
        self.transcript.append(("send", frame))

    def expect(self, tag: int) -> Message:
        msg, frame = read_message(self.transport)
        self.transcript.append(("recv", frame))
        if msg.tag != tag:
            raise ProtocolViolation(
                f"unexpected {msg.tag_name} in phase {self.phase}; expected {_TAG_NAMES[tag]}"
            )
        return msg

    def handshake(self) -> None:
        n, m = self.cfg.n, self.cfg.effective_m
        self.send(Message(TAG_HELLO, _hello_payload(_ROLE_IDS[self.role], n, m)))
        version, peer_role, peer_n, peer_m = _parse_hello(self.expect(TAG_HELLO).payload)
        if version != PROTOCOL_VERSION:
            raise ProtocolViolation(f"version mismatch: peer {version}, local {PROTOCOL_VERSION}")
        expected_peer = ROLE_BOB if self.role == "alice" else ROLE_ALICE
        if peer_role != expected_peer:
            raise ProtocolViolation("peer announced the same role")
        if (peer_n, peer_m) != (n, m):
            raise ProtocolViolation(
                f"config mismatch: peer (n={peer_n}, m={peer_m}), local (n={n}, m={m})"
            )

    def run(self) -> LoccOutcome:
        cfg = self.cfg
        n, m = cfg.n, cfg.effective_m
        self.handshake()

        self.phase = "scramble"
        if self.role == "alice":
            trial_seed = cfg.master_seed
            self.send(Message(TAG_SEED, struct.pack("<Q", trial_seed)))
        else:
            payload = self.expect(TAG_SEED).payload
            if len(payload) != 8:
                raise ProtocolViolation("malformed SEED payload")
            (trial_seed,) = struct.unpack("<Q", payload)

        frame_rng, scramble_rng, outcome_rng = trial_streams(trial_seed)
        scramble = sample_invertible(n, scramble_rng)

        self.phase = "measure"
        hidden = None
        if self.role == "alice":
            hidden = cfg.support[int(frame_rng.integers(len(cfg.support)))]
        # measurement outcomes are correlated; the shared seed supplies the
        # correlation classically, each party reading only its own share
        y_b = BitString.random(m, outcome_rng)
        if self.role == "alice":
            syndrome_local = mat_vec_mul(scramble, hidden).take(m)
            y_a = y_b ^ syndrome_local
            self.send(Message(TAG_SYNDROME_SHARE, _bits_payload(bytes([ROLE_ALICE]), y_a)))
            share = self.expect(TAG_SYNDROME_SHARE)
            if share.payload[:1] != bytes([ROLE_BOB]):
                raise ProtocolViolation("syndrome share carries the wrong role")
            y_b_wire = _parse_bits(share.payload, 1)
            if y_b_wire != y_b:
                raise ProtocolViolation("outcome stream desynchronized")
        else:
            share = self.expect(TAG_SYNDROME_SHARE)
            if share.payload[:1] != bytes([ROLE_ALICE]):
                raise ProtocolViolation("syndrome share carries the wrong role")
            y_a = _parse_bits(share.payload, 1)
            if y_a.n != m:
                raise ProtocolViolation(f"syndrome share has {y_a.n} bits, expected {m}")
            self.send(Message(TAG_SYNDROME_SHARE, _bits_payload(bytes([ROLE_BOB]), y_b)))
        syndrome = y_a ^ y_b

        self.phase = "identify"
        if self.role == "alice":
            candidates = [c for c in cfg.support if mat_vec_mul(scramble, c).take(m) == syndrome]
            identified = candidates[0] if len(candidates) == 1 else None
            success = identified is not None and identified == hidden
            body = identified if identified is not None else BitString.zeros(0)
            self.send(Message(TAG_IDENT, _bits_payload(bytes([1 if success else 0]), body)))
        else:
            ident = self.expect(TAG_IDENT)
            if not ident.payload:
                raise ProtocolViolation("malformed IDENT payload")
            success = bool(ident.payload[0])
            identified = _parse_bits(ident.payload, 1) if success else None
            if success:
                if identified.n != n:
                    raise ProtocolViolation("identified label has the wrong length")
                if mat_vec_mul(scramble, identified).take(m) != syndrome:
                    raise ProtocolViolation("identification inconsistent with the syndrome")

        self.phase = "correct"
        done = Message(TAG_DONE, bytes([1 if success else 0]))
        if self.role == "alice":
            peer_done = self.expect(TAG_DONE)
            if peer_done.payload != done.payload:
                raise ProtocolViolation("success flags disagree")
            self.send(done)
        else:
            self.send(done)
            peer_done = self.expect(TAG_DONE)
            if peer_done.payload != done.payload:
                raise ProtocolViolation("success flags disagree")

        self.phase = "done"
        return LoccOutcome(
            role=self.role,
            trial_seed=trial_seed,
            hidden_x=hidden,
            scramble=scramble,
            syndrome=syndrome,
            y_a=y_a,
            y_b=y_b,
            identified_x=identified,
            success=success,
            ebits_out=(n - m) if success else 0,
        )


def run_party(role: str, transport, cfg: DistillConfig) -> PartyResult:
    """Run one endpoint to completion; violations abort, never raise."""
    party = _Party(role, transport, cfg)
    try:
        outcome = party.run()
        return PartyResult(role, outcome, tuple(party.transcript), False, None)
    except (ProtocolViolation, TransportClosed, ValueError) as exc:
        return PartyResult(role, None, tuple(party.transcript), True, f"{party.phase}: {exc}")
    except OSError as exc:
        return PartyResult(role, None, tuple(party.transcript), True, f"{party.phase}: transport error: {exc}")


def run_loopback(cfg: DistillConfig, timeout: float = 30.0) -> tuple[PartyResult, PartyResult]:
    """Run both parties over an in-process socket pair."""
    sock_a, sock_b = socket.socketpair()
    sock_a.settimeout(timeout)
    sock_b.settimeout(timeout)
    results: dict[str, PartyResult] = {}

    def bob():
        results["bob"] = run_party("bob", sock_b, cfg)

    thread = threading.Thread(target=bob, daemon=True)
    thread.start()
    results["alice"] = run_party("alice", sock_a, cfg)
    thread.join(timeout)
    sock_a.close()
    sock_b.close()
    return results["alice"], results["bob"]
