"""Verifier state machine and message schema for the two-leg session.

One session keeps two keyed function legs.  For each leg the verifier
secretly picks a basis bit: 0 selects an injective-family key (G), 1 a
claw-free-family key (F).  After the prover commits images it learns the
round type:

* preimage round -- the prover opens both images; each opening is checked
  with the public ``chk``.
* hadamard round -- the prover sends equation masks, receives question
  bits, and answers one bit per leg.  The verifier decodes branch bits
  (G legs) and claw parities (F legs) with its trapdoors and applies the
  basis-dependent consistency checks.

Messages are plain dicts ``{"type", "session_id", "payload"}`` so the same
objects travel in-process, over the line-delimited TCP transport, and into
transcript logs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from . import entcf
from .errors import (FamilyError, InvalidImageError, MalformedMessageError,
                     ProtocolStateError)


class Flag(str, Enum):
    OK = "ok"                # at least one check applied, all passed
    FAIL_PRE = "fail_pre"
    FAIL_TEST = "fail_test"
    FAIL_BELL = "fail_bell"
    NONE = "none"            # round carried no applicable check


MESSAGE_TYPES = ("keys", "commit", "round", "preimage", "equations",
                 "questions", "answers", "verdict")


def message(mtype: str, session_id: int, payload: dict) -> dict:
    return {"type": mtype, "session_id": int(session_id), "payload": payload}


def validate_message(obj, expected_type: str | None = None) -> dict:
    if not isinstance(obj, dict):
        raise MalformedMessageError("message is not an object")
    extra = set(obj) - {"type", "session_id", "payload"}
    missing = {"type", "session_id", "payload"} - set(obj)
    if extra or missing:
        raise MalformedMessageError(f"bad message keys: missing={missing} extra={extra}")
    if obj["type"] not in MESSAGE_TYPES:
        raise MalformedMessageError(f"unknown message type {obj['type']!r}")
    if expected_type is not None and obj["type"] != expected_type:
        raise MalformedMessageError(f"expected {expected_type!r}, got {obj['type']!r}")
    if not isinstance(obj["payload"], dict):
        raise MalformedMessageError("payload is not an object")
    return obj


def _bit(payload: dict, key: str) -> int:
    try:
        v = int(payload[key])
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedMessageError(f"missing or non-integer field {key!r}") from exc
    if v not in (0, 1):
        raise MalformedMessageError(f"field {key!r} must be a bit, got {v}")
    return v


def _hexbits(payload: dict, key: str, params: entcf.EntcfParams) -> int:
    try:
        return entcf.bits_from_wire(params, payload[key])
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedMessageError(f"bad bit-string field {key!r}: {exc}") from exc


@dataclass
class VerifierState:
    params: entcf.EntcfParams
    basis: tuple[int, int]
    keys: tuple[entcf.PublicKey, entcf.PublicKey]
    trapdoors: tuple[entcf.Trapdoor, entcf.Trapdoor]
    session_id: int = 0
    phase: str = "commit"
    round_type: Optional[str] = None
    images: Optional[tuple] = None
    equations: Optional[tuple[int, int]] = None
    questions: Optional[tuple[int, int]] = None
    answers: Optional[tuple[int, int]] = None
    openings: Optional[tuple] = None
    targets: dict = field(default_factory=dict)
    pre_leg_ok: Optional[tuple[bool, bool]] = None
    flag: Optional[Flag] = None

    def _expect_phase(self, phase: str):
        if self.phase != phase:
            raise ProtocolStateError(f"session in phase {self.phase!r}, expected {phase!r}")


def start_session(params: entcf.EntcfParams, rng: np.random.Generator,
                  session_id: int = 0) -> tuple[VerifierState, dict]:
    """Sample bases and keys; returns the state and the opening keys message."""
    basis = (int(rng.integers(2)), int(rng.integers(2)))
    pairs = [entcf.gen("F" if theta else "G", params, rng) for theta in basis]
    state = VerifierState(params=params, basis=basis,
                          keys=(pairs[0][0], pairs[1][0]),
                          trapdoors=(pairs[0][1], pairs[1][1]),
                          session_id=session_id)
    msg = message("keys", session_id, {
        "params": params.to_json(),
        "keys": [pk.to_json() for pk in state.keys],
    })
    return state, msg


def receive_commit(state: VerifierState, msg: dict, rng: np.random.Generator) -> dict:
    """Accept the prover's images and announce the round type."""
    state._expect_phase("commit")
    payload = validate_message(msg, "commit")["payload"]
    try:
        y1 = entcf.image_from_wire(state.params, payload["y1"])
        y2 = entcf.image_from_wire(state.params, payload["y2"])
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedMessageError(f"bad commitment: {exc}") from exc
    state.images = (y1, y2)
    state.round_type = "preimage" if rng.integers(2) == 0 else "hadamard"
    state.phase = "preimage" if state.round_type == "preimage" else "equations"
    return message("round", state.session_id, {"round": state.round_type})


def receive_preimage(state: VerifierState, msg: dict) -> dict:
    state._expect_phase("preimage")
    payload = validate_message(msg, "preimage")["payload"]
    b = (_bit(payload, "b1"), _bit(payload, "b2"))
    x = (_hexbits(payload, "x1", state.params), _hexbits(payload, "x2", state.params))
    state.openings = (b[0], x[0], b[1], x[1])
    leg_ok = tuple(entcf.chk(state.keys[i], state.images[i], b[i], x[i]) for i in (0, 1))
    state.pre_leg_ok = leg_ok
    state.flag = preimage_flag(leg_ok)
    state.phase = "done"
    return message("verdict", state.session_id, {"flag": state.flag.value})


def receive_equations(state: VerifierState, msg: dict, rng: np.random.Generator) -> dict:
    state._expect_phase("equations")
    payload = validate_message(msg, "equations")["payload"]
    d = (_hexbits(payload, "d1", state.params), _hexbits(payload, "d2", state.params))
    state.equations = d
    state.targets = _decode_targets(state, d)
    state.questions = (int(rng.integers(2)), int(rng.integers(2)))
    state.phase = "answers"
    return message("questions", state.session_id,
                   {"q1": state.questions[0], "q2": state.questions[1]})


def receive_answers(state: VerifierState, msg: dict) -> dict:
    state._expect_phase("answers")
    payload = validate_message(msg, "answers")["payload"]
    v = (_bit(payload, "v1"), _bit(payload, "v2"))
    state.answers = v
    state.flag = hadamard_flag(state.basis, state.questions, v, state.targets)
    state.phase = "done"
    return message("verdict", state.session_id, {"flag": state.flag.value})


def _decode_targets(state: VerifierState, d: tuple[int, int]) -> dict:
    """Trapdoor-decode the per-leg branch bit or claw parity."""
    out: dict = {}
    for i in (0, 1):
        key_b, key_u, key_deg = f"b{i + 1}", f"u{i + 1}", f"deg{i + 1}"
        td, pk, y = state.trapdoors[i], state.keys[i], state.images[i]
        if state.basis[i] == 0:
            try:
                out[key_b] = entcf.decode_bit(td, pk, y)
            except InvalidImageError:
                out[key_b] = None
            out[key_u], out[key_deg] = None, False
        else:
            eq = entcf.decode_equation(td, pk, y, d[i])
            out[key_b] = None
            out[key_u] = None if eq is None else eq.value
            out[key_deg] = False if eq is None else eq.degenerate
    return out


def preimage_flag(leg_ok: tuple[bool, bool]) -> Flag:
    return Flag.OK if leg_ok[0] and leg_ok[1] else Flag.FAIL_PRE


def hadamard_flag(basis: tuple[int, int], q: tuple[int, int], v: tuple[int, int],
                  targets: dict) -> Flag:
    """Apply the basis-dependent answer checks for a hadamard round.

    Undecodable targets count as failed checks: a prover that commits an
    invalid image never earns a pass in a checked slot.
    """
    b1, b2 = targets.get("b1"), targets.get("b2")
    u1, u2 = targets.get("u1"), targets.get("u2")
    if basis == (0, 0):
        return Flag.NONE
    if basis == (0, 1):
        checked, fail = False, False
        if q[0] == 0:
            checked = True
            fail |= b1 is None or v[0] != b1
        if q[1] == 1:
            checked = True
            fail |= b1 is None or u2 is None or v[1] != (u2 ^ b1)
        if not checked:
            return Flag.NONE
        return Flag.FAIL_TEST if fail else Flag.OK
    if basis == (1, 0):
        checked, fail = False, False
        if q[1] == 0:
            checked = True
            fail |= b2 is None or v[1] != b2
        if q[0] == 1:
            checked = True
            fail |= b2 is None or u1 is None or v[0] != (u1 ^ b2)
        if not checked:
            return Flag.NONE
        return Flag.FAIL_TEST if fail else Flag.OK
    # basis (1, 1): only cross questions carry a parity check
    if q == (0, 1):
        fail = u2 is None or (v[0] ^ v[1]) != u2
        return Flag.FAIL_BELL if fail else Flag.OK
    if q == (1, 0):
        fail = u1 is None or (v[0] ^ v[1]) != u1
        return Flag.FAIL_BELL if fail else Flag.OK
    return Flag.NONE


def session_targets(state: VerifierState) -> Optional[tuple[int, int]]:
    """Per-basis accepted answer pair, or accepted parity pair for (1,1).

    Returns None when any needed decoding failed.  For basis (1,1) the
    first slot is the leg-2 parity (constraining the cross question
    (0,1)) and the second the leg-1 parity.
    """
    if state.round_type != "hadamard":
        return None
    t = state.targets
    if state.basis == (0, 0):
        if t["b1"] is None or t["b2"] is None:
            return None
        return (t["b1"], t["b2"])
    if state.basis == (0, 1):
        if t["b1"] is None or t["u2"] is None:
            return None
        return (t["b1"], t["u2"] ^ t["b1"])
    if state.basis == (1, 0):
        if t["u1"] is None or t["b2"] is None:
            return None
        return (t["u1"] ^ t["b2"], t["b2"])
    if t["u1"] is None or t["u2"] is None:
        return None
    return (t["u2"], t["u1"])


# ---------------------------------------------------------------------------
# transcript records
# ---------------------------------------------------------------------------

@dataclass
class TranscriptRecord:
    """Everything needed to replay a finished session's verdict."""
    session_id: int
    basis: tuple[int, int]
    round_type: str
    flag: str
    images: tuple[str, str]
    keys: tuple[dict, dict]
    openings: Optional[tuple[int, str, int, str]] = None
    pre_leg_ok: Optional[tuple[bool, bool]] = None
    equations: Optional[tuple[str, str]] = None
    questions: Optional[tuple[int, int]] = None
    answers: Optional[tuple[int, int]] = None
    targets: Optional[dict] = None

    def to_json(self) -> dict:
        return {
            "session_id": self.session_id,
            "basis": list(self.basis),
            "round_type": self.round_type,
            "flag": self.flag,
            "images": list(self.images),
            "keys": list(self.keys),
            "openings": list(self.openings) if self.openings else None,
            "pre_leg_ok": list(self.pre_leg_ok) if self.pre_leg_ok else None,
            "equations": list(self.equations) if self.equations else None,
            "questions": list(self.questions) if self.questions else None,
            "answers": list(self.answers) if self.answers else None,
            "targets": self.targets,
        }

    @classmethod
    def from_json(cls, d: dict) -> "TranscriptRecord":
        def tup(v):
            return tuple(v) if v is not None else None
        try:
            return cls(session_id=int(d["session_id"]), basis=tuple(d["basis"]),
                       round_type=d["round_type"], flag=d["flag"],
                       images=tuple(d["images"]), keys=tuple(d["keys"]),
                       openings=tup(d.get("openings")), pre_leg_ok=tup(d.get("pre_leg_ok")),
                       equations=tup(d.get("equations")), questions=tup(d.get("questions")),
                       answers=tup(d.get("answers")), targets=d.get("targets"))
        except (KeyError, TypeError) as exc:
            raise MalformedMessageError(f"bad transcript record: {exc}") from exc


def record_from_state(state: VerifierState) -> TranscriptRecord:
    if state.phase != "done":
        raise ProtocolStateError("session is not finished")
    params = state.params
    openings = None
    if state.openings is not None:
        b1, x1, b2, x2 = state.openings
        openings = (b1, entcf.bits_to_wire(params, x1), b2, entcf.bits_to_wire(params, x2))
    equations = None
    if state.equations is not None:
        equations = tuple(entcf.bits_to_wire(params, d) for d in state.equations)
    return TranscriptRecord(
        session_id=state.session_id, basis=state.basis, round_type=state.round_type,
        flag=state.flag.value,
        images=tuple(entcf.image_to_wire(params, y) for y in state.images),
        keys=tuple(pk.to_json() for pk in state.keys),
        openings=openings, pre_leg_ok=state.pre_leg_ok, equations=equations,
        questions=state.questions, answers=state.answers,
        targets=dict(state.targets) if state.targets else None)


def recheck_flag(record: TranscriptRecord) -> Flag:
    """Recompute a record's verdict from its stored answers and targets."""
    if record.round_type == "preimage":
        if record.pre_leg_ok is None:
            raise MalformedMessageError("preimage record lacks leg outcomes")
        return preimage_flag(tuple(bool(v) for v in record.pre_leg_ok))
    if record.questions is None or record.answers is None or record.targets is None:
        raise MalformedMessageError("hadamard record is incomplete")
    return hadamard_flag(tuple(record.basis), tuple(record.questions),
                         tuple(record.answers), record.targets)
