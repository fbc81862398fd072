"""Three-valued verdicts with replayable witnesses."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any


class Status(enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"

    @property
    def exit_code(self) -> int:
        return _EXIT[self]

    @property
    def severity(self) -> int:
        return _SEVERITY[self]


_EXIT = {Status.HOLDS: 0, Status.FAILS: 1, Status.INCONCLUSIVE: 2}
_SEVERITY = {Status.HOLDS: 0, Status.INCONCLUSIVE: 1, Status.FAILS: 2}


@dataclass(frozen=True)
class Witness:
    """Evidence behind a verdict.

    When ``params`` carries ``"t"``, ``points`` is read as consecutive pairs
    and ``values[i]`` is the membership value (or distance, if ``params``
    names a ``"metric"``) of pair ``i`` at that ``t``. This is what
    :func:`fuzmet.spaces.replay_witness` re-evaluates.
    """

    indices: tuple = ()
    points: tuple = ()
    values: tuple = ()
    params: dict = field(default_factory=dict)

    def is_empty(self) -> bool:
        return not (self.indices or self.points or self.values or self.params)

    def to_json(self) -> dict:
        return {
            "indices": [int(i) for i in self.indices],
            "points": [float(p) for p in self.points],
            "values": [float(v) for v in self.values],
            "params": _jsonable(self.params),
        }


@dataclass(frozen=True)
class Verdict:
    status: Status
    witness: Witness = field(default_factory=Witness)
    note: str = ""
    certified: bool = False
    parts: tuple = ()

    @property
    def holds(self) -> bool:
        return self.status is Status.HOLDS

    @property
    def fails(self) -> bool:
        return self.status is Status.FAILS

    def to_json(self) -> dict:
        return {"status": self.status.value, "certified": self.certified, "note": self.note}


def holds(witness: Witness, note: str = "", **kw) -> Verdict:
    return Verdict(Status.HOLDS, witness, note, **kw)


def fails(witness: Witness, note: str = "", **kw) -> Verdict:
    return Verdict(Status.FAILS, witness, note, **kw)


def inconclusive(note: str, witness: Witness | None = None, **kw) -> Verdict:
    return Verdict(Status.INCONCLUSIVE, witness or Witness(), note, **kw)


def combine(parts, note: str = "") -> Verdict:
    """All parts hold -> Holds; any part fails -> Fails (first one's witness);
    otherwise Inconclusive."""
    parts = tuple(parts)
    for p in parts:
        if p.fails:
            return Verdict(Status.FAILS, p.witness, note or p.note, p.certified, parts)
    if parts and all(p.holds for p in parts):
        return Verdict(Status.HOLDS, parts[0].witness, note or parts[0].note,
                       all(p.certified for p in parts), parts)
    pending = next((p for p in parts if not p.holds), None)
    reason = pending.note if pending is not None else "no parts"
    return Verdict(Status.INCONCLUSIVE, pending.witness if pending else Witness(),
                   note or reason, False, parts)


def worst(statuses) -> Status:
    return max(statuses, key=lambda s: s.severity, default=Status.HOLDS)


def _jsonable(obj: Any):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, enum.Enum):
        return obj.value
    if hasattr(obj, "item"):  # numpy scalar
        return obj.item()
    return obj
