"""Registry of black-box system (library) functions.

Each built-in is a small cyclic state machine driven once per invocation,
mirroring a PLC library FB. Time advances by ``CYCLE_MS`` per scan cycle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .behavior import TypeTag
from .model import FunctionDef, Param

CYCLE_MS = 10


def _wrap16(v: int) -> int:
    return ((v + 32768) & 0xFFFF) - 32768


def _wrap32(v: int) -> int:
    return ((v + 2**31) & 0xFFFFFFFF) - 2**31


def _delay_step(local: dict, args: dict) -> bool:
    # TON-style on-delay counted in scan cycles
    local["elapsed"] = _wrap32(local.get("elapsed", 0) + CYCLE_MS)
    return local["elapsed"] >= args["duration"]


def _wait_cycles_step(local: dict, args: dict) -> bool:
    local["count"] = _wrap16(local.get("count", 0) + 1)
    return local["count"] >= args["n"]


@dataclass(frozen=True)
class Builtin:
    signature: FunctionDef
    locals: tuple[tuple[str, TypeTag], ...]
    step: Callable[[dict, dict], bool]  # returns True when the call completes


REGISTRY: dict[str, Builtin] = {
    "delay": Builtin(
        FunctionDef("delay", (Param("duration", TypeTag.TIME),)),
        (("elapsed", TypeTag.TIME),),
        _delay_step,
    ),
    "waitCycles": Builtin(
        FunctionDef("waitCycles", (Param("n", TypeTag.INT),)),
        (("count", TypeTag.INT),),
        _wait_cycles_step,
    ),
}


def lookup(name: str) -> Builtin | None:
    return REGISTRY.get(name)

