"""Model names and paths to IEC 61131-3 identifiers.

ST identifiers are case-insensitive, may not contain two consecutive
underscores and may not end with one. ``Mangler`` hands out one identifier
per logical key and disambiguates clashes with ``_1``, ``_2``, ...
"""

from __future__ import annotations

import re

IEC_KEYWORDS = frozenset(
    """
    ABS ACOS ACTION ADD AND ANY ARRAY ASIN AT ATAN BOOL BY BYTE CASE CONFIGURATION
    CONSTANT COS DATE DATE_AND_TIME DINT DIV DO DT DWORD ELSE ELSIF END_ACTION END_CASE
    END_CONFIGURATION END_FOR END_FUNCTION END_FUNCTION_BLOCK END_IF END_INTERFACE
    END_METHOD END_PROGRAM END_REPEAT END_RESOURCE END_STEP END_STRUCT END_TRANSITION
    END_TYPE END_VAR END_WHILE EN ENO EQ EXIT EXP EXTENDS F_EDGE FALSE FINAL FOR FROM
    FUNCTION FUNCTION_BLOCK GE GT IF IMPLEMENTS INITIAL_STEP INT INTERFACE INTERNAL
    LE LINT LN LOG LREAL LT LWORD METHOD MOD MUL NE NOT OF ON OR OVERRIDE PRIVATE
    PROGRAM PROTECTED PUBLIC R_EDGE READ_ONLY READ_WRITE REAL REPEAT RESOURCE RETAIN
    RETURN SEL SIN SINT SQRT STEP STRING STRUCT SUB SUPER TAN TASK THEN THIS TIME TO
    TOD TIME_OF_DAY TRANSITION TRUE TYPE UDINT UINT ULINT UNTIL USINT VAR VAR_ACCESS
    VAR_CONFIG VAR_EXTERNAL VAR_GLOBAL VAR_INPUT VAR_IN_OUT VAR_OUTPUT VAR_TEMP WHILE
    WITH WORD WSTRING XOR
    """.split()
)

_UNDERSCORES = re.compile(r"_+")


def mangle_name(name: str) -> str:
    """Context-free mangling of a model identifier or dotted path."""
    out = _UNDERSCORES.sub("_", name.replace(".", "_")).rstrip("_")
    if not out:
        out = "x"
    if out[0].isdigit():
        out = "n" + out
    if out.upper() in IEC_KEYWORDS:
        out += "_v"
    return out


class Mangler:
    """Injective, case-insensitive allocation of identifiers."""

    def __init__(self, reserved=()):
        self.names: dict = {}
        self.taken: set[str] = set()
        for r in reserved:
            self.request(("reserved", r), r)

    def copy(self) -> "Mangler":
        c = Mangler()
        c.names = dict(self.names)
        c.taken = set(self.taken)
        return c

    def request(self, key, preferred: str) -> str:
        got = self.names.get(key)
        if got is not None:
            return got
        base = mangle_name(preferred)
        cand, i = base, 0
        while cand.lower() in self.taken:
            i += 1
            cand = f"{base}_{i}"
        self.names[key] = cand
        self.taken.add(cand.lower())
        return cand

    def __getitem__(self, key) -> str:
        return self.names[key]
