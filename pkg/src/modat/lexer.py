"""Tokenizer shared by the model and scenario parsers."""

from __future__ import annotations

from dataclasses import dataclass

from .diagnostics import SourceSpan

KEYWORDS = frozenset(
    """
    block kind component composite input output variant of part attr function
    override lanes node call set entry exit start end on completion when policy
    resume restart continue root system do and or not TRUE FALSE BOOL INT REAL TIME
    """.split()
)

# Longest first so that ":=" wins over ":".
PUNCT = ("->", ":=", "==", "!=", "<>", "<=", ">=", "{", "}", "(", ")", ":", ",", ".",
         "<", ">", "+", "-", "*", "=")


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT KW INT REAL TIME PUNCT EOF
    text: str
    line: int
    col: int
    end_line: int
    end_col: int
    value: object = None

    def span(self, file: str) -> SourceSpan:
        return SourceSpan(file, self.line, self.col, self.end_line, self.end_col)

    def is_(self, kind: str, text: str | None = None) -> bool:
        return self.kind == kind and (text is None or self.text == text)

    def __str__(self) -> str:
        if self.kind == "EOF":
            return "end of input"
        return repr(self.text)


class LexError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col


def _is_ident_start(ch: str) -> bool:
    return ch == "_" or ("a" <= ch <= "z") or ("A" <= ch <= "Z")


def _is_ident_char(ch: str) -> bool:
    return _is_ident_start(ch) or ch.isdigit() and ch.isascii()


def tokenize(source: str, keywords=KEYWORDS) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r\f":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if ch == "T" and source.startswith("T#", i):
            j = i + 2
            while j < n and source[j].isascii() and source[j].isdigit():
                j += 1
            digits = source[i + 2:j]
            unit_end = j
            while unit_end < n and source[unit_end].isascii() and source[unit_end].isalpha():
                unit_end += 1
            unit = source[j:unit_end]
            if not digits or unit not in ("ms", "s"):
                raise LexError("malformed TIME literal (expected T#<n>ms or T#<n>s)", line, col)
            value = int(digits) * (1000 if unit == "s" else 1)
            text = source[i:unit_end]
            col += len(text)
            tokens.append(Token("TIME", text, start_line, start_col, line, col, value))
            i = unit_end
            continue
        if _is_ident_start(ch):
            j = i + 1
            while j < n and _is_ident_char(source[j]):
                j += 1
            text = source[i:j]
            col += len(text)
            kind = "KW" if text in keywords else "IDENT"
            tokens.append(Token(kind, text, start_line, start_col, line, col))
            i = j
            continue
        if ch.isascii() and ch.isdigit():
            j = i
            while j < n and source[j].isascii() and source[j].isdigit():
                j += 1
            kind = "INT"
            if j + 1 < n and source[j] == "." and source[j + 1].isascii() and source[j + 1].isdigit():
                kind = "REAL"
                j += 1
                while j < n and source[j].isascii() and source[j].isdigit():
                    j += 1
                if j < n and source[j] in "eE":
                    k = j + 1
                    if k < n and source[k] in "+-":
                        k += 1
                    if k < n and source[k].isascii() and source[k].isdigit():
                        while k < n and source[k].isascii() and source[k].isdigit():
                            k += 1
                        j = k
                    else:
                        raise LexError("malformed exponent in REAL literal", line, col + (k - i))
            if j < n and _is_ident_start(source[j]):
                raise LexError("identifier cannot start with a digit", line, col)
            text = source[i:j]
            value = float(text) if kind == "REAL" else int(text)
            col += len(text)
            tokens.append(Token(kind, text, start_line, start_col, line, col, value))
            i = j
            continue
        for p in PUNCT:
            if source.startswith(p, i):
                col += len(p)
                tokens.append(Token("PUNCT", p, start_line, start_col, line, col))
                i += len(p)
                break
        else:
            shown = ch if ch.isprintable() else f"U+{ord(ch):04X}"
            raise LexError(f"unexpected character {shown!r}", line, col)
    tokens.append(Token("EOF", "", line, col, line, col))
    return tokens


def decode_source(text) -> str:
    """Accept str or UTF-8 bytes; normalise CRLF to LF."""
    if isinstance(text, (bytes, bytearray)):
        text = bytes(text).decode("utf-8")
    if text.startswith("﻿"):
        text = text[1:]
    return text.replace("\r\n", "\n")
