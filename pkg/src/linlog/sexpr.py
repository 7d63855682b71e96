"""Minimal s-expression reader and writer.

Atoms are bare words; strings are double-quoted with backslash escapes.
Parsed lists come back as Python lists, strings as `Str` so that callers can
tell a quoted string from an atom.
"""

from __future__ import annotations

from typing import Union


class SexprError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class Str(str):
    pass


Sexpr = Union[str, Str, list]


def quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def read_all(text: str) -> list[Sexpr]:
    out: list[Sexpr] = []
    stack: list[list] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c == "(":
            stack.append([])
            i += 1
        elif c == ")":
            if not stack:
                raise SexprError("unbalanced ')'", i)
            done = stack.pop()
            (stack[-1] if stack else out).append(done)
            i += 1
        elif c == '"':
            j = i + 1
            buf = []
            while True:
                if j >= n:
                    raise SexprError("unterminated string", i)
                if text[j] == "\\" and j + 1 < n:
                    buf.append(text[j + 1])
                    j += 2
                elif text[j] == '"':
                    break
                else:
                    buf.append(text[j])
                    j += 1
            (stack[-1] if stack else out).append(Str("".join(buf)))
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in '()";':
                j += 1
            (stack[-1] if stack else out).append(text[i:j])
            i = j
    if stack:
        raise SexprError("unbalanced '('", n)
    return out


def read_one(text: str) -> Sexpr:
    items = read_all(text)
    if len(items) != 1:
        raise SexprError(f"expected one expression, found {len(items)}", 0)
    return items[0]
