"""Decoder/rule pattern dialect and its translation to Python regexes.

The dialect is a small closed subset:

    \\.   any single character
    \\w   word character          \\d   digit          \\s   whitespace
    ( )   capture group
    * + ? quantifier, only when directly following one of the tokens above

Everything else matches itself literally. Unknown escapes are rejected at
parse time rather than silently matching something unexpected.
"""

from __future__ import annotations

import re
from functools import lru_cache

from soccore.errors import SocError


class PatternError(SocError):
    """The pattern is not valid in the dialect."""


class UnsupportedToken(PatternError):
    def __init__(self, token: str):
        super().__init__(f"unsupported pattern token {token!r}")
        self.token = token


_TOKEN_MAP = {".": ".", "w": r"\w", "d": r"\d", "s": r"\s"}
_QUANTIFIERS = "*+?"


def pattern_translate(pattern: str) -> str:
    """Translate a dialect pattern into Python regex source."""
    out: list[str] = []
    depth = 0
    i = 0
    while i < len(pattern):
        ch = pattern[i]
        if ch == "\\":
            if i + 1 >= len(pattern):
                raise UnsupportedToken("\\")
            escaped = pattern[i + 1]
            if escaped not in _TOKEN_MAP:
                raise UnsupportedToken("\\" + escaped)
            token = _TOKEN_MAP[escaped]
            i += 2
            if i < len(pattern) and pattern[i] in _QUANTIFIERS:
                token += pattern[i]
                i += 1
            out.append(token)
        elif ch == "(":
            depth += 1
            out.append("(")
            i += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise PatternError("unbalanced ')' in pattern")
            out.append(")")
            i += 1
        else:
            out.append(re.escape(ch))
            i += 1
    if depth != 0:
        raise PatternError("unbalanced '(' in pattern")
    return "".join(out)


@lru_cache(maxsize=4096)
def compile_pattern(pattern: str) -> re.Pattern:
    return re.compile(pattern_translate(pattern))
