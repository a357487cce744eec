"""S-expression reader and writer for library and story files.

The concrete syntax mirrors the notation used for plan facts, e.g.
``(= (rope-of k1) r2)``. Atoms are symbols, double-quoted strings and
numbers (scientific notation allowed). ``;`` starts a comment running to the
end of the line.

Every node carries its 1-based ``line``/``column``; positions are ignored by
equality so parse -> serialize -> parse compares equal.
"""

import logging
import math
import re
from dataclasses import dataclass, field
from typing import Iterator, List, Tuple, Union

from .errors import SexprSyntaxError


logger = logging.getLogger(__name__)

_NUMBER_RE = re.compile(r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?")
_DELIMITERS = '();"'
_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}


@dataclass(frozen=True)
class Symbol:
    name: str
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class String:
    value: str
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Number:
    value: float
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class SList:
    items: Tuple["SExpr", ...]
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __getitem__(self, index):
        return self.items[index]

    @property
    def head(self):
        """Name of the leading symbol, or None."""
        if self.items and isinstance(self.items[0], Symbol):
            return self.items[0].name
        return None


SExpr = Union[Symbol, String, Number, SList]


def _tokenize(text: str) -> Iterator[Tuple[str, object, int, int]]:
    """Yield (kind, value, line, column) tokens.

    kind is one of "(", ")", "string", "number", "symbol".
    """
    i, n = 0, len(text)
    line, line_start = 1, 0

    while i < n:
        c = text[i]
        column = i - line_start + 1

        if c == "\n":
            line += 1
            line_start = i + 1
            i += 1
        elif c.isspace():
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c in "()":
            yield c, c, line, column
            i += 1
        elif c == '"':
            start_line, start_column = line, column
            i += 1
            buf = []
            while True:
                if i >= n:
                    raise SexprSyntaxError("unterminated string", start_line, start_column)
                ch = text[i]
                if ch == '"':
                    i += 1
                    break
                if ch == "\\":
                    if i + 1 >= n:
                        raise SexprSyntaxError("unterminated string", start_line, start_column)
                    buf.append(_ESCAPES.get(text[i + 1], text[i + 1]))
                    i += 2
                    continue
                if ch == "\n":
                    line += 1
                    line_start = i + 1
                buf.append(ch)
                i += 1
            yield "string", "".join(buf), start_line, start_column
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in _DELIMITERS:
                j += 1
            word = text[i:j]
            if _NUMBER_RE.fullmatch(word):
                value = float(word)
                if not math.isfinite(value):
                    raise SexprSyntaxError(f"number out of range: {word}", line, column)
                yield "number", value, line, column
            else:
                yield "symbol", word, line, column
            i = j


def parse_all(text: str) -> List[SExpr]:
    """Parse every top-level form in text."""
    stack: List[Tuple[list, int, int]] = []
    forms: List[SExpr] = []

    for kind, value, line, column in _tokenize(text):
        if kind == "(":
            stack.append(([], line, column))
            continue
        if kind == ")":
            if not stack:
                raise SexprSyntaxError("unbalanced ')'", line, column)
            items, open_line, open_column = stack.pop()
            node = SList(tuple(items), open_line, open_column)
        elif kind == "string":
            node = String(value, line, column)
        elif kind == "number":
            node = Number(value, line, column)
        else:
            node = Symbol(value, line, column)

        if stack:
            stack[-1][0].append(node)
        else:
            forms.append(node)

    if stack:
        _, line, column = stack[-1]
        raise SexprSyntaxError("unbalanced '(': missing ')'", line, column)

    return forms


def parse_sexpr(text: str) -> SExpr:
    """Parse text holding exactly one form.

    Raises:
        SexprSyntaxError: on empty input, trailing forms, unbalanced
            parentheses or unterminated strings.
    """
    forms = parse_all(text)
    if not forms:
        raise SexprSyntaxError("empty input", 1, 1)
    if len(forms) > 1:
        extra = forms[1]
        raise SexprSyntaxError("expected a single top-level form", extra.line, extra.column)
    return forms[0]


def _quote(value: str) -> str:
    escaped = value.replace("\\", "\\\\").replace('"', '\\"')
    return '"' + escaped.replace("\n", "\\n").replace("\t", "\\t") + '"'


def serialize(expr: SExpr) -> str:
    """Canonical text for a tree: single spaces, repr() for numbers."""
    if isinstance(expr, SList):
        return "(" + " ".join(serialize(item) for item in expr.items) + ")"
    if isinstance(expr, String):
        return _quote(expr.value)
    if isinstance(expr, Number):
        return repr(float(expr.value))
    if isinstance(expr, Symbol):
        return expr.name
    raise TypeError(f"not an s-expression: {expr!r}")
