"""Hand-rolled tokenizer for the supported Verilog subset.

Comments and whitespace are dropped; sized literals such as ``8'hDEAD_BEEF``
are lexed as single Number tokens. Positions are 1-based line/column.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import LexError

KEYWORDS = frozenset({
    "module", "endmodule", "input", "output", "inout",
    "wire", "reg", "parameter", "integer",
    "assign", "always", "begin", "end",
    "if", "else", "case", "endcase", "default",
    "posedge", "negedge", "or",
    # recognized so the parser can name them in UnsupportedConstruct errors
    "initial", "function", "endfunction", "task", "endtask",
    "generate", "endgenerate", "genvar", "for", "while", "repeat", "forever",
    "fork", "join", "defparam", "specify", "endspecify", "localparam",
    "casex", "casez", "signed", "real", "time", "event", "wait",
    "force", "release", "deassign", "tri", "supply0", "supply1",
})

# longest-first so e.g. "<=" wins over "<"
_OPERATORS = (
    "<<<", ">>>", "===", "!==",
    "<=", ">=", "==", "!=", "&&", "||", "<<", ">>", "~&", "~|", "~^", "^~",
    "+", "-", "*", "/", "%", "<", ">", "!", "~", "&", "|", "^", "=", "?",
)
_PUNCT = "()[]{},;:.#@"

_IDENT_START = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_$")
_IDENT_CONT = _IDENT_START | frozenset("0123456789")
_BASE_DIGITS = {
    "h": "0123456789abcdefABCDEFxXzZ?_",
    "d": "0123456789_",
    "o": "01234567xXzZ?_",
    "b": "01xXzZ?_",
}


@dataclass
class Token:
    kind: str  # Keyword | Identifier | Number | Operator | Punct | String
    text: str
    line: int
    col: int

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.col})"


def tokenize(source: str) -> list[Token]:
    tokens = []
    i = 0
    line = 1
    col = 1
    n = len(source)

    def advance(count):
        nonlocal i, line, col
        for _ in range(count):
            if source[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = source[i]
        if ch in " \t\r\n":
            advance(1)
            continue
        if source.startswith("//", i):
            end = source.find("\n", i)
            advance((end - i) if end != -1 else (n - i))
            continue
        if source.startswith("/*", i):
            end = source.find("*/", i + 2)
            if end == -1:
                raise LexError("unterminated block comment", line, col)
            advance(end + 2 - i)
            continue
        start_line, start_col = line, col
        if ch == '"':
            j = i + 1
            while j < n and source[j] != '"':
                if source[j] == "\n":
                    raise LexError("unterminated string", start_line, start_col)
                j += 1
            if j >= n:
                raise LexError("unterminated string", start_line, start_col)
            tokens.append(Token("String", source[i:j + 1], start_line, start_col))
            advance(j + 1 - i)
            continue
        if ch in _IDENT_START:
            j = i + 1
            while j < n and source[j] in _IDENT_CONT:
                j += 1
            text = source[i:j]
            kind = "Keyword" if text in KEYWORDS else "Identifier"
            tokens.append(Token(kind, text, start_line, start_col))
            advance(j - i)
            continue
        if ch.isdigit() or ch == "'":
            text, length = _lex_number(source, i, start_line, start_col)
            tokens.append(Token("Number", text, start_line, start_col))
            advance(length)
            continue
        matched = None
        for op in _OPERATORS:
            if source.startswith(op, i):
                matched = op
                break
        if matched:
            tokens.append(Token("Operator", matched, start_line, start_col))
            advance(len(matched))
            continue
        if ch in _PUNCT:
            tokens.append(Token("Punct", ch, start_line, start_col))
            advance(1)
            continue
        if ch == "`":
            raise LexError("preprocessor directives are not supported", start_line, start_col)
        raise LexError(f"illegal character {ch!r}", start_line, start_col)
    return tokens


def _lex_number(source: str, i: int, line: int, col: int):
    """Lex a decimal, or (optionally sized) based literal, at position i."""
    n = len(source)
    j = i
    while j < n and (source[j].isdigit() or source[j] == "_"):
        j += 1
    if j < n and source[j] == "'":
        k = j + 1
        if k < n and source[k] in "sS":  # signed base marker
            k += 1
        if k >= n or source[k].lower() not in "hdob":
            raise LexError("malformed based literal", line, col)
        base = source[k].lower()
        k += 1
        digits_start = k
        allowed = _BASE_DIGITS[base]
        while k < n and source[k] in allowed:
            k += 1
        if k == digits_start:
            raise LexError(f"based literal has no digits", line, col)
        return source[i:k], k - i
    if j == i:
        raise LexError("malformed number", line, col)
    return source[i:j], j - i


def parse_literal(text: str):
    """Split a Number token into (width_bits, base, digits, value).

    ``value`` is an int for literals that fit in 64 bits, else None; the
    digit string and base are always kept so wide magic constants remain
    inspectable.
    """
    if "'" not in text:
        digits = text.replace("_", "")
        return None, "d", digits, int(digits)
    size_part, rest = text.split("'", 1)
    if rest and rest[0] in "sS":
        rest = rest[1:]
    base = rest[0].lower()
    digits = rest[1:].replace("_", "")
    width = int(size_part.replace("_", "")) if size_part else None
    value = None
    if not any(c in "xXzZ?" for c in digits):
        radix = {"h": 16, "d": 10, "o": 8, "b": 2}[base]
        as_int = int(digits, radix)
        if as_int < (1 << 64):
            value = as_int
    return width, base, digits, value


def literal_digit_count(text: str) -> int:
    """Number of significant digits in a literal (underscores excluded)."""
    if "'" in text:
        _, rest = text.split("'", 1)
        if rest and rest[0] in "sS":
            rest = rest[1:]
        return len(rest[1:].replace("_", ""))
    return len(text.replace("_", ""))
