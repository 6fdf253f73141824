"""Tokenizer for the OpenQASM 2.0 subset."""

from dataclasses import dataclass

from ..errors import InvalidCharacter, Location
from .ast import SourceProgram


@dataclass(frozen=True)
class Token:
    kind: str   # ID INT REAL STRING or a literal symbol kind
    value: object
    loc: Location


_SYMBOLS = {
    ";": "SEMI", ",": "COMMA", "(": "LPAREN", ")": "RPAREN",
    "[": "LBRACK", "]": "RBRACK", "{": "LBRACE", "}": "RBRACE",
    "+": "PLUS", "-": "MINUS", "*": "STAR", "/": "SLASH",
}


def tokenize(source: SourceProgram):
    """Token list with line/column spans; // comments stripped."""
    tokens = []
    line, col = 1, 1
    text = source.text
    i, n = 0, len(text)

    def loc():
        return Location(source.origin, line, col)

    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        start = loc()
        if text.startswith("->", i):
            tokens.append(Token("ARROW", "->", start))
            i += 2
            col += 2
            continue
        if text.startswith("==", i):
            tokens.append(Token("EQEQ", "==", start))
            i += 2
            col += 2
            continue
        if c in _SYMBOLS:
            tokens.append(Token(_SYMBOLS[c], c, start))
            i += 1
            col += 1
            continue
        if c == '"':
            j = i + 1
            while j < n and text[j] != '"':
                if text[j] == "\n":
                    raise InvalidCharacter(start, "unterminated string")
                j += 1
            if j >= n:
                raise InvalidCharacter(start, "unterminated string")
            tokens.append(Token("STRING", text[i + 1:j], start))
            col += j + 1 - i
            i = j + 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            seen_dot = False
            seen_exp = False
            while j < n:
                ch = text[j]
                if ch.isdigit():
                    j += 1
                elif ch == "." and not seen_dot and not seen_exp:
                    seen_dot = True
                    j += 1
                elif ch in "eE" and not seen_exp and j > i:
                    seen_exp = True
                    j += 1
                    if j < n and text[j] in "+-":
                        j += 1
                else:
                    break
            lexeme = text[i:j]
            if seen_dot or seen_exp:
                tokens.append(Token("REAL", float(lexeme), start))
            else:
                tokens.append(Token("INT", int(lexeme), start))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("ID", text[i:j], start))
            col += j - i
            i = j
            continue
        raise InvalidCharacter(start, f"invalid character {c!r} (0x{ord(c):02x})")
    return tokens
