from __future__ import annotations

import enum
import logging
import re
from typing import NamedTuple

logger = logging.getLogger(__name__)


class TokenClass(str, enum.Enum):
    IDENTIFIER = "identifier"
    KEYWORD = "keyword"
    LITERAL = "literal"
    OPERATOR = "operator"
    PUNCT = "punct"


class Token(NamedTuple):
    text: str
    token_class: TokenClass


# C++ and Java share one keyword table; the tagger decides what each keyword becomes.
KEYWORDS = frozenset(
    """
    abstract assert auto boolean break byte case catch char class const constexpr continue
    default delete do double else enum explicit extends extern final finally float for friend
    goto if implements import inline instanceof int interface long mutable namespace native new
    operator package private protected public register return short signed sizeof static
    struct super switch synchronized template this throw throws transient try typedef typename
    union unsigned using virtual void volatile while
    """.split()
)
LITERAL_WORDS = frozenset(["true", "false", "null", "nullptr", "NULL"])

OPERATORS = sorted(
    """
    >>>= <<= >>= >>> ... ->* :: -> ++ -- && || == != <= >= += -= *= /= %= &= |= ^= << >>
    + - * / % = < > ! ~ & | ^ ? : .
    """.split(),
    key=len,
    reverse=True,
)
PUNCTUATION = "(){}[];,"

_TOKEN_PATTERN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*|/\*.*?(?:\*/|\Z))
  | (?P<string>"(?:\\.|[^"\\\n])*(?:"|$)|'(?:\\.|[^'\\\n])*(?:'|$))
  | (?P<number>(?:0[xX][0-9a-fA-F_]+|(?:\d[\d_]*\.?[\d_]*|\.\d[\d_]*)(?:[eE][+-]?\d+)?)[uUlLfFdD]*)
  | (?P<word>[A-Za-z_$][A-Za-z0-9_$]*)
  | (?P<operator>"""
    + "|".join(re.escape(op) for op in OPERATORS)
    + r""")
  | (?P<punct>.)
    """,
    re.VERBOSE | re.DOTALL | re.MULTILINE,
)


def tokenize(fragment: str) -> list[Token]:
    """Split a (possibly broken) C-family code fragment into classified lexemes.

    Comments and string/char literals become single `literal` tokens, unterminated
    ones end at the end of the line (strings) or of the fragment (block comments).
    Characters outside the lexical grammar become `punct` tokens.
    """
    tokens: list[Token] = []
    for m in _TOKEN_PATTERN.finditer(fragment):
        kind = m.lastgroup
        text = m.group()
        if kind == "ws":
            continue
        if kind in ("comment", "string", "number"):
            tokens.append(Token(text, TokenClass.LITERAL))
        elif kind == "word":
            if text in LITERAL_WORDS:
                tokens.append(Token(text, TokenClass.LITERAL))
            elif text in KEYWORDS:
                tokens.append(Token(text, TokenClass.KEYWORD))
            else:
                tokens.append(Token(text, TokenClass.IDENTIFIER))
        elif kind == "operator":
            tokens.append(Token(text, TokenClass.OPERATOR))
        else:
            tokens.append(Token(text, TokenClass.PUNCT))
    return tokens
