from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

from scg_jit.syntax.tokens import Token
from scg_jit.syntax.tokens import TokenClass
from scg_jit.syntax.tree import MAX_DEPTH
from scg_jit.syntax.tree import CategoryTree
from scg_jit.syntax.tree import Node

logger = logging.getLogger(__name__)

STRUCTURAL = frozenset("(){};,")
STATEMENT_STOPS = frozenset({";", "}"})

MODIFIER_KEYWORDS = frozenset(
    """
    abstract const constexpr explicit extern final friend inline mutable native private
    protected public register static synchronized throws transient virtual volatile
    """.split()
)
TYPE_KEYWORDS = frozenset("auto boolean byte char double float int long short signed unsigned void".split())
CLASS_KEYWORDS = frozenset("class enum interface namespace struct union".split())
OPERATOR_KEYWORDS = frozenset("delete instanceof new sizeof throw".split())
CALLABLE_KEYWORDS = frozenset("sizeof super this".split())
CONSTRUCT_LABELS = {
    "if": "if",
    "else": "else",
    "for": "for",
    "while": "while",
    "do": "do",
    "switch": "switch",
    "case": "case",
    "default": "case",
    "return": "return",
}


def leaf_label(token: Token) -> str:
    """Category of a token that is represented as a leaf."""
    if token.token_class is TokenClass.IDENTIFIER:
        return "name"
    if token.token_class is TokenClass.LITERAL:
        return "literal"
    if token.token_class is TokenClass.KEYWORD:
        if token.text in CONSTRUCT_LABELS:
            return CONSTRUCT_LABELS[token.text]
        if token.text in MODIFIER_KEYWORDS:
            return "modifier"
        if token.text in OPERATOR_KEYWORDS:
            return "operator"
        return "name"
    return "operator"


def is_structural(token: Token) -> bool:
    return token.token_class is TokenClass.PUNCT and token.text in STRUCTURAL


@dataclass(frozen=True)
class _Declaration:
    kind: str  # "decl", "function", "constructor" or "class"
    modifiers_end: int
    type_end: int
    name: int | None


class _Tagger:
    """Best-effort recursive descent over a C-family token list.

    Every parse method receives the node it attaches to and that node's depth.
    Container nodes are never opened at depth MAX_DEPTH or deeper; past that point
    the remaining tokens of the construct are attached flat as leaves.
    """

    def __init__(self, tokens: Sequence[Token]) -> None:
        self.tokens = tokens
        self.pos = 0

    #############################################################################
    ### TOKEN STREAM
    #############################################################################

    def peek(self, offset: int = 0) -> Token | None:
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else None

    def at(self, *texts: str) -> bool:
        t = self.peek()
        return t is not None and t.token_class in (TokenClass.PUNCT, TokenClass.OPERATOR) and t.text in texts

    def at_keyword(self, *words: str) -> bool:
        t = self.peek()
        return t is not None and t.token_class is TokenClass.KEYWORD and t.text in words

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def emit(self, parent: Node) -> None:
        """Consume the current token, attaching it as a leaf unless it is structural."""
        t = self.advance()
        if not is_structural(t):
            parent.children.append(Node(leaf_label(t), token=t.text))

    def open(self, parent: Node, label: str, depth: int, token: str | None = None) -> Node | None:
        if depth + 1 >= MAX_DEPTH:
            if token is not None:
                parent.children.append(Node(label, token=token))
            return None
        node = Node(label, token=token)
        parent.children.append(node)
        return node

    #############################################################################
    ### FLAT FALLBACKS
    #############################################################################

    def flatten(self, parent: Node, stops: frozenset[str]) -> None:
        """Attach tokens as leaves until a stop token outside any bracket group."""
        balance = 0
        while self.peek() is not None:
            if balance == 0 and self.at(*stops):
                return
            if self.at("(", "{", "["):
                balance += 1
            elif self.at(")", "}", "]"):
                balance = max(0, balance - 1)
            self.emit(parent)

    def skip_group(self, parent: Node) -> None:
        """Attach one balanced bracket group flat, starting at its opening bracket."""
        balance = 0
        while self.peek() is not None:
            opening = self.at("(", "{", "[")
            closing = self.at(")", "}", "]")
            self.emit(parent)
            if opening:
                balance += 1
            elif closing:
                balance -= 1
                if balance <= 0:
                    return

    def flatten_statement(self, parent: Node) -> None:
        if self.at("{"):
            self.skip_group(parent)
            return
        self.flatten(parent, STATEMENT_STOPS)
        if self.at(";"):
            self.advance()

    #############################################################################
    ### STATEMENTS
    #############################################################################

    def unit(self) -> CategoryTree:
        root = Node("unit")
        self.statements(root, 0, closer=None)
        return CategoryTree(root)

    def statements(self, parent: Node, depth: int, closer: str | None) -> None:
        while self.peek() is not None:
            if self.at("}"):
                if closer == "}":
                    return
                self.advance()
                continue
            before = self.pos
            self.statement(parent, depth)
            if self.pos == before:
                self.emit(parent)

    def statement(self, parent: Node, depth: int) -> None:
        t = self.peek()
        if t is None or self.at("}"):
            return
        if depth + 1 >= MAX_DEPTH:
            self.flatten_statement(parent)
            return
        if self.at(";"):
            self.advance()
            return
        if self.at("{"):
            self.block(parent, depth)
            return

        if t.token_class is TokenClass.KEYWORD:
            handler = {
                "if": self.if_statement,
                "while": self.while_statement,
                "for": self.for_statement,
                "do": self.do_statement,
                "switch": self.switch_statement,
                "case": self.case_label,
                "default": self.case_label,
                "return": self.return_statement,
                "else": self.else_clause,
            }.get(t.text)
            if handler is not None:
                handler(parent, depth)
                return

        decl = self.match_declaration()
        if decl is not None:
            self.declaration(parent, depth, decl)
            return

        self.expression_statement(parent, depth)

    def block(self, parent: Node, depth: int) -> None:
        node = self.open(parent, "block", depth)
        if node is None:
            self.skip_group(parent)
            return
        self.advance()
        self.statements(node, depth + 1, closer="}")
        if self.at("}"):
            self.advance()

    def body(self, node: Node, depth: int) -> None:
        self.statement(node, depth)

    def condition(self, node: Node, depth: int) -> None:
        if not self.at("("):
            return
        cond = self.open(node, "condition", depth)
        if cond is None:
            self.skip_group(node)
            return
        self.advance()
        self.expression(cond, depth + 1, frozenset({")"}))
        if self.at(")"):
            self.advance()

    def if_statement(self, parent: Node, depth: int) -> None:
        node = self.open(parent, "if", depth, self.advance().text)
        if node is None:
            self.flatten_statement(parent)
            return
        self.condition(node, depth + 1)
        self.body(node, depth + 1)
        if self.at_keyword("else"):
            self.else_clause(node, depth + 1)

    def else_clause(self, parent: Node, depth: int) -> None:
        node = self.open(parent, "else", depth, self.advance().text)
        if node is None:
            self.flatten_statement(parent)
            return
        self.body(node, depth + 1)

    def while_statement(self, parent: Node, depth: int) -> None:
        node = self.open(parent, "while", depth, self.advance().text)
        if node is None:
            self.flatten_statement(parent)
            return
        self.condition(node, depth + 1)
        self.body(node, depth + 1)

    def for_statement(self, parent: Node, depth: int) -> None:
        node = self.open(parent, "for", depth, self.advance().text)
        if node is None:
            self.flatten_statement(parent)
            return
        if self.at("("):
            cond = self.open(node, "condition", depth + 1)
            if cond is None:
                self.skip_group(node)
            else:
                self.advance()
                while self.peek() is not None:
                    self.expression(cond, depth + 2, frozenset({")"}))
                    if self.at(";"):
                        self.advance()
                        continue
                    if self.at(")"):
                        self.advance()
                    break
        self.body(node, depth + 1)

    def do_statement(self, parent: Node, depth: int) -> None:
        node = self.open(parent, "do", depth, self.advance().text)
        if node is None:
            self.flatten_statement(parent)
            return
        self.body(node, depth + 1)
        if self.at_keyword("while"):
            loop = self.open(node, "while", depth + 1, self.advance().text)
            if loop is None:
                self.flatten(node, STATEMENT_STOPS)
            else:
                self.condition(loop, depth + 2)
        if self.at(";"):
            self.advance()

    def switch_statement(self, parent: Node, depth: int) -> None:
        node = self.open(parent, "switch", depth, self.advance().text)
        if node is None:
            self.flatten_statement(parent)
            return
        self.condition(node, depth + 1)
        self.body(node, depth + 1)

    def case_label(self, parent: Node, depth: int) -> None:
        keyword = self.advance().text
        node = self.open(parent, "case", depth, keyword)
        if node is None:
            self.flatten(parent, STATEMENT_STOPS | {":"})
        elif keyword == "case":
            self.expression(node, depth + 1, frozenset({":"}))
        if self.at(":"):
            self.emit(node if node is not None else parent)

    def return_statement(self, parent: Node, depth: int) -> None:
        node = self.open(parent, "return", depth, self.advance().text)
        if node is None:
            self.flatten_statement(parent)
            return
        self.expression(node, depth + 1, frozenset())
        if self.at(";"):
            self.advance()

    def expression_statement(self, parent: Node, depth: int) -> None:
        node = self.open(parent, "expr_stmt", depth)
        if node is None:
            self.flatten_statement(parent)
            return
        self.expression(node, depth + 1, frozenset())
        if not node.children:
            parent.children.pop()
        if self.at(";"):
            self.advance()

    #############################################################################
    ### DECLARATIONS
    #############################################################################

    def match_declaration(self) -> _Declaration | None:
        """Look ahead for `modifiers type name ...` or a constructor header; no tokens are consumed."""
        toks = self.tokens
        n = len(toks)
        j = self.pos

        def text(k: int) -> str | None:
            return toks[k].text if k < n else None

        def cls(k: int) -> TokenClass | None:
            return toks[k].token_class if k < n else None

        while j < n:
            if cls(j) is TokenClass.KEYWORD and text(j) in MODIFIER_KEYWORDS:
                j += 1
            elif text(j) == "@" and cls(j + 1) is TokenClass.IDENTIFIER:
                j += 2
                if text(j) == "(":
                    j = self._matching(j) + 1
            else:
                break
        modifiers_end = j

        if cls(j) is TokenClass.KEYWORD and text(j) in CLASS_KEYWORDS:
            has_name = cls(j + 1) is TokenClass.IDENTIFIER
            return _Declaration("class", modifiers_end, j + 1, j + 1 if has_name else None)

        if cls(j) is TokenClass.IDENTIFIER and text(j + 1) == "(":
            close = self._matching(j + 1)
            k = self._skip_qualifiers(close + 1)
            if text(k) == "{":
                return _Declaration("constructor", modifiers_end, modifiers_end, j)

        if cls(j) is TokenClass.KEYWORD and text(j) in TYPE_KEYWORDS:
            while cls(j) is TokenClass.KEYWORD and text(j) in TYPE_KEYWORDS:
                j += 1
        elif cls(j) is TokenClass.IDENTIFIER:
            j += 1
            while True:
                if text(j) in ("::", ".") and cls(j + 1) is TokenClass.IDENTIFIER:
                    j += 2
                elif text(j) == "<":
                    end = self._angle_group(j)
                    if end is None:
                        return None
                    j = end
                else:
                    break
        else:
            return None

        while j < n and (text(j) in ("*", "&", "&&", "...", "const") or (text(j) == "[" and text(j + 1) == "]")):
            j += 2 if text(j) == "[" else 1
        type_end = j

        if cls(j) is not TokenClass.IDENTIFIER:
            return None
        name = j
        follow = text(j + 1)
        if follow == "(":
            k = self._skip_qualifiers(self._matching(j + 1) + 1)
            if text(k) in ("{", ";"):
                return _Declaration("function", modifiers_end, type_end, name)
            return None
        if follow in ("=", ";", ",", "[", ":", None):
            return _Declaration("decl", modifiers_end, type_end, name)
        return None

    def _matching(self, open_index: int) -> int:
        """Index of the bracket closing the one at `open_index`, or the last token index."""
        pairs = {"(": ")", "[": "]", "{": "}"}
        balance = 0
        for k in range(open_index, len(self.tokens)):
            t = self.tokens[k]
            if t.token_class is not TokenClass.PUNCT:
                continue
            if t.text in pairs:
                balance += 1
            elif t.text in pairs.values():
                balance -= 1
                if balance == 0:
                    return k
        return len(self.tokens) - 1

    def _angle_group(self, start: int) -> int | None:
        """End index (exclusive) of a generic argument group `<...>`, None if it is not one."""
        depth = 0
        for k in range(start, len(self.tokens)):
            t = self.tokens[k]
            if t.text == "<":
                depth += 1
            elif t.text in (">", ">>", ">>>"):
                depth -= len(t.text)
                if depth <= 0:
                    return k + 1
            elif t.text not in (",", "?", ".", "::", "[", "]", "*", "&") and t.token_class not in (
                TokenClass.IDENTIFIER,
                TokenClass.KEYWORD,
            ):
                return None
        return None

    def _skip_qualifiers(self, k: int) -> int:
        toks = self.tokens
        while k < len(toks):
            t = toks[k]
            if t.text in ("{", ";"):
                return k
            if t.token_class in (TokenClass.IDENTIFIER, TokenClass.KEYWORD) or t.text == ",":
                k += 1
                continue
            return k
        return k

    def declaration(self, parent: Node, depth: int, decl: _Declaration) -> None:
        label = {"decl": "decl_stmt", "class": "decl_stmt"}.get(decl.kind, "function")
        node = self.open(parent, label, depth)
        if node is None:
            self.flatten_statement(parent)
            return

        while self.pos < decl.modifiers_end:
            if self.at("@"):
                self.emit(node)
                self.emit(node)
                if self.at("("):
                    self.arguments(node, depth + 1)
            else:
                self.emit(node)

        if decl.kind == "class":
            keyword = self.advance().text
            type_node = self.open(node, "type", depth + 1, keyword)
            if type_node is not None and decl.name is not None:
                self.emit(type_node)
            while self.peek() is not None and not self.at("{", ";", "}"):
                self.emit(node)
            if self.at("{"):
                self.block(node, depth + 1)
            elif self.at(";"):
                self.advance()
            return

        if self.pos < decl.type_end:
            type_node = self.open(node, "type", depth + 1) or node
            while self.pos < decl.type_end:
                self.emit(type_node)
        self.emit(node)

        if decl.kind in ("function", "constructor"):
            self.parameters(node, depth + 1)
            while self.peek() is not None and not self.at("{", ";", "}"):
                self.emit(node)
            if self.at("{"):
                self.block(node, depth + 1)
            elif self.at(";"):
                self.advance()
            return

        self.declarators(node, depth + 1)
        if self.at(";"):
            self.advance()

    def declarators(self, node: Node, depth: int) -> None:
        while self.peek() is not None:
            if self.at("["):
                self.emit(node)
                if not self.at("]"):
                    self.expression(node, depth, frozenset({"]"}))
                if self.at("]"):
                    self.emit(node)
            elif self.at("=", ":"):
                self.emit(node)
                self.expression(node, depth, frozenset({","}))
            elif self.at(","):
                self.advance()
                while self.at("*", "&"):
                    self.emit(node)
                t = self.peek()
                if t is not None and t.token_class is TokenClass.IDENTIFIER:
                    self.emit(node)
            else:
                return

    def parameters(self, node: Node, depth: int) -> None:
        if not self.at("("):
            return
        params = self.open(node, "parameter_list", depth)
        if params is None:
            self.skip_group(node)
            return
        self.advance()
        while self.peek() is not None:
            if self.at(")"):
                self.advance()
                return
            if self.at(","):
                self.advance()
                continue
            if self.at("{", ";", "}"):
                return
            self.parameter(params, depth + 1)

    def parameter(self, params: Node, depth: int) -> None:
        end = self.pos
        balance = 0
        while end < len(self.tokens):
            t = self.tokens[end]
            if t.text in ("(", "[", "<"):
                balance += 1
            elif t.text in (")", "]", ">") and balance > 0:
                balance -= 1
            elif balance == 0 and t.text in (",", ")", "=", "{", ";", "}"):
                break
            end += 1

        while self.pos < end and (self.at("@") or self.at_keyword(*MODIFIER_KEYWORDS)):
            annotation = self.at("@")
            self.emit(params)
            if annotation and self.pos < end:
                self.emit(params)

        last = self.tokens[end - 1] if end > self.pos else None
        name_index = end - 1 if last is not None and last.token_class is TokenClass.IDENTIFIER and end - self.pos >= 2 else None
        type_end = name_index if name_index is not None else end
        if self.pos < type_end:
            type_node = self.open(params, "type", depth) or params
            while self.pos < type_end:
                self.emit(type_node)
        if name_index is not None:
            self.emit(params)
        if self.at("="):
            self.emit(params)
            self.expression(params, depth, frozenset({",", ")"}))

    #############################################################################
    ### EXPRESSIONS
    #############################################################################

    def expression(self, parent: Node, depth: int, stops: frozenset[str]) -> None:
        stops = stops | STATEMENT_STOPS
        node = self.open(parent, "expr", depth)
        if node is None:
            self.flatten(parent, stops)
            return
        self.expression_items(node, depth + 1, stops)
        if not node.children:
            parent.children.pop()

    def expression_items(self, node: Node, depth: int, stops: frozenset[str]) -> None:
        while (t := self.peek()) is not None:
            if self.at(*stops):
                return
            if self.at("("):
                self.parenthesized(node, depth)
            elif self.at("{"):
                self.block(node, depth)
            elif self.at("["):
                self.emit(node)
                self.expression(node, depth, frozenset({"]"}))
                if self.at("]"):
                    self.emit(node)
            elif self.is_call(t):
                self.call(node, depth)
            else:
                self.emit(node)

    def is_call(self, t: Token) -> bool:
        nxt = self.peek(1)
        if nxt is None or nxt.text != "(" or nxt.token_class is not TokenClass.PUNCT:
            return False
        return t.token_class is TokenClass.IDENTIFIER or (
            t.token_class is TokenClass.KEYWORD and t.text in CALLABLE_KEYWORDS
        )

    def parenthesized(self, parent: Node, depth: int) -> None:
        node = self.open(parent, "expr", depth)
        if node is None:
            self.skip_group(parent)
            return
        self.advance()
        self.expression_items(node, depth + 1, frozenset({")"}) | STATEMENT_STOPS)
        if self.at(")"):
            self.advance()
        if not node.children:
            parent.children.pop()

    def call(self, parent: Node, depth: int) -> None:
        node = self.open(parent, "call", depth)
        if node is None:
            self.emit(parent)
            self.skip_group(parent)
            return
        self.emit(node)
        self.arguments(node, depth + 1)

    def arguments(self, parent: Node, depth: int) -> None:
        args = self.open(parent, "argument_list", depth)
        if args is None:
            self.skip_group(parent)
            return
        self.advance()
        stops = frozenset({",", ")"})
        while self.peek() is not None:
            if self.at(")"):
                self.advance()
                return
            if self.at(","):
                self.advance()
                continue
            if self.at(*STATEMENT_STOPS):
                return
            arg = self.open(args, "argument", depth + 1)
            if arg is None:
                self.flatten(args, stops | STATEMENT_STOPS)
                continue
            self.expression(arg, depth + 2, stops)
            if not arg.children:
                args.children.pop()


def build_category_tree(tokens: Sequence[Token]) -> CategoryTree:
    """Categorize a token list into a syntactic-category hierarchy.

    Never fails: unrecognized runs become `expr` nodes with `name`/`literal`/`operator`
    leaves, and unclosed brackets close implicitly at the end of the fragment.
    """
    return _Tagger(tokens).unit()
