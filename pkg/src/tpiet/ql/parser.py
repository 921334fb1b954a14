"""Recursive-descent parser for TPiet-QL."""
from __future__ import annotations

from typing import Optional

from ..errors import QuerySyntaxError
from . import ast
from .lexer import BRACKET, DATE, EOF, IDENT, KW, NUMBER, OP, PUNCT, STRING, Token, tokenize

__all__ = ["parse", "parse_tokens"]

_CMP_OPS = ("=", "<>", "<", ">", "<=", ">=")


def parse(text: str) -> ast.Query:
    """Parse a GIS or CUBE query."""
    return parse_tokens(tokenize(text))


def parse_tokens(tokens: list[Token]) -> ast.Query:
    return _Parser(tokens).query()


def _describe(tok: Token) -> str:
    if tok.kind == EOF:
        return "end of input"
    return repr(tok.text or str(tok.value))


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0

    # -- token helpers ----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Optional[Token] = None) -> QuerySyntaxError:
        tok = tok or self.tok
        return QuerySyntaxError(msg, tok.line, tok.column)

    def expected(self, what: str) -> QuerySyntaxError:
        return self.error(f"expected {what}, found {_describe(self.tok)}")

    def is_kw(self, *words: str) -> bool:
        return self.tok.kind == KW and self.tok.value in words

    def is_punct(self, ch: str) -> bool:
        return self.tok.kind == PUNCT and self.tok.value == ch

    def advance(self) -> Token:
        t = self.tok
        if t.kind != EOF:
            self.i += 1
        return t

    def kw(self, word: str) -> Token:
        if not self.is_kw(word):
            raise self.expected(word)
        return self.advance()

    def punct(self, ch: str) -> Token:
        if not self.is_punct(ch):
            raise self.expected(repr(ch))
        return self.advance()

    def ident(self, what: str = "identifier") -> str:
        if self.tok.kind != IDENT:
            raise self.expected(what)
        return self.advance().value

    # -- entry ------------------------------------------------------------

    def query(self) -> ast.Query:
        if not self.is_kw("SELECT"):
            raise self.expected("SELECT")
        nxt = self.peek()
        if nxt.kind == KW and nxt.value == "GIS":
            q = self.gis_query(nested=False)
        elif nxt.kind == KW and nxt.value == "CUBE":
            q = self.cube_query(nested=False)
        else:
            self.advance()
            raise self.expected("GIS or CUBE")
        if self.is_punct(";"):
            self.advance()
        if self.tok.kind != EOF:
            raise self.expected("end of query")
        return q

    # -- GIS --------------------------------------------------------------

    def gis_query(self, nested: bool) -> ast.GisQuery:
        self.kw("SELECT")
        self.kw("GIS")
        modifier = None
        while self.is_kw("SNAPSHOT", "CURRENT"):
            tok = self.advance()
            if modifier is not None:
                raise self.error("SNAPSHOT and CURRENT cannot be combined", tok)
            modifier = tok.value
        projection = [self.attr_ref()]
        while self.is_punct(","):
            self.advance()
            projection.append(self.attr_ref())
        self.kw("FROM")
        overlap = False
        if self.is_kw("OVERLAP"):
            self.advance()
            overlap = True
        sources = [self.source()]
        while self.is_punct(","):
            self.advance()
            sources.append(self.source())
        seen = set()
        for s, tok in sources:
            if s.alias in seen:
                raise self.error(f"duplicate alias {s.alias!r}", tok)
            seen.add(s.alias)
        where = None
        if self.is_kw("WHERE"):
            self.advance()
            where = self.condition(nested)
        return ast.GisQuery(
            projection=tuple(projection),
            sources=tuple(s for s, _ in sources),
            where=where,
            modifier=modifier,
            overlap=overlap,
        )

    def source(self):
        layer = self.ident("layer name")
        tok = self.tok
        alias = self.ident("alias")
        return ast.Source(layer, alias), tok

    def attr_ref(self) -> ast.AttrRef:
        alias = self.ident("alias")
        if self.is_punct("."):
            self.advance()
            return ast.AttrRef(alias, self.ident("attribute name"))
        return ast.AttrRef(alias)

    def condition(self, nested: bool):
        items = [self.conjunction(nested)]
        while self.is_kw("OR"):
            self.advance()
            items.append(self.conjunction(nested))
        return items[0] if len(items) == 1 else ast.Or(tuple(items))

    def conjunction(self, nested: bool):
        items = [self.negation(nested)]
        while self.is_kw("AND"):
            self.advance()
            items.append(self.negation(nested))
        return items[0] if len(items) == 1 else ast.And(tuple(items))

    def negation(self, nested: bool):
        if self.is_kw("NOT"):
            self.advance()
            return ast.Not(self.negation(nested))
        if self.is_punct("("):
            self.advance()
            c = self.condition(nested)
            self.punct(")")
            return c
        return self.atom(nested)

    def atom(self, nested: bool):
        tok = self.tok
        if self.is_kw("TRUE", "FALSE"):
            self.advance()
            return ast.Bool(tok.value == "TRUE")
        if tok.kind == IDENT and self.peek().kind == PUNCT and self.peek().value == "(":
            name = tok.value.lower()
            if name in ast.SPATIAL_PREDICATE_NAMES:
                return self.spatial_pred(name)
            if name in ast.INSTANT_PREDICATE_NAMES or name in ast.INTERVAL_PREDICATE_NAMES:
                return self.temporal_pred(name)
            if name not in ast.FUNCTION_NAMES:
                raise self.error(f"unknown predicate or function {tok.value!r}")
        if tok.kind == IDENT and not (self.peek().kind == PUNCT and self.peek().value == "("):
            # attr_ref IN (...) or a comparison starting with an attribute
            save = self.i
            ref = self.attr_ref()
            if self.is_kw("IN"):
                in_tok = self.advance()
                if nested:
                    raise self.error("subqueries cannot be nested more than one level deep", in_tok)
                if ref.attr is None:
                    ref = ast.AttrRef(ref.alias, "id")
                self.punct("(")
                if not (self.is_kw("SELECT") and self.peek().kind == KW and self.peek().value == "CUBE"):
                    raise self.expected("SELECT CUBE subquery")
                cube = self.cube_query(nested=True)
                self.punct(")")
                if self.is_kw("SLICE"):
                    slice_tok = self.advance()
                    if cube.slice is not None:
                        raise self.error("cube subquery already has a SLICE", slice_tok)
                    cube = ast.CubeQuery(cube.select, cube.cube, cube.slicers, cube.axis, self.member_path())
                return ast.InCube(ref, cube)
            self.i = save
        left = self.expr()
        if self.tok.kind != OP:
            raise self.expected("comparison operator")
        op = self.advance().value
        right = self.expr()
        return ast.Compare(op, left, right)

    def spatial_pred(self, name: str) -> ast.SpatialPred:
        self.advance()
        self.punct("(")
        args = [self.attr_ref()]
        while self.is_punct(","):
            self.advance()
            args.append(self.attr_ref())
        self.punct(")")
        return ast.SpatialPred(name, tuple(args))

    def temporal_pred(self, name: str) -> ast.TemporalPred:
        self.advance()
        self.punct("(")
        alias = self.ident("alias")
        self.punct(",")
        if name in ast.INTERVAL_PREDICATE_NAMES:
            self.punct("[")
            start = self.instant()
            self.punct(",")
            end = self.instant()
            self.punct("]")
            arg = ast.IntervalLit(start, end)
        else:
            arg = self.instant()
        self.punct(")")
        return ast.TemporalPred(name, alias, arg)

    def instant(self):
        tok = self.tok
        if tok.kind == NUMBER:
            if not isinstance(tok.value, int):
                raise self.error("instants must be integer ticks")
            self.advance()
            return ast.Number(tok.value)
        if tok.kind == DATE:
            self.advance()
            m, d, y = tok.value
            return ast.DateLit(m, d, y)
        if self.is_kw("NOW"):
            self.advance()
            return ast.NowLit()
        raise self.expected("instant (tick, date or Now)")

    def expr(self):
        tok = self.tok
        if tok.kind == NUMBER:
            self.advance()
            return ast.Number(tok.value)
        if self.is_punct("-") and self.peek().kind == NUMBER:
            self.advance()
            return ast.Number(-self.advance().value)
        if tok.kind == STRING:
            self.advance()
            return ast.String(tok.value)
        if tok.kind == IDENT:
            if self.peek().kind == PUNCT and self.peek().value == "(":
                name = tok.value.lower()
                if name not in ast.FUNCTION_NAMES:
                    raise self.error(f"unknown function {tok.value!r}")
                self.advance()
                self.punct("(")
                args = [self.attr_ref()]
                while self.is_punct(","):
                    self.advance()
                    args.append(self.attr_ref())
                self.punct(")")
                return ast.Func(name, tuple(args))
            return self.attr_ref()
        raise self.expected("expression")

    # -- CUBE -------------------------------------------------------------

    def cube_query(self, nested: bool) -> ast.CubeQuery:
        self.kw("SELECT")
        self.kw("CUBE")
        axis = None
        if self.tok.kind == IDENT and self.tok.value.lower() == "filter" and self.peek().value == "(":
            select = self.filter_select()
        else:
            items = [self.member_path()]
            while self.is_punct(","):
                self.advance()
                items.append(self.member_path())
            if self.is_kw("ON"):
                self.advance()
                if not self.is_kw("ROWS", "COLUMNS"):
                    raise self.expected("ROWS or COLUMNS")
                axis = self.advance().value
            select = tuple(items)
        self.kw("FROM")
        if self.tok.kind in (BRACKET, IDENT):
            cube = self.advance().value
        else:
            raise self.expected("cube name")
        slicers = []
        if self.is_kw("WHERE"):
            self.advance()
            slicers.append(self.slicer(nested))
            while self.is_kw("AND"):
                self.advance()
                slicers.append(self.slicer(nested))
        slice_ = None
        if self.is_kw("SLICE"):
            self.advance()
            slice_ = self.member_path()
        return ast.CubeQuery(select, cube, tuple(slicers), axis, slice_)

    def filter_select(self) -> ast.FilterSelect:
        self.advance()
        self.punct("(")
        start = self.tok
        path = self.member_path()
        if len(path.parts) < 2 or self._last_plain.lower() != "members":
            raise self.error("filter expects <level>.Members as first argument", start)
        level = ast.MemberPath(path.parts[:-1])
        self.punct(",")
        measure = self.member_path()
        if self.tok.kind != OP:
            raise self.expected("comparison operator")
        op = self.advance().value
        neg = False
        if self.is_punct("-"):
            self.advance()
            neg = True
        if self.tok.kind != NUMBER:
            raise self.expected("numeric threshold")
        value = self.advance().value
        self.punct(")")
        return ast.FilterSelect(level, measure, op, ast.Number(-value if neg else value))

    def member_path(self) -> ast.MemberPath:
        parts = []
        self._last_plain = ""
        while True:
            tok = self.tok
            if tok.kind == BRACKET:
                parts.append(tok.value)
                self._last_plain = ""
            elif tok.kind == IDENT:
                parts.append(tok.value)
                self._last_plain = tok.value
            else:
                raise self.expected("member path")
            self.advance()
            if self.is_punct(".") and self.peek().kind in (BRACKET, IDENT):
                self.advance()
                continue
            return ast.MemberPath(tuple(parts))

    def slicer(self, nested: bool):
        path = self.member_path()
        if self.is_kw("IN"):
            in_tok = self.advance()
            if nested:
                raise self.error("subqueries cannot be nested more than one level deep", in_tok)
            self.punct("(")
            if not (self.is_kw("SELECT") and self.peek().kind == KW and self.peek().value == "GIS"):
                raise self.expected("SELECT GIS subquery")
            gis = self.gis_query(nested=True)
            self.punct(")")
            return ast.InGis(path, gis)
        return path
