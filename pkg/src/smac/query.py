"""Filter query language over the corpus: a GraphQL subset.

Supported documents have one root field, `metrics`, taking a single
`query:` argument whose object holds `<field>_<op>: <value>` filters
(ops: eq, ne, gt, gte, lt, lte) combined with AND, plus a flat selection
set. Variables (`$name`, declared on an optional `query` keyword) and a
minimal `__type(name: "metrics")` field-catalog introspection are also
accepted. No mutations, nesting, pagination, or OR/NOT.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Optional

from .store import BadAddress, ContractDocument, CorpusStore, normalize_address


class QueryError(Exception):
    pass


class QuerySyntaxError(QueryError):
    pass


class UnknownField(QueryError):
    pass


class UnknownOperator(QueryError):
    pass


class UnboundVariable(QueryError):
    pass


class TypeMismatch(QueryError):
    pass


class UnknownType(QueryError):
    pass


OPERATORS = ("eq", "ne", "gt", "gte", "lt", "lte")
NUMERIC_OPERATORS = ("gt", "gte", "lt", "lte")

# Queryable fields with their scalar kinds, in catalog order.
FIELD_KINDS: dict[str, str] = {
    "address": "address",
    "pragma": "string",
    "sloc": "number",
    "functions": "number",
    "events": "number",
    "modifiers": "number",
    "payable": "number",
    "mapping": "number",
    "addressVars": "number",
    "transactions": "number",
    "balance": "number",
    "etherValue": "number",
    "firstSeen": "timestamp",
    "lastSeen": "timestamp",
}

# The paper's listings spell the address selection both ways; the response
# key is always contractAddress.
_FIELD_ALIASES = {"adress": "address", "contractAddress": "address"}


def _canonical_field(name: str) -> str:
    name = _FIELD_ALIASES.get(name, name)
    if name not in FIELD_KINDS:
        raise UnknownField(f"unknown field: {name}")
    return name


@dataclass(frozen=True)
class FilterPredicate:
    field: str
    op: str
    value: object


@dataclass(frozen=True)
class Query:
    predicates: tuple[FilterPredicate, ...]
    selection: tuple[str, ...]


@dataclass(frozen=True)
class TypeRequest:
    name: str


# ---------------------------------------------------------------------------
# Lexing and parsing of query documents


@dataclass(frozen=True)
class _Tok:
    kind: str  # name | number | string | punct | var | end
    value: object


_PUNCT = set("{}():!,")


def _lex_document(text: str) -> list[_Tok]:
    tokens: list[_Tok] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace() or c == ",":  # commas are insignificant, as in GraphQL
            i += 1
            continue
        if c == "#":
            j = text.find("\n", i)
            i = n if j < 0 else j
            continue
        if c == "$":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            if j == i + 1:
                raise QuerySyntaxError("'$' must be followed by a variable name")
            tokens.append(_Tok("var", text[i + 1:j]))
            i = j
            continue
        if c == '"':
            j = i + 1
            out = []
            while j < n and text[j] != '"':
                if text[j] == "\\" and j + 1 < n:
                    out.append(text[j + 1])
                    j += 2
                else:
                    out.append(text[j])
                    j += 1
            if j >= n:
                raise QuerySyntaxError("unterminated string literal")
            tokens.append(_Tok("string", "".join(out)))
            i = j + 1
            continue
        if c.isdigit() or (c == "-" and i + 1 < n and text[i + 1].isdigit()):
            j = i + 1
            while j < n and (text[j].isdigit() or text[j] in ".eE+-"):
                j += 1
            raw = text[i:j]
            try:
                value = int(raw)
            except ValueError:
                try:
                    value = float(raw)
                except ValueError:
                    raise QuerySyntaxError(f"bad number literal: {raw!r}") from None
            tokens.append(_Tok("number", value))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Tok("name", text[i:j]))
            i = j
            continue
        if c in _PUNCT:
            tokens.append(_Tok("punct", c))
            i += 1
            continue
        raise QuerySyntaxError(f"unexpected character {c!r}")
    tokens.append(_Tok("end", None))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Tok], variables: dict):
        self.tokens = tokens
        self.pos = 0
        self.variables = variables

    def peek(self) -> _Tok:
        return self.tokens[self.pos]

    def next(self) -> _Tok:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, value=None) -> _Tok:
        tok = self.next()
        if tok.kind != kind or (value is not None and tok.value != value):
            want = value if value is not None else kind
            raise QuerySyntaxError(f"expected {want!r}, got {tok.value!r}")
        return tok

    def parse(self) -> Query | TypeRequest:
        if self.peek() == _Tok("name", "query"):
            self.next()
            if self.peek().kind == "name":  # optional operation name
                self.next()
            if self.peek() == _Tok("punct", "("):
                self._skip_variable_definitions()
        self.expect("punct", "{")
        root = self.expect("name").value
        if root == "__type":
            request = self._parse_type_request()
        elif root == "metrics":
            request = self._parse_metrics()
        else:
            raise QuerySyntaxError(f"unknown root field: {root}")
        self.expect("punct", "}")
        self.expect("end")
        return request

    def _skip_variable_definitions(self) -> None:
        self.expect("punct", "(")
        while self.peek() != _Tok("punct", ")"):
            self.expect("var")
            self.expect("punct", ":")
            self.expect("name")  # type name, unused beyond presence
            if self.peek() == _Tok("punct", "!"):
                self.next()
        self.next()

    def _value(self):
        tok = self.next()
        if tok.kind in ("number", "string"):
            return tok.value
        if tok.kind == "var":
            if tok.value not in self.variables:
                raise UnboundVariable(f"variable ${tok.value} is not bound")
            return self.variables[tok.value]
        raise QuerySyntaxError(f"expected a value, got {tok.value!r}")

    def _parse_metrics(self) -> Query:
        self.expect("punct", "(")
        self.expect("name", "query")
        self.expect("punct", ":")
        self.expect("punct", "{")
        predicates = []
        while self.peek() != _Tok("punct", "}"):
            key = self.expect("name").value
            self.expect("punct", ":")
            predicates.append(_make_predicate(key, self._value()))
        self.next()
        self.expect("punct", ")")
        self.expect("punct", "{")
        selection = []
        while self.peek().kind == "name":
            selection.append(_canonical_field(self.next().value))
        self.expect("punct", "}")
        if not selection:
            raise QuerySyntaxError("selection set is empty")
        return Query(tuple(predicates), tuple(selection))

    def _parse_type_request(self) -> TypeRequest:
        self.expect("punct", "(")
        self.expect("name", "name")
        self.expect("punct", ":")
        name = self._value()
        if not isinstance(name, str):
            raise QuerySyntaxError("__type name must be a string")
        self.expect("punct", ")")
        if self.peek() == _Tok("punct", "{"):  # sub-selection is cosmetic
            depth = 0
            while True:
                tok = self.next()
                if tok == _Tok("punct", "{"):
                    depth += 1
                elif tok == _Tok("punct", "}"):
                    depth -= 1
                    if depth == 0:
                        break
                elif tok.kind == "end":
                    raise QuerySyntaxError("unterminated selection set")
        return TypeRequest(name)


def _make_predicate(key: str, value) -> FilterPredicate:
    name, sep, op = key.rpartition("_")
    if not sep or op not in OPERATORS:
        raise UnknownOperator(
            f"filter {key!r} has no recognized operator suffix "
            f"(expected one of {', '.join(OPERATORS)})")
    field_name = _canonical_field(name)
    kind = FIELD_KINDS[field_name]
    if op in NUMERIC_OPERATORS and kind not in ("number", "timestamp"):
        raise TypeMismatch(f"operator {op} requires a numeric field, "
                           f"{field_name} is {kind}")
    if kind in ("number", "timestamp"):
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise TypeMismatch(f"field {field_name} expects a number, "
                               f"got {value!r}")
    elif kind == "address":
        if not isinstance(value, str):
            raise TypeMismatch(f"field {field_name} expects an address string")
        try:
            value = normalize_address(value)
        except BadAddress as exc:
            raise TypeMismatch(str(exc)) from None
    else:
        if not isinstance(value, str):
            raise TypeMismatch(f"field {field_name} expects a string, "
                               f"got {value!r}")
    return FilterPredicate(field_name, op, value)


def parse_query(text: str, variables: Optional[dict] = None) -> Query | TypeRequest:
    """Parse a query document, resolving variable references from bindings."""
    return _Parser(_lex_document(text), variables or {}).parse()


# ---------------------------------------------------------------------------
# Execution


def _matches(doc: ContractDocument, pred: FilterPredicate) -> bool:
    actual = doc.field_value(pred.field)
    if pred.op == "eq":
        return actual == pred.value
    if pred.op == "ne":
        return actual != pred.value
    if pred.op == "gt":
        return actual > pred.value
    if pred.op == "gte":
        return actual >= pred.value
    if pred.op == "lt":
        return actual < pred.value
    return actual <= pred.value


def _project(doc: ContractDocument, selection: tuple[str, ...]) -> dict:
    row = {}
    for name in selection:
        if name == "address":
            row["contractAddress"] = doc.address
        else:
            row[name] = doc.field_value(name)
    return row


def execute(query: Query, store: CorpusStore) -> list[dict]:
    """Rows satisfying all predicates, projected, address ascending."""
    docs = store.scan(lambda d: all(_matches(d, p) for p in query.predicates))
    return [_project(d, query.selection) for d in docs]


def introspect(type_name: str) -> list[dict]:
    """Field catalog of the metrics record type, for building filter forms."""
    if type_name != "metrics":
        raise UnknownType(f"unknown type: {type_name}")
    return [{"name": name, "kind": kind} for name, kind in FIELD_KINDS.items()]


# ---------------------------------------------------------------------------
# Response envelopes (shared by the HTTP service and the CLI)


def _wei_to_ether(wei: int) -> str:
    text = str(Decimal(wei) / Decimal(10) ** 18)
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return text or "0"


def run_request(store: CorpusStore, text: str,
                variables: Optional[dict] = None,
                max_rows: Optional[int] = None) -> dict:
    """Produce the full response envelope for one query document.

    Data and query errors both come back as envelopes: `{"data": …}` or
    `{"errors": [{"message": …}]}`. Rows beyond max_rows are dropped and
    flagged with `truncated: true`. A wei balance gains a derived
    `balanceEther` display string.
    """
    try:
        request = parse_query(text, variables)
        if isinstance(request, TypeRequest):
            fields = introspect(request.name)
            return {"data": {"__type": {"name": request.name, "fields": fields}}}
        rows = execute(request, store)
    except QueryError as exc:
        return {"errors": [{"message": f"{type(exc).__name__}: {exc}"}]}
    envelope: dict = {}
    if max_rows is not None and len(rows) > max_rows:
        rows = rows[:max_rows]
        envelope["truncated"] = True
    for row in rows:
        if "balance" in row:
            row["balanceEther"] = _wei_to_ether(row["balance"])
    envelope["data"] = {"metrics": rows}
    return envelope


def render_response(envelope: dict) -> str:
    """Canonical serialization, identical for HTTP bodies and CLI output."""
    return json.dumps(envelope, indent=2)
