"""Comment- and string-aware lexical metrics for Solidity source files.

The analyzer never builds an AST: every metric is defined over a token
stream from which comments and string literals have been stripped, so
keywords appearing inside comments or strings never affect any count.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass


class InvalidEncoding(ValueError):
    """Input bytes are not valid UTF-8."""


SOLIDITY_KEYWORDS = frozenset({
    "pragma", "solidity", "contract", "interface", "library", "abstract",
    "function", "modifier", "event", "constructor", "fallback", "receive",
    "struct", "enum", "mapping", "address", "payable",
    "public", "private", "internal", "external",
    "pure", "view", "constant", "immutable", "virtual", "override",
    "memory", "storage", "calldata", "indexed", "anonymous",
    "returns", "return", "if", "else", "for", "while", "do",
    "break", "continue", "new", "delete", "emit", "using", "is",
    "import", "assembly", "unchecked", "try", "catch", "revert",
    "bool", "string", "bytes", "uint", "int",
    "wei", "gwei", "ether", "true", "false",
})

_PUNCTUATION = set("{}()[];,.=+-*/%<>!&|^~?:")


@dataclass(frozen=True)
class Token:
    kind: str  # keyword | identifier | punctuation | number | other
    lexeme: str
    line: int
    pos: int  # start offset in the decoded source text


@dataclass(frozen=True)
class IntrinsicMetrics:
    pragma: str = ""
    sloc: int = 0
    functions: int = 0
    events: int = 0
    modifiers: int = 0
    payable: int = 0
    mapping: int = 0
    addressVars: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "IntrinsicMetrics":
        return cls(**{f: data[f] for f in cls.__dataclass_fields__})


def _decode(source: str | bytes) -> str:
    if isinstance(source, bytes):
        try:
            return source.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InvalidEncoding(str(exc)) from None
    return source


def lex(source: str | bytes) -> list[Token]:
    """Tokenize Solidity source, dropping comments and string literals.

    Escape sequences inside strings do not terminate the literal; an
    unterminated block comment or string consumes to end of input
    (scraped sources may be truncated).
    """
    text = _decode(source)
    tokens: list[Token] = []
    i, line, n = 0, 1, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            i += 1
            continue
        if c.isspace():
            i += 1
            continue
        if text.startswith("//", i):
            j = text.find("\n", i)
            i = n if j < 0 else j
            continue
        if text.startswith("/*", i):
            j = text.find("*/", i + 2)
            if j < 0:
                line += text.count("\n", i)
                i = n
            else:
                line += text.count("\n", i, j)
                i = j + 2
            continue
        if c in "\"'":
            i += 1
            while i < n:
                if text[i] == "\\":
                    if i + 1 < n and text[i + 1] == "\n":
                        line += 1
                    i += 2
                    continue
                if text[i] == c:
                    i += 1
                    break
                if text[i] == "\n":
                    line += 1
                i += 1
            continue
        start = i
        if c.isalpha() or c in "_$":
            while i < n and (text[i].isalnum() or text[i] in "_$"):
                i += 1
            lexeme = text[start:i]
            kind = "keyword" if lexeme in SOLIDITY_KEYWORDS else "identifier"
            tokens.append(Token(kind, lexeme, line, start))
            continue
        if c.isdigit():
            while i < n and (
                text[i].isalnum()
                or text[i] == "_"
                or (text[i] == "." and i + 1 < n and text[i + 1].isdigit())
            ):
                i += 1
            tokens.append(Token("number", text[start:i], line, start))
            continue
        if c in _PUNCTUATION:
            tokens.append(Token("punctuation", c, line, start))
            i += 1
            continue
        tokens.append(Token("other", c, line, start))
        i += 1
    return tokens


def _physical_lines(text: str) -> int:
    if not text:
        return 0
    return text.count("\n") + (0 if text.endswith("\n") else 1)


def _first_pragma(text: str, tokens: list[Token]) -> str:
    for i in range(len(tokens) - 1):
        if tokens[i].lexeme == "pragma" and tokens[i + 1].lexeme == "solidity":
            stop = len(text)
            for j in range(i + 2, len(tokens)):
                if tokens[j].lexeme == ";":
                    stop = tokens[j].pos
                    break
            return text[tokens[i + 1].pos + len("solidity"):stop].strip()
    return ""


def _header_has_payable(tokens: list[Token], func_idx: int) -> bool:
    """Check the declaration header after the parameter list for `payable`.

    The header region runs from the parameter list's matching close
    parenthesis to the first `{` or `;` at the same nesting depth.
    The `payable` of an `address payable` return type never counts.
    """
    n = len(tokens)
    i = func_idx + 1
    while i < n and tokens[i].lexeme not in ("(", "{", ";"):
        i += 1
    if i >= n or tokens[i].lexeme != "(":
        return False
    depth = 1
    i += 1
    while i < n and depth > 0:
        if tokens[i].lexeme == "(":
            depth += 1
        elif tokens[i].lexeme == ")":
            depth -= 1
        i += 1
    depth = 0
    while i < n:
        lexeme = tokens[i].lexeme
        if lexeme in "([":
            depth += 1
        elif lexeme in ")]":
            depth -= 1
        elif depth == 0 and lexeme in ("{", ";"):
            return False
        elif lexeme == "payable" and tokens[i - 1].lexeme != "address":
            return True
        i += 1
    return False


def analyze(source: str | bytes) -> IntrinsicMetrics:
    """Compute the intrinsic metric vector of one Solidity source file.

    Counts are per file: a file with several contract blocks yields one
    aggregated vector. Only `function` keyword tokens count as functions
    (constructors, fallback and receive declarations do not).
    """
    text = _decode(source)
    tokens = lex(text)
    n = len(tokens)
    functions = events = modifiers = payable = mappings = address_vars = 0
    func_indices: list[int] = []
    for i, tok in enumerate(tokens):
        if tok.kind != "keyword":
            continue
        if tok.lexeme == "function":
            if i == 0 or tokens[i - 1].lexeme != ".":
                functions += 1
                func_indices.append(i)
        elif tok.lexeme == "event":
            events += 1
        elif tok.lexeme == "modifier":
            if i == 0 or tokens[i - 1].lexeme != ".":
                modifiers += 1
        elif tok.lexeme == "mapping":
            if i + 1 < n and tokens[i + 1].lexeme == "(":
                mappings += 1
        elif tok.lexeme == "address":
            if i + 1 >= n or tokens[i + 1].lexeme != "(":
                address_vars += 1
    for i in func_indices:
        if _header_has_payable(tokens, i):
            payable += 1
    return IntrinsicMetrics(
        pragma=_first_pragma(text, tokens),
        sloc=_physical_lines(text),
        functions=functions,
        events=events,
        modifiers=modifiers,
        payable=payable,
        mapping=mappings,
        addressVars=address_vars,
    )


@dataclass(frozen=True)
class BatchEntry:
    address: str
    metrics: IntrinsicMetrics | None = None
    error: str | None = None


def analyze_batch(sources: list[tuple[str, str | bytes]]) -> list[BatchEntry]:
    """Analyze many (address, source) pairs, isolating per-entry failures.

    Output order equals input order; a failing entry records its error
    and never aborts the batch.
    """
    results = []
    for address, source in sources:
        try:
            results.append(BatchEntry(address, metrics=analyze(source)))
        except InvalidEncoding as exc:
            results.append(BatchEntry(address, error=f"InvalidEncoding: {exc}"))
    return results
