"""Graph text format reader/writer and the constructor expression language."""

import logging
import re
from pathlib import Path
from typing import List, Optional, Tuple, Union

from qws import graph as g
from qws.errors import GraphError, GraphParseError
from qws.graph import Graph

logger = logging.getLogger(__name__)

LOOPS_PREFIX = "# loops:"

_TOKEN_RE = re.compile(
    r"""
    (?P<cayley>(?:cubelike:d=\d+|circulant:n=\d+);C=(?:\d+(?:,\d+)*)?)
    | (?P<name>[a-z_]+)
    | (?P<int>\d+)
    | (?P<punct>[:(),])
    | (?P<space>\s+)
    """,
    re.VERBOSE,
)

# Combinators taking graph arguments: name -> (min graphs, max graphs, trailing integer)
COMBINATORS = {
    "join": (2, None, False),
    "cartesian": (2, None, False),
    "direct": (2, None, False),
    "union": (2, None, False),
    "complement": (1, 1, False),
    "bipcomplement": (1, 1, False),
    "power": (1, 1, True),
}


def parse_graph_text(text: str) -> Graph:
    """Parse the ``n m`` / ``u v [w]`` edge-list format.

    Args:
        text: File contents.

    Returns:
        The parsed graph.

    Raises:
        GraphParseError: If the header, an edge line or the loops line is malformed.
    """
    lines: List[Tuple[int, str]] = []
    loops_line: Optional[Tuple[int, str]] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith(LOOPS_PREFIX):
            loops_line = (lineno, line[len(LOOPS_PREFIX) :])
            continue
        if line.startswith("#"):
            continue
        lines.append((lineno, line))
    if not lines:
        raise GraphParseError("Empty graph file")

    lineno, header = lines[0]
    parts = header.split()
    if len(parts) != 2:
        raise GraphParseError(f"line {lineno}: expected 'n m', got {header!r}")
    try:
        n, m = int(parts[0]), int(parts[1])
    except ValueError as e:
        raise GraphParseError(f"line {lineno}: invalid header {header!r}") from e
    if n < 1 or m < 0:
        raise GraphParseError(f"line {lineno}: invalid sizes n={n}, m={m}")
    if len(lines) - 1 != m:
        raise GraphParseError(f"header declares {m} edges, found {len(lines) - 1}")

    edges = []
    for lineno, line in lines[1:]:
        parts = line.split()
        if len(parts) not in (2, 3):
            raise GraphParseError(f"line {lineno}: expected 'u v [w]', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError as e:
            raise GraphParseError(f"line {lineno}: invalid edge {line!r}") from e
        edges.append((u, v, w))

    loops = {}
    if loops_line is not None:
        lineno, body = loops_line
        items = body.split()
        if len(items) % 2:
            raise GraphParseError(f"line {lineno}: loops need 'u w' pairs")
        try:
            for i in range(0, len(items), 2):
                loops[int(items[i])] = float(items[i + 1])
        except ValueError as e:
            raise GraphParseError(f"line {lineno}: invalid loop entry") from e
        if any(not 0 <= u < n for u in loops):
            raise GraphParseError(f"line {lineno}: loop vertex out of range")

    try:
        return Graph.from_edges(n, edges, loops=loops, meta="file")
    except GraphError as e:
        raise GraphParseError(str(e)) from e


def format_graph_text(x: Graph) -> str:
    """Serialize a graph to the edge-list format; weights equal to 1 are omitted."""
    edges = x.edges()
    out = [f"{x.n} {len(edges)}"]
    for u, v, w in edges:
        out.append(f"{u} {v}" if w == 1.0 else f"{u} {v} {w!r}")
    loops = [(u, float(x.diagonal[u])) for u in range(x.n) if x.diagonal[u] != 0]
    if loops:
        out.append(LOOPS_PREFIX + " " + " ".join(f"{u} {w!r}" for u, w in loops))
    return "\n".join(out) + "\n"


def read_graph(path: Union[str, Path]) -> Graph:
    path = Path(path)
    x = parse_graph_text(path.read_text(encoding="utf-8"))
    return Graph(x.weights, x.diagonal, meta=path.name)


def write_graph(x: Graph, path: Union[str, Path]) -> None:
    Path(path).write_text(format_graph_text(x), encoding="utf-8")


class ExpressionParser:
    """Recursive-descent parser for constructor expressions such as ``join(path:2,cycle:5)``."""

    def __init__(self, text: str):
        self.text = text
        self.tokens = self._tokenize(text)
        self.pos = 0

    @staticmethod
    def _tokenize(text: str) -> List[Tuple[str, str]]:
        tokens: List[Tuple[str, str]] = []
        pos = 0
        while pos < len(text):
            match = _TOKEN_RE.match(text, pos)
            if match is None:
                raise GraphParseError(f"Unexpected character {text[pos]!r} at position {pos}")
            kind = match.lastgroup or ""
            if kind != "space":
                tokens.append((kind, match.group()))
            pos = match.end()
        return tokens

    def parse(self) -> Graph:
        result = self._expr()
        if self.pos != len(self.tokens):
            raise GraphParseError(f"Trailing input in {self.text!r}: {self._peek()[1]!r}")
        return result

    def _peek(self) -> Tuple[str, str]:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos]
        return ("eof", "")

    def _take(self, kind: str, value: Optional[str] = None) -> str:
        tok_kind, tok_value = self._peek()
        if tok_kind != kind or (value is not None and tok_value != value):
            expected = value or kind
            raise GraphParseError(f"Expected {expected!r} in {self.text!r}, got {tok_value!r}")
        self.pos += 1
        return tok_value

    def _expr(self) -> Graph:
        kind, value = self._peek()
        if kind == "cayley":
            self.pos += 1
            from qws import cayley

            try:
                return cayley.graph_from_spec_string(value)
            except GraphError as e:
                raise GraphParseError(str(e)) from e
        name = self._take("name")
        if name in COMBINATORS:
            return self._combinator(name)
        params = []
        if self._peek() == ("punct", ":"):
            self.pos += 1
            params.append(int(self._take("int")))
        try:
            return g.build_named(name, params)
        except GraphError as e:
            raise GraphParseError(str(e)) from e

    def _combinator(self, name: str) -> Graph:
        low, high, trailing_int = COMBINATORS[name]
        self._take("punct", "(")
        args = [self._expr()]
        extra: Optional[int] = None
        while self._peek() == ("punct", ","):
            self.pos += 1
            if trailing_int and self._peek()[0] == "int":
                extra = int(self._take("int"))
                break
            args.append(self._expr())
        self._take("punct", ")")
        if len(args) < low or (high is not None and len(args) > high):
            raise GraphParseError(f"{name} takes {low}{'' if high == low else '+'} graph argument(s)")
        if trailing_int and extra is None:
            raise GraphParseError(f"{name} needs a trailing integer argument")
        try:
            return self._apply(name, args, extra)
        except GraphError as e:
            raise GraphParseError(str(e)) from e

    @staticmethod
    def _apply(name: str, args: List[Graph], extra: Optional[int]) -> Graph:
        if name == "complement":
            return g.complement(args[0])
        if name == "bipcomplement":
            return g.bipartite_complement(args[0])
        if name == "power":
            return g.cartesian_power(args[0], int(extra or 0))
        if name == "union":
            return g.disjoint_union(*args)
        binary = {"join": g.join, "cartesian": g.cartesian_product, "direct": g.direct_product}[name]
        result = args[0]
        for other in args[1:]:
            result = binary(result, other)
        return result


def parse_expression(text: str) -> Graph:
    """Build the graph described by a constructor expression."""
    x = ExpressionParser(text.strip()).parse()
    return Graph(x.weights, x.diagonal, meta=text.strip())


def load_graph(expr_or_path: Union[str, Path]) -> Graph:
    """Load a graph from a text-format file if one exists at the path, else parse an expression."""
    path = Path(expr_or_path)
    if path.is_file():
        logger.debug("reading graph file %s", path)
        return read_graph(path)
    text = str(expr_or_path)
    if path.suffix in (".txt", ".graph") or "/" in text:
        raise GraphParseError(f"File not found: {text}")
    return parse_expression(text)
