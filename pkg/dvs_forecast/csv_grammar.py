"""Series CSV reader using parsimonious."""

from typing import List, Tuple

from parsimonious.exceptions import ParseError as GrammarParseError
from parsimonious.grammar import Grammar
from parsimonious.nodes import NodeVisitor

from .errors import ParseError

# One grammar for the header and one record; rows are parsed one line at a
# time so failures can be reported with their line number.
SERIES_CSV_GRAMMAR = r"""
record = ws number ws "," ws number ws
header = ws "t" ws "," ws "value" ws
number = ~r"[+-]?(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)(?:[eE][+-]?[0-9]+)?"
ws = ~r"[ \t]*"
"""

_GRAMMAR = Grammar(SERIES_CSV_GRAMMAR)


class RecordVisitor(NodeVisitor):
    """Turns a parsed `t,value` record into a pair of floats."""

    def visit_record(self, node, visited_children):
        _, time, _, _, _, value, _ = visited_children
        return time, value

    def visit_number(self, node, visited_children):
        return float(node.text)

    def generic_visit(self, node, visited_children):
        return visited_children or node


def _lines(text: str) -> List[str]:
    if text.startswith("\ufeff"):
        text = text[1:]
    return [line[:-1] if line.endswith("\r") else line for line in text.split("\n")]


def parse_series_rows(text: str) -> List[Tuple[int, float, float]]:
    """Parse CSV text into `(line_number, time, value)` triples in file order.

    Line numbers are 1-based and count the header, so the first record is
    on line 2. Blank lines are skipped.
    """
    lines = _lines(text)
    if not lines or not lines[0].strip():
        raise ParseError("missing header 't,value'", line=1)
    try:
        _GRAMMAR["header"].parse(lines[0])
    except GrammarParseError:
        raise ParseError(
            f"expected header 't,value', found {lines[0]!r}", line=1
        ) from None

    visitor = RecordVisitor()
    rows = []
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            tree = _GRAMMAR["record"].parse(line)
        except GrammarParseError:
            raise ParseError(f"malformed record {line!r}", line=number) from None
        time, value = visitor.visit(tree)
        rows.append((number, time, value))
    return rows
