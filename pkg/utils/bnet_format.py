"""
BNET text format, one statement per line, '#' starts a comment:

    node <id> <cardinality> [<state-label> ...]
    arc <parent-id> <child-id>
    cpt <node-id>
    row <parent-state-indices | -> : <p1> ... <pk>
    evidence <node-id> <state-index>
    level <node-id> <n>
    expect <solver> <node-id> <p1> ... <pk>

Parent order is the order of the node's `arc` lines. Rows are listed in
canonical order: row-major over parent states, last parent varying fastest.
By convention state 0 of a hypothesis node means "present".
"""

import itertools
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from models.net_models import BayesNet, Cpt, Evidence, NodeDecl
from services.net_core_service import net_core_service
from utils.errors import BnetParseError, RecognetError

HEADER = "# recognet BNET"


class Expectation(BaseModel):
    """A reference belief for one node under one solver."""

    model_config = ConfigDict(frozen=True)

    solver: str
    node: str
    values: Tuple[float, ...]


class BnetDocument(BaseModel):
    model_config = ConfigDict(frozen=True)

    net: BayesNet
    evidence: Evidence = Field(default_factory=Evidence)
    levels: Dict[str, int] = Field(default_factory=dict)
    expectations: Tuple[Expectation, ...] = ()


class _CptBlock:
    def __init__(self, node: str, line: int):
        self.node = node
        self.line = line
        self.rows: List[Tuple[Tuple[int, ...], Tuple[float, ...], int]] = []


class BnetFormat:
    @staticmethod
    def parse_file(path: str) -> BnetDocument:
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise BnetParseError(f"cannot read {path}: {e.strerror}", 0)
        return BnetFormat.parse(text)

    @staticmethod
    def parse(text: str) -> BnetDocument:
        nodes: List[NodeDecl] = []
        node_lines: Dict[str, int] = {}
        arcs: List[Tuple[str, str]] = []
        blocks: Dict[str, _CptBlock] = {}
        current: Optional[_CptBlock] = None
        evidence: Dict[str, int] = {}
        evidence_lines: Dict[str, int] = {}
        levels: Dict[str, int] = {}
        level_lines: Dict[str, int] = {}
        expectations: List[Expectation] = []

        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            keyword, *args = line.split()

            if keyword == "node":
                if len(args) < 2:
                    raise BnetParseError("expected: node <id> <cardinality> [<state-label> ...]", lineno)
                node_id, card = args[0], _parse_int(args[1], lineno, "cardinality")
                labels = tuple(args[2:])
                if labels and len(labels) != card:
                    raise BnetParseError(f"node '{node_id}' lists {len(labels)} state labels for cardinality {card}", lineno)
                if node_id in node_lines:
                    raise BnetParseError(f"node '{node_id}' declared twice", lineno)
                if card < 2:
                    raise BnetParseError(f"node '{node_id}' needs cardinality >= 2", lineno)
                node_lines[node_id] = lineno
                nodes.append(NodeDecl(id=node_id, cardinality=card, state_labels=labels))
                current = None
            elif keyword == "arc":
                if len(args) != 2:
                    raise BnetParseError("expected: arc <parent-id> <child-id>", lineno)
                arcs.append((args[0], args[1]))
                current = None
            elif keyword == "cpt":
                if len(args) != 1:
                    raise BnetParseError("expected: cpt <node-id>", lineno)
                if args[0] in blocks:
                    raise BnetParseError(f"second cpt block for '{args[0]}'", lineno)
                current = _CptBlock(args[0], lineno)
                blocks[args[0]] = current
            elif keyword == "row":
                if current is None:
                    raise BnetParseError("row outside a cpt block", lineno)
                current.rows.append(_parse_row(line, lineno))
            elif keyword == "evidence":
                if len(args) != 2:
                    raise BnetParseError("expected: evidence <node-id> <state-index>", lineno)
                if args[0] in evidence:
                    raise BnetParseError(f"second evidence statement for '{args[0]}'", lineno)
                evidence[args[0]] = _parse_int(args[1], lineno, "state index")
                evidence_lines[args[0]] = lineno
                current = None
            elif keyword == "level":
                if len(args) != 2:
                    raise BnetParseError("expected: level <node-id> <n>", lineno)
                levels[args[0]] = _parse_int(args[1], lineno, "level")
                level_lines[args[0]] = lineno
                current = None
            elif keyword == "expect":
                if len(args) < 4:
                    raise BnetParseError("expected: expect <solver> <node-id> <p1> ... <pk>", lineno)
                values = tuple(_parse_float(v, lineno) for v in args[2:])
                expectations.append(Expectation(solver=args[0], node=args[1], values=values))
                current = None
            else:
                raise BnetParseError(f"unknown statement '{keyword}'", lineno)

        cards = {n.id: n.cardinality for n in nodes}
        for parent, child in arcs:
            for end in (parent, child):
                if end not in cards:
                    raise BnetParseError(f"arc {parent} -> {child} refers to undeclared node '{end}'", _arc_line(text, parent, child))

        cpts = []
        row_lines: Dict[Tuple[str, int], int] = {}
        for node_id, block in blocks.items():
            if node_id not in cards:
                raise BnetParseError(f"cpt for undeclared node '{node_id}'", block.line)
            parents = [p for p, c in arcs if c == node_id]
            expected = list(itertools.product(*[range(cards[p]) for p in parents]))
            if len(block.rows) != len(expected):
                raise BnetParseError(
                    f"cpt of '{node_id}' has {len(block.rows)} rows, expected {len(expected)}",
                    block.line,
                )
            for r, ((indices, _, row_line), want) in enumerate(zip(block.rows, expected)):
                if tuple(indices) != tuple(want):
                    shown = " ".join(map(str, want)) or "-"
                    raise BnetParseError(f"row out of canonical order for '{node_id}', expected '{shown}'", row_line)
                row_lines[(node_id, r)] = row_line
            cpts.append(Cpt(node=node_id, parents=tuple(parents), table=tuple(values for _, values, _ in block.rows)))

        try:
            net = net_core_service.build_net(nodes, arcs, cpts)
        except RecognetError as e:
            line = row_lines.get((e.details.get("node"), e.details.get("row")))
            if line is None and e.details.get("node") in blocks:
                line = blocks[e.details["node"]].line
            if line is None and e.details.get("node") in node_lines:
                line = node_lines[e.details["node"]]
            _cite_line(e, line)
            raise

        try:
            parsed_evidence = net_core_service.build_evidence(net, evidence)
        except RecognetError as e:
            _cite_line(e, evidence_lines.get(e.details.get("node")))
            raise

        for node_id in levels:
            if node_id not in cards:
                raise BnetParseError(f"level for undeclared node '{node_id}'", level_lines[node_id])
        return BnetDocument(
            net=net,
            evidence=parsed_evidence,
            levels=levels,
            expectations=tuple(expectations),
        )

    @staticmethod
    def serialize(doc: BnetDocument) -> str:
        """Canonical text: same document, byte-identical output."""
        net = doc.net
        lines = [HEADER]
        for node in net.nodes:
            lines.append(" ".join(["node", node.id, str(node.cardinality), *node.state_labels]))
        for parent, child in net.arcs:
            lines.append(f"arc {parent} {child}")
        for node_id in net.node_ids:
            if node_id in doc.levels:
                lines.append(f"level {node_id} {doc.levels[node_id]}")
        for cpt in net.cpts:
            lines.append(f"cpt {cpt.node}")
            cards = [net.cardinality(p) for p in cpt.parents]
            for indices, row in zip(itertools.product(*[range(c) for c in cards]), cpt.table):
                left = " ".join(map(str, indices)) or "-"
                lines.append(f"row {left} : " + " ".join(_format_float(v) for v in row))
        for node_id in net.node_ids:
            if node_id in doc.evidence:
                lines.append(f"evidence {node_id} {doc.evidence.get(node_id)}")
        for exp in doc.expectations:
            lines.append(" ".join(["expect", exp.solver, exp.node, *(_format_float(v) for v in exp.values)]))
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_net(net: BayesNet, evidence: Optional[Evidence] = None, levels: Optional[Dict[str, int]] = None) -> BnetDocument:
        return BnetDocument(net=net, evidence=evidence or Evidence(), levels=levels or {})


def _cite_line(e: RecognetError, line: Optional[int]) -> None:
    if line is not None:
        e.message = f"line {line}: {e.message}"
        e.details["line"] = line
        e.args = (e.message,)


def _parse_int(token: str, lineno: int, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise BnetParseError(f"{what} must be an integer, got '{token}'", lineno)


def _parse_float(token: str, lineno: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise BnetParseError(f"probability must be a number, got '{token}'", lineno)
    if not np.isfinite(value):
        raise BnetParseError(f"probability must be finite, got '{token}'", lineno)
    return value


def _parse_row(line: str, lineno: int) -> Tuple[Tuple[int, ...], Tuple[float, ...], int]:
    body = line[len("row"):]
    if ":" not in body:
        raise BnetParseError("expected: row <parent-state-indices | -> : <p1> ... <pk>", lineno)
    left, right = body.split(":", 1)
    left_tokens = left.split()
    if left_tokens == ["-"]:
        indices: Tuple[int, ...] = ()
    else:
        indices = tuple(_parse_int(t, lineno, "parent state index") for t in left_tokens)
        if not indices:
            raise BnetParseError("row needs parent state indices or '-' for a root", lineno)
    values = tuple(_parse_float(t, lineno) for t in right.split())
    if not values:
        raise BnetParseError("row has no probabilities", lineno)
    return indices, values, lineno


def _arc_line(text: str, parent: str, child: str) -> int:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if raw.split("#", 1)[0].split() == ["arc", parent, child]:
            return lineno
    return 0


def _format_float(value: float) -> str:
    return repr(float(value))
