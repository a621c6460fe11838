"""Reading and writing networks.

Two formats are supported:

* the native JSON document (``write_native`` / ``parse_native``), which
  round-trips every probability bit-exactly;
* a subset of the classic BIF text format (``parse_bif``), enough for the
  networks distributed in the bnlearn repository.  The accepted grammar is
  documented in ``docs/bif_grammar.md``.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .network import Network, NetworkError, Variable

NATIVE_FORMAT = "jointprofile-native"
NATIVE_VERSION = 1


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: str  # "error" or "warning"
    line: int
    column: int
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


class ParseError(ValueError):
    def __init__(self, diagnostics: list[ParseDiagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(str(d) for d in diagnostics))


class UnsupportedConstructError(ParseError):
    pass


def _error(line: int, col: int, msg: str, cls: type[ParseError] = ParseError) -> ParseError:
    return cls([ParseDiagnostic("error", line, col, msg)])


# --------------------------------------------------------------------------
# native format


def _fmt_float(x: float) -> str:
    # repr is the shortest string that reparses to the same double
    return repr(float(x))


def write_native(net: Network) -> str:
    dumps = json.dumps
    lines = [
        "{",
        f'  "format": {dumps(NATIVE_FORMAT)},',
        f'  "version": {NATIVE_VERSION},',
        f'  "name": {dumps(net.name)},',
        '  "variables": [',
    ]
    for vi, var in enumerate(net.variables):
        lines.append("    {")
        lines.append(f'      "name": {dumps(var.name)},')
        lines.append(f'      "outcomes": [{", ".join(dumps(o) for o in var.outcomes)}],')
        lines.append(f'      "parents": [{", ".join(dumps(p) for p in var.parents)}],')
        lines.append('      "cpt": [')
        cols = [
            "        [" + ", ".join(_fmt_float(x) for x in var.cpt[:, j]) + "]"
            for j in range(var.n_configs)
        ]
        lines.append(",\n".join(cols))
        lines.append("      ]")
        lines.append("    }" + ("," if vi < len(net) - 1 else ""))
    lines.append("  ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _locate(text: str, needle: str) -> tuple[int, int]:
    pos = text.find(needle)
    if pos < 0:
        return 1, 1
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def parse_native(text: str) -> Network:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise _error(exc.lineno, exc.colno, f"syntax error: {exc.msg}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("variables"), list):
        raise _error(1, 1, "document must be an object with a 'variables' list")
    fmt = doc.get("format", NATIVE_FORMAT)
    if fmt != NATIVE_FORMAT:
        raise _error(*_locate(text, '"format"'), f"unknown format {fmt!r}")
    if doc.get("version", NATIVE_VERSION) != NATIVE_VERSION:
        raise _error(*_locate(text, '"version"'), f"unsupported version {doc.get('version')!r}")

    variables: list[Variable] = []
    seen: dict[str, Variable] = {}
    for pos, entry in enumerate(doc["variables"]):
        if not isinstance(entry, dict):
            raise _error(1, 1, f"variables[{pos}] is not an object")
        name = entry.get("name")
        where = _locate(text, json.dumps(name)) if isinstance(name, str) else (1, 1)
        if not isinstance(name, str) or not name:
            raise _error(*where, f"variables[{pos}] has no name")
        try:
            outcomes = [str(o) for o in entry["outcomes"]]
            parents = [str(p) for p in entry.get("parents", [])]
            columns = entry["cpt"]
        except (KeyError, TypeError) as exc:
            raise _error(*where, f"variable {name!r}: missing or malformed field {exc}") from None
        for p in parents:
            if p not in seen:
                if any(v.get("name") == p for v in doc["variables"] if isinstance(v, dict)):
                    msg = f"variable {name!r}: parent {p!r} declared after its child (file order must be topological)"
                else:
                    msg = f"variable {name!r}: unknown parent {p!r}"
                raise _error(*where, msg)
        n_cfg = math.prod(seen[p].k for p in parents)
        if not isinstance(columns, list) or len(columns) != n_cfg:
            got = len(columns) if isinstance(columns, list) else "no"
            raise _error(*where, f"variable {name!r}: expected {n_cfg} CPT columns, got {got}")
        for j, col in enumerate(columns):
            if not isinstance(col, list) or len(col) != len(outcomes):
                raise _error(
                    *where,
                    f"variable {name!r}: CPT column {j} must have {len(outcomes)} entries",
                )
            if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in col):
                raise _error(*where, f"variable {name!r}: CPT column {j} has non-numeric entries")
        cpt = np.array(columns, dtype=np.float64).T.reshape(len(outcomes), n_cfg)
        try:
            var = Variable(name, tuple(outcomes), tuple(parents), cpt)
        except NetworkError as exc:
            raise _error(*where, str(exc)) from None
        if name in seen:
            raise _error(*where, f"duplicate variable name {name!r}")
        seen[name] = var
        variables.append(var)
    try:
        return Network(tuple(variables), name=str(doc.get("name", "network")))
    except NetworkError as exc:
        raise _error(1, 1, str(exc)) from None


# --------------------------------------------------------------------------
# BIF subset

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<linecomment>//[^\n]*)
  | (?P<blockcomment>/\*.*?\*/)
  | (?P<string>"[^"]*")
  | (?P<punct>[{}()\[\]|,;])
  | (?P<word>[^\s{}()\[\]|,;"]+)
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise _error(line, pos - line_start + 1, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        chunk = m.group()
        if kind in ("word", "punct", "string"):
            value = chunk[1:-1] if kind == "string" else chunk
            toks.append(_Tok(kind, value, line, pos - line_start + 1))
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    return toks


@dataclass
class BifDocument:
    network: Network
    properties: dict[str, list[str]] = field(default_factory=dict)
    warnings: list[ParseDiagnostic] = field(default_factory=list)


class _BifParser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.properties: dict[str, list[str]] = {}
        self.warnings: list[ParseDiagnostic] = []

    def peek(self) -> _Tok | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self) -> _Tok:
        tok = self.peek()
        if tok is None:
            last = self.toks[-1] if self.toks else _Tok("eof", "", 1, 1)
            raise _error(last.line, last.col, "unexpected end of input")
        self.i += 1
        return tok

    def expect(self, text: str) -> _Tok:
        tok = self.next()
        if tok.text != text or tok.kind == "string":
            raise _error(tok.line, tok.col, f"expected {text!r}, found {tok.text!r}")
        return tok

    def name(self) -> _Tok:
        tok = self.next()
        if tok.kind not in ("word", "string"):
            raise _error(tok.line, tok.col, f"expected a name, found {tok.text!r}")
        return tok

    def number(self) -> float:
        tok = self.next()
        try:
            value = float(tok.text)
        except ValueError:
            raise _error(tok.line, tok.col, f"expected a number, found {tok.text!r}") from None
        if not math.isfinite(value):
            raise _error(tok.line, tok.col, f"non-finite probability {tok.text!r}")
        return value

    def property(self, owner: str) -> None:
        self.expect("property")
        parts = []
        while (tok := self.next()).text != ";" or tok.kind == "string":
            parts.append(tok.text)
        self.properties.setdefault(owner, []).append(" ".join(parts))

    def numbers_until_semicolon(self) -> list[float]:
        values = [self.number()]
        while True:
            tok = self.next()
            if tok.text == ";":
                return values
            if tok.text != ",":
                self.i -= 1
            values.append(self.number())

    def parse(self) -> BifDocument:
        net_name = "network"
        declared: dict[str, tuple[_Tok, list[str]]] = {}
        order: list[str] = []
        blocks: dict[str, tuple[_Tok, list[str], list[tuple[_Tok, list[str] | None, list[float]]]]] = {}
        saw_network = False
        while (tok := self.peek()) is not None:
            if tok.text == "network":
                self.next()
                net_name = self.name().text
                saw_network = True
                self.expect("{")
                while (t := self.peek()) is not None and t.text != "}":
                    if t.text == "property":
                        self.property("network")
                    else:
                        raise _error(t.line, t.col, f"unsupported construct {t.text!r} in network block",
                                     UnsupportedConstructError)
                self.expect("}")
            elif tok.text == "variable":
                self.next()
                name_tok = self.name()
                if name_tok.text in declared:
                    raise _error(name_tok.line, name_tok.col, f"variable {name_tok.text!r} declared twice")
                outcomes = self.variable_body(name_tok.text)
                declared[name_tok.text] = (name_tok, outcomes)
                order.append(name_tok.text)
            elif tok.text == "probability":
                self.next()
                child, parents = self.probability_head()
                if child.text in blocks:
                    raise _error(child.line, child.col, f"second probability block for {child.text!r}")
                blocks[child.text] = (child, parents, self.probability_body(child.text))
            else:
                raise _error(tok.line, tok.col, f"unexpected {tok.text!r} at top level")
        if not saw_network:
            self.warnings.append(ParseDiagnostic("warning", 1, 1, "missing 'network' declaration"))
        network = self.build(net_name, declared, order, blocks)
        return BifDocument(network, self.properties, self.warnings)

    def variable_body(self, name: str) -> list[str]:
        self.expect("{")
        outcomes: list[str] | None = None
        while (t := self.peek()) is not None and t.text != "}":
            if t.text == "property":
                self.property(name)
            elif t.text == "type":
                self.next()
                kind = self.next()
                if kind.text != "discrete":
                    raise _error(kind.line, kind.col, f"variable {name!r}: type {kind.text!r} is not supported",
                                 UnsupportedConstructError)
                self.expect("[")
                count_tok = self.next()
                if not count_tok.text.isdigit():
                    raise _error(count_tok.line, count_tok.col, "expected outcome count")
                self.expect("]")
                self.expect("{")
                outcomes = [self.name().text]
                while (sep := self.next()).text != "}":
                    if sep.text != ",":
                        self.i -= 1
                    outcomes.append(self.name().text)
                self.expect(";")
                if len(outcomes) != int(count_tok.text):
                    raise _error(count_tok.line, count_tok.col,
                                 f"variable {name!r}: declared {count_tok.text} outcomes, listed {len(outcomes)}")
            else:
                raise _error(t.line, t.col, f"unsupported construct {t.text!r} in variable block",
                             UnsupportedConstructError)
        close = self.expect("}")
        if outcomes is None:
            raise _error(close.line, close.col, f"variable {name!r} has no type declaration")
        return outcomes

    def probability_head(self) -> tuple[_Tok, list[str]]:
        self.expect("(")
        child = self.name()
        parents: list[str] = []
        tok = self.next()
        if tok.text == "|":
            parents.append(self.name().text)
            while (tok := self.next()).text != ")":
                if tok.text != ",":
                    self.i -= 1
                parents.append(self.name().text)
        elif tok.text != ")":
            raise _error(tok.line, tok.col, f"expected '|' or ')', found {tok.text!r}")
        return child, parents

    def probability_body(self, owner: str) -> list[tuple[_Tok, list[str] | None, list[float]]]:
        self.expect("{")
        entries: list[tuple[_Tok, list[str] | None, list[float]]] = []
        while (t := self.peek()) is not None and t.text != "}":
            if t.text == "property":
                self.property(owner)
            elif t.text == "table":
                self.next()
                entries.append((t, None, self.numbers_until_semicolon()))
            elif t.text == "(":
                self.next()
                labels = [self.name().text]
                while (sep := self.next()).text != ")":
                    if sep.text != ",":
                        self.i -= 1
                    labels.append(self.name().text)
                entries.append((t, labels, self.numbers_until_semicolon()))
            else:
                raise _error(t.line, t.col, f"unsupported construct {t.text!r} in probability block",
                             UnsupportedConstructError)
        self.expect("}")
        return entries

    def build(self, net_name, declared, order, blocks) -> Network:
        for child, (tok, parents, _) in blocks.items():
            if child not in declared:
                raise _error(tok.line, tok.col, f"probability block for undeclared variable {child!r}")
            for p in parents:
                if p not in declared:
                    raise _error(tok.line, tok.col, f"variable {child!r}: unknown parent {p!r}")
        for name in order:
            if name not in blocks:
                tok = declared[name][0]
                raise _error(tok.line, tok.col, f"variable {name!r} has no probability block")

        # Kahn's algorithm, ties resolved by declaration order
        position = {n: i for i, n in enumerate(order)}
        indeg = {n: len(blocks[n][1]) for n in order}
        children: dict[str, list[str]] = {n: [] for n in order}
        for n in order:
            for p in blocks[n][1]:
                children[p].append(n)
        ready = sorted((n for n in order if indeg[n] == 0), key=position.__getitem__)
        topo: list[str] = []
        while ready:
            n = ready.pop(0)
            topo.append(n)
            for c in children[n]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
                    ready.sort(key=position.__getitem__)
        if len(topo) != len(order):
            stuck = [n for n in order if n not in set(topo)]
            tok = blocks[stuck[0]][0]
            raise _error(tok.line, tok.col, f"cycle among variables {stuck}")

        variables: list[Variable] = []
        for name in topo:
            tok, parents, entries = blocks[name]
            outcomes = declared[name][1]
            k = len(outcomes)
            parent_outcomes = [declared[p][1] for p in parents]
            n_cfg = math.prod(len(o) for o in parent_outcomes)
            cpt = np.full((k, n_cfg), np.nan)
            for etok, labels, values in entries:
                if labels is None:
                    if len(values) != k * n_cfg:
                        raise _error(etok.line, etok.col,
                                     f"variable {name!r}: table has {len(values)} entries, expected {k * n_cfg}")
                    cpt[:, :] = np.array(values).reshape(k, n_cfg)
                    continue
                if len(labels) != len(parents):
                    raise _error(etok.line, etok.col,
                                 f"variable {name!r}: row names {len(labels)} parent values, expected {len(parents)}")
                if len(values) != k:
                    raise _error(etok.line, etok.col,
                                 f"variable {name!r}: row has {len(values)} entries, expected {k}")
                cfg = 0
                for label, p, outs in zip(labels, parents, parent_outcomes):
                    if label not in outs:
                        raise _error(etok.line, etok.col, f"{label!r} is not an outcome of {p!r}")
                    cfg = cfg * len(outs) + outs.index(label)
                cpt[:, cfg] = values
            if np.isnan(cpt).any():
                missing = int(np.flatnonzero(np.isnan(cpt).any(axis=0))[0])
                raise _error(tok.line, tok.col, f"variable {name!r}: CPT column {missing} not specified")
            try:
                variables.append(Variable(name, tuple(outcomes), tuple(parents), cpt))
            except NetworkError as exc:
                raise _error(tok.line, tok.col, str(exc)) from None
        try:
            return Network(tuple(variables), name=net_name)
        except NetworkError as exc:
            raise _error(1, 1, str(exc)) from None


def load_bif(text: str) -> BifDocument:
    """Parse BIF text, keeping ``property`` strings and warnings."""
    return _BifParser(text).parse()


def parse_bif(text: str) -> Network:
    return load_bif(text).network


def read_network(path: str) -> Network:
    """Load a network file, choosing the parser by extension (``.bif`` or native)."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if str(path).lower().endswith(".bif"):
        return parse_bif(text)
    return parse_native(text)


def native_dict(net: Network) -> dict[str, Any]:
    return json.loads(write_native(net))
