"""
qlikelihood.qasm

OpenQASM 2.0 text for the circuit subset this package builds:

    OPENQASM 2.0;
    include "qelib1.inc";
    // free-text comment lines (optional, kept by the parser)
    qreg q[N];
    creg c[M];
    u3(theta,phi,lambda) q[i];
    cx q[i],q[j];
    measure q[i] -> c[k];        (k = 0..M-1, in order, after all gates)

Angles are written as the shortest decimal that reproduces the value rounded
to 15 significant digits, so emit(parse(emit(c))) == emit(c) byte for byte.
"""

from __future__ import annotations

import re

import pyparsing as pp

from qlikelihood.circuit import Circuit, GateOp
from qlikelihood.errors import QasmParseError

HEADER = "OPENQASM 2.0;"
INCLUDE = 'include "qelib1.inc";'
COMMENT_PREFIX = "// "


def format_angle(x: float) -> str:
    return repr(float(f"{x:.15g}"))


def emit_qasm(c: Circuit) -> str:
    lines = [HEADER, INCLUDE]
    lines += [f"{COMMENT_PREFIX}{text}" for text in c.comments]
    lines.append(f"qreg q[{c.num_qubits}];")
    lines.append(f"creg c[{len(c.measured_qubits)}];")
    for op in c.ops:
        if op.kind == "u3":
            angles = ",".join(format_angle(a) for a in op.params)
            lines.append(f"u3({angles}) q[{op.qubits[0]}];")
        else:
            lines.append(f"cx q[{op.qubits[0]}],q[{op.qubits[1]}];")
    for k, q in enumerate(c.measured_qubits):
        lines.append(f"measure q[{q}] -> c[{k}];")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Grammar
# ---------------------------------------------------------------------------

_LBRACK, _RBRACK, _LPAR, _RPAR, _COMMA, _SEMI = map(pp.Suppress, "[](),;")
_INT = pp.Word(pp.nums).set_parse_action(lambda t: int(t[0]))
_REAL = pp.Regex(r"[+-]?(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?").set_parse_action(lambda t: float(t[0]))


def _ref(register: str) -> pp.ParserElement:
    return pp.Suppress(pp.Keyword(register)) + _LBRACK + _INT + _RBRACK


_QREF = _ref("q")
_CREF = _ref("c")

_HEADER = pp.Suppress(pp.Keyword("OPENQASM")) + pp.Literal("2.0") + _SEMI
_GRAMMAR: dict[str, pp.ParserElement] = {
    "include": pp.Suppress(pp.Keyword("include")) + pp.QuotedString('"') + _SEMI,
    "qreg": pp.Suppress(pp.Keyword("qreg")) + _QREF + _SEMI,
    "creg": pp.Suppress(pp.Keyword("creg")) + _CREF + _SEMI,
    "u3": (
        pp.Suppress(pp.Keyword("u3")) + _LPAR + _REAL + _COMMA + _REAL + _COMMA + _REAL + _RPAR
        + _QREF + _SEMI
    ),
    "cx": pp.Suppress(pp.Keyword("cx")) + _QREF + _COMMA + _QREF + _SEMI,
    "measure": pp.Suppress(pp.Keyword("measure")) + _QREF + pp.Suppress("->") + _CREF + _SEMI,
}

_KEYWORD = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*)")


def _parse_line(grammar: pp.ParserElement, line: str, lineno: int) -> list:
    try:
        return list(grammar.parse_string(line, parse_all=True))
    except pp.ParseException as e:
        raise QasmParseError(e.msg, lineno, e.col) from None


class _Builder:
    """Accumulates parsed statements and enforces statement order."""

    def __init__(self) -> None:
        self.num_qubits: int | None = None
        self.num_clbits: int | None = None
        self.ops: list[GateOp] = []
        self.measured: list[int] = []
        self.comments: list[str] = []

    def qubit(self, q: int, line: int, text: str) -> int:
        if self.num_qubits is None:
            raise QasmParseError("qubit used before qreg declaration", line, _col(text, "q["))
        if q >= self.num_qubits:
            raise QasmParseError(f"qubit index {q} outside q[{self.num_qubits}]", line, _col(text, f"q[{q}]"))
        return q

    def gate(self, op_args: tuple, line: int, text: str) -> None:
        if self.measured:
            raise QasmParseError("gate after measurement", line, _col(text, text.strip()[:1]))
        kind, qubits, params = op_args
        qubits = tuple(self.qubit(q, line, text) for q in qubits)
        if kind == "cx" and qubits[0] == qubits[1]:
            raise QasmParseError("cx control and target must differ", line, _col(text, "cx"))
        self.ops.append(GateOp(kind, qubits, params))

    def measure(self, q: int, k: int, line: int, text: str) -> None:
        q = self.qubit(q, line, text)
        if self.num_clbits is None:
            raise QasmParseError("measure before creg declaration", line, _col(text, "c["))
        if k != len(self.measured) or k >= self.num_clbits:
            raise QasmParseError(f"expected measurement into c[{len(self.measured)}]", line, _col(text, "c["))
        if q in self.measured:
            raise QasmParseError(f"qubit {q} measured twice", line, _col(text, "q["))
        self.measured.append(q)

    def build(self, last_line: int) -> Circuit:
        if self.num_qubits is None:
            raise QasmParseError("missing qreg declaration", last_line)
        if self.num_clbits is None or len(self.measured) != self.num_clbits:
            raise QasmParseError("every classical bit must be written by one measurement", last_line)
        return Circuit(
            num_qubits=self.num_qubits,
            ops=tuple(self.ops),
            measured_qubits=tuple(self.measured),
            comments=tuple(self.comments),
        )


def _col(text: str, token: str) -> int:
    i = text.find(token)
    return i + 1 if i >= 0 else 1


def parse_qasm(text: str) -> Circuit:
    """Parse the emitted subset back into a Circuit; raises QasmParseError."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise QasmParseError("empty input", 1)
    _parse_line(_HEADER, lines[0], 1)

    b = _Builder()
    for lineno, line in enumerate(lines[1:], start=2):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("//"):
            b.comments.append(stripped[3:] if stripped.startswith(COMMENT_PREFIX) else stripped[2:])
            continue
        m = _KEYWORD.match(line)
        keyword = m.group(1) if m else ""
        if keyword not in _GRAMMAR:
            raise QasmParseError(f"unsupported statement {keyword or stripped[:1]!r}", lineno, _col(line, stripped[:1]))
        tokens = _parse_line(_GRAMMAR[keyword], line, lineno)

        if keyword == "include":
            if tokens[0] != "qelib1.inc":
                raise QasmParseError(f"unsupported include {tokens[0]!r}", lineno, _col(line, '"'))
        elif keyword == "qreg":
            if b.num_qubits is not None:
                raise QasmParseError("duplicate qreg", lineno, 1)
            if tokens[0] < 1:
                raise QasmParseError("qreg must hold at least one qubit", lineno, _col(line, "q["))
            b.num_qubits = tokens[0]
        elif keyword == "creg":
            if b.num_clbits is not None:
                raise QasmParseError("duplicate creg", lineno, 1)
            b.num_clbits = tokens[0]
        elif keyword == "u3":
            b.gate(("u3", (tokens[3],), tuple(tokens[:3])), lineno, line)
        elif keyword == "cx":
            b.gate(("cx", (tokens[0], tokens[1]), ()), lineno, line)
        else:
            b.measure(tokens[0], tokens[1], lineno, line)
    return b.build(len(lines))
