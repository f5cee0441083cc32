"""Plain-text channel files.

A family file lists the alphabets and one stochastic matrix per state::

    states: a b
    inputs: 0 1
    outputs: 0 e 1
    matrix a:
      1 0 0
      0 q 1-q
    matrix b:
      ...

A wiretap pair embeds two families under ``main:`` and ``wiretap:`` section
headers.  Matrix entries may be arithmetic expressions (``1/3``, ``1-3*p/2``)
over parameters declared with ``param q = 2*p*(1-p)`` lines or supplied by the
caller, which is how one file describes a whole sweep.  Parse errors carry
the offending line number.
"""

from __future__ import annotations

import ast
import operator

import numpy as np

from .channels import ChannelFamily, WiretapPair
from .errors import ChannelFileError

_BIN_OPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY_OPS = {ast.USub: operator.neg, ast.UAdd: operator.pos}


def eval_expression(text: str, env: dict, line: int | None = None) -> float:
    """Evaluate a small arithmetic expression over the given parameters."""
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ChannelFileError(f"bad expression {text!r}: {exc.msg}", line) from None

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.BinOp) and type(node.op) in _BIN_OPS:
            return _BIN_OPS[type(node.op)](walk(node.left), walk(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY_OPS:
            return _UNARY_OPS[type(node.op)](walk(node.operand))
        if isinstance(node, ast.Name):
            if node.id not in env:
                raise ChannelFileError(f"unknown parameter {node.id!r}", line)
            return float(env[node.id])
        raise ChannelFileError(f"unsupported syntax in expression {text!r}", line)

    return walk(tree)


def _labels(raw: str) -> list[str]:
    cleaned = raw.strip().strip("[]")
    parts = [p for chunk in cleaned.split(",") for p in chunk.split()]
    return [p.strip() for p in parts if p.strip()]


class _Parser:
    def __init__(self, text: str, params: dict | None):
        self.lines = text.splitlines()
        self.params = dict(params or {})
        self.pos = 0

    def error(self, message: str):
        raise ChannelFileError(message, self.pos + 1)

    def peek(self):
        while self.pos < len(self.lines):
            stripped = self.lines[self.pos].split("#", 1)[0].strip()
            if stripped:
                return stripped
            self.pos += 1
        return None

    def advance(self):
        line = self.peek()
        self.pos += 1
        return line

    def parse_params(self):
        while True:
            line = self.peek()
            if line is None or not line.startswith("param "):
                return
            lineno = self.pos + 1
            self.advance()
            body = line[len("param "):]
            if "=" not in body:
                raise ChannelFileError("param line needs 'param name = expr'", lineno)
            name, expr = body.split("=", 1)
            name = name.strip()
            if not name.isidentifier():
                raise ChannelFileError(f"bad parameter name {name!r}", lineno)
            if name not in self.params:  # caller-supplied values win
                self.params[name] = eval_expression(expr.strip(), self.params, lineno)

    def parse_family(self, stop_keywords=()) -> ChannelFamily:
        states = inputs = outputs = None
        matrices: dict[str, list[list[float]]] = {}
        while True:
            line = self.peek()
            if line is None or any(line.startswith(k) for k in stop_keywords):
                break
            lineno = self.pos + 1
            if line.startswith("param "):
                self.parse_params()
                continue
            self.advance()
            if line.startswith("states:"):
                states = _labels(line[len("states:"):])
            elif line.startswith("inputs:"):
                inputs = _labels(line[len("inputs:"):])
            elif line.startswith("outputs:"):
                outputs = _labels(line[len("outputs:"):])
            elif line.startswith("matrix"):
                if inputs is None or outputs is None:
                    raise ChannelFileError("matrix before alphabets are declared", lineno)
                header = line[len("matrix"):].strip()
                if not header.endswith(":"):
                    raise ChannelFileError("matrix header must end with ':'", lineno)
                label = header[:-1].strip()
                if states is None or label not in states:
                    raise ChannelFileError(f"matrix for unknown state {label!r}", lineno)
                rows = []
                for _ in range(len(inputs)):
                    row_line = self.peek()
                    row_no = self.pos + 1
                    if row_line is None or any(row_line.startswith(k)
                                               for k in ("states:", "inputs:", "outputs:",
                                                         "matrix", "main:", "wiretap:",
                                                         "param ")):
                        raise ChannelFileError(
                            f"matrix {label!r} needs {len(inputs)} rows", row_no)
                    self.advance()
                    entries = [eval_expression(tok, self.params, row_no)
                               for tok in row_line.split()]
                    if len(entries) != len(outputs):
                        raise ChannelFileError(
                            f"row has {len(entries)} entries, expected {len(outputs)}",
                            row_no)
                    if abs(sum(entries) - 1.0) > 1e-12:
                        raise ChannelFileError(
                            f"row sums to {sum(entries):.17g}, not 1", row_no)
                    rows.append(entries)
                matrices[label] = rows
            else:
                raise ChannelFileError(f"unrecognized line {line!r}", lineno)
        if states is None:
            self.error("missing 'states:' declaration")
        if inputs is None or outputs is None:
            self.error("missing alphabet declaration")
        missing = [s for s in states if s not in matrices]
        if missing:
            self.error(f"missing matrices for states {missing}")
        stack = np.array([matrices[s] for s in states], dtype=np.float64)
        try:
            return ChannelFamily(stack, tuple(states), tuple(inputs), tuple(outputs))
        except Exception as exc:
            self.error(str(exc))


def parse_family(text: str, params: dict | None = None) -> ChannelFamily:
    parser = _Parser(text, params)
    parser.parse_params()
    return parser.parse_family()


def parse_pair(text: str, params: dict | None = None) -> WiretapPair:
    parser = _Parser(text, params)
    parser.parse_params()
    sections = {}
    for expected in ("main:", "wiretap:"):
        line = parser.peek()
        if line != expected:
            parser.error(f"expected section header {expected!r}, found {line!r}")
        parser.advance()
        sections[expected] = parser.parse_family(stop_keywords=("main:", "wiretap:"))
    try:
        return WiretapPair(sections["main:"], sections["wiretap:"])
    except Exception as exc:
        raise ChannelFileError(str(exc)) from None


def is_pair_text(text: str) -> bool:
    return any(line.split("#", 1)[0].strip() == "main:" for line in text.splitlines())


def parse_channel_text(text: str, params: dict | None = None):
    return parse_pair(text, params) if is_pair_text(text) else parse_family(text, params)


def free_parameters(text: str) -> list[str]:
    """Parameter names the file references but does not itself define."""
    referenced: list[str] = []
    declared: set[str] = set()

    def collect(expr: str):
        try:
            tree = ast.parse(expr, mode="eval")
        except SyntaxError:
            return
        for node in ast.walk(tree):
            if isinstance(node, ast.Name) and node.id not in referenced:
                referenced.append(node.id)

    keywords = ("states:", "inputs:", "outputs:", "matrix", "main:", "wiretap:")
    for line in text.splitlines():
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if body.startswith("param ") and "=" in body:
            name, expr = body[len("param "):].split("=", 1)
            collect(expr.strip())
            declared.add(name.strip())
        elif not any(body.startswith(k) for k in keywords):
            for tok in body.split():
                collect(tok)
    return [n for n in referenced if n not in declared]


def family_to_text(family: ChannelFamily) -> str:
    out = [
        f"states: {' '.join(family.state_labels)}",
        f"inputs: {' '.join(family.input_labels)}",
        f"outputs: {' '.join(family.output_labels)}",
    ]
    for s, label in enumerate(family.state_labels):
        out.append(f"matrix {label}:")
        for row in family.matrices[s]:
            out.append("  " + " ".join(f"{v:.17g}" for v in row))
    return "\n".join(out) + "\n"


def pair_to_text(pair: WiretapPair) -> str:
    main = "\n".join("  " + line if line else line
                     for line in family_to_text(pair.main).splitlines())
    wiretap = "\n".join("  " + line if line else line
                        for line in family_to_text(pair.wiretap).splitlines())
    return f"main:\n{main}\nwiretap:\n{wiretap}\n"
