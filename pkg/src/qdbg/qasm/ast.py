"""AST for the supported OpenQASM 2.0 subset, plus the pretty-printer.

Source spans are carried on every statement (compare=False, so structural
equality ignores them; the round-trip property relies on that).
"""

from dataclasses import dataclass, field
from typing import Optional, Union

from ..errors import Location


@dataclass(frozen=True)
class SourceProgram:
    text: str
    origin: str = "<inline>"


# --- angle expressions -------------------------------------------------------

class Expr:
    pass


@dataclass(frozen=True)
class Num(Expr):
    value: float

    def eval(self, env):
        return self.value

    def pp(self):
        v = self.value
        return repr(int(v)) if v == int(v) else repr(v)


@dataclass(frozen=True)
class Pi(Expr):
    def eval(self, env):
        import math
        return math.pi

    def pp(self):
        return "pi"


@dataclass(frozen=True)
class Name(Expr):
    ident: str

    def eval(self, env):
        return env[self.ident]

    def pp(self):
        return self.ident


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr

    def eval(self, env):
        return -self.operand.eval(env)

    def pp(self):
        return f"-{self.operand.pp()}"


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # + - * /
    left: Expr
    right: Expr

    def eval(self, env):
        a, b = self.left.eval(env), self.right.eval(env)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        return a / b

    def pp(self):
        return f"({self.left.pp()} {self.op} {self.right.pp()})"


# --- statements --------------------------------------------------------------

@dataclass(frozen=True)
class BitRef:
    """Reference to a register bit; index None means the whole register."""
    reg: str
    index: Optional[int] = None

    def pp(self):
        return self.reg if self.index is None else f"{self.reg}[{self.index}]"


@dataclass(frozen=True)
class GateApply:
    name: str
    params: tuple
    targets: tuple  # of BitRef
    span: Location = field(compare=False, default=None)

    def pp(self):
        args = ", ".join(t.pp() for t in self.targets)
        if self.params:
            ps = ", ".join(p.pp() for p in self.params)
            return f"{self.name}({ps}) {args};"
        return f"{self.name} {args};"


@dataclass(frozen=True)
class Measure:
    qubit: BitRef
    clbit: BitRef
    span: Location = field(compare=False, default=None)

    def pp(self):
        return f"measure {self.qubit.pp()} -> {self.clbit.pp()};"


@dataclass(frozen=True)
class Reset:
    qubit: BitRef
    span: Location = field(compare=False, default=None)

    def pp(self):
        return f"reset {self.qubit.pp()};"


@dataclass(frozen=True)
class Barrier:
    targets: tuple
    span: Location = field(compare=False, default=None)

    def pp(self):
        return f"barrier {', '.join(t.pp() for t in self.targets)};"


@dataclass(frozen=True)
class If:
    creg: str
    value: int
    inner: Union[GateApply, Measure, Reset]
    span: Location = field(compare=False, default=None)

    def pp(self):
        return f"if({self.creg}=={self.value}) {self.inner.pp()}"


Stmt = Union[GateApply, Measure, Reset, Barrier, If]


@dataclass(frozen=True)
class GateDef:
    name: str
    params: tuple  # formal parameter names
    qubits: tuple  # formal qubit names
    body: tuple    # of GateApply over formals

    def pp(self):
        head = f"gate {self.name}"
        if self.params:
            head += f"({', '.join(self.params)})"
        head += f" {', '.join(self.qubits)}"
        lines = [head + " {"]
        for stmt in self.body:
            lines.append(f"  {stmt.pp()}")
        lines.append("}")
        return "\n".join(lines)


@dataclass(frozen=True)
class Ast:
    version: tuple
    includes: tuple
    qregs: tuple  # of (name, size)
    cregs: tuple
    gate_defs: tuple
    statements: tuple
    origin: str = field(compare=False, default="<inline>")

    def n_qubits(self) -> int:
        return sum(size for _, size in self.qregs)

    def qubit_offset(self, reg: str) -> int:
        off = 0
        for name, size in self.qregs:
            if name == reg:
                return off
            off += size
        raise KeyError(reg)


def pretty_print(ast: Ast) -> str:
    """Render an Ast back to OpenQASM text; reparsing is structurally identical."""
    lines = [f"OPENQASM {ast.version[0]}.{ast.version[1]};"]
    for inc in ast.includes:
        lines.append(f'include "{inc}";')
    for name, size in ast.qregs:
        lines.append(f"qreg {name}[{size}];")
    for name, size in ast.cregs:
        lines.append(f"creg {name}[{size}];")
    for gd in ast.gate_defs:
        lines.append(gd.pp())
    for stmt in ast.statements:
        lines.append(stmt.pp())
    return "\n".join(lines) + "\n"
