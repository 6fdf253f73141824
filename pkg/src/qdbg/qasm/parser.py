"""Recursive-descent parser with semantic checks for the OpenQASM 2.0 subset.

Every failure raises a located QasmSyntaxError or SemanticError; parsing
never crashes on malformed input.
"""

from ..errors import Location, QasmSyntaxError, SemanticError
from ..gates import QELIB1, SIGNATURES
from .ast import (Ast, Barrier, BinOp, BitRef, Expr, GateApply, GateDef, If,
                  Measure, Name, Neg, Num, Pi, Reset, SourceProgram)
from .lexer import Token, tokenize

_KEYWORDS = {"OPENQASM", "include", "qreg", "creg", "gate", "measure",
             "reset", "barrier", "if", "pi"}


class _Parser:
    def __init__(self, source: SourceProgram):
        self.origin = source.origin
        self.tokens = tokenize(source)
        self.pos = 0
        self.includes = []
        self.qregs = []
        self.cregs = []
        self.gate_defs = []
        self.statements = []

    # --- token helpers ---

    def end_loc(self):
        """Position to report for errors at end of input."""
        if self.tokens:
            return self.tokens[-1].loc
        return Location(self.origin, 1, 1)

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            raise QasmSyntaxError(self.end_loc(), "unexpected end of input")
        self.pos += 1
        return tok

    def expect(self, kind, what=None):
        tok = self.peek()
        if tok is None or tok.kind != kind:
            got = tok.kind if tok else "end of input"
            loc = tok.loc if tok else self.end_loc()
            raise QasmSyntaxError(loc, f"expected {what or kind}, got {got}")
        return self.next()

    def expect_id(self, value=None, what=None):
        tok = self.expect("ID", what or value or "identifier")
        if value is not None and tok.value != value:
            raise QasmSyntaxError(tok.loc, f"expected {value!r}, got {tok.value!r}")
        return tok

    # --- registers ---

    def reg_size(self, name, regs, tok):
        for rname, size in regs:
            if rname == name:
                return size
        raise SemanticError(tok.loc, f"undeclared register {name!r}")

    def known_gate_names(self):
        names = {"U", "CX"}
        if "qelib1.inc" in self.includes:
            names |= QELIB1
        names |= {gd.name for gd in self.gate_defs}
        return names

    # --- grammar ---

    def parse(self) -> Ast:
        tok = self.expect_id("OPENQASM")
        vtok = self.next()
        if vtok.kind != "REAL" or vtok.value != 2.0:
            raise SemanticError(vtok.loc, f"unsupported OpenQASM version {vtok.value}")
        self.expect("SEMI", "';'")
        while self.peek() is not None:
            self.top_level()
        if not self.qregs:
            raise SemanticError(tok.loc, "program declares no quantum register")
        return Ast(
            version=(2, 0),
            includes=tuple(self.includes),
            qregs=tuple(self.qregs),
            cregs=tuple(self.cregs),
            gate_defs=tuple(self.gate_defs),
            statements=tuple(self.statements),
            origin=self.origin,
        )

    def top_level(self):
        tok = self.peek()
        if tok.kind != "ID":
            raise QasmSyntaxError(tok.loc, f"expected statement, got {tok.kind}")
        if tok.value == "include":
            self.next()
            name = self.expect("STRING", "include file name")
            self.expect("SEMI", "';'")
            if name.value != "qelib1.inc":
                raise SemanticError(name.loc, f"unknown include {name.value!r}")
            self.includes.append(name.value)
        elif tok.value in ("qreg", "creg"):
            self.next()
            name = self.expect_id()
            self.expect("LBRACK", "'['")
            size = self.expect("INT", "register size")
            self.expect("RBRACK", "']'")
            self.expect("SEMI", "';'")
            if size.value < 1:
                raise SemanticError(size.loc, f"register size must be >= 1")
            if any(name.value == n for n, _ in self.qregs + self.cregs):
                raise SemanticError(name.loc, f"register {name.value!r} already declared")
            (self.qregs if tok.value == "qreg" else self.cregs).append(
                (name.value, size.value))
        elif tok.value == "gate":
            self.gate_def()
        else:
            self.statements.append(self.statement())

    def gate_def(self):
        self.expect_id("gate")
        name = self.expect_id()
        if name.value in self.known_gate_names() or name.value in SIGNATURES:
            raise SemanticError(name.loc, f"gate {name.value!r} already defined")
        params = []
        if self.peek() and self.peek().kind == "LPAREN":
            self.next()
            if self.peek() and self.peek().kind != "RPAREN":
                params.append(self.expect_id().value)
                while self.peek() and self.peek().kind == "COMMA":
                    self.next()
                    params.append(self.expect_id().value)
            self.expect("RPAREN", "')'")
        qubits = [self.expect_id().value]
        while self.peek() and self.peek().kind == "COMMA":
            self.next()
            qubits.append(self.expect_id().value)
        self.expect("LBRACE", "'{'")
        body = []
        while self.peek() and self.peek().kind != "RBRACE":
            stmt = self.gate_body_stmt(name.value, params, qubits)
            if stmt is not None:
                body.append(stmt)
        self.expect("RBRACE", "'}'")
        self.gate_defs.append(GateDef(name.value, tuple(params), tuple(qubits),
                                      tuple(body)))

    def gate_body_stmt(self, def_name, formal_params, formal_qubits):
        tok = self.expect_id(what="gate name")
        gname = tok.value
        if gname == def_name:
            raise SemanticError(tok.loc, f"recursive gate {gname!r}")
        if gname == "barrier":
            # allowed in gate bodies by the grammar; drop it (no-op)
            while self.peek() and self.peek().kind != "SEMI":
                self.next()
            self.expect("SEMI", "';'")
            return None
        if gname not in self.known_gate_names():
            raise SemanticError(tok.loc, f"unknown gate {gname!r} in gate body")
        params = self.gate_params(allowed_names=formal_params)
        targets = [BitRef(self.expect_id().value)]
        while self.peek() and self.peek().kind == "COMMA":
            self.next()
            targets.append(BitRef(self.expect_id().value))
        self.expect("SEMI", "';'")
        for t in targets:
            if t.reg not in formal_qubits:
                raise SemanticError(tok.loc,
                                    f"gate body references non-formal {t.reg!r}")
        self.check_gate_call(gname, params, targets, tok)
        stmt = GateApply(gname, tuple(params), tuple(targets), tok.loc)
        return stmt

    def gate_params(self, allowed_names=()):
        params = []
        if self.peek() and self.peek().kind == "LPAREN":
            self.next()
            if self.peek() and self.peek().kind != "RPAREN":
                params.append(self.expr(allowed_names))
                while self.peek() and self.peek().kind == "COMMA":
                    self.next()
                    params.append(self.expr(allowed_names))
            self.expect("RPAREN", "')'")
        return params

    # precedence-climbing expression parser for angles
    def expr(self, allowed_names):
        left = self.term(allowed_names)
        while self.peek() and self.peek().kind in ("PLUS", "MINUS"):
            op = self.next()
            right = self.term(allowed_names)
            left = BinOp("+" if op.kind == "PLUS" else "-", left, right)
        return left

    def term(self, allowed_names):
        left = self.factor(allowed_names)
        while self.peek() and self.peek().kind in ("STAR", "SLASH"):
            op = self.next()
            right = self.factor(allowed_names)
            left = BinOp("*" if op.kind == "STAR" else "/", left, right)
        return left

    def factor(self, allowed_names) -> Expr:
        tok = self.next()
        if tok.kind == "MINUS":
            return Neg(self.factor(allowed_names))
        if tok.kind in ("INT", "REAL"):
            return Num(float(tok.value))
        if tok.kind == "LPAREN":
            e = self.expr(allowed_names)
            self.expect("RPAREN", "')'")
            return e
        if tok.kind == "ID":
            if tok.value == "pi":
                return Pi()
            if tok.value in allowed_names:
                return Name(tok.value)
            raise SemanticError(tok.loc, f"unknown name {tok.value!r} in expression")
        raise QasmSyntaxError(tok.loc, f"expected expression, got {tok.kind}")

    # --- main-program statements ---

    def statement(self):
        tok = self.peek()
        if tok.value == "if":
            return self.if_stmt()
        return self.simple_stmt()

    def if_stmt(self):
        tok = self.expect_id("if")
        self.expect("LPAREN", "'('")
        creg = self.expect_id()
        size = self.reg_size(creg.value, self.cregs, creg)
        self.expect("EQEQ", "'=='")
        val = self.expect("INT", "comparison value")
        if val.value >= (1 << size):
            raise SemanticError(val.loc,
                                f"comparison value {val.value} out of range for "
                                f"{size}-bit register {creg.value!r}")
        self.expect("RPAREN", "')'")
        inner = self.simple_stmt()
        if isinstance(inner, (Barrier, If)):
            raise SemanticError(tok.loc, "if may only guard a gate, measure, or reset")
        return If(creg.value, val.value, inner, tok.loc)

    def simple_stmt(self):
        tok = self.expect_id(what="statement")
        name = tok.value
        if name == "measure":
            q = self.bit_ref(self.qregs)
            self.expect("ARROW", "'->'")
            c = self.bit_ref(self.cregs)
            self.expect("SEMI", "';'")
            return Measure(q, c, tok.loc)
        if name == "reset":
            q = self.bit_ref(self.qregs)
            self.expect("SEMI", "';'")
            return Reset(q, tok.loc)
        if name == "barrier":
            targets = [self.bit_ref(self.qregs)]
            while self.peek() and self.peek().kind == "COMMA":
                self.next()
                targets.append(self.bit_ref(self.qregs))
            self.expect("SEMI", "';'")
            return Barrier(tuple(targets), tok.loc)
        if name in _KEYWORDS:
            raise QasmSyntaxError(tok.loc, f"unexpected keyword {name!r}")
        if name not in self.known_gate_names():
            raise SemanticError(tok.loc, f"unknown gate {name!r}")
        params = self.gate_params()
        targets = [self.bit_ref(self.qregs)]
        while self.peek() and self.peek().kind == "COMMA":
            self.next()
            targets.append(self.bit_ref(self.qregs))
        self.expect("SEMI", "';'")
        self.check_gate_call(name, params, targets, tok)
        indexed = [t for t in targets if t.index is not None]
        if len({(t.reg, t.index) for t in indexed}) != len(indexed):
            raise SemanticError(tok.loc, "gate targets must be distinct")
        return GateApply(name, tuple(params), tuple(targets), tok.loc)

    def check_gate_call(self, name, params, targets, tok):
        if name in SIGNATURES:
            n_params, n_qubits = SIGNATURES[name]
        else:
            gd = next(g for g in self.gate_defs if g.name == name)
            n_params, n_qubits = len(gd.params), len(gd.qubits)
        if len(params) != n_params:
            raise SemanticError(tok.loc,
                                f"gate {name!r} takes {n_params} parameter(s), "
                                f"got {len(params)}")
        if len(targets) != n_qubits:
            raise SemanticError(tok.loc,
                                f"gate {name!r} takes {n_qubits} qubit(s), "
                                f"got {len(targets)}")

    def bit_ref(self, regs) -> BitRef:
        name = self.expect_id(what="register name")
        size = self.reg_size(name.value, regs, name)
        if self.peek() and self.peek().kind == "LBRACK":
            self.next()
            idx = self.expect("INT", "index")
            self.expect("RBRACK", "']'")
            if not (0 <= idx.value < size):
                raise SemanticError(idx.loc,
                                    f"index {idx.value} out of bounds for "
                                    f"{name.value!r}[{size}]")
            return BitRef(name.value, idx.value)
        return BitRef(name.value)


def parse(source) -> Ast:
    """Parse QASM text (or a SourceProgram) into a checked Ast."""
    if isinstance(source, str):
        source = SourceProgram(source)
    return _Parser(source).parse()
