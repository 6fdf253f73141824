"""Newline-delimited JSON debug protocol over stdio or TCP.

One session per connection.  Every request line gets exactly one response;
`stopped` events are pushed between response boundaries after step/continue.
Malformed lines produce a bad_request response (or a DecodeError log entry
when no id can be recovered) and never kill the connection.
"""

import json
import socket
import socketserver
import sys
import threading

from .errors import (BreakpointIndexError, CapacityError, DecodeError,
                     DegenerateState, DomainMismatch, ForcedOutcomeImpossible,
                     ProvenanceUnavailable, QdbgError, SessionFinished,
                     SizeError, SourceError, SubsetError, TargetError)
from .engine import DebugSession, export_io_log, launch
from .qasm import parse
from .qasm.ast import SourceProgram
from .qasm.expand import format_flat

DEFAULT_PORT = 7331
MAX_LINE = 16 * 1024 * 1024

_ERROR_CODES = [
    (SessionFinished, "finished"),
    (SourceError, "parse_error"),
    (CapacityError, "capacity"),
    (BreakpointIndexError, "bad_index"),
    (SubsetError, "bad_subset"),
    (TargetError, "bad_target"),
    (SizeError, "bad_size"),
    (ProvenanceUnavailable, "no_provenance"),
    (ForcedOutcomeImpossible, "impossible_outcome"),
    (DomainMismatch, "domain_mismatch"),
    (DegenerateState, "degenerate_state"),
    (QdbgError, "error"),
]


def error_code(exc) -> str:
    for cls, code in _ERROR_CODES:
        if isinstance(exc, cls):
            return code
    return "internal"


def encode(message: dict) -> str:
    """One UTF-8 JSON line, no embedded newlines."""
    return json.dumps(message, separators=(",", ":")) + "\n"


def decode(line: str, line_number: int = 0) -> dict:
    if len(line) > MAX_LINE:
        raise DecodeError(line_number, "line exceeds 16 MiB")
    try:
        msg = json.loads(line)
    except json.JSONDecodeError as exc:
        raise DecodeError(line_number, f"invalid JSON: {exc.msg}") from exc
    if not isinstance(msg, dict):
        raise DecodeError(line_number, "message must be a JSON object")
    return msg


class ProtocolHandler:
    """Per-connection command dispatcher; transport-agnostic."""

    def __init__(self):
        self.session: DebugSession = None
        self.line_number = 0
        self.closed = False

    def handle_line(self, line: str):
        """Process one request line; returns the output lines to send."""
        self.line_number += 1
        line = line.strip()
        if not line:
            return []
        try:
            msg = decode(line, self.line_number)
        except DecodeError as exc:
            return [encode({"id": None, "ok": False,
                            "error": {"code": "bad_request", "message": str(exc)}})]
        req_id = msg.get("id")
        cmd = msg.get("cmd")
        args = msg.get("args") or {}
        if not isinstance(cmd, str) or not isinstance(args, dict):
            return [encode({"id": req_id, "ok": False,
                            "error": {"code": "bad_request",
                                      "message": "request needs cmd:str and args:object"}})]
        try:
            result, events = self.dispatch(cmd, args)
        except QdbgError as exc:
            return [encode({"id": req_id, "ok": False,
                            "error": {"code": error_code(exc), "message": str(exc)}})]
        except (KeyError, TypeError, ValueError) as exc:
            return [encode({"id": req_id, "ok": False,
                            "error": {"code": "bad_request", "message": str(exc)}})]
        out = [encode({"id": req_id, "ok": True, "result": result})]
        out.extend(encode({"event": name, "body": body}) for name, body in events)
        return out

    def require_session(self) -> DebugSession:
        if self.session is None:
            raise QdbgError("no session launched")
        return self.session

    def dispatch(self, cmd: str, args: dict):
        events = []
        if cmd == "launch":
            source = SourceProgram(args["source"], args.get("origin", "<protocol>"))
            ast = parse(source)
            self.session = launch(ast, int(args.get("seed", 0)))
            flat = [{"index": i, "text": format_flat(st),
                     "line": st.span.line if st.span else None}
                    for i, st in enumerate(self.session.program)]
            return {"session": self.session.id,
                    "qubits": self.session.state.n_qubits,
                    "cregs": {n: s for n, s in ast.cregs},
                    "program": flat}, events
        if cmd == "step":
            session = self.require_session()
            ev = session.step(force=args.get("force"))
            events.append(("stopped", ev))
            return ev, events
        if cmd == "continue":
            session = self.require_session()
            ev = session.continue_run()
            events.append(("stopped", ev))
            return ev, events
        if cmd == "setBreakpoint":
            self.require_session().set_breakpoint(int(args["index"]))
            return {"breakpoints": sorted(self.session.breakpoints)}, events
        if cmd == "clearBreakpoint":
            self.require_session().clear_breakpoint(int(args["index"]))
            return {"breakpoints": sorted(self.session.breakpoints)}, events
        if cmd == "inspect":
            session = self.require_session()
            kind = args.pop("kind")
            return session.inspect(kind, **args), events
        if cmd == "runShots":
            from .stats import run_shots
            session = self.require_session()
            dist = run_shots(session.ast, int(args.get("shots", 1024)),
                             int(args.get("seed", session.seed)))
            return {"shots": dist.shots, "counts": dist.counts}, events
        if cmd == "exportLog":
            session = self.require_session()
            return {"log": export_io_log(session)}, events
        if cmd == "disconnect":
            self.closed = True
            return {"bye": True}, events
        raise QdbgError(f"unknown command {cmd!r}")


def serve_stdio(stdin=None, stdout=None):
    """Serve a single session over stdin/stdout."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    handler = ProtocolHandler()
    for line in stdin:
        for out in handler.handle_line(line):
            stdout.write(out)
        stdout.flush()
        if handler.closed:
            break


class _TcpHandler(socketserver.StreamRequestHandler):
    def handle(self):
        handler = ProtocolHandler()
        while not handler.closed:
            raw = self.rfile.readline(MAX_LINE + 2)
            if not raw:
                break
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError:
                self.wfile.write(encode(
                    {"id": None, "ok": False,
                     "error": {"code": "bad_request",
                               "message": "invalid UTF-8"}}).encode())
                continue
            for out in handler.handle_line(line):
                self.wfile.write(out.encode("utf-8"))


class _Server(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True


def serve_tcp(host: str = "127.0.0.1", port: int = DEFAULT_PORT, background=False):
    """Serve sessions over TCP; one independent session per connection."""
    server = _Server((host, port), _TcpHandler)
    if background:
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        return server
    try:
        server.serve_forever()
    finally:
        server.server_close()


class ProtocolClient:
    """Minimal blocking client for tests and scripting."""

    def __init__(self, host="127.0.0.1", port=DEFAULT_PORT):
        self.sock = socket.create_connection((host, port))
        # separate reader and writer: a shared rw file can drop buffered
        # unread lines when written to
        self.reader = self.sock.makefile("r", encoding="utf-8", newline="\n")
        self.writer = self.sock.makefile("w", encoding="utf-8", newline="\n")
        self.next_id = 1
        self.events = []

    def request(self, cmd: str, **args):
        req_id = self.next_id
        self.next_id += 1
        self.writer.write(encode({"id": req_id, "cmd": cmd, "args": args}))
        self.writer.flush()
        while True:
            line = self.reader.readline()
            if not line:
                raise QdbgError("connection closed")
            msg = json.loads(line)
            if "event" in msg:
                self.events.append(msg)
                continue
            return msg

    def drain_events(self, n=1):
        """Read n pending event messages (sent after the response)."""
        while len(self.events) < n:
            line = self.reader.readline()
            if not line:
                break
            msg = json.loads(line)
            if "event" in msg:
                self.events.append(msg)
        out, self.events = self.events[:n], self.events[n:]
        return out

    def close(self):
        try:
            self.sock.close()
        except OSError:
            pass
