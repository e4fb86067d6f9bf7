"""A text-protocol session with an external SMT-LIB v2 solver process.

The session keeps a log of every state-changing command.  When a query
overruns its deadline the process is killed, respawned and the log replayed,
so a timeout costs time but never loses assertions.
"""

from __future__ import annotations

import os
import queue
import shlex
import subprocess
import threading
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Union

from .errors import ProtocolError, SolverCrashed, SpawnError

ENV_VAR = "MIVCKIT_SOLVER"
DEFAULT_COMMAND = "z3 -in -smt2"


def default_command() -> tuple:
    return tuple(shlex.split(os.environ.get(ENV_VAR) or DEFAULT_COMMAND))


@dataclass(frozen=True)
class SolverConfig:
    command: tuple = field(default_factory=default_command)
    logic: str = "QF_LIRA"
    timeout_ms: int = 60_000
    unsat_cores: bool = True
    # best-effort options; a solver that rejects them is still usable
    options: tuple = (("smt.core.minimize", "true"),)
    # extra wall time granted before the watchdog kills a query
    watchdog_slack_ms: int = 2_000
    # deadline for commands other than check-sat
    command_timeout_ms: int = 30_000

    def __post_init__(self):
        if self.timeout_ms <= 0:
            raise ValueError("solver timeout must be positive")
        if isinstance(self.command, str):
            object.__setattr__(self, "command", tuple(shlex.split(self.command)))


@dataclass(frozen=True)
class Sat:
    model: dict


@dataclass(frozen=True)
class Unsat:
    core: frozenset


@dataclass(frozen=True)
class Unknown:
    reason: str  # "timeout" | "unknown" | free text from the solver


SatResult = Union[Sat, Unsat, Unknown]


# -- s-expressions -------------------------------------------------------------------


def tokenize(text: str) -> list:
    out, i, n = [], 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()":
            out.append(c)
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c == "|":
            j = text.index("|", i + 1)
            out.append(text[i + 1 : j])
            i = j + 1
        elif c == '"':
            j = i + 1
            while True:
                j = text.index('"', j)
                if j + 1 < n and text[j + 1] == '"':
                    j += 2
                    continue
                break
            out.append(text[i : j + 1])
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in '()|";':
                j += 1
            out.append(text[i:j])
            i = j
    return out


def parse_sexprs(text: str) -> list:
    """All complete s-expressions in ``text``, as nested lists of atoms."""
    stack: list = [[]]
    for tok in tokenize(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise ProtocolError(f"unbalanced solver output: {text!r}")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        raise ProtocolError(f"incomplete solver output: {text!r}")
    return stack[0]


def _balance(line: str, depth: int, in_string: bool, in_quote: bool):
    for c in line:
        if in_string:
            if c == '"':
                in_string = False
        elif in_quote:
            if c == "|":
                in_quote = False
        elif c == '"':
            in_string = True
        elif c == "|":
            in_quote = True
        elif c == "(":
            depth += 1
        elif c == ")":
            depth -= 1
    return depth, in_string, in_quote


def parse_value(sx, sort: Optional[str] = None):
    """Decode a solver value: ``true``, ``5``, ``1.5``, ``(- 2.0)``, ``(/ 1.0 3.0)``."""
    if isinstance(sx, str):
        if sx == "true":
            return True
        if sx == "false":
            return False
        if "." in sx:
            v = Fraction(sx)
            return v
        try:
            v = int(sx)
        except ValueError as exc:
            raise ProtocolError(f"cannot decode value {sx!r}") from exc
        return Fraction(v) if sort == "real" else v
    if len(sx) == 2 and sx[0] == "-":
        return -parse_value(sx[1], sort)
    if len(sx) == 3 and sx[0] == "/":
        return Fraction(parse_value(sx[1], "real")) / Fraction(parse_value(sx[2], "real"))
    if len(sx) == 2 and sx[0] == "to_real":
        return Fraction(parse_value(sx[1], "int"))
    raise ProtocolError(f"cannot decode value {sx!r}")


def quote(name: str) -> str:
    """SMT-LIB quoted symbol; names here never contain ``|`` or ``\\``."""
    return f"|{name}|"


# -- session -------------------------------------------------------------------------


class Session:
    """One solver process.  Not thread-safe: a session has a single owner."""

    def __init__(self, cfg: Optional[SolverConfig] = None):
        self.cfg = cfg or SolverConfig()
        self.log: list = []
        self.declared: dict = {}
        self.labels: set = set()
        self.depth = 0
        self.timeouts = 0
        self.restarts = 0
        self.queries = 0
        self._timeout_set: Optional[int] = None
        self.proc = None
        self._spawn()
        self.identity = self._identity()

    # -- process handling --
    def _spawn(self):
        try:
            self.proc = subprocess.Popen(
                list(self.cfg.command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                bufsize=1,
            )
        except (OSError, ValueError) as exc:
            raise SpawnError(f"cannot start solver {' '.join(self.cfg.command)!r}: {exc}") from exc
        self.lines: queue.Queue = queue.Queue()
        threading.Thread(target=self._pump, args=(self.proc, self.lines), daemon=True).start()
        self._timeout_set = None
        try:
            self._send("(set-option :print-success true)")
            self._expect_success()
        except SolverCrashed as exc:
            self._kill()
            raise SpawnError(f"solver {' '.join(self.cfg.command)!r} did not answer: {exc}") from exc
        self._command("(set-option :produce-models true)")
        if self.cfg.unsat_cores:
            self._command("(set-option :produce-unsat-cores true)")
        for key, value in self.cfg.options:
            try:
                self._command(f"(set-option :{key} {value})")
            except ProtocolError:
                pass
        self._command(f"(set-logic {self.cfg.logic})")

    @staticmethod
    def _pump(proc, lines):
        for line in proc.stdout:
            lines.put(line)
        lines.put(None)

    def _kill(self):
        if self.proc is None:
            return
        try:
            self.proc.kill()
        except OSError:
            pass
        try:
            self.proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            pass
        # stdout belongs to the reader thread, which stops at end of file
        try:
            self.proc.stdin.close()
        except OSError:
            pass
        self.proc = None

    def _restart(self):
        self.restarts += 1
        self._kill()
        self._spawn()
        for cmd in self.log:
            self._command(cmd, record=False)

    def _identity(self) -> str:
        parts = []
        for key in (":name", ":version"):
            try:
                self._send(f"(get-info {key})")
                sx = self._read_sexpr(self.cfg.command_timeout_ms)
                if isinstance(sx, list) and len(sx) >= 2:
                    parts.append(sx[1].strip('"'))
            except ProtocolError:
                pass
        return " ".join(parts) or " ".join(self.cfg.command)

    # -- wire protocol --
    def _send(self, text: str):
        if self.proc is None or self.proc.poll() is not None:
            raise SolverCrashed("solver process is not running")
        try:
            self.proc.stdin.write(text + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise SolverCrashed(f"lost connection to solver: {exc}") from exc

    def _read_text(self, timeout_ms: float) -> Optional[str]:
        """One complete response; None if the deadline passes first."""
        deadline = time.monotonic() + timeout_ms / 1000
        buf, depth, in_string, in_quote = [], 0, False, False
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                return None
            try:
                line = self.lines.get(timeout=remaining)
            except queue.Empty:
                return None
            if line is None:
                raise SolverCrashed("solver process exited")
            if not buf and not line.strip():
                continue
            buf.append(line)
            depth, in_string, in_quote = _balance(line, depth, in_string, in_quote)
            if depth <= 0 and not in_string and not in_quote:
                return "".join(buf)

    def _read_sexpr(self, timeout_ms: float):
        text = self._read_text(timeout_ms)
        if text is None:
            raise SolverCrashed("solver did not answer in time")
        items = parse_sexprs(text)
        if len(items) != 1:
            raise ProtocolError(f"unexpected solver output {text!r}")
        sx = items[0]
        if isinstance(sx, list) and sx and sx[0] == "error":
            raise ProtocolError(f"solver error: {' '.join(map(str, sx[1:]))}")
        return sx

    def _expect_success(self):
        sx = self._read_sexpr(self.cfg.command_timeout_ms)
        if sx != "success":
            raise ProtocolError(f"expected 'success', got {sx!r}")

    def _command(self, cmd: str, record: bool = False):
        self._send(cmd)
        self._expect_success()
        if record:
            self.log.append(cmd)

    # -- public API --
    def declare(self, name: str, sort: str) -> None:
        """Declare a constant of sort ``bool``, ``int`` or ``real`` (idempotent)."""
        if name in self.declared:
            if self.declared[name] != sort:
                raise ProtocolError(f"{name} redeclared with sort {sort}")
            return
        smt = {"bool": "Bool", "int": "Int", "real": "Real"}[sort]
        self._command(f"(declare-const {quote(name)} {smt})", record=True)
        self.declared[name] = sort

    def assert_formula(self, formula: str) -> None:
        self._command(f"(assert {formula})", record=True)

    def assert_labeled(self, label: str, formula: str) -> None:
        """Assert ``label => formula`` where ``label`` is a fresh Boolean
        that later checks switch on by naming it among the assumptions."""
        if label in self.labels:
            raise ProtocolError(f"activation label {label} already used")
        self.declare(label, "bool")
        self.labels.add(label)
        self.assert_formula(f"(=> {quote(label)} {formula})")

    def push(self) -> None:
        self._command("(push 1)", record=True)
        self.depth += 1

    def pop(self) -> None:
        if self.depth == 0:
            raise ProtocolError("pop on an empty assertion stack")
        self._command("(pop 1)", record=True)
        self.depth -= 1
        # declarations made inside the scope are gone; forget them conservatively
        self.declared = {k: v for k, v in self.declared.items() if self._still_declared(k)}

    def _still_declared(self, name: str) -> bool:
        decl = f"(declare-const {quote(name)} "
        stack = [set()]
        for cmd in self.log:
            if cmd == "(push 1)":
                stack.append(set())
            elif cmd == "(pop 1)":
                stack.pop()
            elif cmd.startswith(decl):
                stack[-1].add(name)
        return any(name in s for s in stack)

    def check_assuming(
        self,
        active: Iterable[str],
        values: Iterable[str] = (),
        timeout_ms: Optional[int] = None,
        want_core: bool = True,
    ) -> SatResult:
        """Check satisfiability with the given labels assumed true.

        Sat carries values of the requested declared names, Unsat a core
        that is a subset of ``active`` (all of ``active`` when ``want_core``
        is false or cores are disabled).
        """
        active = list(dict.fromkeys(active))
        for a in active:
            if a not in self.declared:
                raise ProtocolError(f"assumption {a} was never declared")
        limit = int(timeout_ms if timeout_ms is not None else self.cfg.timeout_ms)
        if limit <= 0:
            return Unknown("timeout")
        if self._timeout_set != limit:
            self._command(f"(set-option :timeout {limit})")
            self._timeout_set = limit
        self.queries += 1
        self._send(f"(check-sat-assuming ({' '.join(quote(a) for a in active)}))")
        text = self._read_text(limit + max(self.cfg.watchdog_slack_ms, limit // 2))
        if text is None:
            self.timeouts += 1
            self._restart()
            return Unknown("timeout")
        answer = parse_sexprs(text)
        answer = answer[0] if len(answer) == 1 else answer
        if answer == "unsat":
            core = self._unsat_core(active) if self.cfg.unsat_cores and want_core else frozenset(active)
            return Unsat(core)
        if answer == "sat":
            return Sat(self.get_values(values))
        if answer == "unknown":
            reason = self._reason_unknown()
            if "timeout" in reason or "canceled" in reason or "resource" in reason:
                self.timeouts += 1
                return Unknown("timeout")
            return Unknown(reason or "unknown")
        if isinstance(answer, list) and answer and answer[0] == "error":
            raise ProtocolError(f"solver error: {' '.join(map(str, answer[1:]))}")
        raise ProtocolError(f"unexpected answer to check-sat: {text!r}")

    def check(self, timeout_ms: Optional[int] = None) -> SatResult:
        return self.check_assuming((), (), timeout_ms)

    def _unsat_core(self, active) -> frozenset:
        self._send("(get-unsat-core)")
        sx = self._read_sexpr(self.cfg.command_timeout_ms)
        if not isinstance(sx, list):
            sx = [sx]
        allowed = set(active)
        core = frozenset(x for x in sx if isinstance(x, str) and x in allowed)
        return core

    def _reason_unknown(self) -> str:
        try:
            self._send("(get-info :reason-unknown)")
            sx = self._read_sexpr(self.cfg.command_timeout_ms)
        except ProtocolError:
            return "unknown"
        if isinstance(sx, list) and len(sx) >= 2:
            return str(sx[1]).strip('"')
        return "unknown"

    def get_values(self, names: Iterable[str]) -> dict:
        names = list(names)
        if not names:
            return {}
        out = {}
        for start in range(0, len(names), 200):
            chunk = names[start : start + 200]
            self._send(f"(get-value ({' '.join(quote(n) for n in chunk)}))")
            sx = self._read_sexpr(self.cfg.command_timeout_ms)
            for pair in sx:
                name, value = pair[0], pair[1]
                out[name] = parse_value(value, self.declared.get(name))
        return out

    def close(self) -> None:
        if self.proc is None:
            return
        try:
            self._send("(exit)")
            self.proc.wait(timeout=2)
        except (SolverCrashed, subprocess.TimeoutExpired, OSError):
            pass
        self._kill()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def __del__(self):
        try:
            self.close()
        except Exception:
            pass


def open_session(cfg: Optional[SolverConfig] = None) -> Session:
    return Session(cfg)
