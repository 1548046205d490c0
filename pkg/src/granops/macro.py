"""A small macro dialect for driving the runtime.

Scripts are sequences of ``;``-terminated statements::

    // line comments
    sigma = 1.5;
    Ext.CLIJ2_push(input);
    Ext.CLIJ2_gaussianBlur2D(input, blurred, sigma, sigma);
    Ext.CLIJ2_pull(blurred);

Op names may carry an ``Ext.CLIJ2_``/``Ext.CLIJx_``/``Ext.CLIJ_`` prefix or
be bare.  An output argument naming an unassigned variable gets a fresh
buffer name.  There are no loops or user functions: per-frame iteration is
the host's job (see :class:`ScriptSegmenter`).
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Union

from .errors import ArityError, GranopsError, ScriptRuntimeError, ScriptSyntaxError, UnknownOpError
from .registry import IMAGE_IN, IMAGE_OUT, OPS
from .runtime import Runtime, fresh_name, strip_prefix

log = logging.getLogger(__name__)

SCRIPT_SUFFIX = ".cmacro"

# name -> number of arguments
BUILTINS = {
    "push": 1,
    "pushCurrentSlice": 1,
    "pull": 1,
    "pullAsROI": 1,
    "pullAsMask": 1,
    "clear": 0,
    "reportMemory": 0,
    "startTimeTracing": 0,
    "stopTimeTracing": 0,
    "getTimeTracing": 1,
}
# called without an Ext. prefix; print is variadic
HOST_FUNCTIONS = {"print": None, "run": None}
GPU_INIT = "CLIJ2 Macro Extensions"


@dataclass(frozen=True)
class Ident:
    name: str


Arg = Union[Ident, float, str]


@dataclass(frozen=True)
class Assign:
    name: str
    value: float | str
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class OpCall:
    op: str
    args: tuple
    prefix: str = field(default="", compare=False)
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Comment:
    text: str
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


Statement = Union[Assign, OpCall, Comment]


@dataclass(frozen=True)
class Script:
    statements: tuple

    def __iter__(self):
        return iter(self.statements)

    def __len__(self):
        return len(self.statements)


# ---------------------------------------------------------------------------
# lexing

_TOKEN = re.compile(r"""
    (?P<comment>//[^\n]*)
  | (?P<ws>[ \t\r\f\v]+)
  | (?P<newline>\n)
  | (?P<number>-?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<punct>[(),;=])
""", re.VERBOSE)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text):
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            ch = text[pos]
            if ch == '"':
                raise ScriptSyntaxError("unterminated string literal", line, col)
            raise ScriptSyntaxError(f"unexpected character {ch!r}", line, col)
        kind = m.lastgroup
        if kind == "newline":
            line += 1
            line_start = m.end()
        elif kind != "ws":
            yield _Tok(kind, m.group(), line, col)
        pos = m.end()
    yield _Tok("eof", "", line, pos - line_start + 1)


def _unquote(s):
    return re.sub(r"\\(.)", lambda m: {"n": "\n", "t": "\t"}.get(m.group(1), m.group(1)), s[1:-1])


def _quote(s):
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t") + '"'


# ---------------------------------------------------------------------------
# parsing


def _resolve_op(raw, tok):
    """Return (canonical name, prefix, arity or None)."""
    name = strip_prefix(raw)
    prefix = raw[:len(raw) - len(name)]
    if name == raw and raw.startswith("Ext."):
        raise UnknownOpError(f"unknown extension {raw!r}", tok.line, tok.column)
    if name in OPS:
        return name, prefix, OPS[name].arity
    if name in BUILTINS:
        return name, prefix, BUILTINS[name]
    if not prefix and name in HOST_FUNCTIONS:
        return name, prefix, HOST_FUNCTIONS[name]
    raise UnknownOpError(f"unknown op {raw!r}", tok.line, tok.column)


class _Parser:
    def __init__(self, text):
        self.toks = list(_tokenize(text))
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, text, what=None):
        tok = self.next()
        if tok.text != text or tok.kind in ("string", "eof") and text:
            found = "end of input" if tok.kind == "eof" else repr(tok.text)
            raise ScriptSyntaxError(f"expected {what or repr(text)}, found {found}", tok.line, tok.column)
        return tok

    def literal_or_ident(self):
        tok = self.next()
        if tok.kind == "number":
            return float(tok.text)
        if tok.kind == "string":
            return _unquote(tok.text)
        if tok.kind == "ident":
            return Ident(tok.text)
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ScriptSyntaxError(f"expected a name, number or string, found {found}", tok.line, tok.column)

    def statement(self):
        tok = self.next()
        if tok.kind == "comment":
            return Comment(tok.text[2:].strip(), tok.line, tok.column)
        if tok.kind != "ident":
            raise ScriptSyntaxError(f"expected a statement, found {tok.text!r}", tok.line, tok.column)
        after = self.peek()
        if after.text == "=" and after.kind == "punct":
            self.next()
            value_tok = self.peek()
            value = self.literal_or_ident()
            if isinstance(value, Ident):
                raise ScriptSyntaxError("assignments take a number or string literal",
                                        value_tok.line, value_tok.column)
            self.expect(";")
            return Assign(tok.text, value, tok.line, tok.column)
        if after.text == "(" and after.kind == "punct":
            self.next()
            args = []
            if self.peek().text != ")" or self.peek().kind != "punct":
                args.append(self.literal_or_ident())
                while self.peek().text == "," and self.peek().kind == "punct":
                    self.next()
                    args.append(self.literal_or_ident())
            self.expect(")", "',' or ')'")
            self.expect(";")
            name, prefix, arity = _resolve_op(tok.text, tok)
            if arity is not None and len(args) != arity:
                raise ArityError(f"{name} takes {arity} arguments, got {len(args)}", tok.line, tok.column)
            return OpCall(name, tuple(args), prefix, tok.line, tok.column)
        found = "end of input" if after.kind == "eof" else repr(after.text)
        raise ScriptSyntaxError(f"expected '=' or '(' after {tok.text!r}, found {found}", after.line, after.column)

    def script(self):
        out = []
        while self.peek().kind != "eof":
            out.append(self.statement())
        return Script(tuple(out))


def parse_script(text: str) -> Script:
    """Parse macro source; errors carry 1-based line and column."""
    return _Parser(text).script()


def load_script(path) -> Script:
    return parse_script(Path(path).read_text(encoding="utf-8"))


def _format_value(v):
    if isinstance(v, Ident):
        return v.name
    if isinstance(v, str):
        return _quote(v)
    v = float(v)
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def format_script(script: Script) -> str:
    lines = []
    for st in script:
        if isinstance(st, Comment):
            lines.append(f"// {st.text}")
        elif isinstance(st, Assign):
            lines.append(f"{st.name} = {_format_value(st.value)};")
        else:
            prefix = st.prefix
            if not prefix and st.op not in HOST_FUNCTIONS:
                prefix = "Ext.CLIJ2_"
            lines.append(f"{prefix}{st.op}({', '.join(_format_value(a) for a in st.args)});")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# execution


class Interpreter:
    """Executes scripts against one runtime.

    Parameters
    ----------
    rt : Runtime
    inputs : dict
        Images available to ``push``; keyed by the pushed variable's string
        value or, for unassigned variables, by the variable name.
    overrides : dict
        Variable values that win over assignments in the script.
    """

    def __init__(self, rt: Runtime, inputs=None, overrides=None):
        self.rt = rt
        self.inputs = dict(inputs or {})
        self.overrides = dict(overrides or {})
        self.vars: dict[str, float | str] = dict(self.overrides)
        self.outputs = {}
        self.output_buffers = {}
        self.log: list[str] = []
        self.last_pulled: str | None = None

    def _fail(self, st, message, cause=None):
        err = ScriptRuntimeError(message, st.line, st.column)
        if cause is not None:
            raise err from cause
        raise err

    def _buffer(self, st, arg):
        if isinstance(arg, Ident):
            value = self.vars.get(arg.name, arg.name)
            if not isinstance(value, str):
                self._fail(st, f"{arg.name!r} holds a number, not an image name")
            return value
        if isinstance(arg, str):
            return arg
        self._fail(st, f"expected an image name, got number {arg!r}")

    def _number(self, st, arg):
        if isinstance(arg, Ident):
            if arg.name not in self.vars:
                self._fail(st, f"variable {arg.name!r} is not assigned")
            arg = self.vars[arg.name]
        if isinstance(arg, str):
            self._fail(st, f"expected a number, got string {arg!r}")
        return float(arg)

    def _output(self, st, arg):
        if isinstance(arg, Ident) and arg.name not in self.vars:
            self.vars[arg.name] = fresh_name(st.op)
        return self._buffer(st, arg)

    def _label(self, arg):
        return arg.name if isinstance(arg, Ident) else str(arg)

    def run(self, script: Script) -> dict:
        for st in script:
            if isinstance(st, Comment):
                continue
            if isinstance(st, Assign):
                if st.name not in self.overrides:
                    self.vars[st.name] = st.value
                continue
            try:
                self._call(st)
            except ScriptRuntimeError:
                raise
            except GranopsError as exc:
                self._fail(st, f"{st.op}: {exc}", exc)
        return self.outputs

    def _call(self, st: OpCall):
        rt, op, args = self.rt, st.op, st.args
        if op in ("push", "pushCurrentSlice"):
            key = self._buffer(st, args[0])
            alt = self._label(args[0])
            img = self.inputs.get(key, self.inputs.get(alt))
            if img is None:
                self._fail(st, f"no input image bound to {alt!r}")
            rt.push(key, img)
        elif op in ("pull", "pullAsROI", "pullAsMask"):
            name = self._buffer(st, args[0])
            img = rt.pull_as_mask(name) if op != "pull" else rt.pull(name)
            label = self._label(args[0])
            self.outputs[label] = img
            self.output_buffers[label] = name
            self.last_pulled = name
        elif op == "clear":
            rt.clear()
        elif op == "reportMemory":
            self.log.append(rt.report_memory_text())
        elif op == "startTimeTracing":
            rt.start_time_tracing()
        elif op == "stopTimeTracing":
            rt.stop_time_tracing()
        elif op == "getTimeTracing":
            if not isinstance(args[0], Ident):
                self._fail(st, "getTimeTracing needs a variable to store the trace in")
            self.vars[args[0].name] = rt.get_time_tracing()[0]
        elif op == "print":
            self.log.append("".join(str(self.vars.get(a.name, a.name)) if isinstance(a, Ident) else
                                    (str(a) if isinstance(a, str) else repr(a)) for a in args))
        elif op == "run":
            if args and args[0] == GPU_INIT:
                log.warning("device selection %r ignored", args[1] if len(args) > 1 else "")
            else:
                self._fail(st, f"run({self._label(args[0]) if args else ''}) is not supported")
        else:
            spec = OPS[op]
            values = []
            for param, arg in zip(spec.params, args):
                if param.kind == IMAGE_IN:
                    values.append(self._buffer(st, arg))
                elif param.kind == IMAGE_OUT:
                    values.append(self._output(st, arg))
                else:
                    values.append(self._number(st, arg))
            rt.execute(op, *values)


def run_script(script: Script | str, rt: Runtime, inputs=None, overrides=None) -> dict:
    """Execute ``script``; returns pulled images keyed by the pulled variable name."""
    if isinstance(script, str):
        script = parse_script(script)
    return Interpreter(rt, inputs, overrides).run(script)


# ---------------------------------------------------------------------------
# shipped scripts


def shipped_script_path(variant: str) -> Path:
    return Path(str(resources.files("granops") / "scripts" / f"nucseg_{variant}{SCRIPT_SUFFIX}"))


def shipped_script(variant: str = "original") -> Script:
    return load_script(shipped_script_path(variant))


class ScriptSegmenter:
    """Use a macro as the ``segment`` step of :func:`granops.workflow.run_workflow`.

    The script receives the nucleus slice as input ``nuclei`` and must pull
    the band; workflow parameters are passed as overrides of the variables
    ``sigma``, ``radius``, ``minimum_size`` and ``maximum_size``.
    """

    def __init__(self, script: Script, extra_overrides=None):
        self.script = script
        self.extra = dict(extra_overrides or {})

    def __call__(self, rt, source, p):
        overrides = {"sigma": p.sigma, "radius": float(p.band_radius),
                     "minimum_size": float(p.minimum_size), "maximum_size": float(p.maximum_size)}
        overrides.update(self.extra)
        interp = Interpreter(rt, {"nuclei": rt.store.get(source)}, overrides)
        interp.run(self.script)
        if interp.last_pulled is None:
            raise ScriptRuntimeError("segmentation script pulled no image")
        return interp.last_pulled
