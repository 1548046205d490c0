"""Hierarchical time tracing and the millisecond clock."""
from __future__ import annotations

import functools
import time
from contextvars import ContextVar
from dataclasses import dataclass, field

# Set by Runtime while it executes an op, so nested ops find the tracer of
# the runtime that invoked them rather than any process-wide state.
_active_tracer: ContextVar["Tracer | None"] = ContextVar("granops_tracer", default=None)


def now() -> float:
    """Monotonic clock reading in fractional milliseconds."""
    return time.perf_counter_ns() / 1e6


@dataclass
class TraceNode:
    name: str
    duration: float = 0.0
    children: list["TraceNode"] = field(default_factory=list)

    def walk(self, depth=0):
        yield depth, self
        for child in self.children:
            yield from child.walk(depth + 1)


NAME_WIDTH = 18
INDENT = "  "


def format_trace(roots) -> str:
    """Render trace trees as ``> name`` / ``< name   12.3456 ms`` lines."""
    lines = []

    def emit(node, depth):
        pad = INDENT * depth
        lines.append(f"{pad}> {node.name}")
        for child in node.children:
            emit(child, depth + 1)
        width = max(NAME_WIDTH, len(node.name) + 1)
        lines.append(f"{pad}< {node.name:<{width}}{node.duration:.4f} ms")

    for root in roots:
        emit(root, 0)
    return "\n".join(lines)


class Tracer:
    def __init__(self):
        self.enabled = False
        self.roots: list[TraceNode] = []
        self._stack: list[tuple[TraceNode, float]] = []

    def start(self):
        self.enabled = True

    def stop(self):
        self.enabled = False

    def reset(self):
        self.roots = []
        self._stack = []

    def enter(self, name):
        node = TraceNode(name)
        if self._stack:
            self._stack[-1][0].children.append(node)
        else:
            self.roots.append(node)
        self._stack.append((node, now()))
        return node

    def exit(self, node):
        top, t0 = self._stack.pop()
        assert top is node, "trace enter/exit not nested"
        node.duration = now() - t0

    def text(self) -> str:
        return format_trace(self.roots)


def traced(name):
    """Record calls of the decorated op in the active runtime's trace."""

    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            tracer = _active_tracer.get()
            if tracer is None or not tracer.enabled:
                return fn(*args, **kwargs)
            node = tracer.enter(name)
            try:
                return fn(*args, **kwargs)
            finally:
                tracer.exit(node)

        wrapper.op_name = name
        return wrapper

    return deco
