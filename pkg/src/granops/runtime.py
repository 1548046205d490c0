"""Named-buffer runtime modelling device memory.

Images enter the store with :meth:`Runtime.push`, are transformed by named
ops that read input buffers and write new output buffers, and leave with
:meth:`Runtime.pull`.  Both transfers copy the full pixel array so their cost
shows up in benchmarks.

>>> rt = Runtime()
>>> rt.push("input", make_image(4, 4, fill=2.0))
'input'
>>> out = rt.execute("mean2DBox", "input", None, 1, 1)
>>> rt.pull(out).array.max()
np.float32(2.0)
"""
from __future__ import annotations

import itertools
import logging
from typing import NamedTuple

from .backend import get_backend
from .errors import ArityError, MissingBufferError, UnknownOpError
from .image import BinaryImage, Image, TimeLapse, as_binary, make_image  # noqa: F401
from .registry import IMAGE_IN, IMAGE_OUT, OPS
from .tracing import Tracer, _active_tracer, now

log = logging.getLogger(__name__)

_name_counter = itertools.count(1)

PREFIXES = ("Ext.CLIJ2_", "Ext.CLIJx_", "Ext.CLIJ_", "CLIJ2_", "CLIJx_", "CLIJ_")


def strip_prefix(name: str) -> str:
    for prefix in PREFIXES:
        if name.startswith(prefix):
            return name[len(prefix):]
    return name


def fresh_name(op_name: str) -> str:
    return f"{op_name}_result{next(_name_counter)}"


class MemoryRow(NamedTuple):
    name: str
    width: int
    height: int
    depth: int
    bytes: int


class BufferStore:
    """Mapping of buffer name to :class:`Image`; pushes and pulls copy."""

    def __init__(self):
        self._entries: dict[str, Image] = {}

    def __contains__(self, name):
        return name in self._entries

    def __len__(self):
        return len(self._entries)

    def names(self):
        return sorted(self._entries)

    def put(self, name, img: Image):
        # internal: op outputs are fresh arrays, no copy needed
        if not name:
            raise ValueError("buffer name must be non-empty")
        self._entries[name] = img

    def get(self, name) -> Image:
        try:
            return self._entries[name]
        except KeyError:
            raise MissingBufferError(name) from None

    def push(self, name, img: Image):
        if not isinstance(img, Image):
            img = Image(img)
        self.put(name, img.copy())

    def pull(self, name) -> Image:
        return self.get(name).copy()

    def clear(self):
        self._entries.clear()

    def report(self) -> list[MemoryRow]:
        return [MemoryRow(n, img.width, img.height, img.depth, img.nbytes)
                for n, img in sorted(self._entries.items())]


class Runtime:
    """A buffer store bound to a backend and a tracer.

    Parameters
    ----------
    backend : {"reference", "parallel"} or Backend
    threads : int, optional
        Worker threads for the parallel backend.
    """

    def __init__(self, backend="reference", threads=None):
        self.backend = get_backend(backend, threads)
        self.store = BufferStore()
        self.tracer = Tracer()

    def __repr__(self):
        return f"Runtime({self.backend!r}, buffers={len(self.store)})"

    # transfers -------------------------------------------------------------

    def push(self, name: str, img) -> str:
        self.store.push(name, img)
        return name

    def push_current_slice(self, name: str, tl: TimeLapse, frame: int, channel: int) -> str:
        return self.push(name, tl.get(frame, channel))

    def pull(self, name: str) -> Image:
        return self.store.pull(name)

    def pull_as_mask(self, name: str) -> BinaryImage:
        """Pull a buffer that must be binary, e.g. a segmented band."""
        return as_binary(self.store.pull(name))

    def clear(self):
        self.store.clear()

    def report_memory(self) -> list[MemoryRow]:
        return self.store.report()

    def report_memory_text(self) -> str:
        rows = self.report_memory()
        lines = [f"Buffer store holds {len(rows)} images."]
        for r in rows:
            lines.append(f"- {r.name}[{r.width}x{r.height}x{r.depth}] {r.bytes} bytes")
        return "\n".join(lines)

    # tracing ---------------------------------------------------------------

    def start_time_tracing(self):
        self.tracer.reset()
        self.tracer.start()

    def stop_time_tracing(self):
        self.tracer.stop()

    def get_time_tracing(self):
        """Return ``(text, roots)`` of the recorded trace."""
        return self.tracer.text(), list(self.tracer.roots)

    @staticmethod
    def now() -> float:
        return now()

    # ops -------------------------------------------------------------------

    def execute(self, op_name: str, *args):
        """Run a registered op on named buffers.

        Arguments follow the op's signature; an output name of ``None`` is
        replaced by a fresh ``<op>_result<n>`` name.  Returns the output name.
        """
        name = strip_prefix(op_name)
        spec = OPS.get(name)
        if spec is None:
            raise UnknownOpError(f"unknown op {op_name!r}")
        if len(args) != spec.arity:
            raise ArityError(f"{spec.signature()} takes {spec.arity} arguments, got {len(args)}")
        images, numbers, outputs = [], [], []
        for param, value in zip(spec.params, args):
            if param.kind == IMAGE_IN:
                images.append(self.store.get(value))
            elif param.kind == IMAGE_OUT:
                outputs.append(value if value else fresh_name(name))
            else:
                numbers.append(float(value))
        token = _active_tracer.set(self.tracer)
        try:
            result = spec.apply(images, numbers, self.backend)
        finally:
            _active_tracer.reset(token)
        self.store.put(outputs[0], result)
        return outputs[0]
