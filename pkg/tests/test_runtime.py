import doctest

import numpy as np
import pytest

import granops.runtime
from granops.errors import ArityError, MissingBufferError, UnknownOpError
from granops.image import Image, TimeLapse, make_image
from granops.runtime import Runtime, strip_prefix


def test_doctests():
    assert doctest.testmod(granops.runtime).failed == 0


def test_push_pull_copy_semantics():
    rt = Runtime()
    img = make_image(4, 3, fill=1.5)
    rt.push("a", img)
    out = rt.pull("a")
    assert out == img and out is not img
    assert out.array is not rt.store.get("a").array


def test_missing_buffer():
    rt = Runtime()
    with pytest.raises(MissingBufferError) as info:
        rt.pull("nope")
    assert "nope" in str(info.value)


def test_execute_auto_names_and_prefixes():
    rt = Runtime()
    rt.push("in", make_image(5, 5, fill=2))
    name = rt.execute("Ext.CLIJ2_mean2DBox", "in", None, 1, 1)
    assert name.startswith("mean2DBox_result")
    other = rt.execute("mean2DBox", "in", "", 1, 1)
    assert other != name
    assert rt.execute("CLIJx_maximum2DBox", "in", "out", 1, 1) == "out"


@pytest.mark.parametrize("raw,bare", [("Ext.CLIJ2_foo", "foo"), ("Ext.CLIJx_foo", "foo"),
                                      ("Ext.CLIJ_foo", "foo"), ("foo", "foo")])
def test_strip_prefix(raw, bare):
    assert strip_prefix(raw) == bare


def test_unknown_op_and_arity():
    rt = Runtime()
    rt.push("in", make_image(2, 2))
    with pytest.raises(UnknownOpError):
        rt.execute("noSuchOp", "in", "out")
    with pytest.raises(ArityError):
        rt.execute("mean2DBox", "in", "out", 1)


def test_report_memory_sorted_and_clear():
    rt = Runtime()
    rt.push("b", make_image(4, 2))
    rt.push("a", make_image(3, 3, depth=2))
    rows = rt.report_memory()
    assert [r.name for r in rows] == ["a", "b"]
    assert rows[0].bytes == 3 * 3 * 2 * 4
    assert "2 images" in rt.report_memory_text()
    rt.clear()
    assert rt.report_memory() == []


def test_push_current_slice():
    tl = TimeLapse.from_array(np.arange(2 * 2 * 3 * 3, dtype=np.float32).reshape(2, 2, 3, 3))
    rt = Runtime()
    rt.push_current_slice("s", tl, 1, 0)
    assert rt.pull("s") == tl.get(1, 0)


def test_tracing_is_per_runtime():
    a, b = Runtime(), Runtime()
    for rt in (a, b):
        rt.push("in", make_image(8, 8, fill=1))
    a.start_time_tracing()
    b.execute("topHatBox", "in", "x", 1, 1, 0)
    a.execute("topHatBox", "in", "y", 1, 1, 0)
    a.stop_time_tracing()
    a.execute("mean2DBox", "in", "z", 1, 1)
    text, roots = a.get_time_tracing()
    assert len(roots) == 1 and roots[0].name == "topHatBox"
    assert b.get_time_tracing()[1] == []
    assert "mean" not in text
