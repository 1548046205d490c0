"""
Buffers, operations and time tracing
====================================

Images live in a runtime's buffer store under names.  Operations read named
inputs and write named outputs, so a pipeline reads like a recorded macro.
"""
import numpy as np

from granops import Image, Runtime

rng = np.random.default_rng(0)
spots = np.zeros((64, 64), np.float32)
spots[rng.integers(0, 64, 40), rng.integers(0, 64, 40)] = 50
background = np.linspace(0, 20, 64, dtype=np.float32)[None, :].repeat(64, 0)
raw = Image(spots + background)

rt = Runtime()
rt.push("raw", raw)

# A top-hat removes the slow ramp and keeps the small bright spots.
rt.start_time_tracing()
rt.execute("Ext.CLIJ2_topHatBox", "raw", "flat", 3, 3, 0)
rt.stop_time_tracing()

flat = rt.pull("flat")
print("ramp range before:", float(raw.plane.min()), "to", float(raw.plane.max()))
print("background after top-hat:", float(np.median(flat.plane)))

# The trace nests the three granular steps under the composite.
print(rt.get_time_tracing()[0])

# Outputs may be left unnamed; the runtime invents a name.
mask = rt.execute("greaterConstant", "flat", None, 25)
print("auto-named output:", mask)
print(rt.report_memory_text())

# Results are identical on the multi-threaded backend.
par = Runtime("parallel", threads=2)
par.push("raw", raw)
par.execute("topHatBox", "raw", "flat", 3, 3, 0)
print("parallel == reference:", par.pull("flat") == flat)
