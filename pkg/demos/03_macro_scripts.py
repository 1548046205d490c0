"""
Running macro scripts
=====================

The segmentation ships as two ``.cmacro`` scripts.  The interpreter runs
them against a runtime and returns every pulled image.
"""
from granops import Runtime, SynthParams, WorkflowParams, format_script, run_script, shipped_script, synth_timelapse
from granops.macro import ScriptSegmenter
from granops.workflow import run_workflow

script = shipped_script("optimized")
print(format_script(script))

frame = synth_timelapse(SynthParams(frames=1, width=128, height=128, nucleus_radius=30)).get(0, 0)
rt = Runtime()
outputs = run_script(script, rt, {"nuclei": frame}, overrides={"radius": 3})
band = outputs["band"]
print("band pixels with radius 3:", int(band.plane.sum()))

# Small scripts can be written inline, in the style of a recorded macro.
src = """
image1 = "nucleus.tif";
Ext.CLIJ2_push(image1);
sigma_x = 2.0;
sigma_y = 2.0;
Ext.CLIJ2_gaussianBlur2D(image1, image2, sigma_x, sigma_y);
Ext.CLIJ2_thresholdOtsu(image2, image3);
Ext.CLIJ2_pull(image3);
"""
out = run_script(src, Runtime(), {"nucleus.tif": frame})
print("thresholded area:", int(out["image3"].plane.sum()))

# A script can stand in for the native segmentation of the time-lapse driver.
tl = synth_timelapse(SynthParams(frames=3, width=128, height=128, nucleus_radius=30))
p = WorkflowParams(variant="optimized")
same = run_workflow(tl, p) == run_workflow(tl, p, segment=ScriptSegmenter(script))
print("script rows == native rows:", same)
