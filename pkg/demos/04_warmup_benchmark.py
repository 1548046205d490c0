"""
Warm-up effects in repeated timings
===================================

The first run of a pipeline pays for one-time set-up.  The harness keeps
that run, reports its ratio to the median and flags it as an outlier.
"""
from granops import Runtime, SynthParams, WorkflowParams, benchmark, run_workflow, summarize, synth_timelapse

tl = synth_timelapse(SynthParams(frames=2, width=128, height=128, nucleus_radius=30))
cache = {}


def workflow():
    # simulate a lazily built resource, such as a compiled kernel
    if "kernel" not in cache:
        cache["kernel"] = [run_workflow(tl, WorkflowParams()) for _ in range(4)]
    run_workflow(tl, WorkflowParams(), runtime=Runtime())


samples = benchmark(workflow, repeats=15)
s = summarize(samples, label="original/reference")
print(f"median {s.median:.2f} ms, quartiles [{s.q25:.2f}, {s.q75:.2f}] ms")
print(f"first run {s.first_run:.2f} ms = {s.warmup_ratio:.1f}x the median")
print("outliers (iteration, ms):", [(i, round(v, 2)) for i, v in s.outliers])

trimmed = summarize(samples, discard_warmup=1)
print(f"after discarding the first run: median {trimmed.median:.2f} ms, {len(trimmed.outliers)} outliers")
