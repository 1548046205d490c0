import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from granops.errors import FormatError
from granops.image import Image, TimeLapse
from granops.io import (decode_pgm, encode_pgm, read_measurements_csv, read_pgm, read_stack, rows_from_csv,
                        write_measurements_csv, write_pgm, write_stack)
from granops.measure import MeasurementRow
from granops.workflow import SynthParams, synth_timelapse


def test_pgm_round_trip_many(rng):
    for i in range(1000):
        h, w = rng.integers(1, 12, size=2)
        maxval = int(rng.choice([1, 255, 256, 1000, 65535]))
        arr = rng.integers(0, maxval + 1, size=(h, w))
        img = Image(arr)
        data = encode_pgm(img, maxval=maxval, binary=bool(i % 2))
        assert np.array_equal(decode_pgm(data), arr)


def test_pgm_file_and_u8_range(tmp_path, rng):
    arr = rng.integers(0, 256, size=(5, 7))
    write_pgm(Image(arr), tmp_path / "a.pgm")
    back = read_pgm(tmp_path / "a.pgm")
    assert back.plane.max() <= 255 and np.array_equal(back.plane, arr)


def test_pgm_header_comments():
    assert decode_pgm(b"P2\n# c\n2 1 # x\n9\n3 9\n").tolist() == [[3, 9]]


@pytest.mark.parametrize("data,offset", [
    (b"P5\n4 4\n255\n" + bytes(10), 21),
    (b"P6\n1 1\n255\n\x00", 0),
    (b"P5\n4 x\n255\n", 5),
    (b"P5\n1 1\n70000\n\x00", 7),
    (b"P2\n2 1\n9\n3", 10),
])
def test_pgm_errors_report_offset(data, offset):
    with pytest.raises(FormatError) as info:
        decode_pgm(data)
    assert info.value.offset == offset


def test_pgm_rejects_non_integer_images():
    with pytest.raises(FormatError):
        encode_pgm(Image([[0.5]]))


@settings(max_examples=500, deadline=None)
@given(st.binary(max_size=64))
def test_pgm_fuzz_never_crashes(data):
    try:
        decode_pgm(data)
    except FormatError:
        pass


@settings(max_examples=300, deadline=None)
@given(st.sampled_from([b"P5\n3 2\n255\n" + bytes(range(6)), b"P2\n2 2\n300\n1 2 3 4\n"]),
       st.integers(0, 30), st.binary(min_size=1, max_size=4))
def test_pgm_mutation_fuzz(base, pos, patch):
    data = base[:pos] + patch + base[pos + len(patch):]
    try:
        decode_pgm(data)
    except FormatError:
        pass


@pytest.mark.parametrize("noise,dtype", [(0, "u8"), (2, "f32")])
def test_stack_round_trip(tmp_path, noise, dtype):
    tl = synth_timelapse(SynthParams(frames=15, width=40, height=30, nucleus_radius=8, noise_amplitude=noise))
    path = write_stack(tl, tmp_path / "s")
    m = __import__("json").loads(path.read_text())
    assert m["dtype"] == dtype and len(m["planeFiles"]) == 30
    assert read_stack(path) == tl
    assert read_stack(tmp_path / "s") == tl


def test_stack_u16(tmp_path, rng):
    tl = TimeLapse.from_array(rng.integers(0, 65536, size=(2, 2, 5, 4)).astype(np.float32))
    write_stack(tl, tmp_path, "u16")
    assert read_stack(tmp_path) == tl


def test_stack_errors_name_the_file(tmp_path):
    tl = synth_timelapse(SynthParams(frames=2, width=30, height=30, nucleus_radius=8, noise_amplitude=0))
    path = write_stack(tl, tmp_path)
    write_pgm(Image(np.zeros((3, 3))), tmp_path / "t001_c0.pgm")
    with pytest.raises(FormatError, match="t001_c0.pgm"):
        read_stack(path)
    (tmp_path / "t001_c0.pgm").unlink()
    with pytest.raises(FormatError, match="missing plane file"):
        read_stack(path)


@pytest.mark.parametrize("manifest", [
    "not json", "[]", '{"width": 2}',
    '{"width": 2, "height": 2, "channels": 2, "frames": 1, "dtype": "u8", "planeFiles": ["a"]}',
    '{"width": 2, "height": 2, "channels": 1, "frames": 1, "dtype": "i32", "planeFiles": ["a"]}',
    '{"width": 2, "height": 2, "channels": 1, "frames": 1, "dtype": ["u8"], "planeFiles": ["a"]}',
    '{"width": true, "height": 2, "channels": 1, "frames": 1, "dtype": "u8", "planeFiles": ["a"]}',
])
def test_bad_manifests(tmp_path, manifest):
    (tmp_path / "stack.json").write_text(manifest)
    with pytest.raises(FormatError):
        read_stack(tmp_path)


@settings(max_examples=300, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.binary(max_size=200))
def test_manifest_fuzz(tmp_path, data):
    (tmp_path / "stack.json").write_bytes(data)
    try:
        read_stack(tmp_path)
    except FormatError:
        pass


def _row(i, v):
    return MeasurementRow(i, 100 + i, v, 1.23456, 2.0, 40, 100 * v, 0.785398)


def test_csv_header_only_and_rows(tmp_path):
    write_measurements_csv([], tmp_path / "e.csv")
    assert (tmp_path / "e.csv").read_text() == \
        "frame,area,mean,centroid_x,centroid_y,perimeter,circularity,integrated_density\n"
    write_measurements_csv([_row(0, 1.0)], tmp_path / "o.csv")
    assert len((tmp_path / "o.csv").read_text().splitlines()) == 2


def test_csv_round_trip_at_three_decimals(tmp_path, rng):
    for trial in range(50):
        rows = [_row(i, float(v)) for i, v in enumerate(rng.uniform(0, 1000, rng.integers(0, 20)))]
        write_measurements_csv(rows, tmp_path / "r.csv")
        back = rows_from_csv(tmp_path / "r.csv")
        assert len(back) == len(rows)
        for a, b in zip(rows, back):
            assert b.frame == a.frame and b.area == a.area
            assert b.mean == round(a.mean, 3) and b.centroid_x == round(a.centroid_x, 3)


def test_csv_errors(tmp_path):
    (tmp_path / "x.csv").write_text("frame,mean\n1,abc\n")
    with pytest.raises(FormatError):
        read_measurements_csv(tmp_path / "x.csv")
    (tmp_path / "y.csv").write_text("frame,mean\n1,2\n")
    with pytest.raises(FormatError):
        rows_from_csv(tmp_path / "y.csv")
