import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import rect_image
from plateloc.detect import Region
from plateloc.errors import EngineFailure, NoLandmarkRecognized
from plateloc.floorplan import FloorPlan, Landmark
from plateloc.ocr import (MockEngine, OcrBox, OcrParams, SubprocessEngine, landmarks_seen, parse_tsv,
                          parse_tsv_line, preprocess_for_ocr, recognize, select_landmark)

ENGINE = [sys.executable, "-m", "plateloc.mock_engine"]


def box(text, w=80.0, x=10.0, conf=0.9):
    return OcrBox(text, x, 20.0, w, 30.0, conf)


def plan_of(*texts):
    return FloorPlan(tuple(Landmark(f"L{i}", t, (float(i), 0.0, 1.5), (0.0, 1.0), 0.1) for i, t in enumerate(texts)))


def region_of(r0, c0, h, w):
    ys, xs = np.mgrid[r0:r0 + h, c0:c0 + w]
    return Region(np.column_stack([xs.ravel(), ys.ravel()]))


def test_box_invariants():
    with pytest.raises(ValueError):
        OcrBox("", 0, 0, 1, 1)
    with pytest.raises(ValueError):
        OcrBox("A", 0, 0, 0, 1)
    with pytest.raises(ValueError):
        OcrBox("A", 0, 0, 1, 1, 1.5)


def test_tsv_round_trip():
    b = OcrBox("4010", 1.5, 2.0, 80.25, 30.0, 0.875)
    assert parse_tsv_line(b.to_tsv()) == b


@pytest.mark.parametrize("line", ["4010\t1\t2\t3", "4010\t1\tx\t3\t4\t0.9", "4010\t1\t2\t3\t4\tnan",
                                  "4010\t1\t2\t-3\t4\t0.9", "\t1\t2\t3\t4\t0.9"])
def test_malformed_lines(line):
    with pytest.raises(EngineFailure):
        parse_tsv_line(line)


def test_parse_tsv_skips_blank_lines():
    assert len(parse_tsv("A\t0\t0\t5\t5\t1\n\n")) == 1


def test_mock_engine():
    img = rect_image()
    boxes = recognize(MockEngine([box("4010")]), img)
    assert boxes == [box("4010")]


def test_recognize_drops_low_confidence():
    boxes = recognize(MockEngine([box("4010", conf=0.3), box("4148", conf=0.8)]), rect_image(), OcrParams())
    assert [b.text for b in boxes] == ["4148"]


def test_recognize_rejects_box_outside_image():
    with pytest.raises(EngineFailure):
        recognize(MockEngine([OcrBox("4010", 380, 10, 50, 10)]), rect_image())


def test_subprocess_engine(tmp_path):
    script = tmp_path / "s.tsv"
    script.write_text(box("4010").to_tsv() + "\n")
    eng = SubprocessEngine(ENGINE + ["--script", str(script)])
    assert recognize(eng, rect_image()) == [box("4010")]


def test_subprocess_engine_failures(tmp_path):
    img = rect_image()
    with pytest.raises(EngineFailure, match="status 3"):
        SubprocessEngine(ENGINE + ["--fail", "3"])(img)
    with pytest.raises(EngineFailure):
        SubprocessEngine(ENGINE + ["--garbage"])(img)
    with pytest.raises(EngineFailure, match="timed out"):
        SubprocessEngine(ENGINE + ["--sleep", "5"], timeout=0.5)(img)
    with pytest.raises(EngineFailure, match="cannot run"):
        SubprocessEngine([str(tmp_path / "no-such-engine")])(img)


def test_preprocess_no_regions_is_blank():
    assert (preprocess_for_ocr(rect_image(), []) == 255).all()


def test_preprocess_keeps_one_glyph():
    img = rect_image()
    out = preprocess_for_ocr(img, [region_of(100, 50, 40, 20)])
    assert (out[100:140, 50:70] == 0).all()
    assert (out == 0).sum() == 800


def test_preprocess_drops_small_region():
    img = rect_image()
    img[10:12, 10:15] = 0
    out = preprocess_for_ocr(img, [region_of(10, 10, 2, 5), region_of(100, 50, 40, 20)])
    assert (out[10:12, 10:15] == 255).all()
    assert (out == 0).sum() == 800


def test_preprocess_outside_masks_is_background():
    rng = np.random.default_rng(0)
    img = rng.integers(0, 256, (60, 80)).astype(np.uint8)
    reg = region_of(10, 10, 10, 10)
    out = preprocess_for_ocr(img, [reg])
    outside = ~reg.mask(img.shape)
    assert (out[outside] == 255).all()


def test_select_ignores_non_landmarks():
    lm, b = select_landmark([box("4010", 80), box("EXIT", 120)], plan_of("4010"))
    assert lm.text == "4010" and b.w_px == 80


def test_select_widest():
    lm, _ = select_landmark([box("4010", 40), box("4148", 90)], plan_of("4010", "4148"))
    assert lm.text == "4148"


def test_select_ties():
    boxes = [box("4010", 50, x=30, conf=0.7), box("4148", 50, x=60, conf=0.9)]
    assert select_landmark(boxes, plan_of("4010", "4148"))[0].text == "4148"
    boxes = [box("4010", 50, x=30), box("4148", 50, x=10)]
    assert select_landmark(boxes, plan_of("4010", "4148"))[0].text == "4148"


def test_select_nothing_matches():
    with pytest.raises(NoLandmarkRecognized):
        select_landmark([box("EXIT")], plan_of("4010"))


def test_landmarks_seen():
    assert landmarks_seen([box("4010"), box("EXIT"), box("4148"), box("4010")], plan_of("4010", "4148")) == [
        "4010", "4148"]


texts = st.sampled_from(["4010", "4148", "EXIT", "B12", "0000", "A"])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(texts, st.floats(1, 300), st.floats(0, 1)), min_size=1, max_size=8),
       st.sets(texts, min_size=1))
def test_select_postcondition(raw, plan_texts):
    boxes = [box(t, w, conf=c) for t, w, c in raw]
    plan = plan_of(*sorted(plan_texts))
    try:
        lm, b = select_landmark(boxes, plan)
    except NoLandmarkRecognized:
        assert not any(b.text in plan_texts for b in boxes)
        return
    assert lm.text in plan_texts and b.text == lm.text
    assert b.w_px == max(x.w_px for x in boxes if x.text in plan_texts)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 1), max_size=10), st.floats(0, 1))
def test_recognize_confidence_floor(confs, floor):
    boxes = recognize(MockEngine([box("A", conf=c) for c in confs]), rect_image(), OcrParams(min_confidence=floor))
    assert all(b.confidence >= floor for b in boxes)
