import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from cimt_kit.bandcore import BinaryMask, ProbabilityMap
from cimt_kit.errors import ParseError
from cimt_kit.pgmio import read_mask_pgm, read_prob_pgm, write_mask_pgm, write_prob_pgm


@settings(max_examples=25)
@given(
    values=hnp.arrays(
        dtype=np.float64,
        shape=st.tuples(st.integers(1, 20), st.integers(1, 20)),
        elements=st.floats(0.0, 1.0),
    )
)
def test_prob_roundtrip_within_quantum(values, tmp_path_factory):
    tmp = tmp_path_factory.mktemp("pgm")
    p = ProbabilityMap("img", values)
    path = tmp / "img.prob.pgm"
    write_prob_pgm(path, p)
    back = read_prob_pgm(path)
    assert back.image_id == "img"
    assert back.values.shape == values.shape
    assert np.abs(back.values - values).max() <= 0.5 / 65535 + 1e-12


def test_prob_write_is_deterministic(tmp_path):
    rng = np.random.default_rng(7)
    p = ProbabilityMap("x", rng.random((30, 40)))
    a, b = tmp_path / "a.prob.pgm", tmp_path / "b.prob.pgm"
    write_prob_pgm(a, p)
    write_prob_pgm(b, p)
    assert a.read_bytes() == b.read_bytes()


def test_image_id_from_filename(tmp_path):
    p = ProbabilityMap("clin_0042_L", np.full((2, 2), 0.25))
    path = tmp_path / "clin_0042_L.prob.pgm"
    write_prob_pgm(path, p)
    assert read_prob_pgm(path).image_id == "clin_0042_L"


def test_header_comments_tolerated(tmp_path):
    path = tmp_path / "c.prob.pgm"
    body = np.array([[0, 65535]], dtype=">u2").tobytes()
    path.write_bytes(b"P5\n# a comment\n2 1\n65535\n" + body)
    p = read_prob_pgm(path)
    assert p.values.tolist() == [[0.0, 1.0]]


def test_wrong_magic(tmp_path):
    path = tmp_path / "bad.prob.pgm"
    path.write_bytes(b"P6\n1 1\n65535\n\x00\x00")
    with pytest.raises(ParseError, match="P5"):
        read_prob_pgm(path)


def test_truncated_data(tmp_path):
    path = tmp_path / "short.prob.pgm"
    path.write_bytes(b"P5\n4 4\n65535\n\x00\x00")
    with pytest.raises(ParseError, match="bytes"):
        read_prob_pgm(path)


def test_wrong_maxval(tmp_path):
    path = tmp_path / "m.prob.pgm"
    path.write_bytes(b"P5\n1 1\n255\n\x00")
    with pytest.raises(ParseError, match="65535"):
        read_prob_pgm(path)


def test_mask_roundtrip(tmp_path):
    bits = np.zeros((5, 7), dtype=bool)
    bits[2, 3] = True
    bits[4, :] = True
    m = BinaryMask("img", bits, 0.5)
    path = tmp_path / "img.mask.pgm"
    write_mask_pgm(path, m)
    back = read_mask_pgm(path)
    assert np.array_equal(back.bits, bits)
