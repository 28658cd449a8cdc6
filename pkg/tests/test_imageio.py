import os

import numpy as np
import pytest

from invimg.errors import FormatError
from invimg.imageio import read_image, write_image


def test_pfm_roundtrip_bit_identical(tmp_path, rng):
    x = rng.normal(shape=(4, 4))
    p = str(tmp_path / "a.pfm")
    write_image(x, p)
    assert np.array_equal(read_image(p), x)


def test_pfm_color_roundtrip(tmp_path, rng):
    x = rng.normal(shape=(3, 5, 7))
    p = str(tmp_path / "c.pfm")
    write_image(x, p)
    assert np.array_equal(read_image(p), x)


def test_complex_written_as_re_im_pair(tmp_path, rng):
    x = rng.standard((6, 6), np.complex128)
    p = str(tmp_path / "z.pfm")
    write_image(x, p)
    assert os.path.exists(str(tmp_path / "z_re.pfm"))
    assert os.path.exists(str(tmp_path / "z_im.pfm"))
    assert np.array_equal(read_image(p), x)


def test_pgm_half_rounds_up(tmp_path):
    p = str(tmp_path / "g.pgm")
    write_image(np.full((3, 3), 0.5), p)
    assert np.allclose(read_image(p), 128.0 / 255.0)


def test_pgm_roundtrip_within_quantization(tmp_path, rng):
    x = rng.uniform(shape=(8, 8))
    p = str(tmp_path / "q.pgm")
    write_image(x, p)
    assert np.max(np.abs(read_image(p) - x)) <= 0.5 / 255.0 + 1e-12


def test_pgm_clamps(tmp_path):
    p = str(tmp_path / "c.pgm")
    write_image(np.array([[-1.0, 2.0]]), p)
    back = read_image(p)
    assert back[0, 0] == 0.0 and back[0, 1] == 1.0


def test_big_endian_pfm_decodes(tmp_path):
    p = str(tmp_path / "be.pfm")
    vals = np.array([[1.5, 2.5], [3.5, 4.5]])
    with open(p, "wb") as f:
        f.write(b"Pf\n2 2\n1.0\n")
        f.write(vals[::-1].astype(">f4").tobytes())
    assert np.array_equal(read_image(p), vals)


def test_standard_float32_pfm_decodes(tmp_path):
    p = str(tmp_path / "f4.pfm")
    vals = np.array([[0.25, 0.5], [1.0, 2.0]])
    with open(p, "wb") as f:
        f.write(b"Pf\n2 2\n-1.0\n")
        f.write(vals[::-1].astype("<f4").tobytes())
    assert np.array_equal(read_image(p), vals)


@pytest.mark.parametrize("payload,field", [
    (b"P9\n2 2\n-1.0\n" + b"\0" * 32, "magic"),
    (b"Pf\nx 2\n-1.0\n" + b"\0" * 32, "width"),
    (b"Pf\n2 2\n-1.0\n" + b"\0" * 7, "payload"),
    (b"Pf\n2 2\n0.0\n" + b"\0" * 32, "scale"),
])
def test_malformed_pfm_names_field(tmp_path, payload, field):
    p = str(tmp_path / "bad.pfm")
    with open(p, "wb") as f:
        f.write(payload)
    with pytest.raises(FormatError):
        read_image(p)


def test_pgm_bad_maxval(tmp_path):
    p = str(tmp_path / "m.pgm")
    with open(p, "wb") as f:
        f.write(b"P5\n2 2\n65535\n" + b"\0" * 8)
    with pytest.raises(FormatError):
        read_image(p)


def test_pgm_truncated(tmp_path):
    p = str(tmp_path / "t.pgm")
    with open(p, "wb") as f:
        f.write(b"P5\n4 4\n255\n" + b"\0" * 3)
    with pytest.raises(FormatError):
        read_image(p)
