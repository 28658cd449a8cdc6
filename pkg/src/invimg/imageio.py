"""PGM (binary P5) and PFM image file I/O.

PGM stores 8-bit grayscale; values map to [0, 1] with round-half-up
quantization on write.  PFM stores floats losslessly: headers follow the
portable-float-map convention ('Pf' grayscale, 'PF' 3-channel, negative scale
for little-endian) and the payload is written as 8-byte doubles so that a
write/read round trip is bit exact.  The reader accepts both 8-byte and
standard 4-byte payloads, either endianness, with bottom-to-top scanlines.

Complex tensors are written as two PFM files with ``_re`` / ``_im`` suffixes;
``read_image`` reassembles them when asked for the bare path.
"""

import os

import numpy as np

from .errors import DtypeError, FormatError, ShapeError

__all__ = ["read_image", "write_image"]


def write_image(t, path):
    """Write a tensor to ``path``; the suffix selects the format (.pgm/.pfm)."""
    t = np.asarray(t)
    ext = os.path.splitext(path)[1].lower()
    if np.iscomplexobj(t):
        if ext != ".pfm":
            raise DtypeError("complex tensors can only be written as PFM pairs")
        root = os.path.splitext(path)[0]
        _write_pfm(np.ascontiguousarray(t.real), root + "_re.pfm")
        _write_pfm(np.ascontiguousarray(t.imag), root + "_im.pfm")
        return
    if ext == ".pgm":
        _write_pgm(t, path)
    elif ext == ".pfm":
        _write_pfm(t, path)
    else:
        raise FormatError(f"unsupported image suffix {ext!r} (use .pgm or .pfm)")


def read_image(path):
    """Read a PGM or PFM file into a float64 tensor.

    If ``path`` does not exist but sibling ``_re``/``_im`` PFM files do, the
    complex tensor they encode is reassembled.
    """
    ext = os.path.splitext(path)[1].lower()
    if not os.path.exists(path) and ext == ".pfm":
        root = os.path.splitext(path)[0]
        re_path, im_path = root + "_re.pfm", root + "_im.pfm"
        if os.path.exists(re_path) and os.path.exists(im_path):
            return _read_pfm(re_path) + 1j * _read_pfm(im_path)
    if ext == ".pgm":
        return _read_pgm(path)
    if ext == ".pfm":
        return _read_pfm(path)
    raise FormatError(f"unsupported image suffix {ext!r} (use .pgm or .pfm)")


# -- PGM (P5, maxval 255) ----------------------------------------------------

def _write_pgm(t, path):
    if t.ndim != 2:
        raise ShapeError(f"PGM wants a 2D grayscale image, got shape {t.shape}")
    v = np.clip(t.astype(np.float64), 0.0, 1.0)
    # round-half-up, not banker's rounding
    q = np.floor(255.0 * v + 0.5).astype(np.uint8)
    h, w = q.shape
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (w, h))
        f.write(q.tobytes())


def _read_pgm(path):
    with open(path, "rb") as f:
        data = f.read()
    magic, pos = _next_token(data, 0, "magic number")
    if magic != b"P5":
        raise FormatError(f"PGM magic number is {magic!r}, expected 'P5'")
    w, pos = _int_token(data, pos, "width")
    h, pos = _int_token(data, pos, "height")
    maxval, pos = _int_token(data, pos, "maxval")
    if maxval != 255:
        raise FormatError(f"PGM maxval is {maxval}, only 255 supported")
    payload = data[pos + 1 : pos + 1 + w * h]  # single whitespace after maxval
    if len(payload) < w * h:
        raise FormatError(f"PGM payload truncated: {len(payload)} of {w * h} bytes")
    return np.frombuffer(payload, dtype=np.uint8).reshape(h, w).astype(np.float64) / 255.0


def _next_token(data, pos, field):
    """Next whitespace-delimited header token, skipping '#' comments."""
    n = len(data)
    while pos < n and data[pos : pos + 1].isspace():
        pos += 1
    while pos < n and data[pos : pos + 1] == b"#":
        while pos < n and data[pos : pos + 1] != b"\n":
            pos += 1
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
    start = pos
    while pos < n and not data[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise FormatError(f"header ended while reading {field}")
    return data[start:pos], pos


def _int_token(data, pos, field):
    tok, pos = _next_token(data, pos, field)
    try:
        return int(tok), pos
    except ValueError:
        raise FormatError(f"{field} is not an integer: {tok!r}") from None


# -- PFM ----------------------------------------------------------------------

def _write_pfm(t, path):
    if t.ndim == 2:
        magic, channels = b"Pf", 1
        h, w = t.shape
        planes = t[None]
    elif t.ndim == 3 and t.shape[0] == 3:
        magic, channels = b"PF", 3
        _, h, w = t.shape
        planes = t
    else:
        raise ShapeError(f"PFM wants [H,W] or [3,H,W], got shape {t.shape}")
    # bottom-to-top scanlines, channel-interleaved, little-endian doubles
    rows = np.empty((h, w, channels), dtype="<f8")
    for c in range(channels):
        rows[:, :, c] = planes[c]
    rows = rows[::-1]
    with open(path, "wb") as f:
        f.write(magic + b"\n%d %d\n-1.0\n" % (w, h))
        f.write(np.ascontiguousarray(rows).tobytes())


def _read_pfm(path):
    with open(path, "rb") as f:
        data = f.read()
    magic, pos = _next_token(data, 0, "magic number")
    if magic == b"Pf":
        channels = 1
    elif magic == b"PF":
        channels = 3
    else:
        raise FormatError(f"PFM magic number is {magic!r}, expected 'Pf' or 'PF'")
    w, pos = _int_token(data, pos, "width")
    h, pos = _int_token(data, pos, "height")
    scale_tok, pos = _next_token(data, pos, "scale")
    try:
        scale = float(scale_tok)
    except ValueError:
        raise FormatError(f"scale is not a number: {scale_tok!r}") from None
    if scale == 0.0:
        raise FormatError("scale must be nonzero")
    payload = data[pos + 1 :]
    count = w * h * channels
    if len(payload) == count * 8:
        width = 8
    elif len(payload) == count * 4:
        width = 4
    else:
        raise FormatError(
            f"PFM payload is {len(payload)} bytes; expected {count * 4} or {count * 8}"
        )
    endian = "<" if scale < 0 else ">"
    vals = np.frombuffer(payload, dtype=f"{endian}f{width}").astype(np.float64)
    rows = vals.reshape(h, w, channels)[::-1]
    if abs(scale) != 1.0:
        rows = rows * abs(scale)
    if channels == 1:
        return np.ascontiguousarray(rows[:, :, 0])
    return np.ascontiguousarray(np.moveaxis(rows, 2, 0))
