"""Finite geometric transform group: quarter-turn rotations, axis flips,
circular shifts.

Elements act in the fixed order rotate -> flip -> shift, and every action is
an exact pixel permutation, so applications are linear, norm-preserving, and
exactly invertible.  The rotation/flip (point) part lives in the dihedral
group D4; composition and inversion tables for the 12 representable
(rotation, flip) combinations are built once from a probe grid.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .core import RngState
from .errors import ShapeError, ValidationError

KINDS = ("rot90", "flip", "shift")

_POINTS = [(k, f) for f in (None, "h", "v") for k in range(4)]


def _apply_point(point, x):
    k, f = point
    out = np.rot90(x, k)
    if f == "h":
        out = np.fliplr(out)
    elif f == "v":
        out = np.flipud(out)
    return out


def _build_tables():
    probe = np.arange(25).reshape(5, 5)
    images = [_apply_point(p, probe) for p in _POINTS]

    def find(target):
        for i, img in enumerate(images):
            if np.array_equal(img, target):
                return i
        raise AssertionError("dihedral closure violated")

    compose_tbl = np.empty((len(_POINTS), len(_POINTS)), dtype=np.int64)
    inverse_tbl = np.empty(len(_POINTS), dtype=np.int64)
    for i, p in enumerate(_POINTS):
        inverse_found = False
        for j, q in enumerate(_POINTS):
            compose_tbl[i, j] = find(_apply_point(p, _apply_point(q, probe)))
            if not inverse_found and np.array_equal(_apply_point(q, images[i]), probe):
                inverse_tbl[i] = j
                inverse_found = True
    # how each point part transports a circular shift: roll-then-point equals
    # point-then-roll with a linearly mapped shift vector
    shift_mats = []
    for p in _POINTS:
        cols = []
        for basis in ((1, 0), (0, 1)):
            rolled = _apply_point(p, np.roll(probe, basis, axis=(0, 1)))
            base = _apply_point(p, probe)
            for dy in range(-2, 3):
                for dx in range(-2, 3):
                    if np.array_equal(np.roll(base, (dy, dx), axis=(0, 1)), rolled):
                        cols.append((dy, dx))
                        break
                else:
                    continue
                break
        shift_mats.append(np.array(cols).T)
    return compose_tbl, inverse_tbl, shift_mats


_COMPOSE, _INVERSE, _SHIFT_MATS = _build_tables()


@dataclass(frozen=True)
class GroupElement:
    """rot90 by k quarter turns, then an optional flip, then a circular shift."""

    rot_k: int = 0
    flip: Optional[str] = None
    shift: Tuple[int, int] = (0, 0)

    def __post_init__(self):
        if self.rot_k not in (0, 1, 2, 3):
            raise ValidationError("rot_k must be in {0,1,2,3}")
        if self.flip not in (None, "h", "v"):
            raise ValidationError("flip must be None, 'h' or 'v'")
        object.__setattr__(self, "shift", (int(self.shift[0]), int(self.shift[1])))

    @property
    def _point_index(self):
        return _POINTS.index((self.rot_k, self.flip))

    def is_identity_point(self):
        return self.rot_k == 0 and self.flip is None


IDENTITY = GroupElement()


def apply(g: GroupElement, x):
    """Apply the transform as an exact pixel permutation."""
    x = np.asarray(x)
    if x.ndim != 2:
        raise ShapeError("transforms act on 2D images")
    if g.rot_k % 2 == 1 and x.shape[0] != x.shape[1]:
        raise ShapeError(
            f"odd quarter-turn needs a square image, got {x.shape}")
    out = _apply_point((g.rot_k, g.flip), x)
    if g.shift != (0, 0):
        out = np.roll(out, g.shift, axis=(0, 1))
    return np.ascontiguousarray(out)


def invert(g: GroupElement) -> GroupElement:
    """The inverse element, again in canonical rotate->flip->shift order."""
    inv_idx = int(_INVERSE[g._point_index])
    k, f = _POINTS[inv_idx]
    s = -np.asarray(g.shift)
    s = _SHIFT_MATS[inv_idx] @ s
    return GroupElement(k, f, (int(s[0]), int(s[1])))


def compose(g1: GroupElement, g2: GroupElement) -> GroupElement:
    """The element acting as g1 after g2, normalized to canonical order."""
    p = int(_COMPOSE[g1._point_index, g2._point_index])
    k, f = _POINTS[p]
    s2 = _SHIFT_MATS[g1._point_index] @ np.asarray(g2.shift)
    s = np.asarray(g1.shift) + s2
    return GroupElement(k, f, (int(s[0]), int(s[1])))


def random_element(rng: RngState, shape, kinds=KINDS) -> GroupElement:
    """Uniform draw over the enabled finite set; shifts range over the image."""
    kinds = tuple(kinds)
    if not kinds:
        raise ValidationError("at least one transform kind must be enabled")
    unknown = set(kinds) - set(KINDS)
    if unknown:
        raise ValidationError(f"unknown transform kinds {sorted(unknown)}")
    k = int(rng.integers(0, 4)) if "rot90" in kinds else 0
    f = None
    if "flip" in kinds:
        f = (None, "h", "v")[int(rng.integers(0, 3))]
    s = (0, 0)
    if "shift" in kinds:
        s = (int(rng.integers(0, shape[0])), int(rng.integers(0, shape[1])))
    return GroupElement(k, f, s)
