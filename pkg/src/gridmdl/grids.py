"""Grids, cell deltas, segmentation into one-colour parts, and mask geometry."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import ndimage

NUM_COLORS = 10

# cell of a delta: (row, column, colour of the target grid)
DeltaCell = tuple[int, int, int]
Delta = frozenset

_STRUCT4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
_STRUCT8 = np.ones((3, 3), dtype=bool)

# display palette, one RGB triple per colour
PALETTE = (
    (0, 0, 0), (0, 116, 217), (255, 65, 54), (46, 204, 64), (255, 220, 0),
    (170, 170, 170), (240, 18, 190), (255, 133, 27), (127, 219, 255), (133, 20, 75),
)


class GridError(Exception):
    """Malformed grid data or an inapplicable delta."""


class Grid:
    """Immutable colour grid; rows of ints in 0..9."""

    __slots__ = ("height", "width", "rows", "_arr", "_hash")

    def __init__(self, rows):
        rows = tuple(tuple(int(c) for c in row) for row in rows)
        if not rows or not rows[0]:
            raise GridError("empty grid")
        w = len(rows[0])
        if any(len(r) != w for r in rows):
            raise GridError("ragged grid")
        for r in rows:
            for c in r:
                if not 0 <= c < NUM_COLORS:
                    raise GridError(f"colour out of range: {c}")
        object.__setattr__(self, "height", len(rows))
        object.__setattr__(self, "width", w)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "_arr", None)
        object.__setattr__(self, "_hash", hash(rows))

    def __setattr__(self, *a):
        raise AttributeError("grids are immutable")

    def __reduce__(self):
        # rebuild through __init__: slots plus frozen setattr defeat the default
        return (Grid, (self.rows,))

    @property
    def array(self) -> np.ndarray:
        """Read-only numpy view of the cells."""
        if self._arr is None:
            a = np.array(self.rows, dtype=np.int8)
            a.setflags(write=False)
            object.__setattr__(self, "_arr", a)
        return self._arr

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "Grid":
        return cls(arr.tolist())

    def at(self, i: int, j: int) -> int:
        return self.rows[i][j]

    @property
    def size(self) -> tuple[int, int]:
        return self.height, self.width

    def __eq__(self, other):
        return isinstance(other, Grid) and self.rows == other.rows

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Grid({self.height}x{self.width})"

    def to_text(self) -> str:
        return "\n".join("".join(str(c) for c in row) for row in self.rows)


def delta_between(target: Grid, base: Grid) -> Delta:
    """Cells where the grids differ, coloured after `target`.

    Both grids must have the same size; `delta_apply(base, result) == target`.
    """
    if target.size != base.size:
        raise GridError("delta over grids of different sizes")
    diff = target.array != base.array
    ii, jj = np.nonzero(diff)
    t = target.rows
    return frozenset((int(i), int(j), t[i][j]) for i, j in zip(ii, jj))


def delta_apply(base: Grid, delta: Delta) -> Grid:
    """Overwrite `base` cells with the delta's colours."""
    if not delta:
        return base
    h, w = base.size
    seen = set()
    arr = np.array(base.array)
    for i, j, c in delta:
        if not (0 <= i < h and 0 <= j < w):
            raise GridError(f"delta cell out of bounds: {(i, j)}")
        if (i, j) in seen:
            raise GridError(f"duplicate delta cell: {(i, j)}")
        seen.add((i, j))
        if not 0 <= c < NUM_COLORS:
            raise GridError(f"delta colour out of range: {c}")
        arr[i, j] = c
    return Grid.from_array(arr)


@dataclass(frozen=True)
class Part:
    """Maximal connected one-colour region."""
    color: int
    cells: frozenset
    top: int
    left: int
    height: int
    width: int

    @property
    def area(self) -> int:
        return len(self.cells)


def part_from_cells(color: int, cells) -> Part:
    cells = frozenset(cells)
    if not cells:
        raise GridError("empty part")
    top = min(i for i, _ in cells)
    left = min(j for _, j in cells)
    bottom = max(i for i, _ in cells)
    right = max(j for _, j in cells)
    return Part(color, cells, top, left, bottom - top + 1, right - left + 1)


def segment(g: Grid, connectivity: int = 4) -> tuple[Part, ...]:
    """Split the grid into connected one-colour parts.

    Parts come back in scanline order of their first cell. Connectivity is 4
    by default, 8 as an option.
    """
    if connectivity not in (4, 8):
        raise GridError("connectivity must be 4 or 8")
    struct = _STRUCT4 if connectivity == 4 else _STRUCT8
    arr = g.array
    parts = []
    for c in np.unique(arr):
        labels, n = ndimage.label(arr == c, structure=struct)
        for k in range(1, n + 1):
            ii, jj = np.nonzero(labels == k)
            cells = frozenset((int(i), int(j)) for i, j in zip(ii, jj))
            parts.append(part_from_cells(int(c), cells))
    parts.sort(key=lambda p: min(i * g.width + j for i, j in p.cells))
    return tuple(parts)


def mask_member(kind: str, size: tuple[int, int], cell: tuple[int, int], bits=None) -> bool:
    """Is `cell` covered by a mask of the given kind and size?"""
    h, w = size
    i, j = cell
    if not (0 <= i < h and 0 <= j < w):
        return False
    if kind == "Full":
        return True
    if kind == "Border":
        return i in (0, h - 1) or j in (0, w - 1)
    if kind == "EvenCheckboard":
        return (i + j) % 2 == 0
    if kind == "OddCheckboard":
        return (i + j) % 2 == 1
    if kind == "PlusCross":
        return i == h // 2 or j == w // 2
    if kind == "TimesCross":
        return i == j or i + j == w - 1
    if kind == "Bitmap":
        if bits is None:
            raise GridError("bitmap mask needs its bits")
        return bool(bits[i][j])
    raise GridError(f"unknown mask kind {kind!r}")


@lru_cache(maxsize=4096)
def mask_array(kind: str, h: int, w: int, bits=None) -> np.ndarray:
    """Boolean cell array of a mask; cached, read-only."""
    if kind == "Bitmap":
        a = np.array(bits, dtype=bool)
        if a.shape != (h, w):
            raise GridError("bitmap size mismatch")
    elif kind == "Full":
        a = np.ones((h, w), dtype=bool)
    else:
        ii, jj = np.indices((h, w))
        if kind == "Border":
            a = (ii == 0) | (ii == h - 1) | (jj == 0) | (jj == w - 1)
        elif kind == "EvenCheckboard":
            a = (ii + jj) % 2 == 0
        elif kind == "OddCheckboard":
            a = (ii + jj) % 2 == 1
        elif kind == "PlusCross":
            a = (ii == h // 2) | (jj == w // 2)
        elif kind == "TimesCross":
            a = (ii == jj) | (ii + jj == w - 1)
        else:
            raise GridError(f"unknown mask kind {kind!r}")
    a.setflags(write=False)
    return a


def render_text(g: Grid) -> str:
    return g.to_text()


def render_ppm(g: Grid, cell: int = 12) -> bytes:
    """Binary PPM image of the grid, `cell` pixels per grid cell."""
    arr = g.array
    rgb = np.array(PALETTE, dtype=np.uint8)[arr]
    img = np.repeat(np.repeat(rgb, cell, axis=0), cell, axis=1)
    header = f"P6\n{img.shape[1]} {img.shape[0]}\n255\n".encode()
    return header + img.tobytes()
