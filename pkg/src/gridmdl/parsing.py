"""Drawing grids from ground trees and parsing grids into model readings.

Parsing runs in three stages: segmentation into one-colour parts, candidate
objects built from parts (plus limited unions and point explosions), and a
search over per-layer candidate combinations in increasing rank order. Each
surviving combination yields a reading: a ground parse tree, the cell delta
against the drawn tree, any template diffs, and its description length.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field, replace

import numpy as np

from . import coding, lang
from .grids import Grid, GridError, Part, mask_array, segment
from .lang import (
    BITS, COLOR, GRID, MASK, NAT, OBJECT, SHAPE, VEC,
    Ctor, Term, Unknown, UNK,
    grid as grid_term, pos_shape, rectangle, point, vec, bitmap as bitmap_term,
    FULL,
)

GREY = 5
DEFAULT_GRID_SIZE = (10, 10)
DEFAULT_RECT_SIZE = (2, 2)

# recognition order for regular masks; crosses need odd dimensions
_REGULAR_MASKS = ("Full", "Border", "EvenCheckboard", "OddCheckboard",
                  "PlusCross", "TimesCross")

_MAX_POPS = 1024
_MAX_CANDIDATES = 512
_UNION_COLOR_LIMIT = 64


@dataclass(frozen=True)
class ParseConfig:
    """Search bounds of the parser."""
    max_candidates_per_layer: int = 64
    max_trees_before_sort: int = 64
    max_trees_kept: int = 3
    max_diffs: int = 0
    connectivity: int = 4


DEFAULT_PARSE = ParseConfig()


@dataclass(frozen=True)
class Reading:
    """One way a grid instantiates a model side."""
    tree: Ctor
    delta: frozenset
    diffs: tuple
    dl: float


@dataclass(frozen=True)
class ReadingPair:
    """Chained input and output readings of one example."""
    rin: Reading
    rout: Reading
    dl: float


@dataclass
class Caches:
    """Per-task memo tables; safe to share across refinement evaluations."""
    indexes: dict = field(default_factory=dict)
    readings: dict = field(default_factory=dict)


# drawing

def draw(tree: Term) -> Grid:
    """Paint a ground grid term: background first, then layers bottom-up
    (the last list element first), clipping at the borders."""
    if not (isinstance(tree, Ctor) and tree.name == "Grid"):
        raise lang.LangError("draw needs a Grid term")
    size, color, layers = tree.args
    if not lang.is_ground(tree):
        raise lang.LangError("draw needs a ground term")
    h, w = size.args
    if h < 1 or w < 1:
        raise GridError(f"degenerate grid size {h}x{w}")
    arr = np.full((h, w), color, dtype=np.int8)
    for obj in reversed(layers):
        _paint(arr, obj)
    return Grid.from_array(arr)


def _paint(arr: np.ndarray, obj: Ctor) -> None:
    h, w = arr.shape
    pos, shape = obj.args
    oi, oj = pos.args
    if shape.name == "Point":
        if 0 <= oi < h and 0 <= oj < w:
            arr[oi, oj] = shape.args[0]
        return
    size, color, mask = shape.args
    sh, sw = size.args
    bits = mask.args[0] if mask.name == "Bitmap" else None
    cells = mask_array(mask.name, sh, sw, bits)
    # clip the shape's box to the grid
    i0, j0 = max(oi, 0), max(oj, 0)
    i1, j1 = min(oi + sh, h), min(oj + sw, w)
    if i0 >= i1 or j0 >= j1:
        return
    sub = cells[i0 - oi:i1 - oi, j0 - oj:j1 - oj]
    view = arr[i0:i1, j0:j1]
    view[sub] = color


# default instantiation

def _default(sort: str, role: str) -> Term:
    if sort == VEC:
        if role == "pos":
            return vec(0, 0)
        if role == "grid_size":
            return vec(*DEFAULT_GRID_SIZE)
        return vec(*DEFAULT_RECT_SIZE)
    if sort == NAT:
        if role == "pos":
            return 0
        if role == "grid_size":
            return 10
        return 2
    if sort == COLOR:
        return 0 if role == "bg" else GREY
    if sort == MASK:
        return FULL
    if sort == SHAPE:
        return rectangle(vec(*DEFAULT_RECT_SIZE), GREY, FULL)
    if sort == OBJECT:
        return pos_shape(vec(0, 0), rectangle(vec(*DEFAULT_RECT_SIZE), GREY, FULL))
    raise lang.LangError(f"no default for sort {sort}")


def _fill_defaults(t: Term, sort: str, role: str) -> Term:
    if isinstance(t, Unknown):
        return _default(sort, role)
    if lang.is_expr(t):
        raise lang.LangError("generate needs an applied model")
    if not isinstance(t, Ctor):
        return t
    args = []
    for arg, (fname, fsort, is_list) in zip(t.args, lang.ctor_fields(t.name)):
        if fsort == BITS:
            args.append(arg)
            continue
        if fname == "pos":
            frole = "pos"
        elif fname == "size":
            frole = "grid_size" if t.name == "Grid" else "rect_size"
        elif fsort == COLOR:
            frole = "bg" if t.name == "Grid" else ""
        else:
            frole = role
        if is_list:
            args.append(tuple(_fill_defaults(x, fsort, frole) for x in arg))
        else:
            args.append(_fill_defaults(arg, fsort, frole))
    return Ctor(t.name, tuple(args))


def generate(m: Term) -> Term:
    """Close an applied model by filling every unknown with its default:
    positions (0,0), grid sizes 10x10, rectangle sizes 2x2, black backgrounds,
    grey shapes, full masks."""
    return _fill_defaults(m, GRID, "")


def write(m: Term, env: Term | None) -> tuple[Term, Grid]:
    """Instantiate and draw a model side; returns the tree and its grid."""
    tree = generate(lang.apply_model(m, env))
    return tree, draw(tree)


# candidates

@dataclass(frozen=True)
class Candidate:
    """A possible object occurrence: its term, drawn cells, and order key data."""
    tree: Ctor
    cells: int
    area: int
    color: int
    top: int
    left: int
    variant: int  # 0 full-mask, 1 exact-mask, 2 point
    wrong: int    # drawn cells whose grid colour differs

    def sort_key(self, width: int):
        return (self.color == 0, -self.area, self.top * width + self.left, self.variant)


@dataclass
class GridIndex:
    """Per-grid candidate table and colour bitmasks."""
    grid: Grid
    candidates: tuple
    color_cells: tuple  # bitmask per colour
    all_cells: int


def _cells_mask(cells, width: int) -> int:
    m = 0
    for i, j in cells:
        m |= 1 << (i * width + j)
    return m


def _box_mask(top: int, left: int, h: int, w: int, width: int) -> int:
    row = ((1 << w) - 1) << left
    m = 0
    for i in range(top, top + h):
        m |= row << (i * width)
    return m


def recognize_mask(cells: frozenset, h: int, w: int) -> Ctor:
    """Smallest regular mask matching the relative cell set, else a bitmap."""
    arr = np.zeros((h, w), dtype=bool)
    for i, j in cells:
        arr[i, j] = True
    for name in _REGULAR_MASKS:
        if name in ("PlusCross", "TimesCross") and (h % 2 == 0 or w % 2 == 0):
            continue
        if np.array_equal(arr, mask_array(name, h, w)):
            return Ctor(name)
    return bitmap_term(arr.astype(int).tolist())


def _part_candidates(part: Part, width: int, out: list) -> None:
    rel = frozenset((i - part.top, j - part.left) for i, j in part.cells)
    box = part.height * part.width
    tl = (part.top, part.left)
    if part.area == 1:
        (i, j), = part.cells
        out.append((pos_shape(vec(i, j), point(part.color)),
                    _cells_mask(part.cells, width), 1, part.color, i, j, 2, 0))
        return
    exact_mask = recognize_mask(rel, part.height, part.width)
    if exact_mask.name == "Full":
        out.append((pos_shape(vec(*tl), rectangle(vec(part.height, part.width), part.color, FULL)),
                    _box_mask(*tl, part.height, part.width, width),
                    box, part.color, *tl, 0, 0))
    else:
        out.append((pos_shape(vec(*tl), rectangle(vec(part.height, part.width), part.color, FULL)),
                    _box_mask(*tl, part.height, part.width, width),
                    box, part.color, *tl, 0, -1))
        out.append((pos_shape(vec(*tl), rectangle(vec(part.height, part.width), part.color, exact_mask)),
                    _cells_mask(part.cells, width),
                    part.area, part.color, *tl, 1, 0))
    if part.area < 5:
        for i, j in sorted(part.cells):
            out.append((pos_shape(vec(i, j), point(part.color)),
                        1 << (i * width + j), 1, part.color, i, j, 2, 0))


def _union_candidates(a: Part, b: Part, width: int, out: list) -> None:
    top, left = min(a.top, b.top), min(a.left, b.left)
    bottom = max(a.top + a.height, b.top + b.height)
    right = max(a.left + a.width, b.left + b.width)
    h, w = bottom - top, right - left
    if h * w > 4 * (a.area + b.area):
        return
    cells = a.cells | b.cells
    rel = frozenset((i - top, j - left) for i, j in cells)
    mask = recognize_mask(rel, h, w)
    if mask.name == "Full":
        out.append((pos_shape(vec(top, left), rectangle(vec(h, w), a.color, FULL)),
                    _box_mask(top, left, h, w, width), h * w, a.color, top, left, 0, 0))
        return
    out.append((pos_shape(vec(top, left), rectangle(vec(h, w), a.color, FULL)),
                _box_mask(top, left, h, w, width), h * w, a.color, top, left, 0, -1))
    out.append((pos_shape(vec(top, left), rectangle(vec(h, w), a.color, mask)),
                _cells_mask(cells, width), len(cells), a.color, top, left, 1, 0))


def build_index(g: Grid, cfg: ParseConfig = DEFAULT_PARSE) -> GridIndex:
    """Segment the grid and assemble its ranked candidate objects."""
    w = g.width
    color_cells = [0] * 10
    for i, row in enumerate(g.rows):
        base = i * w
        for j, c in enumerate(row):
            color_cells[c] |= 1 << (base + j)
    parts = segment(g, cfg.connectivity)
    raw: list = []
    for p in parts:
        _part_candidates(p, w, raw)
    by_color: dict[int, list[Part]] = {}
    for p in parts:
        by_color.setdefault(p.color, []).append(p)
    for c, group in by_color.items():
        if len(group) > _UNION_COLOR_LIMIT:
            continue
        for x in range(len(group)):
            for y in range(x + 1, len(group)):
                _union_candidates(group[x], group[y], w, raw)
    # resolve the wrong-cell mask for full-mask variants, dedupe by term
    seen: dict = {}
    for tree, cells, area, color, top, left, variant, wrong in raw:
        if tree in seen:
            continue
        if wrong == -1:
            wrong = cells & ~color_cells[color]
        seen[tree] = Candidate(tree, cells, area, color, top, left, variant, wrong)
    cands = sorted(seen.values(), key=lambda c: c.sort_key(w))
    return GridIndex(g, tuple(cands[:_MAX_CANDIDATES]), tuple(color_cells),
                     (1 << (g.height * w)) - 1)


# template matching with diffs

def template_diffs(tmpl: Term, tree: Term, prefix: tuple = ()) -> tuple | None:
    """Diffs turning the template into the ground tree, or None when the
    structures are incompatible. Unknowns absorb anything."""
    if isinstance(tmpl, Unknown):
        return ()
    if lang.is_expr(tmpl):
        raise lang.LangError("template still carries expressions")
    if isinstance(tmpl, Ctor):
        if not isinstance(tree, Ctor):
            return ((prefix, tree),)
        if tmpl.name != tree.name:
            return ((prefix, tree),)
        if tmpl.name == "Bitmap":
            return () if tmpl.args == tree.args else ((prefix, tree),)
        out: tuple = ()
        for (fname, fsort, is_list), ta, da in zip(lang.ctor_fields(tmpl.name), tmpl.args, tree.args):
            if is_list:
                if len(ta) != len(da):
                    return None
                for k, (x, y) in enumerate(zip(ta, da)):
                    d = template_diffs(x, y, prefix + (fname, k))
                    if d is None:
                        return None
                    out += d
            else:
                d = template_diffs(ta, da, prefix + (fname,))
                if d is None:
                    return None
                out += d
        return out
    return () if tmpl == tree else ((prefix, tree),)


# parsing proper

def _bits_cells(mask: int, width: int, g: Grid):
    out = []
    while mask:
        low = mask & -mask
        b = low.bit_length() - 1
        i, j = divmod(b, width)
        out.append((i, j, g.rows[i][j]))
        mask &= mask - 1
    return out


def _size_fit(size_t: Term, h: int, w: int) -> tuple | None:
    """Diffs the model's size template needs to admit the actual dimensions."""
    if isinstance(size_t, Unknown):
        return ()
    i_t, j_t = size_t.args
    diffs: tuple = ()
    if isinstance(i_t, int) and i_t != h:
        diffs += ((("size", "i"), h),)
    if isinstance(j_t, int) and j_t != w:
        diffs += ((("size", "j"), w),)
    return diffs


def parse(applied: Term, g: Grid, dl_cfg: coding.DLConfig = coding.DEFAULT_DL,
          cfg: ParseConfig = DEFAULT_PARSE, index: GridIndex | None = None) -> tuple[Reading, ...]:
    """All retained readings of `g` under an expression-free grid model,
    sorted by ascending description length."""
    if not (isinstance(applied, Ctor) and applied.name == "Grid"):
        raise lang.LangError("parse needs a Grid model")
    h, w = g.height, g.width
    if index is None:
        index = build_index(g, cfg)
    size_t, color_t, layer_ts = applied.args

    grid_diffs = _size_fit(size_t, h, w)
    if grid_diffs is None or len(grid_diffs) > cfg.max_diffs:
        return ()
    budget = cfg.max_diffs - len(grid_diffs)

    # admissible candidates per layer, keeping the global order
    per_layer: list[list[tuple[Candidate, tuple]]] = []
    for lt in layer_ts:
        admitted = []
        for cand in index.candidates:
            d = template_diffs(lt, cand.tree, ())
            if d is not None and len(d) <= budget:
                admitted.append((cand, d))
                if len(admitted) >= cfg.max_candidates_per_layer:
                    break
        if not admitted:
            return ()
        per_layer.append(admitted)

    readings: list[Reading] = []
    L = len(per_layer)
    heap: list[tuple[int, tuple]] = [(0, (0,) * L)]
    seen = {(0,) * L}
    pops = 0
    while heap and len(readings) < cfg.max_trees_before_sort and pops < _MAX_POPS:
        rank, combo = heapq.heappop(heap)
        pops += 1
        for d in range(L):
            if combo[d] + 1 < len(per_layer[d]):
                nxt = combo[:d] + (combo[d] + 1,) + combo[d + 1:]
                if nxt not in seen:
                    seen.add(nxt)
                    heapq.heappush(heap, (rank + 1, nxt))
        picks = [per_layer[d][combo[d]] for d in range(L)]
        if L > 1 and len({id(c) for c, _ in picks}) < L:
            continue
        diffs = grid_diffs
        for k, (_, d) in enumerate(picks):
            diffs += tuple((("layers", k) + p, t) for p, t in d)
        if len(diffs) > cfg.max_diffs:
            continue
        reading = _combo_reading(applied, g, index, picks, diffs, color_t, dl_cfg)
        if reading is not None:
            readings.append(reading)
    readings.sort(key=lambda r: r.dl)
    return tuple(readings[:cfg.max_trees_kept])


def _combo_reading(applied, g: Grid, index: GridIndex, picks, diffs, color_t,
                   dl_cfg) -> Reading | None:
    h, w = g.height, g.width
    covered = 0
    mismatch = 0
    for cand, _ in picks:
        mismatch |= cand.wrong & ~covered
        covered |= cand.cells
    uncovered = index.all_cells & ~covered

    if isinstance(color_t, int):
        bg = color_t
    else:
        # unknown background: pick the exact-cost optimum over plausible colours
        options = {0}
        rem = uncovered
        for c in range(10):
            if rem & index.color_cells[c]:
                options.add(c)
        best = None
        mism_n = mismatch.bit_count()
        for c in sorted(options):
            n = (uncovered & ~index.color_cells[c]).bit_count() + mism_n
            cost = coding.l_dist(coding.P_BG[c]) + coding.l_delta(range(n), (h, w))
            if best is None or cost < best[0]:
                best = (cost, c)
        bg = best[1]

    delta_mask = mismatch | (uncovered & ~index.color_cells[bg])
    delta = frozenset(_bits_cells(delta_mask, w, g))
    tree = grid_term(vec(h, w), bg, tuple(cand.tree for cand, _ in picks))
    dl = coding.l_parse_tree(tree, applied, diffs, (h, w), dl_cfg) \
        + coding.l_delta(delta, (h, w))
    return Reading(tree, delta, tuple(diffs), dl)


# reading models against grids

def read(m: Term, env: Term | None, g: Grid,
         dl_cfg: coding.DLConfig = coding.DEFAULT_DL,
         cfg: ParseConfig = DEFAULT_PARSE,
         caches: Caches | None = None) -> tuple[Reading, ...]:
    """Apply the model side to its environment and parse the grid.

    Returns no readings when the environment does not support the model's
    expressions (dangling variable, negative difference)."""
    try:
        applied = lang.apply_model(m, env)
    except lang.LangError:
        return ()
    if caches is None:
        return parse(applied, g, dl_cfg, cfg)
    key = (applied, g, cfg.max_diffs)
    hit = caches.readings.get(key)
    if hit is None:
        index = caches.indexes.get(g)
        if index is None:
            index = caches.indexes[g] = build_index(g, cfg)
        hit = caches.readings[key] = parse(applied, g, dl_cfg, cfg, index)
    return hit


def read_pair(model: Ctor, gi: Grid, go: Grid,
              dl_cfg: coding.DLConfig = coding.DEFAULT_DL,
              parse_cfg: ParseConfig | None = None,
              caches: Caches | None = None) -> list[ReadingPair]:
    """Chained readings of one example, best combined cost first."""
    if parse_cfg is None:
        parse_cfg = DEFAULT_PARSE
    m_in, m_out = model.args
    pairs: list[ReadingPair] = []
    for rin in read(m_in, None, gi, dl_cfg, parse_cfg, caches):
        for rout in read(m_out, rin.tree, go, dl_cfg, parse_cfg, caches):
            pairs.append(ReadingPair(rin, rout, rin.dl + rout.dl))
    pairs.sort(key=lambda p: p.dl)
    return pairs
