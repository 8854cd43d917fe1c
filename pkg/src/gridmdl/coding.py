"""Description lengths, in bits, for models, parse trees, deltas and tasks.

Two-part scores throughout: L(M, D) = L(M) + alpha * sum over examples of the
best chained reading cost. Normalized description lengths divide each side by
the initial model's score so that the initial model always sits at 2.000.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from . import lang
from .lang import (
    App, Ctor, Term, Unknown, Var,
    BITS, COLOR, GRID, MASK, NAT, OBJECT, PAIR, SHAPE, VEC,
)

LOG2_COLORS = math.log2(10)

# slot kind: plain value or constructor / expression / unknown
P_TEMPLATE = {"value": 0.4, "expr": 0.5, "unknown": 0.1}
# expression kind
P_EXPR = {"app": 0.5, "var": 0.5}
FUNCTIONS = ("zero", "plus", "minus")
# background colours are mostly black
P_BG = {c: (0.91 if c == 0 else 0.01) for c in range(10)}
P_MASK = {
    "Full": 0.5, "Bitmap": 0.3, "Border": 0.1,
    "EvenCheckboard": 0.025, "OddCheckboard": 0.025,
    "PlusCross": 0.025, "TimesCross": 0.025,
}
P_SHAPE = {"Point": 0.5, "Rectangle": 0.5}


@dataclass(frozen=True)
class DLConfig:
    """Knobs of the description-length scheme."""
    alpha: float = 10.0
    max_dim: int = 30


DEFAULT_DL = DLConfig()


class ModelEvalError(Exception):
    """A model failed to describe some example (no reading)."""


def l_nat(n: int) -> float:
    """Universal code for naturals: 2*log2(n+1) + 1 bits."""
    if n < 0:
        raise ValueError("naturals only")
    return 2.0 * math.log2(n + 1) + 1.0

def l_uniform(size: int) -> float:
    """Uniform code over a finite set of the given size."""
    if size < 1:
        raise ValueError("empty support")
    return math.log2(size)

def l_dist(p: float) -> float:
    """Optimal code length for probability p."""
    if not 0.0 < p <= 1.0:
        raise ValueError("probability out of range")
    return -math.log2(p)

def l_position(coord: int, extent: int | None, cfg: DLConfig = DEFAULT_DL) -> float:
    """Uniform code for one position component; 30 stands in for unknown extents."""
    return math.log2(extent if extent else cfg.max_dim)

def l_bitmap(h: int, w: int) -> float:
    return float(h * w)


def path_similarity(p: tuple, q: tuple) -> int:
    """Length of the longest common suffix of the field-name steps."""
    a = lang.field_steps(p)
    b = lang.field_steps(q)
    n = 0
    while n < len(a) and n < len(b) and a[-1 - n] == b[-1 - n]:
        n += 1
    return n


def l_var(path: tuple, slot_path: tuple, candidates: Sequence[tuple]) -> float:
    """Code for a variable choice: softmax over same-sort environment paths,
    weighted by name similarity with the slot the expression occupies."""
    weights = [math.exp(path_similarity(p, slot_path)) for p in candidates]
    total = sum(weights)
    try:
        k = candidates.index(path)
    except ValueError:
        raise lang.LangError(f"variable path {path} not in environment")
    return -math.log2(weights[k] / total)


# model coding

def _nat_role_cost(n: int, role: str, axis: int, dims, cfg: DLConfig) -> float:
    if role == "pos":
        extent = dims[axis] if dims else None
        return l_position(n, extent, cfg)
    return l_nat(n)


def _l_expr_body(e: Term, slot_path: tuple, sig: lang.EnvSig, sort: str) -> float:
    """Expression cost after the slot's kind charge."""
    if isinstance(e, Var):
        cands = sig.paths_of_sort(sort)
        if not cands:
            raise lang.LangError(f"no environment path of sort {sort}")
        return l_dist(P_EXPR["var"]) + l_var(e.path, slot_path, cands)
    if isinstance(e, App):
        cost = l_dist(P_EXPR["app"]) + l_uniform(len(FUNCTIONS))
        for a in e.args:
            cost += _l_slot(a, NAT, "arg", 0, None, slot_path, sig)
        return cost
    raise lang.LangError("not an expression")


def _l_slot(t: Term, sort: str, role: str, axis: int, dims,
            slot_path: tuple, sig: lang.EnvSig | None) -> float:
    """Kind charge plus content for one model slot."""
    if isinstance(t, Unknown):
        return l_dist(P_TEMPLATE["unknown"])
    if lang.is_expr(t):
        if sig is None:
            raise lang.LangError("expression outside the output model")
        return l_dist(P_TEMPLATE["expr"]) + _l_expr_body(t, slot_path, sig, sort)
    cost = l_dist(P_TEMPLATE["value"])
    if isinstance(t, int):
        if sort == COLOR:
            return cost + (l_dist(P_BG[t]) if role == "bg" else LOG2_COLORS)
        return cost + _nat_role_cost(t, role, axis, dims, DEFAULT_DL)
    if isinstance(t, Ctor):
        csort = lang.ctor_sort(t.name)
        if csort == SHAPE:
            cost += l_dist(P_SHAPE[t.name])
        elif csort == MASK:
            cost += l_dist(P_MASK[t.name])
        if t.name == "Grid":
            size, color, layers = t.args
            inner = _ground_vec(size)
            cost += _l_slot(size, VEC, "size", 0, None, slot_path + ("size",), sig)
            cost += _l_slot(color, COLOR, "bg", 0, None, slot_path + ("color",), sig)
            cost += l_nat(len(layers))
            for k, obj in enumerate(layers):
                cost += _l_slot(obj, OBJECT, "", 0, inner, slot_path + ("layers", k), sig)
            return cost
        for arg, (fname, fsort, is_list) in zip(t.args, lang.ctor_fields(t.name)):
            if fsort == BITS:
                cost += l_bitmap(len(arg), len(arg[0]))
                continue
            frole = {"pos": "pos", "size": "size"}.get(fname, role if fsort == NAT else "")
            if fsort == NAT:
                ax = 0 if fname == "i" else 1
                cost += _l_slot(arg, NAT, role, ax, dims, slot_path + (fname,), sig)
            else:
                cost += _l_slot(arg, fsort, frole, 0, dims, slot_path + (fname,), sig)
        return cost
    raise lang.LangError(f"cannot code {t!r}")


def _ground_vec(t: Term) -> tuple[int, int] | None:
    if isinstance(t, Ctor) and t.name == "Vec" and isinstance(t.args[0], int) and isinstance(t.args[1], int):
        return t.args[0], t.args[1]
    return None


def l_model(m: Term, sig: lang.EnvSig | None = None, cfg: DLConfig = DEFAULT_DL) -> float:
    """Description length of one grid model.

    `sig` is the input model's environment signature, required when `m`
    contains expressions (the output side). Ground positions are coded
    uniformly over their grid's dimensions when the model pins them, over
    1..30 otherwise.
    """
    return _l_slot(m, GRID, "", 0, None, (), sig)


def l_pair_model(model: Ctor, cfg: DLConfig = DEFAULT_DL) -> tuple[float, float]:
    """(input, output) model costs of an InOut model; the pair node is free."""
    gin, gout = model.args
    return l_model(gin, None, cfg), l_model(gout, lang.signature(gin), cfg)


# data coding: unknown fills, diffs, deltas

def _l_fill(t: Term, sort: str, role: str, dims, cfg: DLConfig) -> float:
    """Code for a ground value standing where the template had an unknown.

    Fills are coded like little ground models: every node, primitives
    included, pays the value-kind charge before its content. This is what
    makes structure-exposing refinements (an unknown vector becoming
    Vec(?, ?)) strictly compressive.
    """
    kind = l_dist(P_TEMPLATE["value"])
    if isinstance(t, int):
        if sort == COLOR:
            return kind + (l_dist(P_BG[t]) if role == "bg" else LOG2_COLORS)
        if role == "pos_i":
            return kind + l_position(t, dims[0] if dims else None, cfg)
        if role == "pos_j":
            return kind + l_position(t, dims[1] if dims else None, cfg)
        return kind + l_nat(t)
    if isinstance(t, Ctor):
        csort = lang.ctor_sort(t.name)
        cost = kind
        if csort == SHAPE:
            cost += l_dist(P_SHAPE[t.name])
        elif csort == MASK:
            cost += l_dist(P_MASK[t.name])
        for arg, (fname, fsort, is_list) in zip(t.args, lang.ctor_fields(t.name)):
            if fsort == BITS:
                cost += l_bitmap(len(arg), len(arg[0]))
            elif is_list:
                cost += l_nat(len(arg))
                for x in arg:
                    cost += _l_fill(x, fsort, "", dims, cfg)
            else:
                frole = role
                if fname == "pos":
                    frole = "pos"
                elif fname == "size":
                    frole = "size"
                elif fsort == NAT:
                    frole = {"pos": ("pos_i" if fname == "i" else "pos_j")}.get(role, "size")
                elif fsort == COLOR:
                    frole = "bg" if (t.name == "Grid") else ""
                cost += _l_fill(arg, fsort, frole, dims, cfg)
        return cost
    raise lang.LangError(f"fill is not ground: {t!r}")


def l_fill(value: Term, sort: str, role: str, dims: tuple[int, int] | None,
           cfg: DLConfig = DEFAULT_DL) -> float:
    """Public wrapper over the fill code; `role` distinguishes positions ("pos"),
    sizes ("size") and background colours ("bg")."""
    if role == "pos" and isinstance(value, int):
        raise lang.LangError("a position fill is a vector or its component with axis role")
    return _l_fill(value, sort, role, dims, cfg)


def _slot_context(model: Term, path: tuple) -> tuple[str, str]:
    """(sort, role) of the slot at `path` in a grid model."""
    sort, role = GRID, ""
    t = model
    for idx, step in enumerate(path):
        if isinstance(step, int):
            continue
        if not isinstance(t, Ctor):
            raise lang.LangError(f"path {path} leaves the model at {step!r}")
        for k, (fname, fsort, is_list) in enumerate(lang.ctor_fields(t.name)):
            if fname == step:
                parent = t
                nxt = t.args[k]
                if is_list:
                    nxt = nxt[path[idx + 1]] if idx + 1 < len(path) else nxt
                if fname == "pos":
                    role = "pos"
                elif fname == "size":
                    role = "size"
                elif fsort == COLOR:
                    role = "bg" if parent.name == "Grid" else ""
                elif fsort == NAT:
                    role = {"pos": ("pos_i" if fname == "i" else "pos_j")}.get(role, role or "size")
                sort = fsort
                t = nxt
                break
        else:
            raise lang.LangError(f"no field {step!r} along {path}")
    return sort, role


def l_parse_tree(tree: Term, applied_model: Term, diffs: Sequence[tuple[tuple, Term]],
                 dims: tuple[int, int], cfg: DLConfig = DEFAULT_DL) -> float:
    """Cost of a parse tree given the applied (expression-free) model.

    Diffs each pay a location choice among the model's nodes plus the ground
    replacement, with a count prefix when any are present. Unknown fills are
    then coded against the diff-patched model, since a replaced subtree takes
    its unknowns with it.
    """
    cost = 0.0
    effective = applied_model
    if diffs:
        cost += l_nat(len(diffs))
        loc = l_uniform(lang.node_count(applied_model))
        for path, ground in diffs:
            sort, role = _slot_context(applied_model, path)
            cost += loc + _l_fill(ground, sort, role, dims, cfg)
            effective = lang.subst(effective, path, ground)
    for path in lang.unknown_paths(effective):
        sort, role = _slot_context(effective, path)
        cost += _l_fill(lang.resolve(tree, path), sort, role, dims, cfg)
    return cost


def l_delta(delta, dims: tuple[int, int]) -> float:
    """Cost of the cell-level correction set over a drawn grid.

    Each cell is a point object relative to the drawn grid: position uniform
    over its dimensions, colour uniform over ten, one shape-constructor bit.
    An empty delta costs nothing.
    """
    n = len(delta)
    if n == 0:
        return 0.0
    h, w = dims
    per = math.log2(h) + math.log2(w) + LOG2_COLORS + 1.0
    return l_nat(n) + n * per


# task-level evaluation

@dataclass
class ExampleEval:
    """Chained readings of one example; `pairs` sorted by combined cost."""
    pairs: list
    @property
    def best(self):
        return self.pairs[0]


@dataclass
class TaskEval:
    """Both model costs and summed best reading costs over the examples."""
    model: Ctor
    l_model_in: float
    l_model_out: float
    data_in: float
    data_out: float
    examples: list[ExampleEval] = field(default_factory=list)

    def totals(self, cfg: DLConfig = DEFAULT_DL) -> dict:
        lm_i, lm_o = self.l_model_in, self.l_model_out
        ld_i, ld_o = cfg.alpha * self.data_in, cfg.alpha * self.data_out
        return {
            "in": (lm_i, ld_i, lm_i + ld_i),
            "out": (lm_o, ld_o, lm_o + ld_o),
            "both": (lm_i + lm_o, ld_i + ld_o, lm_i + lm_o + ld_i + ld_o),
        }

    def normalized(self, norm: "Normalizer", cfg: DLConfig = DEFAULT_DL) -> float:
        t = self.totals(cfg)
        return t["in"][2] / norm.lam_in + t["out"][2] / norm.lam_out

    def normalized_sides(self, norm: "Normalizer", cfg: DLConfig = DEFAULT_DL) -> tuple[float, float]:
        t = self.totals(cfg)
        return t["in"][2] / norm.lam_in, t["out"][2] / norm.lam_out


@dataclass(frozen=True)
class Normalizer:
    """Per-side scores of the initial model, used to normalize later models."""
    lam_in: float
    lam_out: float

    @classmethod
    def from_initial(cls, ev: TaskEval, cfg: DLConfig = DEFAULT_DL) -> "Normalizer":
        t = ev.totals(cfg)
        return cls(t["in"][2], t["out"][2])


def l_task(model: Ctor, examples, dl_cfg: DLConfig = DEFAULT_DL,
           parse_cfg=None, caches=None) -> TaskEval:
    """Evaluate a task model over example pairs.

    Examples are (input Grid, output Grid) pairs. Each example contributes its
    best chained reading; an example with no reading raises ModelEvalError.
    """
    from . import parsing  # read_pair needs the parser

    lm_i, lm_o = l_pair_model(model, dl_cfg)
    ev = TaskEval(model, lm_i, lm_o, 0.0, 0.0)
    for gi, go in examples:
        pairs = parsing.read_pair(model, gi, go, dl_cfg, parse_cfg, caches)
        if not pairs:
            raise ModelEvalError("example admits no chained reading")
        ev.examples.append(ExampleEval(pairs))
        best = pairs[0]
        ev.data_in += best.rin.dl
        ev.data_out += best.rout.dl
    return ev


def format_eval_table(ev: TaskEval, norm: Normalizer | None = None,
                      cfg: DLConfig = DEFAULT_DL) -> str:
    """Three-row cost table: model bits, data bits, total, and normalized total."""
    t = ev.totals(cfg)
    if norm is None:
        norm = Normalizer.from_initial(ev, cfg)
    nin, nout = ev.normalized_sides(norm, cfg)
    rows = [("input", *t["in"], nin), ("output", *t["out"], nout),
            ("chained", *t["both"], nin + nout)]
    lines = [f"{'':8} {'L(M)':>10} {'L(D|M)':>12} {'L(M,D)':>12} {'normalized':>10}"]
    for name, lm, ld, lmd, nrm in rows:
        lines.append(f"{name:8} {lm:10.1f} {ld:12.1f} {lmd:12.1f} {nrm:10.3f}")
    return "\n".join(lines)
