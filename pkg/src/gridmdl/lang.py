"""Term language for grid models.

A model is a term built from a small set of typed constructors (grids, layered
objects, shapes, masks, vectors) plus template holes (`Unknown`) and, on the
output side, expressions (`Var` references into the input parse tree, `zero`,
`plus`, `minus`). Terms are immutable; every operation rebuilds.

Paths address subterms as tuples of steps: field names (`"size"`, `"shape"`),
list indices (ints, valid right after a `"layers"` step), and the pair roots
`"in"` / `"out"`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

# sorts
PAIR = "pair"
GRID = "grid"
OBJECT = "object"
SHAPE = "shape"
VEC = "vec"
MASK = "mask"
NAT = "nat"
COLOR = "color"
BITS = "bits"

COLOR_NAMES = (
    "black", "blue", "red", "green", "yellow",
    "grey", "pink", "orange", "lightblue", "brown",
)
NUM_COLORS = 10
BLACK, BLUE, RED, GREEN, YELLOW, GREY, PINK, ORANGE, LIGHTBLUE, BROWN = range(10)


@dataclass(frozen=True)
class Ctor:
    """Constructor node; `args` holds one entry per field (list fields hold a tuple)."""
    name: str
    args: tuple = ()


@dataclass(frozen=True)
class Unknown:
    """Template hole, matches any ground term of the slot's sort."""


@dataclass(frozen=True)
class Var:
    """Reference to a path in the environment (the input parse tree)."""
    path: tuple


@dataclass(frozen=True)
class App:
    """Function application over naturals: zero, plus, minus."""
    fn: str
    args: tuple = ()


Term = Union[int, tuple, Ctor, Unknown, Var, App]

UNK = Unknown()
ZERO = App("zero")

# field table: constructor name -> (sort, ((field, sort, is_list), ...))
CONSTRUCTORS: dict[str, tuple[str, tuple[tuple[str, str, bool], ...]]] = {
    "InOut": (PAIR, (("in", GRID, False), ("out", GRID, False))),
    "Grid": (GRID, (("size", VEC, False), ("color", COLOR, False), ("layers", OBJECT, True))),
    "PosShape": (OBJECT, (("pos", VEC, False), ("shape", SHAPE, False))),
    "Point": (SHAPE, (("color", COLOR, False),)),
    "Rectangle": (SHAPE, (("size", VEC, False), ("color", COLOR, False), ("mask", MASK, False))),
    "Vec": (VEC, (("i", NAT, False), ("j", NAT, False))),
    "Bitmap": (MASK, (("bitmap", BITS, False),)),
    "Full": (MASK, ()),
    "Border": (MASK, ()),
    "EvenCheckboard": (MASK, ()),
    "OddCheckboard": (MASK, ()),
    "PlusCross": (MASK, ()),
    "TimesCross": (MASK, ()),
}

MASK_NAMES = ("Bitmap", "Full", "Border", "EvenCheckboard", "OddCheckboard",
              "PlusCross", "TimesCross")

# constructors by sort, in canonical order
SORT_CONSTRUCTORS: dict[str, tuple[str, ...]] = {}
for _name, (_sort, _) in CONSTRUCTORS.items():
    SORT_CONSTRUCTORS.setdefault(_sort, ())
    SORT_CONSTRUCTORS[_sort] += (_name,)


def in_out(gin: Term, gout: Term) -> Ctor:
    return Ctor("InOut", (gin, gout))


def grid(size: Term, color: Term, layers: tuple = ()) -> Ctor:
    return Ctor("Grid", (size, color, tuple(layers)))


def pos_shape(pos: Term, shape: Term) -> Ctor:
    return Ctor("PosShape", (pos, shape))


def point(color: Term) -> Ctor:
    return Ctor("Point", (color,))


def rectangle(size: Term, color: Term, mask: Term) -> Ctor:
    return Ctor("Rectangle", (size, color, mask))


def vec(i: Term, j: Term) -> Ctor:
    return Ctor("Vec", (i, j))


def bitmap(rows) -> Ctor:
    return Ctor("Bitmap", (tuple(tuple(int(b) for b in row) for row in rows),))


FULL = Ctor("Full")
BORDER = Ctor("Border")
EVEN_CHECKBOARD = Ctor("EvenCheckboard")
ODD_CHECKBOARD = Ctor("OddCheckboard")
PLUS_CROSS = Ctor("PlusCross")
TIMES_CROSS = Ctor("TimesCross")


class LangError(Exception):
    """Ill-formed term, bad path, or failed evaluation."""


def ctor_fields(name: str) -> tuple[tuple[str, str, bool], ...]:
    try:
        return CONSTRUCTORS[name][1]
    except KeyError:
        raise LangError(f"unknown constructor {name!r}")


def ctor_sort(name: str) -> str:
    return CONSTRUCTORS[name][0]


def resolve(term: Term, path: tuple) -> Term:
    """Follow `path` down from `term`; raises LangError if a step does not apply."""
    t = term
    i = 0
    n = len(path)
    while i < n:
        step = path[i]
        if not isinstance(t, Ctor):
            raise LangError(f"step {step!r} into non-constructor at {path[:i]}")
        fields = ctor_fields(t.name)
        for k, (fname, _, is_list) in enumerate(fields):
            if fname == step:
                t = t.args[k]
                i += 1
                if is_list:
                    if i >= n or not isinstance(path[i], int):
                        raise LangError(f"list field {fname!r} needs an index at {path[:i]}")
                    idx = path[i]
                    if not 0 <= idx < len(t):
                        raise LangError(f"index {idx} out of range at {path[:i]}")
                    t = t[idx]
                    i += 1
                break
        else:
            raise LangError(f"no field {step!r} on {t.name} at {path[:i]}")
    return t


def subst(term: Term, path: tuple, repl: Term, insert: bool = False) -> Term:
    """Replace the subterm at `path` by `repl`.

    With `insert=True` the path must end with a list index; `repl` is inserted
    at that position (index == length appends).
    """
    if not path:
        if insert:
            raise LangError("insertion needs a list position")
        return repl
    if not isinstance(term, Ctor):
        raise LangError(f"step {path[0]!r} into non-constructor")
    fields = ctor_fields(term.name)
    for k, (fname, _, is_list) in enumerate(fields):
        if fname != path[0]:
            continue
        old = term.args[k]
        if is_list:
            if len(path) < 2 or not isinstance(path[1], int):
                raise LangError(f"list field {fname!r} needs an index")
            idx = path[1]
            if insert and len(path) == 2:
                if not 0 <= idx <= len(old):
                    raise LangError(f"insert index {idx} out of range")
                new = old[:idx] + (repl,) + old[idx:]
            else:
                if not 0 <= idx < len(old):
                    raise LangError(f"index {idx} out of range")
                new = old[:idx] + (subst(old[idx], path[2:], repl, insert),) + old[idx + 1:]
        else:
            new = subst(old, path[1:], repl, insert)
        return Ctor(term.name, term.args[:k] + (new,) + term.args[k + 1:])
    raise LangError(f"no field {path[0]!r} on {term.name}")


def is_expr(t: Term) -> bool:
    return isinstance(t, (Var, App))


def is_ground(t: Term) -> bool:
    """True when the term contains no unknowns and no expressions."""
    if isinstance(t, (Unknown, Var, App)):
        return False
    if isinstance(t, Ctor):
        for arg, (_, sort, is_list) in zip(t.args, ctor_fields(t.name)):
            if sort == BITS:
                continue
            if is_list:
                if not all(is_ground(x) for x in arg):
                    return False
            elif not is_ground(arg):
                return False
    return True


def is_definite(t: Term) -> bool:
    """True when the term contains no unknowns (expressions allowed)."""
    if isinstance(t, Unknown):
        return False
    if isinstance(t, (Var, App)):
        return True
    if isinstance(t, Ctor):
        for arg, (_, sort, is_list) in zip(t.args, ctor_fields(t.name)):
            if sort == BITS:
                continue
            if is_list:
                if not all(is_definite(x) for x in arg):
                    return False
            elif not is_definite(arg):
                return False
    return True


def matches(datum: Term, template: Term) -> bool:
    """Does ground `datum` instantiate `template`? Unknowns match anything."""
    if isinstance(template, Unknown):
        return True
    if is_expr(template):
        raise LangError("matches() expects an expression-free template")
    if isinstance(template, Ctor):
        if not isinstance(datum, Ctor) or datum.name != template.name:
            return False
        for d, t, (_, sort, is_list) in zip(datum.args, template.args, ctor_fields(template.name)):
            if is_list:
                if len(d) != len(t):
                    return False
                if not all(matches(x, y) for x, y in zip(d, t)):
                    return False
            elif sort == BITS:
                if d != t:
                    return False
            elif not matches(d, t):
                return False
        return True
    return datum == template


def unknown_paths(t: Term, _prefix: tuple = ()) -> tuple[tuple, ...]:
    """Paths of all unknowns, in depth-first left-to-right order."""
    if isinstance(t, Unknown):
        return (_prefix,)
    if not isinstance(t, Ctor):
        return ()
    out: list[tuple] = []
    for arg, (fname, sort, is_list) in zip(t.args, ctor_fields(t.name)):
        if sort == BITS:
            continue
        if is_list:
            for k, x in enumerate(arg):
                out.extend(unknown_paths(x, _prefix + (fname, k)))
        else:
            out.extend(unknown_paths(arg, _prefix + (fname,)))
    return tuple(out)


def walk_slots(t: Term, _prefix: tuple = ()) -> Iterator[tuple[tuple, Term]]:
    """Yield (path, subterm) for every slot of the term, root included.

    List fields contribute their elements, not the list itself; bitmap
    payloads count as one slot.
    """
    yield _prefix, t
    if not isinstance(t, Ctor):
        return
    for arg, (fname, sort, is_list) in zip(t.args, ctor_fields(t.name)):
        if is_list:
            for k, x in enumerate(arg):
                yield from walk_slots(x, _prefix + (fname, k))
        else:
            yield from walk_slots(arg, _prefix + (fname,))


def node_count(t: Term) -> int:
    return sum(1 for _ in walk_slots(t))


def typed_slots(t: Term, sort: str = GRID, _prefix: tuple = ()) -> Iterator[tuple[tuple, str, Term]]:
    """Yield (path, sort, subterm) for every template slot.

    Does not descend into expressions or bitmap payloads; list fields
    contribute their elements only.
    """
    yield _prefix, sort, t
    if not isinstance(t, Ctor):
        return
    for arg, (fname, fsort, is_list) in zip(t.args, ctor_fields(t.name)):
        if fsort == BITS:
            continue
        if is_list:
            for k, x in enumerate(arg):
                yield from typed_slots(x, fsort, _prefix + (fname, k))
        else:
            yield from typed_slots(arg, fsort, _prefix + (fname,))


def eval_expr(e: Term, env: Term) -> Term:
    """Evaluate an expression to a ground value against the environment tree.

    Raises LangError on unresolvable variables, non-natural arguments, or a
    negative subtraction result.
    """
    if isinstance(e, Var):
        if env is None:
            raise LangError("variable with no environment")
        v = resolve(env, e.path)
        if not is_ground(v):
            raise LangError(f"environment value at {e.path} is not ground")
        return v
    if isinstance(e, App):
        if e.fn == "zero":
            return 0
        vals = []
        for a in e.args:
            v = a if isinstance(a, int) else eval_expr(a, env)
            if not isinstance(v, int):
                raise LangError(f"{e.fn} expects naturals")
            vals.append(v)
        if e.fn == "plus":
            return vals[0] + vals[1]
        if e.fn == "minus":
            r = vals[0] - vals[1]
            if r < 0:
                raise LangError("negative difference")
            return r
        raise LangError(f"unknown function {e.fn!r}")
    raise LangError("not an expression")


def apply_model(m: Term, env: Term | None) -> Term:
    """Instantiate every expression in `m` against `env`; unknowns survive."""
    if is_expr(m):
        return eval_expr(m, env)
    if not isinstance(m, Ctor):
        return m
    args = []
    for arg, (_, sort, is_list) in zip(m.args, ctor_fields(m.name)):
        if is_list:
            args.append(tuple(apply_model(x, env) for x in arg))
        elif sort == BITS:
            args.append(arg)
        else:
            args.append(apply_model(arg, env))
    return Ctor(m.name, tuple(args))


def shift_layer_refs(t: Term, insert_pos: int) -> Term:
    """Renumber `layers[j]` variable references for j >= insert_pos.

    Applied to the output model when an object is inserted into the input
    model's layer list, so existing references keep pointing at the same
    object.
    """
    if isinstance(t, Var):
        p = t.path
        if len(p) >= 2 and p[0] == "layers" and isinstance(p[1], int) and p[1] >= insert_pos:
            return Var(("layers", p[1] + 1) + p[2:])
        return t
    if isinstance(t, App):
        return App(t.fn, tuple(shift_layer_refs(a, insert_pos) for a in t.args))
    if isinstance(t, Ctor):
        args = []
        for arg, (_, sort, is_list) in zip(t.args, ctor_fields(t.name)):
            if is_list:
                args.append(tuple(shift_layer_refs(x, insert_pos) for x in arg))
            elif sort == BITS:
                args.append(arg)
            else:
                args.append(shift_layer_refs(arg, insert_pos))
        return Ctor(t.name, tuple(args))
    return t


# environment signatures

@dataclass(frozen=True)
class EnvSig:
    """Statically guaranteed environment paths of an input model, with sorts."""
    entries: tuple[tuple[tuple, str], ...]

    def paths_of_sort(self, sort: str) -> tuple[tuple, ...]:
        return tuple(p for p, s in self.entries if s == sort)

    def has(self, path: tuple, sort: str) -> bool:
        return (path, sort) in set(self.entries)


def _sig_unknown(path: tuple, sort: str, out: list) -> None:
    out.append((path, sort))
    if sort == VEC:
        out.append((path + ("i",), NAT))
        out.append((path + ("j",), NAT))
    elif sort == OBJECT:
        _sig_unknown(path + ("pos",), VEC, out)
        out.append((path + ("shape",), SHAPE))


def _sig_walk(t: Term, sort: str, path: tuple, out: list) -> None:
    if isinstance(t, Unknown):
        _sig_unknown(path, sort, out)
        return
    if is_expr(t):
        raise LangError("input models carry no expressions")
    out.append((path, sort))
    if isinstance(t, Ctor):
        for arg, (fname, fsort, is_list) in zip(t.args, ctor_fields(t.name)):
            if fsort == BITS:
                continue
            if is_list:
                for k, x in enumerate(arg):
                    _sig_walk(x, fsort, path + (fname, k), out)
            else:
                _sig_walk(arg, fsort, path + (fname,), out)


def signature(input_model: Term) -> EnvSig:
    """Environment paths every parse of `input_model` is guaranteed to define.

    Unknowns of vector and object sort expand (their fillings always use the
    sole constructor of the sort); other unknowns stop at the slot itself.
    """
    out: list[tuple[tuple, str]] = []
    _sig_walk(input_model, GRID, (), out)
    return EnvSig(tuple(out))


def field_steps(path: tuple) -> tuple[str, ...]:
    """Path with list indices dropped, for name-based similarity."""
    return tuple(s for s in path if isinstance(s, str))


# text syntax

def path_to_text(path: tuple) -> str:
    parts: list[str] = []
    for step in path:
        if isinstance(step, int):
            parts[-1] += f"[{step}]"
        else:
            parts.append(step)
    return ".".join(parts)


def term_to_text(t: Term, sort: str = GRID) -> str:
    """Canonical text for a term; `sort` disambiguates colours from naturals."""
    if isinstance(t, Unknown):
        return "?"
    if isinstance(t, Var):
        return path_to_text(t.path)
    if isinstance(t, App):
        if t.fn == "zero":
            return "zero"
        op = " + " if t.fn == "plus" else " - "
        return op.join(term_to_text(a, NAT) for a in t.args)
    if isinstance(t, int):
        if sort == COLOR:
            if not 0 <= t < NUM_COLORS:
                raise LangError(f"colour out of range: {t}")
            return COLOR_NAMES[t]
        return str(t)
    if isinstance(t, Ctor):
        fields = ctor_fields(t.name)
        if not fields:
            return t.name
        if t.name == "Bitmap":
            rows = "/".join("".join(str(b) for b in row) for row in t.args[0])
            return f"Bitmap({rows})"
        parts = []
        for arg, (_, fsort, is_list) in zip(t.args, fields):
            if is_list:
                parts.append("[" + ", ".join(term_to_text(x, fsort) for x in arg) + "]")
            else:
                parts.append(term_to_text(arg, fsort))
        return f"{t.name}(" + ", ".join(parts) + ")"
    raise LangError(f"cannot render {t!r}")


def model_to_text(model: Ctor) -> str:
    """Two-line form of a task model: `in:` and `out:` grid terms."""
    if not (isinstance(model, Ctor) and model.name == "InOut"):
        raise LangError("expected an InOut model")
    gin, gout = model.args
    return f"in: {term_to_text(gin, GRID)}\nout: {term_to_text(gout, GRID)}"


class _Parser:
    """Recursive-descent reader for the canonical term syntax."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg: str):
        raise LangError(f"parse error at {self.pos}: {msg}")

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t\n":
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def eat(self, ch: str) -> None:
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.pos += 1

    def word(self) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] == "_"):
            self.pos += 1
        if self.pos == start:
            self.error("expected a name or number")
        return self.text[start:self.pos]

    def number(self) -> int:
        w = self.word()
        if not w.isdigit():
            self.error(f"expected a number, got {w!r}")
        return int(w)

    def path(self, first: str | None = None) -> tuple:
        steps: list = []
        w = first if first is not None else self.word()
        while True:
            steps.append(w)
            while self.peek() == "[":
                self.eat("[")
                steps.append(self.number())
                self.eat("]")
            if self.peek() == ".":
                self.eat(".")
                w = self.word()
            else:
                return tuple(steps)

    def term(self, sort: str) -> Term:
        if self.peek() == "?":
            self.eat("?")
            return UNK
        if sort == NAT and self.peek().isdigit():
            n = self.number()
            return self.maybe_arith(n)
        w = self.word()
        if w in CONSTRUCTORS:
            return self.ctor(w, sort)
        if sort == COLOR and w in COLOR_NAMES:
            return COLOR_NAMES.index(w)
        if w == "zero":
            return self.maybe_arith(ZERO) if sort == NAT else ZERO
        if w.isdigit():
            return self.maybe_arith(int(w)) if sort == NAT else int(w)
        # a bare path: a variable reference
        v = Var(self.path(first=w))
        return self.maybe_arith(v) if sort == NAT else v

    def maybe_arith(self, left: Term) -> Term:
        while True:
            c = self.peek()
            if c == "+":
                self.eat("+")
                left = App("plus", (left, self.atom()))
            elif c == "-":
                self.eat("-")
                left = App("minus", (left, self.atom()))
            else:
                return left

    def atom(self) -> Term:
        if self.peek().isdigit():
            return self.number()
        w = self.word()
        if w == "zero":
            return ZERO
        return Var(self.path(first=w))

    def ctor(self, name: str, sort: str) -> Term:
        csort, fields = CONSTRUCTORS[name]
        if csort != sort:
            self.error(f"{name} is a {csort}, expected a {sort}")
        if not fields:
            if self.peek() == "(":
                self.eat("(")
                self.eat(")")
            return Ctor(name)
        if name == "Bitmap":
            self.eat("(")
            self.skip_ws()
            rows: list[tuple[int, ...]] = []
            row: list[int] = []
            while self.peek() != ")":
                c = self.text[self.pos]
                self.pos += 1
                if c == "/":
                    rows.append(tuple(row))
                    row = []
                elif c in "01":
                    row.append(int(c))
                else:
                    self.error(f"bad bitmap character {c!r}")
            rows.append(tuple(row))
            self.eat(")")
            if any(len(r) != len(rows[0]) for r in rows) or not rows[0]:
                self.error("ragged or empty bitmap")
            return Ctor(name, (tuple(rows),))
        self.eat("(")
        args: list = []
        for k, (_, fsort, is_list) in enumerate(fields):
            if k:
                self.eat(",")
            if is_list:
                self.eat("[")
                items: list = []
                while self.peek() != "]":
                    if items:
                        self.eat(",")
                    items.append(self.term(fsort))
                self.eat("]")
                args.append(tuple(items))
            else:
                args.append(self.term(fsort))
        self.eat(")")
        return Ctor(name, tuple(args))


def parse_term(text: str, sort: str = GRID) -> Term:
    p = _Parser(text)
    t = p.term(sort)
    p.skip_ws()
    if p.pos != len(p.text):
        p.error("trailing input")
    return t


def parse_path(text: str) -> tuple:
    p = _Parser(text)
    path = p.path()
    p.skip_ws()
    if p.pos != len(p.text):
        p.error("trailing input")
    return path


def parse_model(text: str) -> Ctor:
    """Read a task model, either `InOut(...)` or the two-line in:/out: form."""
    stripped = text.strip()
    if stripped.startswith("InOut"):
        t = parse_term(stripped, PAIR)
        if not (isinstance(t, Ctor) and t.name == "InOut"):
            raise LangError("expected an InOut model")
        return t
    gin = gout = None
    for line in stripped.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("in:"):
            gin = parse_term(line[3:], GRID)
        elif line.startswith("out:"):
            gout = parse_term(line[4:], GRID)
        else:
            raise LangError(f"unexpected model line: {line!r}")
    if gin is None or gout is None:
        raise LangError("model text needs both in: and out: lines")
    return in_out(gin, gout)
