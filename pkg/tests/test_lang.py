"""Term model: constructors, paths, substitution, matching, evaluation, text."""

import pytest

from gridmdl import lang
from gridmdl.lang import (
    App, Ctor, LangError, Unknown, Var, UNK,
    grid, in_out, point, pos_shape, rectangle, vec, bitmap,
)


def sample_grid_term():
    return grid(vec(4, 5), 0, [
        pos_shape(vec(1, 2), rectangle(vec(2, 2), 3, lang.FULL)),
        pos_shape(vec(0, 0), point(7)),
    ])


# construction

def test_constructors_build_plain_ctors():
    t = rectangle(vec(2, 3), 6, lang.BORDER)
    assert t == Ctor("Rectangle", (Ctor("Vec", (2, 3)), 6, Ctor("Border")))


def test_grid_layers_become_tuple():
    t = grid(UNK, UNK, [pos_shape(UNK, UNK)])
    assert isinstance(t.args[2], tuple)
    assert len(t.args[2]) == 1


def test_bitmap_rows_frozen():
    b = bitmap([[1, 0], [0, 1]])
    assert b.args[0] == ((1, 0), (0, 1))


def test_ctor_fields_and_sort():
    assert lang.ctor_sort("Grid") == lang.GRID
    names = [f for f, _, _ in lang.ctor_fields("Grid")]
    assert names == ["size", "color", "layers"]
    with pytest.raises(LangError):
        lang.ctor_fields("Triangle")


def test_unknown_singleton_prints_as_question_mark():
    assert lang.term_to_text(UNK) == "?"


# resolve / subst

def test_resolve_walks_fields_and_layer_indices():
    t = sample_grid_term()
    assert lang.resolve(t, ()) is t
    assert lang.resolve(t, ("size", "j")) == 5
    assert lang.resolve(t, ("layers", 1, "shape", "color")) == 7


def test_resolve_unknown_field_raises():
    with pytest.raises(LangError):
        lang.resolve(sample_grid_term(), ("area",))
    with pytest.raises(LangError):
        lang.resolve(sample_grid_term(), ("layers", 5))


def test_subst_replaces_deep_slot():
    t = sample_grid_term()
    t2 = lang.subst(t, ("layers", 0, "shape", "color"), 9)
    assert lang.resolve(t2, ("layers", 0, "shape", "color")) == 9
    # the original term is untouched
    assert lang.resolve(t, ("layers", 0, "shape", "color")) == 3


def test_subst_insert_prepends_and_appends_layers():
    t = sample_grid_term()
    new = pos_shape(UNK, UNK)
    front = lang.subst(t, ("layers", 0), new, insert=True)
    assert len(front.args[2]) == 3 and front.args[2][0] == new
    back = lang.subst(t, ("layers", 2), new, insert=True)
    assert back.args[2][2] == new


def test_subst_bad_path_raises():
    with pytest.raises(LangError):
        lang.subst(sample_grid_term(), ("layers", 9), 1)


def test_shift_layer_refs_renumbers_from_insert_position():
    e = vec(Var(("layers", 0, "pos", "i")), Var(("layers", 1, "pos", "j")))
    shifted = lang.shift_layer_refs(e, 1)
    assert shifted.args[0] == Var(("layers", 0, "pos", "i"))
    assert shifted.args[1] == Var(("layers", 2, "pos", "j"))
    # non-layer paths stay put
    assert lang.shift_layer_refs(Var(("size", "i")), 0) == Var(("size", "i"))


# predicates

def test_matches_unknown_absorbs_anything():
    assert lang.matches(sample_grid_term(), UNK)
    assert lang.matches(3, UNK)


def test_matches_compares_ctor_names_and_args():
    assert lang.matches(point(3), point(UNK))
    assert not lang.matches(point(3), point(4))
    assert not lang.matches(point(3), rectangle(UNK, UNK, UNK))


def test_is_ground_and_definite():
    assert lang.is_ground(sample_grid_term())
    assert not lang.is_ground(grid(UNK, 0, []))
    e = grid(vec(2, 2), Var(("color",)), [])
    assert not lang.is_ground(e)
    assert lang.is_definite(e)
    assert not lang.is_definite(grid(UNK, 0, []))


def test_unknown_paths_in_walk_order():
    t = grid(UNK, 4, [pos_shape(UNK, rectangle(vec(2, UNK), UNK, UNK))])
    assert lang.unknown_paths(t) == (
        ("size",),
        ("layers", 0, "pos"),
        ("layers", 0, "shape", "size", "j"),
        ("layers", 0, "shape", "color"),
        ("layers", 0, "shape", "mask"),
    )


def test_node_count_counts_every_slot():
    # Grid, Vec, 2, 3, color: five nodes; the layers list itself is not one.
    assert lang.node_count(grid(vec(2, 3), 0, [])) == 5


def test_walk_slots_includes_root():
    paths = [p for p, _ in lang.walk_slots(grid(vec(2, 3), 0, []))]
    assert paths == [(), ("size",), ("size", "i"), ("size", "j"), ("color",)]


def test_typed_slots_reports_sorts_and_skips_expressions():
    t = grid(vec(2, Var(("size", "j"))), UNK, [])
    slots = {p: s for p, s, _ in lang.typed_slots(t)}
    assert slots[("color",)] == lang.COLOR
    assert slots[("size",)] == lang.VEC
    # the expression fills the whole slot: nothing inside it is listed
    assert ("size", "j") in slots
    assert all(not isinstance(sub, App) for _, _, sub in lang.typed_slots(t))


# evaluation

def test_eval_expr_var_resolves_into_environment():
    env = sample_grid_term()
    assert lang.eval_expr(Var(("layers", 0, "pos", "j")), env) == 2


def test_eval_expr_arithmetic():
    env = sample_grid_term()
    x = Var(("layers", 0, "pos", "i"))
    assert lang.eval_expr(App("plus", (x, 2)), env) == 3
    assert lang.eval_expr(App("minus", (x, 1)), env) == 0
    assert lang.eval_expr(lang.ZERO, env) == 0


def test_eval_expr_negative_result_raises():
    env = sample_grid_term()
    with pytest.raises(LangError):
        lang.eval_expr(App("minus", (Var(("layers", 0, "pos", "i")), 2)), env)


def test_apply_model_substitutes_expressions():
    env = sample_grid_term()
    m = grid(Var(("layers", 0, "shape", "size")), Var(("layers", 1, "shape", "color")), [])
    applied = lang.apply_model(m, env)
    assert applied == grid(vec(2, 2), 7, [])


def test_apply_model_without_environment_requires_no_expressions():
    plain = grid(UNK, 0, [])
    assert lang.apply_model(plain, None) == plain
    with pytest.raises(LangError):
        lang.apply_model(grid(Var(("size",)), 0, []), None)


# environment signatures

def test_signature_expands_vector_and_object_unknowns():
    sig = lang.signature(grid(UNK, UNK, [pos_shape(UNK, UNK)]))
    assert sig.has(("size", "i"), lang.NAT)
    assert sig.has(("color",), lang.COLOR)
    assert sig.has(("layers", 0), lang.OBJECT)
    assert sig.has(("layers", 0, "pos", "j"), lang.NAT)
    assert sig.has(("layers", 0, "shape"), lang.SHAPE)


def test_signature_rejects_expressions():
    with pytest.raises(LangError):
        lang.signature(grid(Var(("color",)), 0, []))


def test_field_steps_drops_indices():
    assert lang.field_steps(("layers", 1, "shape", "size")) == ("layers", "shape", "size")


# text round-trips

TEXT_TERMS = [
    (UNK, lang.GRID, "?"),
    (grid(vec(2, 3), 0, []), lang.GRID, "Grid(Vec(2, 3), black, [])"),
    (point(7), lang.SHAPE, "Point(orange)"),
    (rectangle(UNK, 5, lang.EVEN_CHECKBOARD), lang.SHAPE,
     "Rectangle(?, grey, EvenCheckboard)"),
    (bitmap([[1, 0], [1, 1]]), lang.MASK, "Bitmap(10/11)"),
    (Var(("layers", 0, "pos", "i")), lang.NAT, "layers[0].pos.i"),
    (App("plus", (Var(("size", "i")), 2)), lang.NAT, "size.i + 2"),
    (App("minus", (Var(("size", "j")), Var(("size", "i")))), lang.NAT, "size.j - size.i"),
    (lang.ZERO, lang.NAT, "zero"),
]


@pytest.mark.parametrize("term,sort,text", TEXT_TERMS)
def test_term_to_text(term, sort, text):
    assert lang.term_to_text(term, sort) == text


@pytest.mark.parametrize("term,sort,text", TEXT_TERMS)
def test_parse_term_round_trip(term, sort, text):
    assert lang.parse_term(text, sort) == term


def test_color_names_cover_all_ten():
    assert len(lang.COLOR_NAMES) == 10
    assert lang.COLOR_NAMES[0] == "black"
    assert lang.term_to_text(grid(vec(1, 1), 9, []), lang.GRID) == "Grid(Vec(1, 1), brown, [])"


def test_model_text_round_trip():
    m = in_out(
        grid(vec(12, UNK), 0, [pos_shape(UNK, rectangle(UNK, UNK, lang.FULL))]),
        grid(Var(("layers", 0, "shape", "size")), UNK, []),
    )
    text = lang.model_to_text(m)
    assert text.startswith("in: ") and "\nout: " in text
    assert lang.parse_model(text) == m


def test_path_text_round_trip():
    p = ("layers", 2, "shape", "size", "i")
    assert lang.path_to_text(p) == "layers[2].shape.size.i"
    assert lang.parse_path("layers[2].shape.size.i") == p


def test_parse_term_rejects_garbage():
    for bad in ["Grid(", "Quad(1)", "Grid(Vec(1, 2), black)", "layers[x].pos"]:
        with pytest.raises(LangError):
            lang.parse_term(bad)
