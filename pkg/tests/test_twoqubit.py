import itertools

import numpy as np
import pytest

from ksproof.exactalg import Ray, is_orthogonal_basis
from ksproof.twoqubit import (
    ContextClass,
    EigenspaceError,
    Entangled,
    Factorizable,
    LabelParseError,
    PauliWord,
    SignedObservable,
    class_counts,
    classify_context,
    classify_set,
    format_labels,
    joint_eigenray,
    parse_labels,
    pauli_matrix,
    question_to_ray,
    translate_set,
)


def W(s):
    return PauliWord.parse(s)


def O(word, sign):
    return SignedObservable(W(word), sign)


@pytest.mark.parametrize(
    "word, expected",
    [
        ("ZI", np.diag([1, 1, -1, -1])),
        ("ZZ", np.diag([1, -1, -1, 1])),
        ("XX", np.fliplr(np.eye(4, dtype=int))),
    ],
)
def test_pauli_matrix_examples(word, expected):
    assert np.array_equal(pauli_matrix(W(word)), expected)


@pytest.mark.parametrize("a, b", [(a, b) for a in "IZX" for b in "IZX" if a + b != "II"])
def test_pauli_words_are_involutions(a, b):
    m = pauli_matrix(PauliWord(a, b))
    assert np.array_equal(m @ m, np.eye(4, dtype=int))
    assert set(np.unique(m)) <= {-1, 0, 1}


@pytest.mark.parametrize(
    "o1, o2, expected",
    [
        (O("ZZ", 1), O("XX", -1), (1, 0, 0, -1)),
        (O("ZX", -1), O("XZ", 1), (1, -1, 1, 1)),
        (O("ZI", 1), O("IZ", 1), (1, 0, 0, 0)),
    ],
)
def test_joint_eigenray_examples(o1, o2, expected):
    r = joint_eigenray(o1, o2)
    assert r.entries == Ray(expected).entries
    # independent check: the ray really is a signed eigenvector of both words
    v = np.array(expected)
    for o in (o1, o2):
        assert np.array_equal(pauli_matrix(o.word) @ v, o.sign * v)


def test_joint_eigenray_errors():
    with pytest.raises(EigenspaceError, match="commute"):
        joint_eigenray(O("ZI", 1), O("XI", 1))
    with pytest.raises(EigenspaceError, match="dimension 2"):
        joint_eigenray(O("ZZ", 1), O("ZZ", 1))
    with pytest.raises(EigenspaceError, match="dimension 0"):
        joint_eigenray(O("ZZ", 1), O("ZZ", -1))


def test_identity_word_is_not_an_observable():
    with pytest.raises(ValueError):
        O("II", 1)


@pytest.mark.parametrize(
    "q, expected",
    [
        (Factorizable("z", 1, "x", -1), (1, -1, 0, 0)),
        (Factorizable("z", -1, "x", 1), (0, 0, 1, 1)),
        (Entangled(O("ZZ", -1), O("XX", 1)), (0, 1, 1, 0)),
    ],
)
def test_question_to_ray_examples(q, expected):
    assert question_to_ray(q) == Ray(expected)


WORDS = ["ZZ", "XX", "ZX", "XZ", "ZI", "IZ", "XI", "IX"]
COMMUTING = [
    (a, b)
    for a, b in itertools.combinations(WORDS, 2)
    if np.array_equal(pauli_matrix(W(a)) @ pauli_matrix(W(b)), pauli_matrix(W(b)) @ pauli_matrix(W(a)))
]


def test_commuting_pair_count():
    # 28 pairs, of which 14 anticommute
    assert len(COMMUTING) == 14


@pytest.mark.parametrize("w1, w2", COMMUTING)
def test_commuting_pairs_give_orthogonal_bases(w1, w2):
    rays = [joint_eigenray(O(w1, s1), O(w2, s2)) for s1 in (1, -1) for s2 in (1, -1)]
    assert is_orthogonal_basis(rays, 4)


def test_translation_reproduces_table1(table1, labels):
    rep = translate_set(table1, labels)
    assert rep.ok
    assert len(rep.matches) == 18


def test_translation_flags_a_wrong_label(table1, labels):
    bad = dict(labels)
    bad["u1"] = Factorizable("z", 1, "z", -1)
    rep = translate_set(table1, bad)
    assert [m.name for m in rep.mismatches] == ["u1"]
    assert rep.mismatches[0].derived == Ray([0, 1, 0, 0])


def test_translation_needs_total_labels(table1):
    with pytest.raises(ValueError, match="missing"):
        translate_set(table1, {})


@pytest.mark.parametrize(
    "ctx, expected",
    [("c1", ContextClass.FACTORIZABLE_ONLY), ("c9", ContextClass.ENTANGLED_ONLY), ("c6", ContextClass.MIXED)],
)
def test_classify_examples(table1, labels, ctx, expected):
    assert classify_context(table1.context(ctx), labels) is expected


def test_classification_split(table1, labels):
    classes = classify_set(table1, labels)
    assert class_counts(classes) == {
        ContextClass.FACTORIZABLE_ONLY: 4,
        ContextClass.MIXED: 4,
        ContextClass.ENTANGLED_ONLY: 1,
    }
    assert [classes[f"c{i}"] for i in range(5, 9)] == [ContextClass.MIXED] * 4


def test_classify_missing_label(table1):
    with pytest.raises(KeyError):
        classify_context(table1.context("c1"), {})


def test_label_round_trip(labels):
    assert parse_labels(format_labels(labels)) == labels


@pytest.mark.parametrize(
    "line",
    [
        "label u1 fact z+",
        "label u1 fact y+ z+",
        "label u1 ent zz+ xy+",
        "label u1 both zz+ xx+",
        "tag u1 fact z+ z+",
    ],
)
def test_label_parse_errors(line):
    with pytest.raises(LabelParseError):
        parse_labels(line)


def test_table2_labels_in_printed_notation(labels):
    # ninth column, top to bottom
    assert [str(labels[n]) for n in ("u14", "u15", "u17", "u18")] == [
        "ent zz+ xx-",
        "ent zz- xx+",
        "ent zx+ xz-",
        "ent zx- xz+",
    ]
