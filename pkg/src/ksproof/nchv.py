"""Noncontextual hidden-variable states for the two-qubit questions.

A hidden state fixes z1, x1, z2, x2 in {+1, -1}. Product observables take
the product of the one-particle values, and a question is answered yes iff
both of its sign conditions hold.
"""

from __future__ import annotations

import itertools
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

from .ksset import Context
from .twoqubit import Factorizable, PauliWord, YesNoQuestion, load_table2_labels

SIGNS = (1, -1)


@dataclass(frozen=True, order=True)
class HiddenState:
    z1: int
    x1: int
    z2: int
    x2: int

    def __post_init__(self) -> None:
        if any(v not in SIGNS for v in (self.z1, self.x1, self.z2, self.x2)):
            raise ValueError(f"hidden values must be +1 or -1: {self}")

    def __neg__(self) -> HiddenState:
        return HiddenState(-self.z1, -self.x1, -self.z2, -self.x2)

    def as_tuple(self) -> tuple[int, int, int, int]:
        return self.z1, self.x1, self.z2, self.x2

    def __str__(self) -> str:
        return "".join("+" if v > 0 else "-" for v in self.as_tuple())


def enumerate_states() -> list[HiddenState]:
    """All 16 hidden states, lexicographic with + before -."""
    return [HiddenState(*s) for s in itertools.product(SIGNS, repeat=4)]


def observable_value(s: HiddenState, o: PauliWord) -> int:
    if o.is_identity:
        raise ValueError("the identity word has no hidden value")
    one = {"I": (1, 1), "Z": (s.z1, s.z2), "X": (s.x1, s.x2)}
    return one[o.first][0] * one[o.second][1]


def answer(s: HiddenState, q: YesNoQuestion) -> bool:
    return all(observable_value(s, o.word) == o.sign for o in q.observables())


def factorizable_answer(s: HiddenState, q: Factorizable) -> bool:
    """Two separate one-particle checks, without going through observables."""
    first = s.z1 if q.axis1 == "z" else s.x1
    second = s.z2 if q.axis2 == "z" else s.x2
    return first == q.sign1 and second == q.sign2


# columns of the printed table, in order
TABLE_PRODUCTS = ("ZZ", "XX", "ZX", "XZ")
TABLE_QUESTION_RAYS = ("u14", "u15", "u17", "u18")


@dataclass(frozen=True)
class TableRow:
    pattern: str
    representative: HiddenState
    products: tuple[int, int, int, int]
    answers: tuple[bool, ...]


def _pattern(s: HiddenState) -> str:
    # s has z1 = +1; its partner -s gives the lower symbol
    return "".join("±" if v > 0 else "∓" for v in s.as_tuple())


def table_iii(
    labels: Mapping[str, YesNoQuestion] | None = None,
    question_rays: Sequence[str] = TABLE_QUESTION_RAYS,
) -> list[TableRow]:
    """Product values and ninth-test answers for the 8 sign-flip classes.

    Each class ``{s, -s}`` is represented by its member with z1 = +1, and
    classes come in order of the relative signs (x1 z1, z2 z1, x2 z1),
    + before -.
    """
    if labels is None:
        labels = load_table2_labels()
    words = [PauliWord.parse(w) for w in TABLE_PRODUCTS]
    questions = [labels[r] for r in question_rays]
    rows = []
    for s in enumerate_states():
        if s.z1 != 1:
            continue
        products = tuple(observable_value(s, w) for w in words)
        answers = tuple(answer(s, q) for q in questions)
        flipped = -s
        if tuple(observable_value(flipped, w) for w in words) != products:
            raise AssertionError("sign-flip partners disagree on a product")  # pragma: no cover
        if tuple(answer(flipped, q) for q in questions) != answers:
            raise AssertionError("sign-flip partners disagree on an answer")  # pragma: no cover
        rows.append(TableRow(_pattern(s), s, products, answers))  # type: ignore[arg-type]
    return rows


@dataclass(frozen=True)
class YesCountProfile:
    context: str
    achievable: frozenset[int]
    per_state: tuple[int, ...]

    def histogram(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for k in self.per_state:
            out[k] = out.get(k, 0) + 1
        return dict(sorted(out.items()))


def context_profile(ctx: Context, labels: Mapping[str, YesNoQuestion]) -> YesCountProfile:
    """Yes count of the context's questions in each of the 16 states."""
    missing = [m for m in ctx.members if m not in labels]
    if missing:
        raise KeyError(f"no label for ray {missing[0]} in context {ctx.name}")
    qs = [labels[m] for m in ctx.members]
    per_state = tuple(sum(answer(s, q) for q in qs) for s in enumerate_states())
    return YesCountProfile(ctx.name, frozenset(per_state), per_state)
