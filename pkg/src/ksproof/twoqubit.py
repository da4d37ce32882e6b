"""Two-qubit Z/X Pauli products and the yes-no questions they define.

Basis order is |z+z+>, |z+z->, |z-z+>, |z-z->. A yes-no question asserts
signs for two commuting observables; its "yes" subspace is the joint
eigenray, which is how the Table-I style rays get their two-qubit labels.
"""

from __future__ import annotations

import re
from collections import Counter
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Literal, Union

import numpy as np

from .exactalg import Ray, canonicalize
from .ksset import Context, KSSet, bundled_path

Letter = Literal["I", "Z", "X"]
Axis = Literal["z", "x"]

_SINGLE = {
    "I": np.array([[1, 0], [0, 1]], dtype=np.int64),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.int64),
    "X": np.array([[0, 1], [1, 0]], dtype=np.int64),
}


@dataclass(frozen=True)
class PauliWord:
    first: Letter
    second: Letter

    def __post_init__(self) -> None:
        if self.first not in _SINGLE or self.second not in _SINGLE:
            raise ValueError(f"Pauli letters must be I, Z or X, got {self.first}{self.second}")

    @classmethod
    def parse(cls, text: str) -> PauliWord:
        """``"ZX"`` or lowercase ``"zx"`` (two letters, I allowed)."""
        t = text.upper()
        if len(t) != 2:
            raise ValueError(f"Pauli word needs two letters, got {text!r}")
        return cls(t[0], t[1])  # type: ignore[arg-type]

    @property
    def is_identity(self) -> bool:
        return self.first == "I" and self.second == "I"

    @property
    def weight(self) -> int:
        return (self.first != "I") + (self.second != "I")

    def __str__(self) -> str:
        return self.first + self.second


def pauli_matrix(w: PauliWord) -> np.ndarray:
    """4x4 integer matrix of ``w``, the Kronecker product of its letters."""
    return np.kron(_SINGLE[w.first], _SINGLE[w.second])


@dataclass(frozen=True)
class SignedObservable:
    word: PauliWord
    sign: int

    def __post_init__(self) -> None:
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        if self.word.is_identity:
            raise ValueError("the identity is not an observable here")

    def __str__(self) -> str:
        return f"{self.word}{'+' if self.sign > 0 else '-'}"


class EigenspaceError(ValueError):
    """The requested signed pair does not pick out a single ray."""


def joint_eigenray(o1: SignedObservable, o2: SignedObservable) -> Ray:
    """The ray on which ``o1`` and ``o2`` take their asserted signs.

    Computed exactly from ``(I + s1 M1)(I + s2 M2)``, which is four times
    the joint projector.
    """
    m1, m2 = pauli_matrix(o1.word), pauli_matrix(o2.word)
    if not np.array_equal(m1 @ m2, m2 @ m1):
        raise EigenspaceError(f"{o1.word} and {o2.word} do not commute")
    eye = np.eye(4, dtype=np.int64)
    num = (eye + o1.sign * m1) @ (eye + o2.sign * m2)
    # num = 4P, so trace(num) = 4 * rank
    rank, rem = divmod(int(np.trace(num)), 4)
    if rem or rank != 1:
        raise EigenspaceError(f"joint eigenspace of {o1}, {o2} has dimension {rank}, not 1")
    col = next(j for j in range(4) if num[:, j].any())
    return canonicalize(Ray(int(v) for v in num[:, col]))


@dataclass(frozen=True)
class Factorizable:
    """Sign conditions on one component of each particle, e.g. z1 = +, x2 = -."""

    axis1: Axis
    sign1: int
    axis2: Axis
    sign2: int

    def __post_init__(self) -> None:
        for ax, s in ((self.axis1, self.sign1), (self.axis2, self.sign2)):
            if ax not in ("z", "x") or s not in (1, -1):
                raise ValueError(f"bad factorizable condition {ax}{s}")

    def observables(self) -> tuple[SignedObservable, SignedObservable]:
        return (
            SignedObservable(PauliWord(self.axis1.upper(), "I"), self.sign1),  # type: ignore[arg-type]
            SignedObservable(PauliWord("I", self.axis2.upper()), self.sign2),  # type: ignore[arg-type]
        )

    def __str__(self) -> str:
        return f"fact {self.axis1}{_sgn(self.sign1)} {self.axis2}{_sgn(self.sign2)}"


@dataclass(frozen=True)
class Entangled:
    """Sign conditions on two commuting two-particle products, e.g. zz = +, xx = -."""

    o1: SignedObservable
    o2: SignedObservable

    def __post_init__(self) -> None:
        if self.o1.word.weight != 2 or self.o2.word.weight != 2:
            raise ValueError("entangled questions need two-letter words")

    def observables(self) -> tuple[SignedObservable, SignedObservable]:
        return self.o1, self.o2

    def __str__(self) -> str:
        return f"ent {str(self.o1).lower()} {str(self.o2).lower()}"


YesNoQuestion = Union[Factorizable, Entangled]


def _sgn(s: int) -> str:
    return "+" if s > 0 else "-"


def question_to_ray(q: YesNoQuestion) -> Ray:
    return joint_eigenray(*q.observables())


class ContextClass(str, Enum):
    FACTORIZABLE_ONLY = "FactorizableOnly"
    MIXED = "Mixed"
    ENTANGLED_ONLY = "EntangledOnly"


def classify_context(ctx: Context, labels: Mapping[str, YesNoQuestion]) -> ContextClass:
    missing = [m for m in ctx.members if m not in labels]
    if missing:
        raise KeyError(f"no label for ray {missing[0]} in context {ctx.name}")
    kinds = {isinstance(labels[m], Factorizable) for m in ctx.members}
    if kinds == {True}:
        return ContextClass.FACTORIZABLE_ONLY
    if kinds == {False}:
        return ContextClass.ENTANGLED_ONLY
    return ContextClass.MIXED


def classify_set(ks: KSSet, labels: Mapping[str, YesNoQuestion]) -> dict[str, ContextClass]:
    return {c.name: classify_context(c, labels) for c in ks.contexts}


@dataclass(frozen=True)
class RayMatch:
    name: str
    label: str
    stored: Ray
    derived: Ray | None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.derived is not None and self.derived == self.stored


@dataclass(frozen=True)
class TranslationReport:
    matches: tuple[RayMatch, ...]

    @property
    def ok(self) -> bool:
        return all(m.ok for m in self.matches)

    @property
    def mismatches(self) -> list[RayMatch]:
        return [m for m in self.matches if not m.ok]


def translate_set(ks: KSSet, labels: Mapping[str, YesNoQuestion]) -> TranslationReport:
    """Compare each stored ray with the eigenray of its two-qubit label."""
    missing = [n for n in ks.rays if n not in labels]
    if missing:
        raise ValueError(f"labels do not cover the set; first missing ray is {missing[0]}")
    out = []
    for name, ray in ks.rays.items():
        q = labels[name]
        try:
            out.append(RayMatch(name, str(q), ray, question_to_ray(q)))
        except EigenspaceError as e:
            out.append(RayMatch(name, str(q), ray, None, str(e)))
    return TranslationReport(tuple(out))


# -- label files ---------------------------------------------------------------

_FACT = re.compile(r"([zx])([+-])")
_ENT = re.compile(r"(zz|xx|zx|xz)([+-])")


class LabelParseError(ValueError):
    def __init__(self, message: str, line: int) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


def parse_labels(text: str | Iterable[str]) -> dict[str, YesNoQuestion]:
    lines = text.splitlines() if isinstance(text, str) else list(text)
    labels: dict[str, YesNoQuestion] = {}
    for lineno, raw in enumerate(lines, start=1):
        toks = raw.split("#", 1)[0].split()
        if not toks:
            continue
        if len(toks) != 5 or toks[0] != "label":
            raise LabelParseError("expected 'label <ray> fact|ent <cond> <cond>'", lineno)
        _, name, kind, c1, c2 = toks
        if name in labels:
            raise LabelParseError(f"duplicate label for {name}", lineno)
        try:
            if kind == "fact":
                m1, m2 = _FACT.fullmatch(c1), _FACT.fullmatch(c2)
                if not (m1 and m2):
                    raise ValueError(f"bad factorizable conditions {c1} {c2}")
                labels[name] = Factorizable(
                    m1.group(1), _sign(m1.group(2)), m2.group(1), _sign(m2.group(2))  # type: ignore[arg-type]
                )
            elif kind == "ent":
                m1, m2 = _ENT.fullmatch(c1), _ENT.fullmatch(c2)
                if not (m1 and m2):
                    raise ValueError(f"bad entangled conditions {c1} {c2}")
                labels[name] = Entangled(
                    SignedObservable(PauliWord.parse(m1.group(1)), _sign(m1.group(2))),
                    SignedObservable(PauliWord.parse(m2.group(1)), _sign(m2.group(2))),
                )
            else:
                raise ValueError(f"question kind must be fact or ent, got {kind!r}")
        except ValueError as e:
            raise LabelParseError(str(e), lineno) from None
    return labels


def _sign(c: str) -> int:
    return 1 if c == "+" else -1


def format_labels(labels: Mapping[str, YesNoQuestion]) -> str:
    return "".join(f"label {n} {q}\n" for n, q in labels.items())


def load_labels(path: str | Path) -> dict[str, YesNoQuestion]:
    return parse_labels(Path(path).read_text())


def load_table2_labels() -> dict[str, YesNoQuestion]:
    return load_labels(bundled_path("table2.labels"))


def class_counts(classes: Mapping[str, ContextClass]) -> Counter[ContextClass]:
    return Counter(classes.values())
