"""Kochen-Specker sets: file format, verification, coloring search and parity proofs.

A set is a list of named rays plus contexts, each context naming ``dim``
rays that should form an orthogonal basis. A coloring assigns yes/no to
every ray so that each context has exactly one yes.
"""

from __future__ import annotations

import re
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Literal

import numpy as np

from .exactalg import QuadInt, Ray, canonicalize, dot, first_offending_pair

BRUTE_FORCE_MAX_RAYS = 24

Assignment = dict[str, bool]
ContextStatusKind = Literal["ok", "offending-pair", "wrong-arity"]


class KSParseError(ValueError):
    """Malformed KS set file. ``line`` and ``column`` are 1-based."""

    def __init__(self, message: str, line: int, column: int = 1) -> None:
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class KSSetError(ValueError):
    """Structurally invalid set (unknown names, duplicate or equivalent rays)."""


class PreconditionError(ValueError):
    """Raised when an operation needs a set that passes ``verify``."""


@dataclass(frozen=True)
class Context:
    name: str
    members: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", tuple(self.members))


@dataclass(frozen=True)
class KSSet:
    """Named canonical rays and the contexts built from them.

    Construction canonicalizes rays and rejects duplicate names, rays
    equivalent under scaling, and contexts naming unknown rays. Context
    arity is left to :func:`verify` so that it can be reported.
    """

    dim: int
    rays: Mapping[str, Ray]
    contexts: tuple[Context, ...]

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise KSSetError(f"dimension must be positive, got {self.dim}")
        canon: dict[str, Ray] = {}
        seen: dict[tuple[QuadInt, ...], str] = {}
        for name, ray in dict(self.rays).items():
            if ray.dim != self.dim:
                raise KSSetError(f"ray {name} has dimension {ray.dim}, expected {self.dim}")
            c = canonicalize(ray)
            if c.entries in seen:
                raise KSSetError(f"rays {seen[c.entries]} and {name} are the same ray")
            seen[c.entries] = name
            canon[name] = c
        object.__setattr__(self, "rays", canon)
        ctxs = tuple(self.contexts)
        names = [c.name for c in ctxs]
        dupes = [n for n, k in Counter(names).items() if k > 1]
        if dupes:
            raise KSSetError(f"duplicate context name {dupes[0]}")
        for ctx in ctxs:
            for m in ctx.members:
                if m not in canon:
                    raise KSSetError(f"context {ctx.name} names unknown ray {m}")
        object.__setattr__(self, "contexts", ctxs)

    @property
    def ray_names(self) -> list[str]:
        return list(self.rays)

    def context(self, name: str) -> Context:
        for ctx in self.contexts:
            if ctx.name == name:
                return ctx
        raise KeyError(name)

    def occurrences(self) -> dict[str, int]:
        counts = dict.fromkeys(self.rays, 0)
        for ctx in self.contexts:
            for m in ctx.members:
                counts[m] += 1
        return counts

    def without_context(self, name: str) -> KSSet:
        self.context(name)
        return KSSet(self.dim, self.rays, tuple(c for c in self.contexts if c.name != name))

    def renamed(self, mapping: Mapping[str, str]) -> KSSet:
        rn = lambda n: mapping.get(n, n)  # noqa: E731
        return KSSet(
            self.dim,
            {rn(n): r for n, r in self.rays.items()},
            tuple(Context(c.name, tuple(rn(m) for m in c.members)) for c in self.contexts),
        )

    def to_text(self) -> str:
        """Serialize in the KS set file format."""
        sqrt2 = any(e.b for r in self.rays.values() for e in r.entries)
        fmt = (lambda e: f"{e.a}:{e.b}") if sqrt2 else (lambda e: str(e.a))
        lines = [f"dim {self.dim}", "field Zsqrt2" if sqrt2 else "field Z"]
        lines += [f"ray {n} " + " ".join(fmt(e) for e in r.entries) for n, r in self.rays.items()]
        lines += [f"context {c.name} " + " ".join(c.members) for c in self.contexts]
        return "\n".join(lines) + "\n"


# -- parsing -----------------------------------------------------------------

_TOKEN = re.compile(r"\S+")
_INT = re.compile(r"[+-]?\d+")
_QUAD = re.compile(r"([+-]?\d+):([+-]?\d+)")


def parse_ksset(text: str | Iterable[str]) -> KSSet:
    """Parse a KS set from text in the line-oriented ``.ks`` format."""
    lines = text.splitlines() if isinstance(text, str) else [ln.rstrip("\n") for ln in text]
    dim: int | None = None
    field_name: str | None = None
    rays: dict[str, Ray] = {}
    ray_lines: dict[str, int] = {}
    canon_seen: dict[tuple[QuadInt, ...], str] = {}
    contexts: list[Context] = []
    context_lines: dict[str, int] = {}

    for lineno, raw in enumerate(lines, start=1):
        body = raw.split("#", 1)[0]
        toks = [(m.group(), m.start() + 1) for m in _TOKEN.finditer(body)]
        if not toks:
            continue
        kw, kw_col = toks[0]
        args = toks[1:]

        if dim is None:
            if kw != "dim":
                raise KSParseError("expected 'dim <d>' header", lineno, kw_col)
            if len(args) != 1 or not args[0][0].isdigit() or int(args[0][0]) < 1:
                col = args[0][1] if args else kw_col
                raise KSParseError("dim needs one positive integer", lineno, col)
            dim = int(args[0][0])
            continue
        if field_name is None:
            if kw != "field":
                raise KSParseError("expected 'field Z' or 'field Zsqrt2' header", lineno, kw_col)
            if len(args) != 1 or args[0][0] not in ("Z", "Zsqrt2"):
                col = args[0][1] if args else kw_col
                raise KSParseError("field must be Z or Zsqrt2", lineno, col)
            field_name = args[0][0]
            continue

        if kw == "ray":
            if not args:
                raise KSParseError("ray needs a name", lineno, kw_col)
            (name, name_col), ents = args[0], args[1:]
            if name in rays:
                raise KSParseError(
                    f"duplicate ray name {name} (first on line {ray_lines[name]})", lineno, name_col
                )
            if len(ents) != dim:
                raise KSParseError(
                    f"dimension mismatch: ray {name} has {len(ents)} entries, expected {dim}",
                    lineno,
                    name_col,
                )
            values = [_parse_entry(tok, col, lineno, field_name) for tok, col in ents]
            try:
                ray = Ray(values)
            except ValueError as e:
                raise KSParseError(str(e), lineno, name_col) from None
            c = canonicalize(ray)
            if c.entries in canon_seen:
                other = canon_seen[c.entries]
                raise KSParseError(
                    f"duplicate ray: {name} is the same ray as {other} (line {ray_lines[other]})",
                    lineno,
                    name_col,
                )
            canon_seen[c.entries] = name
            rays[name] = c
            ray_lines[name] = lineno
        elif kw == "context":
            if not args:
                raise KSParseError("context needs a name", lineno, kw_col)
            (name, name_col), members = args[0], args[1:]
            if name in context_lines:
                raise KSParseError(f"duplicate context name {name}", lineno, name_col)
            if len(members) != dim:
                raise KSParseError(
                    f"arity error: context {name} has {len(members)} members, expected {dim}",
                    lineno,
                    name_col,
                )
            seen_members: set[str] = set()
            for m, col in members:
                if m not in rays:
                    raise KSParseError(f"unknown ray name {m} in context {name}", lineno, col)
                if m in seen_members:
                    raise KSParseError(f"ray {m} repeated in context {name}", lineno, col)
                seen_members.add(m)
            contexts.append(Context(name, tuple(m for m, _ in members)))
            context_lines[name] = lineno
        else:
            raise KSParseError(f"unknown directive {kw!r}", lineno, kw_col)

    if dim is None or field_name is None:
        raise KSParseError("missing 'dim' or 'field' header", len(lines) + 1)
    return KSSet(dim, rays, tuple(contexts))


def _parse_entry(tok: str, col: int, lineno: int, field_name: str) -> QuadInt:
    if field_name == "Z":
        if not _INT.fullmatch(tok):
            raise KSParseError(f"expected an integer entry, got {tok!r}", lineno, col)
        return QuadInt(int(tok))
    m = _QUAD.fullmatch(tok)
    if not m:
        raise KSParseError(f"expected an entry a:b, got {tok!r}", lineno, col)
    try:
        return QuadInt(int(m.group(1)), int(m.group(2)))
    except OverflowError as e:
        raise KSParseError(str(e), lineno, col) from None


def load_ksset(path: str | Path) -> KSSet:
    return parse_ksset(Path(path).read_text())


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("ksproof") / "data" / name))


def load_table1() -> KSSet:
    """The bundled eighteen-ray, nine-context set in dimension 4."""
    return load_ksset(bundled_path("table1.ks"))


# -- verification --------------------------------------------------------------


@dataclass(frozen=True)
class ContextStatus:
    name: str
    status: ContextStatusKind
    pair: tuple[str, str] | None = None


@dataclass(frozen=True)
class VerifyReport:
    contexts: tuple[ContextStatus, ...]
    occurrences: dict[str, int]
    ok: bool

    @property
    def offenses(self) -> list[ContextStatus]:
        return [c for c in self.contexts if c.status != "ok"]


def verify(ks: KSSet) -> VerifyReport:
    """Check every context is an orthogonal basis and count ray occurrences."""
    statuses = []
    for ctx in ks.contexts:
        if len(ctx.members) != ks.dim or len(set(ctx.members)) != len(ctx.members):
            statuses.append(ContextStatus(ctx.name, "wrong-arity"))
            continue
        pair = first_offending_pair([ks.rays[m] for m in ctx.members])
        if pair is None:
            statuses.append(ContextStatus(ctx.name, "ok"))
        else:
            i, j = pair
            statuses.append(ContextStatus(ctx.name, "offending-pair", (ctx.members[i], ctx.members[j])))
    ok = all(s.status == "ok" for s in statuses)
    return VerifyReport(tuple(statuses), ks.occurrences(), ok)


def _require_verified(ks: KSSet) -> None:
    report = verify(ks)
    if not report.ok:
        bad = report.offenses[0]
        raise PreconditionError(f"set does not verify: context {bad.name} is {bad.status}")


# -- coloring search -----------------------------------------------------------


def _exclusions(ks: KSSet, strong: bool) -> tuple[list[str], list[tuple[int, ...]], list[frozenset[int]]]:
    names = ks.ray_names
    index = {n: i for i, n in enumerate(names)}
    contexts = [tuple(index[m] for m in c.members) for c in ks.contexts]
    excl: list[set[int]] = [set() for _ in names]
    for ctx in contexts:
        for i in ctx:
            excl[i].update(j for j in ctx if j != i)
    if strong:
        rays = [ks.rays[n] for n in names]
        for i in range(len(rays)):
            for j in range(i + 1, len(rays)):
                if not dot(rays[i], rays[j]):
                    excl[i].add(j)
                    excl[j].add(i)
    return names, contexts, [frozenset(e) for e in excl]


class _Backtracker:
    """Exact-cover style search over contexts with one-yes propagation.

    The next context branched on is the unsatisfied one with the fewest
    unassigned rays, ties going to the earliest declared.
    """

    def __init__(self, n: int, contexts: Sequence[tuple[int, ...]], excl: Sequence[frozenset[int]], strong: bool):
        self.n = n
        self.contexts = list(contexts)
        self.excl = list(excl)
        self.strong = strong
        self.state = [-1] * n
        self.first: list[int] | None = None

    def count(self, stop_at_first: bool = False) -> int:
        self.stop_at_first = stop_at_first
        return self._step()

    def _assign_yes(self, r: int) -> list[int] | None:
        st = self.state
        if any(st[j] == 1 for j in self.excl[r]):
            return None
        changed = [r]
        st[r] = 1
        for j in self.excl[r]:
            if st[j] == -1:
                st[j] = 0
                changed.append(j)
        return changed

    def _undo(self, changed: list[int]) -> None:
        for j in changed:
            self.state[j] = -1

    def _step(self) -> int:
        st = self.state
        best: tuple[int, ...] | None = None
        for ctx in self.contexts:
            if any(st[i] == 1 for i in ctx):
                continue
            free = tuple(i for i in ctx if st[i] == -1)
            if not free:
                return 0
            if best is None or len(free) < len(best):
                best = free
        if best is None:
            return self._finish()
        total = 0
        for r in best:
            changed = self._assign_yes(r)
            if changed is None:
                continue
            total += self._step()
            self._undo(changed)
            if total and self.stop_at_first:
                return total
        return total

    def _finish(self) -> int:
        # every context has its yes; what is left belongs to no context
        st = self.state
        free = [i for i in range(self.n) if st[i] == -1]
        if not self.strong or not free:
            if self.first is None:
                self.first = [max(v, 0) for v in st]
            return 2 ** len(free)
        r = free[0]
        st[r] = 0
        total = self._finish()
        st[r] = -1
        if total and self.stop_at_first:
            return total
        changed = self._assign_yes(r)
        if changed is not None:
            total += self._finish()
            self._undo(changed)
        return total


def find_coloring(ks: KSSet, strong_orthogonality: bool = False) -> Assignment | None:
    """A yes/no assignment with exactly one yes per context, or ``None``.

    With ``strong_orthogonality`` two orthogonal rays are never both yes,
    even when no context contains them both.
    """
    _require_verified(ks)
    names, contexts, excl = _exclusions(ks, strong_orthogonality)
    bt = _Backtracker(len(names), contexts, excl, strong_orthogonality)
    if not bt.count(stop_at_first=True):
        return None
    assert bt.first is not None
    return {n: bool(v) for n, v in zip(names, bt.first)}


def count_colorings(ks: KSSet, strong_orthogonality: bool = False) -> int:
    """Exact number of valid assignments, by exhaustive backtracking."""
    _require_verified(ks)
    names, contexts, excl = _exclusions(ks, strong_orthogonality)
    return _Backtracker(len(names), contexts, excl, strong_orthogonality).count()


def count_exact_covers(n: int, contexts: Sequence[Sequence[int]]) -> int:
    """Count 0/1 vectors of length ``n`` with exactly one 1 in every context.

    Combinatorial core of :func:`count_colorings`, usable on hypergraphs
    that are not backed by actual rays.
    """
    ctxs = [tuple(c) for c in contexts]
    excl: list[set[int]] = [set() for _ in range(n)]
    for ctx in ctxs:
        for i in ctx:
            excl[i].update(j for j in ctx if j != i)
    return _Backtracker(n, ctxs, [frozenset(e) for e in excl], False).count()


def brute_force_count(n: int, contexts: Sequence[Sequence[int]], forbidden_pairs: Sequence[tuple[int, int]] = ()) -> int:
    """Enumerate all ``2**n`` yes/no maps and count the valid ones.

    Test oracle, independent of the backtracker. Limited to
    ``BRUTE_FORCE_MAX_RAYS`` rays.
    """
    if n > BRUTE_FORCE_MAX_RAYS:
        raise ValueError(f"brute force limited to {BRUTE_FORCE_MAX_RAYS} rays, got {n}")
    total = 0
    chunk = 1 << min(n, 20)
    for start in range(0, 1 << n, chunk):
        masks = np.arange(start, start + chunk, dtype=np.int64)
        bits = [(masks >> i) & 1 for i in range(n)]
        ok = np.ones(chunk, dtype=bool)
        for ctx in contexts:
            yes = np.zeros(chunk, dtype=np.int64)
            for i in ctx:
                yes += bits[i]
            ok &= yes == 1
        for i, j in forbidden_pairs:
            ok &= (bits[i] & bits[j]) == 0
        total += int(ok.sum())
    return total


def brute_force_colorings(ks: KSSet, strong_orthogonality: bool = False) -> int:
    """:func:`count_colorings` computed by plain enumeration."""
    _require_verified(ks)
    names = ks.ray_names
    index = {n: i for i, n in enumerate(names)}
    contexts = [[index[m] for m in c.members] for c in ks.contexts]
    pairs: list[tuple[int, int]] = []
    if strong_orthogonality:
        rays = [ks.rays[n] for n in names]
        pairs = [
            (i, j)
            for i in range(len(rays))
            for j in range(i + 1, len(rays))
            if not dot(rays[i], rays[j])
        ]
    return brute_force_count(len(names), contexts, pairs)


def is_coloring(ks: KSSet, assignment: Mapping[str, bool]) -> bool:
    if set(assignment) != set(ks.rays):
        return False
    return all(sum(bool(assignment[m]) for m in c.members) == 1 for c in ks.contexts)


# -- parity certificate --------------------------------------------------------


@dataclass(frozen=True)
class ParityCertificate:
    """Every ray lies in an even number of contexts and there is an odd number of contexts.

    Summing yes counts context by context gives the (odd) context count;
    summing ray by ray gives a sum of even numbers. No coloring can exist.
    """

    context_count: int
    occurrences: dict[str, int] = field(default_factory=dict)

    def check(self) -> bool:
        return self.context_count % 2 == 1 and all(k % 2 == 0 for k in self.occurrences.values())


def parity_certificate(ks: KSSet) -> ParityCertificate | None:
    _require_verified(ks)
    cert = ParityCertificate(len(ks.contexts), ks.occurrences())
    return cert if cert.check() else None


def parity_obstructed(n: int, contexts: Sequence[Sequence[int]]) -> bool:
    """Parity test on a bare hypergraph (see :class:`ParityCertificate`)."""
    counts = Counter(i for c in contexts for i in c)
    return len(contexts) % 2 == 1 and all(counts[i] % 2 == 0 for i in range(n))
