"""Born-rule predictions and seeded sampling for two-qubit states.

Amplitudes are floating point; the exactness of the set itself is handled
upstream, so every context used here is first checked with exact
arithmetic.
"""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .exactalg import Ray, is_orthogonal_basis
from .ksset import Context, KSSet, load_table1
from .nchv import context_profile, enumerate_states
from .twoqubit import YesNoQuestion, load_table2_labels

DIM = 4
NORM_TOL = 1e-12
PSD_TOL = -1e-10

_S = 1 / math.sqrt(2)
PRESETS: dict[str, tuple[complex, ...]] = {
    "singlet": (0, _S, -_S, 0),
    "z00": (1, 0, 0, 0),
    "phi+": (_S, 0, 0, _S),
}


class StateVector:
    """A normalized pure state of the two qubits."""

    def __init__(self, amplitudes: Sequence[complex] | np.ndarray) -> None:
        amps = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        if amps.shape != (DIM,):
            raise ValueError(f"state needs {DIM} amplitudes, got {amps.size}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        n = np.linalg.norm(amps)
        if n == 0:
            raise ValueError("zero vector is not a state")
        self.amplitudes = amps / n
        self.amplitudes.setflags(write=False)

    def density_matrix(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    def __repr__(self) -> str:
        return f"StateVector({self.amplitudes.tolist()})"


class DensityMatrix:
    """A 4x4 density matrix: Hermitian, unit trace, positive semidefinite."""

    def __init__(self, matrix: Sequence[Sequence[complex]] | np.ndarray) -> None:
        rho = np.asarray(matrix, dtype=np.complex128)
        if rho.shape != (DIM, DIM):
            raise ValueError(f"density matrix must be {DIM}x{DIM}, got {rho.shape}")
        if not np.allclose(rho, rho.conj().T, rtol=0, atol=NORM_TOL):
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1) > NORM_TOL:
            raise ValueError(f"density matrix trace is {np.trace(rho).real}, not 1")
        if np.linalg.eigvalsh(rho).min() < PSD_TOL:
            raise ValueError("density matrix is not positive semidefinite")
        self.matrix = rho
        self.matrix.setflags(write=False)

    def __repr__(self) -> str:
        return f"DensityMatrix({self.matrix.tolist()})"


State = Union[StateVector, DensityMatrix]


def parse_state(spec: str) -> StateVector:
    """A preset name or four ``re,im`` pairs separated by spaces."""
    key = spec.strip()
    if key in PRESETS:
        return StateVector(PRESETS[key])
    parts = key.split()
    if len(parts) != DIM:
        raise ValueError(
            f"state must be one of {', '.join(PRESETS)} or {DIM} 're,im' pairs, got {spec!r}"
        )
    amps = []
    for p in parts:
        try:
            re_s, im_s = p.split(",")
            amps.append(complex(float(re_s), float(im_s)))
        except ValueError:
            raise ValueError(f"bad amplitude {p!r}; expected 're,im'") from None
    return StateVector(amps)


def unit_vector(r: Ray) -> np.ndarray:
    v = np.array(r.to_floats(), dtype=np.float64)
    return v / np.linalg.norm(v)


def born_probability(state: State, r: Ray) -> float:
    """Probability of a yes for the question ``r`` in ``state``."""
    if r.dim != DIM:
        raise ValueError(f"dimension mismatch: ray has dimension {r.dim}, state {DIM}")
    u = unit_vector(r)
    if isinstance(state, StateVector):
        return float(abs(u @ state.amplitudes) ** 2)
    return float((u @ state.matrix @ u).real)


class NonOrthogonalContextError(ValueError):
    pass


@dataclass(frozen=True)
class TestDistribution:
    __test__ = False  # not a pytest class

    context: str
    members: tuple[str, ...]
    probabilities: tuple[float, ...]

    def total(self) -> float:
        return math.fsum(self.probabilities)


def _context_rays(ctx: Context, ks: KSSet) -> list[Ray]:
    rays = [ks.rays[m] for m in ctx.members]
    if not is_orthogonal_basis(rays, ks.dim):
        raise NonOrthogonalContextError(f"context {ctx.name} is not an orthogonal basis")
    return rays


def test_distribution(state: State, ctx: Context, ks: KSSet) -> TestDistribution:
    """Outcome probabilities for a joint measurement of the context."""
    probs = tuple(born_probability(state, r) for r in _context_rays(ctx, ks))
    return TestDistribution(ctx.name, ctx.members, probs)


# keep pytest from collecting this when imported into a test module
test_distribution.__test__ = False  # type: ignore[attr-defined]


def _as_rng(rng: np.random.Generator | int) -> np.random.Generator:
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def _draw(probs: Sequence[float], rng: np.random.Generator, size: int) -> np.ndarray:
    p = np.clip(np.asarray(probs, dtype=np.float64), 0.0, None)
    cdf = np.cumsum(p)
    u = rng.random(size) * cdf[-1]
    idx = np.searchsorted(cdf, u, side="right")
    # u can round onto cdf[-1]; fall back to the last outcome with mass
    last = int(np.flatnonzero(p)[-1])
    return np.minimum(idx, last)


def sample_test(state: State, ctx: Context, ks: KSSet, rng: np.random.Generator | int) -> int:
    """One run of the context measurement: the index of the outcome answered yes."""
    dist = test_distribution(state, ctx, ks)
    return int(_draw(dist.probabilities, _as_rng(rng), 1)[0])


def sample_many(state: State, ctx: Context, ks: KSSet, trials: int, rng: np.random.Generator | int) -> np.ndarray:
    dist = test_distribution(state, ctx, ks)
    return _draw(dist.probabilities, _as_rng(rng), trials)


@dataclass(frozen=True)
class DiscriminationReport:
    context: str
    trials: int
    seed: int
    weights: tuple[float, ...]
    qm_yes_counts: np.ndarray = field(repr=False)
    nchv_yes_counts: np.ndarray = field(repr=False)
    nchv_states: np.ndarray = field(repr=False)

    @property
    def qm_histogram(self) -> dict[int, int]:
        return _hist(self.qm_yes_counts)

    @property
    def nchv_histogram(self) -> dict[int, int]:
        return _hist(self.nchv_yes_counts)

    @property
    def separated_runs(self) -> int:
        """Runs where the quantum yes count is 1 and the hidden-variable one is not."""
        return int(np.count_nonzero((self.qm_yes_counts == 1) & (self.nchv_yes_counts != 1)))

    @property
    def ok(self) -> bool:
        return self.separated_runs == self.trials


def _hist(a: np.ndarray) -> dict[int, int]:
    return {int(k): int(v) for k, v in sorted(Counter(a.tolist()).items())}


def discriminate(
    trials: int,
    state: State,
    weights: Sequence[float] | None = None,
    seed: int = 0,
    ks: KSSet | None = None,
    labels: Mapping[str, YesNoQuestion] | None = None,
    context: str = "c9",
) -> DiscriminationReport:
    """Run the all-entangled test ``trials`` times under both models.

    The quantum side samples one outcome per run from the Born
    distribution and answers yes to that question only. The hidden-variable
    side draws a state from ``weights`` (uniform over the 16 states by
    default) and answers each question from the hidden values.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    ks = ks if ks is not None else load_table1()
    labels = labels if labels is not None else load_table2_labels()
    ctx = ks.context(context)
    n_states = len(enumerate_states())
    if weights is None:
        w = np.full(n_states, 1.0 / n_states)
    else:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (n_states,) or np.any(w < 0) or not np.isfinite(w).all() or w.sum() <= 0:
            raise ValueError(f"weights must be {n_states} nonnegative numbers with positive sum")
        w = w / w.sum()

    qm_rng, hv_rng = (np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(2))
    outcomes = sample_many(state, ctx, ks, trials, qm_rng)
    qm_answers = np.eye(len(ctx.members), dtype=np.int64)[outcomes]
    qm_yes = qm_answers.sum(axis=1)

    hv_states = _draw(w, hv_rng, trials)
    per_state = np.array(context_profile(ctx, labels).per_state, dtype=np.int64)
    hv_yes = per_state[hv_states]
    return DiscriminationReport(ctx.name, trials, seed, tuple(w.tolist()), qm_yes, hv_yes, hv_states)
