"""The t-step propagator ``P(x', x, t)`` and evolution by convolution with it.

``P`` is the 2x2 block with ``psi_x(t) = sum_{x'} P(x', x, t) psi_{x'}(0)``.
Four independent evaluations are provided:

* :func:`propagator_closed_form`     counting formula for the coefficients
* :func:`propagator_brute_force`     sum over admissible code-string triples
* :func:`propagator_path_enumeration` literal matrix products along every path
* :func:`propagator_from_evolution`  read off the step-operator evolution

All are exact and must agree bit for bit.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Optional

import numpy as np

from .amplitude import Amplitude, Chirality, SpinMatrix
from . import combinatorics
from .combinatorics import DEFAULT_BUDGET, BudgetExceeded, c_coefficient, triple_tally
from .lattice import STEP_VECTORS, STEPS, Site, cone_displacements, string_counts
from .walk import WalkState, b_matrix, evolve, transition_table

__all__ = [
    "Propagator",
    "propagator_closed_form",
    "propagator_brute_force",
    "propagator_path_enumeration",
    "propagator_from_evolution",
    "cone_table",
    "brute_force_cone_table",
    "evolution_cone_table",
    "convolve",
    "to_float",
    "zeta_conj_power",
    "clear_caches",
]


@dataclass(frozen=True)
class Propagator:
    source: Site
    target: Site
    t: int
    chirality: Chirality
    matrix: SpinMatrix

    def to_json(self) -> dict:
        return {
            "t": self.t,
            "chirality": self.chirality.symbol,
            "from": list(self.source),
            "to": list(self.target),
            "entries": self.matrix.to_json(),
            "float_view": [[[z.real, z.imag] for z in row] for row in to_float(self).tolist()],
        }


def zeta_conj_power(t: int, chirality: Chirality) -> Amplitude:
    return Chirality(chirality).zeta.conjugate() ** t


def _assemble(coeffs: Mapping[tuple[int, int], Amplitude], t: int, chirality: Chirality) -> SpinMatrix:
    total = SpinMatrix.zero()
    for (a, b), c in sorted(coeffs.items()):
        if c:
            total = total + b_matrix(a, b) * c
    return total * zeta_conj_power(t, chirality)


def _trivial(source: Site, target: Site, t: int, chirality: Chirality) -> Optional[SpinMatrix]:
    """Matrix for t = 0 and off-cone pairs, ``None`` when real work is needed."""
    if t < 0:
        raise ValueError("t must be non-negative")
    if string_counts(source, target, t) is None:
        return SpinMatrix.zero()
    if t == 0:
        return SpinMatrix.identity()
    return None


def _closed_matrix(disp: tuple[int, int, int], t: int, chirality: Chirality) -> SpinMatrix:
    source = Site(0, 0, 0)
    target = Site(*disp)
    m = _trivial(source, target, t, chirality)
    if m is not None:
        return m
    if t == 1:
        # x = x' - h_l
        l = next(l for l in STEPS if STEP_VECTORS[l] == tuple(-d for d in disp))
        return transition_table(chirality)[l]
    _, K1, K2, K3 = string_counts(source, target, t)
    coeffs = {(a, b): c_coefficient(t, K1, K2, K3, a, b, chirality) for a in (0, 1) for b in (0, 1)}
    return _assemble(coeffs, t, chirality)


def propagator_closed_form(
    source: Site, target: Site, t: int, chirality: Chirality = Chirality.PLUS
) -> Propagator:
    chirality = Chirality(chirality)
    return Propagator(source, target, t, chirality, _closed_matrix(target - source, t, chirality))


def propagator_brute_force(
    source: Site,
    target: Site,
    t: int,
    chirality: Chirality = Chirality.PLUS,
    budget: int = DEFAULT_BUDGET,
) -> Propagator:
    """Sum the factorised product over every admissible code-string triple.

    Raises :class:`BudgetExceeded` when the triple count is above ``budget``.
    """
    chirality = Chirality(chirality)
    m = _trivial(source, target, t, chirality)
    if m is None:
        _, K1, K2, K3 = string_counts(source, target, t)
        tally = triple_tally(t, K1, K2, K3, budget)
        coeffs = {}
        for a in (0, 1):
            for b in (0, 1):
                q = tally[a, b, 0] - tally[a, b, 1]
                # tally counts powers of (c*i)
                coeffs[(a, b)] = Amplitude(int(q[0] - q[2]), int(chirality) * int(q[1] - q[3]))
        m = _assemble(coeffs, t, chirality)
    return Propagator(source, target, t, chirality, m)


def propagator_path_enumeration(
    source: Site,
    target: Site,
    t: int,
    chirality: Chirality = Chirality.PLUS,
    table: Optional[Mapping[int, SpinMatrix]] = None,
    max_paths: int = 1_000_000,
) -> Propagator:
    """Sum literal products of transition matrices over every t-step path.

    Depth-first over step sequences, pruning prefixes that can no longer
    reach ``target``; no binary encoding is involved.
    """
    chirality = Chirality(chirality)
    table = transition_table(chirality) if table is None else table
    if _trivial(source, target, t, chirality) is not None:
        m = _trivial(source, target, t, chirality)
        return Propagator(source, target, t, chirality, m)
    # a move along -h_l carries A_{h_l}
    goal = target - source
    total = [SpinMatrix.zero()]
    visited = [0]

    def walk(pos, left, prod):
        if left == 0:
            if pos == goal:
                total[0] = total[0] + prod
                visited[0] += 1
                if visited[0] > max_paths:
                    raise BudgetExceeded(f"more than {max_paths} paths")
            return
        for l in STEPS:
            h = STEP_VECTORS[l]
            nxt = (pos[0] - h[0], pos[1] - h[1], pos[2] - h[2])
            if all(abs(goal[i] - nxt[i]) <= left - 1 for i in range(3)):
                walk(nxt, left - 1, table[l] @ prod)

    walk((0, 0, 0), t, SpinMatrix.identity())
    return Propagator(source, target, t, chirality, total[0])


@lru_cache(maxsize=16)
def _evolution_columns(t: int, chirality: Chirality) -> tuple[WalkState, WalkState]:
    origin = Site(0, 0, 0)
    return (
        evolve(WalkState.delta(origin, 1, 0), t, chirality),
        evolve(WalkState.delta(origin, 0, 1), t, chirality),
    )


def evolution_cone_table(
    t: int, chirality: Chirality = Chirality.PLUS, table: Optional[Mapping[int, SpinMatrix]] = None
) -> dict[tuple[int, int, int], SpinMatrix]:
    """Propagators from the origin read off by evolving the two basis spinors."""
    chirality = Chirality(chirality)
    if table is None:
        col0, col1 = _evolution_columns(t, chirality)
    else:
        origin = Site(0, 0, 0)
        col0 = evolve(WalkState.delta(origin, 1, 0), t, chirality, table)
        col1 = evolve(WalkState.delta(origin, 0, 1), t, chirality, table)
    out = {}
    for disp in cone_displacements(t):
        site = Site(*disp)
        (a, c), (b, d) = col0[site], col1[site]
        out[disp] = SpinMatrix(((a, b), (c, d)))
    return out


def propagator_from_evolution(
    source: Site, target: Site, t: int, chirality: Chirality = Chirality.PLUS
) -> Propagator:
    chirality = Chirality(chirality)
    disp = target - source
    m = _trivial(source, target, t, chirality)
    if m is None:
        m = evolution_cone_table(t, chirality)[disp]
    return Propagator(source, target, t, chirality, m)


def _cone_chunk(args) -> list[tuple[tuple[int, int, int], list]]:
    t, chirality, disps = args
    return [(d, _closed_matrix(d, t, Chirality(chirality)).to_json()) for d in disps]


@lru_cache(maxsize=8)
def _cone_table_cached(t: int, chirality: Chirality) -> tuple:
    return tuple((d, _closed_matrix(d, t, chirality)) for d in cone_displacements(t))


def cone_table(t: int, chirality: Chirality = Chirality.PLUS, jobs: int = 1) -> dict:
    """Closed-form propagators for every displacement of the t-step cone, lexicographic order."""
    chirality = Chirality(chirality)
    if t < 0:
        raise ValueError("t must be non-negative")
    if jobs <= 1:
        return dict(_cone_table_cached(t, chirality))
    disps = cone_displacements(t)
    size = math.ceil(len(disps) / (4 * jobs))
    chunks = [(t, int(chirality), disps[i : i + size]) for i in range(0, len(disps), size)]
    out = {}
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for part in pool.map(_cone_chunk, chunks):
            for d, m in part:
                out[d] = SpinMatrix.from_json(m)
    return {d: out[d] for d in disps}


def brute_force_cone_table(
    t: int, chirality: Chirality = Chirality.PLUS, budget: int = DEFAULT_BUDGET
) -> dict:
    origin = Site(0, 0, 0)
    return {
        d: propagator_brute_force(origin, Site(*d), t, chirality, budget).matrix for d in cone_displacements(t)
    }


def convolve(
    state: WalkState,
    t: int,
    chirality: Chirality = Chirality.PLUS,
    table: Optional[Mapping[tuple[int, int, int], SpinMatrix]] = None,
) -> WalkState:
    """Evolve by summing closed-form propagators over each site's cone."""
    chirality = Chirality(chirality)
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return state
    pairs = table.items() if table is not None else _cone_table_cached(t, chirality)
    pairs = [(d, m) for d, m in pairs if not m.is_zero()]
    acc: dict[tuple, list] = {}
    for src, (up, down) in state.items():
        for (d1, d2, d3), m in pairs:
            nu, nd = m.apply(up, down)
            key = (src[0] + d1, src[1] + d2, src[2] + d3)
            cur = acc.get(key)
            if cur is None:
                acc[key] = [nu, nd]
            else:
                cur[0] = cur[0] + nu
                cur[1] = cur[1] + nd
    return WalkState({Site(*k): v for k, v in acc.items()})


def to_float(p: Propagator | SpinMatrix) -> np.ndarray:
    """Nearest double-precision view; raises OverflowError if an entry exceeds the double range."""
    m = p.matrix if isinstance(p, Propagator) else p
    out = np.zeros((2, 2), dtype=complex)
    for r in range(2):
        for c in range(2):
            x = m[r, c]
            try:
                out[r, c] = complex(x.real_float(), x.imag_float())
            except OverflowError as exc:
                raise OverflowError(f"entry ({r}, {c}) = {x!r} is outside the double range") from exc
    return out


def clear_caches() -> None:
    """Drop every memoised table, e.g. before timing a computation from scratch."""
    for fn in (
        _evolution_columns,
        _cone_table_cached,
        combinatorics._weight_masks,
        combinatorics._f_row,
        combinatorics._kraw_table,
        combinatorics._interference_weights,
        combinatorics._tally,
    ):
        fn.cache_clear()
