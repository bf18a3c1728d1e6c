"""Property suites that check the counting identities and the engines against each other.

Each suite returns a :class:`SuiteResult`; on failure ``counterexample`` is a
JSON-ready dict describing the first mismatch found.  ``scale="quick"``
shrinks every range for smoke runs.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from math import comb
from typing import Callable, Mapping, Optional

import numpy as np

from .amplitude import Amplitude, Chirality, SpinMatrix
from .combinatorics import (
    _masks_array,
    _rotl,
    _weight_masks,
    BitString,
    apply_permutation,
    c_coefficient,
    c_coefficient_bruteforce,
    canonicalize,
    dfunc,
    f_sum,
    u_count,
)
from .lattice import STEPS, Site, cone_displacements
from .propagator import brute_force_cone_table, cone_table, evolution_cone_table
from .walk import (
    iter_evolve,
    random_state,
    transition_table,
    unitarity_defects,
)

__all__ = ["SuiteResult", "SUITES", "run_suite", "literal_products_batch", "factorized_products_batch"]


@dataclass
class SuiteResult:
    name: str
    description: str
    passed: bool = True
    checked: int = 0
    counterexample: Optional[dict] = None
    notes: list = field(default_factory=list)

    def fail(self, **info) -> "SuiteResult":
        self.passed = False
        if self.counterexample is None:
            self.counterexample = info
        return self


def _gauss_from_quarters(counts, chirality: Chirality) -> Amplitude:
    c0, c1, c2, c3 = (int(x) for x in counts)
    return Amplitude(c0 - c2, int(chirality) * (c1 - c3))


# -- string combinatorics ---------------------------------------------------------


def suite_split(scale: str, rng: random.Random, **_) -> SuiteResult:
    """Class decomposition of ``v ^ B(t, H)`` for canonical and permuted ``v``."""
    res = SuiteResult("split-classes", "weight classes of v XOR w: sizes and set-bit counts")
    t_max = 6 if scale == "quick" else 10
    for t in range(t_max + 1):
        for K in range(t + 1):
            v = (1 << K) - 1
            for H in range(t + 1):
                r = 1 if K >= H else 0
                rb = 1 - r
                top = min(K, H, t - K, t - H)
                sizes: dict[int, int] = {}
                for w in _weight_masks(t, H):
                    x = v ^ w
                    n = (x >> K).bit_count() if K >= H else (x & v).bit_count()
                    if not 0 <= n <= top or x.bit_count() != abs(K - H) + 2 * n:
                        return res.fail(t=t, K=K, H=H, w=format(w, f"0{t}b")[::-1], n=n)
                    sizes[n] = sizes.get(n, 0) + 1
                    res.checked += 1
                for n in range(top + 1):
                    expected = dfunc(t, rb * t + (-1) ** rb * H, r * t + (-1) ** r * K, n)
                    if sizes.get(n, 0) != expected:
                        return res.fail(t=t, K=K, H=H, n=n, size=sizes.get(n, 0), expected=expected)
                if sum(sizes.values()) != comb(t, H):
                    return res.fail(t=t, K=K, H=H, total=sum(sizes.values()))
                # arbitrary v: the permutation sorting v carries the classes over
                if t:
                    u = BitString(t, rng.choice(_weight_masks(t, K)))
                    canon, perm = canonicalize(u)
                    for w in _weight_masks(t, H):
                        ww = BitString(t, w)
                        moved = apply_permutation(perm, u ^ ww)
                        if moved != canon ^ apply_permutation(perm, ww):
                            return res.fail(t=t, K=K, H=H, v=str(u), w=str(ww))
    return res


def suite_phase_sum(scale: str, rng: random.Random, **_) -> SuiteResult:
    """Closed phase sum over a weight class against direct enumeration."""
    res = SuiteResult("phase-sum", "sum of (c i)^iota(v XOR w) over a weight class")
    t_max = 8 if scale == "quick" else 12
    per_cell = 5 if scale == "quick" else 20
    for t in range(t_max + 1):
        for H in range(t + 1):
            W = _masks_array(t, H)
            for K in range(t + 1):
                pool = _weight_masks(t, K)
                picks = pool if len(pool) <= per_cell else rng.sample(pool, per_cell)
                for v in picks:
                    q = np.bincount(np.bitwise_count(W ^ v) & 3, minlength=4)
                    for c in Chirality:
                        direct = _gauss_from_quarters(q, c)
                        if direct != f_sum(t, K, H, c):
                            return res.fail(t=t, K=K, H=H, v=v, chirality=c.symbol, direct=direct.to_json())
                        res.checked += 1
    return res


def suite_shift(scale: str, **_) -> SuiteResult:
    """``v ^ Sv`` has n ones on the ones of v and n on its zeros."""
    res = SuiteResult("shift-interference", "set bits of v XOR Sv split evenly between v's ones and zeros")
    t_max = 8 if scale == "quick" else 12
    for t in range(1, t_max + 1):
        full = (1 << t) - 1
        for v in range(1 << t):
            x = v ^ _rotl(v, t)
            on_ones = (x & v).bit_count()
            on_zeros = (x & ~v & full).bit_count()
            K = v.bit_count()
            if on_ones != on_zeros or on_ones > min(K, t - K):
                return res.fail(t=t, v=format(v, f"0{t}b")[::-1], on_ones=on_ones, on_zeros=on_zeros)
            res.checked += 1
    return res


def suite_fixed_endpoints(scale: str, **_) -> SuiteResult:
    """Counts of strings with fixed end bits and run number against ``u_count``."""
    res = SuiteResult("fixed-endpoint-runs", "strings with fixed first/last bit and 2n boundaries")
    t_max = 8 if scale == "quick" else 12
    for t in range(1, t_max + 1):
        seen: dict[tuple, int] = {}
        for v in range(1 << t):
            n2 = (v ^ _rotl(v, t)).bit_count()
            key = (v.bit_count(), v & 1, (v >> (t - 1)) & 1, n2 // 2)
            seen[key] = seen.get(key, 0) + 1
        for K in range(t + 1):
            total = 0
            for a in (0, 1):
                for a_last in (0, 1):
                    for n in range(t + 1):
                        u = u_count(t, K, a, a_last, n)
                        if u != seen.get((K, a, a_last, n), 0):
                            return res.fail(t=t, K=K, a=a, a_last=a_last, n=n, u=u, direct=seen.get((K, a, a_last, n), 0))
                        total += u
                        res.checked += 1
            if total != comb(t, K):
                return res.fail(t=t, K=K, total=total)
    return res


def suite_coefficients(scale: str, **_) -> SuiteResult:
    """Closed-form coefficients against the triple-sum definition."""
    res = SuiteResult("coefficients", "closed-form c_ab against brute-force triple sums")
    t_max = 5 if scale == "quick" else 8
    for t in range(2, t_max + 1):
        for K1 in range(t + 1):
            for K2 in range(t + 1):
                for K3 in range(t + 1):
                    for a in (0, 1):
                        for b in (0, 1):
                            for c in Chirality:
                                closed = c_coefficient(t, K1, K2, K3, a, b, c)
                                brute = c_coefficient_bruteforce(t, K1, K2, K3, a, b, c)
                                if closed != brute:
                                    return res.fail(
                                        t=t, K=[K1, K2, K3], a=a, b=b, chirality=c.symbol,
                                        closed=closed.to_json(), brute=brute.to_json(),
                                    )
                                res.checked += 1
    return res


# -- semigroup product ----------------------------------------------------------------

_B_INT = {
    (0, 0): ((1, 0), (-1, 0)),
    (1, 0): ((0, -1), (0, 1)),
    (0, 1): ((1, 0), (1, 0)),
    (1, 1): ((0, 1), (0, 1)),
}


def literal_products_batch(w1, w2, w3, t: int, chirality: Chirality):
    """Multiply out ``Ã_t ... Ã_1`` for many code triples at once.

    ``w1``, ``w2``, ``w3`` are int64 mask arrays (bit k-1 holds ``w_k``).
    Returns real and imaginary parts, each of shape (N, 2, 2).
    """
    n = len(w1)
    re = np.broadcast_to(np.eye(2, dtype=np.int64), (n, 2, 2)).copy()
    im = np.zeros((n, 2, 2), dtype=np.int64)
    B = np.zeros((2, 2, 2, 2), dtype=np.int64)
    for (a, b), m in _B_INT.items():
        B[a, b] = m
    c = int(chirality)
    for k in range(t):
        b1 = (w1 >> k) & 1
        b2 = (w2 >> k) & 1
        b3 = (w3 >> k) & 1
        mat = B[b1, b2]
        odd = (b1 ^ b2 ^ b3).astype(bool)
        # factor (c i) where the code parity is odd
        f_re = np.where(odd[:, None, None], 0, mat)
        f_im = np.where(odd[:, None, None], c * mat, 0)
        re, im = (
            np.einsum("nij,njk->nik", f_re, re) - np.einsum("nij,njk->nik", f_im, im),
            np.einsum("nij,njk->nik", f_re, im) + np.einsum("nij,njk->nik", f_im, re),
        )
    return re, im


def factorized_products_batch(w1, w2, w3, t: int, chirality: Chirality):
    """Same products from the sign / phase / B-index factorisation."""
    rot = (w1 >> 1) | ((w1 & 1) << (t - 1)) if t > 1 else w1
    sign = 1 - 2 * (np.bitwise_count((w1 ^ rot) & w2) & 1).astype(np.int64)
    q = (int(chirality) * np.bitwise_count(w1 ^ w2 ^ w3).astype(np.int64)) % 4
    a = w1 & 1
    b = (w2 >> (t - 1)) & 1
    B = np.zeros((2, 2, 2, 2), dtype=np.int64)
    for (x, y), m in _B_INT.items():
        B[x, y] = m
    mat = B[a, b] * sign[:, None, None]
    unit_re = np.array([1, 0, -1, 0])[q]
    unit_im = np.array([0, 1, 0, -1])[q]
    return mat * unit_re[:, None, None], mat * unit_im[:, None, None]


def suite_semigroup(scale: str, rng: random.Random, **_) -> SuiteResult:
    res = SuiteResult("semigroup-product", "factorised product of t code matrices against literal multiplication")
    t_max = 3 if scale == "quick" else 4
    n_random = 10_000 if scale == "quick" else 100_000
    cases = []
    for t in range(1, t_max + 1):
        full = np.arange(1 << (3 * t), dtype=np.int64)
        mask = (1 << t) - 1
        cases.append((t, full & mask, (full >> t) & mask, (full >> (2 * t)) & mask))
    t = 32
    nprng = np.random.default_rng(rng.getrandbits(64))
    draws = nprng.integers(0, 1 << t, size=(3, n_random), dtype=np.int64)
    cases.append((t, draws[0], draws[1], draws[2]))
    for t, w1, w2, w3 in cases:
        for c in Chirality:
            lre, lim = literal_products_batch(w1, w2, w3, t, c)
            fre, fim = factorized_products_batch(w1, w2, w3, t, c)
            bad = np.nonzero(((lre != fre) | (lim != fim)).reshape(len(w1), -1).any(axis=1))[0]
            if len(bad):
                k = int(bad[0])
                return res.fail(t=t, chirality=c.symbol, w1=int(w1[k]), w2=int(w2[k]), w3=int(w3[k]))
            res.checked += len(w1)
    return res


# -- walk-level suites ---------------------------------------------------------------


def suite_unitarity(scale: str, rng: random.Random, table_for: Callable = None, **_) -> SuiteResult:
    res = SuiteResult("unitarity", "transition-table unitarity, exact norm conservation, cone completeness")
    table_for = table_for or transition_table
    for c in Chirality:
        defects = unitarity_defects(c, table_for(c))
        if defects:
            return res.fail(chirality=c.symbol, defect=defects[0])
        res.checked += 1
    n_states, t_max = (5, 12) if scale == "quick" else (20, 30)
    for k in range(n_states):
        c = Chirality.PLUS if k % 2 == 0 else Chirality.MINUS
        state = random_state(rng)
        n0 = state.norm2()
        for t, dense in enumerate(iter_evolve(state, t_max, c, table_for(c)), start=1):
            if dense.norm2() != n0:
                return res.fail(state=state.to_json(), t=t, chirality=c.symbol)
            res.checked += 1
    t_cone = 6 if scale == "quick" else 12
    for t in range(t_cone + 1):
        for c in Chirality:
            total = SpinMatrix.zero()
            for m in cone_table(t, c).values():
                total = total + m.dagger() @ m
            if total != SpinMatrix.identity():
                return res.fail(t=t, chirality=c.symbol, sum=total.to_json())
            res.checked += 1
    return res


def suite_triple_engine(scale: str, table_for: Callable = None, **_) -> SuiteResult:
    res = SuiteResult("triple-engine", "closed form, string brute force and step operator agree on the whole cone")
    t_max = 5 if scale == "quick" else 8
    for t in range(t_max + 1):
        for c in Chirality:
            table = None if table_for is None else table_for(c)
            closed = cone_table(t, c)
            brute = brute_force_cone_table(t, c)
            stepped = evolution_cone_table(t, c, table)
            for d in cone_displacements(t):
                if not closed[d] == brute[d] == stepped[d]:
                    return res.fail(
                        t=t, chirality=c.symbol, displacement=list(d),
                        closed=closed[d].to_json(), brute=brute[d].to_json(), stepped=stepped[d].to_json(),
                    )
                res.checked += 1
    return res


def suite_symmetries(scale: str, rng: random.Random, **_) -> SuiteResult:
    from .propagator import propagator_closed_form

    res = SuiteResult("symmetries", "chirality conjugation and translation invariance of the propagator")
    samples = 100 if scale == "quick" else 1000
    for _ in range(samples):
        t = rng.randint(0, 10)
        p = rng.randint(0, 1)
        src = Site(*(2 * rng.randint(-5, 5) + p for _ in range(3)))
        disp = tuple(rng.randrange(-t - 2, t + 3, 2) for _ in range(3)) if rng.random() < 0.9 else (1, 0, 0)
        try:
            dst = src + disp
        except ValueError:
            dst = src + (t % 2, t % 2, t % 2)
        plus = propagator_closed_form(src, dst, t, Chirality.PLUS).matrix
        minus = propagator_closed_form(src, dst, t, Chirality.MINUS).matrix
        if minus != plus.conjugate():
            return res.fail(kind="conjugation", source=list(src), target=list(dst), t=t)
        shift = rng.choice([(1, 1, 1), (-1, -1, -1)]) if rng.random() < 0.3 else tuple(2 * rng.randint(-4, 4) for _ in range(3))
        moved = propagator_closed_form(src + shift, dst + shift, t, Chirality.PLUS).matrix
        if moved != plus:
            return res.fail(kind="translation", source=list(src), target=list(dst), shift=list(shift), t=t)
        res.checked += 1
    return res


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "split-classes": suite_split,
    "phase-sum": suite_phase_sum,
    "shift-interference": suite_shift,
    "fixed-endpoint-runs": suite_fixed_endpoints,
    "coefficients": suite_coefficients,
    "semigroup-product": suite_semigroup,
    "unitarity": suite_unitarity,
    "triple-engine": suite_triple_engine,
    "symmetries": suite_symmetries,
}


def faulty_table_factory(step_index: int = 1) -> Callable[[Chirality], Mapping[int, SpinMatrix]]:
    """Transition tables with the sign of one matrix flipped, for exercising failure paths."""

    def make(c: Chirality):
        table = transition_table(c)
        table[step_index] = -table[step_index]
        return table

    return make


def run_suite(name: str, scale: str = "default", seed: int = 0, table_for: Optional[Callable] = None) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    rng = random.Random(f"{seed}:{name}")
    return SUITES[name](scale=scale, rng=rng, table_for=table_for)
