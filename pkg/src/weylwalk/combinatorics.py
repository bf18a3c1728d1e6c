"""Binary-string combinatorics behind the closed-form propagator.

Bit strings are stored as Python ints with bit ``k`` (1-indexed) at position
``k - 1``, so ``w_1`` is the least significant bit.  Python ints have no word
limit, so one representation covers every length.

Counting functions (all exact integer arithmetic):

* ``dfunc(t, p, m, n)``   guarded product of binomials
* ``compositions(K, n)``  ordered n-part compositions of K
* ``f_sum``               phase sum over all strings of a fixed weight
* ``u_count``             strings with fixed endpoints and fixed run count
* ``w_factor``            signed class counts for the second string
* ``c_coefficient``       closed form for the coefficient of ``B_ab``
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .amplitude import Amplitude, Chirality

__all__ = [
    "BitString",
    "BudgetExceeded",
    "iota",
    "shift",
    "is_canonical",
    "canonicalize",
    "apply_permutation",
    "weight_class",
    "dfunc",
    "compositions",
    "f_sum",
    "u_count",
    "w_factor",
    "c_coefficient",
    "c_coefficients",
    "c_coefficient_bruteforce",
    "triple_tally",
    "DEFAULT_BUDGET",
]

DEFAULT_BUDGET = 2_000_000


class BudgetExceeded(RuntimeError):
    """An enumeration would visit more string triples than allowed."""


@dataclass(frozen=True)
class BitString:
    length: int
    value: int = 0

    def __post_init__(self):
        if self.length < 0:
            raise ValueError("length must be non-negative")
        if self.value < 0 or self.value >> self.length:
            raise ValueError(f"value {self.value} does not fit in {self.length} bits")

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitString":
        bits = list(bits)
        value = 0
        for k, b in enumerate(bits):
            if b not in (0, 1):
                raise ValueError(f"bits must be 0 or 1, got {b!r}")
            value |= b << k
        return cls(len(bits), value)

    @classmethod
    def parse(cls, text: str) -> "BitString":
        """``"0110"`` -> bits w_1..w_4 in reading order."""
        return cls.from_bits(int(ch) for ch in text)

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, k: int) -> int:
        """1-indexed bit access, matching ``w_k``."""
        if not 1 <= k <= self.length:
            raise IndexError(k)
        return (self.value >> (k - 1)) & 1

    def __iter__(self):
        v = self.value
        for _ in range(self.length):
            yield v & 1
            v >>= 1

    def __str__(self) -> str:
        return "".join(str(b) for b in self)

    def _check(self, other: "BitString") -> None:
        if other.length != self.length:
            raise ValueError(f"length mismatch: {self.length} vs {other.length}")

    def __xor__(self, other: "BitString") -> "BitString":
        self._check(other)
        return BitString(self.length, self.value ^ other.value)

    def __and__(self, other: "BitString") -> "BitString":
        self._check(other)
        return BitString(self.length, self.value & other.value)

    def __invert__(self) -> "BitString":
        return BitString(self.length, self.value ^ ((1 << self.length) - 1))

    @property
    def first(self) -> int:
        return self[1]

    @property
    def last(self) -> int:
        return self[self.length]


def iota(w: BitString) -> int:
    """Number of set bits."""
    return w.value.bit_count()


def _rotl(value: int, t: int) -> int:
    if t <= 1:
        return value
    return (value >> 1) | ((value & 1) << (t - 1))


def shift(w: BitString) -> BitString:
    """Left circular shift: ``(Sw)_i = w_{(i mod t) + 1}``."""
    return BitString(w.length, _rotl(w.value, w.length))


def is_canonical(w: BitString) -> bool:
    """True when all 1-bits come first."""
    return w.value == (1 << iota(w)) - 1


def canonicalize(v: BitString) -> tuple[BitString, tuple[int, ...]]:
    """Stable sort of the bits of ``v`` with ones first.

    Returns the canonical string and the permutation as a tuple ``perm``
    where ``perm[i - 1]`` is the new (1-indexed) position of old bit ``i``.
    """
    bits = list(v)
    ones = [i for i, b in enumerate(bits) if b]
    zeros = [i for i, b in enumerate(bits) if not b]
    perm = [0] * len(bits)
    for new, old in enumerate(ones + zeros):
        perm[old] = new + 1
    return BitString(v.length, (1 << len(ones)) - 1), tuple(perm)


def apply_permutation(perm: Sequence[int], w: BitString) -> BitString:
    """Move bit ``i`` of ``w`` to position ``perm[i - 1]``."""
    if len(perm) != w.length:
        raise ValueError("permutation length does not match the string")
    value = 0
    for i, b in enumerate(w):
        if b:
            value |= 1 << (perm[i] - 1)
    return BitString(w.length, value)


def weight_class(t: int, k: int) -> list[BitString]:
    """All strings of length ``t`` with exactly ``k`` set bits."""
    return [BitString(t, m) for m in _weight_masks(t, k)]


@lru_cache(maxsize=512)
def _weight_masks(t: int, k: int) -> tuple[int, ...]:
    if not 0 <= k <= t:
        return ()
    return tuple(sum(1 << p for p in pos) for pos in combinations(range(t), k))


# -- guarded counting functions -----------------------------------------------


def dfunc(t: int, p: int, m: int, n: int) -> int:
    """``C(m, n) * C(t-m, p-n)`` on ``0 <= n <= m <= t, n <= p``; zero elsewhere."""
    if 0 <= n <= m <= t and n <= p:
        return comb(m, n) * comb(t - m, p - n)
    return 0


def compositions(K: int, n: int) -> int:
    """Number of ordered ``n``-part compositions of ``K`` into positive parts."""
    if K >= n > 0:
        return comb(K - 1, n - 1)
    if K == 0 and n == 0:
        return 1
    return 0


def _theta(x: int) -> int:
    # Heaviside with theta(0) = 1
    return 1 if x >= 0 else 0


def _f_real(t: int, K: int, H: int) -> int:
    """Alternating class-size sum multiplying the phase in ``f_sum``."""
    r = _theta(K - H)
    rb = 1 - r
    p = rb * t + (-1) ** rb * H
    m = r * t + (-1) ** r * K
    total = 0
    for n in range(min(K, H, t - K, t - H) + 1):
        term = dfunc(t, p, m, n)
        total += -term if n & 1 else term
    return total


def f_sum(t: int, K: int, H: int, chirality: Chirality = Chirality.PLUS) -> Amplitude:
    """Sum of ``(c*i)**iota(v ^ w)`` over every ``w`` of weight ``H``, for any ``v`` of weight ``K``."""
    if not (0 <= K <= t and 0 <= H <= t):
        raise ValueError(f"need 0 <= K, H <= t, got t={t}, K={K}, H={H}")
    return Chirality(chirality).phase(abs(K - H)) * _f_real(t, K, H)


@lru_cache(maxsize=4096)
def _f_row(t: int, H: int) -> tuple[int, ...]:
    return tuple(_f_real(t, K, H) for K in range(t + 1))


def u_count(t: int, K: int, a: int, a_last: int, n: int) -> int:
    """Strings of weight ``K`` with ``v_1 = a``, ``v_t = a_last`` and ``iota(v ^ Sv) = 2n``."""
    if t < 1 or not 0 <= K <= t:
        raise ValueError(f"need t >= 1 and 0 <= K <= t, got t={t}, K={K}")
    if n < 0:
        return 0
    both_one = a & a_last
    both_zero = (1 - a) & (1 - a_last)
    return compositions(K, n + both_one) * compositions(t - K, n + both_zero)


def _kappa_eta_gamma(t: int, K1: int, K2: int, s: int, a: int, a_last: int, b: int, J: int):
    r = _theta(K1 - K2)
    rb = 1 - r
    sb = 1 - s
    kappa = (r ^ sb) * K2 + (-1) ** sb * (rb * K1 - J) - (sb ^ a_last) * b
    eta = sb * (t - 1) + (-1) ** sb * (K1 - a_last)
    gamma = (s ^ a) * (sb ^ a_last)
    return kappa, eta, gamma


def w_factor(t: int, K1: int, K2: int, s: int, a: int, a_last: int, b: int, n: int, J: int) -> int:
    """Signed count of second-string completions on one block of the first string.

    ``s = 1`` is the block of set bits of the first string and ``s = 0`` its
    zero bits (position ``t`` excluded); ``k`` counts how many run boundaries
    of the first string the second string hits inside that block.
    """
    kappa, eta, gamma = _kappa_eta_gamma(t, K1, K2, s, a, a_last, b, J)
    m = n - gamma
    total = 0
    for k in range(m + 1):
        term = dfunc(eta, kappa, m, k)
        total += -term if (k + gamma * b) & 1 else term
    return total


@lru_cache(maxsize=1024)
def _kraw_table(eta: int) -> tuple[tuple[int, ...], ...]:
    """Row ``m`` holds the coefficients of ``(1-x)^m (1+x)^(eta-m)``.

    Entry ``[m][kappa]`` equals ``sum_k (-1)^k dfunc(eta, kappa, m, k)``.
    """
    row = [comb(eta, j) for j in range(eta + 1)]
    rows = [tuple(row)]
    for _ in range(eta):
        q = [row[0]] + [row[j] - row[j - 1] for j in range(1, eta + 1)]
        # exact division by (1 + x)
        out = [0] * (eta + 1)
        prev = 0
        for j in range(eta + 1):
            prev = q[j] - prev
            out[j] = prev
        row = out
        rows.append(tuple(row))
    return tuple(rows)


def _w_fast(t, K1, K2, s, a, a_last, b, n, J) -> int:
    kappa, eta, gamma = _kappa_eta_gamma(t, K1, K2, s, a, a_last, b, J)
    m = n - gamma
    if eta < 0 or m < 0 or m > eta or kappa < 0 or kappa > eta:
        return 0
    v = _kraw_table(eta)[m][kappa]
    return -v if (gamma * b) & 1 else v


@lru_cache(maxsize=65536)
def _interference_weights(t: int, K1: int, K2: int, a: int, b: int) -> tuple[int, ...]:
    """``G[J] = sum over (a', n) of u * w0 * w1``; the coefficient is ``sum_J G[J] f(tau_J, K3)``."""
    weights = [0] * (K2 + 1)
    n_top = min(K1, t - K1) + 1
    for a_last in (0, 1):
        for n in range(n_top + 1):
            u = u_count(t, K1, a, a_last, n)
            if not u:
                continue
            for J in range(K2 + 1):
                w0 = _w_fast(t, K1, K2, 0, a, a_last, b, n, J)
                if not w0:
                    continue
                w1 = _w_fast(t, K1, K2, 1, a, a_last, b, n, J)
                if w1:
                    weights[J] += u * w0 * w1
    return tuple(weights)


def _check_query(t: int, K1: int, K2: int, K3: int, a: int, b: int) -> None:
    if not (0 <= K1 <= t and 0 <= K2 <= t and 0 <= K3 <= t):
        raise ValueError(f"need 0 <= K1, K2, K3 <= t, got t={t}, K=({K1}, {K2}, {K3})")
    if a not in (0, 1) or b not in (0, 1):
        raise ValueError("a and b must be bits")


def _gauss_from_quarters(counts: Sequence[int], chirality: Chirality) -> Amplitude:
    """``sum_q counts[q] * (c*i)**q`` for q = 0..3."""
    c0, c1, c2, c3 = counts
    return Amplitude(c0 - c2, int(chirality) * (c1 - c3))


def c_coefficient(
    t: int, K1: int, K2: int, K3: int, a: int, b: int, chirality: Chirality = Chirality.PLUS
) -> Amplitude:
    """Closed-form coefficient of ``B_ab`` in the t-step path sum (valid for t >= 2).

    J runs over ``0..K2``; out-of-range terms vanish through the guards.
    """
    if t < 2:
        raise ValueError("the closed form holds for t >= 2; use c_coefficient_bruteforce")
    _check_query(t, K1, K2, K3, a, b)
    weights = _interference_weights(t, K1, K2, a, b)
    f_row = _f_row(t, K3)
    base = abs(K1 - K2)
    quarters = [0, 0, 0, 0]
    for J, g in enumerate(weights):
        if not g:
            continue
        tau = base + 2 * J
        if tau > t:
            continue
        quarters[abs(tau - K3) % 4] += g * f_row[tau]
    return _gauss_from_quarters(quarters, Chirality(chirality))


def c_coefficients(t: int, K1: int, K2: int, K3: int, chirality: Chirality = Chirality.PLUS):
    """All four closed-form coefficients as ``{(a, b): Amplitude}``."""
    return {(a, b): c_coefficient(t, K1, K2, K3, a, b, chirality) for a in (0, 1) for b in (0, 1)}


# -- brute force ---------------------------------------------------------------


def _masks_array(t: int, k: int) -> np.ndarray:
    return np.fromiter(_weight_masks(t, k), dtype=np.int64, count=comb(t, k) if 0 <= k <= t else 0)


def triple_tally(t: int, K1: int, K2: int, K3: int, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """Enumerate every string triple with set-bit counts ``(K1, K2, K3)``.

    Returns integer counts indexed ``[a, b, sign, q]``: ``a`` is the first bit
    of the first string, ``b`` the last bit of the second, ``sign`` the parity
    of ``iota((w1 ^ S w1) & w2)`` and ``q = iota(w1 ^ w2 ^ w3) mod 4``.
    """
    if t < 1:
        raise ValueError("t must be at least 1")
    if t > 62:
        raise BudgetExceeded("string triples beyond length 62 are not enumerable")
    _check_query(t, K1, K2, K3, 0, 0)
    size = comb(t, K1) * comb(t, K2) * comb(t, K3)
    if size > budget:
        raise BudgetExceeded(f"{size} string triples exceed the budget of {budget}")
    return _tally(t, K1, K2, K3).copy()


@lru_cache(maxsize=1024)
def _tally(t: int, K1: int, K2: int, K3: int) -> np.ndarray:
    counts = np.zeros((2, 2, 2, 4), dtype=np.int64)
    W1 = _weight_masks(t, K1)
    W2 = _masks_array(t, K2)
    W3 = _masks_array(t, K3)
    last = (W2 >> (t - 1)) & 1
    for w1 in W1:
        a = w1 & 1
        boundary = w1 ^ _rotl(w1, t)
        sign = np.bitwise_count(W2 & boundary) & 1
        q = np.bitwise_count((W2 ^ w1)[:, None] ^ W3[None, :]) & 3
        idx = ((last * 2 + sign) * 4)[:, None] + q
        counts[a] += np.bincount(idx.ravel(), minlength=16).reshape(2, 2, 4)
    counts.flags.writeable = False
    return counts


def c_coefficient_bruteforce(
    t: int,
    K1: int,
    K2: int,
    K3: int,
    a: int,
    b: int,
    chirality: Chirality = Chirality.PLUS,
    budget: int = DEFAULT_BUDGET,
) -> Amplitude:
    """Coefficient of ``B_ab`` by direct summation over all admissible string triples."""
    _check_query(t, K1, K2, K3, a, b)
    tally = triple_tally(t, K1, K2, K3, budget)[a, b]
    quarters = [int(x) for x in tally[0] - tally[1]]
    return _gauss_from_quarters(quarters, Chirality(chirality))
