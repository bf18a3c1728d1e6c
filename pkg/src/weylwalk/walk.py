"""Transition matrices, the one-step update and multi-step evolution.

Two evolution engines live here:

* :func:`step` scatters every source spinor of a sparse :class:`WalkState`
  with exact :class:`Amplitude` arithmetic.
* :func:`evolve` runs the same update on a dense integer grid.  Every
  transition matrix is ``zeta* * M`` with ``M`` a Gaussian-integer matrix, so
  the grid stores numerators only and the accumulated ``zeta*`` power is
  applied once at the end.  Cells stay in int64 while a bound guarantees no
  overflow and switch to Python ints afterwards.
"""

from __future__ import annotations

import random
from typing import Iterable, Iterator, Mapping, Optional

import numpy as np

from .amplitude import ZERO, Amplitude, Chirality, SpinMatrix
from .combinatorics import BitString, iota, shift
from .lattice import STEP_VECTORS, STEPS, LatticeError, Site, step_code

__all__ = [
    "b_matrix",
    "transition_matrix",
    "transition_table",
    "tilde_matrix",
    "verify_unitarity",
    "unitarity_defects",
    "WalkState",
    "DenseState",
    "step",
    "evolve",
    "iter_evolve",
    "closed_matrix_product",
    "literal_tilde_product",
    "factorized_matrix",
    "random_state",
]

_B = {
    (0, 0): SpinMatrix(((1, 0), (-1, 0))),
    (1, 0): SpinMatrix(((0, -1), (0, 1))),
    (0, 1): SpinMatrix(((1, 0), (1, 0))),
    (1, 1): SpinMatrix(((0, 1), (0, 1))),
}

# A_{h_l} = zeta* M_l for l > 0 and zeta M_l for l < 0, as tabulated
_TABLE_SHAPES = {
    1: ((1, 0), (1, 0)),
    -1: ((0, -1), (0, 1)),
    2: ((0, 1), (0, 1)),
    -2: ((1, 0), (-1, 0)),
    3: ((0, -1), (0, 1)),
    -3: ((1, 0), (1, 0)),
    4: ((1, 0), (-1, 0)),
    -4: ((0, 1), (0, 1)),
}


def b_matrix(a: int, b: int) -> SpinMatrix:
    return _B[(a, b)]


def transition_matrix(l: int, chirality: Chirality = Chirality.PLUS) -> SpinMatrix:
    if l not in STEP_VECTORS:
        raise LatticeError(f"step index must be one of ±1..±4, got {l!r}")
    zeta = Chirality(chirality).zeta
    return SpinMatrix(_TABLE_SHAPES[l]) * (zeta.conjugate() if l > 0 else zeta)


def transition_table(chirality: Chirality = Chirality.PLUS) -> dict[int, SpinMatrix]:
    return {l: transition_matrix(l, chirality) for l in STEPS}


def tilde_matrix(code, chirality: Chirality = Chirality.PLUS) -> SpinMatrix:
    """``(c*i)**(b1^b2^b3) * B_{b1 b2}`` for a 3-bit step code."""
    b1, b2, b3 = code
    return b_matrix(b1, b2) * Chirality(chirality).phase(b1 ^ b2 ^ b3)


# -- unitarity -----------------------------------------------------------------


def unitarity_defects(
    chirality: Chirality = Chirality.PLUS, table: Optional[Mapping[int, SpinMatrix]] = None
) -> list[dict]:
    """Every displacement where ``W W^dagger`` or ``W^dagger W`` differs from ``delta * I``.

    ``W W^dagger`` couples sites ``g = h - h'`` through ``sum A_h A_h'^dagger``;
    ``W^dagger W`` through ``sum A_h'^dagger A_h``.
    """
    table = transition_table(chirality) if table is None else table
    left: dict[tuple, SpinMatrix] = {}
    right: dict[tuple, SpinMatrix] = {}
    for l in STEPS:
        for lp in STEPS:
            g = tuple(x - y for x, y in zip(STEP_VECTORS[l], STEP_VECTORS[lp]))
            left[g] = left.get(g, SpinMatrix.zero()) + table[l] @ table[lp].dagger()
            right[g] = right.get(g, SpinMatrix.zero()) + table[lp].dagger() @ table[l]
    defects = []
    for kind, sums in (("W W^dagger", left), ("W^dagger W", right)):
        for g in sorted(sums):
            expected = SpinMatrix.identity() if g == (0, 0, 0) else SpinMatrix.zero()
            if sums[g] != expected:
                defects.append({"product": kind, "displacement": list(g), "sum": sums[g].to_json()})
    return defects


def verify_unitarity(
    chirality: Chirality = Chirality.PLUS, table: Optional[Mapping[int, SpinMatrix]] = None
) -> bool:
    return not unitarity_defects(chirality, table)


# -- states ----------------------------------------------------------------------


Spinor = tuple[Amplitude, Amplitude]


class WalkState:
    """Sparse map from sites to two-component spinors.

    Zero spinors are never stored and all sites share one parity.
    """

    __slots__ = ("_data",)

    def __init__(self, data: Optional[Mapping[Site, Iterable]] = None) -> None:
        clean: dict[Site, Spinor] = {}
        parity = None
        for site, spinor in (data or {}).items():
            if not isinstance(site, Site):
                site = Site(*site)
            up, down = (Amplitude.coerce(x) for x in spinor)
            if not (up or down):
                continue
            if parity is None:
                parity = site.parity
            elif site.parity != parity:
                raise LatticeError("walk state mixes even and odd sublattice sites")
            clean[site] = (up, down)
        self._data = clean

    @classmethod
    def delta(cls, site: Site = Site(0, 0, 0), up=1, down=0) -> "WalkState":
        return cls({site: (up, down)})

    @classmethod
    def _trusted(cls, data: dict) -> "WalkState":
        obj = cls.__new__(cls)
        obj._data = data
        return obj

    def __len__(self) -> int:
        return len(self._data)

    def __contains__(self, site) -> bool:
        return site in self._data

    def __getitem__(self, site) -> Spinor:
        return self._data.get(site, (ZERO, ZERO))

    def sites(self) -> list[Site]:
        return sorted(self._data)

    def items(self) -> list[tuple[Site, Spinor]]:
        return sorted(self._data.items())

    @property
    def parity(self) -> Optional[int]:
        for site in self._data:
            return site.parity
        return None

    def norm2(self) -> Amplitude:
        total = ZERO
        for up, down in self._data.values():
            total = total + up.abs2() + down.abs2()
        return total

    def conjugate(self) -> "WalkState":
        return WalkState._trusted({s: (u.conjugate(), d.conjugate()) for s, (u, d) in self._data.items()})

    def __eq__(self, other) -> bool:
        if not isinstance(other, WalkState):
            return NotImplemented
        return self._data == other._data

    def __repr__(self) -> str:
        return f"WalkState({len(self._data)} sites)"

    def to_json(self) -> list[dict]:
        return [
            {"x": list(site), "up": up.to_json(), "down": down.to_json()}
            for site, (up, down) in self.items()
        ]

    @classmethod
    def from_json(cls, rows) -> "WalkState":
        if not isinstance(rows, list):
            raise ValueError("state file must hold a JSON array")
        data: dict[Site, Spinor] = {}
        for row in rows:
            x = row["x"]
            if len(x) != 3 or not all(isinstance(v, int) and not isinstance(v, bool) for v in x):
                raise ValueError(f"site must be three integers, got {x!r}")
            site = Site(*x)
            if site in data:
                raise ValueError(f"duplicate site {site}")
            data[site] = (Amplitude.from_json(row["up"]), Amplitude.from_json(row["down"]))
        return cls(data)


def random_state(
    rng: random.Random, n_sites: int = 4, spread: int = 4, max_log2_den: int = 3, max_num: int = 3
) -> WalkState:
    """A random sparse state with small exact amplitudes on one sublattice (not normalised)."""
    parity = rng.randint(0, 1)
    data = {}
    while len(data) < n_sites:
        x = tuple(2 * rng.randint(-spread, spread) + parity for _ in range(3))
        spinor = tuple(
            Amplitude(rng.randint(-max_num, max_num), rng.randint(-max_num, max_num), rng.randint(0, max_log2_den))
            for _ in range(2)
        )
        if any(spinor):
            data[Site(*x)] = spinor
    return WalkState(data)


# -- sparse stepper -------------------------------------------------------------


def step(
    state: WalkState,
    chirality: Chirality = Chirality.PLUS,
    table: Optional[Mapping[int, SpinMatrix]] = None,
) -> WalkState:
    """One application of the walk: spinor at ``y`` feeds ``y - h_l`` through ``A_{h_l}``."""
    table = transition_table(chirality) if table is None else table
    out: dict[tuple, list] = {}
    for (y1, y2, y3), (up, down) in state._data.items():
        for l in STEPS:
            h = STEP_VECTORS[l]
            nu, nd = table[l].apply(up, down)
            if not (nu or nd):
                continue
            key = (y1 - h[0], y2 - h[1], y3 - h[2])
            acc = out.get(key)
            if acc is None:
                out[key] = [nu, nd]
            else:
                acc[0] = acc[0] + nu
                acc[1] = acc[1] + nd
    return WalkState._trusted(
        {Site(*k): (u, d) for k, (u, d) in out.items() if u or d}
    )


# -- dense engine ----------------------------------------------------------------

LIMB_BITS = 30
_LIMB_MASK = (1 << LIMB_BITS) - 1


def _factor_table(chirality: Chirality, table: Optional[Mapping[int, SpinMatrix]]):
    """Write each matrix as ``zeta* * M / 2**e`` with M Gaussian-integer; return (terms, e, bound)."""
    table = transition_table(chirality) if table is None else table
    inv = Amplitude(2, 2 * int(chirality))  # 1 / zeta* = 2 (1 + c i)
    scaled = {l: [x * inv for x in table[l].entries()] for l in STEPS}
    e = max((x.d for xs in scaled.values() for x in xs), default=0)
    terms = []
    for l in STEPS:
        h = STEP_VECTORS[l]
        shift3 = tuple((1 - hi) // 2 for hi in h)
        entries = []
        for k, x in enumerate(scaled[l]):
            x = x.scale2(e)
            if x:
                entries.append((k // 2, k % 2, x.re, x.im))
        terms.append((shift3, entries))
    bound = sum(abs(mr) + abs(mi) for _, entries in terms for (_, _, mr, mi) in entries)
    if bound >= 1 << (62 - LIMB_BITS):
        raise ValueError("transition matrices too large for the dense engine")
    return terms, e, bound


def _accum(dst, src, coef: int) -> None:
    if coef == 1:
        dst += src
    elif coef == -1:
        dst -= src
    elif coef:
        dst += coef * src


def _exact_sum(values: np.ndarray) -> int:
    """Exact sum of an int64 array whose entries are below 2**61 in magnitude."""
    hi = values >> LIMB_BITS
    lo = values & _LIMB_MASK
    return (int(hi.sum()) << LIMB_BITS) + int(lo.sum())


def _to_limbs(values: list[int], nlimbs: int) -> list[list[int]]:
    out = []
    for _ in range(nlimbs - 1):
        out.append([v & _LIMB_MASK for v in values])
        values = [v >> LIMB_BITS for v in values]
    out.append(values)
    return out


class DenseState:
    """Walk state on a dense box: value = ``zeta*^k * N / 2**den`` per component.

    Each of the four real numerator arrays (re/im of up/down) is a list of
    int64 limbs, ``N = sum_i limb_i * 2**(30 i)``, indexed by ``(x - lo) / 2``.
    After normalisation every limb but the top lies in ``[0, 2**30)`` and the
    top one in ``[-2**29, 2**29)``.
    """

    def __init__(self, lo, comps, den: int, k: int, chirality: Chirality):
        self.lo = tuple(lo)
        self.comps = comps
        self.den = den
        self.k = k
        self.chirality = Chirality(chirality)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.comps[0][0].shape

    @property
    def nlimbs(self) -> int:
        return len(self.comps[0])

    @classmethod
    def from_state(cls, state: WalkState, chirality: Chirality) -> "DenseState":
        if not len(state):
            return cls((0, 0, 0), [[np.zeros((1, 1, 1), dtype=np.int64)] for _ in range(4)], 0, 0, chirality)
        sites = state.sites()
        lo = tuple(min(s[i] for s in sites) for i in range(3))
        hi = tuple(max(s[i] for s in sites) for i in range(3))
        shape = tuple((hi[i] - lo[i]) // 2 + 1 for i in range(3))
        den = max(x.d for _, spinor in state.items() for x in spinor)
        idx = []
        cols: list[list[int]] = [[], [], [], []]
        for site, (up, down) in state.items():
            idx.append(tuple((site[i] - lo[i]) // 2 for i in range(3)))
            u, d = up.scale2(den), down.scale2(den)
            for col, v in zip(cols, (u.re, u.im, d.re, d.im)):
                col.append(v)
        top = max(abs(v) for col in cols for v in col)
        nlimbs = 1
        while top >= 1 << (LIMB_BITS * nlimbs - 1):
            nlimbs += 1
        where = tuple(np.array(axis) for axis in zip(*idx))
        comps = []
        for col in cols:
            limbs = []
            for part in _to_limbs(col, nlimbs):
                arr = np.zeros(shape, dtype=np.int64)
                arr[where] = part
                limbs.append(arr)
            comps.append(limbs)
        return cls(lo, comps, den, 0, chirality)

    @staticmethod
    def _normalize(comps) -> None:
        for limbs in comps:
            for i in range(len(limbs) - 1):
                carry = limbs[i] >> LIMB_BITS
                limbs[i] &= _LIMB_MASK
                limbs[i + 1] += carry
        half = 1 << (LIMB_BITS - 1)
        if any(int(np.abs(limbs[-1]).max()) >= half for limbs in comps):
            for limbs in comps:
                top = limbs[-1]
                carry = (top + half) >> LIMB_BITS
                limbs[-1] = top - (carry << LIMB_BITS)
                limbs.append(carry)

    def advance(self, terms, e: int, bound: int) -> "DenseState":
        comps = self.comps
        m = self.nlimbs
        n0, n1, n2 = self.shape
        out = [[np.zeros((n0 + 1, n1 + 1, n2 + 1), dtype=np.int64) for _ in range(m)] for _ in range(4)]
        for (s0, s1, s2), entries in terms:
            view = (slice(s0, s0 + n0), slice(s1, s1 + n1), slice(s2, s2 + n2))
            for row, col, mr, mi in entries:
                src_re, src_im = comps[2 * col], comps[2 * col + 1]
                dst_re, dst_im = out[2 * row], out[2 * row + 1]
                for i in range(m):
                    _accum(dst_re[i][view], src_re[i], mr)
                    _accum(dst_re[i][view], src_im[i], -mi)
                    _accum(dst_im[i][view], src_im[i], mr)
                    _accum(dst_im[i][view], src_re[i], mi)
        self._normalize(out)
        lo = tuple(x - 1 for x in self.lo)
        return DenseState(lo, out, self.den + e, self.k + 1, self.chirality)

    def norm2(self) -> Amplitude:
        """Exact squared norm; ``|zeta*|^2 = 1/8`` per pending factor."""
        total = 0
        for limbs in self.comps:
            m = len(limbs)
            for i in range(m):
                total += _exact_sum(limbs[i] * limbs[i]) << (2 * LIMB_BITS * i)
                for j in range(i + 1, m):
                    total += _exact_sum(limbs[i] * limbs[j]) << (LIMB_BITS * (i + j) + 1)
        return Amplitude(total, 0, 3 * self.k + 2 * self.den)

    def numerators(self, comp: int) -> np.ndarray:
        """Component ``comp`` (0..3) as an object array of Python ints."""
        limbs = self.comps[comp]
        out = limbs[-1].astype(object)
        for limb in reversed(limbs[:-1]):
            out = (out << LIMB_BITS) + limb.astype(object)
        return out

    def to_state(self) -> WalkState:
        # (1 - c i)^2 = -2 c i, so zeta*^k = (-c i)^(k//2) (1 - c i)^(k%2) / 2^(2k - k//2)
        c = int(self.chirality)
        k = self.k
        rot = (-c * (k // 2)) % 4
        odd = k & 1
        d = self.den + 2 * k - k // 2
        mask = np.zeros(self.shape, dtype=bool)
        for limbs in self.comps:
            for limb in limbs:
                mask |= limb != 0
        nz = np.argwhere(mask)
        where = tuple(nz.T)
        nums = [self.numerators(comp)[where] for comp in range(4)]
        data = {}
        for n, (i0, i1, i2) in enumerate(nz.tolist()):
            site = Site(self.lo[0] + 2 * i0, self.lo[1] + 2 * i1, self.lo[2] + 2 * i2)
            spinor = []
            for comp in (0, 1):
                re, im = int(nums[2 * comp][n]), int(nums[2 * comp + 1][n])
                if odd:
                    re, im = re + c * im, im - c * re
                spinor.append(Amplitude(re, im, d).times_i(rot))
            data[site] = tuple(spinor)
        return WalkState._trusted(data)


def iter_evolve(
    state: WalkState,
    t: int,
    chirality: Chirality = Chirality.PLUS,
    table: Optional[Mapping[int, SpinMatrix]] = None,
) -> Iterator[DenseState]:
    """Yield the dense state after each of ``t`` steps."""
    if t < 0:
        raise ValueError("t must be non-negative")
    chirality = Chirality(chirality)
    terms, e, bound = _factor_table(chirality, table)
    dense = DenseState.from_state(state, chirality)
    for _ in range(t):
        dense = dense.advance(terms, e, bound)
        yield dense


def evolve(
    state: WalkState,
    t: int,
    chirality: Chirality = Chirality.PLUS,
    table: Optional[Mapping[int, SpinMatrix]] = None,
) -> WalkState:
    """``t`` applications of the walk (``t = 0`` returns the state unchanged)."""
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0 or not len(state):
        return state
    dense = None
    for dense in iter_evolve(state, t, chirality, table):
        pass
    return dense.to_state()


# -- semigroup product -------------------------------------------------------------


def closed_matrix_product(
    w1: BitString, w2: BitString, w3: BitString, chirality: Chirality = Chirality.PLUS
) -> tuple[int, int, tuple[int, int]]:
    """Factorised product ``Ã_t ... Ã_1`` of the matrices with codes ``(w1_k, w2_k, w3_k)``.

    Returns ``(sign, quarter_turns, (a, b))`` meaning
    ``sign * i**quarter_turns * B_ab``.
    """
    t = len(w1)
    if t < 1 or len(w2) != t or len(w3) != t:
        raise ValueError("code strings must share one length >= 1")
    sign = -1 if iota((w1 ^ shift(w1)) & w2) & 1 else 1
    quarter = Chirality(chirality).quarter_turns(iota(w1 ^ w2 ^ w3))
    return sign, quarter, (w1.first, w2.last)


def factorized_matrix(sign: int, quarter_turns: int, b_index: tuple[int, int]) -> SpinMatrix:
    return b_matrix(*b_index) * (Amplitude.i_power(quarter_turns) * sign)


def literal_tilde_product(
    w1: BitString, w2: BitString, w3: BitString, chirality: Chirality = Chirality.PLUS
) -> SpinMatrix:
    """Right-to-left product of the ``Ã`` matrices, multiplied out entry by entry."""
    out = SpinMatrix.identity()
    for code in zip(w1, w2, w3):
        out = tilde_matrix(code, chirality) @ out
    return out


def tilde_for_step(l: int, chirality: Chirality = Chirality.PLUS) -> SpinMatrix:
    return tilde_matrix(step_code(l), chirality)
