"""BCC lattice geometry: sites, the eight generator steps and their 3-bit codes.

The vertex set is ``2Z^3 ∪ (2Z^3 + (1,1,1))``; a site is an integer triple
whose coordinates share one parity.  Steps are indexed by ``l`` in
``{±1, ±2, ±3, ±4}`` with ``h_{-l} = -h_l``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional

__all__ = [
    "LatticeError",
    "Site",
    "STEPS",
    "STEP_VECTORS",
    "StepCode",
    "StringCounts",
    "StepCountQuadruple",
    "step_vector",
    "step_code",
    "decode_step",
    "path_endpoint",
    "string_counts",
    "past_causal_cone",
    "in_past_cone",
]


class LatticeError(ValueError):
    """Raised for coordinates that are not a BCC site or an invalid step index."""


class _SiteBase(NamedTuple):
    x1: int
    x2: int
    x3: int


class Site(_SiteBase):
    """A BCC lattice point. Ordering is lexicographic."""

    __slots__ = ()

    def __new__(cls, x1: int, x2: int, x3: int) -> "Site":
        if (x1 - x2) % 2 or (x1 - x3) % 2:
            raise LatticeError(f"({x1}, {x2}, {x3}) mixes coordinate parities; not a BCC site")
        return super().__new__(cls, int(x1), int(x2), int(x3))

    @classmethod
    def parse(cls, text: str) -> "Site":
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise LatticeError(f"expected three comma-separated integers, got {text!r}")
        try:
            return cls(*(int(p) for p in parts))
        except ValueError as exc:
            if isinstance(exc, LatticeError):
                raise
            raise LatticeError(f"expected three comma-separated integers, got {text!r}") from None

    @property
    def parity(self) -> int:
        return self.x1 & 1

    def __add__(self, other) -> "Site":  # type: ignore[override]
        return Site(self.x1 + other[0], self.x2 + other[1], self.x3 + other[2])

    def __sub__(self, other) -> tuple[int, int, int]:
        """Displacement ``self - other`` as a plain integer triple."""
        return (self.x1 - other[0], self.x2 - other[1], self.x3 - other[2])

    def __str__(self) -> str:
        return f"{self.x1},{self.x2},{self.x3}"


ORIGIN = Site(0, 0, 0)

STEPS: tuple[int, ...] = (1, 2, 3, 4, -1, -2, -3, -4)

_H = {
    1: (1, 1, 1),
    2: (1, -1, -1),
    3: (-1, 1, -1),
    4: (-1, -1, 1),
}

_STEP_POS = {l: k for k, l in enumerate(STEPS)}

STEP_VECTORS: dict[int, tuple[int, int, int]] = {
    **_H,
    **{-l: (-v[0], -v[1], -v[2]) for l, v in _H.items()},
}

StepCode = tuple[int, int, int]

_CODES: dict[int, StepCode] = {
    1: (0, 1, 1),
    2: (1, 1, 0),
    3: (1, 0, 1),
    4: (0, 0, 0),
    -1: (1, 0, 0),
    -2: (0, 0, 1),
    -3: (0, 1, 0),
    -4: (1, 1, 1),
}
_DECODE: dict[StepCode, int] = {code: l for l, code in _CODES.items()}


def _check_step(l: int) -> None:
    if l not in STEP_VECTORS:
        raise LatticeError(f"step index must be one of ±1..±4, got {l!r}")


def step_vector(l: int) -> tuple[int, int, int]:
    _check_step(l)
    return STEP_VECTORS[l]


def step_code(l: int) -> StepCode:
    """Three-bit code ``(b1, b2, b3)`` of generator ``h_l``."""
    _check_step(l)
    return _CODES[l]


def decode_step(code: Iterable[int]) -> int:
    code = tuple(int(b) for b in code)
    try:
        return _DECODE[code]  # type: ignore[index]
    except KeyError:
        raise LatticeError(f"not a 3-bit step code: {code!r}") from None


@dataclass(frozen=True)
class StepCountQuadruple:
    """Multiplicity ``n[l]`` of each step ``h_l`` in a path, stored in ``STEPS`` order."""

    counts: tuple[int, ...] = (0,) * 8

    def __getitem__(self, l: int) -> int:
        _check_step(l)
        return self.counts[_STEP_POS[l]]

    @property
    def total(self) -> int:
        return sum(self.counts)

    def displacement(self) -> tuple[int, int, int]:
        return tuple(
            sum((self[l] - self[-l]) * _H[l][i] for l in _H) for i in range(3)
        )  # type: ignore[return-value]


def path_endpoint(start: Site, steps: Iterable[int]) -> tuple[Site, StepCountQuadruple]:
    """Follow ``steps`` from ``start``; return the endpoint and step multiplicities."""
    counts = [0] * 8
    x1, x2, x3 = start
    for l in steps:
        h = step_vector(l)
        x1 += h[0]
        x2 += h[1]
        x3 += h[2]
        counts[_STEP_POS[l]] += 1
    return Site(x1, x2, x3), StepCountQuadruple(tuple(counts))


class StringCounts(NamedTuple):
    """Set-bit counts ``(K1, K2, K3)`` of the three matrix-code strings of length ``t``."""

    t: int
    K1: int
    K2: int
    K3: int


def string_counts(source: Site, target: Site, t: int) -> Optional[StringCounts]:
    """Set-bit counts fixed by the endpoints, or ``None`` when no t-step path exists.

    The strings encode the codes of the multiplied matrices, i.e. of the
    inverse steps, which is why the sign of the third coordinate differs from
    the other two.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    d1, d2, d3 = target - source
    n1, n2, n3 = t + d3, t - d1, t - d2
    if n1 & 1 or n2 & 1 or n3 & 1:
        return None
    K1, K2, K3 = n1 >> 1, n2 >> 1, n3 >> 1
    if not (0 <= K1 <= t and 0 <= K2 <= t and 0 <= K3 <= t):
        return None
    return StringCounts(t, K1, K2, K3)


def in_past_cone(source: Site, target: Site, t: int) -> bool:
    return string_counts(source, target, t) is not None


def past_causal_cone(x: Site, t: int) -> set[Site]:
    """All sites from which ``x`` is reachable in exactly ``t`` steps; (t+1)^3 of them."""
    if t < 0:
        raise ValueError("t must be non-negative")
    offsets = range(-t, t + 1, 2)
    return {Site(x.x1 + a, x.x2 + b, x.x3 + c) for a in offsets for b in offsets for c in offsets}


def cone_displacements(t: int) -> list[tuple[int, int, int]]:
    """Displacements ``x - x'`` of the t-step cone, in lexicographic order."""
    offsets = range(-t, t + 1, 2)
    return [(a, b, c) for a in offsets for b in offsets for c in offsets]
