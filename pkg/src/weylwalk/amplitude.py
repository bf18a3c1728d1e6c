"""Exact dyadic Gaussian numbers and 2x2 matrices over them.

Every amplitude produced by the walk lies in Z[i] / 2^d, so values are kept
as a pair of Python ints over a power-of-two denominator and compared
bit-exactly.
"""

from __future__ import annotations

from enum import IntEnum
from typing import Iterable, Union

__all__ = ["Amplitude", "Chirality", "SpinMatrix", "ZERO", "ONE", "I"]


def _twos(x: int) -> int:
    """Number of trailing zero bits of a nonzero int."""
    return (x & -x).bit_length() - 1


class Amplitude:
    """The value ``(re + i*im) / 2**d`` in canonical (fully reduced) form.

    Canonical means ``d == 0`` or at least one of ``re``, ``im`` is odd, so
    equal values always have equal fields.
    """

    __slots__ = ("re", "im", "d")

    re: int
    im: int
    d: int

    def __init__(self, re: int = 0, im: int = 0, d: int = 0) -> None:
        re = int(re)
        im = int(im)
        d = int(d)
        if d < 0:
            re <<= -d
            im <<= -d
            d = 0
        if d:
            if re == 0 and im == 0:
                d = 0
            else:
                k = min(d, _twos(re | im))
                if k:
                    re >>= k
                    im >>= k
                    d -= k
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)
        object.__setattr__(self, "d", d)

    def __setattr__(self, name, value):
        raise AttributeError("Amplitude is immutable")

    def __reduce__(self):
        return (Amplitude, (self.re, self.im, self.d))

    @classmethod
    def coerce(cls, value: Union["Amplitude", int, complex]) -> "Amplitude":
        if isinstance(value, Amplitude):
            return value
        if isinstance(value, int):
            return cls(value)
        if isinstance(value, complex) and value.real.is_integer() and value.imag.is_integer():
            return cls(int(value.real), int(value.imag))
        raise TypeError(f"cannot convert {value!r} to an exact Amplitude")

    @classmethod
    def i_power(cls, k: int) -> "Amplitude":
        """Return ``i**k``."""
        return _I_POWERS[k % 4]

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, int):
            other = Amplitude(other)
        elif not isinstance(other, Amplitude):
            return NotImplemented
        d1, d2 = self.d, other.d
        if d1 == d2:
            return Amplitude(self.re + other.re, self.im + other.im, d1)
        if d1 > d2:
            s = d1 - d2
            return Amplitude(self.re + (other.re << s), self.im + (other.im << s), d1)
        s = d2 - d1
        return Amplitude((self.re << s) + other.re, (self.im << s) + other.im, d2)

    __radd__ = __add__

    def __neg__(self) -> "Amplitude":
        return Amplitude(-self.re, -self.im, self.d)

    def __sub__(self, other):
        if isinstance(other, int):
            other = Amplitude(other)
        elif not isinstance(other, Amplitude):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return Amplitude(self.re * other, self.im * other, self.d)
        if not isinstance(other, Amplitude):
            return NotImplemented
        a, b, c, e = self.re, self.im, other.re, other.im
        return Amplitude(a * c - b * e, a * e + b * c, self.d + other.d)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Amplitude":
        if k < 0:
            raise ValueError("negative powers are not dyadic in general")
        out = ONE
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def scale2(self, k: int) -> "Amplitude":
        """Multiply by ``2**k`` (k may be negative)."""
        return Amplitude(self.re, self.im, self.d - k)

    def conjugate(self) -> "Amplitude":
        return Amplitude(self.re, -self.im, self.d)

    def times_i(self, k: int = 1) -> "Amplitude":
        """Multiply by ``i**k`` without a general product."""
        k %= 4
        re, im = self.re, self.im
        if k == 0:
            return self
        if k == 1:
            return Amplitude(-im, re, self.d)
        if k == 2:
            return Amplitude(-re, -im, self.d)
        return Amplitude(im, -re, self.d)

    def abs2(self) -> "Amplitude":
        """Squared modulus, as a real Amplitude."""
        return Amplitude(self.re * self.re + self.im * self.im, 0, 2 * self.d)

    # -- comparisons and views --------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = Amplitude(other)
        elif not isinstance(other, Amplitude):
            return NotImplemented
        return self.re == other.re and self.im == other.im and self.d == other.d

    def __hash__(self) -> int:
        return hash((self.re, self.im, self.d))

    def __bool__(self) -> bool:
        return bool(self.re or self.im)

    def __complex__(self) -> complex:
        return complex(self.real_float(), self.imag_float())

    def real_float(self) -> float:
        return self.re / (1 << self.d)

    def imag_float(self) -> float:
        return self.im / (1 << self.d)

    def __repr__(self) -> str:
        return f"Amplitude({self.re}, {self.im}, d={self.d})"

    def __str__(self) -> str:
        num = f"{self.re}{self.im:+d}i"
        return num if self.d == 0 else f"({num})/2^{self.d}"

    def to_json(self) -> dict:
        return {"re": str(self.re), "im": str(self.im), "log2_den": self.d}

    @classmethod
    def from_json(cls, obj: dict) -> "Amplitude":
        d = obj["log2_den"]
        if not isinstance(d, int) or isinstance(d, bool) or d < 0:
            raise ValueError(f"log2_den must be a non-negative integer, got {d!r}")
        return cls(int(str(obj["re"])), int(str(obj["im"])), d)


ZERO = Amplitude(0)
ONE = Amplitude(1)
I = Amplitude(0, 1)
_I_POWERS = (ONE, I, Amplitude(-1), Amplitude(0, -1))


class SpinMatrix:
    """Immutable 2x2 matrix of Amplitudes, stored row-major."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, rows: Iterable[Iterable]) -> None:
        (a, b), (c, d) = rows
        co = Amplitude.coerce
        object.__setattr__(self, "a", co(a))
        object.__setattr__(self, "b", co(b))
        object.__setattr__(self, "c", co(c))
        object.__setattr__(self, "d", co(d))

    def __setattr__(self, name, value):
        raise AttributeError("SpinMatrix is immutable")

    def __reduce__(self):
        return (SpinMatrix, (self.rows,))

    @classmethod
    def zero(cls) -> "SpinMatrix":
        return _ZERO_M

    @classmethod
    def identity(cls) -> "SpinMatrix":
        return _ID_M

    @property
    def rows(self) -> tuple[tuple[Amplitude, Amplitude], tuple[Amplitude, Amplitude]]:
        return ((self.a, self.b), (self.c, self.d))

    def entries(self) -> tuple[Amplitude, Amplitude, Amplitude, Amplitude]:
        return (self.a, self.b, self.c, self.d)

    def __getitem__(self, idx: tuple[int, int]) -> Amplitude:
        r, c = idx
        return self.rows[r][c]

    def __matmul__(self, other: "SpinMatrix") -> "SpinMatrix":
        if not isinstance(other, SpinMatrix):
            return NotImplemented
        return SpinMatrix(
            (
                (self.a * other.a + self.b * other.c, self.a * other.b + self.b * other.d),
                (self.c * other.a + self.d * other.c, self.c * other.b + self.d * other.d),
            )
        )

    def apply(self, up: Amplitude, down: Amplitude) -> tuple[Amplitude, Amplitude]:
        """Matrix times the column spinor ``(up, down)``."""
        return (self.a * up + self.b * down, self.c * up + self.d * down)

    def __add__(self, other: "SpinMatrix") -> "SpinMatrix":
        if not isinstance(other, SpinMatrix):
            return NotImplemented
        return SpinMatrix(((self.a + other.a, self.b + other.b), (self.c + other.c, self.d + other.d)))

    def __sub__(self, other: "SpinMatrix") -> "SpinMatrix":
        return self + (-other)

    def __neg__(self) -> "SpinMatrix":
        return SpinMatrix(((-self.a, -self.b), (-self.c, -self.d)))

    def __mul__(self, k) -> "SpinMatrix":
        if not isinstance(k, (int, Amplitude)):
            return NotImplemented
        return SpinMatrix(((self.a * k, self.b * k), (self.c * k, self.d * k)))

    __rmul__ = __mul__

    def conjugate(self) -> "SpinMatrix":
        return SpinMatrix(((self.a.conjugate(), self.b.conjugate()), (self.c.conjugate(), self.d.conjugate())))

    def dagger(self) -> "SpinMatrix":
        return SpinMatrix(((self.a.conjugate(), self.c.conjugate()), (self.b.conjugate(), self.d.conjugate())))

    def is_zero(self) -> bool:
        return not (self.a or self.b or self.c or self.d)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SpinMatrix):
            return NotImplemented
        return self.entries() == other.entries()

    def __hash__(self) -> int:
        return hash(self.entries())

    def __repr__(self) -> str:
        return f"SpinMatrix([[{self.a!s}, {self.b!s}], [{self.c!s}, {self.d!s}]])"

    def to_complex(self) -> list[list[complex]]:
        return [[complex(x) for x in row] for row in self.rows]

    def to_json(self) -> list[list[dict]]:
        return [[x.to_json() for x in row] for row in self.rows]

    @classmethod
    def from_json(cls, obj) -> "SpinMatrix":
        return cls([[Amplitude.from_json(x) for x in row] for row in obj])


_ZERO_M = SpinMatrix(((0, 0), (0, 0)))
_ID_M = SpinMatrix(((1, 0), (0, 1)))


class Chirality(IntEnum):
    """Selects one of the two inequivalent walks.

    ``PLUS`` has ``zeta = (1+i)/4`` and pairs with ``+i`` in the phase
    factors; ``MINUS`` is its complex conjugate.
    """

    PLUS = 1
    MINUS = -1

    @classmethod
    def parse(cls, text: Union[str, int, "Chirality"]) -> "Chirality":
        if isinstance(text, Chirality):
            return text
        key = str(text).strip().lower()
        if key in ("+", "+1", "1", "plus"):
            return cls.PLUS
        if key in ("-", "-1", "minus"):
            return cls.MINUS
        raise ValueError(f"chirality must be '+' or '-', got {text!r}")

    @property
    def symbol(self) -> str:
        return "+" if self is Chirality.PLUS else "-"

    @property
    def zeta(self) -> Amplitude:
        return Amplitude(1, int(self), 2)

    def phase(self, k: int) -> Amplitude:
        """``(c*i)**k``."""
        return _I_POWERS[(int(self) * k) % 4]

    def quarter_turns(self, k: int) -> int:
        """Exponent ``q`` in ``i**q == (c*i)**k``, reduced mod 4."""
        return (int(self) * k) % 4
