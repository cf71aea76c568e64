"""GF(2^q) arithmetic for network-coding coefficients.

Elements are integers in ``[0, 2^q)`` whose bits are the coefficients of a
binary polynomial of degree < q; arithmetic is modulo a fixed irreducible
polynomial of degree q.  Addition is XOR.  Multiplication and inversion go
through log/antilog tables built at context construction, which keeps the
simulation kernels branch-light and makes q > 16 pointless here (hence the
cap).

Default reduction polynomials are fixed per degree (classic low-weight
choices; q=8 is the AES polynomial x^8 + x^4 + x^3 + x + 1) so seeded runs
reproduce across machines.  See DEFAULT_POLYNOMIALS below.
"""

from __future__ import annotations

from .rng import Stream

#: Bitmask encodings of x^q + ... + 1, keyed by exponent q.
DEFAULT_POLYNOMIALS: dict[int, int] = {
    1: 0b11,                 # x + 1
    2: 0b111,                # x^2 + x + 1
    3: 0b1011,               # x^3 + x + 1
    4: 0b10011,              # x^4 + x + 1
    5: 0b100101,             # x^5 + x^2 + 1
    6: 0b1000011,            # x^6 + x + 1
    7: 0b10001001,           # x^7 + x^3 + 1
    8: 0b100011011,          # x^8 + x^4 + x^3 + x + 1 (AES)
    9: 0b1000010001,         # x^9 + x^4 + 1
    10: 0b10000001001,       # x^10 + x^3 + 1
    11: 0b100000000101,      # x^11 + x^2 + 1
    12: 0b1000001010011,     # x^12 + x^6 + x^4 + x + 1
    13: 0b10000000011011,    # x^13 + x^4 + x^3 + x + 1
    14: 0b100010001000011,   # x^14 + x^10 + x^6 + x + 1
    15: 0b1000000000000011,  # x^15 + x + 1
    16: 0b10001000000001011, # x^16 + x^12 + x^3 + x + 1
}

MAX_EXPONENT = 16


class FieldError(ValueError):
    """Invalid field construction or element usage."""


def _polymul_nomod(a: int, b: int) -> int:
    """Carry-less product of two GF(2) polynomials (no reduction)."""
    p = 0
    while b:
        if b & 1:
            p ^= a
        a <<= 1
        b >>= 1
    return p


def _polymod(a: int, mod: int) -> int:
    """Remainder of a GF(2) polynomial division."""
    dm = mod.bit_length() - 1
    while a.bit_length() - 1 >= dm and a:
        a ^= mod << (a.bit_length() - 1 - dm)
    return a


def is_irreducible(poly: int) -> bool:
    """Trial division by every polynomial of degree 1..deg(poly)//2."""
    deg = poly.bit_length() - 1
    if deg < 1:
        return False
    for d in range(1, deg // 2 + 1):
        for div in range(1 << d, 1 << (d + 1)):
            if _polymod(poly, div) == 0:
                return False
    return True


class FieldContext:
    """The field GF(2^q): exponent, reduction polynomial and lookup tables.

    Immutable after construction; safe to share across trial workers.
    ``exp_table`` has length 2*order so products of two table logs index it
    without a modular reduction.
    """

    __slots__ = ("exponent", "reduction_poly", "order", "generator",
                 "exp_table", "log_table")

    def __init__(self, exponent: int, reduction_poly: int | None = None) -> None:
        if not 1 <= exponent <= MAX_EXPONENT:
            raise FieldError(f"exponent must be in [1, {MAX_EXPONENT}], got {exponent}")
        if reduction_poly is None:
            reduction_poly = DEFAULT_POLYNOMIALS[exponent]
        if reduction_poly.bit_length() - 1 != exponent:
            raise FieldError(
                f"reduction polynomial 0x{reduction_poly:X} does not have degree {exponent}"
            )
        if not is_irreducible(reduction_poly):
            raise FieldError(f"reduction polynomial 0x{reduction_poly:X} is reducible")
        self.exponent = exponent
        self.reduction_poly = reduction_poly
        self.order = 1 << exponent
        self._build_tables()

    def _mul_raw(self, a: int, b: int) -> int:
        """Table-free multiply; used to build the tables and as a test oracle."""
        return _polymod(_polymul_nomod(a, b), self.reduction_poly)

    def _build_tables(self) -> None:
        n = self.order - 1
        for g in range(1, self.order):
            exp = [1] * (2 * self.order)
            log = [0] * self.order
            val = 1
            ok = True
            for i in range(n):
                if i > 0 and val == 1:
                    ok = False  # g's order divides i < n: not primitive
                    break
                exp[i] = val
                log[val] = i
                val = self._mul_raw(val, g)
            if ok and val == 1:
                for i in range(n, 2 * self.order):
                    exp[i] = exp[i - n] if n > 0 else 1
                self.generator = g
                self.exp_table = exp
                self.log_table = log
                return
        raise FieldError("no primitive element found (polynomial not irreducible?)")

    # -- int-level arithmetic (hot paths and matrix code use these) --------

    def add(self, a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self.exp_table[self.log_table[a] + self.log_table[b]]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no inverse")
        return self.exp_table[self.order - 1 - self.log_table[a]]

    def element(self, value: int) -> "FieldElement":
        return FieldElement(self, value)

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, FieldContext)
                and other.exponent == self.exponent
                and other.reduction_poly == self.reduction_poly)

    def __hash__(self) -> int:
        return hash((self.exponent, self.reduction_poly))

    def __repr__(self) -> str:
        return f"FieldContext(exponent={self.exponent}, reduction_poly=0x{self.reduction_poly:X})"


class FieldElement:
    """A value in a specific GF(2^q) context, with operator sugar."""

    __slots__ = ("ctx", "value")

    def __init__(self, ctx: FieldContext, value: int) -> None:
        if not 0 <= value < ctx.order:
            raise FieldError(f"value {value} outside [0, {ctx.order})")
        self.ctx = ctx
        self.value = value

    def _check(self, other: "FieldElement") -> None:
        if not isinstance(other, FieldElement):
            raise TypeError(f"expected FieldElement, got {type(other).__name__}")
        if other.ctx != self.ctx:
            raise FieldError("elements from different field contexts")

    def __add__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        return FieldElement(self.ctx, self.value ^ other.value)

    __sub__ = __add__  # characteristic 2

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        return FieldElement(self.ctx, self.ctx.mul(self.value, other.value))

    def inverse(self) -> "FieldElement":
        return FieldElement(self.ctx, self.ctx.inv(self.value))

    def __eq__(self, other: object) -> bool:
        if isinstance(other, FieldElement):
            return self.ctx == other.ctx and self.value == other.value
        if isinstance(other, int):
            return self.value == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.ctx, self.value))

    def __repr__(self) -> str:
        return f"FieldElement(q={self.ctx.exponent}, value=0x{self.value:X})"


def add(a: FieldElement, b: FieldElement) -> FieldElement:
    return a + b


def mul(a: FieldElement, b: FieldElement) -> FieldElement:
    return a * b


def inv(a: FieldElement) -> FieldElement:
    return a.inverse()


def random_element(rng: Stream, ctx: FieldContext) -> FieldElement:
    """Uniform over all 2^q values, zero included."""
    return FieldElement(ctx, rng.below(ctx.order))
