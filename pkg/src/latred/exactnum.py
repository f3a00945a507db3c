"""Exact scalar arithmetic conventions used across the package.

Integers are plain Python ints (arbitrary precision) and rationals are
``fractions.Fraction`` values (always in lowest terms, positive
denominator).  Serialization is by decimal strings: ``"-12"`` for
integers and ``"num/den"`` for non-integral rationals.  No floating
point is used anywhere.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

Rat = Fraction

HALF = Fraction(1, 2)


def frac(x: Rat | int) -> Rat:
    """Fractional part of x, normalized into the interval (-1/2, 1/2]."""
    x = Fraction(x)
    return x - math.ceil(x - HALF)


def frac_vector(xs: Iterable[Rat | int]) -> tuple[Rat, ...]:
    return tuple(frac(x) for x in xs)


def minimal_residue(a: int, m: int) -> int:
    """Residue of a modulo m with magnitude at most m/2.

    The tie at magnitude exactly m/2 (m even) resolves to +m/2 so that
    minimal residues match the (-1/2, 1/2] fractional-part convention.
    """
    if m <= 0:
        raise ValueError("modulus must be positive")
    r = a % m
    if 2 * r > m:
        r -= m
    return r


def lcd(xs: Iterable[Rat | int]) -> int:
    """Smallest positive d with d*x integral; 1 for an all-integer vector."""
    return math.lcm(*(Fraction(x).denominator for x in xs)) if xs else 1


def ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, s, t) with g = gcd(a, b) > 0 and s*a + t*b = g."""
    if a == 0 and b == 0:
        raise ValueError("gcd(0, 0) is undefined")
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def _primes() -> Iterable[int]:
    """2, 3, 5, ... by trial division against the primes found so far."""
    found: list[int] = []
    n = 2
    while True:
        if all(n % p for p in found):
            found.append(n)
            yield n
        n += 1 if n == 2 else 2


def least_prime_not_dividing(n: int) -> int:
    """Smallest prime p with p not dividing n (n must be nonzero)."""
    if n == 0:
        raise ValueError("every prime divides 0")
    n = abs(n)
    for p in _primes():
        if n % p:
            return p
    raise AssertionError("unreachable")


def ceil_log(base: int, bound: Rat | int) -> int:
    """Smallest j >= 0 with |base|**j >= bound, by exact comparison."""
    if abs(base) < 2:
        raise ValueError("|base| must be at least 2")
    bound = Fraction(bound)
    if bound <= 0:
        raise ValueError("bound must be positive")
    b = abs(base)
    j = 0
    power = 1
    while power < bound:
        power *= b
        j += 1
    return j


def format_int(v: int) -> str:
    return str(v)


def parse_int(s: str) -> int:
    return int(s, 10)


def format_rational(x: Rat | int) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(s: str) -> Rat:
    return Fraction(s)


def format_rational_vector(xs: Sequence[Rat | int]) -> list[str]:
    return [format_rational(x) for x in xs]


def parse_rational_vector(items: Sequence[str]) -> tuple[Rat, ...]:
    return tuple(parse_rational(s) for s in items)
