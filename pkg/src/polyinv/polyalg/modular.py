"""Prime fields, Chinese remaindering and rational reconstruction."""

from __future__ import annotations

from fractions import Fraction
from math import gcd, isqrt, prod
from typing import Optional, Sequence

from sympy.ntheory import isprime, prevprime

# largest prime below 2**64
MAX_MACHINE_PRIME = 2**64 - 59


def max_machine_prime() -> int:
    return MAX_MACHINE_PRIME


def prev_prime(p: int) -> int:
    """Largest prime strictly below ``p``."""
    if p <= 2:
        raise ValueError("no prime below 2")
    return int(prevprime(p))


def primes_descending(start: int = MAX_MACHINE_PRIME):
    p = start if isprime(start) else prev_prime(start)
    while p > 2:
        yield p
        p = prev_prime(p)


def crt_combine(residues: Sequence[int], moduli: Sequence[int]) -> int:
    """Unique x in [0, prod(moduli)) with x = r_i mod m_i for every i."""
    if len(residues) != len(moduli) or not moduli:
        raise ValueError("need equally many residues and moduli, at least one")
    x, m = 0, 1
    for r, n in zip(residues, moduli):
        if gcd(m, n) != 1:
            raise ValueError(f"moduli are not pairwise coprime ({n})")
        # x + m*k = r (mod n)
        k = (r - x) * pow(m, -1, n) % n
        x += m * k
        m *= n
    return x % m


def rational_reconstruct(residue: int, modulus: int) -> Optional[Fraction]:
    """Fraction a/b with a = residue*b (mod modulus) and |a|, b <= sqrt(modulus/2).

    Returns None when no such fraction exists.
    """
    if not 0 <= residue < modulus:
        raise ValueError("residue out of range")
    bound = isqrt(modulus // 2)
    r0, r1 = modulus, residue
    t0, t1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        t0, t1 = t1, t0 - q * t1
    if t1 == 0 or abs(t1) > bound or gcd(r1, abs(t1)) != 1:
        return None
    if t1 < 0:
        r1, t1 = -r1, -t1
    return Fraction(r1, t1)


def reconstruct_vector(images: Sequence[Sequence[int]], primes: Sequence[int]) -> Optional[list]:
    """Entrywise CRT over ``primes`` followed by rational reconstruction."""
    modulus = prod(primes)
    out = []
    for column in zip(*images):
        v = crt_combine(list(column), primes)
        q = rational_reconstruct(v, modulus)
        if q is None:
            return None
        out.append(q)
    return out


def congruent(values: Sequence[Fraction], image: Sequence[int], p: int) -> bool:
    """True when every rational in ``values`` reduces to the matching entry of ``image``."""
    for v, r in zip(values, image):
        if v.denominator % p == 0:
            return False
        if v.numerator * pow(v.denominator, -1, p) % p != r % p:
            return False
    return True
