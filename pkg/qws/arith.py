"""Continued fractions, rational reconstruction and small number-theoretic helpers."""

import math
from fractions import Fraction
from typing import Generator, Iterable, Iterator, List, Optional, Sequence, Tuple

# Remainders below this end the continued fraction expansion.
CF_EPS = 1e-13
MAX_TERMS = 64


def continued_fraction(x: float, eps: float = CF_EPS, max_terms: int = MAX_TERMS) -> Generator[int, None, None]:
    """Euclidean algorithm on a real number, yielding its continued fraction coefficients."""
    for _ in range(max_terms):
        a = math.floor(x)
        yield int(a)
        rem = x - a
        if rem < eps:
            return
        x = 1.0 / rem


def convergents(coeffs: Iterable[int]) -> Generator[Tuple[int, int], None, None]:
    """Fold continued fraction coefficients into successive convergents p/q."""
    p_prev, p = 0, 1
    q_prev, q = 1, 0
    for a in coeffs:
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        yield p, q


def rationalize(
    x: float, max_denominator: int = 10**6, tol: float = 1e-8, scaled: bool = False
) -> Optional[Fraction]:
    """Return the first convergent of ``x`` within ``tol``, or None.

    A convergent p/q of an irrational number lies about 1 / (a q**2) from it, a
    being the next coefficient, so any real number eventually meets a fixed
    ``tol``. With ``scaled`` the residual must be below ``tol / q**2``, which only
    a float equal to p/q up to rounding satisfies.

    Args:
        x: Real number to reconstruct.
        max_denominator: Largest denominator accepted.
        tol: Absolute residual ``|x - p/q|`` accepted.
        scaled: Divide ``tol`` by the squared denominator of each convergent.

    Returns:
        The reconstructed fraction, or None if no convergent with a small enough
        denominator is close enough.
    """
    if not math.isfinite(x):
        return None
    for p, q in convergents(continued_fraction(x)):
        if q > max_denominator:
            return None
        bound = tol / (q * q) if scaled else tol
        if abs(x - p / q) <= bound:
            return Fraction(p, q)
    return None


def nearest_integer(x: float, tol: float) -> Optional[int]:
    """Round ``x`` if it lies within ``tol * (1 + |x|)`` of an integer."""
    r = round(x)
    if abs(x - r) <= tol * (1.0 + abs(x)):
        return int(r)
    return None


def squarefree_decomposition(n: int, limit: int = 10**6) -> Tuple[int, int]:
    """Write a positive integer as ``s * f**2`` with ``s`` squarefree.

    Trial division runs up to ``limit``; a cofactor left over after that is
    treated as squarefree.

    Returns:
        The pair ``(s, f)``.
    """
    if n <= 0:
        raise ValueError(f"squarefree_decomposition needs a positive integer, got {n}")
    s, f = 1, 1
    p = 2
    while p * p <= n and p <= limit:
        count = 0
        while n % p == 0:
            n //= p
            count += 1
        if count:
            f *= p ** (count // 2)
            if count % 2:
                s *= p
        p += 1 if p == 2 else 2
    return s * n, f


def squarefree_part(n: int) -> int:
    return squarefree_decomposition(n)[0]


def is_perfect_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


def lcm(values: Iterable[int]) -> int:
    result = 1
    for v in values:
        result = result * v // math.gcd(result, v)
    return result


def real_gcd(
    values: Sequence[float], max_denominator: int = 10**6, tol: float = 1e-8, scaled: bool = False
) -> Optional[float]:
    """Greatest common divisor of reals that are rational multiples of each other.

    Every value is reconstructed as a rational multiple of the largest one in
    modulus, with ``scaled`` as in ``rationalize``. The gcd is that base divided by
    the lcm of denominators, times the gcd of the resulting integer multiples.

    Returns:
        The positive gcd, or None when some ratio is not rational within the bounds.
    """
    nonzero = [v for v in values if abs(v) > tol]
    if not nonzero:
        return None
    base = max(nonzero, key=abs)
    ratios: List[Fraction] = []
    for v in nonzero:
        frac = rationalize(v / base, max_denominator, tol, scaled)
        if frac is None:
            return None
        ratios.append(frac)
    denom = lcm(fr.denominator for fr in ratios)
    multiples = [fr.numerator * (denom // fr.denominator) for fr in ratios]
    g = 0
    for m in multiples:
        g = math.gcd(g, m)
    return abs(base) * g / denom


def fibonacci(count: int) -> Iterator[int]:
    """Yield the first ``count`` Fibonacci numbers 0, 1, 1, 2, 3, ..."""
    a, b = 0, 1
    for _ in range(count):
        yield a
        a, b = b, a + b
