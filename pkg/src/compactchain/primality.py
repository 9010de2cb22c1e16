"""Baillie-PSW probabilistic primality test.

The accept/reject decision is part of the protocol's determinism: every node
must map the same bytes to the same prime representative. The test is a strong
Miller-Rabin round to base 2 followed by a strong Lucas test with Selfridge's
parameter choice; no composite passing both is known. The algorithm is fixed
here rather than delegated to a library so that both arithmetic backends make
identical decisions.
"""

import math

from . import _backend


def _sieve(limit: int) -> list[int]:
    flags = bytearray([1]) * limit
    flags[0:2] = b"\x00\x00"
    for i in range(2, math.isqrt(limit) + 1):
        if flags[i]:
            flags[i * i :: i] = bytearray(len(flags[i * i :: i]))
    return [i for i, f in enumerate(flags) if f]


SMALL_PRIMES = _sieve(1024)
_SMALL_PRIME_SET = set(SMALL_PRIMES)
_PRIMORIAL = math.prod(SMALL_PRIMES)


def _is_strong_prp_base2(n: int) -> bool:
    d = n - 1
    s = (d & -d).bit_length() - 1
    d >>= s
    x = _backend.powmod(2, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = (x * x) % n
        if x == n - 1:
            return True
    return False


def _jacobi(a: int, n: int) -> int:
    # n odd positive
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def _is_strong_lucas_prp(n: int) -> bool:
    # Selfridge method A: first D in 5, -7, 9, -11, ... with (D/n) = -1
    if math.isqrt(n) ** 2 == n:
        return False
    d = 5
    while True:
        j = _jacobi(d, n)
        if j == -1:
            break
        if j == 0 and abs(d) < n:
            return False
        d = -(d + 2) if d > 0 else -(d - 2)
    p, q = 1, (1 - d) // 4

    k = n + 1
    s = (k & -k).bit_length() - 1
    dd = k >> s

    # ladder over the bits of dd computing U, V, Q^k mod n
    u, v, qk = 1, p, q % n
    for bit in bin(dd)[3:]:
        u = (u * v) % n
        v = (v * v - 2 * qk) % n
        qk = (qk * qk) % n
        if bit == "1":
            u, v = p * u + v, d * u + p * v
            if u & 1:
                u += n
            if v & 1:
                v += n
            u = (u >> 1) % n
            v = (v >> 1) % n
            qk = (qk * q) % n
    if u == 0 or v == 0:
        return True
    for _ in range(s - 1):
        v = (v * v - 2 * qk) % n
        if v == 0:
            return True
        qk = (qk * qk) % n
    return False


def is_probable_prime(n: int) -> bool:
    """Baillie-PSW. Deterministic for a given n, identical on every backend."""
    if n < 2:
        return False
    if n < 1024:
        return n in _SMALL_PRIME_SET
    if n & 1 == 0:
        return False
    if n.bit_length() > 20:
        if math.gcd(n, _PRIMORIAL) != 1:
            return False
    else:
        for p in SMALL_PRIMES:
            if p * p > n:
                break
            if n % p == 0:
                return False
    return _is_strong_prp_base2(n) and _is_strong_lucas_prp(n)
