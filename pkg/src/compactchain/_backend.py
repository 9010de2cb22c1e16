"""Big-integer arithmetic backend.

Everything hot in this package is arbitrary-precision modular arithmetic, so
the fast lane is gmpy2 (GMP) with a pure-stdlib fallback. Selection is by the
COMPACTCHAIN_BACKEND environment variable, read at import time:

    gmpy2    force gmpy2 (ImportError if missing)
    python   force the stdlib implementations
    (unset)  gmpy2 when importable, stdlib otherwise

Both lanes compute identical values on identical inputs; only speed differs.
"""

import math
import os

from .errors import NonInvertible

_choice = os.environ.get("COMPACTCHAIN_BACKEND", "").strip().lower()
if _choice not in ("", "gmpy2", "python"):
    raise ValueError(f"COMPACTCHAIN_BACKEND must be 'gmpy2' or 'python', not {_choice!r}")

if _choice == "python":
    _gmpy2 = None
else:
    try:
        import gmpy2 as _gmpy2
    except ImportError:
        if _choice == "gmpy2":
            raise
        _gmpy2 = None


def backend_name() -> str:
    return "gmpy2" if _gmpy2 is not None else "python"


def _py_powmod(base: int, exp: int, mod: int) -> int:
    try:
        return pow(base, exp, mod)
    except ValueError:
        # negative exponent, base not invertible
        raise NonInvertible(f"gcd(base, N) = {math.gcd(base, mod)} != 1")


def _py_invert(x: int, mod: int) -> int:
    try:
        return pow(x, -1, mod)
    except ValueError:
        raise NonInvertible(f"gcd(x, N) = {math.gcd(x, mod)} != 1")


def _py_gcdext(a: int, b: int) -> tuple[int, int, int]:
    """Extended Euclid: returns (g, s, t) with s*a + t*b = g = gcd(a, b)."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def _py_product_tree(values: list[int]) -> int:
    # balanced multiplication keeps operand sizes even; a left fold is quadratic
    if not values:
        return 1
    layer = list(values)
    while len(layer) > 1:
        nxt = [layer[i] * layer[i + 1] for i in range(0, len(layer) - 1, 2)]
        if len(layer) % 2:
            nxt.append(layer[-1])
        layer = nxt
    return layer[0]


if _gmpy2 is not None:
    _mpz = _gmpy2.mpz

    def powmod(base: int, exp: int, mod: int) -> int:
        try:
            return int(_gmpy2.powmod(base, exp, mod))
        except ZeroDivisionError:
            raise NonInvertible(f"gcd(base, N) = {math.gcd(base, mod)} != 1")

    def invert(x: int, mod: int) -> int:
        try:
            return int(_gmpy2.invert(x, mod))
        except ZeroDivisionError:
            raise NonInvertible(f"gcd(x, N) = {math.gcd(x, mod)} != 1")

    def gcdext(a: int, b: int) -> tuple[int, int, int]:
        g, s, t = _gmpy2.gcdext(a, b)
        return int(g), int(s), int(t)

    def product_tree(values: list[int]) -> int:
        return int(_py_product_tree([_mpz(v) for v in values]))

else:
    powmod = _py_powmod
    invert = _py_invert
    gcdext = _py_gcdext
    product_tree = _py_product_tree

gcd = math.gcd
