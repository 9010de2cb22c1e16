"""Group-of-unknown-order substrate.

A group element is a plain int in [1, N-1] coprime to N. All protocol
arithmetic lives here: signed-exponent exponentiation, hashing byte strings to
fixed-width prime representatives, Bezout coefficients, and balanced products
of prime lists.
"""

import hashlib
import math
import secrets
import struct
import warnings
from dataclasses import dataclass, field

from . import _backend
from .errors import (
    ModulusTooSmall,
    NonCoprimeGenerator,
    NotCoprime,
    PrimeSearchExhausted,
)
from .primality import is_probable_prime

DEFAULT_PRIME_BITS = 128
DEFAULT_DOMAIN_TAG = b"compactchain-v1"
_PARAMS_MAGIC = b"CCG1"
_HASH_TO_PRIME_CAP = 10**6


class TrapdoorWarning(RuntimeWarning):
    """Raised when a modulus is generated locally: the factorization is known."""


@dataclass(frozen=True)
class GroupParams:
    """Shared trust anchor: modulus N, generator g, prime-representative width.

    Immutable after construction and safe to share across threads.
    """

    modulus: int
    generator: int
    prime_bits: int = DEFAULT_PRIME_BITS
    domain_tag: bytes = DEFAULT_DOMAIN_TAG

    def __post_init__(self):
        if self.modulus < 15 or self.modulus % 2 == 0:
            raise ModulusTooSmall(f"modulus must be odd and >= 15, got {self.modulus}")
        if not 1 < self.generator < self.modulus:
            raise NonCoprimeGenerator(
                f"generator must lie in (1, N), got {self.generator}"
            )
        if math.gcd(self.generator, self.modulus) != 1:
            raise NonCoprimeGenerator(
                f"gcd(generator, modulus) = {math.gcd(self.generator, self.modulus)}"
            )
        if not 2 <= self.prime_bits <= 256:
            raise ValueError("prime_bits must be in [2, 256] (SHA-256 truncation)")
        if len(self.domain_tag) > 255:
            raise ValueError("domain_tag longer than 255 bytes")

    @property
    def element_bytes(self) -> int:
        """Fixed serialized width of one group element."""
        return (self.modulus.bit_length() + 7) // 8

    @property
    def prime_bytes(self) -> int:
        return (self.prime_bits + 7) // 8

    def is_element(self, x: int) -> bool:
        return 1 <= x < self.modulus and math.gcd(x, self.modulus) == 1

    def encode_element(self, x: int) -> bytes:
        return x.to_bytes(self.element_bytes, "big")

    def decode_element(self, raw: bytes) -> int:
        if len(raw) != self.element_bytes:
            raise ValueError(f"expected {self.element_bytes} bytes, got {len(raw)}")
        x = int.from_bytes(raw, "big")
        if not self.is_element(x):
            raise ValueError("decoded value is not a valid group element")
        return x

    def to_bytes(self) -> bytes:
        n_raw = self.modulus.to_bytes(self.element_bytes, "big")
        g_raw = self.generator.to_bytes(self.element_bytes, "big")
        return b"".join(
            [
                _PARAMS_MAGIC,
                struct.pack(">H", self.prime_bits),
                struct.pack(">I", len(n_raw)),
                n_raw,
                g_raw,
                struct.pack(">B", len(self.domain_tag)),
                self.domain_tag,
            ]
        )

    @classmethod
    def from_bytes(cls, raw: bytes) -> "GroupParams":
        if raw[:4] != _PARAMS_MAGIC:
            raise ValueError("bad magic: not a CCG1 parameter blob")
        prime_bits = struct.unpack(">H", raw[4:6])[0]
        n_len = struct.unpack(">I", raw[6:10])[0]
        off = 10
        modulus = int.from_bytes(raw[off : off + n_len], "big")
        off += n_len
        generator = int.from_bytes(raw[off : off + n_len], "big")
        off += n_len
        tag_len = raw[off]
        tag = bytes(raw[off + 1 : off + 1 + tag_len])
        if len(tag) != tag_len:
            raise ValueError("truncated domain tag")
        return cls(modulus, generator, prime_bits, tag)


def _random_probable_prime(bits: int, randbits) -> int:
    # top two bits set so a product of two such primes has exactly 2*bits bits
    while True:
        cand = randbits(bits) | (0b11 << (bits - 2)) | 1
        if is_probable_prime(cand):
            return cand


def _default_generator(modulus: int) -> int:
    for base in range(2, 64):
        g = (base * base) % modulus
        if 1 < g < modulus and math.gcd(g, modulus) == 1:
            return g
    raise NonCoprimeGenerator("no small quadratic residue is coprime to the modulus")


def setup(
    bits: int | None = None,
    *,
    modulus: int | None = None,
    generator: int | None = None,
    prime_bits: int = DEFAULT_PRIME_BITS,
    domain_tag: bytes = DEFAULT_DOMAIN_TAG,
    rng=None,
) -> GroupParams:
    """Build group parameters.

    Two modes:
      - explicit: pass `modulus` (and optionally `generator`) obtained from a
        trusted ceremony or a published challenge constant; nothing is
        generated and no party needs to be trusted beyond the source of N.
      - dev: pass `bits` to generate a throwaway N = p*q from two random
        probable primes. Whoever ran this knows the factors, so witnesses can
        be forged; a TrapdoorWarning is emitted.
    """
    if (bits is None) == (modulus is None):
        raise ValueError("pass exactly one of bits= or modulus=")
    if modulus is None:
        if bits < 16:
            raise ModulusTooSmall(f"generated modulus must be >= 16 bits, got {bits}")
        randbits = rng.getrandbits if rng is not None else secrets.randbits
        p = _random_probable_prime(bits - bits // 2, randbits)
        q = _random_probable_prime(bits // 2, randbits)
        while q == p:
            q = _random_probable_prime(bits // 2, randbits)
        modulus = p * q
        warnings.warn(
            "dev-mode modulus: the factorization is known to this process; "
            "use an externally sourced modulus in production",
            TrapdoorWarning,
            stacklevel=2,
        )
    if generator is None:
        generator = _default_generator(modulus)
    return GroupParams(modulus, generator, prime_bits, domain_tag)


def pow_signed(base: int, exponent: int, params: GroupParams) -> int:
    """base**exponent mod N; negative exponents go through the modular inverse.

    Raises NonInvertible when gcd(base, N) != 1 blocks inversion (that gcd is
    a nontrivial factor of N, so the condition is reported, never masked).
    """
    return _backend.powmod(base, exponent, params.modulus)


def hash_to_prime(data: bytes, params: GroupParams, tag: bytes | None = None) -> int:
    """Deterministically map bytes to an odd prime of exactly prime_bits bits.

    Counter construction: candidate_c = SHA-256(tag || data || c) truncated to
    prime_bits with the top and bottom bits forced to 1, for c = 0, 1, 2, ...
    The first candidate accepted by the Baillie-PSW test is returned.
    """
    if not data:
        raise ValueError("data must be non-empty")
    if tag is None:
        tag = params.domain_tag
    prefix = tag + data
    shift = 256 - params.prime_bits
    top = 1 << (params.prime_bits - 1)
    for counter in range(_HASH_TO_PRIME_CAP):
        digest = hashlib.sha256(prefix + counter.to_bytes(8, "big")).digest()
        cand = (int.from_bytes(digest, "big") >> shift) | top | 1
        if is_probable_prime(cand):
            return cand
    raise PrimeSearchExhausted(f"no prime after {_HASH_TO_PRIME_CAP} counters")


def bezout(x: int, p: int) -> tuple[int, int]:
    """Coefficients (a, b) with a*x + b*p = 1, normalized so |b| < x.

    Raises NotCoprime when gcd(x, p) > 1; in protocol terms the element is
    already inside the accumulated product.
    """
    g, a, b = _backend.gcdext(x, p)
    if g != 1:
        raise NotCoprime(f"gcd = {g}")
    # shift b into (-x/2, x/2]; a absorbs the complementary multiple of p
    b_norm = b % x
    if b_norm > x // 2:
        b_norm -= x
    if b_norm != b:
        a = (1 - b_norm * p) // x
    return a, b_norm


def product(primes) -> int:
    """Exact product of a prime sequence via a balanced tree; empty -> 1."""
    return _backend.product_tree(list(primes))
