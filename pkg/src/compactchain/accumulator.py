"""Trapdoorless RSA accumulator over an arbitrary base.

Commitments, membership witnesses and the proof-of-exponentiation element are
plain group elements (ints). A non-membership witness is the pair (d, b) plus
the base element it targets:

    membership      w^t == A
    non-membership  d^t * A^b == base

The base generalizes the textbook form (base = g); in protocol use it is the
spent-set commitment of the block before the coin was created, so the witness
travels with the base it was built against.
"""

from dataclasses import dataclass
from typing import Callable, Iterable

from .errors import MemberNotInCohort, MemberPresent, NonInvertible, NotCoprime
from .rsa_group import GroupParams, bezout, hash_to_prime, pow_signed, product

NIPOE_TAG_SUFFIX = b"/nipoe"

# maps the public NI-PoE instance (x, u, w) to the challenge prime; injectable
# so toy-scale tests can pin a small prime
PrimeMapper = Callable[[int, int, int], int]


@dataclass(frozen=True)
class NonMemWitness:
    d: int
    b: int
    base: int


def batch_add(acc: int, new_primes: Iterable[int], params: GroupParams) -> int:
    """acc raised to the product of the new primes; empty batch is a no-op."""
    return pow_signed(acc, product(new_primes), params)


def create_mem_witness(
    base: int, cohort: Iterable[int], member: int, params: GroupParams
) -> int:
    """Witness for `member` inside the batch that took `base` to the current
    commitment: the same batch exponentiation with the member left out."""
    remaining = list(cohort)
    try:
        remaining.remove(member)
    except ValueError:
        raise MemberNotInCohort(f"{member} not in cohort")
    return pow_signed(base, product(remaining), params)


def verify_mem_witness(w: int, member: int, acc: int, params: GroupParams) -> bool:
    """w^member == acc; one exponentiation, independent of the set size."""
    return pow_signed(w, member, params) == acc


def create_nonmem_witness(
    base: int, cohort: Iterable[int], outsider: int, params: GroupParams
) -> NonMemWitness:
    """Bezout-based witness that `outsider` is absent from the cohort.

    With p the cohort product and a*outsider + b*p = 1, the witness is
    (d = base^a, b); it verifies against acc = base^p.
    """
    p = product(cohort)
    try:
        a, b = bezout(outsider, p)
    except NotCoprime:
        raise MemberPresent(f"{outsider} divides the accumulated product")
    return NonMemWitness(pow_signed(base, a, params), b, base)


def verify_nonmem_witness(
    u: NonMemWitness,
    outsider: int,
    acc: int,
    params: GroupParams,
    base: int | None = None,
) -> bool:
    """d^outsider * acc^b == base.

    `base` overrides the witness's stored base; validators pass the value they
    derived themselves instead of trusting the one carried with the witness.
    """
    if base is None:
        base = u.base
    try:
        lhs = (
            pow_signed(u.d, outsider, params) * pow_signed(acc, u.b, params)
        ) % params.modulus
    except NonInvertible:
        return False
    return lhs == base


def normalize_nonmem_witness(
    u: NonMemWitness, outsider: int, acc: int, params: GroupParams
) -> NonMemWitness:
    """Reduce |b| below outsider/2 without changing what the witness proves.

    Writing b = q*outsider + r with r in (-outsider/2, outsider/2], the pair
    (d * acc^q, r) satisfies the same verification equation. Keeps the signed
    16-byte wire encoding of b valid forever.
    """
    t = outsider
    r = u.b % t
    if r > t // 2:
        r -= t
    if r == u.b:
        return u
    q = (u.b - r) // t
    d = (u.d * pow_signed(acc, q, params)) % params.modulus
    return NonMemWitness(d, r, u.base)


def _nipoe_instance_bytes(x: int, u: int, w: int) -> bytes:
    out = []
    for v in (x, u, w):
        raw = v.to_bytes((v.bit_length() + 7) // 8 or 1, "big")
        out.append(len(raw).to_bytes(4, "big"))
        out.append(raw)
    return b"".join(out)


def default_prime_mapper(params: GroupParams) -> PrimeMapper:
    tag = params.domain_tag + NIPOE_TAG_SUFFIX

    def mapper(x: int, u: int, w: int) -> int:
        return hash_to_prime(_nipoe_instance_bytes(x, u, w), params, tag=tag)

    return mapper


def prove_ni_poe(
    x: int, u: int, w: int, params: GroupParams, prime_mapper: PrimeMapper | None = None
) -> int:
    """Prover side of w == u^x: returns Q = u^(x // l) for the challenge prime
    l derived from the instance."""
    if prime_mapper is None:
        prime_mapper = default_prime_mapper(params)
    l = prime_mapper(x, u, w)
    return pow_signed(u, x // l, params)


def verify_ni_poe(
    x: int,
    u: int,
    w: int,
    proof: int,
    params: GroupParams,
    prime_mapper: PrimeMapper | None = None,
) -> bool:
    """Q^l * u^(x mod l) == w; cost does not grow with the bit length of x."""
    if prime_mapper is None:
        prime_mapper = default_prime_mapper(params)
    l = prime_mapper(x, u, w)
    r = x % l
    try:
        lhs = (
            pow_signed(proof, l, params) * pow_signed(u, r, params)
        ) % params.modulus
    except NonInvertible:
        return False
    return lhs == w
