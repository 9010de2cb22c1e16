"""Single-accumulator baseline: batched deletion via witness aggregation.

The reference point the dual-commitment design is measured against. Deleting a
batch folds the members' witnesses pairwise into one aggregate; each fold runs
a Bezout computation and an exponentiation whose operand sizes grow with the
running product, which is what makes the whole update quadratic in the batch
size and impossible to parallelize.
"""

from .accumulator import batch_add, prove_ni_poe, verify_mem_witness
from .errors import NotCoprime, WitnessInvalid
from .rsa_group import GroupParams, bezout, pow_signed, product


def shamir_trick(
    w1: int,
    w2: int,
    x1: int,
    x2: int,
    acc: int,
    params: GroupParams,
    check_witnesses: bool = True,
) -> int:
    """Merge witnesses for coprime exponents x1, x2 under the same accumulator
    into one witness for x1*x2: with a*x1 + b*x2 = 1, w = w1^b * w2^a."""
    if check_witnesses:
        if not verify_mem_witness(w1, x1, acc, params):
            raise WitnessInvalid("w1 does not verify")
        if not verify_mem_witness(w2, x2, acc, params):
            raise WitnessInvalid("w2 does not verify")
    a, b = bezout(x1, x2)  # NotCoprime propagates
    return (pow_signed(w1, b, params) * pow_signed(w2, a, params)) % params.modulus


def batch_del(
    acc: int, members, params: GroupParams
) -> tuple[int, int]:
    """Delete `members` (prime, witness) pairs from the accumulator.

    Returns the new accumulator value (the aggregate witness for the deleted
    product) and an exponentiation proof that new^(product of deleted) == old.
    The fold order is the input order; the value is order-independent.
    """
    members = list(members)
    primes = [t for t, _ in members]
    if len(set(primes)) != len(primes):
        raise NotCoprime("deleted primes must be distinct")
    for index, (t, w) in enumerate(members):
        if not verify_mem_witness(w, t, acc, params):
            raise WitnessInvalid("witness does not verify", index=index)
    if not members:
        return acc, prove_ni_poe(1, acc, acc, params)
    agg_x, agg_w = members[0][0], members[0][1]
    for t, w in members[1:]:
        # the aggregate was produced one line up; only the incoming pair was
        # vetted, so skip re-verifying the O(i)-sized side
        agg_w = shamir_trick(agg_w, w, agg_x, t, acc, params, check_witnesses=False)
        agg_x *= t
    proof = prove_ni_poe(agg_x, agg_w, acc, params)
    return agg_w, proof


def boneh_update(
    acc: int, inputs, output_primes, params: GroupParams
) -> tuple[int, tuple[int, int]]:
    """One block of the baseline: delete the spent primes, then add the new
    ones. Strictly sequential; the deletion output feeds the addition."""
    after_del, pi_del = batch_del(acc, inputs, params)
    after_add = batch_add(after_del, output_primes, params)
    pi_add = prove_ni_poe(product(output_primes), after_del, after_add, params)
    return after_add, (pi_del, pi_add)


def all_mem_witnesses(base: int, primes, params: GroupParams) -> list[int]:
    """Witnesses for every prime of a freshly accumulated set, aligned with the
    input order. Divide-and-conquer: each half's witnesses start from the base
    raised to the other half's product, so the whole batch costs
    O(m log m) exponentiations instead of the naive O(m^2)."""
    primes = list(primes)

    def walk(node_base: int, chunk: list[int]) -> list[int]:
        if len(chunk) == 1:
            return [node_base]
        mid = len(chunk) // 2
        left, right = chunk[:mid], chunk[mid:]
        left_base = pow_signed(node_base, product(right), params)
        right_base = pow_signed(node_base, product(left), params)
        return walk(left_base, left) + walk(right_base, right)

    if not primes:
        return []
    return walk(base, primes)
