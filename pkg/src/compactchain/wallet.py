"""User-side witness lifecycle.

A coin owner derives the witness pair from the block that created the coin,
then rolls it forward one block at a time using only the per-block prime
digests; neither the full output/input history nor any UTXO set is kept.
"""

import struct
from dataclasses import dataclass, replace

from .accumulator import (
    NonMemWitness,
    create_mem_witness,
    create_nonmem_witness,
    normalize_nonmem_witness,
    verify_mem_witness,
    verify_nonmem_witness,
)
from .chain_state import COIN_BYTES, Block, BlockHeader, Coin, HeaderStore, TxWitness
from .errors import (
    CoinAlreadySpentInBlock,
    CoinNotInBlock,
    CoinSpent,
    MemberNotInCohort,
    MemberPresent,
    NotCoprime,
)
from .rsa_group import GroupParams, bezout, pow_signed, product


@dataclass
class OwnedCoin:
    coin: Coin
    prime: int
    witness: TxWitness
    spent: bool = False


def generate_witness(
    coin: Coin, block: Block, prev_header: BlockHeader, params: GroupParams
) -> TxWitness:
    """Build the (membership, non-membership) pair for a coin created in
    `block`, anchored at the block's own height."""
    k = block.header.height
    if prev_header.height != k - 1:
        raise ValueError("prev_header must be the header one below the block")
    if not any(c == coin for c in block.output_coins()):
        raise CoinNotInBlock(f"coin {coin.encode().hex()[:16]} not created at height {k}")
    t = coin.prime(params)
    try:
        mem = create_mem_witness(
            prev_header.txo_c, block.output_primes(params), t, params
        )
    except MemberNotInCohort:
        # distinct coin encodings mapping to one prime would break injectivity
        raise CoinNotInBlock("coin prime missing from the block digest")
    try:
        nonmem = create_nonmem_witness(
            prev_header.stxo_c, block.input_primes(params), t, params
        )
    except MemberPresent:
        raise CoinAlreadySpentInBlock(f"coin spent in its creation block {k}")
    return TxWitness(mem, nonmem, creation_height=k, witness_height=k)


def update_mem_witness(w: int, new_output_primes, params: GroupParams) -> int:
    """Advance a membership witness across blocks: raise it by the product of
    every output prime added since its height."""
    return pow_signed(w, product(new_output_primes), params)


def update_nonmem_witness(
    u: NonMemWitness,
    coin_prime: int,
    stxo_c_h: int,
    new_input_primes,
    params: GroupParams,
) -> NonMemWitness:
    """Advance a non-membership witness across blocks.

    With p the product of the interval's spent primes and a0*t + b0*p = 1,
    the updated pair is (d * stxo_c_h^(a0*b), b0*b), which verifies against
    stxo_c_h^p with the original base. The |b| reduction (b0*b = q*t + r) is
    folded into the same exponentiation, so the newer commitment value is
    never needed:

        d' = d * stxo_c_h^(a0*b + p*q),  b' = r
    """
    p = product(new_input_primes)
    if p == 1:
        return u
    t = coin_prime
    try:
        a0, b0 = bezout(t, p)
    except NotCoprime:
        raise CoinSpent(f"prime {t} was consumed in the update interval")
    b_raw = b0 * u.b
    r = b_raw % t
    if r > t // 2:
        r -= t
    q = (b_raw - r) // t
    d = (u.d * pow_signed(stxo_c_h, a0 * u.b + p * q, params)) % params.modulus
    return NonMemWitness(d, r, u.base)


class Wallet:
    """Tracks owned coins and keeps their witnesses fresh at the chain tip."""

    def __init__(self, params: GroupParams, tip_header: BlockHeader):
        self.params = params
        self.tip_header = tip_header
        self.coins: dict[bytes, OwnedCoin] = {}

    @property
    def tip(self) -> int:
        return self.tip_header.height

    def unspent(self) -> list[OwnedCoin]:
        return [oc for oc in self.coins.values() if not oc.spent]

    def register(self, coin: Coin, witness: TxWitness) -> OwnedCoin:
        oc = OwnedCoin(coin, coin.prime(self.params), witness)
        self.coins[coin.encode()] = oc
        return oc

    def roll_forward(self, block: Block) -> list[bytes]:
        """Advance every unspent coin one block; mark the ones the block
        consumed. Returns the encodings of newly spent coins."""
        params = self.params
        if block.header.prev_hash != self.tip_header.hash(params):
            raise ValueError("block does not extend the wallet's view of the chain")
        out_primes = block.output_primes(params)
        in_primes = block.input_primes(params)
        in_prime_set = set(in_primes)
        stxo_c_h = self.tip_header.stxo_c
        new_height = block.header.height
        spent_now = []
        for enc, oc in self.coins.items():
            if oc.spent:
                continue
            if oc.prime in in_prime_set:
                oc.spent = True
                spent_now.append(enc)
                continue
            mem = update_mem_witness(oc.witness.mem, out_primes, params)
            nonmem = update_nonmem_witness(
                oc.witness.nonmem, oc.prime, stxo_c_h, in_primes, params
            )
            oc.witness = replace(
                oc.witness, mem=mem, nonmem=nonmem, witness_height=new_height
            )
        self.tip_header = block.header
        return spent_now

    def verify_all(self, headers: HeaderStore) -> bool:
        """Every unspent coin's pair must verify at the wallet's tip."""
        params = self.params
        tip_header = self.tip_header
        for oc in self.unspent():
            k = oc.witness.creation_height
            base = headers[k - 1].stxo_c if k > 0 else params.generator
            if not verify_mem_witness(oc.witness.mem, oc.prime, tip_header.txo_c, params):
                return False
            if not verify_nonmem_witness(
                oc.witness.nonmem, oc.prime, tip_header.stxo_c, params, base=base
            ):
                return False
        return True

    # --- persistence ---

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            for oc in self.coins.values():
                fh.write(oc.coin.encode())
                fh.write(encode_witness_envelope(oc.witness, self.params))
                fh.write(b"\x01" if oc.spent else b"\x00")

    @classmethod
    def load(cls, path, params: GroupParams, headers: HeaderStore) -> "Wallet":
        wallet = cls(params, headers.tip_header)
        record = COIN_BYTES + witness_envelope_bytes(params) + 1
        with open(path, "rb") as fh:
            raw = fh.read()
        if len(raw) % record:
            raise ValueError("truncated wallet file")
        for off in range(0, len(raw), record):
            coin = Coin.decode(raw[off : off + COIN_BYTES])
            env = raw[off + COIN_BYTES : off + record - 1]
            k = struct.unpack(">Q", env[:8])[0]
            base = headers[k - 1].stxo_c if k > 0 else params.generator
            witness = decode_witness_envelope(env, params, base)
            oc = OwnedCoin(coin, coin.prime(params), witness, spent=raw[off + record - 1] == 1)
            wallet.coins[coin.encode()] = oc
        return wallet


def witness_envelope_bytes(params: GroupParams) -> int:
    """k u64 + h u64 + mem element + d element + b s128."""
    return 16 + 2 * params.element_bytes + 16


def encode_witness_envelope(w: TxWitness, params: GroupParams) -> bytes:
    return b"".join(
        [
            struct.pack(">QQ", w.creation_height, w.witness_height),
            params.encode_element(w.mem),
            params.encode_element(w.nonmem.d),
            w.nonmem.b.to_bytes(16, "big", signed=True),
        ]
    )


def decode_witness_envelope(raw: bytes, params: GroupParams, base: int) -> TxWitness:
    if len(raw) != witness_envelope_bytes(params):
        raise ValueError(f"envelope must be {witness_envelope_bytes(params)} bytes")
    k, h = struct.unpack(">QQ", raw[:16])
    ew = params.element_bytes
    mem = int.from_bytes(raw[16 : 16 + ew], "big")
    d = int.from_bytes(raw[16 + ew : 16 + 2 * ew], "big")
    b = int.from_bytes(raw[16 + 2 * ew :], "big", signed=True)
    return TxWitness(mem, NonMemWitness(d, b, base), k, h)


def existence_proof_bytes(params: GroupParams) -> int:
    """Serialized membership witness: one group element."""
    return params.element_bytes


def unspent_proof_bytes(params: GroupParams) -> int:
    """Serialized non-membership witness: d plus the signed 16-byte b."""
    return params.element_bytes + 16
