"""Block model and the stateless validator path.

A validator keeps block headers and a small cache of recently spent coin
primes; there is deliberately no UTXO container anywhere in this module. Each
header carries two accumulator commitments (all outputs ever created, all
inputs ever spent) plus proofs that the miner raised the previous commitments
to the right products.
"""

import hashlib
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .accumulator import NonMemWitness, prove_ni_poe, verify_mem_witness, verify_ni_poe, verify_nonmem_witness
from .errors import (
    BrokenChainLink,
    DuplicateCoin,
    FutureWitness,
    InvalidCommitmentProof,
    InvalidTransaction,
    StaleWitness,
    UnknownHeight,
)
from .rsa_group import GroupParams, hash_to_prime, pow_signed, product

COIN_TAG_SUFFIX = b"/coin"
COIN_BYTES = 32 + 4 + 8 + 32
DEFAULT_CACHE_BLOCKS = 6
_ZERO32 = b"\x00" * 32


@dataclass(frozen=True)
class Coin:
    """Abstract transferable unit; the canonical encoding is injective and is
    what gets hashed to the coin's prime representative."""

    txid: bytes
    index: int
    value: int
    owner_tag: bytes

    def __post_init__(self):
        if len(self.txid) != 32 or len(self.owner_tag) != 32:
            raise ValueError("txid and owner_tag must be 32 bytes")
        if not 0 <= self.index < 2**32:
            raise ValueError("index out of u32 range")
        if not 0 <= self.value < 2**64:
            raise ValueError("value out of u64 range")

    def encode(self) -> bytes:
        return self.txid + struct.pack(">IQ", self.index, self.value) + self.owner_tag

    @classmethod
    def decode(cls, raw: bytes) -> "Coin":
        if len(raw) != COIN_BYTES:
            raise ValueError(f"coin encoding must be {COIN_BYTES} bytes")
        index, value = struct.unpack(">IQ", raw[32:44])
        return cls(raw[:32], index, value, raw[44:])

    def prime(self, params: GroupParams) -> int:
        return hash_to_prime(
            self.encode(), params, tag=params.domain_tag + COIN_TAG_SUFFIX
        )


@dataclass(frozen=True)
class TxWitness:
    """Per-input proof bundle: membership element, non-membership pair,
    creation height k and witness height h (the commitments it targets)."""

    mem: int
    nonmem: NonMemWitness
    creation_height: int
    witness_height: int

    def __post_init__(self):
        if self.creation_height > self.witness_height:
            raise ValueError("creation height exceeds witness height")


@dataclass(frozen=True)
class Transaction:
    inputs: tuple[Coin, ...]
    outputs: tuple[Coin, ...]
    witnesses: tuple[TxWitness, ...] = ()

    def __post_init__(self):
        if not self.outputs:
            raise ValueError("transaction must create at least one output")
        if len(set(c.encode() for c in self.inputs)) != len(self.inputs):
            raise ValueError("duplicate coin among inputs")
        if len(set(c.encode() for c in self.outputs)) != len(self.outputs):
            raise ValueError("duplicate coin among outputs")
        if self.inputs and len(self.witnesses) != len(self.inputs):
            raise ValueError("one witness required per input")

    @property
    def is_coinbase(self) -> bool:
        return not self.inputs

    def txid(self) -> bytes:
        h = hashlib.sha256(b"tx")
        h.update(struct.pack(">II", len(self.inputs), len(self.outputs)))
        for coin in self.inputs:
            h.update(coin.encode())
        for coin in self.outputs:
            h.update(coin.encode())
        return h.digest()


def merkle_root(ids: list[bytes]) -> bytes:
    if not ids:
        return _ZERO32
    layer = list(ids)
    while len(layer) > 1:
        if len(layer) % 2:
            layer.append(layer[-1])
        layer = [
            hashlib.sha256(layer[i] + layer[i + 1]).digest()
            for i in range(0, len(layer), 2)
        ]
    return layer[0]


@dataclass(frozen=True)
class BlockHeader:
    height: int
    prev_hash: bytes
    tx_root: bytes
    txo_c: int
    stxo_c: int
    pi_txo: int
    pi_stxo: int
    timestamp: int

    def encode(self, params: GroupParams) -> bytes:
        enc = params.encode_element
        return b"".join(
            [
                struct.pack(">Q", self.height),
                self.prev_hash,
                self.tx_root,
                enc(self.txo_c),
                enc(self.stxo_c),
                enc(self.pi_txo),
                enc(self.pi_stxo),
                struct.pack(">Q", self.timestamp),
            ]
        )

    @classmethod
    def decode(cls, raw: bytes, params: GroupParams) -> "BlockHeader":
        ew = params.element_bytes
        if len(raw) != header_bytes(params):
            raise ValueError(f"header must be {header_bytes(params)} bytes")
        height = struct.unpack(">Q", raw[0:8])[0]
        prev_hash = raw[8:40]
        tx_root = raw[40:72]
        off = 72
        elems = []
        for _ in range(4):
            elems.append(int.from_bytes(raw[off : off + ew], "big"))
            off += ew
        timestamp = struct.unpack(">Q", raw[off : off + 8])[0]
        return cls(height, prev_hash, tx_root, *elems, timestamp)

    def hash(self, params: GroupParams) -> bytes:
        return hashlib.sha256(self.encode(params)).digest()


def header_bytes(params: GroupParams) -> int:
    """Fixed header record width: 8 + 32 + 32 + 4 elements + 8."""
    return 80 + 4 * params.element_bytes


@dataclass(frozen=True)
class Block:
    header: BlockHeader
    txs: tuple[Transaction, ...]

    def output_coins(self) -> list[Coin]:
        return [c for tx in self.txs for c in tx.outputs]

    def input_coins(self) -> list[Coin]:
        return [c for tx in self.txs for c in tx.inputs]

    def output_primes(self, params: GroupParams, workers: int = 1) -> list[int]:
        """Witness-update digest: primes of every output, in block order."""
        return coin_primes(self.output_coins(), params, workers)

    def input_primes(self, params: GroupParams, workers: int = 1) -> list[int]:
        return coin_primes(self.input_coins(), params, workers)


def coin_primes(coins, params: GroupParams, workers: int = 1) -> list[int]:
    if workers <= 1 or len(coins) < 2:
        return [c.prime(params) for c in coins]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda c: c.prime(params), coins))


class HeaderStore:
    """Append-only header sequence with verified hash links."""

    def __init__(self):
        self._headers: list[BlockHeader] = []

    def __len__(self) -> int:
        return len(self._headers)

    @property
    def tip(self) -> int:
        if not self._headers:
            raise UnknownHeight("empty header store")
        return len(self._headers) - 1

    @property
    def tip_header(self) -> BlockHeader:
        return self[self.tip]

    def __getitem__(self, height: int) -> BlockHeader:
        if not 0 <= height < len(self._headers):
            raise UnknownHeight(f"no header at height {height}")
        return self._headers[height]

    def append(self, header: BlockHeader, params: GroupParams) -> None:
        if header.height != len(self._headers):
            raise BrokenChainLink(
                f"expected height {len(self._headers)}, got {header.height}"
            )
        expected_prev = (
            self._headers[-1].hash(params) if self._headers else _ZERO32
        )
        if header.prev_hash != expected_prev:
            raise BrokenChainLink(f"prev_hash mismatch at height {header.height}")
        self._headers.append(header)

    def save(self, path, params: GroupParams) -> None:
        with open(path, "wb") as fh:
            for header in self._headers:
                fh.write(header.encode(params))

    @classmethod
    def load(cls, path, params: GroupParams) -> "HeaderStore":
        width = header_bytes(params)
        store = cls()
        with open(path, "rb") as fh:
            raw = fh.read()
        if len(raw) % width:
            raise ValueError("truncated header file")
        for off in range(0, len(raw), width):
            store.append(BlockHeader.decode(raw[off : off + width], params), params)
        return store


class StxoCache:
    """Spent-coin primes for the latest `capacity` block heights.

    This is the double-spend firewall: a witness anchored at height h is only
    acceptable while every later spend is still in the cache window.
    """

    def __init__(self, capacity: int = DEFAULT_CACHE_BLOCKS):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._window: dict[int, frozenset[int]] = {}

    def heights(self) -> list[int]:
        return sorted(self._window)

    def insert(self, height: int, primes) -> None:
        if self._window and height != max(self._window) + 1:
            raise ValueError("cache heights must advance one block at a time")
        self._window[height] = frozenset(primes)
        for h in [h for h in self._window if h <= height - self.capacity]:
            del self._window[h]

    def contains_in_range(self, prime: int, lo: int, hi: int) -> bool:
        """True when the prime was spent at any cached height in [lo, hi]."""
        for h in range(lo, hi + 1):
            bucket = self._window.get(h)
            if bucket and prime in bucket:
                return True
        return False

    def save(self, path, params: GroupParams) -> None:
        pw = params.prime_bytes
        with open(path, "wb") as fh:
            for height in self.heights():
                bucket = sorted(self._window[height])
                fh.write(struct.pack(">QI", height, len(bucket)))
                for prime in bucket:
                    fh.write(prime.to_bytes(pw, "big"))

    @classmethod
    def load(cls, path, params: GroupParams, capacity: int = DEFAULT_CACHE_BLOCKS) -> "StxoCache":
        pw = params.prime_bytes
        cache = cls(capacity)
        with open(path, "rb") as fh:
            raw = fh.read()
        off = 0
        while off < len(raw):
            height, count = struct.unpack(">QI", raw[off : off + 12])
            off += 12
            primes = []
            for _ in range(count):
                primes.append(int.from_bytes(raw[off : off + pw], "big"))
                off += pw
            cache._window[height] = frozenset(primes)
        return cache


def genesis(params: GroupParams, cache_blocks: int = DEFAULT_CACHE_BLOCKS):
    """Height-0 header with both commitments at the generator, plus an empty
    spent cache."""
    header = BlockHeader(
        height=0,
        prev_hash=_ZERO32,
        tx_root=_ZERO32,
        txo_c=params.generator,
        stxo_c=params.generator,
        pi_txo=1,
        pi_stxo=1,
        timestamp=0,
    )
    return header, StxoCache(cache_blocks)


def _check_block_unique(txs) -> None:
    seen_out: set[bytes] = set()
    seen_in: set[bytes] = set()
    for tx in txs:
        for coin in tx.outputs:
            enc = coin.encode()
            if enc in seen_out:
                raise DuplicateCoin(f"output {enc.hex()[:16]} appears twice in block")
            seen_out.add(enc)
        for coin in tx.inputs:
            enc = coin.encode()
            if enc in seen_in:
                raise DuplicateCoin(f"input {enc.hex()[:16]} spent twice in block")
            seen_in.add(enc)


def update_commitments(
    prev: BlockHeader, txs, params: GroupParams, workers: int = 1
) -> tuple[int, int, int, int]:
    """Miner side: raise both commitments by the block's output and input
    prime products and prove each exponentiation."""
    _check_block_unique(txs)
    out_primes = coin_primes([c for tx in txs for c in tx.outputs], params, workers)
    in_primes = coin_primes([c for tx in txs for c in tx.inputs], params, workers)
    p_out = product(out_primes)
    p_in = product(in_primes)
    txo_c = pow_signed(prev.txo_c, p_out, params)
    stxo_c = pow_signed(prev.stxo_c, p_in, params)
    pi_txo = prove_ni_poe(p_out, prev.txo_c, txo_c, params)
    pi_stxo = prove_ni_poe(p_in, prev.stxo_c, stxo_c, params)
    return txo_c, stxo_c, pi_txo, pi_stxo


def verify_commitments(
    prev: BlockHeader, txs, candidate: BlockHeader, params: GroupParams, workers: int = 1
) -> bool:
    """Validator side: recompute the exponent products and check both NI-PoE
    proofs; never performs the product-sized exponentiation."""
    out_primes = coin_primes([c for tx in txs for c in tx.outputs], params, workers)
    in_primes = coin_primes([c for tx in txs for c in tx.inputs], params, workers)
    ok_txo = verify_ni_poe(
        product(out_primes), prev.txo_c, candidate.txo_c, candidate.pi_txo, params
    )
    ok_stxo = verify_ni_poe(
        product(in_primes), prev.stxo_c, candidate.stxo_c, candidate.pi_stxo, params
    )
    return ok_txo and ok_stxo


def validate_transaction(
    tx: Transaction,
    tip: int,
    headers: HeaderStore,
    cache: StxoCache,
    params: GroupParams,
) -> bool:
    """Stateless per-transaction check against a witness height h.

    For each input: h must lie in the cache window [tip - M, tip], the coin's
    membership must hold at headers[h], its non-membership must hold at
    headers[h] relative to the spent-set commitment just before the coin's
    creation, and no cached block after h may have spent it already.
    """
    if tx.is_coinbase:
        return True
    window_lo = tip - cache.capacity
    for coin, wit in zip(tx.inputs, tx.witnesses):
        h = wit.witness_height
        k = wit.creation_height
        if h > tip:
            raise FutureWitness(f"witness height {h} beyond tip {tip}")
        if h < window_lo:
            raise StaleWitness(f"witness height {h} below {window_lo}")
        if k > h:
            return False
        header_h = headers[h]  # raises UnknownHeight outside the store
        base = headers[k - 1].stxo_c if k > 0 else params.generator
        t = coin.prime(params)
        if not verify_mem_witness(wit.mem, t, header_h.txo_c, params):
            return False
        if not verify_nonmem_witness(wit.nonmem, t, header_h.stxo_c, params, base=base):
            return False
        if cache.contains_in_range(t, h + 1, tip):
            return False
    return True


def seal_block(
    prev: BlockHeader, txs, params: GroupParams, timestamp: int, workers: int = 1
) -> Block:
    """Assemble a block on top of `prev` (no proof-of-work: sequencing only)."""
    txs = tuple(txs)
    txo_c, stxo_c, pi_txo, pi_stxo = update_commitments(prev, txs, params, workers)
    header = BlockHeader(
        height=prev.height + 1,
        prev_hash=prev.hash(params),
        tx_root=merkle_root([tx.txid() for tx in txs]),
        txo_c=txo_c,
        stxo_c=stxo_c,
        pi_txo=pi_txo,
        pi_stxo=pi_stxo,
        timestamp=timestamp,
    )
    return Block(header, txs)


def apply_block(
    headers: HeaderStore,
    cache: StxoCache,
    block: Block,
    params: GroupParams,
    workers: int = 1,
) -> tuple[int, StxoCache]:
    """Full validator acceptance: link, commitment proofs, every transaction.

    On success the header is appended and the block's input primes enter the
    cache; transaction bodies are not retained anywhere.
    """
    prev = headers.tip_header
    header = block.header
    if header.height != prev.height + 1 or header.prev_hash != prev.hash(params):
        raise BrokenChainLink(f"block {header.height} does not extend height {prev.height}")
    if header.tx_root != merkle_root([tx.txid() for tx in block.txs]):
        raise BrokenChainLink("header does not commit to these transactions")
    try:
        _check_block_unique(block.txs)
    except DuplicateCoin as exc:
        raise InvalidTransaction(-1, str(exc))
    if not verify_commitments(prev, block.txs, header, params, workers):
        raise InvalidCommitmentProof(f"block {header.height}")
    tip = headers.tip
    for index, tx in enumerate(block.txs):
        try:
            ok = validate_transaction(tx, tip, headers, cache, params)
        except (StaleWitness, FutureWitness, UnknownHeight) as exc:
            raise InvalidTransaction(index, str(exc))
        if not ok:
            raise InvalidTransaction(index, "witness checks failed")
    headers.append(header, params)
    cache.insert(header.height, block.input_primes(params, workers))
    return headers.tip, cache
