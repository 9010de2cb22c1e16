"""Synthetic chain driver: miner, validator and wallet population in one loop.

Workload shape: every block carries one coinbase plus spend transactions whose
inputs are sampled uniformly from coins at least one block old. Randomness is
drawn from a per-height stream of the run seed, so appending in several
sessions produces the same chain as one long run.
"""

import hashlib
import time
from dataclasses import dataclass

from .chain_state import (
    Block,
    Coin,
    HeaderStore,
    StxoCache,
    Transaction,
    apply_block,
    genesis,
    header_bytes,
    seal_block,
    validate_transaction,
    verify_commitments,
)
from .errors import CompactChainError
from .rsa_group import GroupParams
from .wallet import Wallet, generate_witness, witness_envelope_bytes
import random


@dataclass(frozen=True)
class BlockStats:
    height: int
    update_seconds: float
    verify_seconds: float
    block_bytes: int
    proof_bytes: int


class ChainSim:
    def __init__(
        self,
        params: GroupParams,
        cache_blocks: int = 6,
        seed: int = 0,
        inputs_per_tx: int = 2,
        outputs_per_tx: int = 2,
        workers: int = 1,
    ):
        self.params = params
        self.seed = seed
        self.inputs_per_tx = inputs_per_tx
        self.outputs_per_tx = outputs_per_tx
        self.workers = workers
        self.headers = HeaderStore()
        genesis_header, self.cache = genesis(params, cache_blocks)
        self.headers.append(genesis_header, params)
        self.wallet = Wallet(params, genesis_header)
        self.coin_counter = 0
        self.spend_log: dict[int, list[bytes]] = {}
        self.stats: list[BlockStats] = []

    # --- workload construction ---

    def _fresh_coin(self, rng: random.Random) -> Coin:
        self.coin_counter += 1
        ident = f"{self.seed}/{self.coin_counter}".encode()
        return Coin(
            txid=hashlib.sha256(b"coin/" + ident).digest(),
            index=self.coin_counter % 2**32,
            value=rng.randrange(1, 10**9),
            owner_tag=hashlib.sha256(b"owner/" + ident).digest(),
        )

    def _block_rng(self, height: int) -> random.Random:
        return random.Random(f"{self.seed}/block/{height}")

    def build_txs(self, tx_count: int) -> list[Transaction]:
        """Coinbase plus up to tx_count-1 spends of distinct aged coins."""
        rng = self._block_rng(self.headers.tip + 1)
        txs = [
            Transaction(
                inputs=(),
                outputs=tuple(self._fresh_coin(rng) for _ in range(self.outputs_per_tx)),
            )
        ]
        pool = sorted(self.wallet.unspent(), key=lambda oc: oc.coin.encode())
        rng.shuffle(pool)
        cursor = 0
        for _ in range(max(tx_count - 1, 0)):
            if cursor + self.inputs_per_tx > len(pool):
                break
            picked = pool[cursor : cursor + self.inputs_per_tx]
            cursor += self.inputs_per_tx
            txs.append(
                Transaction(
                    inputs=tuple(oc.coin for oc in picked),
                    outputs=tuple(
                        self._fresh_coin(rng) for _ in range(self.outputs_per_tx)
                    ),
                    witnesses=tuple(oc.witness for oc in picked),
                )
            )
        return txs

    # --- block lifecycle ---

    def append_block(self, txs) -> BlockStats:
        params = self.params
        prev = self.headers.tip_header
        tip = self.headers.tip

        start = time.perf_counter()
        block = seal_block(prev, txs, params, timestamp=prev.height + 1, workers=self.workers)
        update_seconds = time.perf_counter() - start

        start = time.perf_counter()
        if not verify_commitments(prev, block.txs, block.header, params, self.workers):
            raise CompactChainError("honest block failed commitment verification")
        for index, tx in enumerate(block.txs):
            if not validate_transaction(tx, tip, self.headers, self.cache, params):
                raise CompactChainError(f"honest transaction {index} failed validation")
        verify_seconds = time.perf_counter() - start

        apply_block(self.headers, self.cache, block, params, self.workers)
        spent = self.wallet.roll_forward(block)
        self.spend_log[block.header.height] = spent
        for tx in block.txs:
            for coin in tx.outputs:
                self.wallet.register(coin, generate_witness(coin, block, prev, params))

        n_inputs = len(block.input_coins())
        n_coins = n_inputs + len(block.output_coins())
        stats = BlockStats(
            height=block.header.height,
            update_seconds=update_seconds,
            verify_seconds=verify_seconds,
            block_bytes=header_bytes(params) + 76 * n_coins,
            proof_bytes=witness_envelope_bytes(params) * n_inputs,
        )
        self.stats.append(stats)
        return stats

    def run(self, blocks: int, txs_per_block: int) -> list[BlockStats]:
        for _ in range(blocks):
            self.append_block(self.build_txs(txs_per_block))
        return self.stats

    # --- adversarial fixtures ---

    def double_spend_tx(self, spent_enc: bytes) -> Transaction:
        """Re-spend an already consumed coin using its frozen (pre-spend)
        witness; the witness is still in-window, so only the cache catches it."""
        oc = self.wallet.coins[spent_enc]
        rng = self._block_rng(-1)
        return Transaction(
            inputs=(oc.coin,),
            outputs=(self._fresh_coin(rng),),
            witnesses=(oc.witness,),
        )

    def stale_witness_tx(self, snapshot) -> Transaction:
        """Spend with a witness that was never rolled past an old height."""
        coin, witness = snapshot
        rng = self._block_rng(-2)
        return Transaction(
            inputs=(coin,),
            outputs=(self._fresh_coin(rng),),
            witnesses=(witness,),
        )

    def recently_spent(self, min_height: int) -> list[bytes]:
        """Encodings of coins consumed at cached heights >= min_height."""
        out = []
        for height in sorted(self.spend_log, reverse=True):
            if height < min_height:
                break
            out.extend(self.spend_log[height])
        return out
