"""Event-driven block propagation and throughput arithmetic.

Model: a random graph where each node draws a fixed number of outbound peers
(links are used bidirectionally), one block payload flooding from a miner
sampled by hashrate. A node validates once after fully receiving the payload,
then uploads copies to its neighbors in adjacency order over a single
serialized upload pipe. Relay order is therefore independent of arrival order,
which makes first-arrival times monotone in the payload size.
"""

import heapq
import math
import random
from dataclasses import dataclass, field

from .errors import DegenerateConfig

#: (per-transaction proof bytes, block validation seconds) per scheme, from the
#: published 1000-transaction measurements; the proof bytes are the per-tx
#: witness payloads each scheme gossips alongside the block.
SCHEME_PRESETS = {
    "boneh": {"per_tx_proof_bytes": 384, "validation_seconds": 0.193},
    "minichain": {"per_tx_proof_bytes": 1360, "validation_seconds": 0.306},
    "compact": {"per_tx_proof_bytes": 784, "validation_seconds": 0.303},
}

#: published per-scheme latencies for the throughput matrix: transaction
#: verification (500 txs), commitment update, consensus.
PUBLISHED_LATENCIES = {
    "boneh": (0.193, 235.62, 2.08),
    "minichain": (0.306, 0.97, 3.57),
    "compact": (0.303, 0.99, 3.03),
}


def default_hashrate_weights(miner_count: int) -> tuple[float, ...]:
    raw = [2.0 ** -(i + 1) for i in range(miner_count)]
    total = sum(raw)
    return tuple(w / total for w in raw)


@dataclass(frozen=True)
class NetConfig:
    node_count: int = 13000
    miner_count: int = 10
    miner_hashrate_weights: tuple[float, ...] = ()
    upload_mbps: float = 50.0
    degree: int = 8
    block_bytes: int = 250_000
    per_tx_proof_bytes: int = 784
    tx_count: int = 1000
    validation_seconds: float = 0.303
    rng_seed: int = 0

    def __post_init__(self):
        if self.node_count < 1:
            raise DegenerateConfig("node_count must be >= 1")
        if not 1 <= self.miner_count <= self.node_count:
            raise DegenerateConfig("miner_count must be in [1, node_count]")
        if not 0 <= self.degree < self.node_count:
            raise DegenerateConfig("degree must be in [0, node_count)")
        if self.upload_mbps <= 0:
            raise DegenerateConfig("upload_mbps must be positive")
        if not self.miner_hashrate_weights:
            object.__setattr__(
                self,
                "miner_hashrate_weights",
                default_hashrate_weights(self.miner_count),
            )
        weights = self.miner_hashrate_weights
        if len(weights) != self.miner_count:
            raise DegenerateConfig("need one hashrate weight per miner")
        if any(w < 0 for w in weights):
            raise DegenerateConfig("hashrate weights must be non-negative")
        if abs(sum(weights) - 1.0) > 1e-9:
            raise DegenerateConfig("hashrate weights must sum to 1")

    @property
    def payload_bytes(self) -> int:
        return self.block_bytes + self.tx_count * self.per_tx_proof_bytes

    @property
    def transfer_seconds(self) -> float:
        """Per-link upload time for the full payload."""
        return self.payload_bytes * 8.0 / (self.upload_mbps * 1e6)


@dataclass(frozen=True)
class Topology:
    adjacency: tuple[tuple[int, ...], ...]
    miner_ids: tuple[int, ...]
    miner_weights: tuple[float, ...]


@dataclass(frozen=True)
class PropagationResult:
    arrival_seconds: tuple[float, ...]
    consensus_latency: float
    full_coverage_latency: float


def _connected(adjacency: list[set[int]]) -> bool:
    n = len(adjacency)
    seen = bytearray(n)
    queue = [0]
    seen[0] = 1
    count = 1
    while queue:
        v = queue.pop()
        for u in adjacency[v]:
            if not seen[u]:
                seen[u] = 1
                count += 1
                queue.append(u)
    return count == n


def build_network(config: NetConfig, max_attempts: int = 100) -> Topology:
    """Seeded random graph: every node draws `degree` distinct peers; resample
    deterministically until connected."""
    n = config.node_count
    for attempt in range(max_attempts):
        rng = random.Random(config.rng_seed * 1_000_003 + attempt)
        adjacency: list[set[int]] = [set() for _ in range(n)]
        for v in range(n):
            while len(adjacency[v]) < config.degree:
                u = rng.randrange(n)
                if u != v:
                    adjacency[v].add(u)
        undirected: list[set[int]] = [set() for _ in range(n)]
        for v in range(n):
            for u in adjacency[v]:
                undirected[v].add(u)
                undirected[u].add(v)
        if _connected(undirected):
            return Topology(
                adjacency=tuple(tuple(sorted(peers)) for peers in undirected),
                miner_ids=tuple(range(config.miner_count)),
                miner_weights=config.miner_hashrate_weights,
            )
    raise DegenerateConfig(f"no connected graph after {max_attempts} attempts")


def _pick_origin(topology: Topology, rng: random.Random) -> int:
    roll = rng.random()
    cumulative = 0.0
    for node, weight in zip(topology.miner_ids, topology.miner_weights):
        cumulative += weight
        if roll <= cumulative:
            return node
    return topology.miner_ids[-1]


def simulate_propagation(topology: Topology, config: NetConfig) -> PropagationResult:
    """Flood one payload from a hashrate-sampled miner; record each node's
    first complete reception time."""
    n = len(topology.adjacency)
    rng = random.Random(config.rng_seed * 69069 + 1)
    origin = _pick_origin(topology, rng)
    transfer = config.transfer_seconds
    arrivals = [math.inf] * n
    heap: list[tuple[float, int]] = [(0.0, origin)]
    while heap:
        t, v = heapq.heappop(heap)
        if arrivals[v] < math.inf:
            continue
        arrivals[v] = t
        ready = t + config.validation_seconds
        for slot, u in enumerate(topology.adjacency[v], start=1):
            if arrivals[u] == math.inf:
                heapq.heappush(heap, (ready + slot * transfer, u))
    return PropagationResult(
        arrival_seconds=tuple(arrivals),
        consensus_latency=consensus_latency(arrivals),
        full_coverage_latency=max(arrivals),
    )


def consensus_latency(result) -> float:
    """Earliest time at which at least half the nodes (rounded up) have the
    payload."""
    arrivals = result.arrival_seconds if isinstance(result, PropagationResult) else result
    if not arrivals:
        raise ValueError("no arrivals")
    ordered = sorted(arrivals)
    return ordered[(len(ordered) + 1) // 2 - 1]


def max_tps(
    tx_verif_latency: float,
    commit_update_latency: float,
    consensus_latency: float,
    tx_per_block: int,
) -> float:
    """Throughput cap: the block pipeline is gated by its slowest stage."""
    return tx_per_block / max(tx_verif_latency, commit_update_latency, consensus_latency)
