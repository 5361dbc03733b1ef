"""Block-DAG and transaction-graph primitives.

Blocks are keyed by their creation turn (genesis is 0) and point to
strictly older blocks, so acyclicity holds by construction.  Transactions
are keyed by ``TxId`` and point to the transactions they depend on.

Everything here is a pure function over a snapshot; nothing mutates its
inputs.  This layer is deliberately simple (dicts and sets) -- the
simulation engine uses a bitset kernel for speed and this module serves
as its readable reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Union

REWARD = "reward"
REGULAR = "regular"


class ConsistencyError(ValueError):
    """A graph references an artifact that does not exist."""


class TxId(NamedTuple):
    turn: int
    serial: int
    kind: str = REGULAR

    def age_key(self):
        """Sort key for "oldest first" ordering."""
        return (self.turn, self.serial)


def reward_tx_id(turn: int) -> TxId:
    return TxId(turn, 0, REWARD)


@dataclass(frozen=True)
class Transaction:
    id: TxId
    dependencies: frozenset[TxId] = frozenset()

    def validate(self) -> None:
        if self.id.kind == REWARD:
            if self.dependencies:
                raise ValueError(f"reward tx {self.id} must have no dependencies")
            if self.id.serial != 0:
                raise ValueError(f"reward tx {self.id} must have serial 0")
        else:
            if not self.dependencies:
                raise ValueError(f"regular tx {self.id} needs at least one dependency")
        for dep in self.dependencies:
            if dep.turn > self.id.turn:
                raise ValueError(f"tx {self.id} depends on younger tx {dep}")


@dataclass(frozen=True)
class Block:
    id: int
    owner: int | None              # None for genesis
    pointers: frozenset[int] = frozenset()
    carried_txs: frozenset[TxId] = frozenset()


@dataclass
class BlockDag:
    """Grow-only DAG of blocks; ``reverse`` maps a block to its pointers-in."""

    blocks: dict[int, Block] = field(default_factory=dict)
    reverse: dict[int, set[int]] = field(default_factory=dict)

    def __contains__(self, block_id: int) -> bool:
        return block_id in self.blocks

    def __len__(self) -> int:
        return len(self.blocks)

    def node_ids(self):
        return self.blocks.keys()

    def out_edges(self, block_id: int) -> frozenset[int]:
        return self.blocks[block_id].pointers

    def add_block(self, block: Block) -> None:
        if block.id in self.blocks:
            raise ValueError(f"duplicate block id {block.id}")
        if not self.blocks:
            if block.pointers:
                raise ValueError("the first (genesis) block cannot have pointers")
        elif not block.pointers:
            raise ValueError(f"non-genesis block {block.id} needs at least one pointer")
        for target in block.pointers:
            if target not in self.blocks:
                raise ConsistencyError(f"block {block.id} points to unknown block {target}")
            if target >= block.id:
                raise ValueError(f"block {block.id} points to non-older block {target}")
        self.blocks[block.id] = block
        self.reverse.setdefault(block.id, set())
        for target in block.pointers:
            self.reverse[target].add(block.id)

    def induced(self, ids: Iterable[int]) -> "BlockDag":
        """Subgraph on ``ids``; keeps only edges between members."""
        members = set(ids)
        sub = BlockDag()
        for bid in sorted(members):
            blk = self.blocks[bid]
            kept = frozenset(p for p in blk.pointers if p in members)
            sub.blocks[bid] = Block(blk.id, blk.owner, kept, blk.carried_txs)
            sub.reverse.setdefault(bid, set())
            for p in kept:
                sub.reverse[p].add(bid)
        return sub


@dataclass
class TxGraph:
    """Grow-only dependency graph of transactions."""

    txs: dict[TxId, Transaction] = field(default_factory=dict)

    def __contains__(self, tx_id: TxId) -> bool:
        return tx_id in self.txs

    def __len__(self) -> int:
        return len(self.txs)

    def node_ids(self):
        return self.txs.keys()

    def out_edges(self, tx_id: TxId) -> frozenset[TxId]:
        return self.txs[tx_id].dependencies

    def add_tx(self, tx: Transaction) -> None:
        if tx.id in self.txs:
            raise ValueError(f"duplicate tx id {tx.id}")
        tx.validate()
        for dep in tx.dependencies:
            if dep not in self.txs:
                raise ConsistencyError(f"tx {tx.id} depends on unknown tx {dep}")
        self.txs[tx.id] = tx

    def induced(self, ids: Iterable[TxId]) -> "TxGraph":
        members = set(ids)
        sub = TxGraph()
        for tid in sorted(members, key=TxId.age_key):
            tx = self.txs[tid]
            sub.txs[tid] = Transaction(tid, frozenset(d for d in tx.dependencies if d in members))
        return sub


@dataclass(frozen=True)
class ScoreParams:
    """Leaf-ranking weights: score = alpha * depth + (1 - alpha) * weight."""

    alpha: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")


Graph = Union[BlockDag, TxGraph]


def closure(graph: Graph, seeds) -> Graph:
    """Induced subgraph on everything reachable from ``seeds`` along out-edges.

    Seeds are included.  Idempotent, and monotone in the seed set.
    """
    for s in seeds:
        if s not in graph:
            raise ValueError(f"unknown seed {s!r}")
    seen = set(seeds)
    stack = list(seeds)
    while stack:
        node = stack.pop()
        for nxt in graph.out_edges(node):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return graph.induced(seen)


def leaves(dag: BlockDag) -> set[int]:
    """Blocks no other block points to (in-degree 0)."""
    return {bid for bid in dag.blocks if not dag.reverse.get(bid)}


def depth(dag: BlockDag, block_id: int) -> int:
    """Length of the shortest pointer path from ``block_id`` down to genesis."""
    if block_id not in dag:
        raise ValueError(f"unknown block {block_id}")
    best: dict[int, int] = {}
    # pointers target strictly smaller ids, so descending id order is a
    # topological order and one sweep suffices
    for bid in sorted(_reachable_ids(dag, block_id), reverse=True):
        if bid == block_id:
            best[bid] = 0
        ptrs = dag.blocks[bid].pointers
        for p in ptrs:
            cand = best[bid] + 1
            if p not in best or cand < best[p]:
                best[p] = cand
    genesis = min(dag.blocks)
    return best[genesis]


def weight(dag: BlockDag, block_id: int) -> int:
    """Number of blocks reachable from ``block_id``, excluding itself."""
    if block_id not in dag:
        raise ValueError(f"unknown block {block_id}")
    return len(_reachable_ids(dag, block_id)) - 1


def score(dag: BlockDag, block_id: int, params: ScoreParams) -> float:
    return params.alpha * depth(dag, block_id) + (1.0 - params.alpha) * weight(dag, block_id)


def top_k_leaves(dag: BlockDag, params: ScoreParams, k) -> list[int]:
    """Leaves ranked by (score desc, id asc), truncated to k (math.inf = all).

    Ties at exactly equal float score go to the older block, which keeps
    replays deterministic.
    """
    ranked = sorted(leaves(dag), key=lambda b: (-score(dag, b, params), b))
    if k is math.inf or math.isinf(k):
        return ranked
    return ranked[: int(k)]


def valid_blocks(dag: BlockDag, params: ScoreParams, k) -> BlockDag:
    """Closure of the k best-scoring leaves; blocks outside it are orphaned."""
    return closure(dag, top_k_leaves(dag, params, k))


def present_valid_transactions(dag: BlockDag, txs: TxGraph, params: ScoreParams, k) -> set[TxId]:
    """Union of carried transactions over the valid sub-DAG."""
    valid = valid_blocks(dag, params, k)
    out: set[TxId] = set()
    for blk in valid.blocks.values():
        for tid in blk.carried_txs:
            if tid not in txs:
                raise ConsistencyError(f"block {blk.id} carries unknown tx {tid}")
            out.add(tid)
    return out


def _reachable_ids(dag: BlockDag, start: int) -> set[int]:
    seen = {start}
    stack = [start]
    while stack:
        for p in dag.blocks[stack.pop()].pointers:
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return seen
