"""Turn-based ledger growth with partial information.

Each turn runs four phases in this order:

1. mining      -- a winner is drawn proportionally to hash rate and
                  initialises block B_t via its strategy (a non-atomic
                  aggregate first resamples its view from scratch);
2. action      -- strategies publish private blocks/txs (honest miners
                  publish everything immediately) and may author new
                  transactions (honest miners author none);
3. nature      -- end-users broadcast `lam` new regular transactions
                  whose dependencies are drawn from the currently valid
                  transaction set;
4. information -- every atomic miner independently learns each public
                  block/tx it has not seen yet with probability q_i,
                  then visible sets are closed (ancestors, carried txs,
                  dependencies).

The just-published B_t and this turn's transactions are all candidates
in the same turn's information update, and can never be carried by B_t
itself (they did not exist when it was initialised).

Randomness contract (fixed so replays are bit-exact): per turn, in
order: (a) one uniform for the winner; (b) if the winner is non-atomic,
one uniform per published block (ids ascending, genesis excluded) then
one per published tx (ids ascending, genesis reward excluded), where an
artifact published a turns ago is seen when its uniform < 1-(1-q)^a;
(c) one Poisson(gamma) vector of length lam, then per new tx one
integer vector of its dependency draws; (d) per atomic miner in index
order, one uniform vector over unseen public blocks (ascending) then
one over unseen public txs (ascending), compared against q_i.  All
draws come from the single numpy Generator owned by the trial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import kernels
from .dag import (
    REGULAR,
    REWARD,
    Block,
    BlockDag,
    ScoreParams,
    Transaction,
    TxGraph,
    TxId,
    reward_tx_id,
)
from .rng import make_generator

ATOMIC = "atomic"
AGGREGATE = "non-atomic-aggregate"

HASH_SUM_TOL = 1e-12


class ConfigError(ValueError):
    """Simulation parameters violate a constraint."""


class StrategyContractError(RuntimeError):
    """A strategy returned a decision outside its allowed action space."""


@dataclass(frozen=True)
class MinerSpec:
    index: int
    hash: float
    info: float
    kind: str = ATOMIC
    strategy: object = None     # None -> honest


@dataclass(frozen=True)
class SimParams:
    miners: tuple[MinerSpec, ...]
    k: float = 1                # positive int, or math.inf for unbounded
    eta: int = 6
    lam: int = None             # transactions per turn; None copies eta
    gamma: float = 2.0
    score: ScoreParams = ScoreParams(0.5)
    horizon: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.lam is None:
            object.__setattr__(self, "lam", self.eta)
        object.__setattr__(self, "miners", tuple(self.miners))

    def validate(self):
        if not self.miners:
            raise ConfigError("need at least one miner")
        for i, m in enumerate(self.miners):
            if m.index != i:
                raise ConfigError(f"miner {i} has index {m.index}; must be dense 0..n-1")
            if not 0.0 < m.hash <= 1.0:
                raise ConfigError(f"miner {i}: hash rate {m.hash} outside (0, 1]")
            if not 0.0 <= m.info <= 1.0:
                raise ConfigError(f"miner {i}: info parameter {m.info} outside [0, 1]")
            if m.kind not in (ATOMIC, AGGREGATE):
                raise ConfigError(f"miner {i}: unknown kind {m.kind!r}")
        total = sum(m.hash for m in self.miners)
        if abs(total - 1.0) > HASH_SUM_TOL:
            raise ConfigError(f"hash rates sum to {total!r}, expected 1")
        if self.k != math.inf and (self.k != int(self.k) or self.k < 1):
            raise ConfigError(f"k must be a positive integer or math.inf, got {self.k}")
        if self.eta < 1:
            raise ConfigError(f"eta must be >= 1, got {self.eta}")
        if self.lam < 1:
            raise ConfigError(f"lam must be >= 1, got {self.lam}")
        if self.gamma <= 0:
            raise ConfigError(f"gamma must be > 0, got {self.gamma}")
        if not isinstance(self.score, ScoreParams):
            raise ConfigError("score must be a ScoreParams")
        if self.horizon < 1:
            raise ConfigError(f"horizon must be >= 1, got {self.horizon}")

    @property
    def kernel_k(self):
        return 0 if self.k == math.inf else int(self.k)


# Strategy decisions (the three components of a miner strategy).

@dataclass(frozen=True)
class InitDecision:
    """Contents of a freshly won block: carried txs X and pointers Y."""
    carried: tuple = ()         # TxIds, reward tx excluded (always added)
    pointers: tuple = ()        # block ids


@dataclass(frozen=True)
class PublishDecision:
    blocks: tuple = ()          # block ids from the miner's private set
    txs: tuple = ()             # TxIds from the miner's private set


@dataclass(frozen=True)
class TxRequest:
    """New transactions to author: one dependency set per tx, plus which
    of them (by position) to broadcast immediately."""
    created: tuple = ()         # tuples/frozensets of TxId dependencies
    broadcast: tuple = ()       # indices into created


class MinerStrategy:
    def initialize(self, state, miner) -> InitDecision:
        raise NotImplementedError

    def publish(self, state, miner) -> PublishDecision:
        raise NotImplementedError

    def create_transactions(self, state, miner) -> TxRequest:
        raise NotImplementedError


class HonestStrategy(MinerStrategy):
    """Point at the best visible leaves, carry the oldest eligible
    pending transactions, publish everything immediately, author no
    transactions of its own."""

    def initialize(self, state, miner):
        ptrs, carried = state._core.honest_inputs(miner, state.params.eta)
        return InitDecision(
            carried=tuple(state._tx_ids[x] for x in carried),
            pointers=tuple(ptrs),
        )

    def publish(self, state, miner):
        blocks = tuple(sorted(state._private_blocks[miner]))
        txs = tuple(state._tx_ids[x] for x in sorted(state._private_txs[miner]))
        return PublishDecision(blocks=blocks, txs=txs)

    def create_transactions(self, state, miner):
        return TxRequest()


HONEST = HonestStrategy()


@dataclass
class LocalInfo:
    """One miner's knowledge: visible sets include own private artifacts."""
    visible_blocks: set = field(default_factory=set)
    private_blocks: set = field(default_factory=set)
    visible_txs: set = field(default_factory=set)
    private_txs: set = field(default_factory=set)


class LedgerState:
    """Global graphs plus per-miner views, backed by a bitset core."""

    def __init__(self, params: SimParams, backend=None):
        params.validate()
        self.params = params
        self.turn = 0
        n = len(params.miners)
        max_blocks = params.horizon + 1
        max_txs = 1 + params.horizon * (1 + params.lam)
        self._core = kernels.make_core(
            n, params.score.alpha, params.kernel_k, max_blocks, max_txs, backend
        )
        self._tx_ids = [reward_tx_id(0)]          # dense tx id -> TxId
        self._tx_index = {reward_tx_id(0): 0}
        self._private_blocks = [set() for _ in range(n)]
        self._private_txs = [set() for _ in range(n)]
        self._block_publish_turn = {0: 0}
        self._tx_publish_turn = {0: 0}
        self._winners = []
        self._serial_next = 1

    # -- bookkeeping used by the phases --

    def _strategy(self, i) -> MinerStrategy:
        return self.params.miners[i].strategy or HONEST

    def _alloc_serial(self):
        s = self._serial_next
        self._serial_next += 1
        return s

    def _register_reward_tx(self, turn) -> int:
        tid = reward_tx_id(turn)
        x = self._core.new_reward_tx(turn)
        self._tx_ids.append(tid)
        self._tx_index[tid] = x
        return x

    def _register_regular_tx(self, turn, serial, dep_indices) -> int:
        tid = TxId(turn, serial, REGULAR)
        x = self._core.new_regular_tx(turn, serial, tuple(dep_indices))
        self._tx_ids.append(tid)
        self._tx_index[tid] = x
        return x

    def _tx_visible_to(self, miner, x):
        return bool((self._core.view_txs_mask(miner) >> x) & 1)

    def _block_visible_to(self, miner, b):
        return bool((self._core.view_blocks_mask(miner) >> b) & 1)

    # -- read-only views used by metrics, tests, and export --

    @property
    def n_miners(self):
        return len(self.params.miners)

    @property
    def winners(self):
        return tuple(self._winners)

    def owner_of(self, block_id):
        o = self._core.block_owner(block_id)
        return None if o < 0 else o

    def valid_block_ids(self):
        return list(_mask_bits(self._core.global_valid_mask()))

    def present_tx_ids(self):
        return {self._tx_ids[x] for x in _mask_bits(self._core.global_pvt_mask())}

    def view_valid_block_ids(self, miner):
        return list(_mask_bits(self._core.view_valid_mask(miner)))

    def view_present_tx_ids(self, miner):
        return {self._tx_ids[x] for x in _mask_bits(self._core.view_pvt_mask(miner))}

    def public_block_ids(self):
        return set(_mask_bits(self._core.public_blocks_mask()))

    def public_tx_ids(self):
        return {self._tx_ids[x] for x in _mask_bits(self._core.public_txs_mask())}

    def local(self, miner) -> LocalInfo:
        return LocalInfo(
            visible_blocks=set(_mask_bits(self._core.view_blocks_mask(miner))),
            private_blocks=set(self._private_blocks[miner]),
            visible_txs={
                self._tx_ids[x] for x in _mask_bits(self._core.view_txs_mask(miner))
            },
            private_txs={self._tx_ids[x] for x in sorted(self._private_txs[miner])},
        )

    def _export_block(self, b):
        owner = self.owner_of(b)
        pointers = frozenset(self._core.block_pointers(b))
        carried = frozenset(self._tx_ids[x] for x in self._core.block_carried(b))
        return Block(b, owner, pointers, carried)

    def global_block_dag(self) -> BlockDag:
        dag = BlockDag()
        for b in range(self._core.n_blocks()):
            dag.add_block(self._export_block(b))
        return dag

    def visible_block_dag(self, miner) -> BlockDag:
        # visible sets are ancestor-closed, so every pointer target is
        # present and insertion in id order is safe
        dag = BlockDag()
        for b in _mask_bits(self._core.view_blocks_mask(miner)):
            dag.add_block(self._export_block(b))
        return dag

    def global_tx_graph(self) -> TxGraph:
        txs = TxGraph()
        for x in range(self._core.n_txs()):
            deps = frozenset(self._tx_ids[d] for d in self._core.tx_deps(x))
            txs.add_tx(Transaction(self._tx_ids[x], deps))
        return txs

    def pending_inclusion_turn(self):
        """First turn each regular tx entered a block; None if never."""
        out = {}
        for b in range(self._core.n_blocks()):
            for x in self._core.block_carried(b):
                tid = self._tx_ids[x]
                if tid.kind == REGULAR and tid not in out:
                    out[tid] = b
        for x in range(self._core.n_txs()):
            tid = self._tx_ids[x]
            if tid.kind == REGULAR:
                out.setdefault(tid, None)
        return out


def _mask_bits(mask):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def genesis(params: SimParams, backend=None) -> LedgerState:
    """Turn-0 state: one genesis block/reward tx, known to everyone."""
    return LedgerState(params, backend)


def mining_phase(state: LedgerState, rng) -> int:
    """Open turn t and create (not yet publish) the winner's block."""
    state.turn += 1
    state._serial_next = 1
    params = state.params
    u = rng.random()
    winner = len(params.miners) - 1
    acc = 0.0
    for i, m in enumerate(params.miners):
        acc += m.hash
        if u < acc:
            winner = i
            break
    spec = params.miners[winner]
    if spec.kind == AGGREGATE:
        non_atomic_resample(state, winner, rng)

    decision = state._strategy(winner).initialize(state, winner)
    _check_init(state, winner, decision)

    t = state.turn
    ridx = state._register_reward_tx(t)
    carried = [ridx] + sorted(state._tx_index[tid] for tid in decision.carried)
    bid = state._core.new_block(winner, tuple(sorted(decision.pointers)), tuple(carried))
    state._private_blocks[winner].add(bid)
    state._private_txs[winner].add(ridx)
    # the winner knows its own block at once, published or not
    state._core.admit(winner, (bid,), (ridx,))
    state._winners.append(winner)
    return winner


def _check_init(state, winner, decision):
    params = state.params
    ptrs = decision.pointers
    if not ptrs:
        raise StrategyContractError("a block must point at >= 1 existing block")
    if len(set(ptrs)) != len(ptrs):
        raise StrategyContractError("duplicate pointers")
    if params.k != math.inf and len(ptrs) > params.k:
        raise StrategyContractError(f"{len(ptrs)} pointers exceeds k={params.k}")
    for p in ptrs:
        if not (0 <= p < state._core.n_blocks()):
            raise StrategyContractError(f"pointer to unknown block {p}")
        if not state._block_visible_to(winner, p):
            raise StrategyContractError(f"pointer to block {p} outside the winner's view")
    carried = decision.carried
    if len(set(carried)) != len(carried):
        raise StrategyContractError("duplicate carried txs")
    if len(carried) > params.eta:
        raise StrategyContractError(f"{len(carried)} carried txs exceeds eta={params.eta}")
    for tid in carried:
        x = state._tx_index.get(tid)
        if x is None:
            raise StrategyContractError(f"carried tx {tid} does not exist")
        if not state._tx_visible_to(winner, x):
            raise StrategyContractError(f"carried tx {tid} outside the winner's view")


def action_phase(state: LedgerState) -> None:
    """Strategies publish private artifacts and author transactions."""
    t = state.turn
    for i in range(state.n_miners):
        strat = state._strategy(i)
        decision = strat.publish(state, i)
        pub_blocks = sorted(set(decision.blocks))
        pub_txs = sorted(state._tx_index[tid] for tid in set(decision.txs))
        tx_set = set(pub_txs)
        for b in pub_blocks:
            if b not in state._private_blocks[i]:
                raise StrategyContractError(f"miner {i} cannot publish foreign block {b}")
            r = state._tx_index[reward_tx_id(b)]
            if r not in tx_set:
                raise StrategyContractError(
                    f"block {b} published without its reward transaction"
                )
        for x in pub_txs:
            if x not in state._private_txs[i]:
                raise StrategyContractError(f"miner {i} cannot publish foreign tx {x}")
        for x in pub_txs:
            state._core.publish_tx(x)
            state._tx_publish_turn[x] = t
            state._private_txs[i].discard(x)
        for b in pub_blocks:
            state._core.publish_block(b)
            state._block_publish_turn[b] = t
            state._private_blocks[i].discard(b)

        request = strat.create_transactions(state, i)
        created = []
        for deps in request.created:
            if not deps:
                raise StrategyContractError("an authored tx needs >= 1 dependency")
            dep_idx = sorted({state._tx_index[d] for d in deps})
            for x in dep_idx:
                if not state._tx_visible_to(i, x):
                    raise StrategyContractError("authored tx depends on an unseen tx")
            x = state._register_regular_tx(t, state._alloc_serial(), dep_idx)
            state._private_txs[i].add(x)
            state._core.admit(i, (), (x,))
            created.append(x)
        for pos in request.broadcast:
            x = created[pos]
            state._core.publish_tx(x)
            state._tx_publish_turn[x] = t
            state._private_txs[i].discard(x)


def nature_phase(state: LedgerState, rng) -> None:
    """End-users broadcast lam new transactions with valid dependencies."""
    params = state.params
    t = state.turn
    pool = state._core.nature_pool(t)
    counts = rng.poisson(params.gamma, size=params.lam)
    for j in range(params.lam):
        d = int(counts[j])
        if d < 1:
            d = 1
        draws = rng.integers(0, len(pool), size=d)
        dep_idx = sorted({pool[int(i)] for i in draws})
        x = state._register_regular_tx(t, state._alloc_serial(), dep_idx)
        state._core.publish_tx(x)
        state._tx_publish_turn[x] = t


def information_update_phase(state: LedgerState, rng) -> None:
    """Each atomic miner learns unseen public artifacts with prob q_i."""
    core = state._core
    for i, spec in enumerate(state.params.miners):
        if spec.kind == AGGREGATE:
            continue
        q = spec.info
        block_cands = core.unseen_public_blocks(i)
        seen_blocks = ()
        if block_cands:
            u = rng.random(len(block_cands))
            seen_blocks = [b for b, ub in zip(block_cands, u) if ub < q]
        tx_cands = core.unseen_public_txs(i)     # snapshot before admitting
        seen_txs = ()
        if tx_cands:
            u = rng.random(len(tx_cands))
            seen_txs = [x for x, ux in zip(tx_cands, u) if ux < q]
        core.admit(i, seen_blocks, seen_txs)


def non_atomic_resample(state: LedgerState, miner, rng) -> None:
    """Rebuild an aggregate miner's view from scratch.

    An artifact published a >= 1 turns ago is directly seen with
    probability 1-(1-q)^a (one potential delivery per elapsed turn);
    genesis is always known; closures are then applied as usual.
    """
    q = state.params.miners[miner].info
    t = state.turn
    core = state._core
    core.reset_view(miner)

    def draw(publish_turns):
        items = sorted((i, pt) for i, pt in publish_turns.items() if i != 0)
        if not items:
            return []
        u = rng.random(len(items))
        keep = []
        for (ident, pt), ui in zip(items, u):
            age = t - pt
            p = 1.0 - (1.0 - q) ** age if age > 0 else 0.0
            if ui < p:
                keep.append(ident)
        return keep

    seen_blocks = draw(state._block_publish_turn)
    seen_txs = draw(state._tx_publish_turn)
    core.admit(miner, seen_blocks, seen_txs)


def step(state: LedgerState, rng) -> int:
    """Advance one turn; returns the winning miner's index."""
    winner = mining_phase(state, rng)
    action_phase(state)
    nature_phase(state, rng)
    information_update_phase(state, rng)
    return winner


def run(params: SimParams, backend=None) -> LedgerState:
    """Simulate the full horizon from genesis with the params' seed."""
    state = genesis(params, backend)
    rng = make_generator(params.seed)
    for _ in range(params.horizon):
        step(state, rng)
    return state
