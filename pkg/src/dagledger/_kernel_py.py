"""Pure-Python simulation core.

Holds the growing block DAG, transaction graph, and per-miner visible
sets for one simulation, with reachability and visibility stored as
arbitrary-size integer bitmasks.  The compiled twin (_kernel_cy)
implements the same interface over packed uint64 words; the two must
stay observationally identical (test_kernel_parity drives them in
lockstep), so any semantic change here needs a mirror change there.

Conventions:
- Block ids double as creation turns (exactly one block per turn,
  genesis is 0), so pointers always target smaller ids.
- Transaction ids are dense in creation order, which coincides with
  (creation-turn, serial) lexicographic order because serials are
  handed out in creation order within a turn (reward first, serial 0).
- k == 0 means an unbounded pointer budget; the engine maps the public
  "infinite" value to 0 before construction.
- The core never draws randomness.  Callers sample and pass outcomes
  in, which keeps replay behaviour identical across backends.
- Scores are alpha*depth + (1-alpha)*weight evaluated in double
  precision with exactly this expression; ranking ties on equal floats
  fall back to the smaller block id.  The compiled twin must keep the
  same expression so both rank identically.
"""


def bits(mask):
    """Indices of set bits, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class SimCore:
    backend = "python"

    def __init__(self, n_miners, alpha, k, max_blocks, max_txs):
        if n_miners < 1:
            raise ValueError("need at least one miner")
        if k < 0:
            raise ValueError("k must be >= 0 (0 meaning unbounded)")
        self.n_miners = int(n_miners)
        self.alpha = float(alpha)
        self.k = int(k)
        self.max_blocks = int(max_blocks)
        self.max_txs = int(max_txs)

        # per-block, indexed by block id
        self._b_owner = []
        self._b_pointers = []
        self._b_carried = []
        self._b_reach = []          # ancestor bitmask, includes self
        self._b_depth = []
        self._b_weight = []
        self._b_score = []
        self._b_children = []       # blocks pointing at this one
        self._b_carried_mask = []
        self._b_txclosure = []      # dependency closure of carried txs

        # per-transaction, indexed by tx id
        self._t_turn = []
        self._t_serial = []
        self._t_reward = []
        self._t_deps = []
        self._t_closure = []        # dependency closure, includes self
        self._reward_mask = 0

        self._pub_blocks = 0
        self._pub_txs = 0
        self._g_leaves = 0

        # bootstrap: genesis block carrying the genesis reward tx
        self.new_reward_tx(0)
        self.new_block(-1, (), (0,))
        self.publish_tx(0)
        self.publish_block(0)

        self._v_blocks = [1] * self.n_miners
        self._v_txs = [1] * self.n_miners
        self._v_leaves = [1] * self.n_miners

    # ---- creation ----

    def new_reward_tx(self, turn):
        x = len(self._t_turn)
        if x >= self.max_txs:
            raise RuntimeError("transaction capacity exceeded")
        self._t_turn.append(turn)
        self._t_serial.append(0)
        self._t_reward.append(True)
        self._t_deps.append(())
        self._t_closure.append(1 << x)
        self._reward_mask |= 1 << x
        return x

    def new_regular_tx(self, turn, serial, deps):
        x = len(self._t_turn)
        if x >= self.max_txs:
            raise RuntimeError("transaction capacity exceeded")
        closure = 1 << x
        for d in deps:
            closure |= self._t_closure[d]
        self._t_turn.append(turn)
        self._t_serial.append(serial)
        self._t_reward.append(False)
        self._t_deps.append(tuple(deps))
        self._t_closure.append(closure)
        return x

    def new_block(self, owner, pointers, carried):
        b = len(self._b_owner)
        if b >= self.max_blocks:
            raise RuntimeError("block capacity exceeded")
        reach = 1 << b
        for p in pointers:
            reach |= self._b_reach[p]
        depth = 1 + min((self._b_depth[p] for p in pointers), default=-1)
        weight = reach.bit_count() - 1
        carried_mask = 0
        txclosure = 0
        for x in carried:
            carried_mask |= 1 << x
            txclosure |= self._t_closure[x]
        self._b_owner.append(owner)
        self._b_pointers.append(tuple(pointers))
        self._b_carried.append(tuple(carried))
        self._b_reach.append(reach)
        self._b_depth.append(depth)
        self._b_weight.append(weight)
        self._b_score.append(self.alpha * depth + (1.0 - self.alpha) * weight)
        self._b_children.append(0)
        self._b_carried_mask.append(carried_mask)
        self._b_txclosure.append(txclosure)
        self._g_leaves |= 1 << b
        for p in pointers:
            self._b_children[p] |= 1 << b
            self._g_leaves &= ~(1 << p)
        return b

    # ---- publication ----

    def publish_block(self, b):
        self._pub_blocks |= 1 << b

    def publish_tx(self, x):
        self._pub_txs |= 1 << x

    # ---- per-miner visibility ----

    def reset_view(self, m):
        self._v_blocks[m] = 1
        self._v_txs[m] = 1
        self._v_leaves[m] = 1

    def admit(self, m, block_ids, tx_ids):
        """Reveal artifacts to miner m, taking closures.

        Seeing a block reveals all its ancestors plus every transaction
        those blocks carry (with dependency closures); seeing a
        transaction reveals its dependency closure.
        """
        v = self._v_blocks[m]
        for b in block_ids:
            v |= self._b_reach[b]
        fresh = v & ~self._v_blocks[m]
        t = self._v_txs[m]
        for x in tx_ids:
            t |= self._t_closure[x]
        for b in bits(fresh):
            t |= self._b_txclosure[b]
        # a leaf stays a leaf until some visible block points at it; new
        # blocks can't sit below previously visible ones (views are
        # ancestor-closed), so candidates are old leaves + fresh blocks
        leaves = self._v_leaves[m] | fresh
        for b in bits(leaves):
            if self._b_children[b] & v:
                leaves &= ~(1 << b)
        self._v_blocks[m] = v
        self._v_txs[m] = t
        self._v_leaves[m] = leaves

    def unseen_public_blocks(self, m):
        return list(bits(self._pub_blocks & ~self._v_blocks[m]))

    def unseen_public_txs(self, m):
        return list(bits(self._pub_txs & ~self._v_txs[m]))

    # ---- ranking and extraction ----

    def _top(self, leaf_mask):
        ids = list(bits(leaf_mask))
        ids.sort(key=lambda b: (-self._b_score[b], b))
        if self.k:
            ids = ids[: self.k]
        return ids

    def _reach_union(self, block_ids):
        mask = 0
        for b in block_ids:
            mask |= self._b_reach[b]
        return mask

    def _carried_union(self, vb_mask):
        mask = 0
        for b in bits(vb_mask):
            mask |= self._b_carried_mask[b]
        return mask

    def global_valid_mask(self):
        return self._reach_union(self._top(self._g_leaves))

    def view_valid_mask(self, m):
        return self._reach_union(self._top(self._v_leaves[m]))

    def global_pvt_mask(self):
        return self._carried_union(self.global_valid_mask())

    def view_pvt_mask(self, m):
        return self._carried_union(self.view_valid_mask(m))

    def honest_inputs(self, m, eta):
        """Pointers and carried txs an honest winner would choose.

        Pointers: the up-to-k best-scoring leaves of the miner's view.
        Carried: the oldest visible regular txs not already included in
        the view's valid ledger whose whole dependency closure is.
        """
        ptrs = self._top(self._v_leaves[m])
        pvt = self._carried_union(self._reach_union(ptrs))
        chosen = []
        for x in bits(self._v_txs[m] & ~pvt & ~self._reward_mask):
            if len(chosen) == eta:
                break
            if self._t_closure[x] & ~pvt == 1 << x:
                chosen.append(x)
        return ptrs, chosen

    def nature_pool(self, turn):
        """Valid txs new transactions may depend on: carried by the
        globally valid sub-DAG and created before the current turn."""
        pool = self._carried_union(self.global_valid_mask())
        return [x for x in bits(pool) if self._t_turn[x] < turn]

    # ---- accessors ----

    def n_blocks(self):
        return len(self._b_owner)

    def n_txs(self):
        return len(self._t_turn)

    def block_owner(self, b):
        return self._b_owner[b]

    def block_pointers(self, b):
        return self._b_pointers[b]

    def block_carried(self, b):
        return self._b_carried[b]

    def block_depth(self, b):
        return self._b_depth[b]

    def block_weight(self, b):
        return self._b_weight[b]

    def block_score(self, b):
        return self._b_score[b]

    def tx_turn(self, x):
        return self._t_turn[x]

    def tx_serial(self, x):
        return self._t_serial[x]

    def tx_is_reward(self, x):
        return self._t_reward[x]

    def tx_deps(self, x):
        return self._t_deps[x]

    def view_blocks_mask(self, m):
        return self._v_blocks[m]

    def view_txs_mask(self, m):
        return self._v_txs[m]

    def view_leaves_mask(self, m):
        return self._v_leaves[m]

    def public_blocks_mask(self):
        return self._pub_blocks

    def public_txs_mask(self):
        return self._pub_txs
