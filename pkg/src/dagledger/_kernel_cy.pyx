# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled simulation core.

Mirror of _kernel_py.SimCore with bitmasks stored as packed uint64
words instead of arbitrary-size Python integers.  The two backends
must stay observationally identical: same method names, same argument
and return conventions (masks cross the boundary as Python integers),
same float score expression, same tie ordering.  test_kernel_parity
drives both in lockstep; change them together or not at all.
"""

import numpy as np

from libc.stdint cimport uint64_t, int64_t

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil


cdef inline void _or_row(uint64_t[:] dst, uint64_t[:] src, Py_ssize_t w) nogil:
    cdef Py_ssize_t j
    for j in range(w):
        dst[j] |= src[j]


cdef inline void _copy_row(uint64_t[:] dst, uint64_t[:] src, Py_ssize_t w) nogil:
    cdef Py_ssize_t j
    for j in range(w):
        dst[j] = src[j]


cdef inline void _zero_row(uint64_t[:] dst, Py_ssize_t w) nogil:
    cdef Py_ssize_t j
    for j in range(w):
        dst[j] = 0


cdef inline bint _test_bit(uint64_t[:] row, Py_ssize_t i) nogil:
    return (row[i >> 6] >> (i & 63)) & 1


cdef inline void _set_bit(uint64_t[:] row, Py_ssize_t i) nogil:
    row[i >> 6] |= (<uint64_t>1) << (i & 63)


cdef inline void _clear_bit(uint64_t[:] row, Py_ssize_t i) nogil:
    row[i >> 6] &= ~((<uint64_t>1) << (i & 63))


cdef inline bint _intersects(uint64_t[:] a, uint64_t[:] b, Py_ssize_t w) nogil:
    cdef Py_ssize_t j
    for j in range(w):
        if a[j] & b[j]:
            return True
    return False


cdef list _row_bits(uint64_t[:] row, Py_ssize_t w):
    """Set bit indices, ascending, as a Python list."""
    cdef list out = []
    cdef Py_ssize_t j
    cdef uint64_t word
    for j in range(w):
        word = row[j]
        while word:
            out.append(j * 64 + __builtin_ctzll(word))
            word &= word - 1
    return out


cdef class SimCore:
    cdef readonly str backend
    cdef readonly int n_miners
    cdef readonly double alpha
    cdef readonly int k
    cdef readonly int max_blocks
    cdef readonly int max_txs
    cdef Py_ssize_t bw, tw          # mask widths in 64-bit words
    cdef Py_ssize_t nb, nt          # live block / tx counts

    cdef object _arrays             # keeps the numpy buffers alive
    cdef uint64_t[:, ::1] _reach
    cdef uint64_t[:, ::1] _children
    cdef uint64_t[:, ::1] _bcarried
    cdef uint64_t[:, ::1] _btxclo
    cdef uint64_t[:, ::1] _tclo
    cdef int64_t[::1] _depth
    cdef int64_t[::1] _weight
    cdef double[::1] _score
    cdef int64_t[::1] _tturn
    cdef uint64_t[::1] _reward
    cdef uint64_t[::1] _pub_b
    cdef uint64_t[::1] _pub_t
    cdef uint64_t[::1] _gleaves
    cdef uint64_t[:, ::1] _v_b
    cdef uint64_t[:, ::1] _v_t
    cdef uint64_t[:, ::1] _v_leaves
    cdef uint64_t[::1] _tmp_b
    cdef uint64_t[::1] _tmp_b2
    cdef uint64_t[::1] _tmp_t

    cdef list _b_owner, _b_pointers, _b_carried
    cdef list _t_serial, _t_reward_flag, _t_deps

    def __cinit__(self, n_miners, alpha, k, max_blocks, max_txs):
        if n_miners < 1:
            raise ValueError("need at least one miner")
        if k < 0:
            raise ValueError("k must be >= 0 (0 meaning unbounded)")
        self.backend = "compiled"
        self.n_miners = int(n_miners)
        self.alpha = float(alpha)
        self.k = int(k)
        self.max_blocks = int(max_blocks)
        self.max_txs = int(max_txs)
        self.bw = (self.max_blocks + 63) >> 6
        self.tw = (self.max_txs + 63) >> 6
        self.nb = 0
        self.nt = 0

        arrays = {
            "reach": np.zeros((self.max_blocks, self.bw), dtype=np.uint64),
            "children": np.zeros((self.max_blocks, self.bw), dtype=np.uint64),
            "bcarried": np.zeros((self.max_blocks, self.tw), dtype=np.uint64),
            "btxclo": np.zeros((self.max_blocks, self.tw), dtype=np.uint64),
            "tclo": np.zeros((self.max_txs, self.tw), dtype=np.uint64),
            "depth": np.zeros(self.max_blocks, dtype=np.int64),
            "weight": np.zeros(self.max_blocks, dtype=np.int64),
            "score": np.zeros(self.max_blocks, dtype=np.float64),
            "tturn": np.zeros(self.max_txs, dtype=np.int64),
            "reward": np.zeros(self.tw, dtype=np.uint64),
            "pub_b": np.zeros(self.bw, dtype=np.uint64),
            "pub_t": np.zeros(self.tw, dtype=np.uint64),
            "gleaves": np.zeros(self.bw, dtype=np.uint64),
            "v_b": np.zeros((self.n_miners, self.bw), dtype=np.uint64),
            "v_t": np.zeros((self.n_miners, self.tw), dtype=np.uint64),
            "v_leaves": np.zeros((self.n_miners, self.bw), dtype=np.uint64),
            "tmp_b": np.zeros(self.bw, dtype=np.uint64),
            "tmp_b2": np.zeros(self.bw, dtype=np.uint64),
            "tmp_t": np.zeros(self.tw, dtype=np.uint64),
        }
        self._arrays = arrays
        self._reach = arrays["reach"]
        self._children = arrays["children"]
        self._bcarried = arrays["bcarried"]
        self._btxclo = arrays["btxclo"]
        self._tclo = arrays["tclo"]
        self._depth = arrays["depth"]
        self._weight = arrays["weight"]
        self._score = arrays["score"]
        self._tturn = arrays["tturn"]
        self._reward = arrays["reward"]
        self._pub_b = arrays["pub_b"]
        self._pub_t = arrays["pub_t"]
        self._gleaves = arrays["gleaves"]
        self._v_b = arrays["v_b"]
        self._v_t = arrays["v_t"]
        self._v_leaves = arrays["v_leaves"]
        self._tmp_b = arrays["tmp_b"]
        self._tmp_b2 = arrays["tmp_b2"]
        self._tmp_t = arrays["tmp_t"]

        self._b_owner = []
        self._b_pointers = []
        self._b_carried = []
        self._t_serial = []
        self._t_reward_flag = []
        self._t_deps = []

        self.new_reward_tx(0)
        self.new_block(-1, (), (0,))
        self.publish_tx(0)
        self.publish_block(0)
        cdef Py_ssize_t m
        for m in range(self.n_miners):
            _set_bit(self._v_b[m], 0)
            _set_bit(self._v_t[m], 0)
            _set_bit(self._v_leaves[m], 0)

    # ---- creation ----

    def new_reward_tx(self, turn):
        cdef Py_ssize_t x = self.nt
        if x >= self.max_txs:
            raise RuntimeError("transaction capacity exceeded")
        self._tturn[x] = turn
        self._t_serial.append(0)
        self._t_reward_flag.append(True)
        self._t_deps.append(())
        _set_bit(self._tclo[x], x)
        _set_bit(self._reward, x)
        self.nt = x + 1
        return x

    def new_regular_tx(self, turn, serial, deps):
        cdef Py_ssize_t x = self.nt
        cdef Py_ssize_t d
        if x >= self.max_txs:
            raise RuntimeError("transaction capacity exceeded")
        _set_bit(self._tclo[x], x)
        for d in deps:
            _or_row(self._tclo[x], self._tclo[d], self.tw)
        self._tturn[x] = turn
        self._t_serial.append(serial)
        self._t_reward_flag.append(False)
        self._t_deps.append(tuple(deps))
        self.nt = x + 1
        return x

    def new_block(self, owner, pointers, carried):
        cdef Py_ssize_t b = self.nb
        cdef Py_ssize_t p, x
        cdef int64_t depth, best
        if b >= self.max_blocks:
            raise RuntimeError("block capacity exceeded")
        _set_bit(self._reach[b], b)
        best = -1
        for p in pointers:
            _or_row(self._reach[b], self._reach[p], self.bw)
            if best < 0 or self._depth[p] < best:
                best = self._depth[p]
        depth = 1 + best
        self._depth[b] = depth
        self._weight[b] = self._popcount_row(self._reach[b], self.bw) - 1
        self._score[b] = self.alpha * depth + (1.0 - self.alpha) * self._weight[b]
        for x in carried:
            _set_bit(self._bcarried[b], x)
            _or_row(self._btxclo[b], self._tclo[x], self.tw)
        _set_bit(self._gleaves, b)
        for p in pointers:
            _set_bit(self._children[p], b)
            _clear_bit(self._gleaves, p)
        self._b_owner.append(owner)
        self._b_pointers.append(tuple(pointers))
        self._b_carried.append(tuple(carried))
        self.nb = b + 1
        return b

    cdef int64_t _popcount_row(self, uint64_t[:] row, Py_ssize_t w) nogil:
        cdef int64_t total = 0
        cdef Py_ssize_t j
        for j in range(w):
            total += __builtin_popcountll(row[j])
        return total

    # ---- publication ----

    def publish_block(self, b):
        _set_bit(self._pub_b, b)

    def publish_tx(self, x):
        _set_bit(self._pub_t, x)

    # ---- per-miner visibility ----

    def reset_view(self, m):
        _zero_row(self._v_b[m], self.bw)
        _zero_row(self._v_t[m], self.tw)
        _zero_row(self._v_leaves[m], self.bw)
        _set_bit(self._v_b[m], 0)
        _set_bit(self._v_t[m], 0)
        _set_bit(self._v_leaves[m], 0)

    def admit(self, m, block_ids, tx_ids):
        """Reveal artifacts to miner m, taking closures (see the pure
        twin for the semantics)."""
        cdef Py_ssize_t mm = m
        cdef uint64_t[:] v = self._v_b[mm]
        cdef uint64_t[:] t = self._v_t[mm]
        cdef uint64_t[:] leaves = self._v_leaves[mm]
        cdef uint64_t[:] old = self._tmp_b
        cdef uint64_t[:] fresh = self._tmp_b2
        cdef Py_ssize_t b, x, j
        _copy_row(old, v, self.bw)
        for b in block_ids:
            _or_row(v, self._reach[b], self.bw)
        for j in range(self.bw):
            fresh[j] = v[j] & ~old[j]
        for x in tx_ids:
            _or_row(t, self._tclo[x], self.tw)
        cdef uint64_t word
        for j in range(self.bw):
            word = fresh[j]
            while word:
                b = j * 64 + __builtin_ctzll(word)
                word &= word - 1
                _or_row(t, self._btxclo[b], self.tw)
        _or_row(leaves, fresh, self.bw)
        for j in range(self.bw):
            word = leaves[j]
            while word:
                b = j * 64 + __builtin_ctzll(word)
                word &= word - 1
                if _intersects(self._children[b], v, self.bw):
                    _clear_bit(leaves, b)

    def unseen_public_blocks(self, m):
        cdef Py_ssize_t j
        for j in range(self.bw):
            self._tmp_b[j] = self._pub_b[j] & ~self._v_b[m, j]
        return _row_bits(self._tmp_b, self.bw)

    def unseen_public_txs(self, m):
        cdef Py_ssize_t j
        for j in range(self.tw):
            self._tmp_t[j] = self._pub_t[j] & ~self._v_t[m, j]
        return _row_bits(self._tmp_t, self.tw)

    # ---- ranking and extraction ----

    cdef list _top_row(self, uint64_t[:] leaf_row):
        # ranking ties on equal float scores fall back to the smaller
        # id, exactly like the pure twin's sort key
        ids = _row_bits(leaf_row, self.bw)
        ids.sort(key=lambda b: (-self._score[b], b))
        if self.k:
            ids = ids[: self.k]
        return ids

    cdef void _reach_union_into(self, uint64_t[:] dst, list block_ids):
        cdef Py_ssize_t b
        _zero_row(dst, self.bw)
        for b in block_ids:
            _or_row(dst, self._reach[b], self.bw)

    cdef void _carried_union_into(self, uint64_t[:] dst, uint64_t[:] vb_row):
        cdef Py_ssize_t j, b
        cdef uint64_t word
        _zero_row(dst, self.tw)
        for j in range(self.bw):
            word = vb_row[j]
            while word:
                b = j * 64 + __builtin_ctzll(word)
                word &= word - 1
                _or_row(dst, self._bcarried[b], self.tw)

    cdef object _row_to_int(self, uint64_t[:] row):
        # force little-endian words so the integer matches the pure
        # twin's bit positions on any host
        return int.from_bytes(np.asarray(row).astype("<u8", copy=False).tobytes(), "little")

    def global_valid_mask(self):
        self._reach_union_into(self._tmp_b, self._top_row(self._gleaves))
        return self._row_to_int(self._tmp_b)

    def view_valid_mask(self, m):
        self._reach_union_into(self._tmp_b, self._top_row(self._v_leaves[m]))
        return self._row_to_int(self._tmp_b)

    def global_pvt_mask(self):
        self._reach_union_into(self._tmp_b, self._top_row(self._gleaves))
        self._carried_union_into(self._tmp_t, self._tmp_b)
        return self._row_to_int(self._tmp_t)

    def view_pvt_mask(self, m):
        self._reach_union_into(self._tmp_b, self._top_row(self._v_leaves[m]))
        self._carried_union_into(self._tmp_t, self._tmp_b)
        return self._row_to_int(self._tmp_t)

    def honest_inputs(self, m, eta):
        """Pointers and carried txs an honest winner would choose (see
        the pure twin for the selection rule)."""
        cdef Py_ssize_t mm = m
        cdef Py_ssize_t limit = eta
        cdef list ptrs = self._top_row(self._v_leaves[mm])
        cdef uint64_t[:] pvt = self._tmp_t
        self._reach_union_into(self._tmp_b, ptrs)
        self._carried_union_into(pvt, self._tmp_b)
        cdef list chosen = []
        cdef Py_ssize_t j, x, jj
        cdef uint64_t word
        cdef bint closed
        for j in range(self.tw):
            if len(chosen) == limit:
                break
            word = self._v_t[mm, j] & ~pvt[j] & ~self._reward[j]
            while word:
                x = j * 64 + __builtin_ctzll(word)
                word &= word - 1
                closed = True
                for jj in range(self.tw):
                    if self._tclo[x, jj] & ~pvt[jj] != (
                        (<uint64_t>1) << (x & 63) if jj == (x >> 6) else 0
                    ):
                        closed = False
                        break
                if closed:
                    chosen.append(x)
                    if len(chosen) == limit:
                        break
        return ptrs, chosen

    def nature_pool(self, turn):
        """Valid txs new transactions may depend on (see the pure twin)."""
        cdef int64_t cut = turn
        self._reach_union_into(self._tmp_b, self._top_row(self._gleaves))
        self._carried_union_into(self._tmp_t, self._tmp_b)
        cdef list out = []
        cdef Py_ssize_t j, x
        cdef uint64_t word
        for j in range(self.tw):
            word = self._tmp_t[j]
            while word:
                x = j * 64 + __builtin_ctzll(word)
                word &= word - 1
                if self._tturn[x] < cut:
                    out.append(x)
        return out

    # ---- accessors ----

    def n_blocks(self):
        return self.nb

    def n_txs(self):
        return self.nt

    def block_owner(self, b):
        return self._b_owner[b]

    def block_pointers(self, b):
        return self._b_pointers[b]

    def block_carried(self, b):
        return self._b_carried[b]

    def block_depth(self, b):
        return self._depth[b]

    def block_weight(self, b):
        return self._weight[b]

    def block_score(self, b):
        return self._score[b]

    def tx_turn(self, x):
        return self._tturn[x]

    def tx_serial(self, x):
        return self._t_serial[x]

    def tx_is_reward(self, x):
        return self._t_reward_flag[x]

    def tx_deps(self, x):
        return self._t_deps[x]

    def view_blocks_mask(self, m):
        return self._row_to_int(self._v_b[m])

    def view_txs_mask(self, m):
        return self._row_to_int(self._v_t[m])

    def view_leaves_mask(self, m):
        return self._row_to_int(self._v_leaves[m])

    def public_blocks_mask(self):
        return self._row_to_int(self._pub_b)

    def public_txs_mask(self):
        return self._row_to_int(self._pub_t)
