"""Outcome measures over a finished run.

All functions take the final LedgerState; blocks outside the valid
sub-DAG at the horizon are orphans and earn nothing.  Genesis has no
owner and is excluded from share and orphan accounting.
"""

from __future__ import annotations

from dataclasses import dataclass

from .dag import REGULAR


@dataclass(frozen=True)
class TrialMetrics:
    shares: tuple          # per-miner fraction of valid non-genesis blocks
    surplus: tuple         # share_i - h_i
    pow_efficiency: float  # included regular txs / (T * lam)
    orphan_rate: float
    lag: int


def reward_shares(state):
    """share_i = (valid non-genesis blocks owned by i) / (all valid
    non-genesis blocks)."""
    valid = state.valid_block_ids()
    total = len(valid) - 1      # genesis is always valid and unowned
    if total <= 0:
        raise ValueError("no valid non-genesis blocks; shares undefined")
    counts = [0] * state.n_miners
    for b in valid:
        owner = state.owner_of(b)
        if owner is not None:
            counts[owner] += 1
    return tuple(c / total for c in counts)


def surplus(shares, params):
    return tuple(s - m.hash for s, m in zip(shares, params.miners))


def _included_regular_turns(state):
    return [tid.turn for tid in state.present_tx_ids() if tid.kind == REGULAR]


def pow_efficiency(state):
    """Fraction of all nature-published transactions that made it into
    the valid sub-DAG by the horizon."""
    params = state.params
    included = len(_included_regular_turns(state))
    return included / (params.horizon * params.lam)


def orphan_rate(state):
    valid_non_genesis = len(state.valid_block_ids()) - 1
    return 1.0 - valid_non_genesis / state.params.horizon


def lag(state):
    """Horizon minus the creation turn of the newest included regular
    tx; the full horizon when nothing was included."""
    turns = _included_regular_turns(state)
    horizon = state.params.horizon
    return horizon - max(turns) if turns else horizon


def mean_inclusion_delay(state):
    """Average turns from creation to first block inclusion over regular
    txs that were included anywhere; None if none were.  Alternative
    latency reading to `lag`, not used by the standard experiments."""
    delays = [
        first_block - tid.turn
        for tid, first_block in state.pending_inclusion_turn().items()
        if first_block is not None
    ]
    if not delays:
        return None
    return sum(delays) / len(delays)


def trial_metrics(state) -> TrialMetrics:
    shares = reward_shares(state)
    return TrialMetrics(
        shares=shares,
        surplus=surplus(shares, state.params),
        pow_efficiency=pow_efficiency(state),
        orphan_rate=orphan_rate(state),
        lag=lag(state),
    )
