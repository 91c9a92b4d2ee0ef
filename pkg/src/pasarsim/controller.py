"""On-device stopping rules.

Per round, the adaptive controller runs two phases over the active packets:

  Phase 1 repeatedly terminates every packet whose average BER sits at or
  below its sensitivity-scaled threshold beta_res / (alpha * s_j * |V|),
  deducting the charged loss alpha * s_j * Pbar_j and shrinking the set until
  no packet qualifies.

  Phase 2 sorts the survivors by charged cost and terminates the longest
  affordable prefix.

The combined ack set equals the plain sort-by-cost greedy rule, which itself
maximizes the number of terminations under the residual budget; both oracles
are provided for verification.  The uniform baseline rule instead compares
every packet against the single threshold beta_total / (alpha * sum_j s_j).
"""

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import DomainError, StateError
from .quantcodec import loss_scale

#: Hard cap on Phase-1 epochs.  The active set strictly shrinks every epoch
#: that continues, so hitting the cap signals a bug, not a big instance.
MAX_EPOCHS = 64

#: Relative slack for budget comparisons, scaled by the round's entry budget.
BUDGET_SLACK_REL = 1e-12

BRUTE_FORCE_LIMIT = 20


@dataclass(frozen=True)
class ControlState:
    """Snapshot of the controller at the start of a round."""

    active: frozenset
    beta_res: float
    epoch: int = 1

    def __post_init__(self):
        object.__setattr__(self, "active", frozenset(self.active))


@dataclass(frozen=True)
class RoundDecision:
    """ACK/NACK split for one round plus the carried-over budget."""

    ack: frozenset
    nack: frozenset
    beta_res_next: float
    epochs_used: int


def termination_threshold(beta_res: float, s_j: float, active_count: int,
                          n: int) -> float:
    """Per-packet BER threshold; zero-sensitivity packets get +inf."""
    if active_count < 1:
        raise DomainError("threshold undefined for an empty active set")
    if s_j < 0:
        raise DomainError("packet sensitivity must be non-negative")
    if beta_res < 0:
        raise DomainError("residual budget must be non-negative")
    if s_j == 0.0:
        return float("inf")
    return beta_res / (loss_scale(n) * s_j * active_count)


def pasar_round(state: ControlState, costs: Mapping[int, tuple], n: int,
                slack: float = None) -> RoundDecision:
    """Run both phases of the adaptive stopping rule for one round.

    `costs` maps packet id -> (s_j, Pbar_j).  `slack` is the absolute budget
    slack for prefix-fit comparisons; defaults to BUDGET_SLACK_REL times the
    round's entry budget.
    """
    if state.beta_res < 0:
        raise StateError(f"negative residual budget {state.beta_res}")
    missing = [j for j in state.active if j not in costs]
    if missing:
        raise DomainError(f"costs missing for active packets {sorted(missing)}")
    if slack is None:
        slack = BUDGET_SLACK_REL * state.beta_res

    alpha = loss_scale(n)
    beta = state.beta_res
    active = set(state.active)
    cost_of = {}
    for j in active:
        s_j, p_bar = costs[j]
        if s_j < 0:
            raise DomainError(f"negative sensitivity for packet {j}")
        cost_of[j] = alpha * s_j * p_bar

    ack = set()
    epochs_used = 0
    # Phase 1: threshold filtering.  Pbar <= beta/(alpha*s*|V|) is exactly
    # cost <= beta/|V|, with s == 0 always passing.
    while active:
        if epochs_used >= MAX_EPOCHS:
            raise StateError("Phase-1 epoch cap exceeded; the active set must shrink")
        count = len(active)
        terminated = []
        for j in active:
            s_j, p_bar = costs[j]
            if p_bar <= termination_threshold(beta, s_j, count, n):
                terminated.append(j)
        if not terminated:
            break
        epochs_used += 1
        beta = max(0.0, beta - sum(cost_of[j] for j in terminated))
        active.difference_update(terminated)
        ack.update(terminated)

    # Phase 2: greedy refinement on the survivors.
    spent = 0.0
    for j in sorted(active, key=lambda j: (cost_of[j], j)):
        if spent + cost_of[j] <= beta + slack:
            spent += cost_of[j]
            ack.add(j)
        else:
            break
    active.difference_update(ack)
    beta = max(0.0, beta - spent)

    return RoundDecision(ack=frozenset(ack), nack=frozenset(active),
                         beta_res_next=beta, epochs_used=epochs_used)


def uniform_round(active, avg_bers: Mapping[int, float], s_all: Sequence[float],
                  beta_total: float, n: int, beta_res: float = None) -> RoundDecision:
    """Fixed-threshold baseline rule shared by the conventional schemes.

    Every active packet is acked once its average BER reaches
    beta_total / (alpha * sum(s_all)); a degenerate all-zero table carries no
    loss, so everything acks.  `beta_res` only feeds the bookkeeping field of
    the decision; the threshold itself never adapts.
    """
    if beta_total < 0:
        raise DomainError("loss budget must be non-negative")
    alpha = loss_scale(n)
    s_total = float(sum(s_all))
    threshold = float("inf") if s_total == 0.0 else beta_total / (alpha * s_total)
    if beta_res is None:
        beta_res = beta_total

    ack, nack, spent = set(), set(), 0.0
    for j in active:
        if avg_bers[j] <= threshold:
            ack.add(j)
            spent += alpha * s_all[j] * avg_bers[j]
        else:
            nack.add(j)
    return RoundDecision(ack=frozenset(ack), nack=frozenset(nack),
                         beta_res_next=beta_res - spent, epochs_used=1)


def greedy_oracle(costs: Sequence[float], budget: float) -> list:
    """Sort-by-cost greedy selection; ties break on the lower index.

    Returns the selected indices in ascending index order.
    """
    if budget < 0:
        raise DomainError("budget must be non-negative")
    if any(c < 0 for c in costs):
        raise DomainError("costs must be non-negative")
    selected = []
    spent = 0.0
    for j in sorted(range(len(costs)), key=lambda j: (costs[j], j)):
        if spent + costs[j] <= budget:
            spent += costs[j]
            selected.append(j)
        else:
            break
    return sorted(selected)


def brute_force_oracle(costs: Sequence[float], budget: float) -> int:
    """Exhaustive maximum number of items whose costs fit the budget."""
    if len(costs) > BRUTE_FORCE_LIMIT:
        raise DomainError(
            f"instance with {len(costs)} items exceeds the brute-force cap "
            f"of {BRUTE_FORCE_LIMIT}"
        )
    if budget < 0:
        raise DomainError("budget must be non-negative")
    best = 0
    indices = range(len(costs))
    for size in range(len(costs), 0, -1):
        if size <= best:
            break
        for subset in itertools.combinations(indices, size):
            if sum(costs[j] for j in subset) <= budget:
                best = size
                break
    return best
