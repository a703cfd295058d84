"""Channel selection: greedy minimum-incremental-error, score baselines,
an exhaustive oracle, and salient-channel protection.

All selectors share the same contract: given query/key matrices, a pruning
ratio and a protected index set, they return a `PruneSelection` whose
pruned set is disjoint from the protected set and whose size is the
requested budget (clamped when protection leaves too few candidates).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from itertools import combinations

import numpy as np

from .core import ChannelMatrix, IndexSet, reconstruction_error_sq
from .errors import CapacityError
from .graph import DEFAULT_ENUMERATION_CAP, build_interaction_graph, quadratic_form

__all__ = [
    "ProtectionPolicy",
    "PruneSelection",
    "Selector",
    "clamp_proportion",
    "mies_select",
    "oracle_select",
    "protect_channels",
    "random_select",
    "select_channels",
    "think_scores",
    "think_select",
]


class Selector(str, Enum):
    """Available channel-selection strategies."""

    MIES = "mies"
    THINK = "think"
    RANDOM = "random"
    ORACLE = "oracle"


@dataclass(frozen=True)
class ProtectionPolicy:
    """Statistical shield for high-norm key channels.

    Channels whose column norm exceeds mean + threshold_sigma * std are
    counted, the resulting proportion is clamped to [a, b], and that many
    top-norm channels are excluded from pruning.
    """

    threshold_sigma: float = 1.0
    a: float = 0.01
    b: float = 0.125
    enabled: bool = True

    def __post_init__(self) -> None:
        if not 0.0 <= self.a <= self.b <= 1.0:
            raise ValueError(f"clamp bounds must satisfy 0 <= a <= b <= 1, got [{self.a}, {self.b}]")
        if self.threshold_sigma < 0.0:
            raise ValueError(f"threshold_sigma must be nonnegative, got {self.threshold_sigma}")

    @classmethod
    def disabled(cls) -> "ProtectionPolicy":
        return cls(enabled=False)


@dataclass(frozen=True, eq=False)
class PruneSelection:
    """Result of one selection run.

    score_trace holds one (channel, score) pair per pruned channel, in
    the order channels were removed. The score semantics depend on the
    selector: the greedy records its maintained score at selection time
    (the cumulative error of the set pruned so far), THINK records the
    static per-channel score, and RANDOM/ORACLE record the cumulative
    error as the final set is assembled in ascending index order.
    step_scores, when requested from `mies_select`, snapshots
    (candidates, scores) before every greedy step.
    """

    selector: Selector
    lam: float
    n_prune: int
    protected: IndexSet
    pruned: IndexSet
    score_trace: tuple[tuple[int, float], ...]
    error_sq: float
    budget_clamped: bool = False
    step_scores: tuple[tuple[np.ndarray, np.ndarray], ...] | None = None


def _check_inputs(q: ChannelMatrix, k: ChannelMatrix, lam: float, protected: IndexSet) -> None:
    if q.cols != k.cols:
        raise ValueError(f"channel count mismatch: q has {q.cols}, k has {k.cols}")
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"pruning ratio must be in [0, 1], got {lam}")
    protected.validate_within(q.cols)


def _budget(d: int, lam: float, protected: IndexSet) -> tuple[int, bool]:
    """ceil(lam * d), clamped to the number of unprotected channels."""
    requested = math.ceil(lam * d)
    available = d - len(protected)
    return min(requested, available), requested > available


def _candidates(d: int, protected: IndexSet) -> np.ndarray:
    mask = np.ones(d, dtype=bool)
    if len(protected) > 0:
        mask[protected.as_array()] = False
    return np.flatnonzero(mask)


def _cumulative_trace(w: np.ndarray, members: np.ndarray) -> tuple[tuple[int, float], ...]:
    """Cumulative error after each member joins the set in the given order."""
    trace = []
    total = 0.0
    for t, j in enumerate(members):
        total += w[j, j] + 2.0 * w[j, members[:t]].sum()
        trace.append((int(j), float(total)))
    return tuple(trace)


def think_scores(q: ChannelMatrix, k: ChannelMatrix) -> np.ndarray:
    """Per-channel importance ||q_j|| * ||k_j||.

    This is the Frobenius norm of the rank-1 outer product q_j k_j^T, the
    independent score that ignores channel interactions.
    """
    if q.cols != k.cols:
        raise ValueError(f"channel count mismatch: q has {q.cols}, k has {k.cols}")
    q_norms = np.sqrt(np.sum(q.data * q.data, axis=0))
    k_norms = np.sqrt(np.sum(k.data * k.data, axis=0))
    return q_norms * k_norms


def think_select(
    q: ChannelMatrix, k: ChannelMatrix, lam: float, protected: IndexSet = IndexSet.empty()
) -> PruneSelection:
    """Prune the lowest-scoring unprotected channels by independent score.

    Ties break toward the lower channel index.
    """
    _check_inputs(q, k, lam, protected)
    n_prune, clamped = _budget(q.cols, lam, protected)
    scores = think_scores(q, k)
    cand = _candidates(q.cols, protected)
    order = np.argsort(scores[cand], kind="stable")
    chosen = cand[order[:n_prune]]
    pruned = IndexSet(tuple(sorted(int(j) for j in chosen)))
    trace = tuple((int(j), float(scores[j])) for j in chosen)
    error = reconstruction_error_sq(q, k, pruned)
    return PruneSelection(
        selector=Selector.THINK,
        lam=lam,
        n_prune=n_prune,
        protected=protected,
        pruned=pruned,
        score_trace=trace,
        error_sq=error,
        budget_clamped=clamped,
    )


def mies_select(
    q: ChannelMatrix,
    k: ChannelMatrix,
    lam: float,
    protected: IndexSet = IndexSet.empty(),
    record_steps: bool = False,
) -> PruneSelection:
    """Greedy selection that minimizes the cumulative reconstruction error.

    Each candidate's score is the total error of the pruned set extended
    by that candidate: scores start at the self-importance W_jj, and
    after pruning the arg-min channel j* every remaining score picks up
    the interaction term 2 * W[c, j*] plus the error increment of j*
    itself. The increment is the same for every candidate, so the
    selection order is exactly that of updating with the interaction
    terms alone; maintaining the full cumulative error keeps the scores
    directly comparable against fresh quadratic-form evaluation. Ties
    break toward the lower channel index. Protected channels never enter
    the candidate set.

    With `record_steps`, the result carries a (candidates, scores)
    snapshot taken before each greedy step, which is what the soundness
    self-check replays against direct quadratic-form evaluation.
    """
    _check_inputs(q, k, lam, protected)
    d = q.cols
    n_prune, clamped = _budget(d, lam, protected)
    g = build_interaction_graph(q, k)
    scores = np.diag(g.w).copy()
    active = np.ones(d, dtype=bool)
    if len(protected) > 0:
        active[protected.as_array()] = False

    order: list[int] = []
    trace: list[tuple[int, float]] = []
    steps: list[tuple[np.ndarray, np.ndarray]] = []
    accumulated = 0.0  # f(pruned so far)
    for _ in range(n_prune):
        if record_steps:
            steps.append((np.flatnonzero(active), scores[active].copy()))
        masked = np.where(active, scores, np.inf)
        j = int(np.argmin(masked))  # first minimum, so the lowest index wins ties
        chosen = float(scores[j])
        trace.append((j, chosen))
        order.append(j)
        active[j] = False
        scores[active] += 2.0 * g.w[active, j] + (chosen - accumulated)
        accumulated = chosen

    pruned = IndexSet(tuple(sorted(order)))
    return PruneSelection(
        selector=Selector.MIES,
        lam=lam,
        n_prune=n_prune,
        protected=protected,
        pruned=pruned,
        score_trace=tuple(trace),
        error_sq=quadratic_form(g, pruned),
        budget_clamped=clamped,
        step_scores=tuple(steps) if record_steps else None,
    )


def oracle_select(
    q: ChannelMatrix,
    k: ChannelMatrix,
    lam: float,
    protected: IndexSet = IndexSet.empty(),
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> PruneSelection:
    """Exhaustive minimizer of the pruning error over all feasible sets.

    Enumerates every size-n_prune subset of the unprotected channels and
    returns the global minimum of the quadratic set function; ties go to
    the lexicographically smallest index set. Raises CapacityError when
    the subset count exceeds `cap`.
    """
    _check_inputs(q, k, lam, protected)
    d = q.cols
    n_prune, clamped = _budget(d, lam, protected)
    g = build_interaction_graph(q, k)
    cand = _candidates(d, protected)

    if n_prune == 0:
        best: tuple[int, ...] = ()
    else:
        total = math.comb(len(cand), n_prune)
        if total > cap:
            raise CapacityError(
                f"C({len(cand)}, {n_prune}) = {total} subsets exceed the enumeration cap {cap}"
            )
        best = ()
        best_value = math.inf
        chunk_size = 4096
        combo_iter = combinations(cand.tolist(), n_prune)
        while True:
            chunk = []
            for combo in combo_iter:
                chunk.append(combo)
                if len(chunk) == chunk_size:
                    break
            if not chunk:
                break
            rows = np.asarray(chunk, dtype=np.intp)
            values = g.w[rows[:, :, None], rows[:, None, :]].sum(axis=(1, 2))
            pos = int(np.argmin(values))
            if values[pos] < best_value:  # strict: first minimum is lexicographically smallest
                best_value = float(values[pos])
                best = chunk[pos]

    pruned = IndexSet(best)
    members = pruned.as_array()
    return PruneSelection(
        selector=Selector.ORACLE,
        lam=lam,
        n_prune=n_prune,
        protected=protected,
        pruned=pruned,
        score_trace=_cumulative_trace(g.w, members),
        error_sq=quadratic_form(g, pruned),
        budget_clamped=clamped,
    )


def random_select(
    q: ChannelMatrix,
    k: ChannelMatrix,
    lam: float,
    protected: IndexSet = IndexSet.empty(),
    seed: int = 0,
) -> PruneSelection:
    """Uniform random baseline over the unprotected channels."""
    _check_inputs(q, k, lam, protected)
    n_prune, clamped = _budget(q.cols, lam, protected)
    cand = _candidates(q.cols, protected)
    rng = np.random.default_rng(seed)
    chosen = rng.choice(cand, size=n_prune, replace=False) if n_prune else np.array([], dtype=np.intp)
    pruned = IndexSet(tuple(sorted(int(j) for j in chosen)))
    members = pruned.as_array()
    sub_q = q.data[:, members]
    sub_k = k.data[:, members]
    w_sub = (sub_q.T @ sub_q) * (sub_k.T @ sub_k)
    local = _cumulative_trace(w_sub, np.arange(len(members)))
    trace = tuple((int(members[i]), total) for i, (_, total) in enumerate(local))
    return PruneSelection(
        selector=Selector.RANDOM,
        lam=lam,
        n_prune=n_prune,
        protected=protected,
        pruned=pruned,
        score_trace=trace,
        error_sq=reconstruction_error_sq(q, k, pruned),
        budget_clamped=clamped,
    )


def clamp_proportion(p: float, a: float, b: float) -> float:
    """Clamp a raw protected proportion to the policy bounds [a, b]."""
    return min(max(p, a), b)


def protect_channels(k: ChannelMatrix, policy: ProtectionPolicy) -> IndexSet:
    """Channels whose key-column norm is an outlier under the policy.

    The threshold is mean + threshold_sigma * std of all column norms
    (population std, divisor d). The raw exceedance proportion is clamped
    to [a, b] and ceil(p * d) top-norm channels are returned, ties going
    to the lower index. A disabled policy protects nothing.
    """
    if not policy.enabled:
        return IndexSet.empty()
    d = k.cols
    norms = np.sqrt(np.sum(k.data * k.data, axis=0))
    tau = norms.mean() + policy.threshold_sigma * norms.std()
    count = int(np.sum(norms > tau))
    p_raw = count / d
    p_protect = clamp_proportion(p_raw, policy.a, policy.b)
    if p_protect == p_raw:
        n_protect = count
    else:
        n_protect = math.ceil(p_protect * d)
    if n_protect == 0:
        return IndexSet.empty()
    by_norm_desc = np.lexsort((np.arange(d), -norms))
    return IndexSet(tuple(sorted(int(j) for j in by_norm_desc[:n_protect])))


def select_channels(
    selector: Selector,
    q: ChannelMatrix,
    k: ChannelMatrix,
    lam: float,
    protected: IndexSet = IndexSet.empty(),
    seed: int = 0,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> PruneSelection:
    """Dispatch to the selector named by `selector`."""
    if selector == Selector.MIES:
        return mies_select(q, k, lam, protected)
    if selector == Selector.THINK:
        return think_select(q, k, lam, protected)
    if selector == Selector.RANDOM:
        return random_select(q, k, lam, protected, seed=seed)
    if selector == Selector.ORACLE:
        return oracle_select(q, k, lam, protected, cap=cap)
    raise ValueError(f"unknown selector {selector!r}")
