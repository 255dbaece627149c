"""The editing controller: state construction, a linear cost-sensitive
multiclass learner, and dataset-aggregation imitation training.

The state at shot t is a dense 670-vector: one-hot encodings of the six most
recent predicted actions (most recent first) followed by the semantic vectors
of shots t-6 .. t+3. Out-of-range positions stay zero. Training rolls in with
the expert on the first pass and with the learned policy afterwards,
aggregating (state, Hamming cost) pairs and refitting on the union.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg.blas import dger

from autocut.corpus import ACTION_LABELS

N_ACTIONS = len(ACTION_LABELS)
HISTORY_SPAN = 6
SEM_DIM = 64
CONTEXT_BACK = 6
CONTEXT_FWD = 3
N_CONTEXT = CONTEXT_BACK + 1 + CONTEXT_FWD  # shots t-6 .. t+3
STATE_DIM = HISTORY_SPAN * N_ACTIONS + N_CONTEXT * SEM_DIM  # 670

DEFAULT_ITERATIONS = 32
DEFAULT_LEARNING_RATE = 0.05
DEFAULT_EPOCHS_PER_ITER = 1
DEFAULT_HOLDOUT_FRAC = 0.1

_HIST_BLOCK = HISTORY_SPAN * N_ACTIONS


def build_state(sem_matrix: np.ndarray, t: int, history) -> np.ndarray:
    """Assemble the 670-dim state for position t given the action history.

    `history` holds the labels predicted so far in sequence order, so
    history[-1] is the action taken at shot t-1.
    """
    n = sem_matrix.shape[0]
    if not 0 <= t < n:
        raise IndexError(f"position {t} out of range for {n} shots")
    if sem_matrix.shape[1] != SEM_DIM:
        raise ValueError(f"state construction expects {SEM_DIM}-dim semantics, got {sem_matrix.shape[1]}")
    s = np.zeros(STATE_DIM)
    m = len(history)
    for k in range(HISTORY_SPAN):
        if k < m:
            s[k * N_ACTIONS + (history[m - 1 - k] - 1)] = 1.0
    lo = max(0, t - CONTEXT_BACK)
    hi = min(n, t + CONTEXT_FWD + 1)
    dst = _HIST_BLOCK + (lo - (t - CONTEXT_BACK)) * SEM_DIM
    s[dst : dst + (hi - lo) * SEM_DIM] = sem_matrix[lo:hi].ravel()
    return s


@dataclass
class Policy:
    """Per-action linear cost predictors; predict = argmin of predicted cost."""

    weights: np.ndarray  # (N_ACTIONS, STATE_DIM)
    bias: np.ndarray  # (N_ACTIONS,)
    trained_iterations: int = 0
    hyperparameters: dict = field(default_factory=dict)
    corpus_manifest_sha256: str | None = None
    holdout_loss_trace: list = field(default_factory=list)

    @classmethod
    def zeros(cls) -> "Policy":
        return cls(weights=np.zeros((N_ACTIONS, STATE_DIM)), bias=np.zeros(N_ACTIONS))

    @property
    def is_fitted(self) -> bool:
        return self.trained_iterations > 0


def predict(policy: Policy, state: np.ndarray) -> int:
    """Lowest predicted cost wins; ties break to the smallest label."""
    scores = policy.weights @ state + policy.bias
    return int(np.argmin(scores)) + 1


def hamming_loss(predicted, expert) -> int:
    if len(predicted) != len(expert):
        raise ValueError(f"sequence lengths differ: {len(predicted)} vs {len(expert)}")
    return sum(1 for p, e in zip(predicted, expert) if p != e)


def hamming_cost(expert_label: int) -> np.ndarray:
    cost = np.ones(N_ACTIONS)
    cost[expert_label - 1] = 0.0
    return cost


_COST_TABLE = tuple(hamming_cost(label) for label in ACTION_LABELS)


def _fill_state(out: np.ndarray, sem: np.ndarray, t: int, history) -> None:
    # In-place variant of build_state for the training hot loop.
    out[:] = 0.0
    m = len(history)
    for k in range(m if m < HISTORY_SPAN else HISTORY_SPAN):
        out[k * N_ACTIONS + (history[m - 1 - k] - 1)] = 1.0
    n = sem.shape[0]
    lo = max(0, t - CONTEXT_BACK)
    hi = min(n, t + CONTEXT_FWD + 1)
    dst = _HIST_BLOCK + (lo - (t - CONTEXT_BACK)) * SEM_DIM
    out[dst : dst + (hi - lo) * SEM_DIM] = sem[lo:hi].ravel()


class AggregatedDataset:
    """(state, cost-vector) pairs accumulated across training iterations.

    Rollout visits are stored as references into the clip's semantic matrix
    and materialized to dense states on demand; storing a million dense
    670-vectors would need gigabytes.
    """

    def __init__(self):
        self._rows = []

    def __len__(self) -> int:
        return len(self._rows)

    def add_state(self, state: np.ndarray, cost) -> None:
        cost = np.asarray(cost, dtype=float)
        if cost.shape != (N_ACTIONS,):
            raise ValueError(f"cost vector must have length {N_ACTIONS}")
        if np.any(cost < 0) or not np.any(cost == 0.0):
            raise ValueError("costs must be non-negative with a zero-cost expert action")
        self._rows.append((np.asarray(state, dtype=float), cost))

    def add_visit(self, sem_matrix: np.ndarray, t: int, history, expert_label: int) -> None:
        self._rows.append((sem_matrix, t, tuple(history[-HISTORY_SPAN:]), expert_label))

    def materialize(self, i: int):
        row = self._rows[i]
        if len(row) == 2:
            return row
        sem, t, history, expert = row
        return build_state(sem, t, history), hamming_cost(expert)


def train_csc(
    dataset: AggregatedDataset,
    epochs: int = 1,
    learning_rate: float = DEFAULT_LEARNING_RATE,
    seed: int = 0,
) -> Policy:
    """One-against-all squared-loss regression of each action onto its cost.

    Online gradient descent over a seeded shuffle, learning rate decaying as
    1/sqrt(step). Updates are normalized per feature block (action-history
    one-hots, semantic context, bias), least-mean-squares style, so every
    block learns at a comparable rate whatever the embedding scale; a single
    joint normalization would starve the one-hot history of updates. Weights
    start at zero, so lr=0 returns the zero policy.
    """
    n = len(dataset)
    if n == 0:
        raise ValueError("cannot train on an empty dataset")
    rng = np.random.default_rng(seed)
    W = np.zeros((N_ACTIONS, STATE_DIM))
    WT = W.T  # Fortran-ordered view shared with W; dger updates it in place
    b = np.zeros(N_ACTIONS)
    rows = dataset._rows
    buf = np.empty(STATE_DIM)
    scaled = np.empty(STATE_DIM)
    two_lr = 2.0 * learning_rate
    step = 0
    for _ in range(epochs):
        for i in rng.permutation(n).tolist():
            row = rows[i]
            if len(row) == 2:
                state, cost = row
            else:
                sem, t, history, expert = row
                _fill_state(buf, sem, t, history)
                state, cost = buf, _COST_TABLE[expert - 1]
            step += 1
            rate = two_lr / math.sqrt(step)
            residual = W @ state
            residual += b
            residual -= cost
            hist, sem_part = state[:_HIST_BLOCK], state[_HIST_BLOCK:]
            np.divide(hist, 1.0 + hist @ hist, out=scaled[:_HIST_BLOCK])
            np.divide(sem_part, 1.0 + sem_part @ sem_part, out=scaled[_HIST_BLOCK:])
            dger(-rate, scaled, residual, a=WT, overwrite_a=1)
            residual *= rate
            b -= residual
        if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
            raise RuntimeError(
                f"training diverged after {step} updates (learning rate {learning_rate} too high?)"
            )
    policy = Policy(weights=W, bias=b, trained_iterations=1)
    return policy


def rollout(policy: Policy, sem_matrix: np.ndarray) -> list[int]:
    """Predict the action sequence left to right, feeding predictions back as history."""
    history: list[int] = []
    for t in range(sem_matrix.shape[0]):
        history.append(predict(policy, build_state(sem_matrix, t, history)))
    return history


def dagger_train(
    clips,
    iterations: int = DEFAULT_ITERATIONS,
    epochs_per_iter: int = DEFAULT_EPOCHS_PER_ITER,
    learning_rate: float = DEFAULT_LEARNING_RATE,
    holdout_frac: float = DEFAULT_HOLDOUT_FRAC,
    seed: int = 0,
):
    """Dataset-aggregation imitation learning over a labeled clip corpus.

    Pass 1 rolls in with the expert; later passes roll in with the current
    policy, so training states match the states met at inference. Every visit
    contributes a Hamming cost vector for the expert label. Returns the policy
    from the iteration with the lowest held-out loss plus the full loss trace
    (mean per-sequence held-out Hamming loss, one entry per iteration).
    """
    clips = list(clips)
    if len(clips) < 2:
        raise ValueError("corpus too small to split into train/held-out")
    master = np.random.default_rng(seed)
    order = master.permutation(len(clips))
    n_hold = max(1, int(round(holdout_frac * len(clips))))
    if n_hold >= len(clips):
        raise ValueError("holdout fraction leaves no training clips")
    hold_idx, train_idx = order[:n_hold], order[n_hold:]
    iter_seeds = [int(master.integers(0, 2**32)) for _ in range(iterations)]

    train = [(clips[i].semantic_matrix(), clips[i].labels) for i in train_idx]
    hold = [(clips[i].semantic_matrix(), clips[i].labels) for i in hold_idx]

    dataset = AggregatedDataset()
    policy = Policy.zeros()
    trace = []
    dataset_sizes = []
    best_loss = math.inf
    best = None
    for it in range(1, iterations + 1):
        expert_rollin = it == 1
        for sem, labels in train:
            history: list[int] = []
            for t in range(sem.shape[0]):
                dataset.add_visit(sem, t, history, labels[t])
                if expert_rollin:
                    history.append(labels[t])
                else:
                    history.append(predict(policy, build_state(sem, t, history)))
        dataset_sizes.append(len(dataset))
        policy = train_csc(dataset, epochs_per_iter, learning_rate, iter_seeds[it - 1])

        losses = [hamming_loss(rollout(policy, sem), labels) for sem, labels in hold]
        loss = float(np.mean(losses))
        trace.append(loss)
        if loss < best_loss:
            best_loss = loss
            best = (policy.weights.copy(), policy.bias.copy(), it)

    weights, bias, best_iter = best
    final = Policy(
        weights=weights,
        bias=bias,
        trained_iterations=best_iter,
        hyperparameters={
            "iterations": iterations,
            "epochs_per_iter": epochs_per_iter,
            "learning_rate": learning_rate,
            "holdout_frac": holdout_frac,
            "seed": seed,
            "dataset_sizes": dataset_sizes,
        },
        holdout_loss_trace=trace,
    )
    return final, trace


def save_policy(policy: Policy, path) -> None:
    obj = {
        "weights": [[float(v) for v in row] for row in policy.weights],
        "bias": [float(v) for v in policy.bias],
        "trained_iterations": policy.trained_iterations,
        "hyperparameters": policy.hyperparameters,
        "corpus_manifest_sha256": policy.corpus_manifest_sha256,
        "holdout_loss_trace": policy.holdout_loss_trace,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, allow_nan=False)
        fh.write("\n")


def load_policy(path) -> Policy:
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    weights = np.asarray(obj["weights"], dtype=float)
    bias = np.asarray(obj["bias"], dtype=float)
    if weights.shape != (N_ACTIONS, STATE_DIM) or bias.shape != (N_ACTIONS,):
        raise ValueError(f"{path}: policy weight shapes do not match {N_ACTIONS}x{STATE_DIM}")
    if not (np.all(np.isfinite(weights)) and np.all(np.isfinite(bias))):
        raise ValueError(f"{path}: policy contains non-finite weights")
    return Policy(
        weights=weights,
        bias=bias,
        trained_iterations=int(obj.get("trained_iterations", 0)),
        hyperparameters=obj.get("hyperparameters", {}),
        corpus_manifest_sha256=obj.get("corpus_manifest_sha256"),
        holdout_loss_trace=obj.get("holdout_loss_trace", []),
    )
