"""The three associative classifiers: nearest neighbour, similarity-kernel
exemplar model (GCM), and a three-layer logistic backprop network.

All three consume fixed-length numeric vectors and emit per-class graded
scores plus an argmax decision.  Classes are kept in a canonical order,
sorted by descending training type frequency then by name, so the first
maximal score implements the tie-break rule (prefer the more frequent
class, then the lexicographically first name) everywhere.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .dataset import EncodedNoun

# Queries are processed in blocks to bound the size of the pairwise
# distance matrix on large exemplar sets.
_BLOCK = 256


def _class_order(labels) -> list:
    counts = Counter(labels)
    return sorted(counts, key=lambda c: (-counts[c], str(c)))


def _sq_distances(X: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """(len(Q), len(X)) squared Euclidean distances.

    Uses the ||x||^2 - 2 x.q + ||q||^2 expansion so the working set stays
    at one matrix instead of a (queries, exemplars, dim) block.  Exact for
    small-integer-valued vectors (binary feature bundles), and the single
    shared formula keeps tie behaviour identical across every code path.
    """
    x2 = np.einsum("ij,ij->i", X, X)
    q2 = np.einsum("ij,ij->i", Q, Q)
    sq = x2[None, :] - 2.0 * (Q @ X.T) + q2[:, None]
    np.maximum(sq, 0.0, out=sq)
    return sq


@dataclass(frozen=True, eq=False)
class ExemplarMemory:
    """Stored exemplars with their labels and the canonical class order."""

    vectors: np.ndarray  # (n, d) float64
    labels: list
    class_set: list
    class_counts: dict
    label_rank: np.ndarray  # per-exemplar index into class_set

    @classmethod
    def from_pairs(cls, vectors, labels) -> "ExemplarMemory":
        X = np.ascontiguousarray(np.asarray(vectors, dtype=np.float64))
        if X.ndim != 2 or len(X) == 0:
            raise ValueError("memory requires a non-empty 2-D exemplar array")
        labels = list(labels)
        if len(labels) != len(X):
            raise ValueError("vectors and labels must have equal length")
        order = _class_order(labels)
        index = {c: i for i, c in enumerate(order)}
        return cls(
            vectors=X,
            labels=labels,
            class_set=order,
            class_counts=dict(Counter(labels)),
            label_rank=np.array([index[l] for l in labels], dtype=np.intp),
        )

    @classmethod
    def from_encoded(cls, nouns: list[EncodedNoun]) -> "ExemplarMemory":
        if not nouns:
            raise ValueError("memory requires at least one exemplar")
        return cls.from_pairs([n.vector for n in nouns], [n.label for n in nouns])

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def _check_query(self, query: np.ndarray) -> np.ndarray:
        q = np.asarray(query, dtype=np.float64)
        if q.shape != (self.dim,):
            raise ValueError(f"query length {q.shape} does not match memory dim {self.dim}")
        return q


@dataclass(frozen=True, eq=False)
class ClassifierResponse:
    """Per-class graded scores (aligned with ``classes``) and the decision."""

    classes: list
    scores: np.ndarray
    decision: object


# --------------------------------------------------------------------------
# Nearest neighbour
# --------------------------------------------------------------------------


def nn_classify(memory: ExemplarMemory, query) -> tuple[object, float]:
    """Class of the minimum-Euclidean-distance exemplar, and that distance.

    Exact distance ties between exemplars of different classes resolve in
    canonical class order.
    """
    q = memory._check_query(query)
    sq = _sq_distances(memory.vectors, q[None, :])[0]
    best = sq.min()
    candidates = np.flatnonzero(sq == best)
    rank = memory.label_rank[candidates].min()
    return memory.class_set[rank], math.sqrt(best)


def nn_decide_batch(memory: ExemplarMemory, queries) -> tuple[list, np.ndarray]:
    """Vectorized nn_classify over rows of ``queries``.

    Returns (decisions, distances); identical to calling nn_classify per
    row, including tie handling.
    """
    Q = np.ascontiguousarray(np.asarray(queries, dtype=np.float64))
    if Q.ndim != 2 or Q.shape[1] != memory.dim:
        raise ValueError("queries must be a 2-D array matching memory dim")
    decisions = []
    distances = np.empty(len(Q), dtype=np.float64)
    n_rank = memory.label_rank
    for start in range(0, len(Q), _BLOCK):
        block = Q[start : start + _BLOCK]
        sq = _sq_distances(memory.vectors, block)
        best = sq.min(axis=1)
        for row in range(len(block)):
            candidates = np.flatnonzero(sq[row] == best[row])
            decisions.append(memory.class_set[n_rank[candidates].min()])
        distances[start : start + len(block)] = np.sqrt(best)
    return decisions, distances


def nn_leave_one_out(nouns: list[EncodedNoun]) -> float:
    """Accuracy when each item is classified by its nearest other item."""
    if len(nouns) < 2:
        raise ValueError("leave-one-out requires at least 2 entries")
    memory = ExemplarMemory.from_encoded(nouns)
    X = memory.vectors
    rank = memory.label_rank
    correct = 0
    for start in range(0, len(X), _BLOCK):
        block = X[start : start + _BLOCK]
        sq = _sq_distances(X, block)
        for row in range(len(block)):
            i = start + row
            d = sq[row].copy()
            d[i] = np.inf
            best = d.min()
            candidates = np.flatnonzero(d == best)
            decision = memory.class_set[rank[candidates].min()]
            if decision == memory.labels[i]:
                correct += 1
    return correct / len(X)


# --------------------------------------------------------------------------
# Generalized Context Model
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GcmParams:
    """Similarity-kernel parameters: eta = exp(-(d/s)^p).

    ``p=2`` gives a gaussian kernel, ``p=1`` exponential decay.  Optional
    per-class ``biases`` must be in [0, 1] and sum to 1; they are omitted
    by default to keep the parameter count down.  Optional per-exemplar
    ``likelihoods`` weight each stored item (presentation frequency);
    the default presents every exemplar once with equal weight.
    """

    s: float
    p: int = 2
    biases: dict | None = None
    likelihoods: np.ndarray | None = None

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError("scale s must be positive")
        if self.p not in (1, 2):
            raise ValueError("kernel exponent p must be 1 or 2")
        if self.biases is not None:
            values = np.array(list(self.biases.values()), dtype=np.float64)
            if np.any(values < 0) or np.any(values > 1):
                raise ValueError("biases must lie in [0, 1]")
            if abs(values.sum() - 1.0) > 1e-9:
                raise ValueError("biases must sum to 1")


def _gcm_prob_matrix(memory: ExemplarMemory, params: GcmParams, Q: np.ndarray) -> np.ndarray:
    """(n_queries, n_classes) probability matrix, classes in canonical order."""
    n_classes = len(memory.class_set)
    d = np.sqrt(_sq_distances(memory.vectors, Q))
    expo = (d / params.s) ** params.p
    # subtract the per-query minimum exponent: rescales every class score
    # by the same factor, so probabilities are unchanged but far queries
    # cannot underflow to an all-zero row
    expo -= expo.min(axis=1, keepdims=True)
    eta = np.exp(-expo)
    if params.likelihoods is not None:
        like = np.asarray(params.likelihoods, dtype=np.float64)
        if like.shape != (len(memory),):
            raise ValueError("likelihoods must have one weight per exemplar")
        eta = eta * like
    onehot = np.zeros((len(memory), n_classes), dtype=np.float64)
    onehot[np.arange(len(memory)), memory.label_rank] = 1.0
    strengths = eta @ onehot
    if params.biases is not None:
        b = np.array([params.biases.get(c, 0.0) for c in memory.class_set], dtype=np.float64)
        strengths = strengths * b
    return strengths / strengths.sum(axis=1, keepdims=True)


def gcm_classify(memory: ExemplarMemory, params: GcmParams, query) -> ClassifierResponse:
    """Normalized per-class response strengths for one query.

    The strength of class J is the (bias-weighted) sum over J's exemplars
    of likelihood times kernel similarity, normalized across classes.
    """
    q = memory._check_query(query)
    probs = _gcm_prob_matrix(memory, params, q[None, :])[0]
    return ClassifierResponse(
        classes=list(memory.class_set),
        scores=probs,
        decision=memory.class_set[int(np.argmax(probs))],
    )


def gcm_decide_batch(memory: ExemplarMemory, params: GcmParams, queries) -> tuple[list, np.ndarray]:
    """Vectorized decisions and max-probabilities over query rows."""
    Q = np.ascontiguousarray(np.asarray(queries, dtype=np.float64))
    decisions = []
    max_probs = np.empty(len(Q), dtype=np.float64)
    for start in range(0, len(Q), _BLOCK):
        probs = _gcm_prob_matrix(memory, params, Q[start : start + _BLOCK])
        idx = np.argmax(probs, axis=1)
        decisions.extend(memory.class_set[i] for i in idx)
        max_probs[start : start + len(probs)] = probs[np.arange(len(probs)), idx]
    return decisions, max_probs


def gcm_accuracy(memory: ExemplarMemory, params: GcmParams, eval_set: list[EncodedNoun]) -> float:
    decisions, _ = gcm_decide_batch(memory, params, [n.vector for n in eval_set])
    return sum(d == n.label for d, n in zip(decisions, eval_set)) / len(eval_set)


def gcm_optimize_scale(
    memory: ExemplarMemory, eval_set: list[EncodedNoun], p: int, grid
) -> tuple[float, float]:
    """Grid point maximizing eval-set accuracy; ties go to the smallest s."""
    grid = list(grid)
    if not grid:
        raise ValueError("scale grid must be non-empty")
    if not eval_set:
        raise ValueError("eval_set must be non-empty")
    best = None
    for s in sorted(grid):
        acc = gcm_accuracy(memory, GcmParams(s=s, p=p), eval_set)
        if best is None or acc > best[1]:
            best = (s, acc)
    return best


# --------------------------------------------------------------------------
# Three-layer backprop network
# --------------------------------------------------------------------------


def _logistic(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass(eq=False)
class MlpModel:
    """Feed-forward net with one logistic hidden layer and logistic outputs."""

    w_hidden: np.ndarray  # (hidden, inputs)
    b_hidden: np.ndarray  # (hidden,)
    w_output: np.ndarray  # (classes, hidden)
    b_output: np.ndarray  # (classes,)
    class_set: list
    metadata: dict = field(default_factory=dict)

    @property
    def input_dim(self) -> int:
        return self.w_hidden.shape[1]

    @property
    def hidden_count(self) -> int:
        return self.w_hidden.shape[0]

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        hidden = _logistic(self.w_hidden @ x + self.b_hidden)
        output = _logistic(self.w_output @ hidden + self.b_output)
        return hidden, output


def mlp_loss(model: MlpModel, x: np.ndarray, target: np.ndarray) -> float:
    """Half sum-of-squares error on the logistic outputs for one pattern."""
    _, out = model.forward(x)
    return 0.5 * float(np.sum((out - target) ** 2))


def mlp_gradients(model: MlpModel, x: np.ndarray, target: np.ndarray):
    """Backprop gradients of mlp_loss w.r.t. (w_hidden, b_hidden, w_output, b_output)."""
    hidden, out = model.forward(x)
    delta_out = (out - target) * out * (1.0 - out)
    delta_hidden = (model.w_output.T @ delta_out) * hidden * (1.0 - hidden)
    return (
        np.outer(delta_hidden, x),
        delta_hidden,
        np.outer(delta_out, hidden),
        delta_out,
    )


def mlp_train(
    train: list[EncodedNoun],
    hidden: int,
    epochs: int,
    seed: int,
    rate: float = 0.25,
    momentum: float = 0.9,
) -> MlpModel:
    """Per-pattern backprop training with momentum, deterministic per seed.

    Targets are one-hot over the canonical class order of the training
    set.  Weights start uniform in [-0.1, 0.1]; patterns are visited in a
    freshly shuffled order every epoch.  Rate, momentum, and initialization
    are artifact defaults (configurable), not empirical claims.
    """
    model, _ = _mlp_train_checkpoints(train, hidden, [epochs], seed, rate, momentum)
    return model


def _mlp_train_checkpoints(train, hidden, checkpoint_epochs, seed, rate, momentum, eval_set=None):
    """Train once up to max(checkpoint_epochs), snapshotting at each checkpoint.

    Returns (final model, list of (epochs, model-or-accuracy)).  When
    ``eval_set`` is given the checkpoint list carries accuracies and the
    final model is the last checkpoint; training states at intermediate
    checkpoints are identical to shorter runs with the same seed.
    """
    if not train:
        raise ValueError("training set must be non-empty")
    if hidden < 1:
        raise ValueError("hidden must be >= 1")
    checkpoints = sorted(set(checkpoint_epochs))
    if not checkpoints or checkpoints[0] < 1:
        raise ValueError("epochs must be >= 1")
    if rate <= 0:
        raise ValueError("rate must be positive")
    if momentum < 0:
        raise ValueError("momentum must be non-negative")

    class_set = _class_order([n.label for n in train])
    index = {c: i for i, c in enumerate(class_set)}
    X = np.ascontiguousarray([n.vector for n in train], dtype=np.float64)
    n_in = X.shape[1]
    n_out = len(class_set)
    targets = np.zeros((len(train), n_out), dtype=np.float64)
    for i, noun in enumerate(train):
        targets[i, index[noun.label]] = 1.0

    rng = np.random.default_rng(seed)
    model = MlpModel(
        w_hidden=rng.uniform(-0.1, 0.1, size=(hidden, n_in)),
        b_hidden=rng.uniform(-0.1, 0.1, size=hidden),
        w_output=rng.uniform(-0.1, 0.1, size=(n_out, hidden)),
        b_output=rng.uniform(-0.1, 0.1, size=n_out),
        class_set=class_set,
        metadata={
            "hidden": hidden,
            "epochs": checkpoints[-1],
            "seed": seed,
            "rate": rate,
            "momentum": momentum,
        },
    )
    velocity = [np.zeros_like(p) for p in
                (model.w_hidden, model.b_hidden, model.w_output, model.b_output)]
    snapshots = []
    for epoch in range(1, checkpoints[-1] + 1):
        for i in rng.permutation(len(X)):
            grads = mlp_gradients(model, X[i], targets[i])
            params = (model.w_hidden, model.b_hidden, model.w_output, model.b_output)
            for vel, param, grad in zip(velocity, params, grads):
                vel *= momentum
                vel -= rate * grad
                param += vel
        if epoch in checkpoints:
            if eval_set is None:
                snap = MlpModel(
                    w_hidden=model.w_hidden.copy(),
                    b_hidden=model.b_hidden.copy(),
                    w_output=model.w_output.copy(),
                    b_output=model.b_output.copy(),
                    class_set=class_set,
                    metadata=dict(model.metadata, epochs=epoch),
                )
                snapshots.append((epoch, snap))
            else:
                decisions, _ = mlp_decide_batch(model, [n.vector for n in eval_set])
                acc = sum(d == n.label for d, n in zip(decisions, eval_set)) / len(eval_set)
                snapshots.append((epoch, acc))
    if eval_set is None:
        return snapshots[-1][1], snapshots
    return model, snapshots


def mlp_classify(model: MlpModel, query) -> ClassifierResponse:
    """Output activations in (0, 1) per class; decision is the argmax."""
    q = np.asarray(query, dtype=np.float64)
    if q.shape != (model.input_dim,):
        raise ValueError(f"query length {q.shape} does not match input dim {model.input_dim}")
    _, out = model.forward(q)
    return ClassifierResponse(
        classes=list(model.class_set),
        scores=out,
        decision=model.class_set[int(np.argmax(out))],
    )


def mlp_decide_batch(model: MlpModel, queries) -> tuple[list, np.ndarray]:
    """Vectorized decisions and max-activations over query rows."""
    Q = np.asarray(queries, dtype=np.float64)
    hidden = _logistic(Q @ model.w_hidden.T + model.b_hidden)
    out = _logistic(hidden @ model.w_output.T + model.b_output)
    idx = np.argmax(out, axis=1)
    decisions = [model.class_set[i] for i in idx]
    return decisions, out[np.arange(len(out)), idx]


def mlp_grid_sweep(
    train: list[EncodedNoun],
    eval_set: list[EncodedNoun],
    hidden_grid,
    epoch_grid,
    seeds,
    rate: float = 0.25,
    momentum: float = 0.9,
):
    """Hidden-count x epoch x seed sweep evaluated on ``eval_set``.

    Each (hidden, seed) pair trains once to the largest epoch count and is
    scored at every epoch checkpoint, which matches training each cell
    from scratch because updates are deterministic per seed.  Returns
    (rows, best) where rows are (hidden, epochs, seed, accuracy) in grid
    order and best is the argmax row (ties: fewer epochs, then fewer
    hidden units, then smaller seed).
    """
    hidden_grid = sorted(set(hidden_grid))
    epoch_grid = sorted(set(epoch_grid))
    seeds = list(seeds)
    if not hidden_grid or not epoch_grid or not seeds:
        raise ValueError("sweep grids must be non-empty")
    rows = []
    for hidden in hidden_grid:
        for seed in seeds:
            _, checkpoints = _mlp_train_checkpoints(
                train, hidden, epoch_grid, seed, rate, momentum, eval_set=eval_set
            )
            for epochs, acc in checkpoints:
                rows.append((hidden, epochs, seed, acc))
    best = min(rows, key=lambda r: (-r[3], r[1], r[0], r[2]))
    return rows, best


# --------------------------------------------------------------------------
# Scoring
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Confusion:
    """Row = true class, column = predicted class, canonical name order."""

    classes: list
    counts: np.ndarray


def evaluate(responses, labels) -> tuple[float, Confusion]:
    """Exact-match accuracy plus the confusion matrix.

    ``responses`` may be ClassifierResponse objects or bare class
    decisions; only the decision is scored.
    """
    if len(responses) != len(labels):
        raise ValueError("responses and labels must have equal length")
    decisions = [r.decision if isinstance(r, ClassifierResponse) else r for r in responses]
    classes = sorted(set(decisions) | set(labels), key=str)
    index = {c: i for i, c in enumerate(classes)}
    counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
    correct = 0
    for dec, lab in zip(decisions, labels):
        counts[index[lab], index[dec]] += 1
        correct += dec == lab
    accuracy = correct / len(labels) if labels else 0.0
    return accuracy, Confusion(classes=classes, counts=counts)
