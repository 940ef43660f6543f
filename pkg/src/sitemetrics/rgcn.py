"""Relational graph convolutional classifier in plain numpy.

Per layer and node i:

    h_i' = act( W_self h_i + sum_r sum_{j in N_r(i)} (1/|N_r(i)|) W_r h_j )

ReLU on hidden layers, identity on the output layer, inverted dropout on
hidden activations during training. Training is full-batch gradient
descent on the cross-entropy of the labeled nodes; the backward pass is
analytic and checked against central finite differences in the test
suite.

Neighbor aggregation sums rows in content-sorted order, so relabeling the
nodes permutes the outputs bit for bit (summation order is independent of
node numbering). Everything is seeded; a run is reproducible exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

CHECKPOINT_FORMAT = "sitemetrics-rgcn"
CHECKPOINT_VERSION = 1


class TrainingError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Relation structure: grouped neighbor lists with mean aggregation
# ---------------------------------------------------------------------------

@dataclass
class Relation:
    """One edge type, stored as neighbor lists grouped by target node."""

    n: int
    offsets: np.ndarray  # (n+1,) segment bounds into flat
    flat: np.ndarray  # neighbor indices, grouped by node
    counts: np.ndarray  # (n,) |N_r(i)|

    @classmethod
    def from_edges(cls, n: int, edges: list[tuple[int, int]]) -> "Relation":
        by_node: list[list[int]] = [[] for _ in range(n)]
        for i, j in edges:
            by_node[i].append(j)
        counts = np.array([len(b) for b in by_node], dtype=np.intp)
        offsets = np.zeros(n + 1, dtype=np.intp)
        np.cumsum(counts, out=offsets[1:])
        flat = np.array([j for b in by_node for j in b], dtype=np.intp)
        return cls(n=n, offsets=offsets, flat=flat, counts=counts)

    def aggregate(self, h: np.ndarray) -> np.ndarray:
        """Mean of neighbor rows per node, summed in content-sorted order.

        Sorting the gathered rows lexicographically before the segmented
        sum makes the result independent of node numbering, which keeps
        the forward pass exactly permutation-equivariant.
        """
        out = np.zeros_like(h)
        if len(self.flat) == 0:
            return out
        rows = h[self.flat]
        seg = np.repeat(np.arange(self.n), self.counts)
        order = np.lexsort(tuple(rows[:, k] for k in range(rows.shape[1] - 1, -1, -1)) + (seg,))
        rows = rows[order]
        starts = self.offsets[:-1]
        nz = self.counts > 0
        sums = np.add.reduceat(rows, starts[nz], axis=0) if nz.any() else np.zeros((0, h.shape[1]))
        out[nz] = sums / self.counts[nz, None]
        return out

    def aggregate_transpose(self, g: np.ndarray) -> np.ndarray:
        """Adjoint of :meth:`aggregate`: scatter g_i / c_i back to neighbors."""
        out = np.zeros_like(g)
        if len(self.flat) == 0:
            return out
        scaled = g / np.maximum(self.counts, 1)[:, None]
        np.add.at(out, self.flat, np.repeat(scaled, self.counts, axis=0))
        return out


# ---------------------------------------------------------------------------
# Model
# ---------------------------------------------------------------------------

@dataclass
class RgcnModel:
    layer_sizes: list[int]  # [in, hidden..., classes]
    num_relations: int
    dropout: float
    seed: int
    weights: list[dict] = field(default_factory=list)
    # each layer: {"self": (in, out) array, "rel": [(in, out) array] * R}

    @classmethod
    def init(cls, layer_sizes: list[int], num_relations: int, dropout: float, seed: int) -> "RgcnModel":
        rng = np.random.default_rng(seed)
        weights = []
        for d_in, d_out in zip(layer_sizes[:-1], layer_sizes[1:]):
            limit = np.sqrt(6.0 / (d_in + d_out))
            weights.append(
                {
                    "self": rng.uniform(-limit, limit, size=(d_in, d_out)),
                    "rel": [rng.uniform(-limit, limit, size=(d_in, d_out)) for _ in range(num_relations)],
                }
            )
        return cls(layer_sizes=list(layer_sizes), num_relations=num_relations, dropout=dropout, seed=seed, weights=weights)

    def copy(self) -> "RgcnModel":
        return RgcnModel(
            layer_sizes=list(self.layer_sizes),
            num_relations=self.num_relations,
            dropout=self.dropout,
            seed=self.seed,
            weights=[
                {"self": layer["self"].copy(), "rel": [w.copy() for w in layer["rel"]]}
                for layer in self.weights
            ],
        )

    def parameters(self):
        """Yields (name, array) for every weight matrix."""
        for l, layer in enumerate(self.weights):
            yield f"layer{l}.self", layer["self"]
            for r, w in enumerate(layer["rel"]):
                yield f"layer{l}.rel{r}", w


def forward(
    model: RgcnModel,
    x: np.ndarray,
    relations: list[Relation],
    train_mode: bool = False,
    rng: np.random.Generator | None = None,
    dropout_masks: list[np.ndarray] | None = None,
    cache: dict | None = None,
) -> np.ndarray:
    """Logits (N, C). Hidden dropout fires only in train_mode.

    Pass `dropout_masks` to pin the masks (gradient checking); otherwise
    they are drawn from `rng`. `cache`, when given, is filled with the
    intermediates the backward pass needs.
    """
    if len(relations) != model.num_relations:
        raise ValueError(f"expected {model.num_relations} relations, got {len(relations)}")
    if x.shape[1] != model.layer_sizes[0]:
        raise ValueError(f"feature width {x.shape[1]} != input size {model.layer_sizes[0]}")

    h = x
    inputs, pres, masks, aggs = [], [], [], []
    n_layers = len(model.weights)
    for l, layer in enumerate(model.weights):
        inputs.append(h)
        layer_aggs = [rel.aggregate(h) for rel in relations]
        aggs.append(layer_aggs)
        pre = h @ layer["self"]
        for s, w in zip(layer_aggs, layer["rel"]):
            pre = pre + s @ w
        pres.append(pre)
        if l < n_layers - 1:
            h = np.maximum(pre, 0.0)
            if train_mode and model.dropout > 0.0:
                if dropout_masks is not None:
                    mask = dropout_masks[l]
                elif rng is not None:
                    mask = (rng.random(h.shape) >= model.dropout).astype(float)
                else:
                    raise ValueError("train_mode dropout needs rng or dropout_masks")
                h = h * mask / (1.0 - model.dropout)
                masks.append(mask)
            else:
                masks.append(None)
        else:
            h = pre
    if cache is not None:
        cache.update(inputs=inputs, pres=pres, masks=masks, aggs=aggs)
    return h


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def cross_entropy(logits: np.ndarray, labels: np.ndarray, idx: np.ndarray) -> float:
    p = softmax(logits[idx])
    return float(-np.mean(np.log(p[np.arange(len(idx)), labels[idx]] + 1e-300)))


def loss_and_grads(
    model: RgcnModel,
    x: np.ndarray,
    relations: list[Relation],
    labels: np.ndarray,
    idx: np.ndarray,
    train_mode: bool = False,
    rng: np.random.Generator | None = None,
    dropout_masks: list[np.ndarray] | None = None,
) -> tuple[float, list[dict]]:
    """Cross-entropy over `idx` plus analytic gradients per weight matrix."""
    cache: dict = {}
    logits = forward(model, x, relations, train_mode=train_mode, rng=rng, dropout_masks=dropout_masks, cache=cache)
    n_train = len(idx)
    p = softmax(logits[idx])
    loss = float(-np.mean(np.log(p[np.arange(n_train), labels[idx]] + 1e-300)))

    dlogits = np.zeros_like(logits)
    grad_rows = p.copy()
    grad_rows[np.arange(n_train), labels[idx]] -= 1.0
    dlogits[idx] = grad_rows / n_train

    grads = [
        {"self": np.zeros_like(layer["self"]), "rel": [np.zeros_like(w) for w in layer["rel"]]}
        for layer in model.weights
    ]
    dh = dlogits
    n_layers = len(model.weights)
    for l in range(n_layers - 1, -1, -1):
        if l < n_layers - 1:
            mask = cache["masks"][l]
            if mask is not None:
                dh = dh * mask / (1.0 - model.dropout)
            dh = dh * (cache["pres"][l] > 0.0)
        h_in = cache["inputs"][l]
        layer = model.weights[l]
        grads[l]["self"] = h_in.T @ dh
        dh_prev = dh @ layer["self"].T
        for r, (rel, w) in enumerate(zip(relations, layer["rel"])):
            grads[l]["rel"][r] = cache["aggs"][l][r].T @ dh
            dh_prev = dh_prev + rel.aggregate_transpose(dh @ w.T)
        dh = dh_prev
    return loss, grads


@dataclass
class TrainReport:
    epoch_losses: list[float]
    fold_accuracies: list[float]
    confusion: np.ndarray  # (C, C), rows = true class, out-of-fold predictions
    classes: list[str]

    def to_dict(self) -> dict:
        return {
            "epoch_losses": self.epoch_losses,
            "fold_accuracies": self.fold_accuracies,
            "confusion": self.confusion.tolist(),
            "classes": self.classes,
        }


def _fit(
    model: RgcnModel,
    x: np.ndarray,
    relations: list[Relation],
    labels: np.ndarray,
    train_idx: np.ndarray,
    epochs: int,
    lr: float,
    rng: np.random.Generator,
) -> list[float]:
    losses = []
    for _ in range(epochs):
        loss, grads = loss_and_grads(model, x, relations, labels, train_idx, train_mode=True, rng=rng)
        if not np.isfinite(loss):
            raise TrainingError(f"loss diverged to {loss}; lower the learning rate")
        losses.append(loss)
        for layer, g in zip(model.weights, grads):
            layer["self"] -= lr * g["self"]
            for w, gw in zip(layer["rel"], g["rel"]):
                w -= lr * gw
    return losses


def train(
    x: np.ndarray,
    relations: list[Relation],
    labels: np.ndarray,
    classes: list[str],
    hidden: int = 32,
    layers: int = 2,
    dropout: float = 0.5,
    lr: float = 0.01,
    epochs: int = 500,
    folds: int = 5,
    seed: int = 0,
) -> tuple[RgcnModel, TrainReport]:
    """Cross-validate then fit a final model on every labeled node.

    `labels` holds class indices with -1 for unlabeled nodes. Needs at
    least two distinct labeled classes. Deterministic for a fixed seed.
    """
    labeled = np.flatnonzero(labels >= 0)
    if len(np.unique(labels[labeled])) < 2:
        raise TrainingError("training needs at least two labeled classes")

    n_classes = len(classes)
    sizes = [x.shape[1]] + [hidden] * max(0, layers - 1) + [n_classes]

    rng = np.random.default_rng(seed)
    order = labeled[rng.permutation(len(labeled))]
    n_folds = min(folds, len(order))
    fold_slices = np.array_split(order, n_folds)

    fold_accuracies: list[float] = []
    confusion = np.zeros((n_classes, n_classes), dtype=int)
    for k, hold in enumerate(fold_slices):
        train_idx = np.setdiff1d(order, hold)
        if len(np.unique(labels[train_idx])) < 2:
            raise TrainingError(f"fold {k}: fewer than two classes in the training split")
        fold_model = RgcnModel.init(sizes, len(relations), dropout, seed=seed + 1 + k)
        fold_rng = np.random.default_rng(seed + 1000 + k)
        _fit(fold_model, x, relations, labels, train_idx, epochs, lr, fold_rng)
        logits = forward(fold_model, x, relations, train_mode=False)
        pred = np.argmax(logits[hold], axis=1)
        fold_accuracies.append(float(np.mean(pred == labels[hold])))
        for t, p in zip(labels[hold], pred):
            confusion[t, p] += 1

    final = RgcnModel.init(sizes, len(relations), dropout, seed=seed)
    final_rng = np.random.default_rng(seed + 500)
    losses = _fit(final, x, relations, labels, labeled, epochs, lr, final_rng)
    report = TrainReport(
        epoch_losses=losses, fold_accuracies=fold_accuracies, confusion=confusion, classes=list(classes)
    )
    return final, report


def predict_proba(model: RgcnModel, x: np.ndarray, relations: list[Relation]) -> np.ndarray:
    return softmax(forward(model, x, relations, train_mode=False))


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------

def save_checkpoint(path: str | Path, model: RgcnModel, classes: list[str], feature_meta: dict) -> None:
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "layer_sizes": model.layer_sizes,
        "num_relations": model.num_relations,
        "dropout": model.dropout,
        "seed": model.seed,
        "classes": classes,
        "feature_meta": feature_meta,
        "weights": [
            {"self": layer["self"].tolist(), "rel": [w.tolist() for w in layer["rel"]]}
            for layer in model.weights
        ],
    }
    Path(path).write_text(json.dumps(payload, allow_nan=False) + "\n", encoding="utf-8")


def load_checkpoint(path: str | Path) -> tuple[RgcnModel, list[str], dict]:
    with open(path, encoding="utf-8") as f:
        payload = json.load(f)
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"{path} is not a {CHECKPOINT_FORMAT} checkpoint")
    if payload.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {payload.get('version')}")
    model = RgcnModel(
        layer_sizes=payload["layer_sizes"],
        num_relations=payload["num_relations"],
        dropout=payload["dropout"],
        seed=payload["seed"],
        weights=[
            {
                "self": np.array(layer["self"], dtype=float),
                "rel": [np.array(w, dtype=float) for w in layer["rel"]],
            }
            for layer in payload["weights"]
        ],
    )
    return model, payload["classes"], payload["feature_meta"]
