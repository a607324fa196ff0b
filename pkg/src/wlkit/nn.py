"""Sum-aggregation message passing with a recoloring layer, from scratch.

The model is a sequence over two layer kinds, written as a layout string such
as "gggrgg":

- ``g``: injective-style update  h_v' = MLP((1 + eps) * h_v + sum of neighbor
  rows), with a 2-layer ReLU MLP. eps is either fixed at 0 or trainable.
- ``r``: recoloring. Nodes are grouped by equal feature rows (after rounding),
  the class with lexicographically largest (size, feature row) is picked, and
  one node (or half of the class) has its row replaced by the zero vector. If
  every row is already unique the layer is the identity.

Graph embeddings are jumping-knowledge style: the global add readout of every
``g`` output, combined by a trainable weighted sum, then a 2-layer MLP head
produces class logits. Gradients are written out by hand; the recoloring
layer backpropagates as a constant mask (zeroed rows block gradient flow).

All tensors are float64 numpy arrays. Parameters live in a flat dict:

    gin{i}.w1, gin{i}.b1, gin{i}.w2, gin{i}.b2   per g layer i
    gin{i}.eps                                   only when eps is trainable
    jk                                           one weight per g layer
    head.w1, head.b1, head.w2, head.b2
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .graphs import Graph

__all__ = [
    "ModelConfig",
    "TrainConfig",
    "TrainResult",
    "GraphBatch",
    "init_params",
    "gin_layer_forward",
    "recolor_layer",
    "jk_readout",
    "model_forward",
    "batch_forward",
    "loss_and_grads",
    "softmax_cross_entropy",
    "init_adam_state",
    "adam_step",
    "lr_at_epoch",
    "train",
    "metrics_to_csv",
    "save_checkpoint",
    "load_checkpoint",
]

CHECKPOINT_VERSION = 1

SINGLE = "single"
HALF = "half"


@dataclass(frozen=True)
class ModelConfig:
    """Architecture hyperparameters. ``layout`` mixes 'g' and 'r' tokens."""

    layout: str = "gggrgg"
    hidden_dim: int = 32
    num_classes: int = 2
    recolor_fraction: str = SINGLE
    epsilon_mode: str = "fixed0"  # or "trainable"
    round_decimals: int = 6

    def __post_init__(self) -> None:
        if not self.layout or set(self.layout) - {"g", "r"}:
            raise ValueError(f"layout must be a nonempty string over g/r: {self.layout!r}")
        if "g" not in self.layout:
            raise ValueError("layout needs at least one g layer")
        if self.recolor_fraction not in (SINGLE, HALF):
            raise ValueError(f"unknown recolor fraction {self.recolor_fraction!r}")
        if self.epsilon_mode not in ("fixed0", "trainable"):
            raise ValueError(f"unknown epsilon mode {self.epsilon_mode!r}")

    @property
    def num_g_layers(self) -> int:
        return self.layout.count("g")


@dataclass(frozen=True)
class TrainConfig:
    """Optimization protocol: minibatch Adam with a stepwise-decaying rate.

    ``batch_size`` of None trains full-batch. Minibatches are reshuffled every
    epoch from the run's seeded generator, so a fixed seed reproduces the run
    exactly.
    """

    epochs: int = 300
    learning_rate: float = 0.01
    lr_decay: float = math.sqrt(0.1)
    lr_period: int = 50
    batch_size: int | None = 32
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.lr_period < 1:
            raise ValueError("lr_period must be positive")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch_size must be positive or None")


@dataclass(frozen=True)
class TrainResult:
    params: dict[str, np.ndarray]
    metrics: tuple[tuple[int, float, float], ...]  # (epoch, loss, train accuracy)

    @property
    def final_accuracy(self) -> float:
        return self.metrics[-1][2]


class GraphBatch:
    """Block-diagonal packing of graphs so layers run vectorized."""

    def __init__(self, graphs: Sequence[Graph]):
        if not graphs:
            raise ValueError("batch needs at least one graph")
        if any(g.n == 0 for g in graphs):
            raise ValueError("batch graphs must have at least one node")
        self.graphs = list(graphs)
        self.sizes = np.array([g.n for g in graphs], dtype=np.int64)
        self.starts = np.concatenate([[0], np.cumsum(self.sizes)[:-1]])
        self.n_total = int(self.sizes.sum())
        rows, cols = [], []
        for g, start in zip(graphs, self.starts):
            for u, v in g.edges():
                rows.extend((start + u, start + v))
                cols.extend((start + v, start + u))
        data = np.ones(len(rows))
        self.adjacency = sp.csr_matrix(
            (data, (rows, cols)), shape=(self.n_total, self.n_total)
        )

    @property
    def num_graphs(self) -> int:
        return len(self.graphs)

    def stack(self, features: Sequence[np.ndarray]) -> np.ndarray:
        if len(features) != self.num_graphs:
            raise ValueError("one feature matrix per graph is required")
        for g, x in zip(self.graphs, features):
            if x.shape[0] != g.n:
                raise ValueError("feature rows must match node count")
        return np.vstack(features).astype(np.float64)


def init_params(
    cfg: ModelConfig, in_dim: int, rng: np.random.Generator
) -> dict[str, np.ndarray]:
    """Uniform +-sqrt(6/(fan_in+fan_out)) weights, zero biases, eps at 0."""
    params: dict[str, np.ndarray] = {}
    d = in_dim
    for i in range(cfg.num_g_layers):
        h = cfg.hidden_dim
        b1 = math.sqrt(6.0 / (d + h))
        b2 = math.sqrt(6.0 / (h + h))
        params[f"gin{i}.w1"] = rng.uniform(-b1, b1, size=(d, h))
        params[f"gin{i}.b1"] = np.zeros(h)
        params[f"gin{i}.w2"] = rng.uniform(-b2, b2, size=(h, h))
        params[f"gin{i}.b2"] = np.zeros(h)
        if cfg.epsilon_mode == "trainable":
            params[f"gin{i}.eps"] = np.zeros(())
        d = h
    params["jk"] = np.ones(cfg.num_g_layers)
    h, c = cfg.hidden_dim, cfg.num_classes
    bh = math.sqrt(6.0 / (h + h))
    bc = math.sqrt(6.0 / (h + c))
    params["head.w1"] = rng.uniform(-bh, bh, size=(h, h))
    params["head.b1"] = np.zeros(h)
    params["head.w2"] = rng.uniform(-bc, bc, size=(h, c))
    params["head.b2"] = np.zeros(c)
    return params


# --- single layers -------------------------------------------------------------


def gin_layer_forward(
    g: Graph,
    x: np.ndarray,
    w1: np.ndarray,
    b1: np.ndarray,
    w2: np.ndarray,
    b2: np.ndarray,
    epsilon: float = 0.0,
) -> np.ndarray:
    """One sum-aggregation update: MLP((1+eps) * x_v + sum of neighbor rows)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != g.n:
        raise ValueError(f"feature matrix has {x.shape[0]} rows for {g.n} nodes")
    if x.shape[1] != w1.shape[0]:
        raise ValueError(
            f"feature dim {x.shape[1]} does not match weight fan-in {w1.shape[0]}"
        )
    agg = np.zeros_like(x)
    for v in range(g.n):
        for u in g.neighbors(v):
            agg[v] += x[u]
    z = (1.0 + epsilon) * x + agg
    return np.maximum(z @ w1 + b1, 0.0) @ w2 + b2


def _group_rows(
    rows: np.ndarray, decimals: int
) -> list[tuple[tuple[float, ...], list[int]]]:
    """Classes of equal rows after rounding, ascending by row value.

    Adding 0.0 after rounding collapses -0.0 and +0.0 so byte-level grouping
    matches numeric equality.
    """
    keys = np.round(rows, decimals) + 0.0
    groups: dict[bytes, list[int]] = {}
    for i in range(keys.shape[0]):
        groups.setdefault(keys[i].tobytes(), []).append(i)
    decoded = [
        (tuple(np.frombuffer(raw, dtype=np.float64)), members)
        for raw, members in groups.items()
    ]
    decoded.sort(key=lambda item: item[0])
    return decoded


def _select_class(
    classes: list[tuple[tuple[float, ...], list[int]]]
) -> int:
    """Index of the class with lexicographically largest (size, row values).

    Rows are unique per class, so (size, row) never ties; the smaller class id
    would win a hypothetical tie because ``max`` keeps the earlier argmax.
    """
    return max(
        range(len(classes)),
        key=lambda c: (len(classes[c][1]), classes[c][0]),
    )


def _recolor_victims(
    classes: list[tuple[tuple[float, ...], list[int]]],
    fraction: str,
    rng: np.random.Generator,
) -> tuple[int, list[int]]:
    chosen = _select_class(classes)
    members = classes[chosen][1]
    m = 1 if fraction == SINGLE else math.ceil(len(members) / 2)
    victims = rng.choice(np.array(members), size=m, replace=False)
    return chosen, [int(v) for v in victims]


def recolor_layer(
    g: Graph,
    x: np.ndarray,
    rng: np.random.Generator,
    fraction: str = SINGLE,
    round_decimals: int = 6,
) -> np.ndarray:
    """Zeroes the rows of randomly chosen nodes from the selected class.

    Identity when every row is unique (there is nothing left to split).
    """
    x = np.asarray(x, dtype=np.float64)
    classes = _group_rows(x, round_decimals)
    if len(classes) == x.shape[0]:
        return x.copy()
    _, victims = _recolor_victims(classes, fraction, rng)
    out = x.copy()
    out[victims] = 0.0
    return out


def jk_readout(per_layer: Sequence[np.ndarray], weights: np.ndarray) -> np.ndarray:
    """Weighted sum of the global add readouts of each layer output."""
    if len(per_layer) != len(weights):
        raise ValueError(
            f"{len(weights)} weights for {len(per_layer)} layer outputs"
        )
    return sum(w * x.sum(axis=0) for w, x in zip(weights, per_layer))


# --- batched forward/backward ----------------------------------------------------


def _recolor_batch(
    batch: GraphBatch,
    x: np.ndarray,
    fraction: str,
    decimals: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray, list[tuple[int, list[int]] | None]]:
    """Per-graph recoloring over the packed feature stack.

    Draws are consumed in graph order, which keeps runs reproducible for a
    fixed seed. Returns (new features, column mask, per-graph selection).
    """
    mask = np.ones((batch.n_total, 1))
    selections: list[tuple[int, list[int]] | None] = []
    for start, size in zip(batch.starts, batch.sizes):
        rows = x[start : start + size]
        classes = _group_rows(rows, decimals)
        if len(classes) == size:
            selections.append(None)
            continue
        chosen, victims = _recolor_victims(classes, fraction, rng)
        mask[[start + v for v in victims]] = 0.0
        selections.append((chosen, victims))
    return x * mask, mask, selections


def batch_forward(
    cfg: ModelConfig,
    params: dict[str, np.ndarray],
    batch: GraphBatch,
    x0: np.ndarray,
    rng: np.random.Generator,
) -> tuple[np.ndarray, dict]:
    """Logits for every graph in the batch, plus the cache for backward."""
    adj = batch.adjacency
    x = np.asarray(x0, dtype=np.float64)
    if x.shape[0] != batch.n_total:
        raise ValueError("feature stack does not match batch size")
    gin_caches: list[tuple] = []
    g_outputs: list[np.ndarray] = []
    masks: list[np.ndarray] = []
    selections: list[list] = []
    gi = 0
    for token in cfg.layout:
        if token == "g":
            eps = float(params[f"gin{gi}.eps"]) if cfg.epsilon_mode == "trainable" else 0.0
            w1, b1 = params[f"gin{gi}.w1"], params[f"gin{gi}.b1"]
            w2, b2 = params[f"gin{gi}.w2"], params[f"gin{gi}.b2"]
            z = (1.0 + eps) * x + adj @ x
            h1 = z @ w1 + b1
            a1 = np.maximum(h1, 0.0)
            out = a1 @ w2 + b2
            gin_caches.append((x, z, h1, a1))
            g_outputs.append(out)
            x = out
            gi += 1
        else:
            x, mask, sel = _recolor_batch(
                batch, x, cfg.recolor_fraction, cfg.round_decimals, rng
            )
            masks.append(mask)
            selections.append(sel)
    readouts = [
        np.add.reduceat(out, batch.starts, axis=0) for out in g_outputs
    ]
    jk = params["jk"]
    emb = sum(w * r for w, r in zip(jk, readouts))
    e1 = emb @ params["head.w1"] + params["head.b1"]
    ea = np.maximum(e1, 0.0)
    logits = ea @ params["head.w2"] + params["head.b2"]
    cache = {
        "gin": gin_caches,
        "g_outputs": g_outputs,
        "masks": masks,
        "selections": selections,
        "readouts": readouts,
        "emb": emb,
        "e1": e1,
        "ea": ea,
    }
    return logits, cache


def model_forward(
    cfg: ModelConfig,
    params: dict[str, np.ndarray],
    g: Graph,
    x0: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    """Class logits for a single graph."""
    batch = GraphBatch([g])
    logits, _ = batch_forward(cfg, params, batch, batch.stack([x0]), rng)
    return logits[0]


def softmax_cross_entropy(
    logits: np.ndarray, labels: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean cross entropy; returns (loss, dloss/dlogits, probabilities)."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    exps = np.exp(shifted)
    total = exps.sum(axis=1, keepdims=True)
    probs = exps / total
    b = logits.shape[0]
    # log prob via logsumexp; picked probabilities may underflow to 0.0
    log_picked = shifted[np.arange(b), labels] - np.log(total[:, 0])
    loss = float(-log_picked.mean())
    dlogits = probs.copy()
    dlogits[np.arange(b), labels] -= 1.0
    dlogits /= b
    return loss, dlogits, probs


def loss_and_grads(
    cfg: ModelConfig,
    params: dict[str, np.ndarray],
    batch: GraphBatch,
    x0: np.ndarray,
    labels: np.ndarray,
    rng: np.random.Generator,
) -> tuple[float, dict[str, np.ndarray], np.ndarray]:
    """Mean cross entropy over the batch plus gradients for every parameter.

    Recoloring is treated as a constant mask: the class selection and victim
    draws do not receive gradients, and zeroed rows block backpropagation.
    Returns (loss, grads, logits).
    """
    if batch.num_graphs == 0 or len(labels) != batch.num_graphs:
        raise ValueError("need one label per batch graph")
    logits, cache = batch_forward(cfg, params, batch, x0, rng)
    loss, dlogits, _ = softmax_cross_entropy(logits, np.asarray(labels))

    grads: dict[str, np.ndarray] = {}
    ea, e1, emb = cache["ea"], cache["e1"], cache["emb"]
    grads["head.w2"] = ea.T @ dlogits
    grads["head.b2"] = dlogits.sum(axis=0)
    dea = dlogits @ params["head.w2"].T
    de1 = dea * (e1 > 0.0)
    grads["head.w1"] = emb.T @ de1
    grads["head.b1"] = de1.sum(axis=0)
    demb = de1 @ params["head.w1"].T

    jk = params["jk"]
    readouts = cache["readouts"]
    grads["jk"] = np.array([float(np.vdot(demb, r)) for r in readouts])
    # Gradient flowing into each g output via its readout, spread to the rows
    # of the owning graph.
    readout_grads = [
        np.repeat(w * demb, batch.sizes, axis=0) for w in jk
    ]

    adj = batch.adjacency
    dx = np.zeros_like(cache["g_outputs"][-1])
    gi = cfg.num_g_layers
    ri = len(cache["masks"])
    for token in reversed(cfg.layout):
        if token == "g":
            gi -= 1
            dout = dx + readout_grads[gi]
            x_in, z, h1, a1 = cache["gin"][gi]
            eps = float(params[f"gin{gi}.eps"]) if cfg.epsilon_mode == "trainable" else 0.0
            w1, w2 = params[f"gin{gi}.w1"], params[f"gin{gi}.w2"]
            grads[f"gin{gi}.w2"] = a1.T @ dout
            grads[f"gin{gi}.b2"] = dout.sum(axis=0)
            da1 = dout @ w2.T
            dh1 = da1 * (h1 > 0.0)
            grads[f"gin{gi}.w1"] = z.T @ dh1
            grads[f"gin{gi}.b1"] = dh1.sum(axis=0)
            dz = dh1 @ w1.T
            if cfg.epsilon_mode == "trainable":
                grads[f"gin{gi}.eps"] = np.array(float(np.vdot(dz, x_in)))
            dx = (1.0 + eps) * dz + adj @ dz
        else:
            ri -= 1
            dx = dx * cache["masks"][ri]
    return loss, grads, logits


# --- optimizer and training loop ---------------------------------------------------


def init_adam_state(params: dict[str, np.ndarray]) -> dict[str, dict[str, np.ndarray]]:
    return {
        "m": {k: np.zeros_like(v) for k, v in params.items()},
        "v": {k: np.zeros_like(v) for k, v in params.items()},
    }


def adam_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: dict[str, dict[str, np.ndarray]],
    t: int,
    lr: float,
    tcfg: TrainConfig,
) -> dict[str, np.ndarray]:
    """In-place moment update and parameter step, t is the 1-based step index."""
    if set(grads) != set(params):
        raise ValueError("gradient keys do not match parameter keys")
    bc1 = 1.0 - tcfg.beta1**t
    bc2 = 1.0 - tcfg.beta2**t
    for key in sorted(params):
        g = grads[key]
        if g.shape != params[key].shape:
            raise ValueError(f"gradient shape mismatch for {key}")
        m = state["m"][key]
        v = state["v"][key]
        m *= tcfg.beta1
        m += (1.0 - tcfg.beta1) * g
        v *= tcfg.beta2
        v += (1.0 - tcfg.beta2) * (g * g)
        params[key] = params[key] - lr * (m / bc1) / (np.sqrt(v / bc2) + tcfg.adam_eps)
    return params


def lr_at_epoch(tcfg: TrainConfig, epoch_index: int) -> float:
    """Stepwise decay: the rate is multiplied by lr_decay every lr_period epochs."""
    return tcfg.learning_rate * tcfg.lr_decay ** (epoch_index // tcfg.lr_period)


def train(dataset, cfg: ModelConfig, tcfg: TrainConfig) -> TrainResult:
    """Minibatch Adam training; deterministic for a fixed seed.

    ``dataset`` provides .graphs and .labels; initial features follow the
    dataset-wide policy (label one-hots when labels exist, else degree
    one-hots). Each epoch reshuffles the sample order, takes one optimizer
    step per minibatch, and records the mean loss and the fraction of samples
    classified correctly during the epoch's forward passes. The generator is
    consumed in a fixed order (init, then per epoch: shuffle, then recoloring
    draws batch by batch), which makes runs bit-reproducible.
    """
    from .data import dataset_features

    if len(dataset.graphs) == 0:
        raise ValueError("cannot train on an empty dataset")
    n = len(dataset.graphs)
    rng = np.random.default_rng(tcfg.seed)
    features = dataset_features(dataset)
    labels = np.asarray(dataset.labels)
    params = init_params(cfg, features[0].shape[1], rng)
    state = init_adam_state(params)
    batch_size = tcfg.batch_size if tcfg.batch_size is not None else n

    full_batch: GraphBatch | None = None
    full_x0: np.ndarray | None = None
    if batch_size >= n:
        full_batch = GraphBatch(dataset.graphs)
        full_x0 = full_batch.stack(features)

    metrics: list[tuple[int, float, float]] = []
    step = 0
    for epoch in range(tcfg.epochs):
        lr = lr_at_epoch(tcfg, epoch)
        order = rng.permutation(n) if batch_size < n else np.arange(n)
        correct = 0
        loss_sum = 0.0
        for at in range(0, n, batch_size):
            idx = order[at : at + batch_size]
            if full_batch is not None:
                batch, x0 = full_batch, full_x0
            else:
                batch = GraphBatch([dataset.graphs[i] for i in idx])
                x0 = batch.stack([features[i] for i in idx])
            y = labels[idx]
            loss, grads, logits = loss_and_grads(cfg, params, batch, x0, y, rng)
            step += 1
            params = adam_step(params, grads, state, step, lr, tcfg)
            correct += int((logits.argmax(axis=1) == y).sum())
            loss_sum += loss * len(idx)
        metrics.append((epoch + 1, loss_sum / n, correct / n))
    return TrainResult(params=params, metrics=tuple(metrics))


def metrics_to_csv(metrics: Iterable[tuple[int, float, float]]) -> str:
    lines = ["epoch,loss,train_accuracy"]
    for epoch, loss, acc in metrics:
        lines.append(f"{epoch},{loss!r},{acc!r}")
    return "\n".join(lines) + "\n"


def save_checkpoint(
    path: str | Path, cfg: ModelConfig, params: dict[str, np.ndarray]
) -> None:
    """Versioned JSON checkpoint holding the config and every tensor.

    float64 values survive the JSON round trip exactly (repr-based encoding).
    """
    doc = {
        "checkpoint_version": CHECKPOINT_VERSION,
        "config": asdict(cfg),
        "params": {k: np.asarray(v).tolist() for k, v in sorted(params.items())},
    }
    Path(path).write_text(json.dumps(doc) + "\n")


def load_checkpoint(path: str | Path) -> tuple[ModelConfig, dict[str, np.ndarray]]:
    doc = json.loads(Path(path).read_text())
    version = doc.get("checkpoint_version")
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version!r}")
    cfg = ModelConfig(**doc["config"])
    params = {k: np.asarray(v, dtype=np.float64) for k, v in doc["params"].items()}
    return cfg, params
