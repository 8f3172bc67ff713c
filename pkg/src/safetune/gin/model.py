"""GIN forward pass over data-flow graphs.

Update rule per layer: h_v <- MLP((1 + eps) * h_v + sum of neighbor h_u),
neighbors taken over the undirected edge multiset. The MLP is
W2(relu(W1 x + b1)) + b2. Readout is a plain sum over node embeddings
followed by an affine map to two logits; class 1 is "trojan". All math is
float64 so independent oracles can match tightly. Epsilon is fixed at 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..dfg import DataFlowGraph, FEATURE_DIM, build_dfg, encode_features
from ..errors import ScoreError, ShapeError
from ..verilog import parse_source

DEFAULT_HIDDEN = 128
DEFAULT_DROPOUT = 0.4
DEFAULT_LAYERS = 2
EPSILON = 0.0


@dataclass
class GinLayer:
    w1: np.ndarray  # (in, hidden)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (hidden, hidden)
    b2: np.ndarray  # (hidden,)

    def copy(self):
        return GinLayer(self.w1.copy(), self.b1.copy(), self.w2.copy(), self.b2.copy())


@dataclass
class GinModel:
    layers: list
    readout_w: np.ndarray  # (hidden, 2)
    readout_b: np.ndarray  # (2,)
    input_dim: int = FEATURE_DIM
    hidden: int = DEFAULT_HIDDEN
    dropout_rate: float = DEFAULT_DROPOUT
    epsilon: float = EPSILON

    def parameters(self) -> list:
        params = []
        for layer in self.layers:
            params.extend([layer.w1, layer.b1, layer.w2, layer.b2])
        params.extend([self.readout_w, self.readout_b])
        return params

    def copy(self):
        return GinModel(
            layers=[l.copy() for l in self.layers],
            readout_w=self.readout_w.copy(),
            readout_b=self.readout_b.copy(),
            input_dim=self.input_dim,
            hidden=self.hidden,
            dropout_rate=self.dropout_rate,
            epsilon=self.epsilon,
        )

    def __eq__(self, other):
        if not isinstance(other, GinModel):
            return NotImplemented
        mine, theirs = self.parameters(), other.parameters()
        return len(mine) == len(theirs) and all(
            a.shape == b.shape and np.array_equal(a, b) for a, b in zip(mine, theirs)
        )


def init_model(seed: int = 42, input_dim: int = FEATURE_DIM,
               hidden: int = DEFAULT_HIDDEN, n_layers: int = DEFAULT_LAYERS,
               dropout_rate: float = DEFAULT_DROPOUT) -> GinModel:
    """Seeded uniform He-style initialization: U(-sqrt(6/fan_in), +sqrt(6/fan_in))."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))

    def uniform(fan_in, shape):
        limit = np.sqrt(6.0 / fan_in)
        return rng.uniform(-limit, limit, size=shape)

    layers = []
    in_dim = input_dim
    for _ in range(n_layers):
        layers.append(GinLayer(
            w1=uniform(in_dim, (in_dim, hidden)),
            b1=np.zeros(hidden),
            w2=uniform(hidden, (hidden, hidden)),
            b2=np.zeros(hidden),
        ))
        in_dim = hidden
    return GinModel(
        layers=layers,
        readout_w=uniform(hidden, (hidden, 2)),
        readout_b=np.zeros(2),
        input_dim=input_dim,
        hidden=hidden,
        dropout_rate=dropout_rate,
    )


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - np.max(logits)
    exp = np.exp(shifted)
    return exp / exp.sum()


def _edge_arrays(graph: DataFlowGraph):
    if not graph.edges:
        return np.zeros(0, dtype=np.intp), np.zeros(0, dtype=np.intp)
    src = np.fromiter((e.src for e in graph.edges), dtype=np.intp, count=len(graph.edges))
    dst = np.fromiter((e.dst for e in graph.edges), dtype=np.intp, count=len(graph.edges))
    return src, dst


def _aggregate(h: np.ndarray, src, dst, epsilon: float) -> np.ndarray:
    agg = (1.0 + epsilon) * h
    if src.size:
        np.add.at(agg, dst, h[src])
        np.add.at(agg, src, h[dst])
    return agg


def _dropout_masks(model: GinModel, n_nodes: int, rng_seed) -> list:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(rng_seed)))
    keep = 1.0 - model.dropout_rate
    return [
        (rng.random((n_nodes, model.hidden)) < keep).astype(np.float64) / keep
        for _ in model.layers
    ]


def forward_cached(model: GinModel, graph: DataFlowGraph, features: np.ndarray,
                   training: bool = False, rng_seed: int = 0):
    """Forward pass returning (logits, caches) for backpropagation."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] != len(graph.nodes):
        raise ShapeError(
            f"feature rows {features.shape} do not match {len(graph.nodes)} nodes")
    if features.shape[1] != model.input_dim:
        raise ShapeError(
            f"feature dim {features.shape[1]} != model input dim {model.input_dim}")
    src, dst = _edge_arrays(graph)
    masks = _dropout_masks(model, len(graph.nodes), rng_seed) if training else None
    h = features
    caches = []
    for k, layer in enumerate(model.layers):
        agg = _aggregate(h, src, dst, model.epsilon)
        z1 = agg @ layer.w1 + layer.b1
        a1 = np.maximum(z1, 0.0)
        out = a1 @ layer.w2 + layer.b2
        if masks is not None:
            dropped = out * masks[k]
        else:
            dropped = out
        caches.append({"agg": agg, "z1": z1, "a1": a1})
        h = dropped
    pooled = h.sum(axis=0)
    logits = pooled @ model.readout_w + model.readout_b
    state = {
        "caches": caches, "pooled": pooled, "masks": masks,
        "src": src, "dst": dst, "n_nodes": len(graph.nodes),
    }
    return logits, state


def forward(model: GinModel, graph: DataFlowGraph, features: np.ndarray,
            training: bool = False, rng_seed: int = 0) -> dict:
    logits, _ = forward_cached(model, graph, features, training, rng_seed)
    probs = softmax(logits)
    return {"logits": logits, "p_trojan": float(probs[1])}


def backward(model: GinModel, state: dict, dlogits: np.ndarray) -> list:
    """Gradients of a scalar loss wrt every parameter, given dL/dlogits.

    Returned list matches model.parameters() order.
    """
    grads = []
    d_readout_w = np.outer(state["pooled"], dlogits)
    d_readout_b = dlogits.copy()
    dpooled = model.readout_w @ dlogits
    dh = np.tile(dpooled, (state["n_nodes"], 1))
    src, dst = state["src"], state["dst"]
    layer_grads = []
    for k in range(len(model.layers) - 1, -1, -1):
        layer = model.layers[k]
        cache = state["caches"][k]
        if state["masks"] is not None:
            dout = dh * state["masks"][k]
        else:
            dout = dh
        d_w2 = cache["a1"].T @ dout
        d_b2 = dout.sum(axis=0)
        da1 = dout @ layer.w2.T
        dz1 = da1 * (cache["z1"] > 0.0)
        d_w1 = cache["agg"].T @ dz1
        d_b1 = dz1.sum(axis=0)
        dagg = dz1 @ layer.w1.T
        dh = (1.0 + model.epsilon) * dagg
        if src.size:
            np.add.at(dh, src, dagg[dst])
            np.add.at(dh, dst, dagg[src])
        layer_grads.append([d_w1, d_b1, d_w2, d_b2])
    for g in reversed(layer_grads):
        grads.extend(g)
    grads.extend([d_readout_w, d_readout_b])
    return grads


def rtl_to_inputs(rtl: str):
    """Parse RTL and produce the (graph, features) pair the model consumes."""
    ast = parse_source(rtl)
    graph = build_dfg(ast)
    return graph, encode_features(graph)


def predict_proba(model: GinModel, rtl: str, sample_id=None) -> float:
    """Trojan probability for one RTL source (parse -> DFG -> features -> forward)."""
    try:
        graph, features = rtl_to_inputs(rtl)
    except Exception as exc:
        raise ScoreError(str(exc), sample_id) from exc
    return forward(model, graph, features, training=False)["p_trojan"]
