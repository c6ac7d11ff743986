"""Minimal fully-connected neural stack: forward, exact backward, Adam.

The package trains small multilayer perceptrons (a conditional generator, an
optional adversarial discriminator, neural quantile regressors) plus a mean-
aggregated word-embedding table for the textual variant.  Everything here is
plain numpy: batch-first affine layers with relu/identity activations, an
activation tape for exact backpropagation, and a bias-corrected Adam update.

Gradients are exact (they match central finite differences to <= 1e-4
relative error; see the test suite), and ``forward`` is a pure function of
(parameters, input).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import RngStream

__all__ = [
    "Mlp",
    "Tape",
    "AdamState",
    "EmbeddingTable",
    "init_mlp",
    "forward",
    "backward",
    "adam_init",
    "adam_step",
]

_ACTIVATIONS = ("relu", "identity")


@dataclass
class Mlp:
    """A fully-connected network: affine layers with relu/identity activations.

    ``weights[i]`` has shape (out_i, in_i) and ``biases[i]`` shape (out_i,);
    adjacent layer dimensions chain.  Parameters are mutable during training
    and must stay finite.
    """

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activations: list[str]

    def __post_init__(self) -> None:
        if not (len(self.weights) == len(self.biases) == len(self.activations) > 0):
            raise ValueError("weights, biases and activations must have equal nonzero length")
        for i, (w, b, act) in enumerate(zip(self.weights, self.biases, self.activations)):
            if act not in _ACTIVATIONS:
                raise ValueError(f"layer {i}: unknown activation {act!r}")
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise ValueError(f"layer {i}: weight {w.shape} and bias {b.shape} do not chain")
            if i > 0 and w.shape[1] != self.weights[i - 1].shape[0]:
                raise ValueError(
                    f"layer {i}: input dim {w.shape[1]} != previous output {self.weights[i-1].shape[0]}"
                )

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def output_dim(self) -> int:
        return self.weights[-1].shape[0]

    def parameters(self) -> list[np.ndarray]:
        """Flat parameter list [W0, b0, W1, b1, ...] (views, not copies)."""
        out: list[np.ndarray] = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def copy(self) -> "Mlp":
        return Mlp([w.copy() for w in self.weights], [b.copy() for b in self.biases], list(self.activations))


def init_mlp(dims: tuple[int, ...], rng: RngStream, output_activation: str = "identity") -> Mlp:
    """Build an Mlp with relu hidden layers and Glorot-uniform weights.

    ``dims`` chains input through hidden widths to the output dimension, e.g.
    ``(11, 64, 64, 1)``.  Weights are uniform on +-sqrt(6/(fan_in+fan_out)),
    biases zero; the final layer uses ``output_activation``.
    """
    if len(dims) < 2:
        raise ValueError("need at least an input and an output dimension")
    weights, biases, activations = [], [], []
    for i in range(len(dims) - 1):
        fan_in, fan_out = dims[i], dims[i + 1]
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
        activations.append("relu" if i < len(dims) - 2 else output_activation)
    return Mlp(weights, biases, activations)


@dataclass
class Tape:
    """Activation cache from one forward pass, consumed by :func:`backward`."""

    inputs: list[np.ndarray]  # layer inputs, batch-first (B, in_i)
    preacts: list[np.ndarray]  # pre-activation values (B, out_i)
    squeezed: bool  # True when the caller passed a single vector


def _as_batch(x: np.ndarray) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return x[None, :], True
    if x.ndim == 2:
        return x, False
    raise ValueError(f"input must be a vector or a batch matrix, got ndim={x.ndim}")


def forward(net: Mlp, x: np.ndarray) -> tuple[np.ndarray, Tape]:
    """Run the network on a vector or a (B, input_dim) batch.

    Returns the output (matching the input's batch shape) and the tape needed
    for :func:`backward`.
    """
    h, squeezed = _as_batch(x)
    if h.shape[1] != net.input_dim:
        raise ValueError(f"input has {h.shape[1]} features, network expects {net.input_dim}")
    inputs, preacts = [], []
    for w, b, act in zip(net.weights, net.biases, net.activations):
        inputs.append(h)
        z = h @ w.T + b
        preacts.append(z)
        h = np.maximum(z, 0.0) if act == "relu" else z
    tape = Tape(inputs, preacts, squeezed)
    return (h[0] if squeezed else h), tape


def backward(net: Mlp, tape: Tape, output_grad: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
    """Backpropagate ``output_grad`` (dLoss/dOutput) through the tape.

    Returns ``(param_grads, input_grad)`` where ``param_grads`` matches the
    layout of ``net.parameters()``.  For a batch, gradients are summed over
    the batch dimension (the caller scales ``output_grad`` for mean losses).
    """
    g = np.asarray(output_grad, dtype=float)
    if tape.squeezed:
        g = g[None, :] if g.ndim == 1 else g.reshape(1, -1)
    if g.shape != tape.preacts[-1].shape:
        raise ValueError(f"output_grad shape {g.shape} != forward output shape {tape.preacts[-1].shape}")
    grads_w: list[np.ndarray] = [None] * len(net.weights)  # type: ignore[list-item]
    grads_b: list[np.ndarray] = [None] * len(net.weights)  # type: ignore[list-item]
    for i in range(len(net.weights) - 1, -1, -1):
        if net.activations[i] == "relu":
            g = g * (tape.preacts[i] > 0.0)
        grads_w[i] = g.T @ tape.inputs[i]
        grads_b[i] = g.sum(axis=0)
        g = g @ net.weights[i]
    param_grads: list[np.ndarray] = []
    for gw, gb in zip(grads_w, grads_b):
        param_grads.append(gw)
        param_grads.append(gb)
    input_grad = g[0] if tape.squeezed else g
    return param_grads, input_grad


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------


@dataclass
class AdamState:
    """Bias-corrected Adam optimizer state for a flat parameter list."""

    lr: float
    beta1: float
    beta2: float
    eps: float
    m: list[np.ndarray] = field(repr=False)
    v: list[np.ndarray] = field(repr=False)
    step: int = 0


def adam_init(
    params: list[np.ndarray],
    lr: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> AdamState:
    return AdamState(
        lr=lr,
        beta1=beta1,
        beta2=beta2,
        eps=eps,
        m=[np.zeros_like(p) for p in params],
        v=[np.zeros_like(p) for p in params],
    )


def adam_step(params: list[np.ndarray], grads: list[np.ndarray], state: AdamState) -> AdamState:
    """Apply one in-place bias-corrected Adam update to ``params``."""
    if len(params) != len(state.m) or len(params) != len(grads):
        raise ValueError("params, grads and Adam state have mismatched lengths")
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1**state.step
    bc2 = 1.0 - b2**state.step
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape:
            raise ValueError(f"gradient shape {g.shape} != parameter shape {p.shape}")
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
    return state


# ---------------------------------------------------------------------------
# Word embeddings (textual variant)
# ---------------------------------------------------------------------------


@dataclass
class EmbeddingTable:
    """Mean-aggregated word embeddings with a reserved unknown-word row.

    ``vectors`` has one row per vocabulary word plus a final reserved row for
    unknown words.  A description embeds to the mean of its word rows (order
    therefore does not matter); the empty description embeds to the zero
    vector.
    """

    vocab: dict[str, int]
    vectors: np.ndarray

    def __post_init__(self) -> None:
        if self.vectors.ndim != 2:
            raise ValueError("vectors must be a 2-D matrix")
        if len(self.vocab) + 1 != self.vectors.shape[0]:
            raise ValueError("vectors must have exactly one row per vocab word plus the unknown row")
        for word, idx in self.vocab.items():
            if not 0 <= idx < self.vectors.shape[0] - 1:
                raise ValueError(f"vocab word {word!r} maps to invalid row {idx}")

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def unknown_index(self) -> int:
        return self.vectors.shape[0] - 1

    def row_indices(self, words: list[str]) -> list[int]:
        unk = self.unknown_index
        return [self.vocab.get(w, unk) for w in words]

    def embed(self, words: list[str]) -> np.ndarray:
        """Mean of the word rows; zero vector for the empty description."""
        if not words:
            return np.zeros(self.dim)
        return self.vectors[self.row_indices(words)].mean(axis=0)


def init_embedding(vocab_words: list[str], dim: int, rng: RngStream) -> EmbeddingTable:
    """Embedding table over ``vocab_words`` (plus unknown row), Glorot-style init."""
    vocab = {w: i for i, w in enumerate(vocab_words)}
    bound = np.sqrt(6.0 / (len(vocab) + 1 + dim))
    vectors = rng.uniform(-bound, bound, size=(len(vocab) + 1, dim))
    return EmbeddingTable(vocab, vectors)
