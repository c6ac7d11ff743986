"""Conditional deep generative demand model (cDGM).

Trains a generator G(x, p, eta), eta ~ N(0, I_r), whose outputs approximate
the conditional demand law D | (X=x, P=p), then samples it for downstream
decisions.  Two trainers are available:

- ``energy_score`` (default): minimizes the energy score, a strictly proper
  scoring rule — per record, with m generated samples d_hat_1..d_hat_m and
  observed demand d,

      (1/m) sum_j |d_hat_j - d| - (1/(2 m^2)) sum_{j,k} |d_hat_j - d_hat_k|,

  whose population minimizer is the true conditional distribution.
- ``adversarial``: a conditional GAN — a discriminator scores (x, p, d)
  triplets with binary cross-entropy against generated triplets, and the
  generator takes non-saturating steps.

Inputs and demand are standardized to zero mean / unit scale before
training; generated demands are de-standardized and clipped to the model's
demand bounds at sampling time only.  Training is deterministic given the
config seed.  The textual variant embeds descriptions with a jointly trained
mean-aggregated word-embedding table.

Estimator wrappers (:class:`GeneratorEstimator`, the textual
:class:`TextGeneratorEstimator`) expose the scikit-learn fit/get_params
idiom with the price as the last design-matrix column.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .data import Dataset
from .nets import EmbeddingTable, Mlp, adam_init, adam_step, backward, forward, init_embedding, init_mlp
from .numerics import RngStream, derive_stream

__all__ = [
    "TrainConfig",
    "Standardizer",
    "Generator",
    "train",
    "generate",
    "generate_batch",
    "save",
    "load",
    "GeneratorEstimator",
    "TextGeneratorEstimator",
]

_FORMAT_NAME = "genvendor-generator"
_FORMAT_VERSION = 1

_STRATEGIES = ("energy_score", "adversarial")

#: Strategy-specific optimizer defaults, applied when the config leaves
#: ``lr``/``beta1`` unset: the scoring-rule trainer takes standard Adam, the
#: adversarial trainer the usual conditional-GAN schedule.
_STRATEGY_DEFAULTS = {"energy_score": (1e-3, 0.9), "adversarial": (2e-4, 0.5)}


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for :func:`train`.

    ``lr`` and ``beta1`` default per strategy (1e-3 / 0.9 for energy_score,
    2e-4 / 0.5 for adversarial).  ``samples_per_condition`` is the number m
    of fresh noise draws per record in the energy-score loss.
    """

    strategy: str = "energy_score"
    epochs: int = 300
    batch_size: int = 128
    lr: float | None = None
    beta1: float | None = None
    beta2: float = 0.999
    hidden: tuple[int, ...] = (64, 64)
    noise_dim: int = 5
    samples_per_condition: int = 10
    embed_dim: int = 8
    clip: tuple[float, float] = (0.0, 200.0)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.strategy not in _STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; expected one of {_STRATEGIES}")
        if min(self.epochs, self.batch_size, self.noise_dim, self.samples_per_condition, self.embed_dim) < 1:
            raise ValueError("epochs, batch_size, noise_dim, samples_per_condition, embed_dim must be positive")
        if not self.hidden or min(self.hidden) < 1:
            raise ValueError("hidden widths must be a nonempty tuple of positive ints")
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        object.__setattr__(self, "clip", (float(self.clip[0]), float(self.clip[1])))

    def resolved(self) -> tuple[float, float]:
        """Effective (lr, beta1) after applying strategy defaults."""
        lr_default, b1_default = _STRATEGY_DEFAULTS[self.strategy]
        return (self.lr if self.lr is not None else lr_default, self.beta1 if self.beta1 is not None else b1_default)


@dataclass(frozen=True)
class Standardizer:
    """Per-column affine scaling fitted on training data (scales > 0)."""

    input_mean: np.ndarray
    input_scale: np.ndarray
    demand_mean: float
    demand_scale: float

    def __post_init__(self) -> None:
        if np.any(self.input_scale <= 0.0) or self.demand_scale <= 0.0:
            raise ValueError("standardizer scales must be positive")

    @staticmethod
    def fit(inputs: np.ndarray, demands: np.ndarray) -> "Standardizer":
        mean = inputs.mean(axis=0)
        scale = inputs.std(axis=0)
        scale = np.where(scale < 1e-12, 1.0, scale)
        d_scale = float(demands.std())
        return Standardizer(mean, scale, float(demands.mean()), d_scale if d_scale >= 1e-12 else 1.0)

    def transform_inputs(self, inputs: np.ndarray) -> np.ndarray:
        return (inputs - self.input_mean) / self.input_scale

    def transform_demand(self, d: np.ndarray) -> np.ndarray:
        return (d - self.demand_mean) / self.demand_scale

    def inverse_demand(self, d_std: np.ndarray) -> np.ndarray:
        return d_std * self.demand_scale + self.demand_mean


@dataclass(frozen=True)
class Generator:
    """A trained conditional generator: deterministic in (x, p, eta)."""

    net: Mlp
    noise_dim: int
    standardizer: Standardizer
    clip: tuple[float, float]
    embedding: EmbeddingTable | None = None
    config: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self) -> None:
        if self.noise_dim < 1:
            raise ValueError("noise dimension must be at least 1")
        expected = len(self.standardizer.input_mean) + (self.embedding.dim if self.embedding else 0) + self.noise_dim
        if self.net.input_dim != expected:
            raise ValueError(f"net input dim {self.net.input_dim} != condition+noise dim {expected}")

    @property
    def is_text(self) -> bool:
        return self.embedding is not None

    def condition(self, x, p) -> np.ndarray:
        """Standardized condition vector for one (x, p) pair."""
        if self.is_text:
            words = _split_words(x)
            p_std = self.standardizer.transform_inputs(np.array([float(p)]))
            return np.concatenate([self.embedding.embed(words), p_std])
        raw = np.concatenate([np.asarray(x, dtype=float).ravel(), [float(p)]])
        return self.standardizer.transform_inputs(raw)

    def generate(self, x, p, M: int, rng: RngStream) -> np.ndarray:
        return generate(self, x, p, M, rng)


def _split_words(text: str) -> list[str]:
    return [w.strip().lower() for w in str(text).split(",") if w.strip()]


def _embedding_matrix(emb: EmbeddingTable, texts) -> tuple[np.ndarray, list[list[int]]]:
    """Embed each description; also return the row indices used per record."""
    index_lists = [emb.row_indices(_split_words(t)) for t in texts]
    out = np.zeros((len(index_lists), emb.dim))
    for i, idxs in enumerate(index_lists):
        if idxs:
            out[i] = emb.vectors[idxs].mean(axis=0)
    return out, index_lists


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------


def train(data: Dataset, cfg: TrainConfig | None = None) -> Generator:
    """Fit a conditional generator on the corpus (deterministic given seed).

    Numeric corpora condition on the standardized (x, p) columns; textual
    corpora on a jointly trained word embedding concatenated with the
    standardized price.  Raises on an empty corpus, and aborts with
    diagnostics if the training loss turns non-finite.
    """
    cfg = cfg or TrainConfig()
    if data.n == 0:
        raise ValueError("cannot train on an empty dataset")
    root = RngStream(cfg.seed, ("cdgm", "train"))

    if data.is_text:
        vocab = sorted({w for t in data.features for w in _split_words(t)})
        embedding = init_embedding(vocab, cfg.embed_dim, derive_stream(root, "init-embed"))
        raw_inputs = data.prices[:, None]
    else:
        embedding = None
        raw_inputs = data.xp_matrix()
    standardizer = Standardizer.fit(raw_inputs, data.demands)
    cond_fixed = standardizer.transform_inputs(raw_inputs)  # (n, k+1) or (n, 1) for text
    y = standardizer.transform_demand(data.demands)

    cond_dim = cond_fixed.shape[1] + (embedding.dim if embedding else 0)
    net = init_mlp((cond_dim + cfg.noise_dim, *cfg.hidden, 1), derive_stream(root, "init-gen"))

    if cfg.strategy == "energy_score":
        _train_energy(net, embedding, cond_fixed, y, data, cfg, root)
    else:
        _train_adversarial(net, embedding, cond_fixed, y, data, cfg, root)

    return Generator(
        net=net,
        noise_dim=cfg.noise_dim,
        standardizer=standardizer,
        clip=cfg.clip,
        embedding=embedding,
        config=cfg,
    )


def _batch_condition(
    embedding: EmbeddingTable | None, cond_fixed: np.ndarray, data: Dataset, idx: np.ndarray
) -> tuple[np.ndarray, list[list[int]] | None]:
    """Condition matrix for the records ``idx`` under current parameters."""
    if embedding is None:
        return cond_fixed[idx], None
    texts = [data.features[i] for i in idx]
    emb_rows, index_lists = _embedding_matrix(embedding, texts)
    return np.hstack([emb_rows, cond_fixed[idx]]), index_lists


def _scatter_embedding_grad(
    embedding: EmbeddingTable, index_lists: list[list[int]], grad_rows: np.ndarray
) -> np.ndarray:
    """Distribute condition-gradient rows back onto embedding rows (mean agg)."""
    grad = np.zeros_like(embedding.vectors)
    for i, idxs in enumerate(index_lists):
        if idxs:
            np.add.at(grad, idxs, grad_rows[i] / len(idxs))
    return grad


def _check_finite_loss(loss: float, strategy: str, epoch: int, batch: int) -> None:
    if not math.isfinite(loss):
        raise RuntimeError(
            f"non-finite {strategy} training loss {loss} at epoch {epoch}, batch {batch}; "
            "try a lower learning rate or smaller batches"
        )


def _train_energy(
    net: Mlp,
    embedding: EmbeddingTable | None,
    cond_fixed: np.ndarray,
    y: np.ndarray,
    data: Dataset,
    cfg: TrainConfig,
    root: RngStream,
) -> list[float]:
    """Energy-score loop; returns per-epoch mean losses (monotone on average)."""
    lr, beta1 = cfg.resolved()
    params = net.parameters() + ([embedding.vectors] if embedding else [])
    state = adam_init(params, lr=lr, beta1=beta1, beta2=cfg.beta2)
    rng_shuffle = derive_stream(root, "shuffle")
    rng_noise = derive_stream(root, "noise")
    n, m, r = len(y), cfg.samples_per_condition, cfg.noise_dim

    epoch_losses: list[float] = []
    for epoch in range(cfg.epochs):
        perm = rng_shuffle.permutation(n)
        total = 0.0
        for b_start in range(0, n, cfg.batch_size):
            idx = perm[b_start : b_start + cfg.batch_size]
            bsz = len(idx)
            cond, index_lists = _batch_condition(embedding, cond_fixed, data, idx)
            eta = rng_noise.standard_normal((bsz, m, r))
            inputs = np.concatenate(
                [np.repeat(cond[:, None, :], m, axis=1), eta], axis=2
            ).reshape(bsz * m, -1)
            out, tape = forward(net, inputs)
            d_hat = out.reshape(bsz, m)
            resid = d_hat - y[idx][:, None]  # (B, m)
            pair = d_hat[:, :, None] - d_hat[:, None, :]  # (B, m, m)
            loss = float(np.mean(np.abs(resid).mean(axis=1) - np.abs(pair).sum(axis=(1, 2)) / (2.0 * m * m)))
            _check_finite_loss(loss, "energy_score", epoch, b_start // cfg.batch_size)
            total += loss * bsz
            # dLoss/dd_hat_ij = sign(d_hat_ij - d_i)/m - sum_k sign(d_hat_ij - d_hat_ik)/m^2,
            # averaged over the batch.
            g = (np.sign(resid) / m - np.sign(pair).sum(axis=2) / (m * m)) / bsz
            param_grads, input_grad = backward(net, tape, g.reshape(bsz * m, 1))
            if embedding is not None:
                cond_grad = input_grad[:, : embedding.dim].reshape(bsz, m, embedding.dim).sum(axis=1)
                param_grads = param_grads + [_scatter_embedding_grad(embedding, index_lists, cond_grad)]
            adam_step(params, param_grads, state)
        epoch_losses.append(total / n)
    return epoch_losses


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softplus(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


def _train_adversarial(
    net: Mlp,
    embedding: EmbeddingTable | None,
    cond_fixed: np.ndarray,
    y: np.ndarray,
    data: Dataset,
    cfg: TrainConfig,
    root: RngStream,
) -> list[float]:
    """Conditional-GAN loop: one BCE discriminator step, one non-saturating
    generator step per batch; returns per-epoch generator losses."""
    lr, beta1 = cfg.resolved()
    cond_dim = net.input_dim - cfg.noise_dim
    disc = init_mlp((cond_dim + 1, *cfg.hidden, 1), derive_stream(root, "init-disc"))
    gen_params = net.parameters() + ([embedding.vectors] if embedding else [])
    gen_state = adam_init(gen_params, lr=lr, beta1=beta1, beta2=cfg.beta2)
    disc_state = adam_init(disc.parameters(), lr=lr, beta1=beta1, beta2=cfg.beta2)
    rng_shuffle = derive_stream(root, "shuffle")
    rng_noise = derive_stream(root, "noise")
    n, r = len(y), cfg.noise_dim

    epoch_losses: list[float] = []
    for epoch in range(cfg.epochs):
        perm = rng_shuffle.permutation(n)
        total = 0.0
        for b_start in range(0, n, cfg.batch_size):
            idx = perm[b_start : b_start + cfg.batch_size]
            bsz = len(idx)
            cond, index_lists = _batch_condition(embedding, cond_fixed, data, idx)

            # Discriminator step: real (cond, d) up, generated (cond, d_hat) down.
            eta = rng_noise.standard_normal((bsz, r))
            fake, _ = forward(net, np.hstack([cond, eta]))
            real_logit, real_tape = forward(disc, np.hstack([cond, y[idx][:, None]]))
            fake_logit, fake_tape = forward(disc, np.hstack([cond, fake]))
            d_loss = float(np.mean(_softplus(-real_logit)) + np.mean(_softplus(fake_logit)))
            _check_finite_loss(d_loss, "adversarial (discriminator)", epoch, b_start // cfg.batch_size)
            g_real, _ = backward(disc, real_tape, -_sigmoid(-real_logit) / bsz)
            g_fake, _ = backward(disc, fake_tape, _sigmoid(fake_logit) / bsz)
            adam_step(disc.parameters(), [a + b for a, b in zip(g_real, g_fake)], disc_state)

            # Generator step (non-saturating): push D(cond, G(cond, eta)) up.
            eta = rng_noise.standard_normal((bsz, r))
            gen_in = np.hstack([cond, eta])
            fake, gen_tape = forward(net, gen_in)
            fake_logit, fake_tape = forward(disc, np.hstack([cond, fake]))
            g_loss = float(np.mean(_softplus(-fake_logit)))
            _check_finite_loss(g_loss, "adversarial (generator)", epoch, b_start // cfg.batch_size)
            _, disc_in_grad = backward(disc, fake_tape, -_sigmoid(-fake_logit) / bsz)
            param_grads, gen_in_grad = backward(net, gen_tape, disc_in_grad[:, -1:])
            if embedding is not None:
                # Condition enters both the generator input and the
                # discriminator input; both paths feed the embedding.
                cond_grad = gen_in_grad[:, : embedding.dim] + disc_in_grad[:, : embedding.dim]
                param_grads = param_grads + [_scatter_embedding_grad(embedding, index_lists, cond_grad)]
            adam_step(gen_params, param_grads, gen_state)
            total += g_loss * bsz
        epoch_losses.append(total / n)
    return epoch_losses


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def generate(gen: Generator, x, p, M: int, rng: RngStream) -> np.ndarray:
    """Generate M demand samples at (x, p), de-standardized, clipped, sorted."""
    if M < 1:
        raise ValueError("M must be at least 1")
    cond = gen.condition(x, p)
    eta = rng.standard_normal((int(M), gen.noise_dim))
    inputs = np.hstack([np.broadcast_to(cond, (int(M), cond.size)), eta])
    out, _ = forward(gen.net, inputs)
    d = gen.standardizer.inverse_demand(out[:, 0])
    return np.sort(np.clip(d, gen.clip[0], gen.clip[1]))


def generate_batch(gen: Generator, xs, ps, M: int, rng: RngStream) -> np.ndarray:
    """Row-wise sorted samples for many conditions at once: (B, M) array.

    Row i holds M samples at (xs[i], ps[i]); used by the experiment harness
    to avoid per-condition Python overhead.
    """
    if M < 1:
        raise ValueError("M must be at least 1")
    conds = np.stack([gen.condition(x, p) for x, p in zip(xs, ps)])
    B, c = conds.shape
    eta = rng.standard_normal((B, int(M), gen.noise_dim))
    inputs = np.concatenate([np.repeat(conds[:, None, :], int(M), axis=1), eta], axis=2)
    out, _ = forward(gen.net, inputs.reshape(B * int(M), c + gen.noise_dim))
    d = gen.standardizer.inverse_demand(out[:, 0]).reshape(B, int(M))
    return np.sort(np.clip(d, gen.clip[0], gen.clip[1]), axis=1)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def save(gen: Generator) -> bytes:
    """Serialize a Generator to a versioned JSON payload (round trips exactly)."""
    from . import __version__

    payload = {
        "format": _FORMAT_NAME,
        "version": _FORMAT_VERSION,
        "package_version": __version__,
        "noise_dim": gen.noise_dim,
        "clip": list(gen.clip),
        "standardizer": {
            "input_mean": gen.standardizer.input_mean.tolist(),
            "input_scale": gen.standardizer.input_scale.tolist(),
            "demand_mean": gen.standardizer.demand_mean,
            "demand_scale": gen.standardizer.demand_scale,
        },
        "layers": [
            {"weights": w.tolist(), "bias": b.tolist(), "activation": a}
            for w, b, a in zip(gen.net.weights, gen.net.biases, gen.net.activations)
        ],
        "embedding": (
            {"vocab": gen.embedding.vocab, "vectors": gen.embedding.vectors.tolist()} if gen.embedding else None
        ),
        "config": asdict(gen.config),
    }
    return json.dumps(payload, sort_keys=True).encode("utf-8")


def load(blob: bytes) -> Generator:
    """Reconstruct a Generator from :func:`save` output.

    Raises ValueError on malformed payloads and on format/version mismatch;
    never returns a partial model.
    """
    try:
        payload = json.loads(blob.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValueError(f"malformed generator payload: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != _FORMAT_NAME:
        raise ValueError(f"malformed generator payload: missing format marker {_FORMAT_NAME!r}")
    if payload.get("version") != _FORMAT_VERSION:
        raise ValueError(
            f"incompatible generator version {payload.get('version')!r}; this build reads version {_FORMAT_VERSION}"
        )
    try:
        std = payload["standardizer"]
        standardizer = Standardizer(
            np.asarray(std["input_mean"], dtype=float),
            np.asarray(std["input_scale"], dtype=float),
            float(std["demand_mean"]),
            float(std["demand_scale"]),
        )
        net = Mlp(
            [np.asarray(layer["weights"], dtype=float) for layer in payload["layers"]],
            [np.asarray(layer["bias"], dtype=float) for layer in payload["layers"]],
            [layer["activation"] for layer in payload["layers"]],
        )
        emb = payload["embedding"]
        embedding = (
            EmbeddingTable({str(k): int(v) for k, v in emb["vocab"].items()}, np.asarray(emb["vectors"], dtype=float))
            if emb
            else None
        )
        cfg_dict = dict(payload["config"])
        cfg_dict["hidden"] = tuple(cfg_dict["hidden"])
        cfg_dict["clip"] = tuple(cfg_dict["clip"])
        config = TrainConfig(**cfg_dict)
        return Generator(
            net=net,
            noise_dim=int(payload["noise_dim"]),
            standardizer=standardizer,
            clip=(float(payload["clip"][0]), float(payload["clip"][1])),
            embedding=embedding,
            config=config,
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise ValueError(f"malformed generator payload: {exc!r}") from exc


# ---------------------------------------------------------------------------
# scikit-learn style estimators
# ---------------------------------------------------------------------------


class GeneratorEstimator(BaseEstimator):
    """Conditional generative demand model with a scikit-learn interface.

    ``fit(X, y)`` expects a design matrix whose LAST column is the price and
    whose remaining columns are features, with y the realized demands.
    After fitting, ``generator_`` holds the trained :class:`Generator`;
    ``sample`` draws demand samples per row and ``predict`` returns the
    conditional median estimate.
    """

    def __init__(
        self,
        strategy: str = "energy_score",
        epochs: int = 300,
        batch_size: int = 128,
        lr: float | None = None,
        beta1: float | None = None,
        beta2: float = 0.999,
        hidden: tuple[int, ...] = (64, 64),
        noise_dim: int = 5,
        samples_per_condition: int = 10,
        clip: tuple[float, float] = (0.0, 200.0),
        seed: int = 0,
    ):
        self.strategy = strategy
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.hidden = hidden
        self.noise_dim = noise_dim
        self.samples_per_condition = samples_per_condition
        self.clip = clip
        self.seed = seed

    def _config(self) -> TrainConfig:
        return TrainConfig(
            strategy=self.strategy,
            epochs=self.epochs,
            batch_size=self.batch_size,
            lr=self.lr,
            beta1=self.beta1,
            beta2=self.beta2,
            hidden=tuple(self.hidden),
            noise_dim=self.noise_dim,
            samples_per_condition=self.samples_per_condition,
            clip=tuple(self.clip),
            seed=self.seed,
        )

    def fit(self, X, y) -> "GeneratorEstimator":
        X = check_array(X, ensure_min_features=2)
        y = np.asarray(y, dtype=float).ravel()
        if len(y) != X.shape[0]:
            raise ValueError(f"X has {X.shape[0]} rows but y has {len(y)} values")
        data = Dataset(X[:, :-1], X[:, -1], y)
        self.n_features_in_ = X.shape[1]
        self.generator_ = train(data, self._config())
        return self

    def sample(self, X, M: int = 1000, rng: RngStream | None = None) -> np.ndarray:
        """Sorted demand samples per row of X: an (n_rows, M) array."""
        check_is_fitted(self, "generator_")
        X = check_array(X, ensure_min_features=2)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} columns, expected {self.n_features_in_}")
        rng = rng or RngStream(self.seed, ("estimator", "sample"))
        return generate_batch(self.generator_, list(X[:, :-1]), X[:, -1], M, rng)

    def predict(self, X, M: int = 512) -> np.ndarray:
        """Conditional median demand estimate per row (from M samples)."""
        samples = self.sample(X, M=M, rng=RngStream(self.seed, ("estimator", "predict")))
        return np.median(samples, axis=1)


class TextGeneratorEstimator(GeneratorEstimator):
    """Textual-feature variant: rows are (description, price) pairs.

    ``fit(X, y)`` accepts X as a sequence of (text, price) pairs; a word
    embedding over the corpus vocabulary is trained jointly with the
    generator network.
    """

    def __init__(
        self,
        strategy: str = "energy_score",
        epochs: int = 300,
        batch_size: int = 128,
        lr: float | None = None,
        beta1: float | None = None,
        beta2: float = 0.999,
        hidden: tuple[int, ...] = (64, 64),
        noise_dim: int = 5,
        samples_per_condition: int = 10,
        clip: tuple[float, float] = (0.0, 200.0),
        seed: int = 0,
        embed_dim: int = 8,
    ):
        super().__init__(
            strategy=strategy,
            epochs=epochs,
            batch_size=batch_size,
            lr=lr,
            beta1=beta1,
            beta2=beta2,
            hidden=hidden,
            noise_dim=noise_dim,
            samples_per_condition=samples_per_condition,
            clip=clip,
            seed=seed,
        )
        self.embed_dim = embed_dim

    @staticmethod
    def _unpack(X) -> tuple[tuple[str, ...], np.ndarray]:
        texts, prices = [], []
        for row in X:
            if len(row) != 2:
                raise ValueError("each row must be a (text, price) pair")
            texts.append(str(row[0]))
            prices.append(float(row[1]))
        return tuple(texts), np.asarray(prices)

    def fit(self, X, y) -> "TextGeneratorEstimator":
        texts, prices = self._unpack(X)
        y = np.asarray(y, dtype=float).ravel()
        if len(y) != len(texts):
            raise ValueError(f"X has {len(texts)} rows but y has {len(y)} values")
        cfg = self._config()
        cfg = TrainConfig(**{**asdict(cfg), "embed_dim": self.embed_dim})
        self.n_features_in_ = 2
        self.generator_ = train(Dataset(texts, prices, y), cfg)
        return self

    def sample(self, X, M: int = 1000, rng: RngStream | None = None) -> np.ndarray:
        check_is_fitted(self, "generator_")
        texts, prices = self._unpack(X)
        rng = rng or RngStream(self.seed, ("estimator", "sample"))
        return generate_batch(self.generator_, list(texts), prices, M, rng)
