"""Compact attention-based next-tactic classifier, implemented on numpy.

The architecture is a conventional pre-norm encoder: token+position
embeddings, ``layers`` blocks of multi-head self-attention (PAD keys masked
to exactly zero weight) and a GELU feed-forward, a final layer norm, and a
classifier over the vocabulary read from the CLS position.  Forward and
backward passes are hand-written; gradients are exact for the mean
cross-entropy loss and are verified against finite differences in the test
suite.

Numeric policy: parameters and activations are float32; softmax
normalizers, layer-norm statistics, and means accumulate in float64.  All
functions also accept float64 parameters (used by the gradient checks).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .corpus import CLS, N_SPECIALS, PAD, Vocabulary
from .errors import EmptyContext, InvalidConfig, InvalidId, InvalidLabel
from .rng import SplitMix64

LN_EPS = 1e-5
_GELU_C = math.sqrt(2.0 / math.pi)
_GELU_A = 0.044715


@dataclass(frozen=True)
class ModelConfig:
    window: int = 32
    embed_dim: int = 128
    heads: int = 4
    layers: int = 2
    ffn_dim: int = 256
    dropout: float = 0.1
    lr: float = 3e-4
    batch: int = 64
    epochs: int = 30
    seed: int = 0

    def __post_init__(self):
        counts = (
            self.window,
            self.embed_dim,
            self.heads,
            self.layers,
            self.ffn_dim,
            self.batch,
            self.epochs,
        )
        if any(c < 1 for c in counts):
            raise InvalidConfig("all size fields must be >= 1")
        if self.embed_dim % self.heads != 0:
            raise InvalidConfig("embed_dim must be divisible by heads")
        if not (0.0 <= self.dropout < 1.0):
            raise InvalidConfig("dropout must be in [0, 1)")
        if self.lr <= 0:
            raise InvalidConfig("lr must be positive")

    def to_dict(self) -> dict:
        return {
            "window": self.window,
            "embed_dim": self.embed_dim,
            "heads": self.heads,
            "layers": self.layers,
            "ffn_dim": self.ffn_dim,
            "dropout": self.dropout,
            "lr": self.lr,
            "batch": self.batch,
            "epochs": self.epochs,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "ModelConfig":
        return cls(**obj)

    def with_(self, **kwargs) -> "ModelConfig":
        return replace(self, **kwargs)


def encode_context(
    context: list[str] | tuple[str, ...], vocab: Vocabulary, window: int
) -> np.ndarray:
    """Map a context to a fixed-length id sequence.

    The most recent ``window - 1`` tokens are kept, CLS is prepended, and
    the sequence is left-padded with PAD to exactly ``window`` ids.
    """
    if not context:
        raise EmptyContext("cannot encode an empty context")
    kept = list(context)[-(window - 1) :] if window > 1 else []
    ids = [CLS] + [vocab.encode(t) for t in kept]
    return np.asarray([PAD] * (window - len(ids)) + ids, dtype=np.int32)


def encode_batch(
    contexts: list, vocab: Vocabulary, window: int
) -> np.ndarray:
    return np.stack([encode_context(c, vocab, window) for c in contexts])


# ---------------------------------------------------------------------------
# Parameters


def init_params(config: ModelConfig, vocab_size: int) -> dict[str, np.ndarray]:
    """Seeded uniform [-1/sqrt(fan_in), 1/sqrt(fan_in)] initialization.

    Weight matrices are drawn from the seeded stream in a fixed order --
    tok_emb, pos_emb, then per layer wq, wk, wv, wo, w1, w2, then cls.w --
    so identical (config, vocab_size, seed) give bit-identical parameters.
    Biases start at zero, layer-norm gains at one, and the PAD embedding
    row is zeroed after drawing.
    """
    stream = SplitMix64(config.seed).split(0x1A17)
    d, w, f = config.embed_dim, config.window, config.ffn_dim
    dtype = np.float32

    def draw(shape: tuple[int, ...], fan_in: int) -> np.ndarray:
        bound = 1.0 / math.sqrt(fan_in)
        u = stream.next_floats(int(np.prod(shape)))
        return ((2.0 * u - 1.0) * bound).reshape(shape).astype(dtype)

    params: dict[str, np.ndarray] = {}
    params["tok_emb"] = draw((vocab_size, d), d)
    params["tok_emb"][PAD] = 0.0
    params["pos_emb"] = draw((w, d), d)
    for i in range(config.layers):
        p = f"layer{i}."
        params[p + "ln1.g"] = np.ones(d, dtype=dtype)
        params[p + "ln1.b"] = np.zeros(d, dtype=dtype)
        params[p + "wq"] = draw((d, d), d)
        params[p + "bq"] = np.zeros(d, dtype=dtype)
        params[p + "wk"] = draw((d, d), d)
        params[p + "bk"] = np.zeros(d, dtype=dtype)
        params[p + "wv"] = draw((d, d), d)
        params[p + "bv"] = np.zeros(d, dtype=dtype)
        params[p + "wo"] = draw((d, d), d)
        params[p + "bo"] = np.zeros(d, dtype=dtype)
        params[p + "ln2.g"] = np.ones(d, dtype=dtype)
        params[p + "ln2.b"] = np.zeros(d, dtype=dtype)
        params[p + "w1"] = draw((d, f), d)
        params[p + "b1"] = np.zeros(f, dtype=dtype)
        params[p + "w2"] = draw((f, d), f)
        params[p + "b2"] = np.zeros(d, dtype=dtype)
    params["lnf.g"] = np.ones(d, dtype=dtype)
    params["lnf.b"] = np.zeros(d, dtype=dtype)
    params["cls.w"] = draw((d, vocab_size), d)
    params["cls.b"] = np.zeros(vocab_size, dtype=dtype)
    return params


def param_count(params: dict[str, np.ndarray]) -> int:
    return sum(int(p.size) for p in params.values())


def make_dropout_masks(
    stream: SplitMix64, config: ModelConfig, n: int, dtype=np.float32
) -> dict[str, np.ndarray] | None:
    """Inverted-dropout masks for one batch, drawn in a fixed site order."""
    p = config.dropout
    if p == 0.0:
        return None
    w, d, h = config.window, config.embed_dim, config.heads
    scale = 1.0 / (1.0 - p)

    def mask(shape: tuple[int, ...]) -> np.ndarray:
        u = stream.next_floats(int(np.prod(shape))).reshape(shape)
        return ((u >= p) * scale).astype(dtype)

    masks = {"emb": mask((n, w, d))}
    for i in range(config.layers):
        masks[f"layer{i}.attn"] = mask((n, h, w, w))
        masks[f"layer{i}.attn_out"] = mask((n, w, d))
        masks[f"layer{i}.ffn_out"] = mask((n, w, d))
    return masks


# ---------------------------------------------------------------------------
# Layer math (forward + backward share these helpers)


def _layernorm_fwd(x: np.ndarray, g: np.ndarray, b: np.ndarray):
    dtype = x.dtype
    mu = x.mean(axis=-1, keepdims=True, dtype=np.float64).astype(dtype)
    xc = x - mu
    var = np.mean(np.square(xc), axis=-1, keepdims=True, dtype=np.float64)
    inv = (1.0 / np.sqrt(var + LN_EPS)).astype(dtype)
    xhat = xc * inv
    return g * xhat + b, (xhat, inv, g)


def _layernorm_bwd(dy: np.ndarray, cache) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    xhat, inv, g = cache
    dtype = dy.dtype
    axes = tuple(range(dy.ndim - 1))
    dg = np.sum(dy * xhat, axis=axes, dtype=np.float64).astype(dtype)
    db = np.sum(dy, axis=axes, dtype=np.float64).astype(dtype)
    dxhat = dy * g
    m1 = np.mean(dxhat, axis=-1, keepdims=True, dtype=np.float64).astype(dtype)
    m2 = np.mean(dxhat * xhat, axis=-1, keepdims=True, dtype=np.float64).astype(dtype)
    dx = inv * (dxhat - m1 - xhat * m2)
    return dx, dg, db


def _gelu_fwd(x: np.ndarray):
    u = _GELU_C * (x + _GELU_A * x * x * x)
    t = np.tanh(u)
    return 0.5 * x * (1.0 + t), (x, t)


def _gelu_bwd(dy: np.ndarray, cache) -> np.ndarray:
    x, t = cache
    du = _GELU_C * (1.0 + 3.0 * _GELU_A * x * x)
    return dy * (0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du)


def _split_heads(x: np.ndarray, heads: int) -> np.ndarray:
    n, w, d = x.shape
    return x.reshape(n, w, heads, d // heads).transpose(0, 2, 1, 3)


def _merge_heads(x: np.ndarray) -> np.ndarray:
    n, h, w, dh = x.shape
    return x.transpose(0, 2, 1, 3).reshape(n, w, h * dh)


# ---------------------------------------------------------------------------
# Forward


def forward(
    params: dict[str, np.ndarray],
    ids: np.ndarray,
    config: ModelConfig,
    masks: dict[str, np.ndarray] | None = None,
    want_cache: bool = False,
):
    """Logits over the vocabulary for a batch of id sequences.

    ``ids`` has shape (n, window); returns (n, vocab) logits, plus the
    activation cache when ``want_cache``.  PAD positions are excluded from
    every attention row; the classifier reads the CLS position (the first
    non-PAD index of each row).
    """
    ids = np.atleast_2d(np.asarray(ids))
    vocab_size = params["tok_emb"].shape[0]
    if ids.shape[1] != config.window:
        raise InvalidConfig(f"ids must have width {config.window}")
    if ids.min() < 0 or ids.max() >= vocab_size:
        raise InvalidId("token id out of range")
    dtype = params["tok_emb"].dtype
    n, w = ids.shape
    heads = config.heads
    dh = config.embed_dim // heads
    scale = dtype.type(1.0 / math.sqrt(dh))

    real = ids != PAD  # (n, w); every row contains at least CLS
    key_mask = real[:, None, None, :]

    x = params["tok_emb"][ids] + params["pos_emb"][None, :, :]
    if masks is not None:
        x = x * masks["emb"]
    cache: dict = {"ids": ids, "real": real, "x0": x}
    layer_caches = []

    for i in range(config.layers):
        p = f"layer{i}."
        h1, ln1_cache = _layernorm_fwd(x, params[p + "ln1.g"], params[p + "ln1.b"])
        q = _split_heads(h1 @ params[p + "wq"] + params[p + "bq"], heads)
        k = _split_heads(h1 @ params[p + "wk"] + params[p + "bk"], heads)
        v = _split_heads(h1 @ params[p + "wv"] + params[p + "bv"], heads)
        s = (q @ k.transpose(0, 1, 3, 2)) * scale
        smax = np.where(key_mask, s, -np.inf).max(axis=-1, keepdims=True)
        e = np.exp(np.where(key_mask, s - smax, 0.0)) * key_mask
        denom = e.sum(axis=-1, keepdims=True, dtype=np.float64)
        attn = np.divide(e, denom).astype(dtype)
        attn_kept = attn
        if masks is not None:
            attn_kept = attn * masks[p + "attn"]
        ctx = _merge_heads(attn_kept @ v)
        out = ctx @ params[p + "wo"] + params[p + "bo"]
        if masks is not None:
            out = out * masks[p + "attn_out"]
        x_attn = x + out
        h2, ln2_cache = _layernorm_fwd(x_attn, params[p + "ln2.g"], params[p + "ln2.b"])
        f1 = h2 @ params[p + "w1"] + params[p + "b1"]
        g, gelu_cache = _gelu_fwd(f1)
        f2 = g @ params[p + "w2"] + params[p + "b2"]
        if masks is not None:
            f2 = f2 * masks[p + "ffn_out"]
        x = x_attn + f2
        layer_caches.append(
            {
                "ln1": ln1_cache,
                "h1": h1,
                "q": q,
                "k": k,
                "v": v,
                "attn": attn,
                "attn_kept": attn_kept,
                "ln2": ln2_cache,
                "h2": h2,
                "gelu": gelu_cache,
                "g": g,
                "x_attn": x_attn,
            }
        )

    hf, lnf_cache = _layernorm_fwd(x, params["lnf.g"], params["lnf.b"])
    cls_pos = np.argmax(real, axis=1)
    cls_h = hf[np.arange(n), cls_pos]
    logits = cls_h @ params["cls.w"] + params["cls.b"]

    if not want_cache:
        return logits
    cache.update(
        {
            "layers": layer_caches,
            "lnf": lnf_cache,
            "hf_shape": hf.shape,
            "cls_pos": cls_pos,
            "cls_h": cls_h,
            "masks": masks,
            "scale": scale,
            "heads": heads,
        }
    )
    return logits, cache


def softmax_probs(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax in float64 (normalizer accumulated in float64)."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


# ---------------------------------------------------------------------------
# Backward


def backward(
    params: dict[str, np.ndarray], cache: dict, dlogits: np.ndarray, config: ModelConfig
) -> dict[str, np.ndarray]:
    dtype = params["tok_emb"].dtype
    grads = {name: None for name in params}
    masks = cache["masks"]
    heads = cache["heads"]
    scale = cache["scale"]
    ids = cache["ids"]
    n, w = ids.shape

    cls_h = cache["cls_h"]
    grads["cls.w"] = cls_h.T @ dlogits
    grads["cls.b"] = dlogits.sum(axis=0, dtype=np.float64).astype(dtype)
    dcls_h = dlogits @ params["cls.w"].T

    dhf = np.zeros(cache["hf_shape"], dtype=dtype)
    dhf[np.arange(n), cache["cls_pos"]] = dcls_h
    dx, grads["lnf.g"], grads["lnf.b"] = _layernorm_bwd(dhf, cache["lnf"])

    for i in range(config.layers - 1, -1, -1):
        p = f"layer{i}."
        lc = cache["layers"][i]

        # feed-forward block
        df2 = dx
        if masks is not None:
            df2 = df2 * masks[p + "ffn_out"]
        g = lc["g"]
        grads[p + "w2"] = g.reshape(-1, g.shape[-1]).T @ df2.reshape(-1, df2.shape[-1])
        grads[p + "b2"] = df2.sum(axis=(0, 1), dtype=np.float64).astype(dtype)
        dg = df2 @ params[p + "w2"].T
        df1 = _gelu_bwd(dg, lc["gelu"])
        h2 = lc["h2"]
        grads[p + "w1"] = h2.reshape(-1, h2.shape[-1]).T @ df1.reshape(-1, df1.shape[-1])
        grads[p + "b1"] = df1.sum(axis=(0, 1), dtype=np.float64).astype(dtype)
        dh2 = df1 @ params[p + "w1"].T
        dx_attn, grads[p + "ln2.g"], grads[p + "ln2.b"] = _layernorm_bwd(dh2, lc["ln2"])
        dx_attn = dx_attn + dx  # residual

        # attention block
        dout = dx_attn
        if masks is not None:
            dout = dout * masks[p + "attn_out"]
        ctx = _merge_heads(lc["attn_kept"] @ lc["v"])
        grads[p + "wo"] = ctx.reshape(-1, ctx.shape[-1]).T @ dout.reshape(-1, dout.shape[-1])
        grads[p + "bo"] = dout.sum(axis=(0, 1), dtype=np.float64).astype(dtype)
        dctx = _split_heads(dout @ params[p + "wo"].T, heads)

        dattn_kept = dctx @ lc["v"].transpose(0, 1, 3, 2)
        dv = lc["attn_kept"].transpose(0, 1, 3, 2) @ dctx
        dattn = dattn_kept
        if masks is not None:
            dattn = dattn * masks[p + "attn"]
        attn = lc["attn"]
        inner = np.sum(dattn * attn, axis=-1, keepdims=True, dtype=np.float64).astype(dtype)
        ds = attn * (dattn - inner)
        dq = (ds @ lc["k"]) * scale
        dk = (ds.transpose(0, 1, 3, 2) @ lc["q"]) * scale

        h1 = lc["h1"]
        h1_flat = h1.reshape(-1, h1.shape[-1])
        dh1 = np.zeros_like(h1)
        for name, dproj in (("wq", dq), ("wk", dk), ("wv", dv)):
            dflat = _merge_heads(dproj).reshape(-1, h1.shape[-1])
            grads[p + name] = h1_flat.T @ dflat
            grads[p + "b" + name[-1]] = dflat.sum(axis=0, dtype=np.float64).astype(dtype)
            dh1 += (dflat @ params[p + name].T).reshape(h1.shape)
        dx_ln1, grads[p + "ln1.g"], grads[p + "ln1.b"] = _layernorm_bwd(dh1, lc["ln1"])
        dx = dx_ln1 + dx_attn  # residual

    if masks is not None:
        dx = dx * masks["emb"]
    grads["pos_emb"] = dx.sum(axis=0, dtype=np.float64).astype(dtype)
    dtok = np.zeros_like(params["tok_emb"])
    np.add.at(dtok, ids.reshape(-1), dx.reshape(-1, dx.shape[-1]))
    grads["tok_emb"] = dtok
    return grads


def loss_and_grads(
    params: dict[str, np.ndarray],
    ids: np.ndarray,
    gold: np.ndarray,
    config: ModelConfig,
    masks: dict[str, np.ndarray] | None = None,
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean cross-entropy over the batch and exact gradients for it."""
    ids = np.atleast_2d(np.asarray(ids))
    gold = np.atleast_1d(np.asarray(gold))
    if ids.shape[0] == 0:
        raise InvalidConfig("empty batch")
    if gold.min() < N_SPECIALS:
        raise InvalidLabel("gold labels must be non-special token ids")
    if gold.max() >= params["tok_emb"].shape[0]:
        raise InvalidId("gold label id out of range")
    logits, cache = forward(params, ids, config, masks=masks, want_cache=True)
    probs = softmax_probs(logits)
    n = ids.shape[0]
    loss = float(-np.mean(np.log(probs[np.arange(n), gold])))
    dlogits = probs
    dlogits[np.arange(n), gold] -= 1.0
    dlogits = (dlogits / n).astype(params["tok_emb"].dtype)
    grads = backward(params, cache, dlogits, config)
    return loss, grads
