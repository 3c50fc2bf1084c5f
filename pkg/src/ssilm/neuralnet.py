"""Minimal feedforward network engine for the tutor/pupil agents.

One hidden layer, sigmoid on hidden and output, per-example stochastic
gradient descent. Signals and meanings are emitted by thresholding the
real-valued outputs at 0.5 (ties round to 1); gradients always flow
through the real-valued activations, never through the binarization.

This module is the reference implementation: every gradient it produces
is checked against central finite differences in the test suite. The
training inner loop used by simulations lives in :mod:`ssilm.kernel`
and is equivalence-tested against these functions.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

LOSSES = ("mse", "bce")


class NumericalDivergenceError(RuntimeError):
    """Raised when training produces a non-finite loss or parameter."""


@dataclass
class Mlp:
    """Single-hidden-layer perceptron; weights shaped (out, in)."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        n_hid, n_in = self.w1.shape
        n_out, n_hid2 = self.w2.shape
        if n_hid2 != n_hid or self.b1.shape != (n_hid,) or self.b2.shape != (n_out,):
            raise ValueError("inconsistent layer shapes")

    @property
    def dims(self) -> tuple:
        return (self.w1.shape[1], self.w1.shape[0], self.w2.shape[0])

    def params(self) -> list:
        return [self.w1, self.b1, self.w2, self.b2]

    def copy(self) -> "Mlp":
        return Mlp(self.w1.copy(), self.b1.copy(), self.w2.copy(), self.b2.copy())

    def assert_finite(self) -> None:
        if not all(np.isfinite(p).all() for p in self.params()):
            raise NumericalDivergenceError("non-finite network parameter")


@dataclass
class Agent:
    """Encoder (n1 x n2 x n3) paired with decoder (n3 x n2 x n1)."""

    encoder: Mlp
    decoder: Mlp

    def __post_init__(self):
        e_in, _, e_out = self.encoder.dims
        d_in, _, d_out = self.decoder.dims
        if e_out != d_in or e_in != d_out:
            raise ValueError(
                f"encoder dims {self.encoder.dims} incompatible with decoder {self.decoder.dims}"
            )

    def copy(self) -> "Agent":
        return Agent(self.encoder.copy(), self.decoder.copy())


@dataclass(frozen=True)
class TrainHyper:
    """Training hyperparameters; defaults follow the reference recipe."""

    learning_rate: float = 5.0
    epochs: int = 20
    r: int = 15
    binarize_threshold: float = 0.5
    loss: str = "mse"

    def __post_init__(self):
        if self.learning_rate <= 0 or self.epochs < 1 or self.r < 0:
            raise ValueError("learning_rate > 0, epochs >= 1, r >= 0 required")
        if not 0.0 < self.binarize_threshold < 1.0:
            raise ValueError("binarize_threshold must lie in (0, 1)")
        if self.loss not in LOSSES:
            raise ValueError(f"loss must be one of {LOSSES}")


def mlp_init(dims: tuple, rng: np.random.Generator) -> Mlp:
    """Glorot-uniform weights (limit sqrt(6/(fan_in+fan_out))), zero biases.

    Draws w1 then w2; this order is part of the determinism contract.
    """
    n_in, n_hid, n_out = dims
    if min(dims) < 1:
        raise ValueError(f"all dims must be >= 1, got {dims}")
    lim1 = np.sqrt(6.0 / (n_in + n_hid))
    lim2 = np.sqrt(6.0 / (n_hid + n_out))
    w1 = rng.uniform(-lim1, lim1, size=(n_hid, n_in))
    w2 = rng.uniform(-lim2, lim2, size=(n_out, n_hid))
    return Mlp(w1=w1, b1=np.zeros(n_hid), w2=w2, b2=np.zeros(n_out))


def agent_init(n1: int, n2: int, n3: int, rng: np.random.Generator) -> Agent:
    """Fresh agent: encoder initialized first, then decoder."""
    return Agent(encoder=mlp_init((n1, n2, n3), rng), decoder=mlp_init((n3, n2, n1), rng))


def _forward_cached(mlp: Mlp, x: np.ndarray):
    h = expit(mlp.w1 @ x + mlp.b1)
    y = expit(mlp.w2 @ h + mlp.b2)
    return h, y


def forward_real(mlp: Mlp, x) -> np.ndarray:
    """sigmoid(W2 @ sigmoid(W1 @ x + b1) + b2); outputs strictly in (0, 1)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (mlp.dims[0],):
        raise ValueError(f"input length {x.shape} != {mlp.dims[0]}")
    return _forward_cached(mlp, x)[1]


def forward_binary(mlp: Mlp, x, threshold: float = 0.5) -> np.ndarray:
    """Thresholded forward pass; output >= threshold maps to 1."""
    return (forward_real(mlp, x) >= threshold).astype(np.uint8)


def _loss_value(y: np.ndarray, t: np.ndarray, loss: str) -> float:
    if loss == "mse":
        return float(np.mean((y - t) ** 2))
    # binary cross-entropy, mean over components
    eps = 1e-300
    return float(-np.mean(t * np.log(y + eps) + (1 - t) * np.log(1 - y + eps)))


def _output_delta(y: np.ndarray, t: np.ndarray, loss: str) -> np.ndarray:
    """dL/dz at the output layer (z the pre-sigmoid activation)."""
    n = y.size
    if loss == "mse":
        return (y - t) * y * (1.0 - y) * (2.0 / n)
    return (y - t) / n


def mlp_gradients(mlp: Mlp, x, t, loss: str = "mse"):
    """Backprop gradients of the per-example loss; returns (gw1, gb1, gw2, gb2, loss)."""
    x = np.asarray(x, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    if x.shape != (mlp.dims[0],) or t.shape != (mlp.dims[2],):
        raise ValueError("input/target length mismatch")
    h, y = _forward_cached(mlp, x)
    value = _loss_value(y, t, loss)
    d2 = _output_delta(y, t, loss)
    d1 = (mlp.w2.T @ d2) * h * (1.0 - h)
    return np.outer(d1, x), d1, np.outer(d2, h), d2, value


def sgd_step(mlp: Mlp, x, t, eta: float, loss: str = "mse") -> None:
    """One in-place gradient-descent step on a single example."""
    gw1, gb1, gw2, gb2, value = mlp_gradients(mlp, x, t, loss)
    if not np.isfinite(value):
        raise NumericalDivergenceError(f"non-finite loss {value}")
    mlp.w1 -= eta * gw1
    mlp.b1 -= eta * gb1
    mlp.w2 -= eta * gw2
    mlp.b2 -= eta * gb2


def autoencoder_forward(agent: Agent, m) -> np.ndarray:
    """Composite pass meaning -> signal (real, never binarized) -> meaning."""
    m = np.asarray(m, dtype=np.float64)
    s = forward_real(agent.encoder, m)
    return forward_real(agent.decoder, s)


def agent_gradients(agent: Agent, m, loss: str = "mse"):
    """Gradients of the 5-layer composite loss with input = target = m.

    Returns (encoder grads, decoder grads, loss) where each grads entry is
    the (gw1, gb1, gw2, gb2) tuple for that network. The signal layer
    stays continuous; its upstream gradient feeds the encoder.
    """
    m = np.asarray(m, dtype=np.float64)
    enc, dec = agent.encoder, agent.decoder
    if m.shape != (enc.dims[0],):
        raise ValueError(f"meaning length {m.shape} != {enc.dims[0]}")
    h1, s = _forward_cached(enc, m)
    h2, y = _forward_cached(dec, s)
    value = _loss_value(y, m, loss)
    d4 = _output_delta(y, m, loss)
    d3 = (dec.w2.T @ d4) * h2 * (1.0 - h2)
    d2 = (dec.w1.T @ d3) * s * (1.0 - s)
    d1 = (enc.w2.T @ d2) * h1 * (1.0 - h1)
    enc_grads = (np.outer(d1, m), d1, np.outer(d2, h1), d2)
    dec_grads = (np.outer(d3, s), d3, np.outer(d4, h2), d4)
    return enc_grads, dec_grads, value


def autoencoder_step(agent: Agent, m, eta: float, loss: str = "mse") -> None:
    """One in-place composite step updating encoder and decoder together."""
    enc_grads, dec_grads, value = agent_gradients(agent, m, loss)
    if not np.isfinite(value):
        raise NumericalDivergenceError(f"non-finite loss {value}")
    for net, grads in ((agent.encoder, enc_grads), (agent.decoder, dec_grads)):
        net.w1 -= eta * grads[0]
        net.b1 -= eta * grads[1]
        net.w2 -= eta * grads[2]
        net.b2 -= eta * grads[3]


def save_agent(agent: Agent, path) -> None:
    """Debug checkpoint: dims header plus flat parameter list in layer order."""
    with open(path, "w") as fh:
        n1, n2, n3 = agent.encoder.dims
        fh.write(f"dims={n1},{n2},{n3}\n")
        for net in (agent.encoder, agent.decoder):
            for p in net.params():
                for v in p.ravel():
                    fh.write(f"{float(v)!r}\n")


def load_agent(path) -> Agent:
    with open(path) as fh:
        header = fh.readline().strip()
        n1, n2, n3 = (int(v) for v in header.split("=")[1].split(","))
        values = np.array([float(line) for line in fh])
    nets = []
    offset = 0
    for dims in ((n1, n2, n3), (n3, n2, n1)):
        n_in, n_hid, n_out = dims
        shapes = [(n_hid, n_in), (n_hid,), (n_out, n_hid), (n_out,)]
        params = []
        for shape in shapes:
            size = int(np.prod(shape))
            params.append(values[offset:offset + size].reshape(shape))
            offset += size
        nets.append(Mlp(*params))
    return Agent(encoder=nets[0], decoder=nets[1])
