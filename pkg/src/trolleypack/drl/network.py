"""Dueling Q-network on raw numpy.

Architecture: 20 inputs, three hidden layers of 32 rectifier units, then a
value head (1 output) and an advantage head (6 outputs) combined as

    Q(s, a) = V(s) + A(s, a) - mean_a' A(s, a')

All parameters live in one flat float64 vector; the named weight matrices
are views into it.  That makes the optimizer, the soft target update and
finite-difference checks plain vector arithmetic.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

INPUT_SIZE = 20
HIDDEN_SIZE = 32
ACTION_COUNT = 6

_PARAM_SPECS: tuple[tuple[str, tuple[int, ...]], ...] = (
    ("w1", (INPUT_SIZE, HIDDEN_SIZE)),
    ("b1", (HIDDEN_SIZE,)),
    ("w2", (HIDDEN_SIZE, HIDDEN_SIZE)),
    ("b2", (HIDDEN_SIZE,)),
    ("w3", (HIDDEN_SIZE, HIDDEN_SIZE)),
    ("b3", (HIDDEN_SIZE,)),
    ("wv", (HIDDEN_SIZE, 1)),
    ("bv", (1,)),
    ("wa", (HIDDEN_SIZE, ACTION_COUNT)),
    ("ba", (ACTION_COUNT,)),
)

PARAM_COUNT = sum(int(np.prod(shape)) for _, shape in _PARAM_SPECS)


def _views(theta: np.ndarray) -> dict[str, np.ndarray]:
    views = {}
    offset = 0
    for name, shape in _PARAM_SPECS:
        size = int(np.prod(shape))
        views[name] = theta[offset : offset + size].reshape(shape)
        offset += size
    return views


def dueling_q(value: np.ndarray, advantage: np.ndarray) -> np.ndarray:
    """Combine value (B,1) and advantage (B,A) streams, mean variant."""
    return value + advantage - advantage.mean(axis=1, keepdims=True)


class QNetwork:
    """Q-value network with online/target-compatible parameter vector."""

    def __init__(self, theta: np.ndarray | None = None):
        if theta is None:
            theta = np.zeros(PARAM_COUNT)
        theta = np.ascontiguousarray(theta, dtype=np.float64)
        if theta.shape != (PARAM_COUNT,):
            raise ValueError(f"expected {PARAM_COUNT} parameters, got {theta.shape}")
        self.theta = theta
        self.p = _views(theta)

    @classmethod
    def initialize(cls, rng: np.random.Generator) -> "QNetwork":
        """Fan-scaled uniform weights, zero biases."""
        net = cls()
        for name, shape in _PARAM_SPECS:
            if name.startswith("w"):
                fan_in, fan_out = shape
                limit = np.sqrt(6.0 / (fan_in + fan_out))
                net.p[name][:] = rng.uniform(-limit, limit, size=shape)
        return net

    def copy(self) -> "QNetwork":
        return QNetwork(self.theta.copy())

    def _forward(self, x: np.ndarray):
        p = self.p
        z1 = x @ p["w1"] + p["b1"]
        h1 = np.maximum(z1, 0.0)
        z2 = h1 @ p["w2"] + p["b2"]
        h2 = np.maximum(z2, 0.0)
        z3 = h2 @ p["w3"] + p["b3"]
        h3 = np.maximum(z3, 0.0)
        value = h3 @ p["wv"] + p["bv"]
        advantage = h3 @ p["wa"] + p["ba"]
        q = dueling_q(value, advantage)
        return q, (x, z1, h1, z2, h2, z3, h3)

    def forward(self, obs: np.ndarray) -> np.ndarray:
        """Q-values: (6,) for a single observation, (B, 6) for a batch."""
        obs = np.asarray(obs, dtype=np.float64)
        single = obs.ndim == 1
        q, _ = self._forward(obs[None, :] if single else obs)
        return q[0] if single else q

    def loss(
        self,
        obs: np.ndarray,
        actions: np.ndarray,
        targets: np.ndarray,
        delta: float = 1.0,
    ) -> float:
        q, _ = self._forward(np.asarray(obs, dtype=np.float64))
        taken = q[np.arange(len(actions)), actions]
        return huber_loss(taken, np.asarray(targets, dtype=np.float64), delta)

    def loss_and_gradients(
        self,
        obs: np.ndarray,
        actions: np.ndarray,
        targets: np.ndarray,
        delta: float = 1.0,
    ) -> tuple[float, np.ndarray]:
        """Mean Huber loss over the taken actions and its flat gradient."""
        obs = np.asarray(obs, dtype=np.float64)
        actions = np.asarray(actions)
        targets = np.asarray(targets, dtype=np.float64)
        batch = len(actions)
        q, (x, z1, h1, z2, h2, z3, h3) = self._forward(obs)
        rows = np.arange(batch)
        err = q[rows, actions] - targets
        loss = huber_loss(q[rows, actions], targets, delta)

        dq = np.zeros_like(q)
        dq[rows, actions] = np.clip(err, -delta, delta) / batch
        # Q = V + A - mean(A):  dV sums over actions, dA is mean-centred.
        dv = dq.sum(axis=1, keepdims=True)
        da = dq - dq.mean(axis=1, keepdims=True)

        grad = np.zeros(PARAM_COUNT)
        g = _views(grad)
        p = self.p
        g["wv"][:] = h3.T @ dv
        g["bv"][:] = dv.sum(axis=0)
        g["wa"][:] = h3.T @ da
        g["ba"][:] = da.sum(axis=0)
        dh3 = dv @ p["wv"].T + da @ p["wa"].T
        dz3 = dh3 * (z3 > 0.0)
        g["w3"][:] = h2.T @ dz3
        g["b3"][:] = dz3.sum(axis=0)
        dh2 = dz3 @ p["w3"].T
        dz2 = dh2 * (z2 > 0.0)
        g["w2"][:] = h1.T @ dz2
        g["b2"][:] = dz2.sum(axis=0)
        dh1 = dz2 @ p["w2"].T
        dz1 = dh1 * (z1 > 0.0)
        g["w1"][:] = x.T @ dz1
        g["b1"][:] = dz1.sum(axis=0)
        return loss, grad


def huber_loss(predicted: np.ndarray, target: np.ndarray, delta: float = 1.0) -> float:
    err = np.abs(predicted - target)
    quad = np.minimum(err, delta)
    return float(np.mean(0.5 * quad**2 + delta * (err - quad)))


def soft_update(target: QNetwork, online: QNetwork, tau: float = 0.01) -> QNetwork:
    """Blend online parameters into the target: θ' ← τ·θ + (1-τ)·θ'."""
    if target.theta.shape != online.theta.shape:
        raise ValueError("target and online networks must share an architecture")
    target.theta *= 1.0 - tau
    target.theta += tau * online.theta
    return target


class Adam:
    """Adam on the flat parameter vector (framework-default constants)."""

    def __init__(
        self,
        learning_rate: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        epsilon: float = 1e-7,
    ):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.m = np.zeros(PARAM_COUNT)
        self.v = np.zeros(PARAM_COUNT)
        self.t = 0

    def step(self, theta: np.ndarray, grad: np.ndarray) -> None:
        self.t += 1
        self.m *= self.beta1
        self.m += (1.0 - self.beta1) * grad
        self.v *= self.beta2
        self.v += (1.0 - self.beta2) * grad**2
        m_hat = self.m / (1.0 - self.beta1**self.t)
        v_hat = self.v / (1.0 - self.beta2**self.t)
        theta -= self.learning_rate * m_hat / (np.sqrt(v_hat) + self.epsilon)


CHECKPOINT_FORMAT = "trolleypack-qnetwork"


def save_checkpoint(net: QNetwork, path: str | Path) -> None:
    """Portable JSON checkpoint: architecture descriptor + weight arrays."""
    doc = {
        "format": CHECKPOINT_FORMAT,
        "version": 1,
        "input_size": INPUT_SIZE,
        "hidden_sizes": [HIDDEN_SIZE, HIDDEN_SIZE, HIDDEN_SIZE],
        "action_count": ACTION_COUNT,
        "dueling": "avg",
        "parameters": {name: net.p[name].tolist() for name, _ in _PARAM_SPECS},
    }
    Path(path).write_text(json.dumps(doc) + "\n", encoding="utf-8")


def load_checkpoint(path: str | Path) -> QNetwork:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"not a {CHECKPOINT_FORMAT} checkpoint: {path}")
    expected = {
        "input_size": INPUT_SIZE,
        "hidden_sizes": [HIDDEN_SIZE, HIDDEN_SIZE, HIDDEN_SIZE],
        "action_count": ACTION_COUNT,
    }
    for key, value in expected.items():
        if doc.get(key) != value:
            raise ValueError(f"checkpoint {key}={doc.get(key)!r}, expected {value!r}")
    net = QNetwork()
    for name, shape in _PARAM_SPECS:
        arr = np.asarray(doc["parameters"][name], dtype=np.float64)
        if arr.shape != shape:
            raise ValueError(f"checkpoint parameter {name} has shape {arr.shape}")
        net.p[name][:] = arr
    return net
