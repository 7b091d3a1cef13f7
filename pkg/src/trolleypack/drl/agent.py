"""Packing environment and the double-DQN training loop.

The agent sees one part at a time plus the six module types and their free
capacities, and picks a module index.  The reward imitates the best-fit
rule: +1 for choosing the module the best-fit heuristic would choose, -1
otherwise (also when the choice does not fit, has no free slot, or when
nothing fits at all).  An invalid choice skips the part during training so
the capacity counters stay consistent with the oracle.
"""

from __future__ import annotations

import csv
import io
import random
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..core import Assignment, Instance, ModuleSpec, Part, Solution, fits
from ..heuristic import PackingState, best_fit_module
from .network import ACTION_COUNT, Adam, INPUT_SIZE, QNetwork, soft_update

MODULE_COUNT = 6


@dataclass(frozen=True)
class Transition:
    observation: np.ndarray
    action: int
    reward: int
    next_observation: np.ndarray
    terminal: bool


class ReplayBuffer:
    """Ring buffer of transitions; oldest entries are evicted first."""

    def __init__(self, capacity: int = 1000):
        self.capacity = capacity
        self._buffer: deque[Transition] = deque(maxlen=capacity)

    def add(self, transition: Transition) -> None:
        self._buffer.append(transition)

    def __len__(self) -> int:
        return len(self._buffer)

    def sample(self, rng: np.random.Generator, batch_size: int):
        """Uniform sample without replacement, as stacked arrays."""
        idx = rng.choice(len(self._buffer), size=batch_size, replace=False)
        picked = [self._buffer[i] for i in idx]
        obs = np.stack([t.observation for t in picked])
        actions = np.array([t.action for t in picked], dtype=np.int64)
        rewards = np.array([t.reward for t in picked], dtype=np.float64)
        next_obs = np.stack([t.next_observation for t in picked])
        terminal = np.array([t.terminal for t in picked], dtype=bool)
        return obs, actions, rewards, next_obs, terminal


def encode_observation(part: Part, state: PackingState) -> np.ndarray:
    """20-entry observation: part dims, module dims, free capacities.

    Lengths and widths are divided by the longest module length of the
    configuration (part entries clamped to 1.0 so oversized parts stay in
    range); each capacity is divided by its module's own capacity.
    """
    if len(state.modules) != MODULE_COUNT:
        raise ValueError(
            f"the agent observes exactly {MODULE_COUNT} modules, "
            f"got {len(state.modules)}"
        )
    scale = max(m.length for m in state.modules)
    obs = np.empty(INPUT_SIZE)
    obs[0] = min(part.length / scale, 1.0)
    obs[1] = min(part.width / scale, 1.0)
    for i, m in enumerate(state.modules):
        obs[2 + 2 * i] = m.length / scale
        obs[3 + 2 * i] = m.width / scale
        obs[14 + i] = state.remaining[i] / m.capacity if m.capacity else 0.0
    return obs


def reward(part: Part, chosen: int, state: PackingState) -> int:
    """+1 iff ``chosen`` is the best-fit module for ``part``, else -1."""
    oracle = best_fit_module(part, state)
    if oracle is None:
        return -1
    return 1 if state.modules[chosen].id == oracle else -1


def boltzmann_sample(
    q: np.ndarray, temperature: float, rng: np.random.Generator, q_clip: float = 500.0
) -> int:
    """Sample an action with probability proportional to exp(q/temperature)."""
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    z = np.clip(np.asarray(q, dtype=np.float64), -q_clip, q_clip) / temperature
    z -= z.max()
    p = np.exp(z)
    p /= p.sum()
    return int(rng.choice(len(p), p=p))


def double_dqn_target(
    batch,
    online: QNetwork,
    target: QNetwork,
    gamma: float,
) -> np.ndarray:
    """Per-sample targets: r, or r + γ·Q_target(s', argmax_a Q_online(s',a))."""
    _, _, rewards, next_obs, terminal = batch
    best_next = np.argmax(online.forward(next_obs), axis=1)
    q_next = target.forward(next_obs)[np.arange(len(best_next)), best_next]
    return rewards + np.where(terminal, 0.0, gamma * q_next)


@dataclass(frozen=True)
class EnvConfig:
    """Episode generator configuration: one fixed 6-module trolley layout."""

    modules: tuple[ModuleSpec, ...]
    parts_per_episode: int = 30

    def __post_init__(self) -> None:
        if len(self.modules) != MODULE_COUNT:
            raise ValueError(f"exactly {MODULE_COUNT} modules required")
        if self.parts_per_episode < 1:
            raise ValueError("parts_per_episode must be >= 1")


@dataclass(frozen=True)
class TrainerConfig:
    warmup_steps: int = 500
    target_update_tau: float = 0.01
    gamma: float = 0.99
    batch_size: int = 32
    learning_rate: float = 1e-3
    boltzmann_temperature: float = 1.0
    training_steps: int = 20_000
    replay_capacity: int = 1000
    huber_delta: float = 1.0
    q_clip: float = 500.0

    def __post_init__(self) -> None:
        positive = (
            self.warmup_steps,
            self.gamma,
            self.batch_size,
            self.learning_rate,
            self.boltzmann_temperature,
            self.training_steps,
            self.replay_capacity,
            self.huber_delta,
        )
        if any(v <= 0 for v in positive):
            raise ValueError("all trainer parameters must be positive")
        if not 0.0 < self.target_update_tau <= 1.0:
            raise ValueError("target_update_tau must lie in (0, 1]")


class PackingEnv:
    """Episode = one generated part sequence over the trolley layout.

    Capacities are scaled to the minimum trolley count for the drawn
    parts, so every episode admits a best-fit packing and the reward
    oracle is always meaningful.
    """

    def __init__(self, config: EnvConfig, part_rng: random.Random):
        self.config = config
        self.part_rng = part_rng
        self.state: PackingState | None = None
        self.parts: tuple[Part, ...] = ()
        self._cursor = 0

    def reset(self) -> np.ndarray:
        from ..bench import generate_part
        from ..exact import min_trolleys

        parts = [
            generate_part(self.part_rng, self.config.modules, part_id=i + 1)
            for i in range(self.config.parts_per_episode)
        ]
        k = min_trolleys(parts, self.config.modules)
        self.parts = tuple(parts)
        self.state = PackingState.fresh(m.scaled(k) for m in self.config.modules)
        self._cursor = 0
        return encode_observation(parts[0], self.state)

    def step(self, action: int) -> tuple[np.ndarray, int, bool]:
        """Returns (next observation, reward, terminal).

        Valid placements consume a slot; invalid ones skip the part so the
        remaining capacities still describe a reachable packing state.
        """
        if self.state is None:
            raise RuntimeError("call reset() before step()")
        part = self.parts[self._cursor]
        r = reward(part, action, self.state)
        module = self.state.modules[action]
        if fits(part, module) and self.state.remaining[action] > 0:
            self.state.place(module.id)
        self._cursor += 1
        terminal = self._cursor >= len(self.parts)
        if terminal:
            next_obs = np.zeros(INPUT_SIZE)
        else:
            next_obs = encode_observation(self.parts[self._cursor], self.state)
        return next_obs, r, terminal


@dataclass(frozen=True)
class EpisodeLog:
    episode: int
    cumulative_reward: int
    temperature: float
    steps: int  # total environment steps completed at episode end


def train(
    env_config: EnvConfig,
    trainer_config: TrainerConfig = TrainerConfig(),
    rng_seed: int = 1,
) -> tuple[QNetwork, list[EpisodeLog]]:
    """Train a dueling double-DQN agent; returns the online net and log.

    Single-threaded and fully seeded: identical inputs reproduce the exact
    training log.  Runs whole episodes until the configured step budget is
    reached.
    """
    rng = np.random.default_rng(rng_seed)
    part_rng = random.Random(rng_seed)
    online = QNetwork.initialize(rng)
    target = online.copy()
    optimizer = Adam(learning_rate=trainer_config.learning_rate)
    buffer = ReplayBuffer(trainer_config.replay_capacity)
    env = PackingEnv(env_config, part_rng)

    log: list[EpisodeLog] = []
    episode = 0
    steps = 0
    obs = env.reset()
    episode_reward = 0
    while True:
        q = online.forward(obs)
        action = boltzmann_sample(
            q, trainer_config.boltzmann_temperature, rng, trainer_config.q_clip
        )
        next_obs, r, terminal = env.step(action)
        buffer.add(Transition(obs, action, r, next_obs, terminal))
        episode_reward += r
        steps += 1

        if steps > trainer_config.warmup_steps:
            batch = buffer.sample(rng, trainer_config.batch_size)
            targets = double_dqn_target(batch, online, target, trainer_config.gamma)
            _, grad = online.loss_and_gradients(
                batch[0], batch[1], targets, trainer_config.huber_delta
            )
            optimizer.step(online.theta, grad)
            soft_update(target, online, trainer_config.target_update_tau)

        if terminal:
            episode += 1
            log.append(
                EpisodeLog(
                    episode=episode,
                    cumulative_reward=episode_reward,
                    temperature=trainer_config.boltzmann_temperature,
                    steps=steps,
                )
            )
            if steps >= trainer_config.training_steps:
                return online, log
            obs = env.reset()
            episode_reward = 0
        else:
            obs = next_obs


def act_greedy(net: QNetwork, instance: Instance) -> Solution:
    """Pack an instance with argmax-Q choices (ties go to the lowest index).

    Invalid choices are recorded as-is, never repaired: the returned
    assignment reproduces exactly the violations the agent committed, and
    capacities are only consumed by valid placements.
    """
    if len(instance.modules) != MODULE_COUNT:
        raise ValueError(
            f"the agent packs {MODULE_COUNT}-module configurations, "
            f"got {len(instance.modules)}"
        )
    state = PackingState.fresh(instance.modules)
    assignments: list[Assignment] = []
    ok = True
    waste_sum = 0
    t0 = time.perf_counter()
    for part in instance.parts:
        obs = encode_observation(part, state)
        action = int(np.argmax(net.forward(obs)))
        module = state.modules[action]
        assignments.append(Assignment(part.id, module.id))
        if fits(part, module) and state.remaining[action] > 0:
            state.place(module.id)
            waste_sum += module.area - part.area
        else:
            ok = False
    runtime = time.perf_counter() - t0
    return Solution(
        assignments=tuple(assignments),
        total_waste=waste_sum if ok else None,
        feasible=ok,
        solver_name="dqn",
        runtime=runtime,
    )


def training_log_text(log: Iterable[EpisodeLog]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["episode", "cumulative_reward", "epsilon_or_temperature", "steps"])
    for entry in log:
        writer.writerow(
            [entry.episode, entry.cumulative_reward, entry.temperature, entry.steps]
        )
    return buf.getvalue()


def write_training_log(log: Iterable[EpisodeLog], path: str | Path) -> None:
    Path(path).write_text(training_log_text(log), encoding="utf-8", newline="")
