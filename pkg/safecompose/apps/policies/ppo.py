"""
Proximal policy optimisation of a local network on the learned model

The policy is Gaussian: its mean is a :class:`ShallowReluNet` and its
log standard deviation a state-independent parameter. Rollouts never
touch the true system; they step ``f + mu_g``.
"""
import logging
from dataclasses import dataclass, fields

import numpy as np
import torch
from torch import nn
from torch.distributions import Normal

from safecompose.apps.policies.networks import ShallowReluNet
from safecompose.core.application import get_app_setting
from safecompose.core.exceptions import TrainingDivergedError
from safecompose.utils.seeding import derive_seed

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PPOSettings:
    hidden_width: int = 6
    episode_length: int = 10
    clip_ratio: float = 0.2
    learning_rate: float = 3e-3
    epochs_per_episode: int = 4
    discount: float = 0.99
    initial_log_std: float = -1.0
    goal_weight: float = 1.0
    gain_weight: float = 0.1

    @classmethod
    def from_app_settings(cls, **overrides) -> "PPOSettings":
        values = {f.name: get_app_setting("policies", f.name) for f in fields(cls)}
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


def predict_next(x, u, model, gp) -> np.ndarray:
    """``f(x, u) + mu_g(x, u)``, wrapped along periodic dimensions"""
    predicted = model.evaluate(np.asarray(x, dtype=float), np.asarray(u, dtype=float))
    if gp is not None:
        predicted = predicted + gp.mean(x, u)
    return model.wrap(predicted)


def _offset(a, b, periodic_dims) -> np.ndarray:
    diff = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    for dim in periodic_dims:
        diff[..., dim] = np.mod(diff[..., dim] + np.pi, 2 * np.pi) - np.pi
    return diff


def reward(x, u, target, partition, model, gp, goal_weight=1.0, gain_weight=0.1):
    """
    ``-w2 |u - kappa(x)|`` when the predicted successor lies in the
    target cell, otherwise also ``-w1`` times its distance to the target
    center; ``kappa`` is the center law of the partition. Works on
    single points and on batches.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    predicted = predict_next(x, u, model, gp)
    deviation = np.linalg.norm(u - partition.control(x), axis=-1)
    inside = np.all((predicted >= target.box.lo) & (predicted <= target.box.hi), axis=-1)
    miss = np.linalg.norm(_offset(predicted, target.box.center, model.periodic_dims), axis=-1)
    value = -gain_weight * deviation - np.where(inside, 0.0, goal_weight * miss)
    return float(value) if np.ndim(value) == 0 else value


class TransitionEnvironment:
    """
    Episodes start uniformly in the source cell and end after a fixed
    number of steps or as soon as the predicted state leaves the cell
    """

    def __init__(self, key, mdp, model, gp, settings: PPOSettings):
        self.key = key
        self.source = mdp.partition.states[key.q]
        self.target = mdp.partition.states[key.target]
        self.partition = mdp.controller_grid.partitions[key.p]
        self.model = model
        self.gp = gp
        self.settings = settings

    def reset(self, rng) -> np.ndarray:
        return self.source.box.sample(rng, 1)[0]

    def step(self, x, u):
        successor = predict_next(x, u, self.model, self.gp)
        value = reward(
            x,
            u,
            self.target,
            self.partition,
            self.model,
            self.gp,
            self.settings.goal_weight,
            self.settings.gain_weight,
        )
        done = not self.source.box.contains(successor)
        return successor, value, done


class GaussianPolicy(nn.Module):
    def __init__(self, net: ShallowReluNet, initial_log_std: float):
        super().__init__()
        self.W1 = nn.Parameter(torch.as_tensor(net.W1, dtype=torch.float64).clone())
        self.b1 = nn.Parameter(torch.as_tensor(net.b1, dtype=torch.float64).clone())
        self.W2 = nn.Parameter(torch.as_tensor(net.W2, dtype=torch.float64).clone())
        self.b2 = nn.Parameter(torch.as_tensor(net.b2, dtype=torch.float64).clone())
        self.log_std = nn.Parameter(torch.full((net.input_dim,), float(initial_log_std), dtype=torch.float64))

    def forward(self, states: torch.Tensor) -> Normal:
        hidden = torch.relu(states @ self.W1.T + self.b1)
        mean = hidden @ self.W2.T + self.b2
        return Normal(mean, torch.exp(self.log_std).expand_as(mean), validate_args=False)

    def mean_net(self) -> ShallowReluNet:
        return ShallowReluNet(
            *(p.detach().numpy().copy() for p in (self.W1, self.b1, self.W2, self.b2))
        )


def rewards_to_go(rewards, discount) -> np.ndarray:
    returns = np.zeros(len(rewards))
    running = 0.0
    for i in reversed(range(len(rewards))):
        running = rewards[i] + discount * running
        returns[i] = running
    return returns


def linear_baseline(states, returns) -> np.ndarray:
    """Least-squares fit of the returns on ``[x, 1]``"""
    features = np.hstack([states, np.ones((len(states), 1))])
    weights, *_ = np.linalg.lstsq(features, returns, rcond=None)
    return features @ weights


def ppo_train(key, mdp, model, gp, episodes: int, seed: int, *, settings=None, init=None):
    """
    Train the local network of ``key`` for ``episodes`` episodes and
    return the mean network of the final policy

    ``init`` warm-starts from an existing network.
    """
    if episodes < 1:
        raise ValueError("episodes must be at least 1, got %r" % episodes)
    settings = settings or PPOSettings.from_app_settings()
    key_seed = derive_seed(seed, "ppo", key.q, key.p, key.target)
    rng = np.random.default_rng(key_seed)
    generator = torch.Generator().manual_seed(key_seed)

    if init is None:
        init = ShallowReluNet.initialise(mdp.state_dim, mdp.input_dim, settings.hidden_width, rng)
    policy = GaussianPolicy(init, settings.initial_log_std)
    optimizer = torch.optim.SGD(policy.parameters(), lr=settings.learning_rate)
    environment = TransitionEnvironment(key, mdp, model, gp, settings)

    for episode in range(episodes):
        x = environment.reset(rng)
        states, actions, rewards = [], [], []
        with torch.no_grad():
            for _ in range(settings.episode_length):
                distribution = policy(torch.as_tensor(x[None, :], dtype=torch.float64))
                if not torch.all(torch.isfinite(distribution.mean)):
                    raise TrainingDivergedError(episode, float("nan"))
                action = torch.normal(distribution.mean, distribution.stddev, generator=generator)
                u = action.numpy()[0]
                successor, value, done = environment.step(x, u)
                states.append(x)
                actions.append(u)
                rewards.append(value)
                x = successor
                if done:
                    break

        states = np.asarray(states)
        returns = rewards_to_go(rewards, settings.discount)
        advantages = returns - linear_baseline(states, returns)
        if len(advantages) > 1 and advantages.std() > 0:
            advantages = (advantages - advantages.mean()) / advantages.std()

        state_tensor = torch.as_tensor(states, dtype=torch.float64)
        action_tensor = torch.as_tensor(np.asarray(actions), dtype=torch.float64)
        advantage_tensor = torch.as_tensor(advantages, dtype=torch.float64)
        with torch.no_grad():
            old_log_prob = policy(state_tensor).log_prob(action_tensor).sum(dim=-1)

        for _ in range(settings.epochs_per_episode):
            log_prob = policy(state_tensor).log_prob(action_tensor).sum(dim=-1)
            ratio = torch.exp(log_prob - old_log_prob)
            clipped = torch.clamp(ratio, 1.0 - settings.clip_ratio, 1.0 + settings.clip_ratio)
            loss = -torch.min(ratio * advantage_tensor, clipped * advantage_tensor).mean()
            if not torch.isfinite(loss):
                raise TrainingDivergedError(episode, float(loss))
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()

    net = policy.mean_net()
    if not net.is_finite():
        raise TrainingDivergedError(episodes - 1, float("nan"))
    logger.debug("trained %s for %d episodes", key, episodes)
    return net
