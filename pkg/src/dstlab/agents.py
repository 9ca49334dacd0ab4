"""The two agent kinds: a DQN dialogue-policy agent and DDPG tracking
agents (one per slot type), with replay buffers and target networks."""

from dataclasses import dataclass

import numpy as np

from . import nn


@dataclass
class Transition:
    state: np.ndarray
    action: object  # int action index (policy) or belief vector (tracker)
    reward: float
    next_state: np.ndarray
    terminal: bool

    def __post_init__(self):
        if not np.isfinite(self.reward):
            raise ValueError("non-finite reward")


class ReplayBuffer:
    """Fixed-capacity ring with uniform without-replacement batch sampling."""

    def __init__(self, capacity):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._items = []
        self._pos = 0

    def __len__(self):
        return len(self._items)

    def push(self, t):
        if len(self._items) < self.capacity:
            self._items.append(t)
        else:
            self._items[self._pos] = t
        self._pos = (self._pos + 1) % self.capacity

    def sample(self, batch_size, rng):
        if batch_size > len(self._items):
            raise ValueError(f"cannot sample {batch_size} from buffer of {len(self._items)}")
        idx = rng.choice(len(self._items), size=batch_size, replace=False)
        return [self._items[i] for i in idx]


class LinearSchedule:
    """Linear decay from start to end over `steps` calls to value(t)."""

    def __init__(self, start, end, steps):
        self.start, self.end, self.steps = start, end, max(1, steps)

    def value(self, t):
        frac = min(1.0, max(0.0, t / self.steps))
        return self.start + frac * (self.end - self.start)


class DqnAgent:
    """Value-based policy agent: epsilon-greedy over a Q network."""

    def __init__(self, state_dim, n_actions, hidden=(128, 128), discount=0.99,
                 tau=0.01, lr=1e-3, buffer_capacity=50_000, batch_size=32,
                 warmup=1_000, learn_steps=1, grad_clip=10.0,
                 target_clip=None, rng=None):
        rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        sizes = [state_dim, *hidden, n_actions]
        acts = ["relu"] * len(hidden) + ["identity"]
        self.online = nn.Mlp(sizes, acts, rng)
        self.target = self.online.copy()
        self.opt = nn.OptimizerState(self.online, "adam", lr=lr)
        self.buffer = ReplayBuffer(buffer_capacity)
        self.n_actions = n_actions
        self.discount = discount
        self.tau = tau
        self.batch_size = batch_size
        self.warmup = warmup
        self.learn_steps = learn_steps
        self.grad_clip = grad_clip
        self.target_clip = target_clip
        self.rng = rng

    def q_values(self, state):
        out, _ = nn.forward(self.online, state)
        return out[0]

    def ready(self):
        return len(self.buffer) >= max(self.batch_size, self.warmup)


def dqn_select(agent, state, epsilon, rng=None):
    """Epsilon-greedy action; ties broken by lowest index."""
    rng = rng or agent.rng
    if epsilon > 0 and rng.random() < epsilon:
        return int(rng.integers(agent.n_actions))
    q = agent.q_values(state)
    return int(np.argmax(q))  # argmax returns the first maximal index


def dqn_learn(agent, batch):
    """One TD step on the mean squared Bellman error; returns pre-step loss.

    Targets are double-Q: the online net picks the next action, the target
    net evaluates it, which damps the overestimation spiral plain max
    targets are prone to.
    """
    if not batch:
        raise ValueError("empty batch")
    states = np.stack([t.state for t in batch])
    next_states = np.stack([t.next_state for t in batch])
    actions = np.array([t.action for t in batch])
    rewards = np.array([t.reward for t in batch])
    terminal = np.array([t.terminal for t in batch])
    n = len(batch)

    q_next_online, _ = nn.forward(agent.online, next_states)
    q_next, _ = nn.forward(agent.target, next_states)
    best_next = q_next_online.argmax(axis=1)
    targets = rewards + agent.discount * q_next[np.arange(n), best_next] * ~terminal
    if agent.target_clip is not None:
        # bounded rewards bound the true returns; clamping the bootstrap
        # target inside a generous envelope cuts off runaway value inflation
        targets = np.clip(targets, -agent.target_clip, agent.target_clip)
    q, cache = nn.forward(agent.online, states)
    taken = q[np.arange(n), actions]
    td = taken - targets
    loss = float(np.mean(td ** 2))
    if not np.isfinite(loss):
        raise FloatingPointError("non-finite DQN loss")
    grad_out = np.zeros_like(q)
    grad_out[np.arange(n), actions] = 2.0 * td / n
    grads, _ = nn.backward(agent.online, cache, grad_out)
    nn.clip_grad_norm(grads, agent.grad_clip)
    nn.apply_gradients(agent.online, grads, agent.opt)
    nn.soft_update(agent.target, agent.online, agent.tau)
    return loss


class DdpgAgent:
    """Deterministic actor-critic over a continuous [0,1]^d action box."""

    def __init__(self, state_dim, action_dim, hidden=(64, 64), discount=0.99,
                 tau=0.01, actor_lr=1e-4, critic_lr=1e-3,
                 buffer_capacity=50_000, batch_size=32, warmup=1_000,
                 actor_delay=0, groups=1, critic_groups=1, grad_clip=10.0,
                 target_clip=None, critic_weight_decay=0.0, rng=None):
        rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        if state_dim % groups or action_dim % groups:
            raise ValueError("groups must divide state and action dimensions")
        if state_dim % critic_groups or action_dim % critic_groups:
            raise ValueError("critic_groups must divide state and action dimensions")
        # groups > 1 shares one small actor across equally-shaped input
        # blocks (e.g. one net applied per slot-value); critic_groups does
        # the same for the critic, whose value is the sum of per-block terms
        a_sizes = [state_dim // groups, *hidden, action_dim // groups]
        a_acts = ["relu"] * len(hidden) + ["sigmoid"]
        c_sizes = [(state_dim + action_dim) // critic_groups, *hidden, 1]
        c_acts = ["relu"] * len(hidden) + ["identity"]
        self.actor = nn.Mlp(a_sizes, a_acts, rng)
        self.critic = nn.Mlp(c_sizes, c_acts, rng)
        self.actor_target = self.actor.copy()
        self.critic_target = self.critic.copy()
        self.actor_opt = nn.OptimizerState(self.actor, "adam", lr=actor_lr)
        self.critic_opt = nn.OptimizerState(self.critic, "adam", lr=critic_lr,
                                            weight_decay=critic_weight_decay)
        self.buffer = ReplayBuffer(buffer_capacity)
        self.state_dim = state_dim
        self.action_dim = action_dim
        self.discount = discount
        self.tau = tau
        self.batch_size = batch_size
        self.warmup = warmup
        self.actor_delay = actor_delay
        self.groups = groups
        self.critic_groups = critic_groups
        self.grad_clip = grad_clip
        self.target_clip = target_clip
        self.updates = 0
        self.rng = rng

    def ready(self):
        return len(self.buffer) >= max(self.batch_size, self.warmup)


def _actor_forward(agent, net, states):
    """Forward states through an actor, folding groups into the batch."""
    states = np.atleast_2d(states)
    if agent.groups == 1:
        return nn.forward(net, states)
    n, g = states.shape[0], agent.groups
    out, cache = nn.forward(net, states.reshape(n * g, agent.state_dim // g))
    return out.reshape(n, agent.action_dim), cache


def _actor_backward(agent, cache, grad_out):
    """Backward pass matching _actor_forward's group folding."""
    if agent.groups > 1:
        grad_out = grad_out.reshape(-1, agent.action_dim // agent.groups)
    return nn.backward(agent.actor, cache, grad_out)


def _critic_forward(agent, net, states, actions):
    """Q(s, a); with critic_groups > 1 the blocks share one net and their
    values sum.  Returns ((n, 1) values, cache)."""
    if agent.critic_groups == 1:
        return nn.forward(net, np.hstack([states, actions]))
    n, g = states.shape[0], agent.critic_groups
    x = np.hstack([states.reshape(n * g, agent.state_dim // g),
                   actions.reshape(n * g, agent.action_dim // g)])
    q, cache = nn.forward(net, x)
    return q.reshape(n, g).sum(axis=1, keepdims=True), cache


def _critic_backward(agent, cache, grad_out):
    """Backward pass matching _critic_forward; returns (grads, action grad)."""
    n = grad_out.shape[0]
    g = agent.critic_groups
    if g == 1:
        grads, grad_in = nn.backward(agent.critic, cache, grad_out)
        return grads, grad_in[:, agent.state_dim:]
    grads, grad_in = nn.backward(agent.critic, cache, np.repeat(grad_out, g, axis=0))
    grad_action = grad_in[:, agent.state_dim // g:]
    return grads, grad_action.reshape(n, agent.action_dim)


def ddpg_act(agent, state, explore=False, noise_scale=0.0, rng=None):
    """Actor output, optionally with clamped Gaussian exploration noise."""
    out, _ = _actor_forward(agent, agent.actor, state)
    action = out[0]
    if explore and noise_scale > 0:
        rng = rng or agent.rng
        action = action + rng.normal(0.0, noise_scale, size=action.shape)
    return np.clip(action, 0.0, 1.0)


def ddpg_learn(agent, batch):
    """One critic TD step, one actor ascent step, then soft target updates.

    Returns (critic loss, mean Q objective), both pre-step.
    """
    if not batch:
        raise ValueError("empty batch")
    n = len(batch)
    states = np.stack([t.state for t in batch])
    actions = np.stack([t.action for t in batch])
    rewards = np.array([t.reward for t in batch])
    next_states = np.stack([t.next_state for t in batch])
    terminal = np.array([t.terminal for t in batch])

    # critic: y = r + discount * Q_target(s', pi_target(s'))
    next_actions, _ = _actor_forward(agent, agent.actor_target, next_states)
    q_next, _ = _critic_forward(agent, agent.critic_target, next_states, next_actions)
    targets = rewards + agent.discount * q_next[:, 0] * ~terminal
    if agent.target_clip is not None:
        targets = np.clip(targets, -agent.target_clip, agent.target_clip)
    q, cache = _critic_forward(agent, agent.critic, states, actions)
    td = q[:, 0] - targets
    critic_loss = float(np.mean(td ** 2))
    if not np.isfinite(critic_loss):
        raise FloatingPointError("non-finite critic loss")
    grads, _ = _critic_backward(agent, cache, (2.0 * td / n)[:, None])
    nn.clip_grad_norm(grads, agent.grad_clip)
    nn.apply_gradients(agent.critic, grads, agent.critic_opt)

    # actor: ascend E[Q(s, pi(s))] by backpropagating dQ/da through the actor.
    # The first actor_delay updates train the critic only, so the actor does
    # not chase the gradients of an untrained critic.
    agent.updates += 1
    pi, actor_cache = _actor_forward(agent, agent.actor, states)
    q_pi, critic_cache = _critic_forward(agent, agent.critic, states, pi)
    objective = float(np.mean(q_pi))
    if not np.isfinite(objective):
        raise FloatingPointError("non-finite actor objective")
    if agent.updates > agent.actor_delay:
        _, grad_action = _critic_backward(agent, critic_cache, np.full((n, 1), 1.0 / n))
        actor_grads, _ = _actor_backward(agent, actor_cache, -grad_action)
        nn.clip_grad_norm(actor_grads, agent.grad_clip)
        nn.apply_gradients(agent.actor, actor_grads, agent.actor_opt)

    nn.soft_update(agent.critic_target, agent.critic, agent.tau)
    nn.soft_update(agent.actor_target, agent.actor, agent.tau)
    return critic_loss, objective


def pretrain_actor(agent, states, teacher_actions):
    """One supervised MSE step of the actor toward teacher beliefs."""
    states = np.atleast_2d(states)
    teacher_actions = np.atleast_2d(teacher_actions)
    if teacher_actions.shape[1] != agent.action_dim:
        raise ValueError("teacher action dimension mismatch")
    out, cache = _actor_forward(agent, agent.actor, states)
    err = out - teacher_actions
    mse = float(np.mean(err ** 2))
    grads, _ = _actor_backward(agent, cache, 2.0 * err / err.size)
    nn.apply_gradients(agent.actor, grads, agent.actor_opt)
    return mse


SLOT_TYPES = ("goal", "request", "method")


class TrackingAgentSet:
    """The enabled subset of TA_G / TA_R / TA_M with per-agent trust factors.

    Slot types without an enabled agent keep the auxiliary tracker's
    belief fragments.
    """

    def __init__(self, agents, trust):
        self.agents = dict(agents)  # slot type -> DdpgAgent
        self.trust = dict(trust)  # slot type -> alpha
        for st in self.agents:
            if st not in SLOT_TYPES:
                raise ValueError(f"unknown slot type {st!r}")

    def enabled(self):
        return [st for st in SLOT_TYPES if st in self.agents]

    def __contains__(self, slot_type):
        return slot_type in self.agents

    def __getitem__(self, slot_type):
        return self.agents[slot_type]
