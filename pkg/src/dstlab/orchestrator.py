"""Dialogue loop and the four-phase joint-training schedule.

Wires simulator -> SLU channel -> feature extraction -> tracker(s) ->
policy -> system act, computes the reward signals, fills the replay
buffers and produces metrics.  Training proceeds in four phases:

  1. policy pre-training with the polynomial tracker (DQN),
  2. supervised actor pre-training toward the polynomial beliefs,
  3. tracking-agent optimization (DDPG) with the policy frozen,
  4. policy re-training with the tracking agents frozen (DQN).

The polynomial baseline simply runs phase 1 for the whole budget.
"""

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import agents as ag
from . import cmbp
from . import nn
from . import usersim
from .dialogue import BeliefState, belief_vector, system_act, uniform_belief, vector_to_belief, TurnRecord
from .ontology import flat_index
from .reward import evaluation_reward, policy_turn_reward, tracking_turn_reward


@dataclass
class TrainSchedule:
    """Episode budgets for the four phases plus shared run parameters."""

    n1: int = 2000
    n2: int = 200
    n3: int = 3000
    n4: int = 3000
    discount: float = 0.99
    tau: float = 0.01
    window: int = 1000
    max_turns: int = 20
    runs: int = 1

    def __post_init__(self):
        if min(self.n1, self.n2, self.n3, self.n4) < 0 or self.window < 1:
            raise ValueError("phase counts must be >= 0 and window >= 1")

    def total_episodes(self):
        return self.n1 + self.n2 + self.n3 + self.n4


class SystemActionSpace:
    """Abstract system acts: request/confirm per informable slot, offer,
    inform-requested, repeat, bye."""

    def __init__(self, ont):
        acts = []
        for slot in ont.informable_slots:
            acts.append(("request", slot))
        for slot in ont.informable_slots:
            acts.append(("confirm", slot))
        acts.append(("offer",))
        acts.append(("inform_requested",))
        acts.append(("repeat",))
        acts.append(("bye",))
        self.acts = tuple(acts)

    def __len__(self):
        return len(self.acts)

    def __getitem__(self, i):
        return self.acts[i]

    def index(self, act):
        return self.acts.index(act)


class MetricsSeries:
    """Per-episode metrics with windowed moving averages."""

    def __init__(self, window=1000):
        self.window = window
        self.episode = []
        self.phase = []
        self.success = []
        self.turns = []
        self.reward = []
        self.moving_reward = []
        self.moving_success = []
        self._win_r = deque(maxlen=window)
        self._win_s = deque(maxlen=window)
        self.crashed = False
        self.crash_phase = None
        self.crash_reason = None
        self.phase_evals = {}

    def add(self, phase, success, turns):
        r = evaluation_reward(success, turns)
        self.episode.append(len(self.episode))
        self.phase.append(phase)
        self.success.append(bool(success))
        self.turns.append(int(turns))
        self.reward.append(r)
        self._win_r.append(r)
        self._win_s.append(float(success))
        self.moving_reward.append(sum(self._win_r) / len(self._win_r))
        self.moving_success.append(sum(self._win_s) / len(self._win_s))

    def __len__(self):
        return len(self.episode)

    def phase_slice(self, phase):
        return [i for i, p in enumerate(self.phase) if p == phase]

    def final_moving_reward(self, phase=None):
        idx = self.phase_slice(phase)[-1] if phase else len(self.episode) - 1
        return self.moving_reward[idx]

    def to_rows(self):
        header = ["episode", "phase", "success", "turns", "reward",
                  "moving_reward", "moving_success"]
        rows = [header]
        for i in range(len(self.episode)):
            rows.append([self.episode[i], self.phase[i], int(self.success[i]),
                         self.turns[i], f"{self.reward[i]:.6f}",
                         f"{self.moving_reward[i]:.6f}",
                         f"{self.moving_success[i]:.6f}"])
        return rows

    def to_tsv(self):
        return "\n".join("\t".join(str(c) for c in row) for row in self.to_rows()) + "\n"

    def summary(self):
        out = {
            "episodes": len(self.episode),
            "crashed": self.crashed,
            "crash_phase": self.crash_phase,
            "phase_evals": self.phase_evals,
            "final_moving_reward": self.moving_reward[-1] if self.episode else None,
        }
        for phase in sorted(set(self.phase)):
            idx = self.phase_slice(phase)
            out[phase] = {
                "episodes": len(idx),
                "success_rate": float(np.mean([self.success[i] for i in idx])),
                "mean_turns": float(np.mean([self.turns[i] for i in idx])),
                "mean_reward": float(np.mean([self.reward[i] for i in idx])),
                "final_moving_reward": self.moving_reward[idx[-1]],
            }
        return out


class DialogueEnv:
    """Static components of one experiment: domain, channel, rewards."""

    def __init__(self, ont, error_model, reward_cfg, patience=20, max_turns=20):
        self.ont = ont
        self.error_model = error_model
        self.reward_cfg = reward_cfg
        self.patience = patience
        self.max_turns = max_turns
        self.indices = {st: flat_index(ont, st) for st in ag.SLOT_TYPES}
        self.action_space = SystemActionSpace(ont)
        self.n_goal_slots = len(ont.informable)

    def policy_state_dim(self):
        return (4 * self.n_goal_slots + len(self.ont.requestable)
                + len(self.ont.methods) + len(self.action_space) + 1 + 4)

    def tracker_dims(self, slot_type):
        d = self.indices[slot_type].dimension
        return 6 * d, d


def _entropy(masses):
    h = 0.0
    for p in masses:
        if p > 0:
            h -= p * math.log(p)
    n = len(masses)
    return h / math.log(n) if n > 1 else 0.0


def policy_state(env, belief, last_action_index, turn_index):
    """Fixed-dimension encoding of the executed belief plus context."""
    parts = []
    for slot in env.ont.informable_slots:
        masses = sorted(belief.goal[slot].values(), reverse=True)
        b_none = belief.goal_none[slot]
        top = masses[0]
        second = masses[1] if len(masses) > 1 else 0.0
        ent = _entropy(masses + [b_none])
        parts.extend([top, second, b_none, ent])
    parts.extend(belief.request[s] for s in env.ont.requestable)
    parts.extend(belief.method[m] for m in env.ont.methods)
    one_hot = [0.0] * len(env.action_space)
    if last_action_index is not None:
        one_hot[last_action_index] = 1.0
    parts.extend(one_hot)
    parts.append(turn_index / env.max_turns)
    constraints = {}
    for slot in env.ont.informable_slots:
        v, mass = belief.top_goal(slot)
        if mass > 0.5:
            constraints[slot] = v
    n_match = len(env.ont.matching_entities(constraints))
    bucket = [0.0] * 4
    bucket[min(3, n_match if n_match < 2 else (2 if n_match < 4 else 3))] = 1.0
    parts.extend(bucket)
    return np.array(parts)


def _best_entity(env, belief):
    """Entity maximizing the product of per-slot acceptance beliefs.

    The None mass counts as acceptance of any value (an unconstrained
    slot should not veto every entity).  Ties go to the lowest id.
    """
    best, best_score = 0, -1.0
    for i, ent in enumerate(env.ont.entities):
        score = 1.0
        for slot in env.ont.informable_slots:
            score *= belief.goal[slot][ent[slot]] + belief.goal_none[slot]
        if score > best_score + 1e-12:
            best, best_score = i, score
    return best


def execute_system_act(env, action_index, belief, offered_entity):
    """Ground an abstract act; returns (DialogueAct, offered entity id)."""
    kind = env.action_space[action_index]
    ont = env.ont
    if kind[0] == "request":
        return system_act("request", (kind[1], None)), offered_entity
    if kind[0] == "confirm":
        slot = kind[1]
        value, _ = belief.top_goal(slot)
        return system_act("confirm", (slot, value)), offered_entity
    if kind[0] == "offer":
        i = _best_entity(env, belief)
        ent = ont.entities[i]
        args = tuple((s, ent[s]) for s in ont.informable_slots)
        return system_act("offer", *args), i
    if kind[0] == "inform_requested":
        if offered_entity is None:
            return system_act("repeat"), offered_entity
        ent = ont.entities[offered_entity]
        args = tuple((s, ent.get(s, "none")) for s in ont.requestable
                     if belief.request[s] > 0.5)
        if not args:
            return system_act("repeat"), offered_entity
        return system_act("inform", *args), offered_entity
    if kind[0] == "repeat":
        return system_act("repeat"), offered_entity
    return system_act("bye"), offered_entity


def scripted_greedy_policy(env, belief, offered_entity, turn_index):
    """Hand-written slot-filling policy for tests: answer requests,
    ask about undecided slots, otherwise offer."""
    space = env.action_space
    if offered_entity is not None and any(belief.request[s] > 0.5
                                          for s in env.ont.requestable):
        return space.index(("inform_requested",))
    for slot in env.ont.informable_slots:
        if belief.top_goal(slot)[1] <= 0.5 and belief.goal_none[slot] < 0.8:
            return space.index(("request", slot))
    return space.index(("offer",))


@dataclass
class EpisodeOutcome:
    records: list
    success: bool
    turns: int
    goal: object


def run_dialogue(env, policy, trackers=None, mode="aux-tracker", rng=None, *,
                 train_policy=False, train_trackers=False, collect_pretrain=None,
                 epsilon=0.0, noise_scale=0.0, scripted=None, learn_hooks=True):
    """Run one dialogue and (optionally) push transitions and learn.

    mode "aux-tracker" executes the polynomial belief; "agent-tracker"
    replaces the fragments owned by enabled tracking agents with their
    (repaired) outputs.  collect_pretrain, when given, is a dict
    slot-type -> list collecting (state, teacher belief vector) pairs.
    """
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    ont, em, rcfg = env.ont, env.error_model, env.reward_cfg
    use_agents = mode == "agent-tracker" and trackers is not None and trackers.enabled()

    goal = usersim.sample_goal(ont, rng)
    agenda = usersim.new_agenda(goal, rng, patience=env.patience)
    belief = uniform_belief(ont)
    # the auxiliary tracker keeps its own belief chain over the same SLU
    # stream, so its teaching targets are independent of what the agents
    # (and their exploration noise) executed on previous turns
    aux_belief = belief
    last_sys = system_act("hello")
    last_action_index = None
    offered_entity = None
    records = []
    pending_policy = None  # (state, action)
    pending_track = {}  # slot type -> (state vec, action vec, mid reward)
    terminal = False
    success = False

    for t in range(env.max_turns):
        user_acts, agenda = usersim.user_respond(agenda, last_sys, rng)
        user_bye = any(a.act_type == "bye" for a in user_acts)
        slu = usersim.corrupt(user_acts, em, ont, rng)
        aux_frame = cmbp.extract_features(slu, aux_belief, last_sys, ont, t)
        b_aux = cmbp.track_frame(aux_frame, ont)
        aux_belief = b_aux

        aux_vecs = {st: belief_vector(b_aux, env.indices[st]) for st in ag.SLOT_TYPES}
        if use_agents:
            # the agents track from their own executed history
            frame = cmbp.extract_features(slu, belief, last_sys, ont, t)
            exec_belief = b_aux.copy()
            agent_steps = {}
            for st in trackers.enabled():
                s_vec = frame.vector(st)
                a_vec = ag.ddpg_act(trackers[st], s_vec,
                                    explore=train_trackers and noise_scale > 0,
                                    noise_scale=noise_scale, rng=rng)
                frag = vector_to_belief(a_vec, env.indices[st], ont)
                if st == "goal":
                    exec_belief.goal, exec_belief.goal_none = frag
                elif st == "request":
                    exec_belief.request = frag
                else:
                    exec_belief.method = frag
                agent_steps[st] = (s_vec, a_vec)
        else:
            exec_belief = b_aux
            agent_steps = {}

        if collect_pretrain is not None:
            for st, pairs in collect_pretrain.items():
                pairs.append((aux_frame.vector(st), aux_vecs[st]))

        if user_bye:
            # dialogue over: the previous actions were terminal
            records.append(TurnRecord(t, system_act("bye"), user_acts, slu,
                                      b_aux, exec_belief))
            terminal = True
            success = usersim.is_success(goal, records)
            _flush_pending(env, policy, trackers, pending_policy, pending_track,
                           None, None, True, success, train_policy,
                           train_trackers, rng, learn_hooks)
            pending_policy, pending_track = None, {}
            break

        state = policy_state(env, exec_belief, last_action_index, t)
        _flush_pending(env, policy, trackers, pending_policy, pending_track,
                       state, agent_steps, False, False, train_policy,
                       train_trackers, rng, learn_hooks)

        if scripted is not None:
            action = scripted(env, exec_belief, offered_entity, t)
        else:
            action = ag.dqn_select(policy, state, epsilon, rng)
        sys_act, offered_entity = execute_system_act(env, action, exec_belief,
                                                     offered_entity)
        rewards = {}
        pending_policy = (state, action)
        pending_track = {}
        for st, (s_vec, a_vec) in agent_steps.items():
            r_mid = tracking_turn_reward(rcfg, a_vec, aux_vecs[st],
                                         trackers.trust.get(st, 0.0), False, False)
            pending_track[st] = (s_vec, a_vec, r_mid)
            rewards[f"r_bs_{st}"] = r_mid - rcfg.turn_penalty
        rewards["r_tp"] = rcfg.turn_penalty
        records.append(TurnRecord(t, sys_act, user_acts, slu, b_aux, exec_belief,
                                  rewards))
        belief = exec_belief
        last_sys = sys_act
        last_action_index = action

        if sys_act.act_type == "bye":
            terminal = True
            success = usersim.is_success(goal, records)
            _flush_pending(env, policy, trackers, pending_policy, pending_track,
                           None, None, True, success, train_policy,
                           train_trackers, rng, learn_hooks)
            pending_policy, pending_track = None, {}
            break

    if not terminal:
        # max turns exhausted: failure by definition
        success = False
        _flush_pending(env, policy, trackers, pending_policy, pending_track,
                       None, None, True, False, train_policy, train_trackers,
                       rng, learn_hooks)
    if records:
        records[-1].rewards["r_sr"] = env.reward_cfg.success_reward if success else 0.0
    return EpisodeOutcome(records, success, len(records), goal)


def _flush_pending(env, policy, trackers, pending_policy, pending_track,
                   next_state, next_agent_steps, terminal, success,
                   train_policy, train_trackers, rng, learn_hooks):
    """Complete last turn's transitions now that their successors exist."""
    rcfg = env.reward_cfg
    if pending_policy is not None and train_policy:
        state, action = pending_policy
        if terminal:
            r = policy_turn_reward(rcfg, True, success)
            nxt = state
        else:
            r = policy_turn_reward(rcfg, False, False)
            nxt = next_state
        policy.buffer.push(ag.Transition(state, action, r, nxt, terminal))
        if learn_hooks and policy.ready():
            for _ in range(policy.learn_steps):
                dqn_batch = policy.buffer.sample(policy.batch_size, rng)
                ag.dqn_learn(policy, dqn_batch)
    if pending_track and train_trackers and trackers is not None:
        for st, (s_vec, a_vec, r_mid) in pending_track.items():
            agent = trackers[st]
            if terminal:
                r = rcfg.success_reward if success else 0.0
                nxt = s_vec
            else:
                r = r_mid
                nxt = next_agent_steps[st][0] if st in next_agent_steps else s_vec
            agent.buffer.push(ag.Transition(s_vec, a_vec, r, nxt, terminal))
            if learn_hooks and agent.ready():
                batch = agent.buffer.sample(agent.batch_size, rng)
                ag.ddpg_learn(agent, batch)


@dataclass
class Hyper:
    """Engine hyperparameters shared by the phases."""

    dqn_hidden: tuple = (128, 128)
    ddpg_hidden: tuple = (64, 64)
    dqn_lr: float = 1e-3
    actor_lr: float = 1e-4
    critic_lr: float = 1e-3
    pretrain_lr: float = 1e-3
    buffer_capacity: int = 50_000
    batch_size: int = 32
    warmup: int = 100
    dqn_steps_per_turn: int = 4
    eps_start: float = 0.05
    eps_end: float = 0.01
    eps_decay_frac: float = 0.2
    demo_frac: float = 0.4
    eps4_start: float = 0.05
    noise_start: float = 0.05
    noise_end: float = 0.01
    noise_decay_frac: float = 0.3
    actor_delay: int = 5_000
    # per-turn rewards are bounded, so true returns live well inside +-5;
    # clamping bootstrap targets there prevents late-training value blow-ups
    target_clip: float = 5.0
    pretrain_pool: int = 20_000
    pretrain_steps_per_turn: int = 8


class Experiment:
    """One training run: builds the components and walks the phases."""

    def __init__(self, env, variant, schedule, hyper=None, seed=0):
        self.env = env
        self.variant = variant
        self.schedule = schedule
        self.hyper = hyper or Hyper()
        seq = np.random.SeedSequence(seed)
        policy_seed, tracker_seed, episode_seed = seq.spawn(3)
        self.rng = np.random.default_rng(episode_seed)
        h = self.hyper
        # the policy's return is bounded by the success reward above and the
        # summed turn penalties below, so its bootstrap clip can be exact
        rcfg = env.reward_cfg
        policy_clip = max(rcfg.success_reward,
                          abs(rcfg.turn_penalty) * env.max_turns)
        self.policy = ag.DqnAgent(
            env.policy_state_dim(), len(env.action_space), hidden=h.dqn_hidden,
            discount=schedule.discount, tau=schedule.tau, lr=h.dqn_lr,
            buffer_capacity=h.buffer_capacity, batch_size=h.batch_size,
            warmup=h.warmup, learn_steps=h.dqn_steps_per_turn,
            target_clip=policy_clip, rng=np.random.default_rng(policy_seed))
        self.trackers = self._build_trackers(np.random.default_rng(tracker_seed))
        self.metrics = MetricsSeries(window=schedule.window)
        self._policy_episodes = 0
        self._phase4_episodes = 0
        self._phase3_episodes = 0
        self._pretrain_pairs = None

    def _build_trackers(self, rng):
        enabled = {
            "polynomial": (),
            "ta-g": ("goal",),
            "ta-r": ("request",),
            "ta-m": ("method",),
            "ta-all": ag.SLOT_TYPES,
            "ta-noteaching": ag.SLOT_TYPES,
        }.get(self.variant)
        if enabled is None:
            raise ValueError(f"unknown variant {self.variant!r}")
        h, env = self.hyper, self.env
        agents = {}
        for st in enabled:
            s_dim, a_dim = env.tracker_dims(st)
            agents[st] = ag.DdpgAgent(
                s_dim, a_dim, hidden=h.ddpg_hidden,
                discount=self.schedule.discount, tau=self.schedule.tau,
                actor_lr=h.actor_lr, critic_lr=h.critic_lr,
                buffer_capacity=h.buffer_capacity, batch_size=h.batch_size,
                warmup=h.warmup, actor_delay=h.actor_delay, groups=a_dim,
                critic_groups=a_dim, target_clip=h.target_clip, rng=rng)
        trust = dict(env.reward_cfg.trust)
        if self.variant == "ta-noteaching":
            trust = {st: 0.0 for st in ag.SLOT_TYPES}
        return ag.TrackingAgentSet(agents, trust)

    # --- exploration schedules ---------------------------------------------

    def _epsilon(self, phase):
        h, s = self.hyper, self.schedule
        if phase == "phase1":
            done = max(0, self._policy_episodes - self._demo_episodes())
            horizon = max(1.0, h.eps_decay_frac * s.n1)
            frac = min(1.0, done / horizon)
            return h.eps_start + frac * (h.eps_end - h.eps_start)
        if phase == "phase4":
            horizon = max(1.0, h.eps_decay_frac * s.n4)
            frac = min(1.0, self._phase4_episodes / horizon)
            return h.eps4_start + frac * (h.eps_end - h.eps4_start)
        return h.eps_end

    def _demo_episodes(self):
        return int(self.hyper.demo_frac * self.schedule.n1)

    def _noise(self):
        h, s = self.hyper, self.schedule
        horizon = max(1.0, h.noise_decay_frac * s.n3)
        frac = min(1.0, self._phase3_episodes / horizon)
        return h.noise_start + frac * (h.noise_end - h.noise_start)

    # --- phases --------------------------------------------------------------

    def run_phase1(self, episodes=None):
        """DQN policy training with the polynomial tracker.

        The first demo_frac * N1 episodes follow the scripted policy so
        the replay buffer starts with successful trajectories (the DQN
        still learns off-policy from them); the rest are epsilon-greedy.
        """
        n = self.schedule.n1 if episodes is None else episodes
        for _ in range(n):
            demo = self._policy_episodes < self._demo_episodes()
            eps = self._epsilon("phase1")
            out = run_dialogue(self.env, self.policy, rng=self.rng,
                               train_policy=True, epsilon=eps,
                               scripted=scripted_greedy_policy if demo else None)
            self._policy_episodes += 1
            self.metrics.add("phase1", out.success, out.turns)

    def run_phase2(self, episodes=None):
        """Supervised actor pre-training toward the polynomial beliefs."""
        n = self.schedule.n2 if episodes is None else episodes
        if not self.trackers.enabled():
            # the baseline has no pre-training phase: it keeps training its
            # policy, and the episodes stay labelled phase1
            for _ in range(n):
                out = run_dialogue(self.env, self.policy, rng=self.rng,
                                   train_policy=True, epsilon=self._epsilon("phase1"))
                self._policy_episodes += 1
                self.metrics.add("phase1", out.success, out.turns)
            return
        h = self.hyper
        if self._pretrain_pairs is None:
            self._pretrain_pairs = {st: deque(maxlen=h.pretrain_pool)
                                    for st in self.trackers.enabled()}
            for st in self.trackers.enabled():
                self.trackers[st].pretrain_opt = None
        for _ in range(n):
            out = run_dialogue(self.env, self.policy, rng=self.rng,
                               epsilon=self.hyper.eps_end,
                               collect_pretrain=self._pretrain_pairs)
            steps = out.turns * h.pretrain_steps_per_turn
            for st in self.trackers.enabled():
                agent = self.trackers[st]
                pairs = self._pretrain_pairs[st]
                if len(pairs) < h.batch_size:
                    continue
                if agent.pretrain_opt is None:
                    agent.pretrain_opt = nn.OptimizerState(agent.actor, "adam",
                                                           lr=h.pretrain_lr)
                saved = agent.actor_opt
                agent.actor_opt = agent.pretrain_opt
                for _ in range(steps):
                    idx = self.rng.choice(len(pairs), size=h.batch_size, replace=False)
                    states = np.stack([pairs[i][0] for i in idx])
                    targets = np.stack([pairs[i][1] for i in idx])
                    ag.pretrain_actor(agent, states, targets)
                agent.actor_opt = saved
            self.metrics.add("phase2", out.success, out.turns)
        for st in self.trackers.enabled():  # targets start from the pre-trained actor
            nn.soft_update(self.trackers[st].actor_target, self.trackers[st].actor, 1.0)

    def run_phase3(self, episodes=None):
        """DDPG tracking-agent training; policy frozen."""
        n = self.schedule.n3 if episodes is None else episodes
        if not self.trackers.enabled():
            for _ in range(n):
                out = run_dialogue(self.env, self.policy, rng=self.rng,
                                   train_policy=True, epsilon=self._epsilon("phase1"))
                self._policy_episodes += 1
                self.metrics.add("phase1", out.success, out.turns)
            return
        for _ in range(n):
            out = run_dialogue(self.env, self.policy, self.trackers,
                               mode="agent-tracker", rng=self.rng,
                               train_trackers=True, epsilon=self.hyper.eps_end,
                               noise_scale=self._noise())
            self._phase3_episodes += 1
            self.metrics.add("phase3", out.success, out.turns)

    def run_phase4(self, episodes=None):
        """DQN resumes; tracking agents frozen (and noiseless)."""
        n = self.schedule.n4 if episodes is None else episodes
        mode = "agent-tracker" if self.trackers.enabled() else "aux-tracker"
        for _ in range(n):
            eps = self._epsilon("phase4" if self.trackers.enabled() else "phase1")
            out = run_dialogue(self.env, self.policy, self.trackers, mode=mode,
                               rng=self.rng, train_policy=True, epsilon=eps)
            self._phase4_episodes += 1
            if not self.trackers.enabled():
                self._policy_episodes += 1
            self.metrics.add("phase4", out.success, out.turns)

    def evaluate(self, episodes=500, seed=12345):
        """Greedy policy, noiseless actors, no learning."""
        rng = np.random.default_rng(seed)
        mode = "agent-tracker" if self.trackers.enabled() else "aux-tracker"
        succ, turns, rewards = [], [], []
        for _ in range(episodes):
            out = run_dialogue(self.env, self.policy, self.trackers, mode=mode,
                               rng=rng, epsilon=0.0, noise_scale=0.0)
            succ.append(out.success)
            turns.append(out.turns)
            rewards.append(evaluation_reward(out.success, out.turns))
        return {
            "episodes": episodes,
            "success_rate": float(np.mean(succ)),
            "mean_turns": float(np.mean(turns)),
            "mean_reward": float(np.mean(rewards)),
            "std_reward": float(np.std(rewards)),
        }


def joint_train(env, variant, schedule, hyper=None, seed=0, eval_episodes=0,
                eval_seed=12345):
    """Full four-phase run (baseline: plain policy training throughout).

    A run whose losses go non-finite is recorded as crashed; its partial
    metrics are kept.  When eval_episodes > 0, greedy evaluations are
    stored at the ends of phases 3 and 4.
    """
    exp = Experiment(env, variant, schedule, hyper, seed)
    phases = [("phase1", exp.run_phase1), ("phase2", exp.run_phase2),
              ("phase3", exp.run_phase3), ("phase4", exp.run_phase4)]
    for name, step in phases:
        try:
            step()
        except FloatingPointError as e:
            exp.metrics.crashed = True
            exp.metrics.crash_phase = name
            exp.metrics.crash_reason = str(e)
            return exp, exp.metrics
        if eval_episodes > 0 and name in ("phase3", "phase4"):
            exp.metrics.phase_evals[name] = exp.evaluate(eval_episodes, eval_seed)
    return exp, exp.metrics
