"""Dialogue-management laboratory: on-line dialogue-state-tracking
optimization with a polynomial teacher, DDPG tracking agents and a DQN
dialogue policy, against an agenda-based simulated user."""

from .ontology import Ontology, FlatIndex, builtin_ontology, flat_index, load_ontology, serialize_ontology
from .dialogue import (BeliefState, DialogueAct, SluHypotheses, TurnRecord, UserGoal,
                       belief_vector, uniform_belief, user_act, system_act,
                       vector_to_belief)
from .usersim import Agenda, ErrorModel, corrupt, is_success, new_agenda, sample_goal, user_respond
from .cmbp import (FeatureFrame, SlotValueFeatures, cmbp_goal_update,
                   cmbp_method_update, cmbp_request_update, extract_features, track,
                   track_frame)
from .reward import RewardConfig, basic_score, evaluation_reward, policy_turn_reward, tracking_turn_reward
from .agents import (DdpgAgent, DqnAgent, ReplayBuffer, TrackingAgentSet, Transition,
                     ddpg_act, ddpg_learn, dqn_learn, dqn_select, pretrain_actor)
from .orchestrator import (DialogueEnv, Experiment, Hyper, MetricsSeries,
                           SystemActionSpace, TrainSchedule, execute_system_act,
                           joint_train, policy_state, run_dialogue,
                           scripted_greedy_policy)
from .config import ExperimentConfig

__version__ = "0.1.0"
