"""Experiment configuration: one JSON document that fully determines a run."""

import dataclasses
import json
import os

from .ontology import builtin_ontology, load_ontology
from .orchestrator import DialogueEnv, Hyper, TrainSchedule
from .reward import RewardConfig
from .usersim import ErrorModel

VARIANTS = ("polynomial", "ta-g", "ta-r", "ta-m", "ta-all", "ta-noteaching")

# the dstc3-like channel is noisier than the dstc2-like one by construction
DEFAULT_ERROR_RATES = {"toy": 0.15, "dstc2-like": 0.15, "dstc3-like": 0.30}
DEFAULT_TRUST = {
    "dstc2-like": {"goal": 0.2, "request": 0.2, "method": 4.0},
    "dstc3-like": {"goal": 0.07, "request": 0.07, "method": 4.0},
}
# tracker exploration noise (start, end), tuned per domain on the teaching
# variants: the small domain tolerates wide exploration, the larger and
# noisier one needs gentler perturbation of the executed belief
DEFAULT_NOISE = {
    "dstc2-like": (0.2, 0.02),
    "dstc3-like": (0.05, 0.01),
}


class ConfigError(ValueError):
    pass


@dataclasses.dataclass
class ExperimentConfig:
    ontology: str = "dstc2-like"  # builtin name or path to a document
    variant: str = "ta-all"
    error_model: ErrorModel = None
    reward: RewardConfig = None
    schedule: TrainSchedule = None
    hyper: Hyper = None
    patience: int = 20
    seeds: tuple = (0,)
    eval_episodes: int = 500
    eval_seed: int = 12345
    out_dir: str = "runs"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}; choose from {VARIANTS}")
        if self.error_model is None:
            rate = DEFAULT_ERROR_RATES.get(self.ontology, 0.15)
            self.error_model = ErrorModel(error_rate=rate)
        if self.reward is None:
            trust = DEFAULT_TRUST.get(self.ontology)
            self.reward = RewardConfig(trust=dict(trust)) if trust else RewardConfig()
        if self.schedule is None:
            self.schedule = TrainSchedule()
        if self.hyper is None:
            self.hyper = Hyper()
            noise = DEFAULT_NOISE.get(self.ontology)
            if noise:
                self.hyper.noise_start, self.hyper.noise_end = noise
        if self.variant == "ta-noteaching":
            self.reward.trust = {st: 0.0 for st in ("goal", "request", "method")}
        self.seeds = tuple(int(s) for s in self.seeds)
        if not self.seeds:
            raise ConfigError("need at least one seed")

    def load_ontology(self):
        if os.path.exists(self.ontology):
            return load_ontology(self.ontology)
        return builtin_ontology(self.ontology)

    def build_env(self):
        return DialogueEnv(self.load_ontology(), self.error_model, self.reward,
                           patience=self.patience,
                           max_turns=self.schedule.max_turns)

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["seeds"] = list(self.seeds)
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        errors = []
        for key, sub in (("error_model", ErrorModel), ("reward", RewardConfig),
                         ("schedule", TrainSchedule), ("hyper", Hyper)):
            if isinstance(d.get(key), dict):
                try:
                    val = dict(d[key])
                    if sub is Hyper:
                        for tup in ("dqn_hidden", "ddpg_hidden"):
                            if tup in val:
                                val[tup] = tuple(val[tup])
                    d[key] = sub(**val)
                except (TypeError, ValueError) as e:
                    errors.append(f"{key}: {e}")
        unknown = set(d) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            errors.append(f"unknown config fields: {sorted(unknown)}")
        if errors:
            raise ConfigError("; ".join(errors))
        try:
            return cls(**d)
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e)) from e

    @classmethod
    def from_file(cls, path):
        try:
            with open(path) as f:
                doc = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config does not parse: {e}") from e
        return cls.from_dict(doc)

    def with_overrides(self, overrides):
        """Apply dotted key=value strings, e.g. schedule.n1=500."""
        d = self.to_dict()
        for item in overrides:
            if "=" not in item:
                raise ConfigError(f"override {item!r} is not key=value")
            key, raw = item.split("=", 1)
            try:
                value = json.loads(raw)
            except json.JSONDecodeError:
                value = raw
            node = d
            parts = key.split(".")
            for p in parts[:-1]:
                if p not in node or not isinstance(node[p], dict):
                    raise ConfigError(f"unknown override path {key!r}")
                node = node[p]
            if parts[-1] not in node:
                raise ConfigError(f"unknown override key {key!r}")
            node[parts[-1]] = value
        return ExperimentConfig.from_dict(d)
