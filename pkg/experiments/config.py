import json
import math
from dataclasses import dataclass, field
from typing import List, Optional

from omegaconf import OmegaConf
from omegaconf.errors import OmegaConfBaseException

from errors import InvalidInputError
from geometry.box import Box
from model.training import TrainConfig

CASES = ("single", "double", "swiss")
BASELINES = ("random", "xavier", "kaiming", "he")
OURS = "ours"


@dataclass
class SwissConfig:
    # spiral generator r = a + b theta, half-width `width`
    a: float = 0.0
    b: float = 0.25
    theta0: float = 1.5 * math.pi
    theta1: float = 4.5 * math.pi
    width: float = 0.3
    window_lo: float = -4.0
    window_hi: float = 4.0
    # cover lengths are given in units of the unscaled roll and multiplied by unit_scale
    unit_scale: float = 0.25
    eps_cover: float = 1.5
    voxel_ratio: float = 0.6
    budget: int = 120
    sides: int = 24
    kappa_hidden: float = 8.0
    kappa_disk: float = 6.0
    head_scale: float = 6.0
    head_tau: float = 0.5
    patience: int = 10
    min_delta: float = 1e-4

    @property
    def cover_radius(self) -> float:
        return self.eps_cover * self.unit_scale

    @property
    def gate_kappa(self) -> float:
        return self.kappa_hidden / self.unit_scale


@dataclass
class ExperimentConfig:
    case: str = "single"
    window_lo: float = -2.0
    window_hi: float = 2.0
    train_n: int = 12000
    test_n: int = 3000
    hidden_sizes: List[int] = field(default_factory=lambda: [16, 32])
    inits: List[str] = field(default_factory=lambda: ["random", "xavier", "kaiming", "he", "ours"])
    kappa_hidden: float = 30.0
    disk_radius: float = 0.8
    disk_centers: List[List[float]] = field(default_factory=lambda: [[-0.6, 0.0], [0.6, 0.0]])
    single_center: List[float] = field(default_factory=lambda: [-0.6, 0.0])
    tau: float = 0.5
    grid_n: int = 200
    seed: int = 0
    train: TrainConfig = field(default_factory=TrainConfig)
    swiss: SwissConfig = field(default_factory=SwissConfig)

    @property
    def window(self) -> Box:
        if self.case == "swiss":
            return Box.square(self.swiss.window_lo, self.swiss.window_hi)
        return Box.square(self.window_lo, self.window_hi)

    def validate(self) -> None:
        if self.case not in CASES:
            raise InvalidInputError(f"unknown case {self.case!r}, expected one of {list(CASES)}")
        if not self.window_hi > self.window_lo or not self.swiss.window_hi > self.swiss.window_lo:
            raise InvalidInputError("experiment window is empty")
        if self.train_n < 1 or self.test_n < 1:
            raise InvalidInputError(f"train_n and test_n must be at least 1, got {self.train_n}, {self.test_n}")
        if self.grid_n < 2:
            raise InvalidInputError(f"grid_n must be at least 2, got {self.grid_n}")
        if not 0.0 < self.tau < 1.0:
            raise InvalidInputError(f"tau must lie in (0, 1), got {self.tau}")
        for init in self.inits:
            if init not in BASELINES + (OURS,):
                raise InvalidInputError(f"unknown init {init!r}, expected one of {list(BASELINES + (OURS,))}")
        for h in self.hidden_sizes:
            if h < 1:
                raise InvalidInputError(f"hidden sizes must be positive, got {h}")
            if self.case == "single" and OURS in self.inits and h < 3:
                raise InvalidInputError(f"a single-disk polygon needs at least 3 facets, got H={h}")
            if self.case == "double" and OURS in self.inits and (h % 2 or h < 6):
                raise InvalidInputError(f"the two-disk construction needs an even H >= 6, got {h}")
        self.train.validate()


def structured_config(overrides: Optional[dict] = None):
    """ExperimentConfig schema merged with overrides; unknown keys and wrong types are rejected."""
    schema = OmegaConf.structured(ExperimentConfig)
    try:
        return OmegaConf.merge(schema, overrides or {})
    except OmegaConfBaseException as e:
        raise InvalidInputError(f"invalid experiment config: {e}") from e


def to_experiment_config(cfg) -> ExperimentConfig:
    """Turns a (Dict)Config into a validated ExperimentConfig instance."""
    try:
        merged = OmegaConf.merge(OmegaConf.structured(ExperimentConfig), cfg)
    except OmegaConfBaseException as e:
        raise InvalidInputError(f"invalid experiment config: {e}") from e
    exp = OmegaConf.to_object(merged)
    exp.validate()
    return exp


def load_experiment_config(path: Optional[str] = None, **overrides) -> ExperimentConfig:
    """Reads a JSON or YAML config file (optional) and applies keyword overrides on top."""
    data = {}
    if path is not None:
        try:
            with open(path) as f:
                text = f.read()
        except OSError as e:
            raise InvalidInputError(f"cannot read config {path}: {e}") from e
        try:
            data = json.loads(text) if path.endswith(".json") else OmegaConf.to_container(OmegaConf.create(text))
        except (json.JSONDecodeError, OmegaConfBaseException) as e:
            raise InvalidInputError(f"cannot parse config {path}: {e}") from e
    cfg = structured_config(data)
    extra = {k: v for k, v in overrides.items() if v is not None}
    if extra:
        try:
            cfg = OmegaConf.merge(cfg, extra)
        except OmegaConfBaseException as e:
            raise InvalidInputError(f"invalid experiment override: {e}") from e
    return to_experiment_config(cfg)


def config_to_yaml(cfg: ExperimentConfig) -> str:
    return OmegaConf.to_yaml(OmegaConf.structured(cfg))


def config_to_dict(cfg: ExperimentConfig) -> dict:
    return OmegaConf.to_container(OmegaConf.structured(cfg))

