import logging
import math
from dataclasses import dataclass, field
from typing import Any, List, Optional, Tuple

import pandas as pd
import pytorch_lightning as pl
from pytorch_lightning.callbacks import EarlyStopping

from dataset_utils.datasets import Dataset
from dataset_utils.region_data_module import RegionDataModule
from errors import InvalidInputError
from loss_curve_callback import LossCurveLogger
from model.network_spec import NetworkSpec
from model.region_classifier_module import RegionClassifierModule

log = logging.getLogger(__name__)


@dataclass
class EarlyStopConfig:
    patience: int = 10
    min_delta: float = 1e-4
    # held-out share of the training set used when no validation set is given
    val_fraction: float = 0.1


@dataclass
class TrainConfig:
    epochs: int = 80
    batch_size: int = 512
    learning_rate: float = 3e-3
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps_adam: float = 1e-8
    early_stop: Optional[EarlyStopConfig] = None

    def validate(self) -> None:
        if self.epochs < 1:
            raise InvalidInputError(f"epochs must be at least 1, got {self.epochs}")
        if self.batch_size < 1:
            raise InvalidInputError(f"batch_size must be at least 1, got {self.batch_size}")
        if self.learning_rate < 0:
            raise InvalidInputError(f"learning_rate must not be negative, got {self.learning_rate}")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0 and self.eps_adam > 0):
            raise InvalidInputError("Adam constants must satisfy 0 <= beta < 1 and eps > 0")
        if self.early_stop is not None and self.early_stop.patience < 1:
            raise InvalidInputError(f"patience must be at least 1, got {self.early_stop.patience}")


@dataclass
class LossRecord:
    epoch: int
    train_bce: float
    val_bce: Optional[float] = None


@dataclass
class LossCurve:
    records: List[LossRecord] = field(default_factory=list)
    stopped_epoch: Optional[int] = None

    def __post_init__(self):
        epochs = [r.epoch for r in self.records]
        assert all(a < b for a, b in zip(epochs[:-1], epochs[1:])), "epochs must be strictly increasing"

    def __len__(self) -> int:
        return len(self.records)

    @property
    def train_bce(self) -> List[float]:
        return [r.train_bce for r in self.records]

    @property
    def has_validation(self) -> bool:
        return any(r.val_bce is not None for r in self.records)

    def to_frame(self) -> pd.DataFrame:
        columns = ["epoch", "train_bce"] + (["val_bce"] if self.has_validation else [])
        rows = [[r.epoch, r.train_bce] + ([r.val_bce] if self.has_validation else []) for r in self.records]
        return pd.DataFrame(rows, columns=columns)

    def to_csv(self, path: str) -> None:
        self.to_frame().to_csv(path, index=False)

    @staticmethod
    def from_csv(path: str) -> "LossCurve":
        df = pd.read_csv(path)
        has_val = "val_bce" in df.columns
        return LossCurve([LossRecord(int(row.epoch), float(row.train_bce),
                                     float(row.val_bce) if has_val and not math.isnan(row.val_bce) else None)
                          for row in df.itertuples()])


def train(spec: NetworkSpec, data: Dataset, cfg: TrainConfig, val: Optional[Dataset] = None,
          logger: Any = False) -> Tuple[NetworkSpec, LossCurve]:
    """
    Mini-batch Adam on the mean BCE, starting from the given weights.
    A counting head is folded into a trainable bias first. With early stopping and no `val`,
    a seeded held-out split of `data` is used for the validation loss.
    :param spec: initial network
    :param data: training set
    :param cfg: optimisation settings
    :param val: optional validation set
    :param logger: Lightning logger, False for none
    :return: trained network and per-epoch losses
    """
    cfg.validate()
    if data.dim != spec.input_dim:
        raise InvalidInputError(f"data has dimension {data.dim} but the network expects {spec.input_dim}")
    if len(data) == 0:
        raise InvalidInputError("training set is empty")

    if cfg.early_stop is not None and val is None:
        data, val = data.split(cfg.early_stop.val_fraction, cfg.seed)

    pl.seed_everything(cfg.seed, workers=True)
    dm = RegionDataModule(train=data, batch_size=cfg.batch_size, seed=cfg.seed, val=val)
    module = RegionClassifierModule(spec, learning_rate=cfg.learning_rate, betas=(cfg.beta1, cfg.beta2),
                                    eps_adam=cfg.eps_adam)

    curve_logger = LossCurveLogger()
    callbacks = [curve_logger]
    early_stopping = None
    if cfg.early_stop is not None:
        early_stopping = EarlyStopping(monitor="val_bce", mode="min", patience=cfg.early_stop.patience,
                                       min_delta=cfg.early_stop.min_delta)
        callbacks.append(early_stopping)

    trainer = pl.Trainer(max_epochs=cfg.epochs,
                         accelerator="cpu",
                         devices=1,
                         precision="64-true",
                         deterministic=True,
                         logger=logger or False,
                         callbacks=callbacks,
                         enable_checkpointing=False,
                         enable_progress_bar=False,
                         enable_model_summary=False,
                         num_sanity_val_steps=0,
                         limit_val_batches=1.0 if val is not None else 0)
    trainer.fit(module, dm)

    records = [LossRecord(int(r["epoch"]), float(r["train_bce"]), r["val_bce"]) for r in curve_logger.records]
    stopped = early_stopping.stopped_epoch + 1 if early_stopping is not None and early_stopping.stopped_epoch else None
    if stopped is not None:
        log.info("early stopping after epoch %d", stopped)
    return module.to_spec(), LossCurve(records, stopped_epoch=stopped)
