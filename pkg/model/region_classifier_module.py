import math
from typing import Optional, Tuple

import torch
import pytorch_lightning as pl

from errors import TrainingDivergedError
from model.network_spec import NetworkSpec
from model.sigmoid_mlp import SigmoidMLP, as_trainable, bce_loss


class RegionClassifierModule(pl.LightningModule):
    """
    BCE + Adam training of a sigmoidal network given as a NetworkSpec.
    Epoch losses are exact example-weighted means of the batch losses, kept in running sums
    so the loss curve does not depend on how the logger aggregates steps.
    """
    def __init__(self,
                 spec: NetworkSpec,
                 learning_rate: float,
                 betas: Tuple[float, float] = (0.9, 0.999),
                 eps_adam: float = 1e-8,
                 **kwargs):
        super().__init__()
        self.learning_rate = learning_rate
        self.betas = tuple(betas)
        self.eps_adam = eps_adam
        self.save_hyperparameters(ignore=["spec"])

        self.model = SigmoidMLP(as_trainable(spec))

        self._train_sum = 0.0
        self._train_count = 0
        self._val_sum = 0.0
        self._val_count = 0
        self.last_train_bce: Optional[float] = None
        self.last_val_bce: Optional[float] = None

    def forward(self, x):
        return self.model.predict_proba(x)

    def _loss(self, batch):
        x, y = batch
        return bce_loss(self(x), y), len(y)

    def on_train_epoch_start(self):
        self._train_sum, self._train_count = 0.0, 0

    def training_step(self, batch, batch_idx):
        loss, n = self._loss(batch)
        if not torch.isfinite(loss):
            # epochs are reported 1-based
            raise TrainingDivergedError(self.current_epoch + 1, batch_idx, float(loss))
        self._train_sum += float(loss) * n
        self._train_count += n
        self.log("train_bce_step", loss, on_step=True, on_epoch=False, batch_size=n)
        return loss

    def on_train_epoch_end(self):
        self.last_train_bce = self._train_sum / max(self._train_count, 1)
        self.log("train_bce", self.last_train_bce, on_step=False, on_epoch=True)

    def on_validation_epoch_start(self):
        self._val_sum, self._val_count = 0.0, 0

    def validation_step(self, batch, batch_idx):
        loss, n = self._loss(batch)
        self._val_sum += float(loss) * n
        self._val_count += n
        return loss

    def on_validation_epoch_end(self):
        if self._val_count == 0:
            return
        self.last_val_bce = self._val_sum / self._val_count
        if not math.isfinite(self.last_val_bce):
            raise TrainingDivergedError(self.current_epoch + 1, -1, self.last_val_bce)
        # needed for EarlyStopping
        self.log("val_bce", self.last_val_bce, on_step=False, on_epoch=True, prog_bar=True)

    def configure_optimizers(self):
        return torch.optim.Adam(self.parameters(), lr=self.learning_rate, betas=self.betas, eps=self.eps_adam)

    def to_spec(self) -> NetworkSpec:
        return self.model.to_spec()
