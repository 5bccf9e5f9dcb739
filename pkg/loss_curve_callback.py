from typing import Dict, List, Optional

from pytorch_lightning.callbacks import Callback


class LossCurveLogger(Callback):
    """Records (epoch, train_bce, val_bce) after every training epoch
    and forwards the record to trainer.logger.experiment.log when a logger is attached"""
    def __init__(self):
        self.records: List[Dict[str, Optional[float]]] = []

    def on_train_epoch_end(self, trainer, pl_module):
        record = self._extract_losses(trainer, pl_module)
        self.records.append(record)

        if trainer.logger is not None and hasattr(trainer.logger.experiment, "log"):
            trainer.logger.experiment.log({k: v for k, v in record.items() if v is not None})

    def _extract_losses(self, trainer, pl_module) -> Dict[str, Optional[float]]:
        # validation of this epoch has already run, the training mean comes from the module's running sums
        train_bce = pl_module._train_sum / max(pl_module._train_count, 1)
        val_bce = pl_module.last_val_bce if trainer.num_val_batches and sum(trainer.num_val_batches) else None
        return {"epoch": trainer.current_epoch + 1, "train_bce": train_bce, "val_bce": val_bce}
