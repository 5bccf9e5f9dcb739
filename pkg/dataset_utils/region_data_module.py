from typing import Optional

import pytorch_lightning as pl
import torch
from torch.utils.data import DataLoader

from dataset_utils.datasets import Dataset


class RegionDataModule(pl.LightningDataModule):
    """
    Serves a labeled point set in mini-batches.
    Training batches are reshuffled every epoch by a generator seeded once with `seed`,
    so the batch order of a run is fully determined by the seed. The last partial batch is kept.
    """
    def __init__(self,
                 train: Dataset,
                 batch_size: int,
                 seed: int,
                 val: Optional[Dataset] = None):
        super().__init__()
        self.train_set = train
        self.val_set = val
        self.batch_size = batch_size
        self.seed = seed

        # tensor datasets are built in setup
        self.train = None
        self.val = None

    def setup(self, stage=None):
        if stage == 'fit' or stage is None:
            self.train = self.train_set.to_tensor_dataset()
            self.val = self.val_set.to_tensor_dataset() if self.val_set is not None else None

    def train_dataloader(self):
        generator = torch.Generator().manual_seed(self.seed)
        return DataLoader(self.train, batch_size=self.batch_size, shuffle=True, drop_last=False,
                          generator=generator)

    def val_dataloader(self):
        if self.val is None:
            return []
        return DataLoader(self.val, batch_size=self.batch_size, shuffle=False)
