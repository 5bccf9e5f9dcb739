from dataclasses import dataclass
from typing import Tuple

import numpy as np
import pandas as pd
import torch
from torch.utils.data import TensorDataset

from errors import InvalidInputError


@dataclass(frozen=True, eq=False)
class Dataset:
    """Labeled points: x is (N, d), y holds N labels in {0, 1}."""
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.atleast_2d(np.array(self.x, dtype=np.float64))
        y = np.array(self.y).ravel()
        if len(x) != len(y):
            raise InvalidInputError(f"{len(x)} points but {len(y)} labels")
        if len(y) and not np.all((y == 0) | (y == 1)):
            raise InvalidInputError("labels must be 0 or 1")
        x.flags.writeable = False
        y = y.astype(np.int64)
        y.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return len(self.y)

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    @property
    def n_pos(self) -> int:
        return int(self.y.sum())

    @property
    def positives(self) -> np.ndarray:
        return self.x[self.y == 1]

    def subset(self, index: np.ndarray) -> "Dataset":
        return Dataset(self.x[index], self.y[index])

    def split(self, fraction: float, seed: int) -> Tuple["Dataset", "Dataset"]:
        """Seeded random split into (rest, held-out) with round(fraction * N) held-out points."""
        if not 0.0 < fraction < 1.0:
            raise InvalidInputError(f"split fraction must lie in (0, 1), got {fraction}")
        n_out = int(round(fraction * len(self)))
        if n_out < 1 or n_out >= len(self):
            raise InvalidInputError(f"cannot hold out {n_out} of {len(self)} points")
        order = np.random.default_rng(seed).permutation(len(self))
        return self.subset(np.sort(order[n_out:])), self.subset(np.sort(order[:n_out]))

    def to_tensor_dataset(self) -> TensorDataset:
        return TensorDataset(torch.tensor(self.x, dtype=torch.float64), torch.tensor(self.y, dtype=torch.float64))

    def to_frame(self) -> pd.DataFrame:
        df = pd.DataFrame(self.x, columns=[f"x{i + 1}" for i in range(self.dim)])
        df["y"] = self.y
        return df

    def to_csv(self, path: str) -> None:
        self.to_frame().to_csv(path, index=False)

    @staticmethod
    def from_csv(path: str) -> "Dataset":
        """Reads a CSV with header x1,...,xd,y; the label column is optional (unlabeled points get y = 0)."""
        df = pd.read_csv(path)
        features = [c for c in df.columns if c != "y"]
        expected = [f"x{i + 1}" for i in range(len(features))]
        if features != expected:
            raise InvalidInputError(f"expected columns {expected + ['y']}, got {list(df.columns)}")
        y = df["y"].to_numpy() if "y" in df.columns else np.zeros(len(df), dtype=np.int64)
        return Dataset(df[features].to_numpy(dtype=np.float64), y)
