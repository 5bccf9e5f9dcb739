import logging
import os

import hydra
import pytorch_lightning as pl
from hydra.utils import instantiate
from omegaconf import DictConfig, OmegaConf

from experiments.config import to_experiment_config
from experiments.runner import run_experiment

log = logging.getLogger(__name__)


@hydra.main(version_base=None, config_path="conf", config_name="config")
def main(cfg: DictConfig) -> None:
    # -----------------------
    # -        init         -
    # -----------------------
    pl.seed_everything(cfg.seed)
    print(f"==== Using config ====\n{OmegaConf.to_yaml(cfg)}")

    # logger
    trainer_logger = instantiate(cfg.logger) if cfg.get("logger") else False

    experiment_cfg = OmegaConf.masked_copy(cfg, [k for k in cfg.keys() if k not in ("logger", "outdir")])
    experiment_cfg = to_experiment_config(experiment_cfg)

    # hydra changes the working directory into its run directory
    outdir = os.path.join(os.getcwd(), cfg.outdir)

    # -----------------------
    #      experiment       -
    # -----------------------
    result = run_experiment(experiment_cfg, outdir, logger=trainer_logger)
    print(result.summary().to_string(index=False))
    log.info("artifacts written to %s", outdir)


if __name__ == '__main__':
    main()
