import logging
import os
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from compiler.compile import compile_ball_cover, compile_convex, compile_union
from compiler.gates import margin_params
from dataset_utils.datasets import Dataset
from dataset_utils.generators import SpiralParams, gen_disks, gen_swiss
from errors import EmptySetError
from experiments.config import OURS, ExperimentConfig
from experiments.rendering import render_decision_map
from experiments.seeding import derive_seed
from geometry.covers import ball_cover_from_positives
from geometry.facets import ball_polytope, circumscribed_error
from metrics import MetricsReport, evaluate
from model.initializers import init_baseline
from model.network_spec import NetworkSpec
from model.sigmoid_mlp import bce_loss, predict_proba
from model.training import EarlyStopConfig, LossCurve, train

log = logging.getLogger(__name__)

SUMMARY_COLUMNS = ["case", "H", "init", "init_brier", "init_auc", "init_iou", "final_brier", "final_auc", "final_iou"]
METRICS_COLUMNS = ["case", "H", "init", "phase", "brier", "auc", "iou"]
ARTIFACT_DIRS = ("curves", "maps", "contours", "specs")


@dataclass
class RowResult:
    case: str
    hidden: int
    init: str
    seed: int
    init_metrics: MetricsReport
    final_metrics: Optional[MetricsReport] = None
    curve: Optional[LossCurve] = None

    @property
    def key(self) -> str:
        return row_key(self.case, self.hidden, self.init)

    def summary_row(self) -> list:
        final = self.final_metrics
        return [self.case, self.hidden, self.init,
                self.init_metrics.brier, self.init_metrics.auc, self.init_metrics.iou,
                final.brier if final else None, final.auc if final else None, final.iou if final else None]

    def metrics_rows(self) -> List[list]:
        rows = [[self.case, self.hidden, self.init, "init",
                 self.init_metrics.brier, self.init_metrics.auc, self.init_metrics.iou]]
        if self.final_metrics is not None:
            f = self.final_metrics
            rows.append([self.case, self.hidden, self.init, "final", f.brier, f.auc, f.iou])
        return rows


@dataclass
class ExperimentResult:
    rows: List[RowResult] = field(default_factory=list)

    def summary(self) -> pd.DataFrame:
        return pd.DataFrame([r.summary_row() for r in self.rows], columns=SUMMARY_COLUMNS)

    def metrics(self) -> pd.DataFrame:
        return pd.DataFrame([m for r in self.rows for m in r.metrics_rows()], columns=METRICS_COLUMNS)


def row_key(case: str, hidden: int, init: str) -> str:
    return f"{case}_H{hidden}_{init}"


def measure(spec: NetworkSpec, data: Dataset, tau: float = 0.5) -> MetricsReport:
    probs = predict_proba(spec, data.x)
    return evaluate(probs, data.y, tau, bce=float(bce_loss(probs, data.y)))


def make_datasets(cfg: ExperimentConfig) -> Tuple[Dataset, Dataset]:
    """Train and test sets shared by every row of a case."""
    train_seed = derive_seed(cfg.seed, f"{cfg.case}/train")
    test_seed = derive_seed(cfg.seed, f"{cfg.case}/test")
    if cfg.case == "swiss":
        sw = cfg.swiss
        spiral = SpiralParams(a=sw.a, b=sw.b, theta0=sw.theta0, theta1=sw.theta1, width=sw.width)
        return (gen_swiss(cfg.train_n, train_seed, spiral, cfg.window),
                gen_swiss(cfg.test_n, test_seed, spiral, cfg.window))
    kwargs = dict(window=cfg.window, radius=cfg.disk_radius, single_center=cfg.single_center,
                  centers=cfg.disk_centers)
    return (gen_disks(cfg.case, cfg.train_n, train_seed, **kwargs),
            gen_disks(cfg.case, cfg.test_n, test_seed, **kwargs))


def build_ours(cfg: ExperimentConfig, hidden: int) -> NetworkSpec:
    """Compiled disk classifier with `hidden` gates in total."""
    if cfg.case == "single":
        comp = ball_polytope(cfg.single_center, cfg.disk_radius, hidden, 2)
        return compile_convex(comp, cfg.kappa_hidden)
    per_disk = hidden // len(cfg.disk_centers)
    comps = [ball_polytope(c, cfg.disk_radius, per_disk, 2) for c in cfg.disk_centers]
    return compile_union(comps, margin_params(per_disk, len(comps), kappa=cfg.kappa_hidden))


def build_swiss(cfg: ExperimentConfig, positives: np.ndarray) -> NetworkSpec:
    """Ball cover of the positive training points compiled with the roll's fixed constants."""
    sw = cfg.swiss
    if len(positives) == 0:
        raise EmptySetError("the swiss-roll training set has no positive points")
    cover = ball_cover_from_positives(positives, sw.cover_radius, sw.voxel_ratio, sw.budget)
    params = replace(margin_params(sw.sides, len(cover), kappa=sw.gate_kappa), lam=sw.kappa_disk)
    return compile_ball_cover(cover, circumscribed_error(sw.sides, sw.cover_radius), params, sides=sw.sides,
                              head_scale=sw.head_scale, head_tau=sw.head_tau, enforce_bounds=False)


def _prepare_outdir(outdir: str) -> None:
    for sub in ARTIFACT_DIRS:
        os.makedirs(os.path.join(outdir, sub), exist_ok=True)


def _write_phase(spec: NetworkSpec, cfg: ExperimentConfig, outdir: str, key: str, phase: str) -> None:
    spec.save(os.path.join(outdir, "specs", f"{key}_{phase}.json"))
    dmap = render_decision_map(spec, cfg.window, cfg.grid_n, cfg.tau)
    dmap.write_ppm(os.path.join(outdir, "maps", f"{key}_{phase}.ppm"))
    dmap.write_contour_csv(os.path.join(outdir, "contours", f"{key}_{phase}.csv"))


def run_row(cfg: ExperimentConfig, spec: NetworkSpec, train_set: Dataset, test_set: Dataset, hidden: int,
            init: str, outdir: Optional[str], early_stop: Optional[EarlyStopConfig] = None,
            logger=False) -> RowResult:
    key = row_key(cfg.case, hidden, init)
    seed = derive_seed(cfg.seed, key)
    result = RowResult(cfg.case, hidden, init, seed, init_metrics=measure(spec, test_set, cfg.tau))
    log.info("%s init: brier=%.4f auc=%s iou=%s", key, result.init_metrics.brier, result.init_metrics.auc,
             result.init_metrics.iou)
    if outdir is not None:
        _write_phase(spec, cfg, outdir, key, "init")

    train_cfg = replace(cfg.train, seed=seed, early_stop=early_stop or cfg.train.early_stop)
    trained, curve = train(spec, train_set, train_cfg, logger=logger)
    result.final_metrics = measure(trained, test_set, cfg.tau)
    result.curve = curve
    log.info("%s final: brier=%.4f auc=%s iou=%s", key, result.final_metrics.brier, result.final_metrics.auc,
             result.final_metrics.iou)
    if outdir is not None:
        _write_phase(trained, cfg, outdir, key, "final")
        curve.to_csv(os.path.join(outdir, "curves", f"{key}.csv"))
    return result


def _flush(result: ExperimentResult, outdir: Optional[str]) -> None:
    if outdir is not None:
        result.metrics().to_csv(os.path.join(outdir, "metrics.csv"), index=False)


def run_swiss(cfg: ExperimentConfig, outdir: Optional[str] = None, logger=False) -> RowResult:
    """
    Swiss-roll pipeline: voxel + FPS cover of the training positives, compiled ball-cover network,
    then training with early stopping on a held-out split.
    """
    cfg = replace(cfg, case="swiss")
    if outdir is not None:
        _prepare_outdir(outdir)
    train_set, test_set = make_datasets(cfg)
    spec = build_swiss(cfg, train_set.positives)
    hidden = spec.hidden_units[0]
    log.info("swiss-roll network: %s hidden units", spec.hidden_units)
    early = EarlyStopConfig(patience=cfg.swiss.patience, min_delta=cfg.swiss.min_delta)
    row = run_row(cfg, spec, train_set, test_set, hidden, OURS, outdir, early_stop=early, logger=logger)
    result = ExperimentResult([row])
    _flush(result, outdir)
    if outdir is not None:
        result.summary().to_csv(os.path.join(outdir, "summary.csv"), index=False)
    return row


def run_experiment(cfg: ExperimentConfig, outdir: Optional[str] = None, logger=False) -> ExperimentResult:
    """
    One row per (H, init) of the configured case: initial metrics, training, final metrics and artifacts.
    Every row derives its seed from cfg.seed and its own key, so rows are independent of each other.
    :param cfg: validated experiment configuration
    :param outdir: artifact directory, None to skip writing files
    :param logger: Lightning logger passed to training
    :return: all row results
    """
    cfg.validate()
    if cfg.case == "swiss":
        return ExperimentResult([run_swiss(cfg, outdir, logger=logger)])

    if outdir is not None:
        _prepare_outdir(outdir)
    train_set, test_set = make_datasets(cfg)
    log.info("%s: %d train / %d test points, %d positive in train", cfg.case, len(train_set), len(test_set),
             train_set.n_pos)

    plan = [(h, init) for h in cfg.hidden_sizes for init in cfg.inits]
    result = ExperimentResult()
    for hidden, init in tqdm(plan, desc=f"{cfg.case} rows"):
        if init == OURS:
            spec = build_ours(cfg, hidden)
        else:
            spec = init_baseline(init, [2, hidden, 1], derive_seed(cfg.seed, row_key(cfg.case, hidden, init)))
        result.rows.append(run_row(cfg, spec, train_set, test_set, hidden, init, outdir, logger=logger))
        _flush(result, outdir)

    if outdir is not None:
        result.summary().to_csv(os.path.join(outdir, "summary.csv"), index=False)
    return result


def init_only(cfg: ExperimentConfig, hidden: int, init: str, seeds: Optional[List[int]] = None) -> Dict[int, MetricsReport]:
    """Initial test metrics of one (H, init) cell for several base seeds, without training."""
    cfg.validate()
    reports = {}
    for seed in seeds or [cfg.seed]:
        seeded = replace(cfg, seed=seed)
        _, test_set = make_datasets(seeded)
        if init == OURS:
            spec = build_ours(seeded, hidden)
        else:
            spec = init_baseline(init, [2, hidden, 1], derive_seed(seed, row_key(cfg.case, hidden, init)))
        reports[seed] = measure(spec, test_set, cfg.tau)
    return reports
