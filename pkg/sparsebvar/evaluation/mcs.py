"""Model confidence set by sequential elimination with a max-t statistic"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from arch.bootstrap import MovingBlockBootstrap

from sparsebvar.errors import TooFewModels, TooShort, tags_operation
from sparsebvar.evaluation.metrics import LossMatrix

logger = logging.getLogger(__name__)

MIN_ORIGINS = 20
DEFAULT_ALPHA = 0.25
DEFAULT_REPS = 5000


@dataclass(frozen=True)
class McsResult:
    included: Tuple[str, ...]
    # (model, p-value) in elimination order; surviving models follow with p = 1
    eliminated: Tuple[Tuple[str, float], ...]
    pvalues: Dict[str, float]
    alpha: float
    block_size: int
    reps: int

    def rank(self, model: str) -> int:
        """1 for the last model standing, larger for earlier eliminations"""
        order = [name for name, _ in self.eliminated]
        return len(order) - order.index(model)

    def contains(self, model: str) -> bool:
        return model in self.included


def default_block_size(n: int) -> int:
    return max(1, math.ceil(n ** (1.0 / 3.0)))


def _bootstrap_mean_deviations(losses: np.ndarray, block_size: int, reps: int, seed: int) -> np.ndarray:
    """(reps, k) bootstrap means of each model's loss deviations, recentred on the sample means"""
    deviations = losses - losses.mean(0)
    bs = MovingBlockBootstrap(block_size, np.arange(losses.shape[0]), seed=np.random.default_rng(seed))
    out = np.empty((reps, losses.shape[1]))
    for b, data in enumerate(bs.bootstrap(reps)):
        out[b] = deviations[data[0][0]].mean(0)
    return out


@tags_operation("mcs.mcs")
def mcs(
    losses: LossMatrix,
    alpha: float = DEFAULT_ALPHA,
    block_size: Optional[int] = None,
    reps: int = DEFAULT_REPS,
    seed: int = 0,
) -> McsResult:
    """Eliminate the model with the largest standardized excess mean loss while
    the equal-accuracy hypothesis is rejected at `alpha`.

    The elimination order and p-values do not depend on `alpha`, so a lower
    level can only stop earlier and keep a larger set.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if len(losses.models) < 2:
        raise TooFewModels(f"need at least 2 models, got {len(losses.models)}")
    if losses.n < MIN_ORIGINS:
        raise TooShort(f"need at least {MIN_ORIGINS} origins, got {losses.n}")
    block_size = block_size or default_block_size(losses.n)

    values = losses.values
    boot = _bootstrap_mean_deviations(values, block_size, reps, seed)
    included = np.ones(values.shape[1], dtype=bool)
    eliminated: List[Tuple[str, float]] = []
    running_p = 0.0
    # spreads at rounding level count as exact ties
    tiny = 1e-12 * max(1.0, float(np.abs(values).max()))

    while included.sum() > 1:
        idx = np.flatnonzero(included)
        sub_boot = boot[:, idx] - boot[:, idx].mean(1, keepdims=True)
        sd = np.sqrt((sub_boot ** 2).mean(0))
        excess = values[:, idx].mean(0)
        excess = excess - excess.mean()
        with np.errstate(divide="ignore", invalid="ignore"):
            t_obs = np.where(sd > tiny, excess / sd, 0.0)
            t_boot = np.where(sd > tiny, sub_boot / sd, 0.0)
        statistic = t_obs.max()
        p_value = float(np.mean(t_boot.max(1) >= statistic))
        running_p = max(running_p, p_value)
        if running_p >= alpha:
            break
        worst = idx[int(np.argmax(excess))]
        eliminated.append((losses.models[worst], running_p))
        included[worst] = False

    survivors = [losses.models[i] for i in np.flatnonzero(included)]
    eliminated.extend((name, 1.0) for name in survivors)
    logger.debug(f"MCS at alpha={alpha}: {len(survivors)}/{len(losses.models)} models retained")
    return McsResult(
        included=tuple(survivors),
        eliminated=tuple(eliminated),
        pvalues=dict(eliminated),
        alpha=alpha,
        block_size=block_size,
        reps=reps,
    )
