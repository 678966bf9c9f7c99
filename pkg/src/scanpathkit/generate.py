"""Greedy scanpath generation with inhibition-of-return masking.

The generator repeatedly picks the brightest cell of a saliency map and
suppresses a disk around every previously selected cell before each pick.
How strongly an older pick stays suppressed is controlled by the decay
weight: the legacy linear schedule ``1 - 0.1 (n - i - 1)`` (which goes
negative past 12 fixations and is clamped here) or the exponential schedule
``gamma ** (n - i - 1)`` that stays in (0, 1] for any fixation count.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .types import (
    DecayKind,
    Fixation,
    RolloutConfig,
    SaliencyMap,
    Scanpath,
    ValidationError,
)

GridPos = tuple[int, int]  # (row, col) cell indices


def decay_weight(kind: DecayKind, gamma: float, n: int, i: int) -> float:
    """Suppression weight of the i-th previous fixation when predicting the n-th.

    ``i`` is 1-based and indexes an already-selected fixation, so valid
    arguments satisfy 1 <= i <= n-1. The linear schedule may return negative
    values by design (that is its documented flaw); callers clamp before use.
    """
    if not 1 <= i <= n - 1:
        raise ValidationError(f"need 1 <= i <= n-1, got i={i}, n={n}")
    age = n - i - 1
    if kind is DecayKind.BASELINE_LINEAR:
        return 1.0 - 0.1 * age
    if not 0.0 < gamma < 1.0:
        raise ValidationError(f"gamma must lie in (0,1), got {gamma}")
    return gamma**age


@dataclass
class IorState:
    """Selection history plus the current suppressed copy of the map."""

    history: list[GridPos] = field(default_factory=list)
    working_map: np.ndarray | None = None


def apply_ior_mask(
    saliency: SaliencyMap, history: list[GridPos], cfg: RolloutConfig
) -> np.ndarray:
    """Suppress disks around previously selected cells of the *fresh* map.

    For the i-th history entry (1-based, oldest first) every cell within
    Euclidean pixel distance ``mask_radius_frac * image_side`` is multiplied
    by ``1 - clamp(w_i, 0, 1)`` where ``w_i`` is the decay weight for
    predicting fixation ``n = len(history) + 1``. Overlapping disks compose
    multiplicatively; cells outside all disks are untouched.
    """
    values = saliency.values.astype(np.float64, copy=True)
    if not history:
        return values
    n = len(history) + 1
    radius = cfg.mask_radius_frac * cfg.image_side
    rows = np.arange(values.shape[0], dtype=np.float64)[:, None]
    cols = np.arange(values.shape[1], dtype=np.float64)[None, :]
    r2 = radius * radius
    for i, (row, col) in enumerate(history, start=1):
        weight = decay_weight(cfg.decay, cfg.gamma, n, i)
        factor = 1.0 - min(max(weight, 0.0), 1.0)
        disk = (rows - row) ** 2 + (cols - col) ** 2 <= r2
        values[disk] *= factor
    return values


def _argmax_cell(values: np.ndarray) -> GridPos:
    # np.argmax scans row-major, which realises the smallest-row-then-column
    # tie-break exactly.
    flat = int(np.argmax(values))
    return flat // values.shape[1], flat % values.shape[1]


def rollout(saliency: SaliencyMap, cfg: RolloutConfig) -> Scanpath:
    """Generate a scanpath by iterated argmax with inhibition of return.

    Each step rebuilds the suppressed map from the fresh map and the full
    history (weights depend on the current step), selects the global argmax
    cell, and appends its center in normalized coordinates. If suppression
    has zeroed the whole map, selection falls back to the fresh map with
    exact history cells excluded; the run ends early only if even the
    fallback has no cell left to offer.
    """
    state = IorState()
    fresh = saliency.values
    fixations: list[Fixation] = []
    for _ in range(cfg.n_fixations):
        state.working_map = apply_ior_mask(saliency, state.history, cfg)
        if state.working_map.max() > 0:
            pick = _argmax_cell(state.working_map)
        else:
            remaining = fresh.astype(np.float64, copy=True)
            for row, col in state.history:
                remaining[row, col] = -1.0
            if remaining.max() < 0:
                break  # every cell already selected once; nothing left
            pick = _argmax_cell(remaining)
        state.history.append(pick)
        row, col = pick
        fixations.append(
            Fixation((col + 0.5) / saliency.width, (row + 0.5) / saliency.height)
        )
    return Scanpath(tuple(fixations))


class ScanpathPredictor(BaseEstimator):
    """Estimator wrapper around :func:`rollout`.

    Parameters mirror :class:`RolloutConfig`, so the predictor composes with
    ``get_params`` / ``set_params`` / ``clone`` driven parameter sweeps.
    ``decay`` accepts either a :class:`DecayKind` or its string value
    ("linear" / "gamma").

    >>> ScanpathPredictor(gamma=0.5).fit().predict(saliency_map)
    """

    def __init__(
        self,
        n_fixations: int = 10,
        decay: DecayKind | str = DecayKind.EXPONENTIAL_GAMMA,
        gamma: float = 0.1,
        mask_radius_frac: float = 0.1,
        image_side: int = 225,
    ):
        self.n_fixations = n_fixations
        self.decay = decay
        self.gamma = gamma
        self.mask_radius_frac = mask_radius_frac
        self.image_side = image_side

    def _config(self) -> RolloutConfig:
        decay = self.decay if isinstance(self.decay, DecayKind) else DecayKind.parse(self.decay)
        return RolloutConfig(
            n_fixations=self.n_fixations,
            decay=decay,
            gamma=self.gamma,
            mask_radius_frac=self.mask_radius_frac,
            image_side=self.image_side,
        )

    def fit(self, X=None, y=None) -> "ScanpathPredictor":
        """No-op; the generator is parameter-driven, not trained."""
        self._config()  # validate parameters eagerly
        return self

    def predict(self, saliency: SaliencyMap) -> Scanpath:
        return rollout(saliency, self._config())
