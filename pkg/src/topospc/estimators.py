"""Scikit-learn style wrappers around the diagram and charting pipeline.

RipsDiagram is a transformer turning point clouds into persistence
diagrams; PersistenceChart is fitted on Phase I clouds (or precomputed
diagrams) and scores new parts by their permutation-test p-values, with
the usual outlier conventions (predict: +1 in-control, -1 signal).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, OutlierMixin, TransformerMixin

from .errors import ValidationError
from .filtration import DEFAULT_SIMPLEX_BUDGET, build_rips
from .geometry import PointCloud, pairwise_distances
from .inference import build_reference, permutation_test
from .persistence import PersistenceDiagram, persistence
from .spc import ChartConfig, build_phase1, compute_diagram

__all__ = ["RipsDiagram", "PersistenceChart"]


def _as_cloud(x) -> PointCloud:
    if isinstance(x, PointCloud):
        return x
    return PointCloud(np.asarray(x, dtype=np.float64))


class RipsDiagram(TransformerMixin, BaseEstimator):
    """Transform point clouds into persistence diagrams.

    Parameters
    ----------
    max_dimension : largest simplex dimension in the filtration; features
        are reported for dimensions below it.
    max_diameter : filtration cap; None gives a full filtration for small
        clouds and raises for large ones.
    simplex_budget : hard limit on the number of enumerated simplices.
    """

    def __init__(self, max_dimension=2, max_diameter=None,
                 simplex_budget=DEFAULT_SIMPLEX_BUDGET):
        self.max_dimension = max_dimension
        self.max_diameter = max_diameter
        self.simplex_budget = simplex_budget

    def fit(self, X, y=None):
        if self.max_dimension < 0:
            raise ValidationError(f"max_dimension must be >= 0, got {self.max_dimension}")
        return self

    def transform(self, X) -> list[PersistenceDiagram]:
        """X: iterable of (n_i, 3) arrays or PointClouds."""
        self.fit(X)
        out = []
        for x in X:
            dm = pairwise_distances(_as_cloud(x))
            f = build_rips(dm, self.max_dimension, self.max_diameter, self.simplex_budget)
            out.append(persistence(f))
        return out


class PersistenceChart(OutlierMixin, BaseEstimator):
    """Permutation-test control chart over persistence diagrams.

    fit() takes the Phase I sample (point clouds or diagrams) and caches
    the in-group pairwise distances per monitored dimension. score_samples
    returns the smallest p-value across monitored dimensions, so
    predict(X) == -1 flags parts whose p-value falls at or below alpha in
    any monitored dimension.
    """

    def __init__(self, alpha=0.05, dims=(0, 1), distance="duration",
                 max_diameter=None, simplex_budget=DEFAULT_SIMPLEX_BUDGET,
                 wasserstein_p=2.0, wasserstein_ground="linf"):
        self.alpha = alpha
        self.dims = dims
        self.distance = distance
        self.max_diameter = max_diameter
        self.simplex_budget = simplex_budget
        self.wasserstein_p = wasserstein_p
        self.wasserstein_ground = wasserstein_ground

    def _chart_config(self, m0: int) -> ChartConfig:
        return ChartConfig(
            alpha=self.alpha,
            m0=m0,
            dims=tuple(self.dims),
            distance=self.distance,
            max_diameter=self.max_diameter,
            simplex_budget=self.simplex_budget,
            wasserstein_p=self.wasserstein_p,
            wasserstein_ground=self.wasserstein_ground,
        )

    def fit(self, X, y=None):
        """X: Phase I point clouds (or precomputed diagrams)."""
        X = list(X)
        if len(X) < 2:
            raise ValidationError(f"need at least 2 Phase I parts, got {len(X)}")
        cfg = self._chart_config(len(X))
        if X and isinstance(X[0], PersistenceDiagram):
            diagrams = X
            refs = {
                dim: build_reference(diagrams, dim, cfg.distance,
                                     wasserstein_p=cfg.wasserstein_p,
                                     wasserstein_ground=cfg.wasserstein_ground)
                for dim in cfg.dims
            }
        else:
            refs = build_phase1([_as_cloud(x) for x in X], cfg)
        self.config_ = cfg
        self.reference_sets_ = refs
        self.m0_ = len(X)
        self.observed_stats_ = {dim: refs[dim].intra_total for dim in cfg.dims}
        return self

    def _diagram(self, x) -> PersistenceDiagram:
        if isinstance(x, PersistenceDiagram):
            return x
        return compute_diagram(_as_cloud(x), self.config_)

    def p_values(self, X) -> np.ndarray:
        """(n_parts, n_dims) permutation p-values, columns ordered by dims."""
        self._check_fitted()
        rows = []
        for x in X:
            d = self._diagram(x)
            rows.append([
                permutation_test(self.reference_sets_[dim], d, self.alpha).p_value
                for dim in self.config_.dims
            ])
        return np.asarray(rows)

    def score_samples(self, X) -> np.ndarray:
        """Smallest p-value across monitored dimensions, one per part."""
        return self.p_values(X).min(axis=1)

    def decision_function(self, X) -> np.ndarray:
        return self.score_samples(X) - self.alpha

    def predict(self, X) -> np.ndarray:
        """+1 for in-control parts, -1 where the chart signals."""
        return np.where(self.score_samples(X) <= self.alpha, -1, 1)

    def _check_fitted(self):
        if not hasattr(self, "reference_sets_"):
            raise ValidationError("PersistenceChart must be fitted before scoring")
