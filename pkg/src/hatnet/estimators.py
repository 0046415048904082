"""Scikit-learn style regressors wrapping the block networks.

These cover the supervised function-fitting mode: `fit(X, y)` trains a
block network against the mean-square mismatch on the given points, and
the adaptive variant grows the network where the training residuals
concentrate.  Both follow the usual estimator conventions (constructor
stores hyperparameters verbatim, `fit` validates and learns, fitted
state lives in trailing-underscore attributes), so they compose with
pipelines, `clone`, and cross-validation.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .adaptive import AdaptiveConfig, run_adaptive_on_data
from .network import build_network, count_params, uniform_nodes
from .training import ResidualData, TrainingConfig, train_on_data


def _fit_data(X, y):
    return ResidualData(
        operator="identity",
        x_interior=np.asarray(X, dtype=float),
        f_interior=np.asarray(y, dtype=float),
        x_boundary=np.zeros((0, X.shape[1])),
        g_boundary=np.zeros(0),
    )


def _data_bounds(X):
    # widen degenerate ranges so node spacing stays positive
    lo = X.min(axis=0)
    hi = X.max(axis=0)
    span = np.where(hi - lo > 0, hi - lo, 1.0)
    return [(float(l - 0.05 * s), float(h + 0.05 * s)) for l, h, s in zip(lo, hi, span)]


class HatNetRegressor(RegressorMixin, BaseEstimator):
    """Fixed-architecture block-network regressor.

    Parameters
    ----------
    n_blocks : int or sequence of int
        Hat blocks per input dimension, initialized on a uniform grid
        spanning the training data.
    activation : {"tanh", "relu"}
        Block activation; tanh approximates the hat basis smoothly,
        relu reproduces it exactly.
    hidden_layers : int
        Fully connected layers (width = total block count) between the
        block outputs and the linear output.
    frozen : bool
        Keep block parameters at their nodal initialization and train
        only the downstream layers.
    epochs, lr0, decay_base, decay_every : optimizer schedule.
    random_state : int
        Seed for the subnetwork initialization.
    """

    def __init__(
        self,
        n_blocks=10,
        activation="tanh",
        hidden_layers=0,
        frozen=False,
        epochs=10000,
        lr0=5e-3,
        decay_base=0.9,
        decay_every=2500,
        random_state=0,
    ):
        self.n_blocks = n_blocks
        self.activation = activation
        self.hidden_layers = hidden_layers
        self.frozen = frozen
        self.epochs = epochs
        self.lr0 = lr0
        self.decay_base = decay_base
        self.decay_every = decay_every
        self.random_state = random_state

    def _training_config(self, epochs):
        return TrainingConfig(
            beta=0.0,
            lr0=self.lr0,
            decay_base=self.decay_base,
            decay_every=self.decay_every,
            epochs=epochs,
            seed=self.random_state,
        )

    def _build(self, X):
        d = X.shape[1]
        blocks = self.n_blocks if np.iterable(self.n_blocks) else [self.n_blocks] * d
        if len(list(blocks)) != d:
            raise ValueError("n_blocks must be a scalar or one entry per feature")
        nodes = [
            uniform_nodes(int(b), lo, hi)
            for b, (lo, hi) in zip(blocks, _data_bounds(X))
        ]
        return build_network(
            nodes,
            self.activation,
            self.hidden_layers,
            seed=self.random_state,
            frozen=self.frozen,
        )

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        self.n_features_in_ = X.shape[1]
        net = self._build(X)
        net, trace = train_on_data(net, _fit_data(X, y), self._training_config(self.epochs))
        self.net_ = net
        self.loss_curve_ = list(trace.loss)
        self.n_parameters_ = count_params(net)
        return self

    def predict(self, X):
        check_is_fitted(self, "net_")
        X = check_array(X)
        return self.net_.predict(X)


class AdaptiveHatNetRegressor(HatNetRegressor):
    """Block-network regressor that grows until the training residuals
    meet a tolerance.

    After each training phase the absolute residuals on the training
    points are marked above `gamma` times their maximum, clustered with
    an inclusive Chebyshev eps-neighborhood, and one block per cluster
    and dimension is inserted at the cluster centroids; training then
    resumes.  Stops when the root-mean-square residual reaches
    `eta_tol` or after `max_iters` growth steps.
    """

    def __init__(
        self,
        n_blocks=10,
        activation="tanh",
        hidden_layers=0,
        epochs=2000,
        lr0=5e-3,
        decay_base=0.9,
        decay_every=2500,
        random_state=0,
        eta_tol=1e-3,
        gamma=0.5,
        eps=0.1,
        min_pts=1,
        scale=2.0,
        max_iters=10,
    ):
        super().__init__(
            n_blocks=n_blocks,
            activation=activation,
            hidden_layers=hidden_layers,
            frozen=False,
            epochs=epochs,
            lr0=lr0,
            decay_base=decay_base,
            decay_every=decay_every,
            random_state=random_state,
        )
        self.eta_tol = eta_tol
        self.gamma = gamma
        self.eps = eps
        self.min_pts = min_pts
        self.scale = scale
        self.max_iters = max_iters

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        self.n_features_in_ = X.shape[1]
        data = _fit_data(X, y)
        aconfig = AdaptiveConfig(
            eta_tol=self.eta_tol,
            gamma=self.gamma,
            eps=self.eps,
            min_pts=self.min_pts,
            scale=self.scale,
            max_iters=self.max_iters,
        )
        norm = np.sqrt(np.sum(np.asarray(y, dtype=float) ** 2))

        def training_error(net):
            if norm == 0:
                return float("nan")
            return float(np.sqrt(np.sum((net.predict(X) - y) ** 2)) / norm)

        net, report = run_adaptive_on_data(
            self._build(X), data, self._training_config(self.epochs), aconfig, training_error
        )
        self.net_ = net
        self.report_ = report
        self.n_parameters_ = count_params(net)
        self.loss_curve_ = [x for t in report.traces for x in t.loss]
        return self
