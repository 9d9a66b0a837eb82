"""The running portfolio example: generative model and pricing functionals.

Covariates (X1, X2, D) are centered Gaussian with unit variances,
Cov(X1, X2) = 0 and Cov(Xi, D) = rho_i; the response is
Y | (X, D) ~ N(X1, 1 + X2^2), so the protected coordinate D carries no
information about Y beyond X.  All pricing functionals for this model
have closed forms (the conditional mean is X1), so prices are computed
exactly rather than fitted.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, NotPositiveDefinite
from .gaussian import GaussianDistribution, make_gaussian, sample
from .streams import standard_normals

FLOAT_FMT = "%.17g"

_COVARIATE_STREAM = 0
_RESPONSE_STREAM = 1  # separate sub-stream: adding columns never perturbs others


@dataclass(frozen=True)
class PortfolioModel:
    """Gaussian covariates plus the heteroskedastic response law."""

    covariates: GaussianDistribution
    rho1: float
    rho2: float

    def response_mean(self, x1, x2):
        return np.asarray(x1, dtype=np.float64)

    def response_var(self, x1, x2):
        return 1.0 + np.asarray(x2, dtype=np.float64) ** 2


@dataclass(frozen=True)
class SimulatedDataset:
    """Columnar draws of (x1, x2, d, y) with their generating seed."""

    x1: np.ndarray
    x2: np.ndarray
    d: np.ndarray
    y: np.ndarray
    seed: int
    rho1: float
    rho2: float

    def __post_init__(self):
        n = self.x1.shape[0]
        for name in ("x2", "d", "y"):
            if getattr(self, name).shape[0] != n:
                raise DimensionMismatch("dataset columns have unequal lengths")
        if n < 1:
            raise ValueError("dataset must hold at least one row")
        if not 1.0 - self.rho1**2 - self.rho2**2 > 0.0:
            raise NotPositiveDefinite("stored (rho1, rho2) are invalid")

    @property
    def n(self) -> int:
        return self.x1.shape[0]


def make_example_model(rho1: float, rho2: float) -> PortfolioModel:
    """The portfolio model with Sigma = [[1,0,r1],[0,1,r2],[r1,r2,1]].

    Raises NotPositiveDefinite when 1 - rho1^2 - rho2^2 <= 0.
    """
    cov = [[1.0, 0.0, rho1], [0.0, 1.0, rho2], [rho1, rho2, 1.0]]
    dist = make_gaussian(np.zeros(3), cov)
    return PortfolioModel(covariates=dist, rho1=float(rho1), rho2=float(rho2))


def simulate(model: PortfolioModel, n: int, seed: int) -> SimulatedDataset:
    """n i.i.d. draws of (x1, x2, d, y), deterministic in (model, n, seed)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    x = sample(model.covariates, n, seed, stream=_COVARIATE_STREAM)
    z = standard_normals(n, seed, stream=_RESPONSE_STREAM)
    y = x[:, 0] + np.sqrt(1.0 + x[:, 1] ** 2) * z
    return SimulatedDataset(x1=x[:, 0], x2=x[:, 1], d=x[:, 2], y=y,
                            seed=seed, rho1=model.rho1, rho2=model.rho2)


KINDS = ("best_estimate", "unawareness", "discrimination_free", "null", "subset")


@dataclass(frozen=True)
class PricingFunctional:
    """A pricing rule for the example model, with its closed form.

    For the running example the conditional mean of Y is X1, so
    best_estimate, unawareness and discrimination_free all evaluate to
    x1; the null price is E[Y] = 0; subset prices are E[Y | selected
    covariates], i.e. x1 when X1 is selected and 0 otherwise (X1 and
    X2 are independent).  Every kind except best_estimate ignores d.
    """

    kind: str
    subset_indices: frozenset = frozenset()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown functional kind {self.kind!r}")
        if self.kind == "subset":
            if not self.subset_indices or not self.subset_indices <= {0, 1}:
                raise ValueError("subset indices must be a nonempty subset of {0, 1}")

    def evaluate(self, x1, x2, d):
        """Vectorized price; broadcasts over numpy inputs."""
        x1 = np.asarray(x1, dtype=np.float64)
        if self.kind in ("best_estimate", "unawareness", "discrimination_free"):
            return x1 + 0.0
        if self.kind == "null":
            return np.zeros_like(x1)
        if 0 in self.subset_indices:
            return x1 + 0.0
        return np.zeros_like(x1)

    @property
    def uses_x1(self) -> bool:
        if self.kind == "null":
            return False
        if self.kind == "subset":
            return 0 in self.subset_indices
        return True


def make_functional(kind: str, subset_indices=None) -> PricingFunctional:
    return PricingFunctional(kind=kind,
                             subset_indices=frozenset(subset_indices or ()))


def price(functional: PricingFunctional, x1: float, x2: float, d: float) -> float:
    """Scalar price at a covariate record."""
    return float(functional.evaluate(x1, x2, d))


def discrimination_free_price_general(best_estimate, d_marginal_samples):
    """Average a best-estimate price over marginal draws of D.

    best_estimate(x, d) must broadcast over a vector of d values; the
    returned callable maps x to the sample average of best_estimate(x, d)
    over the provided marginal draws (not the conditional law of D
    given x, which is what removes the proxy-inference channel).
    """
    d_samples = np.asarray(d_marginal_samples, dtype=np.float64)
    if d_samples.size == 0:
        raise ValueError("d_marginal_samples must be nonempty")

    def averaged(x):
        return float(np.mean(best_estimate(x, d_samples)))

    return averaged


def write_csv(dataset: SimulatedDataset, path) -> None:
    """CSV with header x1,x2,d,y plus a {path}.meta.json sidecar."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x1", "x2", "d", "y"])
        for row in zip(dataset.x1, dataset.x2, dataset.d, dataset.y):
            writer.writerow([FLOAT_FMT % v for v in row])
    meta = {"n": dataset.n, "seed": dataset.seed,
            "rho1": dataset.rho1, "rho2": dataset.rho2}
    Path(str(path) + ".meta.json").write_text(json.dumps(meta) + "\n")


def read_csv(path) -> SimulatedDataset:
    """Inverse of write_csv."""
    path = Path(path)
    data = np.genfromtxt(path, delimiter=",", names=True)
    meta = json.loads(Path(str(path) + ".meta.json").read_text())
    cols = {name: np.atleast_1d(data[name]) for name in ("x1", "x2", "d", "y")}
    return SimulatedDataset(seed=int(meta["seed"]), rho1=float(meta["rho1"]),
                            rho2=float(meta["rho2"]), **cols)
