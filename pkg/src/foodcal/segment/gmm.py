"""Color Gaussian mixtures for foreground/background modeling.

Mixtures use full 3x3 covariances over RGB values kept on the 0..255 scale.
Every covariance gets 1e-3 added to its diagonal after estimation, which
keeps the Cholesky factorization defined even for single-color clusters.
Initialization is deterministic: k-means seeded by farthest-point traversal
from the region's mean color, ties always resolving to the lowest pixel
index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

COV_REGULARIZATION = 1e-3
KMEANS_ITERS = 10
_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass
class GaussianMixture:
    """K weighted Gaussians; weights sum to 1 (empty components weigh 0)."""

    weights: np.ndarray  # (K,)
    means: np.ndarray  # (K, 3)
    covs: np.ndarray  # (K, 3, 3)

    @property
    def n_components(self) -> int:
        return self.weights.shape[0]

    def component_log_likelihood(self, colors: np.ndarray) -> np.ndarray:
        """(N, K) array of log(w_k N(z; mu_k, cov_k)); -inf for empty comps."""
        colors = np.atleast_2d(colors).astype(np.float64)
        n, k = colors.shape[0], self.n_components
        out = np.full((n, k), -np.inf)
        for j in range(k):
            if self.weights[j] <= 0.0:
                continue
            chol = np.linalg.cholesky(self.covs[j])
            diff = colors - self.means[j]
            solved = np.linalg.solve(chol, diff.T)
            maha = np.einsum("ij,ij->j", solved, solved)
            logdet = 2.0 * np.log(np.diag(chol)).sum()
            out[:, j] = np.log(self.weights[j]) - 0.5 * (3.0 * _LOG_2PI + logdet + maha)
        return out

    def log_likelihood(self, colors: np.ndarray) -> np.ndarray:
        """(N,) mixture log density log sum_k w_k N_k via log-sum-exp."""
        comp = self.component_log_likelihood(colors)
        peak = comp.max(axis=1)
        # peak is finite whenever any component has weight; guard regardless
        safe = np.where(np.isfinite(peak), peak, 0.0)
        acc = np.exp(comp - safe[:, None]).sum(axis=1)
        return safe + np.log(acc)

    def assign(self, colors: np.ndarray) -> np.ndarray:
        """Most likely component per color; ties pick the lowest index."""
        return np.argmax(self.component_log_likelihood(colors), axis=1).astype(np.int32)


def kmeans_labels(colors: np.ndarray, k: int, iters: int = KMEANS_ITERS) -> np.ndarray:
    """Lloyd's k-means on colors with farthest-point seeding.

    The first center is the color farthest from the region mean; each further
    center maximizes the distance to the chosen set. Duplicate colors can
    starve clusters; downstream GMM fitting handles empty components.
    """
    colors = np.atleast_2d(colors).astype(np.float64)
    n = colors.shape[0]
    k = min(k, max(1, n))

    centers = np.empty((k, colors.shape[1]))
    d2 = ((colors - colors.mean(axis=0)) ** 2).sum(axis=1)
    centers[0] = colors[int(np.argmax(d2))]
    min_d2 = ((colors - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        centers[j] = colors[int(np.argmax(min_d2))]
        np.minimum(min_d2, ((colors - centers[j]) ** 2).sum(axis=1), out=min_d2)

    labels = np.full(n, -1, dtype=np.int32)
    for _ in range(iters):
        dist = ((colors[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = np.argmin(dist, axis=1).astype(np.int32)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(k):
            sel = labels == j
            if sel.any():
                centers[j] = colors[sel].mean(axis=0)
    return labels


def fit_from_assignments(
    colors: np.ndarray, assignments: np.ndarray, n_components: int
) -> tuple[GaussianMixture, np.ndarray]:
    """Re-estimate mixture parameters from hard assignments.

    Empty components are re-seeded at the pixel with the lowest mixture
    likelihood under the remaining (non-empty) components: that pixel moves
    to the empty component, provided its donor component keeps at least one
    pixel. Components that still end up empty keep weight 0. Returns the
    mixture and the (possibly updated) assignment array.
    """
    colors = np.atleast_2d(colors).astype(np.float64)
    assignments = assignments.astype(np.int32).copy()

    counts = np.bincount(assignments, minlength=n_components).astype(np.int64)
    empty = [j for j in range(n_components) if counts[j] == 0]
    for j in empty:
        partial = _mixture_from_stats(colors, assignments, n_components, counts)
        eligible = counts[assignments] >= 2
        if not eligible.any():
            continue
        ll = partial.log_likelihood(colors)
        ll[~eligible] = np.inf
        worst = int(np.argmin(ll))
        counts[assignments[worst]] -= 1
        assignments[worst] = j
        counts[j] += 1

    return _mixture_from_stats(colors, assignments, n_components, counts), assignments


def _mixture_from_stats(
    colors: np.ndarray, assignments: np.ndarray, n_components: int, counts: np.ndarray
) -> GaussianMixture:
    total = counts.sum()
    weights = counts / float(total)
    means = np.zeros((n_components, 3))
    covs = np.zeros((n_components, 3, 3))
    eye = np.eye(3) * COV_REGULARIZATION
    for j in range(n_components):
        if counts[j] == 0:
            covs[j] = eye
            continue
        sel = colors[assignments == j]
        means[j] = sel.mean(axis=0)
        centered = sel - means[j]
        covs[j] = centered.T @ centered / counts[j] + eye
    return GaussianMixture(weights=weights, means=means, covs=covs)


def init_mixture(colors: np.ndarray, n_components: int) -> tuple[GaussianMixture, np.ndarray]:
    """k-means clustering followed by a parameter fit."""
    labels = kmeans_labels(colors, n_components)
    return fit_from_assignments(colors, labels, n_components)
