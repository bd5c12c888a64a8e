"""Synthetic 2-D benchmark distributions.

Each generator is class-balanced and deterministic given ``spec.seed``.
Rows are ordered class by class. Blobs, moons and two-ring data come from
``sklearn.datasets``; rings for more than two classes are drawn here the
same way ``make_circles`` draws its two.
"""

import logging

import numpy as np
from sklearn.datasets import make_blobs, make_circles, make_moons

from extractors.dataset import Dataset
from models.config import SyntheticKind, SyntheticSpec
from network.functional import Array, Labels

logger = logging.getLogger(__name__)


class SyntheticExtractor:
    """Draws the point clouds described by a ``SyntheticSpec``."""

    def __init__(self, spec: SyntheticSpec) -> None:
        self.spec = spec

    @property
    def sizes(self) -> list[int]:
        return [self.spec.n_per_class] * self.spec.num_classes

    def gaussian_blobs(self) -> tuple[Array, Labels]:
        """Isotropic clouds around centres spread on a circle of ``radius``."""
        k = self.spec.num_classes
        angles = 2.0 * np.pi * np.arange(k) / k
        centres = self.spec.radius * np.column_stack(
            [np.cos(angles), np.sin(angles)]
        )
        return make_blobs(
            n_samples=self.sizes,
            centers=centres,
            cluster_std=self.spec.noise,
            shuffle=False,
            random_state=self.spec.seed,
        )

    def two_moons(self) -> tuple[Array, Labels]:
        n = self.spec.n_per_class
        return make_moons(
            n_samples=(n, n),
            noise=self.spec.noise,
            shuffle=False,
            random_state=self.spec.seed,
        )

    def concentric_rings(self) -> tuple[Array, Labels]:
        """Class ``c`` lies on the ring of radius ``(K - c) * radius``.

        Class 0 is the outermost ring, as in ``make_circles``; ``noise``
        is in data units whatever the ring spacing.
        """
        k, n = self.spec.num_classes, self.spec.n_per_class
        if k == 2:  # noqa: PLR2004
            outer = 2.0 * self.spec.radius
            points, labels = make_circles(
                n_samples=(n, n),
                noise=self.spec.noise / outer,
                factor=0.5,
                shuffle=False,
                random_state=self.spec.seed,
            )
            return outer * points, labels

        rng = np.random.default_rng(self.spec.seed)
        angles = np.tile(np.linspace(0.0, 2.0 * np.pi, n, endpoint=False), k)
        labels = np.repeat(np.arange(k), n)
        radii = (k - labels) * self.spec.radius
        points = radii[:, None] * np.column_stack(
            [np.cos(angles), np.sin(angles)]
        )
        noise = self.spec.noise * rng.standard_normal(points.shape)
        return points + noise, labels

    def extract(self) -> Dataset:
        draw = {
            SyntheticKind.GAUSSIAN_BLOBS: self.gaussian_blobs,
            SyntheticKind.TWO_MOONS: self.two_moons,
            SyntheticKind.CONCENTRIC_RINGS: self.concentric_rings,
        }[self.spec.kind]
        inputs, labels = draw()
        logger.info(
            "Generated %s: %d points, %d classes",
            self.spec.kind,
            len(labels),
            self.spec.num_classes,
        )
        return Dataset(
            inputs=inputs,
            labels=labels,
            num_classes=self.spec.num_classes,
            name=str(self.spec.kind).lower(),
        )


def generate(spec: SyntheticSpec) -> Dataset:
    return SyntheticExtractor(spec).extract()
