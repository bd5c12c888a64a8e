"""Immutable labelled dataset shared by every stage."""

import hashlib
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from errors import InputError
from network.functional import Array, Labels

_HASH_SPACE = float(2**64)


def _read_only(values: npt.ArrayLike, dtype: type) -> npt.NDArray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Dataset:
    """Rows of ``inputs`` with integer ``labels`` in ``[0, num_classes)``.

    ``instance_ids`` stay attached to rows through subsets and splits, so
    random starts and hash splits do not depend on row positions.
    """

    inputs: Array
    labels: Labels
    num_classes: int
    domain_box: tuple[float, float] | None = None
    split: str | None = None
    instance_ids: Labels = field(default_factory=lambda: np.empty(0, int))
    name: str = ""

    def __post_init__(self) -> None:
        inputs = _read_only(self.inputs, np.float64)
        labels = _read_only(self.labels, np.int64)
        if inputs.ndim != 2 or inputs.shape[0] == 0:  # noqa: PLR2004
            msg = (
                "inputs must be a non-empty (n, d) matrix, "
                f"got {inputs.shape}"
            )
            raise InputError(msg)
        if labels.shape != (inputs.shape[0],):
            msg = f"{labels.size} labels for {inputs.shape[0]} inputs"
            raise InputError(msg)
        if not np.all(np.isfinite(inputs)):
            msg = "inputs contain non-finite values"
            raise InputError(msg)
        if np.any(labels < 0) or np.any(labels >= self.num_classes):
            msg = f"labels must lie in [0, {self.num_classes})"
            raise InputError(msg)
        ids = (
            np.arange(inputs.shape[0])
            if np.size(self.instance_ids) == 0
            else self.instance_ids
        )
        ids = _read_only(ids, np.int64)
        if ids.shape != labels.shape:
            msg = f"{ids.size} instance ids for {labels.size} rows"
            raise InputError(msg)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "instance_ids", ids)

    def __len__(self) -> int:
        return int(self.inputs.shape[0])

    @property
    def num_features(self) -> int:
        return int(self.inputs.shape[1])

    def subset(
        self, indices: npt.ArrayLike, split: str | None = None
    ) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(
            inputs=self.inputs[idx],
            labels=self.labels[idx],
            num_classes=self.num_classes,
            domain_box=self.domain_box,
            split=split if split is not None else self.split,
            instance_ids=self.instance_ids[idx],
            name=self.name,
        )


def _hash_unit(seed: int, instance_id: int) -> float:
    digest = hashlib.blake2b(
        f"{seed}:{instance_id}".encode(), digest_size=8
    ).digest()
    return int.from_bytes(digest, "big") / _HASH_SPACE


def split_train_test(
    dataset: Dataset, seed: int = 0, test_fraction: float = 0.2
) -> tuple[Dataset, Dataset]:
    """Deterministic split by hashing ``(seed, instance_id)``.

    Raises:
        InputError: If the fraction is outside (0, 1) or a side is empty.
    """
    if not 0.0 < test_fraction < 1.0:
        msg = f"test_fraction must lie in (0, 1), got {test_fraction}"
        raise InputError(msg)
    is_test = np.array(
        [
            _hash_unit(seed, int(i)) < test_fraction
            for i in dataset.instance_ids
        ]
    )
    if is_test.all() or not is_test.any():
        msg = f"split of {len(dataset)} rows left one side empty"
        raise InputError(msg)
    train = dataset.subset(np.flatnonzero(~is_test), split="train")
    test = dataset.subset(np.flatnonzero(is_test), split="test")
    return train, test
