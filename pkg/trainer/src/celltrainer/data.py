"""Dataset registry: MNIST, CIFAR-10, and a deterministic synthetic set.

MNIST/CIFAR-10 load through torchvision and are downloaded into the
dataset root on first use. The synthetic dataset is generated in-process
(10 classes of noisy per-class patterns) so protocol and training paths
can be exercised without any files or network.
"""

from __future__ import annotations

import os

import torch
from torch.utils.data import TensorDataset

from celltrainer.network import DatasetMeta

DATA_ROOT_ENV = "CELLTRAINER_DATA"

METAS = {
    "mnist": DatasetMeta("mnist", channels=1, classes=10, image_size=28),
    "cifar10": DatasetMeta("cifar10", channels=3, classes=10, image_size=32),
    "synthetic": DatasetMeta("synthetic", channels=1, classes=10, image_size=16),
}


class DatasetUnavailable(RuntimeError):
    pass


def dataset_names() -> list[str]:
    return sorted(METAS)


def default_root() -> str:
    return os.environ.get(DATA_ROOT_ENV, os.path.join(os.path.expanduser("~"), ".celltrainer"))


def _synthetic_split(train: bool) -> TensorDataset:
    meta = METAS["synthetic"]
    per_class = 64 if train else 20
    generator = torch.Generator().manual_seed(1234 if train else 4321)
    patterns = torch.rand(
        (meta.classes, meta.channels, meta.image_size, meta.image_size),
        generator=torch.Generator().manual_seed(99),
    )
    images, labels = [], []
    for cls in range(meta.classes):
        noise = torch.randn(
            (per_class, meta.channels, meta.image_size, meta.image_size),
            generator=generator,
        )
        images.append(patterns[cls].unsqueeze(0) + 0.9 * noise)
        labels.append(torch.full((per_class,), cls, dtype=torch.long))
    return TensorDataset(torch.cat(images), torch.cat(labels))


def load_dataset(name: str, root: str | None = None):
    """Return (train_set, test_set, meta); raises DatasetUnavailable when the
    data cannot be fetched (no cached copy and no network)."""
    if name not in METAS:
        raise DatasetUnavailable(f"unknown dataset {name!r} (have: {dataset_names()})")
    meta = METAS[name]
    if name == "synthetic":
        return _synthetic_split(train=True), _synthetic_split(train=False), meta

    import torchvision
    from torchvision import transforms

    root = root or default_root()
    transform = transforms.ToTensor()
    loader = {
        "mnist": torchvision.datasets.MNIST,
        "cifar10": torchvision.datasets.CIFAR10,
    }[name]
    try:
        train = loader(root, train=True, download=True, transform=transform)
        test = loader(root, train=False, download=True, transform=transform)
    except Exception as exc:
        raise DatasetUnavailable(f"cannot load {name}: {exc}") from exc
    return train, test, meta


def dataset_available(name: str, root: str | None = None) -> bool:
    try:
        load_dataset(name, root)
        return True
    except DatasetUnavailable:
        return False
