"""Training and scoring of realized networks.

Optimizers follow the per-dataset reference settings: SGD with momentum
0.9 for MNIST (learning rate configurable, default 1e-2), Adam with
lr 1e-3, betas (0.9, 0.999), eps 1e-8, weight decay 1e-6 for CIFAR-10.
Batch size 16, cross-entropy loss. The budget picks a seeded random
fraction of the training split and the epoch count; the returned affinity
is plain test-set accuracy.
"""

from __future__ import annotations

import torch
from torch import nn
from torch.utils.data import DataLoader, Subset

BATCH_SIZE = 16


def make_optimizer(network: nn.Module, dataset: str, learning_rate: float):
    if dataset == "cifar10":
        return torch.optim.Adam(
            network.parameters(),
            lr=1e-3,
            betas=(0.9, 0.999),
            eps=1e-8,
            weight_decay=1e-6,
        )
    # mnist and synthetic
    return torch.optim.SGD(network.parameters(), lr=learning_rate, momentum=0.9)


def training_subset(train_set, fraction: float, seed: int):
    if fraction >= 1.0:
        return train_set
    n = len(train_set)
    count = max(1, int(fraction * n))
    generator = torch.Generator().manual_seed(seed)
    indices = torch.randperm(n, generator=generator)[:count].tolist()
    return Subset(train_set, indices)


@torch.no_grad()
def evaluate_accuracy(network: nn.Module, test_set) -> float:
    network.eval()
    loader = DataLoader(test_set, batch_size=256)
    correct = total = 0
    for images, labels in loader:
        predictions = network(images).argmax(dim=1)
        correct += int((predictions == labels).sum())
        total += labels.numel()
    return correct / total


def train_and_score(
    network: nn.Module,
    train_set,
    test_set,
    *,
    dataset: str,
    train_fraction: float = 1.0,
    epochs: int = 1,
    seed: int = 0,
    learning_rate: float = 1e-2,
) -> tuple[float, dict]:
    """Train on a fraction of the training split; return (accuracy, metrics)."""
    torch.manual_seed(seed)
    subset = training_subset(train_set, train_fraction, seed)
    generator = torch.Generator().manual_seed(seed)
    loader = DataLoader(subset, batch_size=BATCH_SIZE, shuffle=True, generator=generator)
    optimizer = make_optimizer(network, dataset, learning_rate)
    loss_fn = nn.CrossEntropyLoss()

    network.train()
    running_loss, batches = 0.0, 0
    for _ in range(epochs):
        for images, labels in loader:
            optimizer.zero_grad()
            loss = loss_fn(network(images), labels)
            loss.backward()
            optimizer.step()
            running_loss += loss.item()
            batches += 1

    accuracy = evaluate_accuracy(network, test_set)
    metrics = {
        "train_examples": len(subset),
        "epochs": epochs,
        "mean_loss": running_loss / max(1, batches),
        "test_accuracy": accuracy,
    }
    return accuracy, metrics
