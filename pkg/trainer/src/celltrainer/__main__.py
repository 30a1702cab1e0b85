import argparse
import sys

from celltrainer.data import default_root
from celltrainer.server import serve


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="celltrainer",
        description="CNN-training worker speaking the cellnas wire protocol on stdio",
    )
    parser.add_argument(
        "--dataset-root",
        default=default_root(),
        help="cache directory for downloaded datasets ($CELLTRAINER_DATA)",
    )
    parser.add_argument(
        "--parallelism",
        type=int,
        default=1,
        help="concurrent training requests to accept (declared in the handshake)",
    )
    parser.add_argument(
        "--learning-rate",
        type=float,
        default=1e-2,
        help="SGD learning rate for MNIST/synthetic (CIFAR-10 uses Adam at 1e-3)",
    )
    args = parser.parse_args(argv)
    if args.parallelism < 1:
        parser.error("--parallelism must be >= 1")
    return serve(args.dataset_root, args.parallelism, args.learning_rate)


if __name__ == "__main__":
    sys.exit(main())
