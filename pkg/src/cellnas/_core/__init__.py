"""Hot-loop kernels: compiled extension when available, pure Python otherwise.

``BACKEND`` names the active implementation ("compiled" or "python"); both
expose the same functions and produce identical results. benchmarks/
bench_surrogate.py compares their throughput.
"""

from cellnas._core.fallback import MASK64

try:
    from cellnas._core._nkcore import nk_affinity, splitmix64

    BACKEND = "compiled"
except ImportError:  # extension not built; use the reference implementation
    from cellnas._core.fallback import nk_affinity, splitmix64

    BACKEND = "python"

__all__ = ["BACKEND", "MASK64", "nk_affinity", "splitmix64"]
