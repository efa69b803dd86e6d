"""2D multi-robot simulation engine for LiDAR-based line-of-sight
connectivity maintenance."""

from ._kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
