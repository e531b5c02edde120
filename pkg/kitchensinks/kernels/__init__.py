from .base import KernelSpec
from .gaussian import GaussianRBF
from .laplacian import Laplacian
