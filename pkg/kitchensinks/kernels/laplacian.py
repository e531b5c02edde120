import numpy as np
from kitchensinks.kernels.base import KernelSpec


class Laplacian(KernelSpec):
    """
    Laplacian kernel
    k(x, z) = exp(-|x - z|_1 / sigma). The spectral density factorizes into
    independent Cauchy distributions with location 0 and scale 1/sigma.
    """

    FAMILY = 'laplacian'
    CODE = 1

    def from_delta(self, delta):
        """ Evaluate on differences """
        l1 = np.sum(np.abs(delta), axis=-1)
        return np.exp(-l1 / self.bandwidth)

    def frequencies(self, uniforms):
        """ Cauchy(0, 1/sigma) by inverse CDF """
        return np.tan(np.pi * (uniforms - 0.5)) / self.bandwidth
