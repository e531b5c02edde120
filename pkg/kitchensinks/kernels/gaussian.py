import numpy as np
from scipy.special import ndtri
from kitchensinks.kernels.base import KernelSpec


class GaussianRBF(KernelSpec):
    """
    Gaussian RBF kernel
    k(x, z) = exp(-|x - z|_2^2 / (2 sigma^2)). Its spectral density is
    Normal(0, sigma^-2 I).
    """

    FAMILY = 'rbf'
    CODE = 0

    def from_delta(self, delta):
        """ Evaluate on differences """
        sq = np.sum(np.square(delta), axis=-1)
        return np.exp(-sq / (2.0 * self.bandwidth ** 2))

    def frequencies(self, uniforms):
        """ Normal(0, sigma^-2) by inverse normal CDF """
        return ndtri(uniforms) / self.bandwidth
