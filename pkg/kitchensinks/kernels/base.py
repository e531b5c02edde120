import abc
import numpy as np
from kitchensinks import exceptions as x


class KernelSpec(metaclass=abc.ABCMeta):
    """
    Kernel specification
    A shift-invariant kernel family together with its bandwidth. Concrete
    families provide the exact kernel value and the inverse CDF of their
    spectral density, so a single stream of uniform variates can drive the
    sampling of random projections for every family.
    """

    # define family name and binary code in your concrete implementation
    FAMILY = None
    CODE = None

    # kernel bandwidth
    bandwidth = None

    def __init__(self, bandwidth):
        """
        Initializes the kernel and validates bandwidth
        :param bandwidth: float, positive kernel width sigma
        """
        if not self.FAMILY or self.CODE is None:
            msg = 'Kernel family undefined for [{}]'
            raise x.ConfigurationException(msg.format(self.__class__))

        try:
            bandwidth = float(bandwidth)
        except (TypeError, ValueError):
            msg = 'Kernel bandwidth must be a number, got [{}]'
            raise x.ConfigurationException(msg.format(bandwidth))

        if not np.isfinite(bandwidth) or bandwidth <= 0:
            msg = 'Kernel bandwidth must be positive, got [{}]'
            raise x.ConfigurationException(msg.format(bandwidth))

        self.bandwidth = bandwidth

    def __repr__(self):
        """ Returns printable representation of a kernel """
        return '<{} sigma=[{!r}]>'.format(self.__class__.__name__,
                                         self.bandwidth)

    def __eq__(self, other):
        if not isinstance(other, KernelSpec):
            return NotImplemented
        return self.FAMILY == other.FAMILY \
            and self.bandwidth == other.bandwidth

    def __hash__(self):
        return hash((self.FAMILY, self.bandwidth))

    @property
    def family(self):
        """ Family name, as used on the command line """
        return self.FAMILY

    def exact(self, x1, x2):
        """
        Exact kernel
        Evaluates the kernel between points in 64-bit. Accepts single
        vectors or broadcastable stacks of vectors along the last axis.

        :param x1: array-like, first point(s)
        :param x2: array-like, second point(s)
        :return: float or np.ndarray
        """
        delta = np.asarray(x1, dtype=np.float64) \
            - np.asarray(x2, dtype=np.float64)
        return self.from_delta(delta)

    @abc.abstractmethod
    def from_delta(self, delta):
        """
        Evaluate kernel on differences x - z along the last axis
        :param delta: np.ndarray, float64
        :return: np.ndarray or float
        """
        raise NotImplementedError('Implement me in your concrete kernel')

    @abc.abstractmethod
    def frequencies(self, uniforms):
        """
        Spectral sampler
        Maps uniform variates in (0, 1) to frequencies distributed by the
        kernel's spectral density (Bochner), via the inverse CDF.

        :param uniforms: np.ndarray, float64 in the open unit interval
        :return: np.ndarray, float64 of the same shape
        """
        raise NotImplementedError('Implement me in your concrete kernel')
