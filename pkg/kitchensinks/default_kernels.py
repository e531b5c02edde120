from inspect import isclass
from kitchensinks import exceptions as x
from .kernels import KernelSpec
from .kernels import GaussianRBF
from .kernels import Laplacian

default_kernels = dict(

    # name aliases accepted on the command line
    rbf=GaussianRBF,
    gaussian=GaussianRBF,
    laplacian=Laplacian,
    lap=Laplacian,
)


def kernel_spec(family, bandwidth, kernels=None):
    """
    Kernel spec
    Instantiates a kernel by family name.

    :param family: str, family name or alias
    :param bandwidth: float, kernel width
    :param kernels: dict, optional registry to use instead of defaults
    :return: kitchensinks.kernels.KernelSpec
    """
    kernels = kernels if kernels else default_kernels
    name = str(family).strip().lower()
    if name not in kernels:
        msg = 'Unknown kernel family [{}], expected one of {}'
        raise x.ConfigurationException(msg.format(family, sorted(kernels)))

    kernel = kernels[name]
    if not isclass(kernel) or not issubclass(kernel, KernelSpec):
        msg = 'Kernel {} has to be a KernelSpec class, got [{}]'
        raise x.ConfigurationException(msg.format(name, type(kernel)))

    return kernel(bandwidth)


def kernel_by_code(code, bandwidth):
    """
    Kernel by code
    Instantiates a kernel from its binary family code.
    :param code: int, family code as stored in files
    :param bandwidth: float, kernel width
    :return: kitchensinks.kernels.KernelSpec
    """
    for kernel in (GaussianRBF, Laplacian):
        if kernel.CODE == code:
            return kernel(bandwidth)
    raise x.UnsupportedVersion('Unknown kernel family code [{}]'.format(code))
