from tests.base import BaseTestCase
from nose.plugins.attrib import attr

import numpy as np
from kitchensinks.kernels import KernelSpec, GaussianRBF, Laplacian
from kitchensinks.default_kernels import kernel_spec, kernel_by_code
from kitchensinks import exceptions as x


class NoFamily(KernelSpec):
    def from_delta(self, delta):
        return delta

    def frequencies(self, uniforms):
        return uniforms


@attr('kernel')
class KernelTest(BaseTestCase):

    def test_printable_repr(self):
        """ Getting printable representation of a kernel """
        self.assertIn('<GaussianRBF sigma=[2.0]>', repr(GaussianRBF(2)))

    def test_kernel_must_define_family(self):
        """ Kernels must define family name and code """
        with self.assertRaises(x.ConfigurationException) as cm:
            NoFamily(1.0)
        self.assertIn('Kernel family undefined', str(cm.exception))

    def test_bandwidth_must_be_positive(self):
        """ Non-positive or non-finite bandwidth is rejected """
        for bad in (0, -1.0, np.inf, np.nan, 'wide'):
            with self.assertRaises(x.ConfigurationException):
                GaussianRBF(bad)

    def test_kernels_compare_by_family_and_bandwidth(self):
        """ Kernels with same family and bandwidth are equal """
        self.assertEqual(GaussianRBF(1.5), GaussianRBF(1.5))
        self.assertNotEqual(GaussianRBF(1.5), Laplacian(1.5))
        self.assertNotEqual(GaussianRBF(1.5), GaussianRBF(2.0))
        self.assertEqual(1, len({GaussianRBF(1.5), GaussianRBF(1.5)}))

    def test_gaussian_at_zero_distance(self):
        """ Gaussian kernel of a point with itself is one """
        k = GaussianRBF(1.0).exact([0.3, -1.2], [0.3, -1.2])
        self.assertEqual(1.0, k)

    def test_gaussian_closed_form(self):
        """ Gaussian kernel at distance 2 with unit bandwidth """
        k = GaussianRBF(1.0).exact([0.0], [2.0])
        self.assertAlmostEqual(np.exp(-2.0), k, places=15)

    def test_laplacian_closed_form(self):
        """ Laplacian kernel uses L1 distance """
        k = Laplacian(1.0).exact([0.0, 0.0], [1.0, 1.0])
        self.assertAlmostEqual(np.exp(-2.0), k, places=15)

    def test_exact_broadcasts_over_stacks(self):
        """ Exact kernel broadcasts over stacks of vectors """
        rows = self.rng().standard_normal((4, 3))
        values = GaussianRBF(1.0).exact(rows[0], rows)
        self.assertEqual((4,), values.shape)
        self.assertEqual(1.0, values[0])

    def test_gaussian_sampler_is_inverse_normal_cdf(self):
        """ Gaussian sampler maps the median to zero, scaled by 1/sigma """
        kernel = GaussianRBF(2.0)
        w = kernel.frequencies(np.array([0.5, 0.8413447460685429]))
        self.assertEqual(0.0, w[0])
        self.assertAlmostEqual(0.5, w[1], places=9)

    def test_laplacian_sampler_is_inverse_cauchy_cdf(self):
        """ Laplacian sampler maps quartiles to +-1/sigma """
        w = Laplacian(2.0).frequencies(np.array([0.25, 0.5, 0.75]))
        self.assertAlmostEqual(-0.5, w[0], places=12)
        self.assertEqual(0.0, w[1])
        self.assertAlmostEqual(0.5, w[2], places=12)


@attr('kernel', 'registry')
class KernelRegistryTest(BaseTestCase):

    def test_instantiate_by_family_name(self):
        """ Instantiating kernels by family name and alias """
        self.assertIsInstance(kernel_spec('rbf', 1.0), GaussianRBF)
        self.assertIsInstance(kernel_spec('Gaussian', 1.0), GaussianRBF)
        self.assertIsInstance(kernel_spec(' laplacian ', 1.0), Laplacian)
        self.assertEqual(3.0, kernel_spec('lap', 3.0).bandwidth)

    def test_raise_on_unknown_family(self):
        """ Unknown kernel family is a configuration error """
        with self.assertRaises(x.ConfigurationException) as cm:
            kernel_spec('polynomial', 1.0)
        self.assertIn('Unknown kernel family', str(cm.exception))

    def test_raise_on_registry_entry_that_is_not_a_kernel(self):
        """ Registry entries must be kernel classes """
        with self.assertRaises(x.ConfigurationException) as cm:
            kernel_spec('bad', 1.0, kernels=dict(bad=dict))
        self.assertIn('has to be a KernelSpec class', str(cm.exception))

    def test_custom_registry(self):
        """ Custom registries can be passed in """
        spec = kernel_spec('l1', 2.0, kernels=dict(l1=Laplacian))
        self.assertEqual(Laplacian(2.0), spec)

    def test_kernel_by_code(self):
        """ Binary family codes map back to kernels """
        self.assertEqual(GaussianRBF(1.0), kernel_by_code(0, 1.0))
        self.assertEqual(Laplacian(1.0), kernel_by_code(1, 1.0))
        with self.assertRaises(x.UnsupportedVersion):
            kernel_by_code(7, 1.0)
