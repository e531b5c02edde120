from tests.base import BaseTestCase
from nose.plugins.attrib import attr

import os
import struct
import numpy as np
from kitchensinks import data
from kitchensinks.data import FrameDataset, SynthKind
from kitchensinks import exceptions as x


def small_dataset(num=10, dim=3, classes=4, seed=0):
    rng = np.random.Generator(np.random.Philox(seed))
    features = rng.standard_normal((num, dim))
    labels = rng.integers(0, classes, num)
    return FrameDataset(features, labels, classes)


@attr('data')
class FrameDatasetTest(BaseTestCase):

    def test_printable_repr(self):
        """ Getting printable representation of a dataset """
        self.assertIn('<FrameDataset N=[10] d=[3] C=[4]>',
                      repr(small_dataset()))

    def test_features_are_stored_in_32_bit(self):
        """ Features are converted to 32-bit """
        dataset = small_dataset()
        self.assertEqual(np.float32, dataset.features.dtype)
        self.assertEqual(10, len(dataset))

    def test_raise_on_label_out_of_range(self):
        """ Labels must be within 0..C-1 """
        with self.assertRaises(x.LabelOutOfRange):
            FrameDataset(np.zeros((2, 2)), [0, 4], 4)

    def test_raise_on_length_mismatch(self):
        """ Features and labels must have the same length """
        with self.assertRaises(x.DimensionMismatch):
            FrameDataset(np.zeros((3, 2)), [0, 1], 2)

    def test_require_frames(self):
        """ Empty datasets are rejected where frames are needed """
        empty = FrameDataset(np.zeros((0, 2)), np.zeros(0, int), 2)
        with self.assertRaises(x.EmptyDataset) as cm:
            empty.require_frames()
        self.assertIn('empty dataset', str(cm.exception))

    def test_subset(self):
        """ Subsets keep order and class count """
        dataset = small_dataset()
        subset = dataset.subset([3, 1])
        self.assertArrayEqual(dataset.features[[3, 1]], subset.features)
        self.assertEqual(4, subset.num_classes)


@attr('data', 'io')
class DatasetFilesTest(BaseTestCase):

    def test_binary_round_trip(self):
        """ Write then load reproduces features bit-exactly """
        dataset = small_dataset(num=50, dim=7)
        path = os.path.join(self.tmp, 'frames.frds')
        data.save_dataset(dataset, path)
        loaded = data.load_dataset(path)
        self.assertArrayEqual(dataset.features, loaded.features)
        self.assertArrayEqual(dataset.labels, loaded.labels)
        self.assertEqual(4, loaded.num_classes)

    def test_labels_are_one_based_on_disk(self):
        """ Labels are written 1-based """
        dataset = FrameDataset(np.zeros((2, 1)), [0, 1], 2)
        path = os.path.join(self.tmp, 'frames.frds')
        data.save_dataset(dataset, path)
        with open(path, 'rb') as file:
            content = file.read()
        self.assertEqual(b'FRDS', content[:4])
        self.assertEqual((1, 2), struct.unpack('<II', content[-8:]))

    def test_raise_on_empty_file(self):
        """ A file with no frames is an empty dataset """
        empty = FrameDataset(np.zeros((0, 2)), np.zeros(0, int), 2)
        path = os.path.join(self.tmp, 'empty.frds')
        data.save_dataset(empty, path)
        with self.assertRaises(x.EmptyDataset) as cm:
            data.load_dataset(path)
        self.assertIn('empty dataset', str(cm.exception))

    def test_raise_on_bad_magic(self):
        """ Wrong magic is rejected """
        path = os.path.join(self.tmp, 'bad.frds')
        with open(path, 'wb') as file:
            file.write(b'JUNK' + bytes(40))
        with self.assertRaises(x.BadMagic):
            data.load_dataset(path)

    def test_raise_on_unknown_version(self):
        """ Unknown versions are rejected """
        path = os.path.join(self.tmp, 'v9.frds')
        with open(path, 'wb') as file:
            file.write(struct.pack('<4sIQII', b'FRDS', 9, 1, 1, 2))
            file.write(bytes(8))
        with self.assertRaises(x.UnsupportedVersion):
            data.load_dataset(path)

    def test_raise_on_truncated_file(self):
        """ Files shorter than the header promises are rejected """
        dataset = small_dataset()
        path = os.path.join(self.tmp, 'cut.frds')
        data.save_dataset(dataset, path)
        with open(path, 'rb') as file:
            content = file.read()
        with open(path, 'wb') as file:
            file.write(content[:-3])
        with self.assertRaises(x.TruncatedFile):
            data.load_dataset(path)

    def test_raise_on_label_out_of_range_in_file(self):
        """ Out of range labels in files name the row """
        path = os.path.join(self.tmp, 'labels.frds')
        with open(path, 'wb') as file:
            file.write(struct.pack('<4sIQII', b'FRDS', 1, 2, 1, 2))
            file.write(np.zeros(2, '<f4').tobytes())
            file.write(np.array([1, 3], '<u4').tobytes())
        with self.assertRaises(x.LabelOutOfRange) as cm:
            data.load_dataset(path)
        self.assertEqual(1, cm.exception.row)

    def test_raise_on_missing_file(self):
        """ Missing files are data errors """
        with self.assertRaises(x.DataError):
            data.load_dataset(os.path.join(self.tmp, 'nope.frds'))

    def test_csv_round_trip(self):
        """ CSV keeps 32-bit features exactly """
        dataset = small_dataset(num=20)
        path = os.path.join(self.tmp, 'frames.csv')
        data.save_csv(dataset, path)
        loaded = data.load_dataset(path, num_classes=4)
        self.assertArrayEqual(dataset.features, loaded.features)
        self.assertArrayEqual(dataset.labels, loaded.labels)

    def test_csv_label_out_of_range_names_the_line(self):
        """ CSV label C+1 is a range error naming the line """
        path = os.path.join(self.tmp, 'frames.csv')
        with open(path, 'w') as file:
            file.write('f0,f1,label\n0.5,1.0,1\n0.0,2.0,4\n')
        with self.assertRaises(x.LabelOutOfRange) as cm:
            data.load_dataset(path, num_classes=3)
        self.assertIn('line 3', str(cm.exception))
        self.assertEqual(1, cm.exception.row)

    def test_csv_without_class_count_uses_largest_label(self):
        """ CSV class count defaults to the largest label """
        path = os.path.join(self.tmp, 'frames.csv')
        with open(path, 'w') as file:
            file.write('x,label\n0.5,1\n1.5,3\n')
        dataset = data.load_dataset(path)
        self.assertEqual(3, dataset.num_classes)
        self.assertArrayEqual(np.array([0, 2]), dataset.labels)

    def test_csv_requires_header(self):
        """ CSV without a header row is rejected """
        path = os.path.join(self.tmp, 'frames.csv')
        with open(path, 'w') as file:
            file.write('0.5,1\n1.5,2\n')
        with self.assertRaises(x.DataError) as cm:
            data.load_dataset(path)
        self.assertIn('header', str(cm.exception))

    def test_csv_with_header_only_is_empty(self):
        """ CSV header without frames is an empty dataset """
        path = os.path.join(self.tmp, 'frames.csv')
        with open(path, 'w') as file:
            file.write('f0,label\n')
        with self.assertRaises(x.EmptyDataset):
            data.load_dataset(path)


@attr('data', 'split')
class SplitHeldoutTest(BaseTestCase):

    def test_split_sizes(self):
        """ Ten frames with fraction 0.1 split 9/1 """
        train, heldout = data.split_heldout(small_dataset(), 0.1, 0)
        self.assertEqual(9, train.num_frames)
        self.assertEqual(1, heldout.num_frames)

    def test_split_is_disjoint_and_exhaustive(self):
        """ Union of the splits is the original set of frames """
        dataset = small_dataset(num=40)
        train, heldout = data.split_heldout(dataset, 0.25, 3)
        merged = np.vstack([train.features, heldout.features])
        key = lambda rows: sorted(map(tuple, rows.tolist()))
        self.assertEqual(key(dataset.features), key(merged))

    def test_split_is_seeded(self):
        """ Same seed gives the same split, another seed another """
        dataset = small_dataset(num=100)
        one = data.split_heldout(dataset, 0.2, 1)[1]
        two = data.split_heldout(dataset, 0.2, 1)[1]
        other = data.split_heldout(dataset, 0.2, 2)[1]
        self.assertArrayEqual(one.features, two.features)
        self.assertFalse(np.array_equal(one.features, other.features))

    def test_raise_on_degenerate_fraction(self):
        """ Fractions leaving a side empty are rejected """
        dataset = small_dataset()
        for fraction in (0.0, 1.0, 0.01, 0.99):
            with self.assertRaises(x.ConfigurationException):
                data.split_heldout(dataset, fraction, 0)


@attr('data', 'bandwidth')
class BandwidthTest(BaseTestCase):

    def test_two_points(self):
        """ Two points at distance 3 """
        dataset = FrameDataset([[0.0, 0.0], [3.0, 0.0]], [0, 1], 2)
        self.assertEqual(3.0, data.median_pairwise_distance(dataset))

    def test_three_collinear_points(self):
        """ Points at 0, 1 and 3 have median distance 2 """
        dataset = FrameDataset([[0.0], [1.0], [3.0]], [0, 1, 0], 2)
        self.assertEqual(2.0, data.median_pairwise_distance(dataset))

    def test_even_count_takes_mean_of_middle_values(self):
        """ Even number of distances takes the mean of the middle two """
        dataset = FrameDataset([[0.0], [1.0], [3.0], [6.0]], [0] * 4, 1)
        # distances 1, 3, 6, 2, 5, 3
        self.assertEqual(3.0, data.median_pairwise_distance(dataset))

    def test_exact_median_is_permutation_invariant(self):
        """ Full-sample median does not depend on frame order """
        dataset = small_dataset(num=30)
        shuffled = dataset.subset(self.rng().permutation(30))
        self.assertEqual(
            data.median_pairwise_distance(dataset, subsample=30),
            data.median_pairwise_distance(shuffled, subsample=30)
        )

    def test_subsample_is_seeded(self):
        """ Subsampled median is deterministic per seed """
        dataset = small_dataset(num=300)
        one = data.median_pairwise_distance(dataset, 50, seed=4)
        two = data.median_pairwise_distance(dataset, 50, seed=4)
        self.assertEqual(one, two)

    def test_raise_on_single_frame(self):
        """ A single frame has no pairwise distances """
        dataset = small_dataset(num=1)
        with self.assertRaises(x.EmptyDataset):
            data.median_pairwise_distance(dataset)

    def test_recommend_default_multiplier(self):
        """ Default bandwidth is the median itself """
        dataset = FrameDataset([[0.0], [1.0], [3.0]], [0, 1, 0], 2)
        self.assertEqual(2.0, data.recommend_bandwidth(dataset))
        self.assertEqual(1.0, data.recommend_bandwidth(dataset, 0.5))

    def test_recommend_warns_outside_known_range(self):
        """ Multipliers outside 0.3-5 are logged as a warning """
        dataset = FrameDataset([[0.0], [1.0], [3.0]], [0, 1, 0], 2)
        with self.assertLogs('kitchensinks.data', level='WARNING'):
            data.recommend_bandwidth(dataset, 10.0)


@attr('data', 'synth')
class SynthDatasetTest(BaseTestCase):

    def test_circles_without_noise_are_separable(self):
        """ Noise-free circles are separated by radius """
        dataset = data.synth_dataset('circles', dict(noise=0.0), seed=1)
        radius = np.linalg.norm(dataset.features, axis=1)
        self.assertTrue(np.all(radius[dataset.labels == 0] < 1.0001))
        self.assertTrue(np.all(radius[dataset.labels == 1] > 2.9999))
        self.assertEqual(2, dataset.num_classes)

    def test_noisy_without_flips_equals_mixture(self):
        """ Zero flip fraction reproduces the mixture """
        params = dict(num_samples=300, num_classes=5, dim=3)
        mixture = data.synth_dataset(SynthKind.MIXTURE, params, seed=2)
        noisy = data.synth_dataset(SynthKind.NOISY, dict(params, flip=0.0),
                                   seed=2)
        self.assertArrayEqual(mixture.features, noisy.features)
        self.assertArrayEqual(mixture.labels, noisy.labels)

    def test_noisy_flips_about_the_expected_fraction(self):
        """ Flipped labels disagree with the mixture at rate (C-1)/C f """
        params = dict(num_samples=20000, num_classes=10)
        mixture = data.synth_dataset('mixture', params, seed=3)
        noisy = data.synth_dataset('noisy', dict(params, flip=0.3), seed=3)
        changed = np.mean(mixture.labels != noisy.labels)
        self.assertLess(abs(changed - 0.27), 0.02)

    def test_generators_are_seeded(self):
        """ Same seed gives the same dataset """
        for kind in SynthKind:
            one = data.synth_dataset(kind, dict(num_samples=50), seed=9)
            two = data.synth_dataset(kind, dict(num_samples=50), seed=9)
            self.assertArrayEqual(one.features, two.features)
            self.assertArrayEqual(one.labels, two.labels)

    def test_raise_on_invalid_params(self):
        """ Invalid generator parameters are rejected """
        bad = [
            ('circles', dict(radii=(3.0, 1.0))),
            ('circles', dict(noise=-1.0)),
            ('mixture', dict(num_classes=1)),
            ('noisy', dict(flip=1.5)),
            ('mixture', dict(flip=0.1)),
            ('spiral', None),
        ]
        for kind, params in bad:
            with self.assertRaises(x.ConfigurationException):
                data.synth_dataset(kind, params)

    def test_bayes_predict_on_circles(self):
        """ Generator labels noise-free circles perfectly """
        dataset = data.synth_dataset('circles', dict(noise=0.0))
        labels = data.bayes_predict(dataset, dataset.features)
        self.assertArrayEqual(dataset.labels, labels)

    def test_bayes_predict_on_separated_mixture(self):
        """ Well separated mixture is almost perfectly classified """
        params = dict(num_samples=1000, num_classes=3, dim=2,
                      separation=50.0, std=0.1)
        dataset = data.synth_dataset('mixture', params, seed=4)
        labels = data.bayes_predict(dataset, dataset.features)
        self.assertGreater(np.mean(labels == dataset.labels), 0.99)
