import csv
import enum
import logging
import os
import struct
import numpy as np
from scipy.spatial.distance import pdist
from kitchensinks import exceptions as x
from kitchensinks.model import check_labels

logger = logging.getLogger(__name__)

DATASET_MAGIC = b'FRDS'
DATASET_VERSION = 1

_HEAD = struct.Struct('<4sIQII')

# bandwidth multipliers of the median pairwise distance that are known to
# work, 1.0 being the usual choice
BANDWIDTH_MULTIPLIERS = (0.3, 5.0)


class FrameDataset:
    """
    Frame dataset
    Dense 32-bit feature vectors with one state label per frame. Labels are
    1-based in files and 0-based in memory.
    """

    def __init__(self, features, labels, num_classes, meta=None):
        """
        Create dataset
        :param features: np.ndarray, N x d
        :param labels: np.ndarray, N 0-based labels
        :param num_classes: int, C
        :param meta: dict, optional generator metadata
        """
        features = np.asarray(features)
        if features.dtype != np.float32:
            features = features.astype(np.float32)
        if features.ndim != 2 or features.shape[1] < 1:
            msg = 'Features must be an N x d matrix, got shape {}'
            raise x.DimensionMismatch(msg.format(features.shape))

        num_classes = int(num_classes)
        if num_classes < 1:
            raise x.DataError('Dataset needs at least one class')

        labels = check_labels(labels, num_classes)
        if labels.shape[0] != features.shape[0]:
            msg = 'Dataset has {} frames but {} labels'
            raise x.DimensionMismatch(msg.format(
                features.shape[0],
                labels.shape[0]
            ))

        self.features = features
        self.labels = labels
        self.num_classes = num_classes
        self.meta = meta if meta else dict()

    def __repr__(self):
        return '<FrameDataset N=[{}] d=[{}] C=[{}]>'.format(
            self.num_frames,
            self.dim,
            self.num_classes
        )

    def __len__(self):
        return self.num_frames

    @property
    def num_frames(self):
        return self.features.shape[0]

    @property
    def dim(self):
        return self.features.shape[1]

    def subset(self, indices):
        """ Dataset of selected frames, in the given order """
        indices = np.asarray(indices, dtype=np.int64)
        return FrameDataset(
            np.asarray(self.features[indices]),
            self.labels[indices],
            self.num_classes,
            self.meta
        )

    def require_frames(self, minimum=1):
        """ Raise unless the dataset has at least `minimum` frames """
        if self.num_frames < minimum:
            msg = 'empty dataset' if minimum == 1 else \
                'dataset needs at least {} frames'.format(minimum)
            raise x.EmptyDataset(msg)
        return self


# -----------------------------------------------------------------------------
# File formats
# -----------------------------------------------------------------------------

def load_dataset(path, num_classes=None):
    """
    Load dataset
    Reads the binary frame format, or CSV when the file name ends with
    .csv. CSV files carry no class count: pass num_classes to range-check
    labels, otherwise the largest label is used.

    :param path: str, file path
    :param num_classes: int, C for CSV files
    :return: FrameDataset
    """
    if not os.path.isfile(path):
        raise x.DataError('Dataset file not found: {}'.format(path))

    if str(path).lower().endswith('.csv'):
        dataset = load_csv(path, num_classes)
    else:
        dataset = load_frds(path)

    logger.info('Loaded %s from %s', dataset, path)
    return dataset


def load_frds(path):
    """
    Load binary frames
    Header (magic, version, N, d, C), then features as little-endian f32
    row-major, then labels as u32. Features are memory-mapped read-only.

    :param path: str
    :return: FrameDataset
    """
    size = os.path.getsize(path)
    with open(path, 'rb') as file:
        head = file.read(_HEAD.size)

    if len(head) >= 4 and head[:4] != DATASET_MAGIC:
        raise x.BadMagic('Not a frame dataset: {!r}'.format(head[:4]))
    if len(head) < _HEAD.size:
        raise x.TruncatedFile('Dataset header is truncated')

    magic, version, num, dim, num_classes = _HEAD.unpack(head)
    if version != DATASET_VERSION:
        msg = 'Unsupported dataset format version [{}]'
        raise x.UnsupportedVersion(msg.format(version))
    if num == 0:
        raise x.EmptyDataset('empty dataset')
    if dim == 0:
        raise x.DataError('Dataset has zero feature dimension')

    expected = _HEAD.size + 4 * num * dim + 4 * num
    if size < expected:
        msg = 'Dataset truncated: expected {} bytes, got {}'
        raise x.TruncatedFile(msg.format(expected, size))

    features = np.memmap(
        path,
        dtype='<f4',
        mode='r',
        offset=_HEAD.size,
        shape=(num, dim)
    )
    raw = np.fromfile(
        path,
        dtype='<u4',
        count=num,
        offset=_HEAD.size + 4 * num * dim
    )
    labels = _external_labels(raw, num_classes)
    return FrameDataset(features, labels, num_classes)


def _external_labels(raw, num_classes, lines=None):
    """
    Convert 1-based labels to 0-based ones, naming the first bad row
    :param raw: np.ndarray, 1-based labels
    :param num_classes: int, C
    :param lines: list of int, file line per frame for error messages
    :return: np.ndarray
    """
    raw = np.asarray(raw, dtype=np.int64)
    bad = np.flatnonzero((raw < 1) | (raw > num_classes))
    if bad.size:
        row = int(bad[0])
        where = 'line {}'.format(lines[row]) if lines else 'row {}'.format(row)
        msg = 'Label {} at {} is outside 1..{}'
        raise x.LabelOutOfRange(
            msg.format(int(raw[row]), where, num_classes),
            row=row
        )
    return raw - 1


def save_dataset(dataset, path):
    """ Write dataset in the binary frame format """
    head = _HEAD.pack(
        DATASET_MAGIC,
        DATASET_VERSION,
        dataset.num_frames,
        dataset.dim,
        dataset.num_classes
    )
    with open(path, 'wb') as file:
        file.write(head)
        file.write(np.ascontiguousarray(dataset.features, '<f4').tobytes())
        file.write((dataset.labels + 1).astype('<u4').tobytes())


def load_csv(path, num_classes=None):
    """
    Load CSV
    One frame per row: d feature columns, then the 1-based label column.
    A header row is required.

    :param path: str
    :param num_classes: int or None
    :return: FrameDataset
    """
    with open(path, newline='') as file:
        rows = list(csv.reader(file))

    if not rows:
        raise x.EmptyDataset('empty dataset')
    if _is_numeric(rows[0]):
        raise x.DataError('CSV header row is missing in {}'.format(path))

    width = len(rows[0])
    if width < 2:
        raise x.DataError('CSV needs feature columns and a label column')

    features, labels, lines = [], [], []
    for line, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != width:
            msg = 'Line {} has {} columns, expected {}'
            raise x.DataError(msg.format(line, len(row), width))
        try:
            features.append([float(value) for value in row[:-1]])
            label = float(row[-1])
            integral = label == int(label)
        except (ValueError, OverflowError):
            raise x.DataError('Line {} is not numeric'.format(line))
        if not integral:
            raise x.DataError('Line {} has a non-integer label'.format(line))
        labels.append(int(label))
        lines.append(line)

    if not labels:
        raise x.EmptyDataset('empty dataset')

    if num_classes is None:
        num_classes = max(max(labels), 1)
    labels = _external_labels(labels, int(num_classes), lines)
    features = np.asarray(features, dtype=np.float64).astype(np.float32)
    return FrameDataset(features, labels, num_classes)


def _is_numeric(row):
    try:
        [float(value) for value in row]
    except ValueError:
        return False
    return True


def save_csv(dataset, path):
    """ Write dataset as CSV with header f0..f{d-1},label """
    with open(path, 'w', newline='') as file:
        writer = csv.writer(file, lineterminator='\n')
        writer.writerow(['f{}'.format(j) for j in range(dataset.dim)]
                        + ['label'])
        for row, label in zip(dataset.features, dataset.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label) + 1])


# -----------------------------------------------------------------------------
# Splitting and bandwidth heuristic
# -----------------------------------------------------------------------------

def split_heldout(dataset, fraction, seed):
    """
    Split held-out
    Seeded shuffle, then the first round(N * fraction) frames become the
    held-out set and the rest the training set.

    :param dataset: FrameDataset
    :param fraction: float in (0, 1)
    :param seed: int
    :return: tuple, (train, heldout)
    """
    fraction = float(fraction)
    if not 0.0 < fraction < 1.0:
        msg = 'Held-out fraction must be in (0, 1), got {}'
        raise x.ConfigurationException(msg.format(fraction))

    total = dataset.num_frames
    num_heldout = int(round(total * fraction))
    if num_heldout < 1 or num_heldout > total - 1:
        msg = 'Fraction {} of {} frames leaves one side empty'
        raise x.ConfigurationException(msg.format(fraction, total))

    rng = np.random.Generator(np.random.Philox(int(seed)))
    order = rng.permutation(total)
    heldout = dataset.subset(order[:num_heldout])
    train = dataset.subset(order[num_heldout:])
    return train, heldout


def median_pairwise_distance(dataset, subsample=2000, seed=0):
    """
    Median pairwise distance
    Median of Euclidean distances among min(subsample, N) frames drawn
    without replacement. With subsample >= N every frame is used and the
    result is exact.

    :param dataset: FrameDataset
    :param subsample: int, frames to use
    :param seed: int
    :return: float
    """
    total = dataset.num_frames
    if total < 2:
        raise x.EmptyDataset('Median distance needs at least two frames')

    subsample = int(subsample)
    if subsample < 2:
        raise x.ConfigurationException('Subsample must be at least 2')

    if subsample >= total:
        rows = np.asarray(dataset.features, dtype=np.float64)
    else:
        rng = np.random.Generator(np.random.Philox(int(seed)))
        picked = np.sort(rng.choice(total, size=subsample, replace=False))
        rows = np.asarray(dataset.features[picked], dtype=np.float64)

    return float(np.median(pdist(rows, 'euclidean')))


def recommend_bandwidth(dataset, multiplier=1.0, subsample=2000, seed=0):
    """
    Recommend bandwidth
    multiplier times the median pairwise distance.
    :return: float
    """
    low, high = BANDWIDTH_MULTIPLIERS
    if not low <= multiplier <= high:
        logger.warning('Bandwidth multiplier %s is outside %s-%s',
                       multiplier, low, high)

    median = median_pairwise_distance(dataset, subsample, seed)
    sigma = multiplier * median
    logger.info('Median pairwise distance %r, sigma=%r', median, sigma)
    return sigma


# -----------------------------------------------------------------------------
# Synthetic datasets
# -----------------------------------------------------------------------------

class SynthKind(enum.Enum):
    """ Synthetic dataset generators """
    CIRCLES = 'circles'
    MIXTURE = 'mixture'
    NOISY = 'noisy'


SYNTH_DEFAULTS = {
    SynthKind.CIRCLES: dict(num_samples=1000, radii=(1.0, 3.0), noise=0.1),
    SynthKind.MIXTURE: dict(num_samples=1000, num_classes=10, dim=2,
                            separation=3.0, std=1.0),
    SynthKind.NOISY: dict(num_samples=1000, num_classes=10, dim=2,
                          separation=3.0, std=1.0, flip=0.3),
}


def _synth_params(kind, params):
    """ Merge params over defaults and validate them """
    merged = dict(SYNTH_DEFAULTS[kind])
    params = params if params else dict()
    unknown = set(params) - set(merged)
    if unknown:
        msg = 'Unknown parameters for {}: {}'
        raise x.ConfigurationException(msg.format(kind.value,
                                                  sorted(unknown)))
    merged.update(params)

    if int(merged['num_samples']) < 1:
        raise x.ConfigurationException('num_samples must be positive')
    if kind is SynthKind.CIRCLES:
        inner, outer = merged['radii']
        if not 0 <= inner < outer:
            raise x.ConfigurationException('Radii must satisfy 0 <= r1 < r2')
        if merged['noise'] < 0:
            raise x.ConfigurationException('Noise must be non-negative')
        return merged

    if int(merged['num_classes']) < 2 or int(merged['dim']) < 1:
        raise x.ConfigurationException('Mixture needs C >= 2 and dim >= 1')
    if merged['std'] <= 0 or merged['separation'] < 0:
        raise x.ConfigurationException('Mixture needs std > 0, '
                                       'separation >= 0')
    if kind is SynthKind.NOISY and not 0 <= merged['flip'] <= 1:
        raise x.ConfigurationException('Flip fraction must be in [0, 1]')
    return merged


def synth_dataset(kind, params=None, seed=0):
    """
    Synthetic dataset
    circles: two classes on radii r1 < r2 with Gaussian radial noise.
    mixture: C classes around random means with shared isotropic noise.
    noisy: mixture with a fraction of labels resampled uniformly, the
    regime where held-out perplexity and entropy pull apart.

    :param kind: SynthKind or its value
    :param params: dict, overrides of SYNTH_DEFAULTS
    :param seed: int
    :return: FrameDataset
    """
    try:
        kind = SynthKind(kind)
    except ValueError:
        msg = 'Unknown synthetic dataset kind [{}]'
        raise x.ConfigurationException(msg.format(kind))

    params = _synth_params(kind, params)
    rng = np.random.Generator(np.random.Philox(int(seed)))
    total = int(params['num_samples'])

    if kind is SynthKind.CIRCLES:
        radii = np.asarray(params['radii'], dtype=np.float64)
        labels = rng.permutation(np.arange(total) % 2)
        angles = rng.uniform(0.0, 2.0 * np.pi, total)
        radius = radii[labels] + params['noise'] * rng.standard_normal(total)
        features = np.column_stack([
            radius * np.cos(angles),
            radius * np.sin(angles)
        ])
        meta = dict(kind=kind.value, radii=tuple(radii))
        return FrameDataset(features, labels, 2, meta)

    num_classes = int(params['num_classes'])
    dim = int(params['dim'])
    means = params['separation'] * rng.standard_normal((num_classes, dim))
    labels = rng.integers(0, num_classes, total)
    noise = rng.standard_normal((total, dim))
    features = means[labels] + params['std'] * noise

    if kind is SynthKind.NOISY and params['flip'] > 0:
        flipped = rng.random(total) < params['flip']
        resampled = rng.integers(0, num_classes, total)
        labels = np.where(flipped, resampled, labels)

    meta = dict(kind=kind.value, means=means, std=params['std'])
    return FrameDataset(features, labels, num_classes, meta)


def bayes_predict(dataset, features):
    """
    Bayes predict
    Labels the generating model of a synthetic dataset would assign: the
    nearest mean for mixtures (equal priors, shared isotropic covariance),
    the nearest radius for circles.

    :param dataset: FrameDataset produced by synth_dataset
    :param features: np.ndarray, N x d
    :return: np.ndarray, 0-based labels
    """
    features = np.asarray(features, dtype=np.float64)
    kind = dataset.meta.get('kind')
    if kind == SynthKind.CIRCLES.value:
        radius = np.linalg.norm(features, axis=1)
        inner, outer = dataset.meta['radii']
        return (radius > 0.5 * (inner + outer)).astype(np.int64)
    if kind in (SynthKind.MIXTURE.value, SynthKind.NOISY.value):
        means = dataset.meta['means']
        distances = ((features[:, None, :] - means[None, :, :]) ** 2).sum(-1)
        return np.argmin(distances, axis=1)
    raise x.DataError('Dataset was not produced by a known generator')
