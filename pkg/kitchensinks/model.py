import struct
import numpy as np
from scipy.special import expit, logsumexp, softmax
from kitchensinks import exceptions as x
from kitchensinks.config import ModelConfig
from kitchensinks.bank import pack_blocks, unpack_blocks

MODEL_MAGIC = b'RKSM'
MODEL_VERSION = 1

_HEAD = struct.Struct('<4sI')
_DIMS = struct.Struct('<IIBII')

BOTTLENECK_CODES = dict(none=0, linear=1, sigmoid=2)


class Model:
    """
    Kernel acoustic model
    Multinomial logistic regression over random features: a shallow network
    whose random first layer lives in the projection bank and whose output
    weights theta (C x H) are trained. An optional bottleneck of width W
    sits between features and softmax: linear (low-rank factorization of
    theta) or sigmoid (learned error-correcting output code). The bottleneck
    projection (W x D) and the sigmoid bias are trained jointly with theta.
    """

    def __init__(self, config, params, bank_ref=None):
        """
        Create model from parameters
        :param config: kitchensinks.config.ModelConfig, validated
        :param params: dict, theta and optionally projection and bias
        :param bank_ref: tuple, (list of BankBlock, input_dim) or None
        """
        self.config = config
        self.params = dict(params)
        self.bank_ref = bank_ref

    def __repr__(self):
        return '<Model C=[{}] D=[{}] bottleneck=[{}] width=[{}]>'.format(
            self.num_classes,
            self.feature_dim,
            self.bottleneck,
            self.config.width
        )

    @property
    def num_classes(self):
        return self.config.num_classes

    @property
    def feature_dim(self):
        return self.config.feature_dim

    @property
    def bottleneck(self):
        return self.config.bottleneck

    @property
    def hidden_dim(self):
        """ H: bottleneck width, or D without a bottleneck """
        if self.bottleneck == 'none':
            return self.feature_dim
        return self.config.width

    @property
    def theta(self):
        return self.params['theta']

    @property
    def projection(self):
        return self.params.get('projection')

    @property
    def bias(self):
        return self.params.get('bias')

    def copy(self):
        """ Deep copy of parameters, sharing config and bank reference """
        params = {name: value.copy() for name, value in self.params.items()}
        return Model(self.config, params, self.bank_ref)

    def as_stored(self):
        """
        As stored
        Copy with parameters rounded to 32-bit, i.e. exactly the model a
        checkpoint file holds.
        """
        params = {
            name: value.astype(np.float32).astype(np.float64)
            for name, value in self.params.items()
        }
        return Model(self.config, params, self.bank_ref)

    def is_finite(self):
        return all(np.all(np.isfinite(p)) for p in self.params.values())


def init_model(config, seed, bank=None):
    """
    Init model
    Output weights start at zero. A bottleneck projection is sampled from
    Normal(0, 1/D) with a Philox generator, the sigmoid bias starts at zero.

    :param config: kitchensinks.config.ModelConfig
    :param seed: int, unsigned seed for the bottleneck projection
    :param bank: kitchensinks.bank.ProjectionBank, optional, recorded as
                 the model's bank reference
    :return: Model
    """
    config.validate()
    if bank is not None and bank.num_features != config.feature_dim:
        msg = 'Model feature dimension {} does not match bank D={}'
        raise x.DimensionMismatch(msg.format(
            config.feature_dim,
            bank.num_features
        ))

    num_classes = config.num_classes
    feature_dim = config.feature_dim
    params = dict()

    if config.bottleneck == 'none':
        params['theta'] = np.zeros((num_classes, feature_dim))
    else:
        width = config.width
        rng = np.random.Generator(np.random.Philox(int(seed)))
        projection = rng.standard_normal((width, feature_dim))
        params['theta'] = np.zeros((num_classes, width))
        params['projection'] = projection / np.sqrt(feature_dim)
        if config.bottleneck == 'sigmoid':
            params['bias'] = np.zeros(width)

    bank_ref = (bank.blocks, bank.input_dim) if bank is not None else None
    return Model(config, params, bank_ref)


def _features(model, features):
    """ Validate features and return them as a 2-d float64 array """
    features = np.asarray(features, dtype=np.float64)
    single = features.ndim == 1
    if single:
        features = features[None, :]
    if features.ndim != 2 or features.shape[1] != model.feature_dim:
        msg = 'Expected random features of size {}, got shape {}'
        raise x.DimensionMismatch(msg.format(model.feature_dim,
                                             features.shape))
    return features, single


def hidden(model, features):
    """
    Hidden layer
    Identity without bottleneck, U phi for linear, logistic(U phi + bias)
    for sigmoid bottleneck. Accepts a vector or a batch (rows).

    :param model: Model
    :param features: np.ndarray, D or N x D
    :return: np.ndarray, H or N x H float64
    """
    features, single = _features(model, features)
    if model.bottleneck == 'none':
        out = features
    elif model.bottleneck == 'linear':
        out = features @ model.projection.T
    else:
        out = expit(features @ model.projection.T + model.bias)
    return out[0] if single else out


def scores(model, features):
    """ Per-class scores theta_c^T hidden(phi) """
    return hidden(model, features) @ model.theta.T


def softmax_scores(values):
    """
    Softmax
    Normalizes scores along the last axis with scipy, which subtracts the
    row maximum first. Raises on non-finite scores.

    :param values: np.ndarray, C or N x C
    :return: np.ndarray, same shape
    """
    values = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise x.NumericalError('Non-finite class scores')
    return softmax(values, axis=-1)


def posterior(model, features):
    """
    Posterior
    p(y=c|x) = exp(theta_c^T phi(x)) / sum_c exp(theta_c^T phi(x)) for a
    single feature vector or a batch of rows.

    :param model: Model
    :param features: np.ndarray, D or N x D
    :return: np.ndarray, C or N x C
    """
    return softmax_scores(scores(model, features))


def predict(model, features):
    """ Argmax class, lowest index wins ties """
    return np.argmax(posterior(model, features), axis=-1)


def check_labels(labels, num_classes):
    """
    Check labels
    Labels are 0-based internally.
    :param labels: array-like of int
    :param num_classes: int, C
    :return: np.ndarray of int64
    """
    labels = np.asarray(labels)
    if labels.ndim != 1 or not np.issubdtype(labels.dtype, np.integer):
        raise x.DimensionMismatch('Labels must be a vector of integers')
    bad = np.flatnonzero((labels < 0) | (labels >= num_classes))
    if bad.size:
        row = int(bad[0])
        msg = 'Label {} at row {} is outside 1..{}'
        raise x.LabelOutOfRange(
            msg.format(int(labels[row]) + 1, row, num_classes),
            row=row
        )
    return labels.astype(np.int64)


def loss_and_grad(model, features, labels, l2=0.0):
    """
    Loss and gradient
    Mean cross-entropy over the batch plus (l2/2) times the squared norm of
    every trainable parameter, with its exact gradient with respect to theta
    and, when present, the bottleneck projection and bias.

    :param model: Model
    :param features: np.ndarray, N x D random features
    :param labels: np.ndarray, N 0-based labels
    :param l2: float, regularization strength
    :return: tuple, (loss, dict of gradients keyed like model.params)
    """
    features, _ = _features(model, features)
    labels = check_labels(labels, model.num_classes)
    num = features.shape[0]
    if num == 0:
        raise x.EmptyDataset('Loss needs a non-empty batch')
    if labels.shape[0] != num:
        raise x.DimensionMismatch('Batch has {} rows but {} labels'.format(
            num,
            labels.shape[0]
        ))

    rows = np.arange(num)
    hid = hidden(model, features)
    logits = hid @ model.theta.T
    if not np.all(np.isfinite(logits)):
        raise x.NumericalError('Non-finite class scores')

    log_probs = logits - logsumexp(logits, axis=1, keepdims=True)
    loss = -np.mean(log_probs[rows, labels])

    delta = np.exp(log_probs)
    delta[rows, labels] -= 1.0
    delta /= num

    grads = dict()
    grads['theta'] = delta.T @ hid

    if model.bottleneck != 'none':
        back = delta @ model.theta
        if model.bottleneck == 'sigmoid':
            back = back * hid * (1.0 - hid)
            grads['bias'] = np.sum(back, axis=0)
        grads['projection'] = back.T @ features

    if l2:
        for name, value in model.params.items():
            loss += 0.5 * l2 * np.sum(np.square(value))
            grads[name] = grads[name] + l2 * value

    return float(loss), grads


# -----------------------------------------------------------------------------
# Serialization
# -----------------------------------------------------------------------------

def model_to_bytes(model):
    """
    Model to bytes
    Header with dimensions and bottleneck kind, the bank reference (input
    dimension and block table of kernel, D and seed per member, not the
    sampled frequencies), then parameters as 32-bit row-major arrays.

    :param model: Model
    :return: bytes
    """
    blocks, input_dim = model.bank_ref if model.bank_ref else ((), 0)
    data = _HEAD.pack(MODEL_MAGIC, MODEL_VERSION)
    data += _DIMS.pack(
        model.num_classes,
        model.feature_dim,
        BOTTLENECK_CODES[model.bottleneck],
        model.config.width or 0,
        input_dim
    )
    data += pack_blocks(blocks)
    for name in ('theta', 'projection', 'bias'):
        if name in model.params:
            data += model.params[name].astype('<f4').tobytes()
    return data


def model_from_bytes(buffer):
    """
    Model from bytes
    :param buffer: bytes
    :return: Model
    """
    if len(buffer) < _HEAD.size + _DIMS.size:
        raise x.TruncatedFile('Model header is truncated')

    magic, version = _HEAD.unpack_from(buffer, 0)
    if magic != MODEL_MAGIC:
        raise x.BadMagic('Not a model file: {!r}'.format(magic))
    if version != MODEL_VERSION:
        msg = 'Unsupported model format version [{}]'
        raise x.UnsupportedVersion(msg.format(version))

    num_classes, feature_dim, code, width, input_dim = _DIMS.unpack_from(
        buffer,
        _HEAD.size
    )
    kinds = {code: kind for kind, code in BOTTLENECK_CODES.items()}
    if code not in kinds:
        raise x.DataError('Unknown bottleneck code [{}]'.format(code))

    blocks, offset = unpack_blocks(
        buffer,
        _HEAD.size + _DIMS.size,
        allow_empty=True
    )

    config = ModelConfig(
        num_classes=num_classes,
        feature_dim=feature_dim,
        bottleneck=kinds[code],
        width=width if code else None
    )
    try:
        config.validate()
    except x.InvalidConfig as err:
        raise x.DataError('Model header is invalid: {}'.format(err))

    hidden_dim = width if code else feature_dim
    shapes = [('theta', (num_classes, hidden_dim))]
    if code:
        shapes.append(('projection', (width, feature_dim)))
    if kinds[code] == 'sigmoid':
        shapes.append(('bias', (width,)))

    expected = offset + 4 * sum(int(np.prod(s)) for _, s in shapes)
    if len(buffer) < expected:
        msg = 'Model file truncated: expected {} bytes, got {}'
        raise x.TruncatedFile(msg.format(expected, len(buffer)))

    params = dict()
    for name, shape in shapes:
        count = int(np.prod(shape))
        values = np.frombuffer(buffer, '<f4', count, offset)
        params[name] = values.astype(np.float64).reshape(shape)
        offset += 4 * count

    bank_ref = (blocks, input_dim) if blocks else None
    return Model(config, params, bank_ref)


def save_model(model, path):
    """ Write model to a binary file """
    with open(path, 'wb') as file:
        file.write(model_to_bytes(model))


def load_model(path):
    """ Read model from a binary file """
    with open(path, 'rb') as file:
        return model_from_bytes(file.read())
