import numpy as np
from kitchensinks import exceptions as x
from kitchensinks.model import check_labels

# floor applied to every probability before taking logs
PROBABILITY_FLOOR = 1e-12


class MetricsRecord:
    """
    Metrics record
    Frame-level evaluation of posteriors against labels. All logs are
    natural; erp = ln(perplexity) + mean_entropy.
    """

    def __init__(
        self,
        perplexity,
        accuracy,
        mean_entropy,
        erp=None,
        num_frames=None):
        """
        Create record
        :param perplexity: float
        :param accuracy: float
        :param mean_entropy: float, nats
        :param erp: float, derived from the other two when omitted
        :param num_frames: int or None, frames evaluated
        """
        self.perplexity = float(perplexity)
        self.accuracy = float(accuracy)
        self.mean_entropy = float(mean_entropy)
        if erp is None:
            erp = np.log(self.perplexity) + self.mean_entropy
        self.erp = float(erp)
        self.num_frames = num_frames

    def __repr__(self):
        return '<MetricsRecord ppx=[{:.6g}] acc=[{:.4f}] entropy=[{:.6g}]' \
               ' erp=[{:.6g}] m=[{}]>'.format(
                    self.perplexity,
                    self.accuracy,
                    self.mean_entropy,
                    self.erp,
                    self.num_frames
                )

    def to_dict(self):
        """ Returns dictionary representation of the record """
        return dict(
            perplexity=self.perplexity,
            accuracy=self.accuracy,
            entropy=self.mean_entropy,
            erp=self.erp,
            num_frames=self.num_frames,
        )


def _check(posteriors, labels=None):
    """ Validate a posterior matrix and, optionally, labels """
    posteriors = np.asarray(posteriors, dtype=np.float64)
    if posteriors.ndim != 2:
        msg = 'Posteriors must be an m x C matrix, got shape {}'
        raise x.DimensionMismatch(msg.format(posteriors.shape))
    if posteriors.shape[0] == 0:
        raise x.EmptyDataset('Metrics need at least one frame')
    if labels is None:
        return posteriors, None

    labels = check_labels(labels, posteriors.shape[1])
    if labels.shape[0] != posteriors.shape[0]:
        msg = '{} posterior rows but {} labels'
        raise x.DimensionMismatch(msg.format(
            posteriors.shape[0],
            labels.shape[0]
        ))
    return posteriors, labels


def _log(posteriors):
    return np.log(np.maximum(posteriors, PROBABILITY_FLOOR))


def log_perplexity(posteriors, labels):
    """ Mean negative log-probability of the correct labels """
    posteriors, labels = _check(posteriors, labels)
    correct = posteriors[np.arange(labels.shape[0]), labels]
    return -np.mean(_log(correct))


def perplexity(posteriors, labels):
    """
    Perplexity
    exp(-(1/m) sum_i ln p(y_i|x_i)), probabilities floored at 1e-12.

    :param posteriors: np.ndarray, m x C
    :param labels: np.ndarray, m 0-based labels
    :return: float >= 1
    """
    return float(np.exp(log_perplexity(posteriors, labels)))


def accuracy(posteriors, labels):
    """
    Accuracy
    Fraction of frames whose argmax class is the label; ties go to the
    lowest class index.
    """
    posteriors, labels = _check(posteriors, labels)
    return float(np.mean(np.argmax(posteriors, axis=1) == labels))


def mean_entropy(posteriors):
    """
    Mean entropy
    Average Shannon entropy of the predicted posteriors in nats, with
    0 ln 0 = 0.
    """
    posteriors, _ = _check(posteriors)
    return float(-np.mean(np.sum(posteriors * _log(posteriors), axis=1)))


def entropy_regularized_perplexity(posteriors, labels):
    """
    Entropy-regularized perplexity
    -(1/m) sum_i sum_k [1(k = y_i) + p(k|x_i)] ln p(k|x_i), evaluated
    directly as a double sum. Equals ln(perplexity) + mean entropy.

    :param posteriors: np.ndarray, m x C
    :param labels: np.ndarray, m 0-based labels
    :return: float, nats
    """
    posteriors, labels = _check(posteriors, labels)
    weights = posteriors.copy()
    weights[np.arange(labels.shape[0]), labels] += 1.0
    return float(-np.mean(np.sum(weights * _log(posteriors), axis=1)))


def evaluate_posteriors(posteriors, labels):
    """
    Evaluate posteriors
    :param posteriors: np.ndarray, m x C
    :param labels: np.ndarray, m 0-based labels
    :return: MetricsRecord
    """
    posteriors, labels = _check(posteriors, labels)
    log_ppx = log_perplexity(posteriors, labels)
    entropy = mean_entropy(posteriors)
    return MetricsRecord(
        perplexity=np.exp(log_ppx),
        accuracy=accuracy(posteriors, labels),
        mean_entropy=entropy,
        erp=log_ppx + entropy,
        num_frames=int(posteriors.shape[0])
    )
