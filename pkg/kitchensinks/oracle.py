import logging
import numpy as np
from joblib import Parallel, delayed
from scipy.special import logsumexp
from kitchensinks import exceptions as x
from kitchensinks.bank import sample_projection_bank, feature_map_batch
from kitchensinks.model import loss_and_grad

logger = logging.getLogger(__name__)

# exact methods are quadratic in N, refuse anything bigger by default
DEFAULT_CAP = 5000


def _check_cap(num, cap):
    if num > cap:
        msg = 'Exact oracle refuses {} points, cap is {}'
        raise x.OracleCapExceeded(msg.format(num, cap))


def exact_kernel_matrix(spec, rows, cap=DEFAULT_CAP, workers=1):
    """
    Exact kernel matrix
    K_ij = k(x_i, x_j) in 64-bit. The upper triangle is computed row by row
    and mirrored, so K is exactly symmetric with a unit diagonal.

    :param spec: kitchensinks.kernels.KernelSpec
    :param rows: np.ndarray, N x d
    :param cap: int, maximum N
    :param workers: int, threads computing rows
    :return: np.ndarray, N x N
    """
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2:
        raise x.DimensionMismatch('Kernel matrix needs an N x d matrix')
    num = rows.shape[0]
    _check_cap(num, cap)

    matrix = np.empty((num, num))

    def fill(i):
        matrix[i, i:] = spec.exact(rows[i], rows[i:])

    if workers and workers > 1:
        Parallel(n_jobs=int(workers), prefer='threads')(
            delayed(fill)(i) for i in range(num)
        )
    else:
        for i in range(num):
            fill(i)

    upper = np.triu_indices(num, 1)
    matrix[(upper[1], upper[0])] = matrix[upper]
    return matrix


def cross_kernel(spec, rows1, rows2):
    """ Exact kernel between two sets of points, N x M """
    rows1 = np.asarray(rows1, dtype=np.float64)
    rows2 = np.asarray(rows2, dtype=np.float64)
    return spec.exact(rows1[:, None, :], rows2[None, :, :])


def _dual_objective(kernel, alpha, onehot, l2):
    """ Mean cross-entropy of K alpha plus (l2/2) tr(alpha^T K alpha) """
    scores = kernel @ alpha
    log_probs = scores - logsumexp(scores, axis=1, keepdims=True)
    loss = -np.sum(onehot * log_probs) / kernel.shape[0]
    loss += 0.5 * l2 * np.sum(alpha * scores)
    return loss, np.exp(log_probs)


def kernel_logreg_fit(
    spec,
    dataset,
    l2,
    iters=5000,
    tol=1e-6,
    cap=DEFAULT_CAP):
    """
    Kernel logistic regression
    Fits dual coefficients alpha (N x C) of the exact kernel machine with
    scores s_c(x) = sum_j alpha_jc k(x_j, x), minimizing mean cross-entropy
    plus (l2/2) tr(alpha^T K alpha). Gradient descent in the kernel's own
    geometry (direction G + l2 alpha, whose image under K is the gradient)
    with backtracking line search; stops when the gradient norm is below
    tol or after iters iterations.

    :param spec: kitchensinks.kernels.KernelSpec
    :param dataset: kitchensinks.data.FrameDataset
    :param l2: float, positive regularization
    :param iters: int, maximum iterations
    :param tol: float, gradient norm tolerance
    :param cap: int, maximum N
    :return: np.ndarray, N x C
    """
    if dataset.num_classes < 2:
        raise x.ConfigurationException('Kernel logistic regression needs '
                                       'at least two classes')
    if not l2 > 0:
        raise x.ConfigurationException('Dual fit needs l2 > 0')

    dataset.require_frames()
    num = dataset.num_frames
    _check_cap(num, cap)

    kernel = exact_kernel_matrix(spec, dataset.features, cap)
    onehot = np.zeros((num, dataset.num_classes))
    onehot[np.arange(num), dataset.labels] = 1.0
    alpha = np.zeros_like(onehot)

    loss, probs = _dual_objective(kernel, alpha, onehot, l2)
    step = 1.0
    iteration, norm = -1, np.inf
    for iteration in range(int(iters)):
        direction = (probs - onehot) / num + l2 * alpha
        gradient = kernel @ direction
        norm = np.linalg.norm(gradient)
        if norm < tol:
            break

        slope = np.sum(gradient * direction)
        while True:
            candidate = alpha - step * direction
            new_loss, new_probs = _dual_objective(kernel, candidate,
                                                  onehot, l2)
            if not np.isfinite(new_loss):
                step *= 0.5
            elif new_loss <= loss - 1e-4 * step * slope:
                break
            else:
                step *= 0.5
            if step < 1e-20:
                raise x.NumericalError('Line search failed in dual fit')

        alpha, loss, probs = candidate, new_loss, new_probs
        step = min(step * 2.0, 1e6)

    logger.debug('Dual fit stopped after %d iterations, loss %.8g, '
                 'gradient norm %.3g', iteration + 1, loss, norm)
    return alpha


def kernel_logreg_predict(spec, train_rows, alpha, rows):
    """
    Predict with dual coefficients
    :return: np.ndarray, 0-based labels of rows
    """
    scores = cross_kernel(spec, rows, train_rows) @ alpha
    return np.argmax(scores, axis=1)


def finite_diff_grad(model, features, labels, eps=1e-5, l2=0.0,
                     objective=loss_and_grad):
    """
    Finite difference gradient
    Central differences (L(p + eps) - L(p - eps)) / (2 eps) for every
    coordinate of every trainable parameter, in 64-bit.

    :param model: kitchensinks.model.Model or object with params dict
    :param features: np.ndarray, batch features
    :param labels: np.ndarray, batch labels
    :param eps: float, positive step
    :param l2: float, regularization strength
    :param objective: callable(model, features, labels, l2) -> (loss, grads)
    :return: dict of arrays keyed like model.params
    """
    if not eps > 0:
        raise x.ConfigurationException('Finite difference step must be > 0')

    grads = dict()
    for name, value in model.params.items():
        original = np.array(value, dtype=np.float64)
        grad = np.zeros_like(original)
        for index in np.ndindex(original.shape):
            shifted = original.copy()
            shifted[index] = original[index] + eps
            model.params[name] = shifted
            upper = objective(model, features, labels, l2)[0]

            shifted = original.copy()
            shifted[index] = original[index] - eps
            model.params[name] = shifted
            lower = objective(model, features, labels, l2)[0]

            grad[index] = (upper - lower) / (2.0 * eps)
        model.params[name] = original
        grads[name] = grad
    return grads


def kernel_approximation_report(
    spec,
    rows,
    feature_counts,
    pairs,
    seed,
    cap=DEFAULT_CAP):
    """
    Kernel approximation report
    Draws random pairs of frames and, for every feature count D, compares
    random-feature inner products with the exact kernel.

    :param spec: kitchensinks.kernels.KernelSpec
    :param rows: np.ndarray, N x d frames
    :param feature_counts: list of int, D values
    :param pairs: int, number of pairs
    :param seed: int, seeds pair sampling and every bank
    :param cap: int, maximum N
    :return: list of tuples, (D, rms_error, max_error)
    """
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[0] < 2:
        raise x.EmptyDataset('Approximation check needs at least two frames')
    _check_cap(rows.shape[0], cap)
    if int(pairs) < 1:
        raise x.ConfigurationException('Approximation check needs pairs')

    rng = np.random.Generator(np.random.Philox(int(seed)))
    first = rng.integers(0, rows.shape[0], int(pairs))
    second = rng.integers(0, rows.shape[0], int(pairs))
    exact = spec.exact(rows[first], rows[second])

    report = []
    for count in feature_counts:
        bank = sample_projection_bank(spec, rows.shape[1], count, seed)
        features = feature_map_batch(bank, rows).astype(np.float64)
        approx = np.sum(features[first] * features[second], axis=1)
        error = approx - exact
        report.append((
            int(count),
            float(np.sqrt(np.mean(error ** 2))),
            float(np.max(np.abs(error)))
        ))
    return report
