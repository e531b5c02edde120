import logging
import numpy as np
from kitchensinks import exceptions as x
from kitchensinks.bank import feature_map_batch
from kitchensinks.model import posterior, loss_and_grad
from kitchensinks.metrics import evaluate_posteriors
from kitchensinks.trace import CheckpointStore, CheckpointTrace, TraceEntry

logger = logging.getLogger(__name__)


def sgd_step(
    model,
    velocity,
    features,
    labels,
    lr,
    momentum,
    l2=0.0,
    objective=loss_and_grad):
    """
    SGD step
    Classical momentum: v <- momentum * v - lr * grad; params <- params + v.
    Every update is computed and checked before anything changes: the
    velocity passed in is never modified, and the model's params dict is
    swapped for a new one only when all updates are finite.

    :param model: kitchensinks.model.Model, or any object with params dict
    :param velocity: dict of arrays keyed like model.params, or None
    :param features: np.ndarray, N x D random features
    :param labels: np.ndarray, N 0-based labels
    :param lr: float, learning rate
    :param momentum: float in [0, 1)
    :param l2: float, regularization strength
    :param objective: callable(model, features, labels, l2) -> (loss, grads)
    :return: tuple, (model, new velocity, loss before the step)
    """
    loss, grads = objective(model, features, labels, l2)
    if not np.isfinite(loss):
        raise x.DivergenceError('Non-finite training loss {}'.format(loss))

    if velocity is None:
        velocity = {k: np.zeros_like(v) for k, v in model.params.items()}

    steps, updated = dict(), dict()
    for name, value in model.params.items():
        step = momentum * velocity[name] - lr * grads[name]
        new_value = value + step
        if not np.all(np.isfinite(step)) or not np.all(np.isfinite(new_value)):
            raise x.DivergenceError('Non-finite update of {}'.format(name))
        steps[name] = step
        updated[name] = new_value

    model.params = updated
    return model, steps, loss


def evaluate_checkpoint(bank, model, dataset, workers=1, chunk_size=1024):
    """
    Evaluate checkpoint
    Posteriors for every frame, computed in chunks, and all four metrics.

    :param bank: kitchensinks.bank.ProjectionBank
    :param model: kitchensinks.model.Model
    :param dataset: kitchensinks.data.FrameDataset
    :param workers: int, threads for the feature map
    :param chunk_size: int, frames per chunk
    :return: kitchensinks.metrics.MetricsRecord
    """
    dataset.require_frames()
    _check_dims(bank, model, dataset)

    posteriors = []
    for start in range(0, dataset.num_frames, chunk_size):
        rows = dataset.features[start:start + chunk_size]
        features = feature_map_batch(bank, rows, workers=workers)
        posteriors.append(posterior(model, features))
    return evaluate_posteriors(np.vstack(posteriors), dataset.labels)


def _check_dims(bank, model, dataset):
    if dataset.dim != bank.input_dim:
        msg = 'Dataset has dimension {}, bank expects {}'
        raise x.DimensionMismatch(msg.format(dataset.dim, bank.input_dim))
    if model.feature_dim != bank.num_features:
        msg = 'Model expects {} features, bank produces {}'
        raise x.DimensionMismatch(msg.format(model.feature_dim,
                                             bank.num_features))
    if dataset.num_classes > model.num_classes:
        msg = 'Dataset has {} classes, model only {}'
        raise x.DimensionMismatch(msg.format(dataset.num_classes,
                                             model.num_classes))


def train(bank, model, train_set, heldout, config, store=None):
    """
    Train
    Mini-batch SGD over frames shuffled each epoch with a seeded generator.
    Random features are computed per mini-batch from the bank unless
    config.cache_features asks to compute them once. Every eval_every
    epochs (and at the last epoch) the model is evaluated on the held-out
    set exactly as it is persisted, and a checkpoint is saved. The learning
    rate is multiplied by anneal_factor whenever held-out perplexity fails
    to improve on the best so far by the relative anneal_threshold.
    Training never stops early: the trace covers all epochs so selection
    can look past the perplexity minimum.

    :param bank: kitchensinks.bank.ProjectionBank
    :param model: kitchensinks.model.Model, initial model (not modified)
    :param train_set: kitchensinks.data.FrameDataset
    :param heldout: kitchensinks.data.FrameDataset
    :param config: kitchensinks.config.TrainConfig
    :param store: CheckpointStore, in-memory when omitted
    :return: kitchensinks.trace.CheckpointTrace
    """
    config.validate()
    train_set.require_frames()
    heldout.require_frames()
    _check_dims(bank, model, train_set)
    _check_dims(bank, model, heldout)

    store = store if store else CheckpointStore()
    trace = CheckpointTrace(config=config.to_dict(), store=store)
    model = model.copy()
    workers = config.workers
    lr = float(config.learning_rate)

    def checkpoint(epoch, train_loss):
        snapshot = model.as_stored()
        record = evaluate_checkpoint(bank, snapshot, heldout, workers)
        handle = store.save(snapshot, epoch)
        trace.append(TraceEntry(epoch, record, handle, lr, train_loss))
        logger.info(
            'Epoch %d: loss=%s ppx=%.6g acc=%.4f entropy=%.6g erp=%.6g lr=%g',
            epoch,
            'n/a' if train_loss is None else '{:.6g}'.format(train_loss),
            record.perplexity,
            record.accuracy,
            record.mean_entropy,
            record.erp,
            lr
        )
        return record

    best = checkpoint(0, None).perplexity

    cache = None
    if config.cache_features:
        cache = feature_map_batch(bank, train_set.features, workers=workers)

    rng = np.random.Generator(np.random.Philox(int(config.seed)))
    total = train_set.num_frames
    batch_size = int(config.minibatch_size)
    velocity = None

    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(total)
        loss_sum = 0.0
        try:
            for start in range(0, total, batch_size):
                rows = order[start:start + batch_size]
                if cache is not None:
                    features = cache[rows]
                else:
                    features = feature_map_batch(
                        bank,
                        train_set.features[rows],
                        workers=workers
                    )
                model, velocity, loss = sgd_step(
                    model,
                    velocity,
                    features,
                    train_set.labels[rows],
                    lr,
                    config.momentum,
                    config.l2
                )
                loss_sum += loss * rows.shape[0]

            last = epoch == config.max_epochs
            if epoch % config.eval_every and not last:
                continue
            record = checkpoint(epoch, loss_sum / total)
        except x.NumericalError as err:
            msg = 'Training diverged at epoch {}: {}'.format(epoch, err)
            logger.error(msg)
            raise x.DivergenceError(msg, trace=trace) from err

        if record.perplexity > best * (1.0 - config.anneal_threshold):
            if config.anneal_factor < 1.0:
                lr *= config.anneal_factor
                logger.warning('Held-out perplexity did not improve, '
                               'learning rate annealed to %g', lr)
        best = min(best, record.perplexity)

    return trace
