import csv
import enum
import os
import numpy as np
from kitchensinks import exceptions as x
from kitchensinks.metrics import MetricsRecord
from kitchensinks.trace import CheckpointStore, CheckpointTrace, TraceEntry

TRACE_HEADER = ['epoch', 'perplexity', 'accuracy', 'entropy', 'erp',
                'checkpoint']


class SelectionCriterion(enum.Enum):
    """ Checkpoint selection criteria """
    PERPLEXITY = 'ppx'
    ERP = 'erp'


def criterion_value(record, criterion):
    """
    Criterion value
    Perplexity, or ln(perplexity) + mean entropy for ERP.
    :param record: kitchensinks.metrics.MetricsRecord
    :param criterion: SelectionCriterion
    :return: float
    """
    criterion = SelectionCriterion(criterion)
    if criterion is SelectionCriterion.PERPLEXITY:
        return record.perplexity
    return float(np.log(record.perplexity) + record.mean_entropy)


def select_checkpoint(trace, criterion):
    """
    Select checkpoint
    Entry minimizing the criterion; ties go to the earliest epoch. NaN
    ranks with infinity, after every finite value.

    :param trace: kitchensinks.trace.CheckpointTrace
    :param criterion: SelectionCriterion or its value ('ppx', 'erp')
    :return: kitchensinks.trace.TraceEntry
    """
    try:
        criterion = SelectionCriterion(criterion)
    except ValueError:
        msg = 'Unknown selection criterion [{}]'
        raise x.ConfigurationException(msg.format(criterion))

    if not len(trace):
        raise x.TraceError('Can not select from an empty trace')

    best = None
    best_value = None
    for entry in trace:
        value = criterion_value(entry.record, criterion)
        value = float(np.nan_to_num(value, nan=np.inf))
        if best is None or value < best_value:
            best, best_value = entry, value
    return best


def selection_result(entry):
    """ JSON-ready summary of a selected entry """
    return dict(
        epoch=entry.epoch,
        checkpoint=entry.checkpoint,
        perplexity=entry.record.perplexity,
        entropy=entry.record.mean_entropy,
        erp=entry.record.erp,
    )


def export_trace(trace, path):
    """
    Export trace
    CSV with header epoch,perplexity,accuracy,entropy,erp,checkpoint and
    one row per entry. Floats use the shortest repr that round-trips.

    :param trace: kitchensinks.trace.CheckpointTrace
    :param path: str
    :return: str, path written
    """
    if not path:
        raise x.TraceError('Trace export needs a path')

    try:
        with open(path, 'w', newline='') as file:
            writer = csv.writer(file, lineterminator='\n')
            writer.writerow(TRACE_HEADER)
            for entry in trace:
                record = entry.record
                writer.writerow([
                    entry.epoch,
                    repr(record.perplexity),
                    repr(record.accuracy),
                    repr(record.mean_entropy),
                    repr(record.erp),
                    entry.checkpoint,
                ])
    except OSError as err:
        raise x.TraceError('Can not write trace {}: {}'.format(path, err))
    return path


def load_trace(path, store=None):
    """
    Load trace
    Parses a trace CSV. Checkpoint handles resolve against the trace's
    directory unless another store is given.

    :param path: str
    :param store: CheckpointStore or None
    :return: kitchensinks.trace.CheckpointTrace
    """
    if not path or not os.path.isfile(path):
        raise x.TraceError('Trace file not found: {}'.format(path))

    if store is None:
        store = CheckpointStore(os.path.dirname(os.path.abspath(path)))

    with open(path, newline='') as file:
        rows = list(csv.reader(file))

    if not rows or rows[0] != TRACE_HEADER:
        raise x.TraceError('Trace {} has no valid header'.format(path))

    trace = CheckpointTrace(store=store)
    for line, row in enumerate(rows[1:], start=2):
        if len(row) != len(TRACE_HEADER):
            msg = 'Trace line {} has {} columns'
            raise x.TraceError(msg.format(line, len(row)))
        try:
            epoch = int(row[0])
            ppx, acc, entropy, erp = (float(v) for v in row[1:5])
        except ValueError:
            raise x.TraceError('Trace line {} is not numeric'.format(line))
        record = MetricsRecord(ppx, acc, entropy, erp)
        trace.append(TraceEntry(epoch, record, row[5]))
    return trace
