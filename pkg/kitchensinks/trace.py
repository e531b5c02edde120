import os
from kitchensinks import exceptions as x
from kitchensinks.model import model_to_bytes, model_from_bytes

CHECKPOINT_NAME = 'ckpt_epoch{}.rksm'


class CheckpointStore:
    """
    Checkpoint store
    Resolves checkpoint handles to models. With a directory, checkpoints
    are files named ckpt_epoch{N}.rksm; without one they are kept as
    serialized bytes in memory, so both modes go through the same format.
    """

    def __init__(self, directory=None):
        """
        Initialize store
        :param directory: str, run directory or None for in-memory store
        """
        self.directory = directory
        self._memory = dict()
        if directory:
            os.makedirs(directory, exist_ok=True)

    def __repr__(self):
        where = self.directory if self.directory else 'memory'
        return '<CheckpointStore [{}]>'.format(where)

    def path(self, handle):
        return os.path.join(self.directory, handle)

    def save(self, model, epoch):
        """
        Save model as checkpoint of an epoch
        :param model: kitchensinks.model.Model
        :param epoch: int
        :return: str, checkpoint handle
        """
        handle = CHECKPOINT_NAME.format(epoch)
        data = model_to_bytes(model)
        if self.directory:
            with open(self.path(handle), 'wb') as file:
                file.write(data)
        else:
            self._memory[handle] = data
        return handle

    def exists(self, handle):
        if self.directory:
            return os.path.isfile(self.path(handle))
        return handle in self._memory

    def load(self, handle):
        """
        Load checkpoint
        :param handle: str
        :return: kitchensinks.model.Model
        """
        if not self.exists(handle):
            msg = 'Checkpoint [{}] can not be resolved in {}'
            raise x.TraceError(msg.format(handle, self))

        if self.directory:
            with open(self.path(handle), 'rb') as file:
                return model_from_bytes(file.read())
        return model_from_bytes(self._memory[handle])


class TraceEntry:
    """
    Trace entry
    Held-out metrics of one evaluated epoch and the handle of the model
    saved at that point. Learning rate and training loss are kept in
    memory only.
    """

    def __init__(
        self,
        epoch,
        record,
        checkpoint,
        learning_rate=None,
        train_loss=None):
        self.epoch = int(epoch)
        self.record = record
        self.checkpoint = checkpoint
        self.learning_rate = learning_rate
        self.train_loss = train_loss

    def __repr__(self):
        return '<TraceEntry epoch=[{}] checkpoint=[{}] {}>'.format(
            self.epoch,
            self.checkpoint,
            self.record
        )


class CheckpointTrace:
    """
    Checkpoint trace
    Ordered per-epoch held-out metrics of one training run with their
    checkpoints, plus a snapshot of the configuration that produced them.
    """

    def __init__(self, config=None, store=None):
        """
        Initialize trace
        :param config: dict, configuration snapshot
        :param store: CheckpointStore resolving the entries' handles
        """
        self.entries = []
        self.config = config if config else dict()
        self.store = store if store else CheckpointStore()

    def __repr__(self):
        return '<CheckpointTrace entries=[{}]>'.format(len(self.entries))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, item):
        return self.entries[item]

    def append(self, entry):
        """ Append entry, epochs must be strictly increasing """
        if self.entries and entry.epoch <= self.entries[-1].epoch:
            msg = 'Trace epochs must increase: {} after {}'
            raise x.TraceError(msg.format(entry.epoch,
                                          self.entries[-1].epoch))
        self.entries.append(entry)
        return self

    def epochs(self):
        return [entry.epoch for entry in self.entries]

    def resolve(self, entry):
        """ Load the model saved for an entry """
        return self.store.load(entry.checkpoint)
