import logging
import struct
import numpy as np
from joblib import Parallel, delayed
from kitchensinks import exceptions as x
from kitchensinks.default_kernels import kernel_by_code
from kitchensinks.kernels import KernelSpec

logger = logging.getLogger(__name__)

BANK_MAGIC = b'RFFB'
BANK_VERSION = 1
COMBINED_BANK_VERSION = 2

_HEAD = struct.Struct('<4sI')
_SINGLE = struct.Struct('<BdIIQ')
_COMBINED = struct.Struct('<II')
_BLOCK = struct.Struct('<BdIQ')

TWO_PI = 2.0 * np.pi

# rows per matrix product in the feature map
ROW_BLOCK = 32

# range of random feature counts reported to work for acoustic models
TYPICAL_FEATURES = (2000, 400000)


class BankBlock:
    """
    Bank block
    Everything needed to re-sample one member of a projection bank: kernel,
    number of features and seed.
    """

    def __init__(self, spec, num_features, seed):
        self.spec = spec
        self.num_features = int(num_features)
        self.seed = int(seed)

    def __repr__(self):
        return '<BankBlock spec=[{}] D=[{}] seed=[{}]>'.format(
            self.spec,
            self.num_features,
            self.seed
        )

    def __eq__(self, other):
        if not isinstance(other, BankBlock):
            return NotImplemented
        return (self.spec, self.num_features, self.seed) == \
            (other.spec, other.num_features, other.seed)


class ProjectionBank:
    """
    Projection bank
    Sampled frequencies and phases defining a random Fourier feature map.
    The bank is fixed once sampled and never trained. Frequencies and phases
    are stored in 32-bit; features are computed in 64-bit and stored back
    in 32-bit.
    """

    def __init__(self, frequencies, phases, blocks):
        """
        Create bank from sampled arrays
        :param frequencies: np.ndarray, D x d
        :param phases: np.ndarray, D
        :param blocks: list of BankBlock, members in concatenation order
        """
        frequencies = np.ascontiguousarray(frequencies, dtype=np.float32)
        phases = np.ascontiguousarray(phases, dtype=np.float32)
        if frequencies.ndim != 2 or phases.ndim != 1:
            raise x.DimensionMismatch('Bank expects D x d frequencies '
                                      'and a phase vector of length D')
        if frequencies.shape[0] != phases.shape[0]:
            msg = 'Bank has {} frequency rows but {} phases'
            raise x.DimensionMismatch(msg.format(
                frequencies.shape[0],
                phases.shape[0]
            ))

        blocks = tuple(blocks)
        if sum(b.num_features for b in blocks) != frequencies.shape[0]:
            raise x.DimensionMismatch('Bank blocks do not add up to D')

        frequencies.setflags(write=False)
        phases.setflags(write=False)
        self.frequencies = frequencies
        self.phases = phases
        self.blocks = blocks
        self._frequencies64 = None
        self._phases64 = None

    def __repr__(self):
        return '<ProjectionBank d=[{}] D=[{}] blocks=[{}]>'.format(
            self.input_dim,
            self.num_features,
            len(self.blocks)
        )

    @property
    def input_dim(self):
        return self.frequencies.shape[1]

    @property
    def num_features(self):
        return self.frequencies.shape[0]

    @property
    def spec(self):
        """ Kernel of a single-member bank, None for combined banks """
        return self.blocks[0].spec if len(self.blocks) == 1 else None

    @property
    def seed(self):
        """ Seed of a single-member bank, None for combined banks """
        return self.blocks[0].seed if len(self.blocks) == 1 else None

    @property
    def scale(self):
        """
        Feature scale
        sqrt(2/D). For combined banks every block of size D_j is rescaled
        by sqrt(D_j / sum D), which brings each block to the same overall
        sqrt(2 / sum D), so the combined inner product averages the member
        kernels uniformly.
        """
        return np.sqrt(2.0 / self.num_features)

    @property
    def bound(self):
        """ Largest float32 not above sqrt(2/D) """
        bound = np.float32(self.scale)
        if bound > self.scale:
            bound = np.nextafter(bound, np.float32(0.0))
        return bound

    @property
    def frequencies64(self):
        """ Transposed 64-bit frequencies, d x D, converted once """
        if self._frequencies64 is None:
            self._frequencies64 = np.ascontiguousarray(
                self.frequencies.T,
                dtype=np.float64
            )
        return self._frequencies64

    @property
    def phases64(self):
        if self._phases64 is None:
            self._phases64 = self.phases.astype(np.float64)
        return self._phases64


def _open_uniforms(rng, shape):
    """ Uniform variates in the open interval (0, 1) """
    u = rng.random(shape)
    return np.where(u == 0.0, 0.5 ** 54, u)


def _check_seed(seed):
    try:
        seed = int(seed)
    except (TypeError, ValueError):
        raise x.ConfigurationException('Seed must be an integer')
    if seed < 0 or seed >= 2 ** 64:
        msg = 'Seed must be an unsigned 64-bit integer, got [{}]'
        raise x.ConfigurationException(msg.format(seed))
    return seed


def kernel_exact(spec, x1, x2):
    """
    Exact kernel
    Evaluates a shift-invariant kernel between two vectors in 64-bit.

    :param spec: kitchensinks.kernels.KernelSpec
    :param x1: array-like, vector of length d
    :param x2: array-like, vector of length d
    :return: float in (0, 1]
    """
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    if x1.ndim != 1 or x1.shape != x2.shape:
        msg = 'Kernel arguments must be vectors of equal size, got {} and {}'
        raise x.DimensionMismatch(msg.format(x1.shape, x2.shape))
    return float(spec.exact(x1, x2))


def sample_projection_bank(spec, input_dim, num_features, seed):
    """
    Sample projection bank
    Draws frequencies from the kernel's spectral density and phases from
    Uniform[0, 2 pi). A counter-based Philox generator seeded with `seed`
    produces one uniform stream consumed row-major over the frequency
    matrix, then over phases, so the bank is reproducible from
    (spec, input_dim, num_features, seed) on any platform.

    :param spec: kitchensinks.kernels.KernelSpec
    :param input_dim: int, d
    :param num_features: int, D
    :param seed: int, unsigned seed
    :return: ProjectionBank
    """
    if not isinstance(spec, KernelSpec):
        raise x.ConfigurationException('Bank needs a KernelSpec instance')
    if int(input_dim) < 1 or int(num_features) < 1:
        msg = 'Bank dimensions must be positive, got d={} D={}'
        raise x.ConfigurationException(msg.format(input_dim, num_features))

    input_dim = int(input_dim)
    num_features = int(num_features)
    seed = _check_seed(seed)

    low, high = TYPICAL_FEATURES
    if not low <= num_features <= high:
        logger.debug('D=%d is outside the typical range %d-%d',
                     num_features, low, high)

    rng = np.random.Generator(np.random.Philox(seed))
    uniforms = _open_uniforms(rng, (num_features, input_dim))
    frequencies = spec.frequencies(uniforms).astype(np.float32)

    phases = (TWO_PI * rng.random(num_features)).astype(np.float32)
    phases[phases >= np.float32(TWO_PI)] = np.float32(0.0)

    logger.info('Sampled %s bank: d=%d D=%d seed=%d',
                spec, input_dim, num_features, seed)
    block = BankBlock(spec, num_features, seed)
    return ProjectionBank(frequencies, phases, [block])


def combine_banks(banks):
    """
    Combine banks
    Concatenates member banks into one whose feature map is the
    concatenation of member features, approximating the uniform average
    of the member kernels.

    :param banks: list of ProjectionBank
    :return: ProjectionBank
    """
    banks = list(banks)
    if not banks:
        raise x.ConfigurationException('Can not combine an empty bank list')

    dims = set(bank.input_dim for bank in banks)
    if len(dims) != 1:
        msg = 'Combined banks must share input dimension, got {}'
        raise x.DimensionMismatch(msg.format(sorted(dims)))

    blocks = [block for bank in banks for block in bank.blocks]
    return ProjectionBank(
        np.vstack([bank.frequencies for bank in banks]),
        np.concatenate([bank.phases for bank in banks]),
        blocks
    )


def rebuild_bank(blocks, input_dim):
    """
    Rebuild bank
    Re-samples a (possibly combined) bank from its block table.
    :param blocks: list of BankBlock
    :param input_dim: int, d
    :return: ProjectionBank
    """
    banks = [
        sample_projection_bank(b.spec, input_dim, b.num_features, b.seed)
        for b in blocks
    ]
    return banks[0] if len(banks) == 1 else combine_banks(banks)


def _project(bank, rows):
    """
    Features for a block of rows
    Rows go through the projection in fixed blocks of ROW_BLOCK, the last
    one zero-padded, so every matrix product has the same shape and a
    row's result does not depend on the batch it travels in. Features are
    clipped to the largest float32 not above sqrt(2/D).
    """
    out = np.empty((rows.shape[0], bank.num_features), dtype=np.float32)
    block = np.zeros((ROW_BLOCK, bank.input_dim))
    for start in range(0, rows.shape[0], ROW_BLOCK):
        stop = min(start + ROW_BLOCK, rows.shape[0])
        block[:stop - start] = rows[start:stop]
        block[stop - start:] = 0.0
        projection = block @ bank.frequencies64
        projection += bank.phases64
        np.cos(projection, out=projection)
        projection *= bank.scale
        out[start:stop] = projection[:stop - start]

    bound = bank.bound
    np.clip(out, -bound, bound, out=out)
    return out


def feature_map_batch(bank, features, workers=1, chunk_size=1024):
    """
    Feature map for a matrix of frames
    Row i of the result equals feature_map(bank, features[i]) bit for bit.
    With workers > 1 row chunks are mapped on a thread pool; output does not
    depend on the number of workers.

    :param bank: ProjectionBank
    :param features: np.ndarray, N x d
    :param workers: int, thread count
    :param chunk_size: int, rows per task
    :return: np.ndarray, N x D float32
    """
    rows = np.asarray(features, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] != bank.input_dim:
        msg = 'Expected frames with {} columns, got shape {}'
        raise x.DimensionMismatch(msg.format(bank.input_dim, rows.shape))

    if rows.shape[0] == 0:
        return np.zeros((0, bank.num_features), dtype=np.float32)

    chunks = [
        rows[start:start + chunk_size]
        for start in range(0, rows.shape[0], chunk_size)
    ]
    if workers and workers > 1 and len(chunks) > 1:
        mapped = Parallel(n_jobs=int(workers), prefer='threads')(
            delayed(_project)(bank, chunk) for chunk in chunks
        )
    else:
        mapped = [_project(bank, chunk) for chunk in chunks]
    return np.vstack(mapped)


def feature_map(bank, vector):
    """
    Feature map
    phi_i(x) = sqrt(2/D) cos(w_i^T x + b_i), i = 1..D
    :param bank: ProjectionBank
    :param vector: array-like, length d
    :return: np.ndarray, length D float32
    """
    vector = np.asarray(vector, dtype=np.float64)
    if vector.ndim != 1 or vector.shape[0] != bank.input_dim:
        msg = 'Expected a vector of length {}, got shape {}'
        raise x.DimensionMismatch(msg.format(bank.input_dim, vector.shape))
    return feature_map_batch(bank, vector[None, :])[0]


def approximate_kernel(bank, rows1, rows2=None, workers=1):
    """
    Approximate kernel matrix
    Inner products of random features, accumulated in 64-bit.

    :param bank: ProjectionBank
    :param rows1: np.ndarray, N x d
    :param rows2: np.ndarray, M x d, defaults to rows1
    :param workers: int, thread count for the feature map
    :return: np.ndarray, N x M float64
    """
    phi1 = feature_map_batch(bank, rows1, workers=workers).astype(np.float64)
    if rows2 is None:
        phi2 = phi1
    else:
        phi2 = feature_map_batch(bank, rows2, workers=workers)
        phi2 = phi2.astype(np.float64)
    return phi1 @ phi2.T


# -----------------------------------------------------------------------------
# Serialization
# -----------------------------------------------------------------------------

def pack_blocks(blocks):
    """ Binary block table: count, then family, sigma, D, seed per block """
    data = struct.pack('<I', len(blocks))
    for block in blocks:
        data += _BLOCK.pack(
            block.spec.CODE,
            block.spec.bandwidth,
            block.num_features,
            block.seed
        )
    return data


def unpack_blocks(buffer, offset, allow_empty=False):
    """
    Unpack block table
    :param buffer: bytes
    :param offset: int, where the table starts
    :param allow_empty: bool, accept a table with no blocks
    :return: tuple, (list of BankBlock, offset after the table)
    """
    try:
        count, = struct.unpack_from('<I', buffer, offset)
        offset += 4
        blocks = []
        for _ in range(count):
            code, sigma, num, seed = _BLOCK.unpack_from(buffer, offset)
            offset += _BLOCK.size
            blocks.append(BankBlock(kernel_by_code(code, sigma), num, seed))
    except struct.error:
        raise x.TruncatedFile('Block table is truncated')
    if not blocks and not allow_empty:
        raise x.DataError('Block table is empty')
    return blocks, offset


def bank_to_bytes(bank):
    """
    Bank to bytes
    Single banks use version 1 of the format, combined banks version 2
    with a block table in place of the single kernel header.
    :param bank: ProjectionBank
    :return: bytes
    """
    if len(bank.blocks) == 1:
        block = bank.blocks[0]
        head = _HEAD.pack(BANK_MAGIC, BANK_VERSION) + _SINGLE.pack(
            block.spec.CODE,
            block.spec.bandwidth,
            bank.input_dim,
            bank.num_features,
            block.seed
        )
    else:
        head = _HEAD.pack(BANK_MAGIC, COMBINED_BANK_VERSION)
        head += struct.pack('<II', bank.input_dim, bank.num_features)
        head += pack_blocks(bank.blocks)

    return head \
        + bank.frequencies.astype('<f4').tobytes() \
        + bank.phases.astype('<f4').tobytes()


def bank_from_bytes(buffer):
    """
    Bank from bytes
    :param buffer: bytes
    :return: ProjectionBank
    """
    if len(buffer) < _HEAD.size:
        raise x.TruncatedFile('Bank header is truncated')

    magic, version = _HEAD.unpack_from(buffer, 0)
    if magic != BANK_MAGIC:
        raise x.BadMagic('Not a projection bank file: {!r}'.format(magic))

    offset = _HEAD.size
    try:
        if version == BANK_VERSION:
            code, sigma, d, num, seed = _SINGLE.unpack_from(buffer, offset)
            offset += _SINGLE.size
            blocks = [BankBlock(kernel_by_code(code, sigma), num, seed)]
        elif version == COMBINED_BANK_VERSION:
            d, num = _COMBINED.unpack_from(buffer, offset)
            blocks, offset = unpack_blocks(buffer, offset + _COMBINED.size)
        else:
            msg = 'Unsupported bank format version [{}]'
            raise x.UnsupportedVersion(msg.format(version))
    except struct.error:
        raise x.TruncatedFile('Bank header is truncated')

    expected = offset + 4 * (num * d + num)
    if len(buffer) < expected:
        msg = 'Bank file truncated: expected {} bytes, got {}'
        raise x.TruncatedFile(msg.format(expected, len(buffer)))

    frequencies = np.frombuffer(buffer, '<f4', num * d, offset)
    phases = np.frombuffer(buffer, '<f4', num, offset + 4 * num * d)
    return ProjectionBank(frequencies.reshape(num, d), phases, blocks)


def save_bank(bank, path):
    """ Write bank to a binary file """
    with open(path, 'wb') as file:
        file.write(bank_to_bytes(bank))


def load_bank(path):
    """ Read bank from a binary file """
    with open(path, 'rb') as file:
        return bank_from_bytes(file.read())
