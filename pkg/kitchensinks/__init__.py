from .kernels import KernelSpec, GaussianRBF, Laplacian
from .bank import ProjectionBank, sample_projection_bank, combine_banks
from .bank import feature_map, feature_map_batch
from .config import TrainConfig, ModelConfig
from .model import Model, init_model
from .data import FrameDataset, load_dataset
from .trainer import train, sgd_step
from .selection import select_checkpoint
