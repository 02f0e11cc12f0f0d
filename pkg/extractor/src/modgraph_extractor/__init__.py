"""Per-layer activation extractor feeding modgraph run directories."""

from .data import DatasetError, load_dataset, make_toy_dataset
from .extract import ExtractionConfig, ExtractionError, extract_run
from .models import MODELS, build_model

__version__ = "0.1.0"
