"""Video-to-landmarks extraction feeding the nextround ingestion contract."""

from .config import CHANNELS, DEFAULT_INDEX_MAP, ExtractionConfig, load_index_map
from .errors import ExtractionError, InputError
from .extract import ExtractionResult, extract

__version__ = "0.1.0"

__all__ = [
    "CHANNELS",
    "DEFAULT_INDEX_MAP",
    "ExtractionConfig",
    "ExtractionResult",
    "ExtractionError",
    "InputError",
    "extract",
    "load_index_map",
    "__version__",
]
