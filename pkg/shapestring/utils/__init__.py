from .config import RunConfig, get_config
from .logger import setup_logging, get_structured_logger

__all__ = [
    'RunConfig',
    'get_config',
    'setup_logging',
    'get_structured_logger',
]
