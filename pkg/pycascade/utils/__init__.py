"""Utility functions and helpers"""

from pycascade.utils.serializer import Serializer, build_manifest
from pycascade.utils.logger import setup_logger, get_logger

__all__ = ["Serializer", "build_manifest", "setup_logger", "get_logger"]
