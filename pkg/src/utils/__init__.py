# src/utils/__init__.py

from .logger import logger, console_logger