# src/utils/logger.py
import logging
import os
import sys
from datetime import datetime

FILE_LOGGER_NAME = 'cso_mlmc.file'
CONSOLE_LOGGER_NAME = 'cso_mlmc.console'
LOG_DIR_ENV = 'CSO_MLMC_LOG_DIR'

class CustomTimeFormatter(logging.Formatter):
    """
    Formatter writing timestamps as 'YYYY-MM-DD HH:MM:SS'.

    Experiment logs are compared across runs, so the timestamp format is fixed
    rather than taken from the locale.
    """

    def formatTime(self, record, datefmt=None):
        """
        Format the timestamp for a log record.

        Args:
            record (logging.LogRecord): The log record to format.
            datefmt (str, optional): Ignored.

        Returns:
            str: Formatted timestamp string.
        """
        return datetime.fromtimestamp(record.created).strftime('%Y-%m-%d %H:%M:%S')

class UTF8StreamHandler(logging.StreamHandler):
    """
    Stream handler that survives consoles which cannot encode a character
    (Greek letters such as β and τ show up in run summaries).
    """

    def emit(self, record):
        try:
            msg = self.format(record)
            stream = self.stream
            stream.write(msg)
            stream.write(self.terminator)
            self.flush()
        except UnicodeEncodeError:
            encoding = getattr(self.stream, 'encoding', None) or 'ascii'
            msg = self.format(record).encode(encoding, errors='replace').decode(encoding)
            self.stream.write(msg)
            self.stream.write(self.terminator)
            self.flush()
        except Exception:
            self.handleError(record)

def _resolve_log_dir(log_dir: str | None) -> str:
    return log_dir or os.environ.get(LOG_DIR_ENV, 'logs')

def setup_logging(log_file: str = 'all_logs.log',
                  file_level: int = logging.INFO,
                  console_level: int = logging.INFO,
                  log_dir: str | None = None) -> tuple[logging.Logger, logging.Logger]:
    """
    Set up the file logger and the console logger.

    The file logger receives detailed records (module name, level, message);
    the console logger prints a short form and propagates to the file handler
    on the root logger. Calling this function again replaces the handlers
    instead of stacking duplicates, so CLI flags can change levels after the
    import-time setup.

    Args:
        log_file (str): Name of the log file inside the log directory.
        file_level (int): Logging level for the file handler.
        console_level (int): Logging level for the console handler.
        log_dir (str | None): Directory for the log file. Defaults to the
            CSO_MLMC_LOG_DIR environment variable, then 'logs'.

    Returns:
        tuple[logging.Logger, logging.Logger]: (file_logger, console_logger).
    """
    directory = _resolve_log_dir(log_dir)
    root_logger = logging.getLogger()
    root_logger.setLevel(logging.DEBUG)

    for handler in list(root_logger.handlers):
        if getattr(handler, '_cso_mlmc', False):
            root_logger.removeHandler(handler)
            handler.close()

    try:
        os.makedirs(directory, exist_ok=True)
        file_handler = logging.FileHandler(os.path.join(directory, log_file), encoding='utf-8')
        file_handler.setLevel(file_level)
        file_handler.setFormatter(CustomTimeFormatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s'))
        file_handler._cso_mlmc = True
        root_logger.addHandler(file_handler)
    except OSError as e:
        print(f"Warning: Unable to create log file in '{directory}'. {e}", file=sys.stderr)

    file_logger = logging.getLogger(FILE_LOGGER_NAME)
    console_logger = logging.getLogger(CONSOLE_LOGGER_NAME)

    for handler in list(console_logger.handlers):
        console_logger.removeHandler(handler)
    console_handler = UTF8StreamHandler(sys.stdout)
    console_handler.setLevel(console_level)
    console_handler.setFormatter(logging.Formatter('%(asctime)s - %(levelname)s - %(message)s', datefmt='%H:%M:%S'))
    console_logger.addHandler(console_handler)
    console_logger.propagate = True

    return file_logger, console_logger

def set_console_level(level: int) -> None:
    """Change the level of the console handlers, e.g. for a --verbose flag."""
    for handler in logging.getLogger(CONSOLE_LOGGER_NAME).handlers:
        handler.setLevel(level)

def get_module_logger(module_name: str) -> logging.Logger:
    """
    Get a logger for a specific module.

    Args:
        module_name (str): Name of the module, usually __name__.

    Returns:
        logging.Logger: Logger instance for the module.
    """
    return logging.getLogger(module_name)

logger, console_logger = setup_logging()
