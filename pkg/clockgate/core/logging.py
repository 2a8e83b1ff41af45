import logging
import os
from pathlib import Path

from clockgate.core.config import settings

# Custom APP_INFO level, between INFO (20) and WARNING (30)
APP_INFO = 25
logging.addLevelName(APP_INFO, 'APP_INFO')


def app_info(self, message, *args, **kwargs):
    if self.isEnabledFor(APP_INFO):
        self._log(APP_INFO, message, args, **kwargs)


logging.Logger.app_info = app_info


def resolve_level(level) -> int:
    """
    Translate a level name (including APP_INFO) into its numeric value
    """
    if isinstance(level, int):
        return level
    value = logging.getLevelName(str(level).strip().upper())
    return value if isinstance(value, int) else APP_INFO


def setup_logging(log_file: str = settings.LOG_FILE, level=settings.LOG_LEVEL):
    """
    Configure logging for the package

    Args:
        log_file: Path of the log file
        level: Default logging level (name or number)

    Records go to the log file and to stderr; stdout is left to the command output.
    """
    log_dir = os.path.dirname(log_file)
    if log_dir:
        Path(log_dir).mkdir(parents=True, exist_ok=True)

    logging.basicConfig(
        level=resolve_level(level),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(log_file),
            logging.StreamHandler()
        ],
        force=True,
    )


def get_logger(name: str):
    """
    Get a logger with the given name

    Args:
        name: Logger name

    Returns:
        Logger instance
    """
    return logging.getLogger(name)


# Default logger
setup_logging()
logger = get_logger("clockgate")
