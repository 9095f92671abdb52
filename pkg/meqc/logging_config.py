# meqc/logging_config.py
import logging
import os
import sys
from logging.handlers import TimedRotatingFileHandler

from dotenv import load_dotenv

LOG_FORMAT = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"
_HANDLER_TAG = "_meqc_handler"


def setup_logging(log_dir: str | None = None, level: str | None = None) -> logging.Logger:
    load_dotenv()
    log_dir = log_dir or os.getenv("MEQC_LOG_DIR", "logs")
    level = (level or os.getenv("MEQC_LOG_LEVEL", "INFO")).upper()
    os.makedirs(log_dir, exist_ok=True)

    logger = logging.getLogger()
    logger.setLevel(level)
    # repeated calls replace our handlers instead of stacking them
    for handler in [h for h in logger.handlers if getattr(h, _HANDLER_TAG, False)]:
        logger.removeHandler(handler)
        handler.close()

    formatter = logging.Formatter(LOG_FORMAT)

    file_handler = TimedRotatingFileHandler(
        os.path.join(log_dir, "meqc.log"), when="midnight", interval=1, backupCount=14, encoding="utf-8"
    )
    file_handler.suffix = "%Y-%m-%d"
    stream_handler = logging.StreamHandler(sys.stderr)

    for handler in (file_handler, stream_handler):
        handler.setFormatter(formatter)
        setattr(handler, _HANDLER_TAG, True)
        logger.addHandler(handler)
    return logger
