import logging
from typing import Any

import orjson

from gfd.common.config import settings


def get_logger(name: str) -> logging.Logger:
    logger = logging.getLogger(name)
    if not logger.handlers:
        handler = logging.StreamHandler()
        formatter = logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s")
        handler.setFormatter(formatter)
        logger.addHandler(handler)
        logger.setLevel(settings.log_level.upper())
    return logger


def log_event(logger: logging.Logger, event: str, level: int = logging.INFO, **fields: Any) -> None:
    """Emit one structured record: ``{"event": ..., **fields}`` as compact JSON."""
    if not logger.isEnabledFor(level):
        return
    record = {"event": event, **fields}
    logger.log(level, orjson.dumps(record, option=orjson.OPT_SERIALIZE_NUMPY, default=str).decode())
