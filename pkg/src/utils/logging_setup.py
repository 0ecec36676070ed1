import os
import logging
from datetime import datetime
from typing import Optional

LOG_FORMAT = '%(asctime)s | %(levelname)-8s | %(message)s'


def setup_logger(log_dir: Optional[str] = None, verbose: bool = False) -> logging.Logger:
    """
    Configura el logger raíz: consola a INFO (DEBUG con verbose) y, si hay
    log_dir (o BJLAB_LOG_DIR), un archivo a DEBUG.
    """
    log_dir = log_dir or os.getenv('BJLAB_LOG_DIR')

    logger = logging.getLogger()
    logger.setLevel(logging.DEBUG)

    if not logger.handlers:
        formatter = logging.Formatter(LOG_FORMAT, datefmt='%H:%M:%S')

        ch = logging.StreamHandler()
        ch.setLevel(logging.DEBUG if verbose else logging.INFO)
        ch.setFormatter(formatter)
        logger.addHandler(ch)

        if log_dir:
            os.makedirs(log_dir, exist_ok=True)
            log_file = os.path.join(log_dir, f"bjlab_{datetime.now().strftime('%Y%m%d_%H%M%S')}.log")
            fh = logging.FileHandler(log_file, encoding='utf-8')
            fh.setLevel(logging.DEBUG)
            fh.setFormatter(formatter)
            logger.addHandler(fh)

    return logger
