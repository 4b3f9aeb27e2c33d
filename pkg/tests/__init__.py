import logging

from netmark.cli import LOG_FORMAT

logging.basicConfig(format=LOG_FORMAT, level=logging.INFO)
