from __future__ import annotations

import logging

FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def setup_logging(level: str | int = "WARNING") -> None:
	root = logging.getLogger("lincat")
	if isinstance(level, str):
		level = logging.getLevelName(level.upper())
	root.setLevel(level)
	if not root.handlers:
		handler = logging.StreamHandler()
		handler.setFormatter(logging.Formatter(FORMAT))
		root.addHandler(handler)
