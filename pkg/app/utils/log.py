import logging

_FORMAT = "[%(levelname)s] %(name)s: %(message)s"


def configure_logging(level: str = "INFO") -> None:
    """Configure root logging once (CLI entry point calls this)."""
    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO), format=_FORMAT, force=True)
