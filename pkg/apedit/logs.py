import logging
import sys

__all__ = ("logs", "init_logs", "TaggedLoggerAdapter")

logs = logging.getLogger("apedit")


_FORMAT = "%(asctime)s [%(levelname)s] %(message)s"
_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def init_logs(level: int = logging.INFO):
    """Attach a single stderr handler; later calls (one per CLI run) rebind it to the current stderr."""
    _handlers = [h for h in logs.handlers if getattr(h, "_apedit", False)]
    if _handlers:
        _handlers[0].stream = sys.stderr  # type: ignore[attr-defined]
    else:
        _stream_handler = logging.StreamHandler()
        _stream_handler.setFormatter(logging.Formatter(_FORMAT, datefmt=_DATE_FORMAT))
        _stream_handler._apedit = True  # type: ignore[attr-defined]
        logs.addHandler(_stream_handler)
    logs.setLevel(level)


class TaggedLoggerAdapter(logging.LoggerAdapter):
    """Prefix every message with a bracketed tag, e.g. `[train chained]` or `[decode 2]`."""

    def process(self, msg, kwargs):
        _tag = self.extra["tag"] if self.extra is not None else "apedit"
        _index = self.extra.get("index") if self.extra is not None else None
        _prefix = _tag if _index is None else f"{_tag} {_index}"
        return f"[{_prefix}] {msg}", kwargs
