import os

try:
    import sentry_sdk
    from sentry_sdk import capture_exception as _capture_exception
except ImportError:
    sentry_sdk = None
    _capture_exception = None

__all__ = ("init_sentry", "report_exception")

capture_exception = None


def init_sentry():
    """Report unexpected CLI failures when sentry-sdk is installed and SENTRY_DSN is set."""
    global capture_exception
    if sentry_sdk is not None and os.getenv("SENTRY_DSN"):
        sentry_sdk.init(dsn=os.getenv("SENTRY_DSN"), send_default_pii=False)
        capture_exception = _capture_exception


def report_exception(e: BaseException) -> bool:
    if capture_exception is None:
        return False
    capture_exception(e)
    return True
