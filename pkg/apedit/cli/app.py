import json
import logging
import sys
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import Any

from piou import Cli, Option
from pydantic import ValidationError
from rich.console import Console

from apedit import env
from apedit.editops import detokenize
from apedit.errors import ApeError
from apedit.logs import init_logs, logs
from apedit.telemetry.sentry import report_exception
from apedit.utils import load_config_file, merge_config

__all__ = (
    "cli",
    "main",
    "start_run",
    "report_config",
    "write_output",
    "SeedOption",
    "ThreadsOption",
    "ProgressOption",
    "ConfigOption",
)

cli = Cli("Neural automatic post-editing toolkit")

cli.add_option("-v", "--verbose", help="Verbosity")
cli.add_option("-vv", "--verbose2", help="Increased verbosity")


def on_process(verbose: bool = False, verbose2: bool = False):
    init_logs(logging.DEBUG if verbose2 else logging.INFO if verbose else logging.WARNING)


cli.set_options_processor(on_process)

SeedOption = Option(None, "--seed", help=f"Random seed (default {env.DEFAULT_SEED})")
ThreadsOption = Option(env.DEFAULT_THREADS, "--threads", help="Maximum number of worker threads")
ProgressOption = Option(False, "--progress", help="Show progress bar")
ConfigOption = Option(None, "--config", help="TOML run configuration (flat dotted keys)")

_stderr = Console(stderr=True, soft_wrap=True, highlight=False)


def report_config(command: str, values: Mapping[str, Any]):
    """One JSON line on stderr with the effective configuration of the run."""
    _stderr.print(
        json.dumps({"command": command, "seed": values["seed"], "config": dict(values)}, default=str),
        markup=False,
    )


def start_run(command: str, flags: Mapping[str, Any], config_file: Path | None = None) -> dict[str, Any]:
    values = merge_config(load_config_file(config_file), flags)
    values.setdefault("seed", env.DEFAULT_SEED)
    report_config(command, values)
    return values


def write_output(path: Path | None, lines: Iterable[Sequence[str] | str]):
    """Write one line per sentence to `path`, or to stdout when no path is given."""
    _lines = (line if isinstance(line, str) else detokenize(line) for line in lines)
    if path is None:
        for line in _lines:
            sys.stdout.write(line + "\n")
        return
    with path.open("w", encoding="utf-8") as f:
        for line in _lines:
            f.write(line + "\n")


def _report_error(e: Exception):
    _message = " ".join(str(e).split())
    _stderr.print(f"error: {type(e).__name__}: {_message}", markup=False)


def _is_usage_error(e: Exception) -> bool:
    return isinstance(e, (ValueError, ValidationError)) or type(e).__module__.startswith("piou")


def main(args: Sequence[str]) -> int:
    """Run a subcommand; data errors (bad or missing files) exit with 1, usage errors with 2."""
    try:
        cli.run_with_args(*args)
    except (ApeError, OSError) as e:
        _report_error(e)
        return 1
    except SystemExit as e:
        # Argument parsing failures
        return 0 if e.code in (0, None) else 2
    except Exception as e:
        if _is_usage_error(e):
            _report_error(e)
            return 2
        report_exception(e)
        raise
    except KeyboardInterrupt:
        logs.info("Ctrl+C detected, exiting...")
        return 130
    return 0
