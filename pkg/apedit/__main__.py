import sys

from apedit.cli import main
from apedit.telemetry.sentry import init_sentry

init_sentry()

if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
