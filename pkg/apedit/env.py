import os
from pathlib import Path

# Runs
DEFAULT_SEED = int(os.getenv("APE_SEED", 1234))
DEFAULT_THREADS = int(os.getenv("APE_THREADS", 1))
OUTPUT_DIR = Path(os.getenv("APE_OUTPUT_DIR", "runs"))

# Edit ops
UNK_PLACEHOLDER = os.getenv("APE_UNK_PLACEHOLDER", "UNK")
