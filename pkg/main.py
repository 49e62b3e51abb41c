"""
DAGP - dimensionally-aware symbolic regression experiments
Entry point: loads .env, then hands over to the dagp command line
"""

import sys

from dotenv import load_dotenv


# Load environment variables (LOG_LEVEL, DAGP_OUT, DAGP_JOBS, DAGP_SEED)
load_dotenv()

from dagp.cli import main  # noqa: E402


if __name__ == '__main__':
    sys.exit(main())
