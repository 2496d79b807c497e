"""Run eup-bell straight from the source tree with ``python src``."""
import sys

from eup_bell.runner import cli_main

if __name__ == "__main__":
    sys.exit(cli_main())
