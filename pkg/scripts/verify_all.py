"""Run every acceptance suite and write the rows to a CSV (same as `extremal-lab verify`)."""
import sys

from extremal_lab.cli import main

if __name__ == "__main__":
    sys.argv = ["extremal-lab", "verify", *sys.argv[1:]]
    main()
