"""Run the acceptance suite and print one line per criterion."""
import sys

import pytest

if __name__ == "__main__":
    sys.exit(pytest.main(["-q", "tests/test_acceptance.py", *sys.argv[1:]]))
