"""Run only the acceptance criteria and show their verdicts."""
import sys

import pytest

if __name__ == "__main__":
    sys.exit(pytest.main(["-m", "acceptance", "-q", "-s", *sys.argv[1:]]))
