"""Build identification stamped into every run's metadata.

The identifier combines the package version with the source revision so
any output file can be traced back to the exact code that produced it.
The revision comes from CROWDKIT_REVISION when set (release pipelines),
otherwise from the git checkout the package runs from.
"""

from __future__ import annotations

import os
import subprocess
from functools import lru_cache

__version__ = "0.1.0"


def source_revision() -> str:
    env = os.environ.get("CROWDKIT_REVISION")
    if env:
        return env
    return _git_revision()


@lru_cache(maxsize=1)
def _git_revision() -> str:
    try:
        out = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            cwd=os.path.dirname(os.path.abspath(__file__)),
            capture_output=True, text=True, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    return "unknown"


def build_identifier() -> str:
    return f"crowdkit-{__version__}+{source_revision()}"
