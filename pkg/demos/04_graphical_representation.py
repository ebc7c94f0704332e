"""
Points (i, pi(i)) and the diagonal strip
========================================

Writes two SVG scatter plots through the command-line front end: a small
sample where single points are visible, and a large one where the cloud
hugs a strip of width proportional to 1/(1-q).
"""

import sys
from pathlib import Path

from mallows_lab import cli

out = Path(sys.argv[1] if len(sys.argv) > 1 else ".")
out.mkdir(parents=True, exist_ok=True)
for name, args in [
    ("small.svg", ["--n", "25", "--q", "0.7", "--seed", "1"]),
    ("large.svg", ["--n", "10000", "--q", "1-n^-0.8", "--seed", "1"]),
]:
    code = cli.main(["points", *args, "--format", "svg", "--output", str(out / name)])
    print(f"{out / name}: exit {code}")
