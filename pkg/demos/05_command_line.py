"""
Driving the checks from the command line
========================================

The ``todacurve`` command (also ``python -m todacurve``) runs the same checks
and writes JSON reports or CSV trajectories.  Here it is called in-process.
"""

import json
import os
import tempfile

from todacurve.cli import main

out = tempfile.mkdtemp()

# Verification suite on three seeds; exit status 0 means every check passed.
path = os.path.join(out, "verify.json")
status = main(["--command", "verify", "--n", "5", "--trials", "3", "--out", path])
with open(path) as fh:
    report = json.load(fh)
print("verify exit status:", status, " checks:", len(report["checks"]), " all pass:", report["pass"])
print("first check:", report["checks"][0])

# Bracket checks need more than three vertices: status 2 is a usage error.
print("n=3 exit status:", main(["--command", "verify", "--n", "3"]))

# A trajectory of the hexagon, which is a fixed point of the flow.
path = os.path.join(out, "hexagon.csv")
main(["--command", "simulate", "--preset", "hexagon", "--t-end", "0.05", "--dt", "0.01",
      "--lambda", "0.5", "--format", "csv", "--out", path])
with open(path) as fh:
    print(fh.read())
