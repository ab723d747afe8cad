"""Exporting the scenario corpus and driving the command line.

Run: python3 demos/07_files_and_cli.py
"""
import json
import tempfile
from contextlib import redirect_stdout
from io import StringIO
from pathlib import Path

from qcorr import io
from qcorr.cli import main
from qcorr.scenarios import export_scenario

with tempfile.TemporaryDirectory() as tmp:
    files = export_scenario("fig2_naive", tmp)
    print("exported:", [Path(f).name for f in files])
    state = io.load_document(io.read_json(Path(tmp) / "fig2_naive.state"))
    print("loaded state amplitudes:", state.amplitudes.round(6))

    # Human-readable output and the exit code (1: not an equilibrium).
    code = main(["qce", "verify", f"{tmp}/fig2_naive.state", f"{tmp}/fig2_naive.game"])
    print("exit code:", code)

    # Machine output parses back into a report object.
    buf = StringIO()
    with redirect_stdout(buf):
        main(["qce", "verify", f"{tmp}/fig2_naive.state", f"{tmp}/fig2_naive.game", "--format", "machine"])
    rep = io.load_document(json.loads(buf.getvalue()))
    print("reloaded report:", rep.verdict, [round(g, 6) for g in rep.gains])

print("\nscenario suite exit code:", main(["scenario", "run", "--all"]))
