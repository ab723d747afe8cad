import json

import numpy as np
import pytest

from qcorr import io
from qcorr.classical import verify_ce
from qcorr.cli import main
from qcorr.games import OutcomeDistribution
from qcorr.quantum import conditional_states, measure_circuit, state_from_terms
from qcorr.scenarios import export_scenario, list_scenarios
from qcorr.scenarios.corpus import (
    envelope_game,
    entry_device,
    entry_game,
    entry_quantum_instance,
    fig1_instance,
    naive_state,
    third_split,
)
from qcorr.quantum.constraints import appendix_d_report


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("corpus")
    for name in list_scenarios():
        export_scenario(name, d)
    return d


def _run(capsys, argv):
    code = main(argv + ["--format", "machine"])
    text = capsys.readouterr().out
    return code, text


# ---------------------------------------------------------------------------
# documents


def _round_trip(doc):
    return io.load_document(json.loads(io.dumps(doc)))


def test_game_round_trips():
    g = envelope_game()
    g2 = _round_trip(io.game_to_json(g))
    assert g2.actions == g.actions and np.array_equal(g2.payoffs, g.payoffs)
    e = entry_game(True)
    assert io.extensive_game_to_json(_round_trip(io.extensive_game_to_json(e))) == io.extensive_game_to_json(e)


def test_state_round_trip_keeps_complex_amplitudes():
    s = state_from_terms({"01": 1, "10": 1j}, (0, 1), normalize=True)
    s2 = _round_trip(io.state_to_json(s))
    assert np.array_equal(s2.amplitudes, s.amplitudes) and s2.partition == s.partition


def test_circuit_and_instance_round_trip():
    inst = entry_quantum_instance()
    doc = io.extensive_circuits_to_json(inst.circuits, inst.mixing)
    circuits, mixing = _round_trip(doc)
    assert io.extensive_circuits_to_json(circuits, mixing) == doc
    inst = fig1_instance()
    back = _round_trip(io.instance_to_json(inst))
    assert io.instance_to_json(back) == io.instance_to_json(inst)
    c = measure_circuit(1, (1, 2), ("a", "b", "c", "d"))
    assert io.circuit_to_json(_round_trip(io.circuit_to_json(c))) == io.circuit_to_json(c)


def test_distribution_device_and_reports_round_trip():
    d = OutcomeDistribution([(("T", "R"), 0.5), (("B", "L"), 0.5)])
    assert _round_trip(io.distribution_to_json(d)).max_difference(d) == 0
    mu = third_split()
    assert _round_trip(io.device_to_json(mu)).max_difference(mu) == 0
    g = entry_game()
    ext = entry_device(g)
    back = io.device_from_json(json.loads(io.dumps(io.device_to_json(ext))), game=g)
    assert back.max_difference(ext) == 0
    rep = verify_ce(envelope_game(), mu)
    back = _round_trip(io.report_to_json(rep))
    assert back.verdict == rep.verdict and back.gains == rep.gains
    cr = appendix_d_report(naive_state())
    assert _round_trip(io.constraint_report_to_json(cr)) == cr


def test_format_errors_name_the_location():
    with pytest.raises(io.FormatError) as e:
        io.parse_text('{"type": "quantum-state",\n "amplitudes": [1, }', "x.state")
    assert e.value.where.startswith("x.state:2:")
    doc = io.state_to_json(naive_state())
    doc["amplitudes"][1] = "oops"
    with pytest.raises(io.FormatError) as e:
        io.load_document(doc)
    assert "amplitudes" in e.value.where
    with pytest.raises(io.FormatError, match="unknown document type"):
        io.load_document({"type": "teapot"})
    with pytest.raises(io.FormatError, match="missing field"):
        io.load_document({"type": "normal-form-game"})


def test_dumps_is_byte_deterministic():
    docs = [io.report_to_json(verify_ce(envelope_game(), third_split())) for _ in range(2)]
    assert io.dumps(docs[0]) == io.dumps(docs[1])


# ---------------------------------------------------------------------------
# command line


def _commands(d):
    return [
        ["ce", "verify", f"{d}/fig4_ce.game", f"{d}/fig4_ce.device"],
        ["ce", "find", f"{d}/fig4_ce.game", "--objective", "welfare"],
        ["efce", "verify", f"{d}/fig3_efce.game", f"{d}/fig3_efce.device"],
        ["ir-efce", "verify", f"{d}/fig3_efce.game", f"{d}/fig3_efce.device"],
        ["to-normal-form", f"{d}/fig3_efce.game"],
        ["qce", "simulate", f"{d}/fig2_naive.state", f"{d}/fig2_naive.game", "--circuits", f"{d}/fig2_naive.circuits"],
        ["qce", "canonicalize", f"{d}/fig2_naive.state", f"{d}/fig2_naive.game",
         "--circuits", f"{d}/fig2_naive.circuits"],
        ["qce", "verify", f"{d}/fig1.state", f"{d}/fig1.game"],
        ["qce", "to-ce", f"{d}/appD1_state.state", f"{d}/appD1_state.game"],
        ["qce", "check-state", f"{d}/appD1_state.state"],
        ["qce", "search", "--restarts", "3"],
        ["qce", "simulate-extensive", f"{d}/appF.state", f"{d}/appF.game", f"{d}/appF.circuits"],
        ["qce", "lookahead", f"{d}/fig3_efce.state", f"{d}/fig3_efce.game", f"{d}/fig3_efce.circuits"],
        ["ghz", "simulate", "--mode", "quantum"],
        ["ghz", "simulate", "--mode", "classical"],
        ["scenario", "list"],
        ["scenario", "run", "fig1"],
        ["scenario", "run", "--all", "--restarts", "5"],
    ]


def test_every_subcommand_output_loads(capsys, corpus_dir, tmp_path):
    cmds = _commands(corpus_dir) + [["scenario", "export", "fig1", "--dir", str(tmp_path)]]
    for argv in cmds:
        code, text = _run(capsys, argv)
        assert code in (0, 1), argv
        doc = json.loads(text)
        io.load_document(doc, " ".join(argv[:2]))


def test_machine_output_is_byte_deterministic(capsys, corpus_dir):
    for argv in _commands(corpus_dir)[:13]:
        first = _run(capsys, argv)
        assert _run(capsys, argv) == first


def test_exit_codes(capsys, corpus_dir, tmp_path):
    d = corpus_dir
    code, text = _run(capsys, ["qce", "verify", f"{d}/fig2_naive.state", f"{d}/fig2_naive.game"])
    assert code == 1
    assert io.load_document(json.loads(text)).gains[0] == pytest.approx(np.sqrt(5) - 1, abs=1e-9)
    assert _run(capsys, ["qce", "verify", f"{d}/fig1.state", f"{d}/fig1.game"])[0] == 0
    assert _run(capsys, ["ce", "verify", str(tmp_path / "missing.game"), f"{d}/fig4_ce.device"])[0] == 2
    # a state file where a game is expected
    assert _run(capsys, ["ce", "verify", f"{d}/fig1.state", f"{d}/fig4_ce.device"])[0] == 2
    assert _run(capsys, ["scenario", "run", "nope"])[0] == 2
    assert _run(capsys, ["no-such-command"])[0] == 2
    assert _run(capsys, ["ghz", "simulate", "--mode", "quantum"])[0] == 0
    assert _run(capsys, ["scenario", "run", "--all"])[0] == 0


def test_out_file_matches_stdout(capsys, corpus_dir, tmp_path):
    out = tmp_path / "rep.json"
    code, text = _run(capsys, ["ce", "verify", f"{corpus_dir}/fig4_ce.game", f"{corpus_dir}/fig4_ce.device",
                               "--out", str(out)])
    assert code == 0
    assert json.loads(out.read_text()) == json.loads(text)


def test_human_output_has_verdict(capsys, corpus_dir):
    code = main(["qce", "verify", f"{corpus_dir}/fig2_naive.state", f"{corpus_dir}/fig2_naive.game"])
    text = capsys.readouterr().out
    assert code == 1
    assert "verdict" in text


def test_qubit_cap_is_enforced(capsys, tmp_path):
    state = state_from_terms({"000": 1}, (0, 1, 1))
    p = tmp_path / "s.state"
    io.write_json(p, io.state_to_json(state))
    assert _run(capsys, ["qce", "check-state", str(p), "--max-qubits", "2"])[0] == 2


def test_conditional_family_from_loaded_files(corpus_dir):
    from qcorr.quantum import canonical_instance

    g = io.load_document(io.read_json(corpus_dir / "fig2_naive.game"))
    s = io.load_document(io.read_json(corpus_dir / "fig2_naive.state"))
    fam = conditional_states(canonical_instance(g, s), 0).by_advice()
    assert fam[("L",)].probability == pytest.approx(1 / 3)
