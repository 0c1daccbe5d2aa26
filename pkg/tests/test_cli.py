import json
import math
import subprocess
import sys

import pytest

from qcorr.cli import main, parse_number
from qcorr.discovery import SearchPoint
from qcorr.pairwise import pair_quantities
from qcorr.states import PRINTED_POINT, counterexample, save_state
from qcorr.tripartite import REPRODUCTION_POLICY, tripartite_report


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_number():
    assert parse_number("3pi/10") == PRINTED_POINT.theta1
    assert parse_number("pi/5") == PRINTED_POINT.theta2
    assert parse_number("-pi/4") == -math.pi / 4
    assert parse_number("2*pi") == 2 * math.pi
    assert parse_number("0.7") == 0.7
    assert parse_number("1/3") == 1 / 3
    with pytest.raises(ValueError):
        parse_number("tau")


def test_pairwise_bell(capsys, tmp_path):
    out_json = tmp_path / "bell.json"
    code, out, _ = run(capsys, "pairwise", "--state", "bell", "--pair", "ab", "--measured", "both",
                       "--json", str(out_json))
    assert code == 0
    assert "2.000000" in out
    env = json.loads(out_json.read_text())
    q = env["payload"]["pair_quantities"]
    assert env["base"] == "bits" and env["seed"] is None
    assert q["mutual_info"] == pytest.approx(2.0, abs=1e-12)
    for side in "ab":
        assert q["j"][side] == pytest.approx(1.0, abs=1e-9)
        assert q["d"][side] == pytest.approx(1.0, abs=1e-9)


def test_pairwise_product_zero(capsys, tmp_path):
    out_json = tmp_path / "p.json"
    code, _, _ = run(capsys, "pairwise", "--state", "product00", "--pair", "ab", "--json", str(out_json))
    q = json.loads(out_json.read_text())["payload"]["pair_quantities"]
    assert code == 0
    assert q["mutual_info"] == 0 and q["concurrence"] == 0 and q["eof"] == 0
    assert max(q["j"].values()) <= 1e-12 and max(q["d"].values()) <= 1e-12


def test_pairwise_counterexample_discrepancy(capsys, tmp_path):
    out_json = tmp_path / "ac.json"
    code, out, _ = run(capsys, "pairwise", "--state", "counterexample:0.1,3pi/10,0.7,pi/5", "--pair", "ac",
                       "--json", str(out_json))
    assert code == 0
    env = json.loads(out_json.read_text())
    rows = {d["quantity"]: d for d in env["discrepancies"]}
    assert rows["E_ac"]["reported"] == 0.11
    assert rows["E_ac"]["computed"] == env["payload"]["pair_quantities"]["eof"]
    assert "E_ac" in out


def test_tripartite_ghz(capsys, tmp_path):
    out_json = tmp_path / "ghz.json"
    code, _, _ = run(capsys, "tripartite", "--state", "ghz", "--policy", "first", "--json", str(out_json))
    rep = json.loads(out_json.read_text())["payload"]["report"]
    assert code == 0
    assert rep["total_information"] == pytest.approx(3, abs=1e-12)
    assert rep["t2"]["value"] == pytest.approx(1, abs=1e-12)
    assert rep["t3"] == pytest.approx(2, abs=1e-12)
    assert abs(rep["gap_delta"]) <= 1e-9
    assert rep["def2"]["split"] is None


def test_tripartite_product_zero(capsys, tmp_path):
    out_json = tmp_path / "p.json"
    run(capsys, "tripartite", "--state", "product000", "--policy", "min", "--json", str(out_json))
    rep = json.loads(out_json.read_text())["payload"]["report"]
    assert rep["total_information"] == 0 and rep["t3"] == 0 and abs(rep["gap_delta"]) <= 1e-12


def test_tripartite_counterexample_gap(capsys, tmp_path):
    out_json = tmp_path / "c.json"
    code, _, _ = run(capsys, "tripartite", "--state", "counterexample:0.125,pi/2,1,3pi/16",
                     "--policy", "reproduction", "--convention", "conv-singleton", "--json", str(out_json))
    rep = json.loads(out_json.read_text())["payload"]["report"]
    assert code == 0
    assert rep["gap_delta"] == pytest.approx(rep["d2"]["value"], abs=1e-6)
    assert rep["d2"]["pair"] == "ac" and rep["gap_delta"] > 1e-3
    assert rep["def2"]["convention"] == "conv-singleton"


def test_convention_required_is_usage_error(capsys):
    code, _, err = run(capsys, "tripartite", "--state", "ghz", "--policy", "first", "--def2-split")
    assert code == 2
    assert "conv-singleton" in err


def test_exit_codes(capsys, tmp_path):
    assert run(capsys, "pairwise", "--state", "nosuch")[0] == 2
    assert run(capsys, "pairwise", "--state", str(tmp_path / "missing.json"))[0] == 3
    assert run(capsys, "tripartite", "--state", "ghz", "--policy", "sideways")[0] == 2
    assert run(capsys, "search", "--steps", "1")[0] == 2
    assert run(capsys, "pairwise")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "pairwise", "--state", str(bad))[0] == 2
    assert run(capsys, "pairwise", "--state", "bell", "--json", str(tmp_path / "no" / "x.json"))[0] == 3


def test_state_file_input_and_replay(capsys, tmp_path):
    s = counterexample(PRINTED_POINT)
    path = tmp_path / "ce.json"
    save_state(s, path)
    out_json = tmp_path / "rep.json"
    run(capsys, "tripartite", "--state", str(path), "--policy", "reproduction", "--json", str(out_json))
    rep = json.loads(out_json.read_text())["payload"]["report"]
    direct = tripartite_report(s, REPRODUCTION_POLICY).to_dict()
    assert rep["gap_delta"] == direct["gap_delta"]
    assert rep["t2"] == direct["t2"]
    assert rep["pairwise"] == json.loads(json.dumps(direct["pairwise"]))
    assert pair_quantities(s, "ab").mutual_info == rep["pairwise"][0]["mutual_info"]


def test_reproduce(capsys, tmp_path):
    out_json = tmp_path / "r.json"
    code, out, _ = run(capsys, "reproduce", "--json", str(out_json), "--literal-purification")
    env = json.loads(out_json.read_text())
    p = env["payload"]
    assert code == 0
    assert all(p["structural"].values())
    assert p["purification"]["corrected"]["trace_distance"] <= 1e-12
    assert p["purification"]["literal"]["trace_distance"] > 0.01
    zero = next(c for c in p["claim_chain"]["claims"] if c["name"] == "zero_discord_on_b")
    assert zero["values"]["D_ab|b"] <= 1e-6 and zero["values"]["D_bc|b"] <= 1e-6
    assert [d["quantity"] for d in env["discrepancies"]] == ["I_ab", "I_ac", "I_bc", "E_ac"]
    assert "literal_purification_reduced_state" in p
    assert "seconds" in env["timing"] and env["seed"] == 0


def test_search_envelope_and_verify(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(capsys, "search", "--mode", "family-grid", "--steps", "3", "--json", str(a))[0] == 0
    assert run(capsys, "search", "--mode", "family-grid", "--steps", "3", "--threads", "2", "--json", str(b))[0] == 0
    pa, pb = (json.loads(x.read_text())["payload"] for x in (a, b))
    assert pa == pb
    assert run(capsys, "verify", "--report", str(a))[0] == 0
    env = json.loads(a.read_text())
    point = SearchPoint.from_dict(env["payload"]["best"])
    env["payload"]["best"]["gap_delta"] = point.gap + 0.05
    a.write_text(json.dumps(env))
    assert run(capsys, "verify", "--report", str(a))[0] == 1


def test_search_no_valid_point_exit_zero(capsys, tmp_path):
    out_json = tmp_path / "n.json"
    code, out, _ = run(capsys, "search", "--mode", "family-random", "--samples", "5", "--json", str(out_json))
    assert code == 0
    assert "no_valid_point" in json.loads(out_json.read_text())["payload"]


def test_search_mixed_rank1_seed7(capsys, tmp_path):
    out_json = tmp_path / "m.json"
    code, _, _ = run(capsys, "search", "--mode", "mixed-random", "--samples", "200", "--rank", "1",
                     "--seed", "7", "--json", str(out_json))
    env = json.loads(out_json.read_text())
    assert code == 0 and env["seed"] == 7
    assert env["payload"]["max_abs_gap"] <= 1e-3


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qcorr.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "qcorr" in proc.stdout
