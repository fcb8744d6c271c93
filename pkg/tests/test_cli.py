import io
import json

import pytest

from surprises.cli import RunConfig, run
from surprises.errors import ScenarioError

SIGMA2_TEXT = "obs 0: a\nobs 5: a | c\nobs 10: b\nobs 15: !a | !b\nobs 20: !c\n"
SIGMA4_TEXT = "tmax 20\nobs 0: a\nobs 15: b\nobs 20: !a | !b\nfluent a { p0=0.3, eps=0.0001 }\nfluent b { p0=0.6, eps=0.0001 }\n"


@pytest.fixture
def write(tmp_path):
    def _write(name, text):
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return str(p)

    return _write


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), out=out)
    return code, out.getvalue()


def test_explain_sigma2_text(write):
    code, out = call("explain", write("s2.scn", SIGMA2_TEXT))
    assert code == 0
    assert "{a changed within (0,5], c changed within (5,20]}  coverage 75" in out
    assert "{a changed within (5,15]}  coverage 10" in out
    assert "{b changed within (10,15]}  coverage 5" in out


def test_explain_sigma2_json(write):
    code, out = call("explain", write("s2.scn", SIGMA2_TEXT), "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["tmax"] == 20 and doc["warnings"] == []
    assert [e["coverage"] for e in doc["explanations"]] == [75, 10, 5]
    assert doc["explanations"][0]["surprises"] == [
        {"fluent": "a", "from": 0, "to": 5},
        {"fluent": "c", "from": 5, "to": 20},
    ]


def test_negative_fluents_render(write):
    path = write("neg.scn", "obs 0: !a\nobs 3: a\n")
    assert "¬a changed within (0,3]" in call("explain", path)[1]
    doc = json.loads(call("explain", path, "--format", "json")[1])
    assert doc["explanations"][0]["surprises"][0]["fluent"] == "!a"


def test_rank_sigma4_approx(write):
    path = write("s4.scn", SIGMA4_TEXT)
    code, out = call("rank", path, "--method", "approx", "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert [e["posterior_approx"] for e in doc["explanations"]] == [0.8, 0.2]
    assert all("posterior_exact" not in e for e in doc["explanations"])


def test_rank_text_and_json_agree(write):
    path = write("s4.scn", SIGMA4_TEXT)
    text = call("rank", path)[1]
    doc = json.loads(call("rank", path, "--format", "json")[1])
    for e in doc["explanations"]:
        assert f"approx {e['posterior_approx']}" in text and f"exact {e['posterior_exact']}" in text


def test_json_is_byte_stable(write):
    path = write("s2.scn", SIGMA2_TEXT)
    first = call("rank", path, "--format", "json")[1]
    assert first == call("rank", path, "--format", "json")[1]
    for e in json.loads(first)["explanations"]:
        for key in ("posterior_approx", "posterior_exact"):
            assert len(repr(e[key]).replace(".", "").lstrip("0")) <= 13


def test_empty_scenario(write):
    code, out = call("explain", write("empty.scn", ""))
    assert code == 0 and "{∅} — scenario consistent with full persistence" in out


def test_both_method_turns_refusal_into_warning(write):
    path = write("s2.scn", SIGMA2_TEXT)
    code, out = call("rank", path, "--epsilon", "0.01", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and any("approx skipped" in w for w in doc["warnings"])
    assert all("posterior_exact" in e and "posterior_approx" not in e for e in doc["explanations"])
    assert call("rank", path, "--epsilon", "0.01", "--method", "approx")[0] == 1


def test_errors_exit_one(write, capsys):
    assert call("explain", write("bad.scn", "obs 0: a &\n"))[0] == 1
    assert "line 1, column 11" in capsys.readouterr().err
    assert call("explain", "/nonexistent/file.scn")[0] == 1
    assert call("rank", write("s.scn", "obs 0: a\n"), "--epsilon", "2")[0] == 1
    with pytest.raises(ScenarioError):
        RunConfig("rank", "x", epsilon_override=-0.5)


def test_dump_cnf_goes_to_stderr(write, capsys):
    code, out = call("explain", write("s1.scn", "obs 0: a & b\nobs 5: !a\n"), "--dump-cnf")
    err = capsys.readouterr().err
    assert code == 0 and "p cnf 3 6" in err and "p cnf" not in out


def test_check_file(write):
    code, out = call("check", write("s1.scn", "obs 0: a & b\nobs 5: !a\nfluent a { p0=0.4, eps=0.2 }\n"))
    assert code == 0 and out.startswith("PASS cme") and "FAIL" not in out


def test_check_scale_error(write):
    assert call("check", write("big.scn", SIGMA2_TEXT))[0] == 1


def test_check_random():
    code, out = call("check", "--random", "15", "--seed", "4")
    assert code == 0 and out.strip() == "PASS: 15/15 random scenarios agree (seed 4)"


def test_check_needs_one_source():
    with pytest.raises(SystemExit):
        call("check")


def test_module_entry_point(write):
    import subprocess
    import sys

    proc = subprocess.run(
        [sys.executable, "-m", "surprises", "explain", write("s1.scn", "obs 0: a & b\nobs 5: !a\n")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and "{a changed within (0,5]}  coverage 5" in proc.stdout
