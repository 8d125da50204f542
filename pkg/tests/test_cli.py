import csv
import io
import json

import pytest

from picpos.cli import (
    CheckRequest,
    GridTooLarge,
    InputError,
    SweepRequest,
    load_document,
    main,
    run_check,
    run_sweep,
)


def statuses(report):
    return {v["property"]: v["status"] for v in report["verdicts"]}


def texts(verdict):
    return [q["text"] for q in verdict["details"]]


def call(argv):
    buf = io.StringIO()
    code = main(argv, out=buf)
    return code, buf.getvalue()


def test_check_optimal_example():
    req = CheckRequest.from_doc({"e": 4, "r": 17, "d": 11, "mults": "3x13,1x4", "properties": ["ample"]})
    report = run_check(req)
    assert report["schema"] == 1
    (v,) = report["verdicts"]
    assert v["status"] == "Negative"
    assert "L^2 = 0 > 0 [fails]" in texts(v)


def test_check_points_example():
    req = CheckRequest.from_doc({"e": 3, "r": 10, "d": 24, "m": 7, "k": 1, "positive_genus": "yes",
                                 "properties": ["globally_generated", "k_very_ample"]})
    s = statuses(run_check(req))
    assert s == {"GloballyGenerated": "Positive", "KVeryAmple": "Negative"}


def test_check_final_example_d34():
    report = run_check(CheckRequest.from_doc({"e": 5, "r": 31, "d": 34, "m": 5, "k": 5}))
    kva = next(v for v in report["verdicts"] if v["property"] == "KVeryAmple")
    assert kva["status"] == "Unknown"
    assert any("N.C1 = -1 < 0" in a for a in kva["annotations"])


def test_uniform_shorthand_expands():
    req = CheckRequest.from_doc({"e": 3, "r": 4, "d": 5, "m": 1, "properties": "nef"})
    assert req.to_doc()["mults"] == [1, 1, 1, 1]


@pytest.mark.parametrize("doc", [
    {"e": 3, "r": 10, "d": 7, "m": 2},
    {"e": 3, "r": 10, "d": 24, "m": 7, "k": 1, "positive_genus": "yes"},
    {"e": 4, "r": 17, "d": 11, "mults": [3] * 13 + [1] * 4, "has_e_collinear": "yes"},
    {"e": 2, "r": 7, "d": 5, "m": 1, "k": 1, "oracle": {"f_max": 3, "n_max": 3}},
])
def test_report_round_trip(doc):
    first = run_check(CheckRequest.from_doc(doc))
    again = run_check(CheckRequest.from_doc(json.loads(json.dumps(first["request"]))))
    assert again == first


@pytest.mark.parametrize("doc,field", [
    ({"r": 3, "d": 1, "m": 0}, "'e'"),
    ({"e": 1, "r": 3, "d": 1}, "'m' or 'mults'"),
    ({"e": 1, "r": 3, "d": 1, "mults": [1, 1]}, "'mults'"),
    ({"e": 1, "r": 3, "d": "x", "m": 1}, "'d'"),
    ({"e": 1, "r": 3, "d": 1, "m": 1, "properties": ["k_very_ample"]}, "'k'"),
    ({"e": 1, "r": 3, "d": 1, "m": 1, "k": 1, "properties": ["ample"]}, "'k'"),
    ({"e": 1, "r": 3, "d": 1, "m": 1, "properties": ["big"]}, "'properties'"),
    ({"e": 1, "r": 3, "d": 1, "m": 1, "positive_genus": "maybe"}, "'positive_genus'"),
])
def test_bad_requests_name_the_field(doc, field):
    with pytest.raises(InputError, match=field):
        CheckRequest.from_doc(doc)


def final_sweep(**extra):
    doc = {"e": 5, "r": 31, "m": 5, "k": 5, "d": "30:40", "positive_genus": "yes"}
    doc.update(extra)
    return SweepRequest.from_doc(doc)


def test_sweep_final_family():
    rows = list(csv.DictReader(io.StringIO(run_sweep(final_sweep()))))
    assert [int(r["d"]) for r in rows] == list(range(30, 41))
    kva = {int(r["d"]): r["k_very_ample"] for r in rows}
    assert all(kva[d] == "Negative" for d in range(30, 33))
    assert kva[33] == kva[34] == "Unknown"
    assert all(kva[d] == "Positive" for d in range(35, 41))


def test_sweep_parallel_matches_serial():
    req = final_sweep(d="20:45", m="4:5")
    assert run_sweep(req, workers=3) == run_sweep(req)


def test_sweep_jsonl():
    lines = run_sweep(final_sweep(format="jsonl", d="35:36")).splitlines()
    assert [json.loads(s)["k_very_ample"] for s in lines] == ["Positive", "Positive"]


def test_single_point_sweep_equals_check():
    rows = list(csv.DictReader(io.StringIO(run_sweep(final_sweep(d=33)))))
    assert len(rows) == 1
    report = run_check(CheckRequest.from_doc({"e": 5, "r": 31, "d": 33, "m": 5, "k": 5, "positive_genus": "yes"}))
    by_prop = {v["property"]: v["status"] for v in report["verdicts"]}
    assert rows[0]["ample"] == by_prop["Ample"]
    assert rows[0]["nef"] == by_prop["Nef"]
    assert rows[0]["effective"] == by_prop["Effective"]
    assert rows[0]["globally_generated"] == by_prop["GloballyGenerated"]
    assert rows[0]["k_very_ample"] == by_prop["KVeryAmple"]


def test_sweep_row_order_is_lexicographic():
    req = SweepRequest.from_doc({"e": "2:3", "r": "9:10", "m": 1, "d": "4:5"})
    rows = list(csv.DictReader(io.StringIO(run_sweep(req))))
    keys = [tuple(int(r[a]) for a in ("d", "m", "r", "e")) for r in rows]
    assert keys == sorted(keys) and len(keys) == 8


def test_empty_range_gives_header_only():
    out = run_sweep(final_sweep(d="40:30"))
    assert out.splitlines() == ["d,m,r,e,k,effective,nef,ample,globally_generated,k_very_ample,error"]


def test_grid_cap(monkeypatch):
    monkeypatch.setenv("PICPOS_GRID_CAP", "5")
    with pytest.raises(GridTooLarge) as info:
        run_sweep(final_sweep())
    assert info.value.required == 11 and info.value.cap == 5
    assert call(["sweep", "--e", "5", "--r", "31", "--m", "5", "--d", "30:40"])[0] == 2


def test_sweep_invalid_context_row():
    out = run_sweep(SweepRequest.from_doc({"e": 3, "r": "2:3", "m": 1, "d": 5, "collinear": "yes"}))
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows[0]["ample"] == "Invalid" and rows[0]["error"]
    assert rows[1]["ample"] != "Invalid"


def test_json_and_toml_files(tmp_path):
    j = tmp_path / "req.json"
    j.write_text(json.dumps({"e": 3, "r": 10, "d": 7, "m": 2, "properties": ["ample"]}))
    t = tmp_path / "req.toml"
    t.write_text('e = 3\nr = 10\nd = 7\nm = 2\nproperties = ["ample"]\n')
    assert load_document(j) == load_document(t)
    code, out = call(["check", str(t)])
    assert code == 0 and statuses(json.loads(out)) == {"Ample": "Positive"}


def test_parse_errors_exit_2_with_location(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"e": 3,\n "r": }\n')
    assert call(["check", str(bad)])[0] == 2
    assert "line 2" in capsys.readouterr().err
    bad = tmp_path / "bad.toml"
    bad.write_text("e = 3\nr = = 4\n")
    assert call(["check", str(bad)])[0] == 2
    assert "line 2" in capsys.readouterr().err
    assert call(["check", "--e", "3", "--r", "10", "--d", "7"])[0] == 2
    assert "'m' or 'mults'" in capsys.readouterr().err


def test_exit_status_ignores_polarity():
    code, out = call(["check", "--e", "4", "--r", "17", "--d", "11", "--mults", "3x13,1x4",
                      "--properties", "ample"])
    assert code == 0 and statuses(json.loads(out)) == {"Ample": "Negative"}


def test_expect_assertions(capsys):
    base = ["check", "--e", "3", "--r", "10", "--d", "7", "--m", "2", "--properties", "ample,nef"]
    assert call(base + ["--expect", "ample=Positive", "--expect", "nef=positive"])[0] == 0
    assert call(base + ["--expect", "ample=Negative"])[0] == 1
    assert "expected Negative, got Positive" in capsys.readouterr().err
    assert call(base + ["--expect", "effective=Positive"])[0] == 1
    assert call(base + ["--expect", "ample"])[0] == 2


def test_pretty_output():
    code, out = call(["check", "--e", "3", "--r", "10", "--d", "7", "--m", "2", "--pretty",
                      "--positive-genus", "yes", "--properties", "globally_generated"])
    assert code == 0
    assert "GloballyGenerated    Negative" in out
    assert "L.C1 = 1 < k+2 = 2 [holds]" in out


def test_check_with_oracle_block():
    code, out = call(["check", "--e", "2", "--r", "7", "--d", "5", "--m", "1", "--k", "1",
                      "--f-max", "4", "--n-max", "7"])
    oracle = json.loads(out)["oracle"]
    assert code == 0 and oracle["f_max"] == 4
    assert not oracle["any_n_at_least_r"] and not oracle["any_D.C1_nonneg"]


def test_certify_effective_command():
    code, out = call(["certify-effective", "--e", "3", "--r", "10", "--d", "9", "--mults", "3x3,2x7"])
    (v,) = json.loads(out)["verdicts"]
    assert code == 0 and v["status"] == "Positive" and v["certificate"]["terms"]


def test_standardize_command():
    code, out = call(["standardize", "--e", "3", "--r", "10", "--d", "8", "--mults", "3x3,2x7"])
    trace = json.loads(out)["trace"]
    assert code == 0 and trace["outcome"] == "Excellent"
    assert trace["final"] == {"d": 7, "mults": [2] * 10}
    assert trace["steps"] == [{"cremona": [1, 2, 3]}]
    # wrong e is a precondition failure
    assert call(["standardize", "--e", "4", "--r", "10", "--d", "8", "--m", "2"])[0] == 2


def test_orbit_search_command():
    code, out = call(["orbit-search", "--e", "4", "--r", "18", "--d", "10", "--mults", "3x3,2x15"])
    search = json.loads(out)["search"]
    assert code == 0 and search["result"] == "NotFoundWithinBound"
    assert search["stats"]["frontier_exhausted"]


def test_oracle_enumerate_command():
    code, out = call(["oracle", "enumerate", "--e", "3", "--r", "10", "--d", "7", "--m", "2"])
    oracle = json.loads(out)["oracle"]
    assert code == 0 and oracle["count"] == 1
    assert oracle["candidates"][0]["f"] == 3
    code, out = call(["oracle", "enumerate", "--as-adjoint", "--e", "3", "--r", "10", "--d", "10",
                      "--m", "3"])
    assert json.loads(out)["oracle"] == oracle | {"N": json.loads(out)["oracle"]["N"]}
