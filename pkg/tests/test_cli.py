"""Command-line interface: JSON documents, exit codes, determinism.

Conventions under test: one JSON document per invocation on stdout (or
--output), progress only on stderr, exit 0 iff every check passed, exit 2
with an {"error": ...} document on rejected inputs, and byte-identical
documents for the same inputs and seed once timing fields are stripped.
"""

import json

import pytest

from conftest import CACHE_DIR
from orblat.cli import main, strip_timing_fields


def run_cli(capsys, argv):
    rc = main(argv)
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


class TestDocuments:
    def test_golay_verify(self, capsys):
        rc, out, _ = run_cli(capsys, ["golay", "verify"])
        assert rc == 0
        doc = json.loads(out)
        assert doc["octads"] == 759
        assert doc["weight_distribution"] == {
            "0": 1, "8": 759, "12": 2576, "16": 759, "24": 1,
        }
        assert doc["pass"] is True

    def test_flags_accepted_before_and_after_subcommand(self, capsys):
        rc1, out1, _ = run_cli(capsys, ["--seed", "1", "golay", "verify"])
        rc2, out2, _ = run_cli(capsys, ["golay", "verify", "--seed", "1"])
        assert rc1 == rc2 == 0
        assert out1 == out2

    def test_output_flag_writes_file_and_keeps_stdout_empty(
        self, capsys, tmp_path
    ):
        path = tmp_path / "golay.json"
        rc, out, _ = run_cli(capsys, ["golay", "verify", "--output", str(path)])
        assert rc == 0
        assert out == ""
        assert json.loads(path.read_text())["octads"] == 759

    def test_lattice_info(self, capsys, tmp_path):
        path = tmp_path / "a2.json"
        path.write_text(json.dumps({"rank": 2, "gram": [[2, 1], [1, 2]]}))
        rc, out, _ = run_cli(capsys, ["lattice", "info", str(path)])
        assert rc == 0
        doc = json.loads(out)
        assert doc["det"] == 3
        assert doc["even"] is True
        assert doc["disc_invariants"] == [3]

    def test_fqspace_appendix_3_7(self, capsys):
        rc, out, _ = run_cli(capsys, ["fqspace", "appendix", "--n", "3", "--p", "7"])
        assert rc == 0
        doc = json.loads(out)
        assert doc["pass"] is True
        rows = {r["prop_id"]: r for r in doc["rows"]}
        assert rows["omega-singular-orbits"]["computed"] == [24, 24]
        assert all(r["pass"] for r in doc["rows"])

    def test_leech_find_class_uses_cache(self, capsys):
        rc, out, _ = run_cli(
            capsys, ["leech", "find-class", "--class", "3C", "--cache", CACHE_DIR]
        )
        assert rc == 0
        doc = json.loads(out)
        assert doc["label"] == "3C"
        assert doc["invariants"]["order"] == 3
        assert doc["invariants"]["coinv_rank"] == 18
        assert doc["invariants"]["disc_invariants"] == [3, 3, 3, 3, 3]


class TestErrors:
    def test_unknown_class_is_machine_readable(self, capsys):
        rc, out, _ = run_cli(capsys, ["orbifold", "run", "--class", "9Z"])
        assert rc == 2
        doc = json.loads(out)
        assert doc["pass"] is False
        assert "unknown class" in doc["error"]["message"]
        assert "23A" in doc["error"]["message"]

    def test_missing_lattice_file(self, capsys, tmp_path):
        rc, out, _ = run_cli(
            capsys, ["lattice", "info", str(tmp_path / "nope.json")]
        )
        assert rc == 2
        doc = json.loads(out)
        assert doc["error"]["type"] == "FileNotFoundError"

    def test_inconsistent_lattice_file(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"rank": 3, "gram": [[2]]}))
        rc, out, _ = run_cli(capsys, ["lattice", "info", str(path)])
        assert rc == 2
        assert json.loads(out)["error"]["type"] == "ValueError"


class TestDeterminism:
    def test_leech_build_byte_identical_across_threads(self, capsys):
        rc1, out1, err1 = run_cli(capsys, ["leech", "build", "--threads", "1"])
        rc4, out4, _ = run_cli(capsys, ["leech", "build", "--threads", "4"])
        assert rc1 == rc4 == 0
        assert out1 == out4  # document carries no timing fields at all
        doc = json.loads(out1)
        assert doc["min_norm"] == 4 and doc["det"] == 1

    def test_strip_timing_fields(self):
        doc = {
            "a": 1,
            "timings": {"x": 0.5},
            "nested": [{"seconds": 1.2, "keep": True}],
        }
        assert strip_timing_fields(doc) == {"a": 1, "nested": [{"keep": True}]}


class TestCaseRuns:
    def test_orbifold_run_23a_threads2_matches_library_run(
        self, capsys, case_report
    ):
        reference = case_report("23A")  # computed with threads=1
        rc, out, err = run_cli(
            capsys,
            [
                "orbifold", "run", "--class", "23A",
                "--cache", CACHE_DIR, "--threads", "2",
            ],
        )
        assert rc == 0
        assert "23A" in err  # progress went to stderr
        doc = json.loads(out)
        assert doc["aut_order"] == 12144
        assert doc["pass"] is True
        ref_doc = json.loads(json.dumps(reference, default=str))
        assert strip_timing_fields(doc) == strip_timing_fields(ref_doc)

    def test_report_all(self, capsys):
        rc, out, err = run_cli(capsys, ["report", "all", "--cache", CACHE_DIR])
        assert rc == 0
        doc = json.loads(out)
        assert doc["pass"] is True
        assert doc["cases"]["3C"]["aut_order"] == 120337969489920
        assert doc["cases"]["5C"]["aut_order"] == 11700000000
        assert doc["cases"]["11A"]["aut_order"] == 1771440
        assert doc["cases"]["23A"]["aut_order"] == 12144
        assert len(doc["appendix"]) == 8
        assert all(block["pass"] for block in doc["appendix"])
        for label, case in doc["cases"].items():
            assert case["pass"] is True, label
            assert case["assumptions"], label
