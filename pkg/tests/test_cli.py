"""End-to-end checks of the command-line interface.

Everything runs in-process through `cli.main` so exit codes and the
exact bytes written can be asserted without spawning subprocesses.
"""

import csv
import io
import json
import random

import pytest

from surpdec import cli


def write_json(path, payload):
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


@pytest.fixture
def workspace(tmp_path):
    stimuli = {
        "schema_version": "1",
        "experiment_id": "toy",
        "stimuli": [
            {"item_id": "c1", "condition": "control", "context": "he packed the",
             "continuation": "boxes.", "target": "boxes.", "is_control": True},
            {"item_id": "e1", "condition": "semantic", "context": "he packed the",
             "continuation": "clouds.", "target": "clouds.",
             "is_control": False, "control_item_id": "c1"},
        ],
    }
    backend = {
        "conditional": {"he packed the": {" boxes.": -2.0, " clouds.": -9.0}},
        "embeddings": {"boxes": [1.0, 0.0], "clouds": [0.0, 1.0]},
    }
    return {
        "stimuli": write_json(tmp_path / "stimuli.json", stimuli),
        "backend": "mock:" + write_json(tmp_path / "mock.json", backend),
        "constraints": write_json(
            tmp_path / "cons.json", ["A[semantic] > A[control]"]
        ),
        "dir": tmp_path,
    }


def data_rows(text):
    """CSV rows of an output, skipping the provenance header."""
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


class TestDecompose:
    def test_writes_table_and_exits_zero(self, workspace, capsys):
        rc = cli.main(
            ["decompose", "--stimuli", workspace["stimuli"],
             "--backend", workspace["backend"]]
        )
        out = capsys.readouterr().out
        assert rc == 0
        assert out.startswith("# surpdec decompose\n")
        rows = data_rows(out)
        assert [r["item_id"] for r in rows] == ["c1", "e1"]
        assert rows[0]["is_control"] == "1"
        for r in rows:
            total = float(r["shallow"]) + float(r["deep"])
            assert total == pytest.approx(float(r["veridical"]), abs=1e-9)

    def test_lambda_zero_zeroes_shallow_column(self, workspace, capsys):
        rc = cli.main(
            ["decompose", "--stimuli", workspace["stimuli"],
             "--backend", workspace["backend"], "--lambda", "0"]
        )
        assert rc == 0
        for r in data_rows(capsys.readouterr().out):
            assert float(r["shallow"]) == 0.0
            assert float(r["deep"]) == float(r["veridical"])

    def test_reruns_are_byte_identical(self, workspace):
        path = str(workspace["dir"] / "out.csv")
        args = ["decompose", "--stimuli", workspace["stimuli"],
                "--backend", workspace["backend"], "--out", path]
        assert cli.main(args) == 0
        first = open(path, "rb").read()
        assert cli.main(args) == 0
        assert open(path, "rb").read() == first

    def test_out_path_not_echoed_differently(self, workspace):
        # only the --out value differs; the data rows must still agree
        paths = [str(workspace["dir"] / f"o{i}.csv") for i in (1, 2)]
        for p in paths:
            cli.main(["decompose", "--stimuli", workspace["stimuli"],
                      "--backend", workspace["backend"], "--out", p])
        rows = [data_rows(open(p).read()) for p in paths]
        assert rows[0] == rows[1]

    def test_summary_and_svg_outputs(self, workspace, capsys):
        summary = workspace["dir"] / "summary.csv"
        chart = workspace["dir"] / "effects.svg"
        rc = cli.main(
            ["decompose", "--stimuli", workspace["stimuli"],
             "--backend", workspace["backend"],
             "--summary", str(summary), "--svg", str(chart)]
        )
        capsys.readouterr()
        assert rc == 0
        srows = data_rows(summary.read_text())
        assert [r["condition"] for r in srows] == ["control", "semantic"]
        assert chart.read_text().startswith("<svg")

    def test_erp_scales_multiply_effects(self, workspace, capsys):
        args = ["decompose", "--stimuli", workspace["stimuli"],
                "--backend", workspace["backend"]]
        summary1 = workspace["dir"] / "s1.csv"
        summary2 = workspace["dir"] / "s2.csv"
        cli.main(args + ["--summary", str(summary1)])
        cli.main(args + ["--alpha", "2", "--beta", "3", "--summary", str(summary2)])
        capsys.readouterr()
        r1 = data_rows(summary1.read_text())[1]
        r2 = data_rows(summary2.read_text())[1]
        assert float(r2["effect_n400"]) == pytest.approx(2 * float(r1["effect_n400"]))
        assert float(r2["effect_p600"]) == pytest.approx(3 * float(r1["effect_p600"]))

    def test_partial_failure_exits_one_but_writes_survivors(
        self, workspace, tmp_path, capsys
    ):
        payload = json.loads(open(workspace["stimuli"]).read())
        payload["stimuli"].extend(
            [
                {"item_id": "c2", "condition": "control", "context": "off the map",
                 "continuation": "town.", "target": "town.", "is_control": True},
                {"item_id": "e2", "condition": "semantic", "context": "off the map",
                 "continuation": "noun.", "target": "noun.",
                 "is_control": False, "control_item_id": "c2"},
            ]
        )
        stimuli = write_json(tmp_path / "bigger.json", payload)
        rc = cli.main(
            ["decompose", "--stimuli", stimuli, "--backend", workspace["backend"]]
        )
        captured = capsys.readouterr()
        assert rc == 1
        assert [r["item_id"] for r in data_rows(captured.out)] == ["c1", "e1"]
        assert "c2" in captured.err and "e2" in captured.err


class TestConfigMerge:
    def test_config_supplies_flags(self, workspace, tmp_path, capsys):
        config = write_json(
            tmp_path / "config.json",
            {"stimuli": workspace["stimuli"], "backend": workspace["backend"],
             "lambda": 0.5},
        )
        rc = cli.main(["decompose", "--config", config])
        rows = data_rows(capsys.readouterr().out)
        assert rc == 0
        assert all(r["lambda"] == "0.5" for r in rows)

    def test_explicit_flag_beats_config(self, workspace, tmp_path, capsys):
        config = write_json(
            tmp_path / "config.json",
            {"stimuli": workspace["stimuli"], "backend": workspace["backend"],
             "lambda": 0.5},
        )
        rc = cli.main(["decompose", "--config", config, "--lambda", "2.0"])
        rows = data_rows(capsys.readouterr().out)
        assert rc == 0
        assert all(r["lambda"] == "2.0" for r in rows)

    def test_unknown_config_key_rejected(self, workspace, tmp_path, capsys):
        config = write_json(tmp_path / "config.json", {"wavelength": 3})
        rc = cli.main(["decompose", "--config", config])
        assert rc == 2
        assert "wavelength" in capsys.readouterr().err

    def test_config_must_be_object(self, workspace, tmp_path, capsys):
        config = write_json(tmp_path / "config.json", [1, 2])
        assert cli.main(["decompose", "--config", config]) == 2
        capsys.readouterr()


class TestValidation:
    def test_missing_backend(self, workspace, capsys):
        rc = cli.main(["decompose", "--stimuli", workspace["stimuli"]])
        assert rc == 2
        assert "--backend" in capsys.readouterr().err

    def test_backend_string_must_be_mock_or_http(self, workspace, capsys):
        rc = cli.main(
            ["decompose", "--stimuli", workspace["stimuli"], "--backend", "ftp://x"]
        )
        assert rc == 2
        capsys.readouterr()

    def test_missing_mock_file(self, workspace, capsys):
        rc = cli.main(
            ["decompose", "--stimuli", workspace["stimuli"],
             "--backend", "mock:/no/such/file.json"]
        )
        assert rc == 2
        capsys.readouterr()

    def test_external_needs_candidates(self, workspace, capsys):
        rc = cli.main(
            ["decompose", "--stimuli", workspace["stimuli"],
             "--backend", workspace["backend"], "--generator", "external"]
        )
        assert rc == 2
        assert "--candidates" in capsys.readouterr().err

    def test_sampler_needs_lexicon(self, workspace, capsys):
        rc = cli.main(
            ["decompose", "--stimuli", workspace["stimuli"],
             "--backend", workspace["backend"], "--generator", "sampler"]
        )
        assert rc == 2
        assert "--lexicon" in capsys.readouterr().err

    def test_missing_stimuli(self, workspace, capsys):
        rc = cli.main(["decompose", "--backend", workspace["backend"]])
        assert rc == 2
        capsys.readouterr()


class TestFrontier:
    def base(self, workspace):
        return ["frontier", "--stimuli", workspace["stimuli"],
                "--backend", workspace["backend"], "--item", "e1"]

    def test_grid_rows(self, workspace, capsys):
        rc = cli.main(self.base(workspace) + ["--lambda-grid", "0:1:0.5"])
        out = capsys.readouterr().out
        rows = data_rows(out)
        assert rc == 0
        assert [r["depth_weight"] for r in rows] == ["0.0", "0.5", "1.0"]
        depths = [float(r["depth"]) for r in rows]
        assert depths == sorted(depths)

    def test_single_point_grid(self, workspace, capsys):
        rc = cli.main(self.base(workspace) + ["--lambda-grid", "0:0:1"])
        rows = data_rows(capsys.readouterr().out)
        assert rc == 0
        assert len(rows) == 1 and float(rows[0]["depth"]) == 0.0

    def test_svg_written(self, workspace, capsys):
        chart = workspace["dir"] / "frontier.svg"
        rc = cli.main(
            self.base(workspace)
            + ["--lambda-grid", "0,1", "--svg", str(chart)]
        )
        capsys.readouterr()
        assert rc == 0
        text = chart.read_text()
        assert text.startswith("<svg") and "e1" in text

    def test_unknown_item(self, workspace, capsys):
        rc = cli.main(
            ["frontier", "--stimuli", workspace["stimuli"],
             "--backend", workspace["backend"], "--item", "ghost"]
        )
        assert rc == 2
        assert "ghost" in capsys.readouterr().err

    def test_item_required(self, workspace, capsys):
        rc = cli.main(
            ["frontier", "--stimuli", workspace["stimuli"],
             "--backend", workspace["backend"]]
        )
        assert rc == 2
        capsys.readouterr()

    def test_malformed_grid(self, workspace, capsys):
        rc = cli.main(self.base(workspace) + ["--lambda-grid", "0:1"])
        assert rc == 2
        capsys.readouterr()


class TestGridSearch:
    def test_ranked_cells(self, workspace, capsys):
        rc = cli.main(
            ["gridsearch", "--stimuli", workspace["stimuli"],
             "--backend", workspace["backend"],
             "--constraints", workspace["constraints"],
             "--lambda-grid", "0,1", "--gamma-grid", "8"]
        )
        rows = data_rows(capsys.readouterr().out)
        assert rc == 0
        assert [r["rank"] for r in rows] == ["1", "2"]
        assert rows[0]["lambda"] == "1.0" and rows[0]["score"] == "1"
        assert rows[1]["lambda"] == "0.0" and rows[1]["score"] == "0"
        assert rows[0]["satisfied"] == "1"

    def test_constraints_must_be_string_list(self, workspace, tmp_path, capsys):
        bad = write_json(tmp_path / "bad.json", {"a": 1})
        rc = cli.main(
            ["gridsearch", "--stimuli", workspace["stimuli"],
             "--backend", workspace["backend"], "--constraints", bad]
        )
        assert rc == 2
        capsys.readouterr()

    def test_constraints_required(self, workspace, capsys):
        rc = cli.main(
            ["gridsearch", "--stimuli", workspace["stimuli"],
             "--backend", workspace["backend"]]
        )
        assert rc == 2
        capsys.readouterr()

    def test_bad_constraint_syntax_is_config_error(self, workspace, tmp_path, capsys):
        bad = write_json(tmp_path / "bad.json", ["Q[x] > A[y]"])
        rc = cli.main(
            ["gridsearch", "--stimuli", workspace["stimuli"],
             "--backend", workspace["backend"], "--constraints", bad]
        )
        assert rc == 2
        capsys.readouterr()


class TestStats:
    def write_data(self, tmp_path, n=12, comment=False):
        rng = random.Random(7)
        lines = ["# produced upstream"] if comment else []
        lines.append("subject,n400,p600,surprisal")
        for i in range(n):
            a, b = rng.uniform(0.2, 4.0), rng.uniform(0.0, 1.5)
            lines.append(f"s{i},{a},{b},{a + b}")
        path = tmp_path / "trials.csv"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return str(path)

    def test_exact_decomposition_matches_pattern(self, workspace, tmp_path, capsys):
        rc = cli.main(["stats", "--data", self.write_data(tmp_path)])
        out = capsys.readouterr().out
        assert rc == 0
        assert "# all_match: true" in out
        rows = data_rows("\n".join(
            ln for ln in out.splitlines() if not ln.startswith("# all_match")
        ))
        assert len(rows) == 6
        assert all(r["matches"] == "1" for r in rows)
        assert [r["response"] for r in rows[:2]] == ["surprisal", "surprisal"]

    def test_comment_lines_skipped(self, workspace, tmp_path, capsys):
        rc = cli.main(
            ["stats", "--data", self.write_data(tmp_path, comment=True)]
        )
        assert rc == 0
        capsys.readouterr()

    def test_missing_columns(self, workspace, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n", encoding="utf-8")
        rc = cli.main(["stats", "--data", str(path)])
        assert rc == 2
        capsys.readouterr()

    def test_non_numeric_cell(self, workspace, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        rows = "\n".join(f"{i},{i},1" for i in range(11))
        path.write_text(f"n400,p600,surprisal\nx,1,1\n{rows}\n", encoding="utf-8")
        rc = cli.main(["stats", "--data", str(path)])
        assert rc == 2
        capsys.readouterr()


class TestGenCandidates:
    def test_json_payload(self, workspace, capsys):
        rc = cli.main(
            ["gen-candidates", "--stimuli", workspace["stimuli"],
             "--backend", workspace["backend"]]
        )
        out = capsys.readouterr().out
        assert rc == 0
        body = "\n".join(ln for ln in out.splitlines() if not ln.startswith("#"))
        payload = json.loads(body)
        assert payload["schema_version"] == "1"
        assert payload["generator"] == "counterpart"
        assert sorted(payload["sets"]) == ["c1", "e1"]
        for cset in payload["sets"].values():
            assert len(cset["candidates"]) == 2
            assert sum(c["is_veridical"] for c in cset["candidates"]) == 1

    def test_roundtrips_through_external_generator(
        self, workspace, tmp_path, capsys
    ):
        # generated sets, re-fed as corrections, give the same decomposition
        rc = cli.main(
            ["gen-candidates", "--stimuli", workspace["stimuli"],
             "--backend", workspace["backend"]]
        )
        out = capsys.readouterr().out
        assert rc == 0
        payload = json.loads(
            "\n".join(ln for ln in out.splitlines() if not ln.startswith("#"))
        )
        corrections = {
            item_id: [c["text"] for c in cset["candidates"] if not c["is_veridical"]]
            for item_id, cset in payload["sets"].items()
        }
        path = write_json(tmp_path / "corr.json", corrections)
        rc = cli.main(
            ["decompose", "--stimuli", workspace["stimuli"],
             "--backend", workspace["backend"],
             "--generator", "external", "--candidates", path]
        )
        rows = data_rows(capsys.readouterr().out)
        assert rc == 0
        assert [r["item_id"] for r in rows] == ["c1", "e1"]
