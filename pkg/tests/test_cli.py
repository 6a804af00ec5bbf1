import json
from pathlib import Path

import pytest

from conftest import tiny_model_config, tiny_pipeline_config

from echoph.cli import main
from echoph.training import DiskCohort


def write_config(path: Path, doc: dict) -> str:
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.fixture(scope="module")
def cli_workspace(tmp_path_factory):
    """generate -> train -> eval on the 32-case smoke config, driven entirely
    through the CLI."""
    root = tmp_path_factory.mktemp("cli")
    smoke_config = Path(__file__).resolve().parents[1] / "configs" / "smoke_cohort.json"
    assert main(["generate", "--config", str(smoke_config), "--seed", "555",
                 "--out", str(root / "data"), "--workers", "2"]) == 0

    train_config = write_config(root / "train.json", {
        "model_config": tiny_model_config().to_dict(),
        "train_config": {"batch_size": 6, "epochs": 2, "seed": 9, "checkpoint_every": 10},
        "pipeline_config": tiny_pipeline_config().to_dict(),
    })
    assert main(["train", "--data", str(root / "data"), "--config", train_config,
                 "--out", str(root / "run")]) == 0
    return root


class TestCliPipeline:
    def test_end_to_end_artifacts(self, cli_workspace):
        root = cli_workspace
        assert (root / "data" / "manifest.json").exists()
        assert (root / "run" / "checkpoints" / "best.pt").exists()
        assert main(["eval", "--run", str(root / "run"), "--split", "test",
                     "--report", str(root / "report")]) == 0
        report = json.loads((root / "report" / "report.json").read_text())
        assert report["n_cases"] == 4
        assert (root / "report" / "report.csv").exists()

    def test_eval_byte_identical(self, cli_workspace):
        root = cli_workspace
        assert main(["eval", "--run", str(root / "run"), "--split", "val",
                     "--report", str(root / "rep_a")]) == 0
        assert main(["eval", "--run", str(root / "run"), "--split", "val",
                     "--report", str(root / "rep_b")]) == 0
        assert (root / "rep_a" / "report.json").read_bytes() == \
               (root / "rep_b" / "report.json").read_bytes()

    def test_eval_with_plots_and_groups(self, cli_workspace):
        root = cli_workspace
        assert main(["eval", "--run", str(root / "run"), "--split", "train",
                     "--report", str(root / "rep_plots"), "--group-by", "device",
                     "--plots"]) == 0
        assert (root / "rep_plots" / "roc.svg").exists()
        report = json.loads((root / "rep_plots" / "report.json").read_text())
        assert "subgroups" in report

    def test_assess_case(self, cli_workspace):
        root = cli_workspace
        cohort = DiskCohort(root / "data")
        case_dir = root / "data" / "cases" / cohort.ids("test")[0]
        out = root / "assessment.json"
        assert main(["assess", "--run", str(root / "run"), "--case", str(case_dir),
                     "--out", str(out)]) == 0
        body = json.loads(out.read_text())
        assert {"mpap_hat", "pvr_hat", "taxonomy", "recommendation"} <= set(body)

    def test_assess_missing_view_names_it(self, cli_workspace, tmp_path, capsys):
        import shutil

        root = cli_workspace
        cohort = DiskCohort(root / "data")
        source = root / "data" / "cases" / cohort.ids("test")[0]
        broken = tmp_path / "broken"
        shutil.copytree(source, broken)
        (broken / "doppler_TR.png").unlink()
        code = main(["assess", "--run", str(root / "run"), "--case", str(broken),
                     "--out", str(tmp_path / "a.json")])
        assert code == 1
        err = json.loads(capsys.readouterr().err.strip())
        assert "TR" in err["error"]["message"]

    def test_explain_writes_frames(self, cli_workspace):
        root = cli_workspace
        cohort = DiskCohort(root / "data")
        case_dir = root / "data" / "cases" / cohort.ids("test")[0]
        out = root / "saliency"
        assert main(["explain", "--run", str(root / "run"), "--case", str(case_dir),
                     "--view", "A4C", "--out", str(out)]) == 0
        assert (out / "saliency.json").exists()
        assert len(list(out.glob("frame_*.png"))) == 8

    def test_efficacy_command(self, cli_workspace):
        root = cli_workspace
        cohort = DiskCohort(root / "data")
        ids = cohort.ids("test")
        pairs = {
            "dataset": str(root / "data"),
            "pairs": [
                {"case_id": cid, "pre_pvr": cohort.load(cid).rhc.pvr * 1.4} for cid in ids
            ],
        }
        pairs_path = write_config(root / "pairs.json", pairs)
        out = root / "efficacy.json"
        assert main(["efficacy", "--run", str(root / "run"), "--pairs", pairs_path,
                     "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert sum(sum(row) for row in report["transitions"]) == len(ids)


class TestCliErrors:
    def test_missing_dataset_is_usage_error(self, tmp_path, capsys):
        code = main(["train", "--data", str(tmp_path / "nope"), "--out", str(tmp_path / "o")])
        assert code == 2
        err = json.loads(capsys.readouterr().err.strip())
        assert err["error"]["type"] == "usage"

    def test_unknown_flag_exits_two(self):
        with pytest.raises(SystemExit) as exc:
            main(["generate", "--nonsense"])
        assert exc.value.code == 2

    def test_help_exits_zero(self):
        with pytest.raises(SystemExit) as exc:
            main(["--help"])
        assert exc.value.code == 0

    def test_subcommand_help_documents_flags(self, capsys):
        with pytest.raises(SystemExit):
            main(["eval", "--help"])
        out = capsys.readouterr().out
        for flag in ("--run", "--split", "--report", "--group-by", "--plots"):
            assert flag in out
