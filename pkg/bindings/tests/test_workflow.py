"""End-to-end tests for the scripting wrapper.

The core claim is parity: everything the wrapper produces must be the
artifact the healthpipe CLI would have produced, byte for byte, because
both front ends drive the same library.
"""

import ast
import inspect
import json
import re
import textwrap
import warnings
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from healthpipe.cli import cli
from healthpipe.core import ErrorCode, ValidationError
from healthpipe.demo import write_demo_events
from healthpipe.models import ProtocolError

import pyhealth_like.workflow as workflow
from pyhealth_like import GRU, LR, LSTM, TCNN, evaluator, expdata_generator


def snippet_flow(root, events_path):
    """The whole experiment as a script, one statement per step."""
    current_data = expdata_generator(exp_id="demo.mortality", root=root)
    current_data.get_exp_data(sel_task="mortality", data=events_path, seed=7)
    current_data.load_exp_data()
    model = LSTM(expmodel_id="lstm.demo", n_batchsize=20, use_gpu=True, n_epoch=4, hidden_dim=16, root=root)
    model.fit(current_data.train, current_data.valid)
    model.load_model()
    model.inference(current_data.test)
    prediction_results = model.get_results()
    return evaluator(prediction_results["hat_y"], prediction_results["y"])


@pytest.fixture(scope="module")
def events_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("events") / "events.csv"
    write_demo_events(path, 120, 3)
    return path


@pytest.fixture(scope="module")
def flow_root(tmp_path_factory):
    return tmp_path_factory.mktemp("flow")


@pytest.fixture(scope="module")
def evaluation(flow_root, events_csv):
    with warnings.catch_warnings():
        # the use_gpu warning has its own test below
        warnings.simplefilter("ignore")
        return snippet_flow(flow_root, str(events_csv))


@pytest.fixture(scope="module")
def loaded_data(flow_root, evaluation):
    # reload from the artifact the flow saved, in a fresh handle
    return expdata_generator(exp_id="demo.mortality", root=flow_root).load_exp_data()


class TestSnippetFlow:
    def test_produces_a_binary_metric_report(self, evaluation):
        assert evaluation["task"] == "binary"
        assert evaluation["n"] == 24
        assert 0.0 <= evaluation["metrics"]["auroc"] <= 1.0

    def test_flow_is_at_most_ten_statements(self):
        source = textwrap.dedent(inspect.getsource(snippet_flow))
        body = ast.parse(source).body[0].body
        statements = [
            node
            for node in body
            if not (isinstance(node, ast.Expr) and isinstance(node.value, ast.Constant))
        ]
        assert len(statements) <= 10

    def test_evaluation_equals_cli_evaluate_output(self, evaluation, flow_root):
        results_path = flow_root / "results" / "lstm.demo.jsonl"
        result = CliRunner().invoke(
            cli,
            ["evaluate", "--results", str(results_path)],
            env={"HEALTHPIPE_HOME": str(flow_root)},
        )
        assert result.exit_code == 0
        assert json.loads(result.stdout) == evaluation

    def test_standalone_reload_and_rescore(self, loaded_data, flow_root, evaluation):
        model = LSTM(expmodel_id="lstm.demo", root=flow_root)
        model.load_model()
        model.inference(loaded_data.test)
        results = model.get_results()
        assert sorted(results) == ["hat_y", "ids", "y"]
        assert results["hat_y"].shape[0] == len(loaded_data.test)
        assert results["hat_y"].dtype == np.float64
        assert results["hat_y"].flags["C_CONTIGUOUS"]
        assert evaluator(results["hat_y"], results["y"]) == evaluation


class TestCliParity:
    def test_results_and_checkpoints_byte_identical(self, tmp_path, events_csv):
        script_root = tmp_path / "script"
        data = expdata_generator(exp_id="par", root=script_root)
        data.get_exp_data(sel_task="mortality", data=str(events_csv), seed=7)
        data.load_exp_data()
        model = GRU(expmodel_id="m1", n_epoch=3, hidden_dim=12, root=script_root)
        model.fit(data.train, data.valid)
        model.load_model()
        model.inference(data.test)

        cli_root = tmp_path / "cli"
        runner = CliRunner()
        env = {"HEALTHPIPE_HOME": str(cli_root)}
        for args in (
            ["prepare", "--input", str(events_csv), "--task", "mortality",
             "--exp-id", "par", "--seed", "7"],
            ["train", "--exp-id", "par", "--model", "gru", "--expmodel-id", "m1",
             "--epochs", "3", "--hidden-dim", "12"],
            ["infer", "--exp-id", "par", "--expmodel-id", "m1"],
        ):
            result = runner.invoke(cli, args, env=env)
            assert result.exit_code == 0, result.output

        script_results = (script_root / "results" / "m1.jsonl").read_bytes()
        cli_results = (cli_root / "results" / "m1.jsonl").read_bytes()
        assert script_results == cli_results

        script_ckpts = sorted((script_root / "checkpoints" / "m1").iterdir())
        cli_dir = cli_root / "checkpoints" / "m1"
        assert [p.name for p in script_ckpts] == sorted(q.name for q in cli_dir.iterdir())
        for ckpt in script_ckpts:
            assert ckpt.read_bytes() == (cli_dir / ckpt.name).read_bytes()


class TestModels:
    def test_all_four_classes_share_the_protocol(self):
        for klass, kind in ((LR, "lr"), (GRU, "gru"), (LSTM, "lstm"), (TCNN, "tcnn")):
            assert klass.kind == kind
            for method in ("fit", "load_model", "inference", "get_results"):
                assert callable(getattr(klass, method))

    def test_use_gpu_warns_and_proceeds_on_cpu(self, loaded_data, tmp_path):
        model = LR(expmodel_id="gpu.probe", n_epoch=1, use_gpu=True, root=tmp_path)
        with pytest.warns(UserWarning, match="CPU"):
            model.fit(loaded_data.train[:8], loaded_data.valid[:4])
        model.inference(loaded_data.test[:4])
        assert model.get_results()["hat_y"].shape[0] == 4

    def test_constructor_validates_eagerly(self):
        with pytest.raises(ValidationError):
            LSTM(expmodel_id="x", n_epoch=0)
        with pytest.raises(ValidationError):
            GRU(expmodel_id="x", optimizer="lbfgs")

    def test_inference_before_fit_or_load(self, tmp_path):
        model = GRU(expmodel_id="fresh", root=tmp_path)
        with pytest.raises(ProtocolError):
            model.inference([])
        with pytest.raises(ProtocolError):
            model.get_results()

    def test_fit_rejects_empty_train(self, tmp_path):
        model = LR(expmodel_id="empty", root=tmp_path)
        with pytest.raises(ValidationError) as exc_info:
            model.fit([], [])
        assert exc_info.value.code is ErrorCode.EMPTY_INPUT


class TestDatasetHandle:
    def test_load_before_generate_is_empty_input(self, tmp_path):
        handle = expdata_generator(exp_id="ghost", root=tmp_path)
        with pytest.raises(ValidationError) as exc_info:
            handle.load_exp_data()
        assert exc_info.value.code is ErrorCode.EMPTY_INPUT

    def test_split_access_before_load(self, tmp_path):
        handle = expdata_generator(exp_id="ghost", root=tmp_path)
        with pytest.raises(ValidationError) as exc_info:
            handle.train
        assert exc_info.value.code is ErrorCode.EMPTY_INPUT

    def test_unknown_task_lists_valid_tasks(self, tmp_path, events_csv):
        handle = expdata_generator(exp_id="oops", root=tmp_path)
        with pytest.raises(ValidationError) as exc_info:
            handle.get_exp_data(sel_task="readmission", data=str(events_csv))
        assert exc_info.value.code is ErrorCode.SCHEMA_VIOLATION
        message = str(exc_info.value)
        assert "mortality" in message and "phenotyping" in message

    def test_generate_requires_a_data_path(self, tmp_path):
        handle = expdata_generator(exp_id="nodata", root=tmp_path)
        with pytest.raises(ValidationError) as exc_info:
            handle.get_exp_data(sel_task="mortality")
        assert exc_info.value.code is ErrorCode.EMPTY_INPUT

    def test_loaded_task_name(self, loaded_data):
        assert loaded_data.task == "binary"

    @pytest.mark.parametrize("bad", ["", "../up", "a/b", ".hidden"])
    def test_ids_must_be_path_safe(self, bad):
        with pytest.raises(ValidationError):
            expdata_generator(exp_id=bad)
        with pytest.raises(ValidationError):
            LSTM(expmodel_id=bad)


class TestEvaluator:
    def test_perfect_predictions_score_one(self):
        rows = [[1.0], [0.0], [1.0], [0.0]]
        evaluation = evaluator(rows, rows)
        assert evaluation["task"] == "binary"
        assert evaluation["metrics"]
        assert all(value == 1.0 for value in evaluation["metrics"].values())

    def test_shape_mismatch_raises(self):
        with pytest.raises(ValidationError):
            evaluator([[0.5], [0.5]], [[1.0]])


class TestMarshalingOnly:
    def test_binding_layer_has_no_numeric_code(self):
        source = Path(workflow.__file__).read_text()
        used = set(re.findall(r"np\.[A-Za-z_][A-Za-z0-9_]*", source))
        assert used <= {"np.ascontiguousarray", "np.float64", "np.ndarray"}
        assert "healthpipe.nn" not in source
        for operator in (" @ ", "matmul", "einsum", "np.exp", "np.log", "np.sum"):
            assert operator not in source


def test_criterion_9(evaluation, flow_root, loaded_data, tmp_path):
    """Demo-flow parity, rolled up into one pass/fail line."""
    source = textwrap.dedent(inspect.getsource(snippet_flow))
    body = ast.parse(source).body[0].body
    n_statements = len(
        [n for n in body if not (isinstance(n, ast.Expr) and isinstance(n.value, ast.Constant))]
    )

    results_path = flow_root / "results" / "lstm.demo.jsonl"
    result = CliRunner().invoke(
        cli,
        ["evaluate", "--results", str(results_path)],
        env={"HEALTHPIPE_HOME": str(flow_root)},
    )
    cli_match = result.exit_code == 0 and json.loads(result.stdout) == evaluation

    with pytest.warns(UserWarning, match="CPU"):
        probe = LR(expmodel_id="c9.gpu", n_epoch=1, use_gpu=True, root=tmp_path)
        probe.fit(loaded_data.train[:8], loaded_data.valid[:4])

    ok = n_statements <= 10 and cli_match
    print(
        "%s criterion 9: scripted flow parity "
        "[statements=%d cli_match=%s auroc=%.4f]"
        % ("PASS" if ok else "FAIL", n_statements, cli_match, evaluation["metrics"]["auroc"])
    )
    assert ok
