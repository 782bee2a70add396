import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from viscowave.cli import main
from viscowave.config import (
    ConfigError,
    DataComponent,
    ExperimentConfig,
    config_from_text,
    config_to_text,
    merge_overrides,
)
SMALL = ["--n", "1", "--N", "256", "--L", "40", "--T", "2", "--dt", "0.05", "--sample-dt", "0.25"]


finite_floats = st.floats(
    min_value=1e-6, max_value=1e6, allow_nan=False, allow_infinity=False
)


components = st.lists(
    st.builds(
        DataComponent,
        kind=st.sampled_from(["gauss", "bump"]),
        amplitude=st.floats(-10, 10, allow_nan=False),
        width=finite_floats,
        center=st.tuples(st.floats(-50, 50, allow_nan=False)),
    ),
    max_size=3,
).map(tuple)


configs = st.builds(
    ExperimentConfig,
    experiment=st.sampled_from(["linear-decay", "nonlinear-decay", "fujita-sweep"]),
    n=st.just(1),
    p=st.floats(1.1, 9.0, allow_nan=False),
    form=st.sampled_from(["signed", "abs"]),
    N=st.sampled_from([8, 64, 4096]),
    L=finite_floats,
    T=finite_floats,
    dt=finite_floats,
    sample_dt=finite_floats,
    k_list=st.lists(st.floats(0, 3, allow_nan=False), max_size=3).map(tuple),
    amp=st.floats(-5, 5, allow_nan=False),
    u0=components,
    u1=components,
    p_list=st.lists(st.floats(1.1, 9, allow_nan=False), max_size=4).map(tuple),
    r_list=st.lists(finite_floats, max_size=4).map(tuple),
    snapshot_dt=st.one_of(st.none(), finite_floats),
    dealias=st.booleans(),
    boundary_guard=st.booleans(),
    jobs=st.integers(1, 8),
    out_dir=st.just("out"),
)


class TestConfigSerialization:
    @given(cfg=configs)
    @settings(max_examples=60, deadline=None)
    def test_round_trip_lossless(self, cfg):
        assert config_from_text(config_to_text(cfg)) == cfg

    def test_component_round_trip(self):
        c = DataComponent("bump", -2.25, 0.125, (1.5, -4.0))
        assert DataComponent.decode(c.encode()) == c

    def test_comments_and_blank_lines_ignored(self):
        text = "# a comment\n\nexperiment = linear-decay\nn = 2\n"
        cfg = config_from_text(text)
        assert cfg.experiment == "linear-decay" and cfg.n == 2

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            config_from_text("experiment = linear-decay\nwibble = 3\n")

    def test_missing_experiment_rejected(self):
        with pytest.raises(ConfigError):
            config_from_text("n = 1\n")

    def test_bad_component_rejected(self):
        with pytest.raises(ConfigError):
            config_from_text("experiment = linear-decay\nu0 = gauss:1\n")

    def test_validation_catches_bad_values(self):
        for kwargs in (
            dict(n=3),
            dict(N=100),
            dict(L=-1.0),
            dict(p=0.5),
            dict(form="cubic"),
            dict(jobs=0),
            dict(p_list=(0.5,)),
        ):
            cfg = ExperimentConfig(experiment="linear-decay", **kwargs)
            with pytest.raises(ConfigError):
                cfg.validate()

    def test_merge_overrides(self):
        cfg = ExperimentConfig(experiment="linear-decay", n=1, T=10.0)
        out = merge_overrides(cfg, {"T": 20.0, "n": None})
        assert out.T == 20.0 and out.n == 1


class TestCliRuns:
    def test_linear_decay_outputs(self, tmp_path):
        out = str(tmp_path / "lin")
        code = main(["linear-decay", *SMALL, "--amp", "1.0", "--out", out])
        assert code == 0
        with open(os.path.join(out, "observables.csv")) as fh:
            header = fh.readline().strip()
            body = fh.read().strip().splitlines()
        assert header == "t,l2,l1,sup,dk_1,mass,f_mass"
        assert all(np.isfinite(float(v)) for v in body[-1].split(","))
        assert os.path.exists(os.path.join(out, "fits.csv"))
        assert os.path.exists(os.path.join(out, "manifest.txt"))

    def test_determinism_byte_identical(self, tmp_path):
        outs = []
        for name in ("a", "b"):
            out = str(tmp_path / name)
            code = main(["nonlinear-decay", *SMALL, "--amp", "0.01", "--out", out])
            assert code == 0
            with open(os.path.join(out, "observables.csv"), "rb") as fh:
                outs.append(fh.read())
        assert outs[0] == outs[1]

    def test_malformed_config_no_partial_output(self, tmp_path):
        cfg_file = tmp_path / "bad.cfg"
        cfg_file.write_text("experiment = linear-decay\nN = 100\n")
        out = str(tmp_path / "bad_out")
        code = main(["linear-decay", "--config", str(cfg_file), "--out", out])
        assert code == 2
        assert not os.path.exists(os.path.join(out, "observables.csv"))

    def test_missing_config_file(self, tmp_path):
        code = main(["linear-decay", "--config", str(tmp_path / "nope.cfg")])
        assert code == 2

    def test_flags_override_config_file(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text(
            "experiment = nonlinear-decay\nn = 1\nN = 256\nL = 40.0\nT = 1.0\n"
            "dt = 0.05\nsample_dt = 0.25\namp = 5.0\n"
        )
        out = str(tmp_path / "o")
        code = main(
            ["nonlinear-decay", "--config", str(cfg_file), "--amp", "0.01", "--out", out]
        )
        assert code == 0
        with open(os.path.join(out, "manifest.txt")) as fh:
            assert "amp = 0.01\n" in fh.read()

    def test_env_var_output_root(self, tmp_path, monkeypatch):
        out = str(tmp_path / "envout")
        monkeypatch.setenv("VISCOWAVE_OUT", out)
        code = main(["linear-decay", *SMALL])
        assert code == 0
        assert os.path.exists(os.path.join(out, "observables.csv"))

    def test_blowup_run_exit_code_and_na_row(self, tmp_path):
        out = str(tmp_path / "blow")
        code = main(
            [
                "nonlinear-decay", "--n", "1", "--N", "512", "--L", "60", "--T", "20",
                "--dt", "0.05", "--sample-dt", "0.25", "--p", "2", "--form", "abs",
                "--u0", "gauss:2.0:1.0:0.0", "--u1", "gauss:2.0:1.0:0.0", "--out", out,
            ]
        )
        assert code == 3
        with open(os.path.join(out, "observables.csv")) as fh:
            last = fh.read().strip().splitlines()[-1]
        cells = last.split(",")
        assert cells[1:] == ["NA"] * (len(cells) - 1)

    def test_truncation_guard_exit_code(self, tmp_path):
        out = str(tmp_path / "trunc")
        code = main(
            [
                "nonlinear-decay", "--n", "1", "--N", "128", "--L", "5", "--T", "40",
                "--dt", "0.05", "--sample-dt", "1", "--amp", "0.01", "--out", out,
            ]
        )
        assert code == 4
        assert not os.path.exists(os.path.join(out, "observables.csv"))

    def test_unknown_flag_exit_code(self):
        assert main(["linear-decay", "--frobnicate"]) == 2

    def test_profile_extra_csv(self, tmp_path):
        out = str(tmp_path / "prof")
        code = main(["profile", *SMALL, "--T", "8", "--out", out])
        assert code == 0
        with open(os.path.join(out, "profile.csv")) as fh:
            assert fh.readline().strip() == "t,k,M_used,error"

    def test_fujita_sweep_parallel_matches_serial(self, tmp_path):
        args = [
            "fujita-sweep", "--n", "1", "--N", "512", "--L", "50", "--T", "2",
            "--dt", "0.05", "--sample-dt", "0.25", "--amp", "2.0", "--p-list", "2,4",
        ]
        texts = []
        for jobs, name in (("1", "serial"), ("2", "parallel")):
            out = str(tmp_path / name)
            assert main([*args, "--jobs", jobs, "--out", out]) == 0
            with open(os.path.join(out, "classification.txt")) as fh:
                texts.append(fh.read())
        assert texts[0] == texts[1]
        assert texts[0].splitlines()[0] == "p amp kind classification sup_ratio annotation"

    def test_blowup_functional_outputs(self, tmp_path):
        out = str(tmp_path / "kr")
        code = main(
            [
                "blowup-functional", "--n", "1", "--N", "512", "--L", "40", "--dt", "0.05",
                "--sample-dt", "0.5", "--T", "16", "--amp", "0.01", "--R-list", "2,4",
                "--out", out,
            ]
        )
        assert code == 0
        with open(os.path.join(out, "kr.csv")) as fh:
            lines = fh.read().strip().splitlines()
        assert lines[0] == "R,K_R,annulus,viscoelastic"
        assert len(lines) == 3

    def test_lemma_oracles_outputs(self, tmp_path):
        out = str(tmp_path / "oracles")
        assert main(["lemma-oracles", "--n", "1", "--out", out]) == 0
        with open(os.path.join(out, "oracles.csv")) as fh:
            header = fh.readline().strip()
        assert header == "oracle,t,lhs,bound,ratio"
