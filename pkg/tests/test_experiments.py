import csv
import io

import numpy as np
import pytest

from onebitphase import cli
from onebitphase.config import ConfigError, dump_config, load_config, loads, parse_config
from onebitphase.estimators import EstimatorSettings
from onebitphase.experiments import (
    CSV_HEADER,
    ExperimentConfig,
    chain_pilot_estimates,
    ftn_config,
    mean_squared_phase_error,
    run_sweep,
    run_trial,
)
from onebitphase.framing import FrameConfig


def _tiny_config(**overrides):
    base = dict(
        frame=FrameConfig(pilot_symbols=16, data_symbols=32, num_pilot_blocks=4),
        esn0_grid_db=(20.0,),
        trials=3,
        seed=5,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def test_single_trial_reproducible_and_finite():
    cfg = _tiny_config()
    a = run_trial(cfg, 20.0, 123)
    b = run_trial(cfg, 20.0, 123)
    assert a.values == b.values
    assert all(np.isfinite(v) for v in a.values.values())
    assert set(a.values) == {(alg, m) for alg in cfg.algorithms for m in cfg.modes}


def test_sweep_with_one_trial_reproduces_run_trial():
    cfg = _tiny_config(trials=1)
    result = run_sweep(cfg)
    seed = np.random.SeedSequence(cfg.seed).spawn(1)[0]
    trial = run_trial(cfg, 20.0, seed)
    for row in result.rows:
        assert row.mse == trial.values[(row.algorithm, row.interpolator)]
        assert row.stderr == 0.0
        assert row.trials == 1


def test_stderr_shrinks_with_trials():
    cfg_small = _tiny_config(trials=24, algorithms=("ls",), modes=("pilot_only",))
    cfg_big = _tiny_config(trials=96, algorithms=("ls",), modes=("pilot_only",))
    small = run_sweep(cfg_small).rows[0].stderr
    big = run_sweep(cfg_big).rows[0].stderr
    # stderr^2 scales as 1/trials; allow generous sampling slack
    ratio = small**2 / big**2
    assert 1.5 < ratio < 11.0


def test_sweep_deterministic_across_worker_counts(monkeypatch):
    cfg = _tiny_config(trials=4)
    monkeypatch.setenv("ONEBIT_THREADS", "1")
    serial = run_sweep(cfg).to_csv()
    monkeypatch.setenv("ONEBIT_THREADS", "2")
    parallel = run_sweep(cfg).to_csv()
    assert serial == parallel


def test_csv_shape_and_header():
    cfg = _tiny_config(trials=2)
    text = run_sweep(cfg).to_csv()
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == CSV_HEADER
    assert len(rows) == 1 + len(cfg.esn0_grid_db) * len(cfg.algorithms) * len(cfg.modes)
    for row in rows[1:]:
        float(row[0]), float(row[3]), float(row[4])
        assert row[1] in cfg.algorithms
        assert row[2] in cfg.modes
        assert int(row[5]) == 2


def test_mse_zero_for_oracle_estimates():
    # constant true phase fed directly as the per-block estimate
    cfg = FrameConfig(pilot_symbols=8, data_symbols=16, num_pilot_blocks=2)
    theta = np.full(cfg.total_samples, 0.83)
    estimates = np.full(cfg.total_blocks, 0.83)
    assert mean_squared_phase_error(theta, estimates, cfg) == 0.0
    assert mean_squared_phase_error(theta, estimates, cfg, pilot_only=True) == 0.0


def test_chain_pilot_estimates_unwraps_residuals():
    truth = np.array([3.0, 3.4, 3.9, 4.3])  # drifts past pi
    wrapped = np.angle(np.exp(1j * truth))
    chained = chain_pilot_estimates(wrapped)
    assert np.allclose(chained, truth, atol=1e-12)
    assert np.allclose(np.diff(chained), np.diff(truth), atol=1e-12)


def test_dither_limited_error_without_phase_noise():
    # zero phase noise at 40 dB: the converged refinement sits well below
    # 1e-3 rad^2, limited by the 1-bit dither residual alone (EM's fixed
    # 20-iteration budget leaves it higher at this SNR, LS higher still)
    cfg = _tiny_config(
        frame=FrameConfig(pilot_symbols=60, data_symbols=180, num_pilot_blocks=4),
        white_psd_db=-1000.0,
        wiener_psd=0.0,
        trials=40,
        algorithms=("ls", "scoring"),
        modes=("pilot_only",),
        esn0_grid_db=(40.0,),
    )
    result = run_sweep(cfg)
    scoring = result.value(40.0, "scoring", "pilot_only").mse
    ls = result.value(40.0, "ls", "pilot_only").mse
    assert scoring < 1e-3
    assert scoring < ls


def test_scoring_divergence_guard_records_diagnostics():
    cfg = _tiny_config(
        frame=FrameConfig(pilot_symbols=60, data_symbols=180, num_pilot_blocks=4),
        scoring=EstimatorSettings("scoring", iterations=20, damping=1.0),
        algorithms=("scoring",),
        esn0_grid_db=(40.0,),
        trials=10,
    )
    result = run_sweep(cfg)
    assert result.diagnostics.get("scoring_nonconverged", 0) > 0
    for row in result.rows:
        assert np.isfinite(row.mse)


def test_rts_not_worse_than_kalman_quick():
    cfg = _tiny_config(
        frame=FrameConfig(pilot_symbols=60, data_symbols=180, num_pilot_blocks=6),
        trials=30,
        algorithms=("ls",),
        modes=("kalman", "rts"),
        esn0_grid_db=(20.0,),
    )
    result = run_sweep(cfg)
    assert result.value(20.0, "ls", "rts").mse < result.value(20.0, "ls", "kalman").mse


def test_ftn_preset_runs_end_to_end():
    cfg = ftn_config(3)
    assert cfg.frame.ftn_factor == 3
    assert cfg.frame.blocks_per_gap == 20
    assert cfg.scoring.damping == 0.4
    trial = run_trial(
        ExperimentConfig(
            frame=cfg.frame,
            wiener_psd=cfg.wiener_psd,
            pulse_kind="rrc",
            rolloff=0.6,
            scoring=cfg.scoring,
            esn0_grid_db=(20.0,),
            trials=1,
        ),
        20.0,
        3,
    )
    assert all(np.isfinite(v) for v in trial.values.values())


# ---------------------------------------------------------------- config files

def test_config_defaults_match_study_caption_values():
    cfg = ExperimentConfig()
    assert cfg.frame.pilot_symbols == 60
    assert cfg.frame.data_symbols == 180
    assert cfg.frame.ftn_factor == 1 and cfg.frame.oversampling == 1
    assert cfg.white_psd_db == -130.0
    assert cfg.wiener_psd == 800.0
    assert cfg.em.iterations == 20
    assert cfg.scoring.iterations == 20
    assert cfg.scoring.damping == 0.05
    assert cfg.pulse_kind == "rectangular"


def test_config_roundtrip(tmp_path):
    cfg = ExperimentConfig(trials=17, seed=99, esn0_grid_db=(6.0, 12.0))
    path = tmp_path / "roundtrip.toml"
    path.write_text(dump_config(cfg))
    assert load_config(path) == cfg


def test_config_parse_values():
    sections = loads(
        """
        # comment line
        [framing]
        pilot_symbols = 30     # inline comment
        data_symbols = 90
        ftn_factor = 3
        oversampling = 3

        [waveform]
        pulse = "rrc"
        rolloff = 0.6

        [experiments]
        esn0_grid_db = [6.0, 12.0]
        modes = ["pilot_only", "rts"]
        """
    )
    cfg = parse_config(sections)
    assert cfg.frame.pilot_symbols == 30
    assert cfg.pulse_kind == "rrc"
    assert cfg.esn0_grid_db == (6.0, 12.0)
    assert cfg.modes == ("pilot_only", "rts")
    # unspecified keys fall back to defaults
    assert cfg.scoring.damping == 0.05


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config(loads("[framing]\npilots = 3\n"))
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config(loads("[frames]\npilot_symbols = 3\n"))
    with pytest.raises(ConfigError):
        loads("pilot_symbols = 3\n")  # key outside any section


# ---------------------------------------------------------------- CLI

def test_cli_sweep_writes_csv_and_plot(tmp_path):
    config = tmp_path / "small.toml"
    config.write_text(
        """
        [framing]
        pilot_symbols = 16
        data_symbols = 32
        num_pilot_blocks = 3

        [experiments]
        esn0_grid_db = [20.0]
        trials = 2
        """
    )
    out = tmp_path / "sweep.csv"
    fig = tmp_path / "sweep.png"
    rc = cli.main(["sweep", "--config", str(config), "--out", str(out), "--plot", str(fig)])
    assert rc == 0
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == CSV_HEADER
    assert len(rows) > 1
    assert fig.stat().st_size > 0


def test_cli_plot_from_csv(tmp_path):
    config = tmp_path / "small.toml"
    config.write_text(
        "[framing]\npilot_symbols = 16\ndata_symbols = 32\nnum_pilot_blocks = 3\n"
        "[experiments]\nesn0_grid_db = [10.0, 20.0]\ntrials = 2\n"
    )
    out = tmp_path / "sweep.csv"
    assert cli.main(["sweep", "--config", str(config), "--out", str(out)]) == 0
    fig = tmp_path / "curves.png"
    assert cli.main(["plot", "--csv", str(out), "--out", str(fig)]) == 0
    assert fig.stat().st_size > 0


def test_cli_show_config_prints_defaults(capsys):
    assert cli.main(["show-config"]) == 0
    text = capsys.readouterr().out
    assert "damping = 0.05" in text
    assert "iterations = 20" in text
    assert "pilot_symbols = 60" in text


def test_cli_rejects_non_integral_block_split(tmp_path, capsys):
    config = tmp_path / "bad.toml"
    config.write_text("[framing]\npilot_symbols = 60\ndata_symbols = 181\n")
    rc = cli.main(["sweep", "--config", str(config), "--out", str(tmp_path / "x.csv")])
    assert rc != 0
    err = capsys.readouterr().err
    assert "divisible" in err and "data_symbols" in err


def test_cli_validate_quick():
    assert cli.main(["validate", "--quick"]) == 0


def test_cli_overrides(tmp_path):
    out = tmp_path / "o.csv"
    config = tmp_path / "c.toml"
    config.write_text(
        "[framing]\npilot_symbols = 16\ndata_symbols = 0\nnum_pilot_blocks = 2\n"
        "[experiments]\nesn0_grid_db = [20.0]\ntrials = 5\n"
    )
    rc = cli.main(
        [
            "sweep", "--config", str(config), "--out", str(out),
            "--trials", "2", "--algorithms", "ls", "--modes", "pilot_only,rts",
        ]
    )
    assert rc == 0
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    assert {r[1] for r in rows} == {"ls"}
    assert {r[2] for r in rows} == {"pilot_only", "rts"}
    assert all(r[5] == "2" for r in rows)
