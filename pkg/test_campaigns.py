import csv
import dataclasses
import json
import math
import time

import pytest

from campaigns import (
    CSV_COLUMNS,
    CampaignConfig,
    CampaignReport,
    config_from_dict,
    convert_units,
    demo_showcases,
    emit_report,
    read_report,
    report_to_dict,
    run_campaign,
    run_trial_seed,
)
from errors import ConfigError
from mathcore import mix_seed


def numeric_view(report):
    body = report_to_dict(report)
    return {"trials": body["trials"], "summary": body["summary"]}


@pytest.mark.parametrize(
    "overrides, field",
    [
        ({"theorem": "thm9"}, "theorem"),
        ({"trials": 0}, "trials"),
        ({"dim_k": 0}, "dim_k"),
        ({"tolerance": 0.0}, "tolerance"),
        ({"output_format": "xml"}, "output_format"),
        ({"dim_h": 16, "dim_k": 8}, "dim_h"),
        ({"roof_m": 0}, "roof_m"),
    ],
)
def test_config_validation_names_the_field(overrides, field):
    cfg = dataclasses.replace(CampaignConfig(theorem="thm1"), **overrides)
    with pytest.raises(ConfigError) as excinfo:
        cfg.validate()
    assert excinfo.value.field == field


def test_config_from_dict():
    cfg = config_from_dict({"theorem": "cor2", "trials": 3})
    assert cfg.trials == 3
    with pytest.raises(ConfigError):
        config_from_dict({"theorem": "cor2", "colour": "blue"})
    with pytest.raises(ConfigError):
        config_from_dict({"trials": 3})


def test_theorem1_campaign_has_no_failures():
    cfg = CampaignConfig(theorem="thm1", trials=200, dim_h=6, dim_k=4, num_kraus=4, vary_dims=True, master_seed=1)
    started = time.perf_counter()
    report = run_campaign(cfg)
    assert time.perf_counter() - started < 60
    assert len(report.trials) == 200
    assert report.fail_count == 0
    assert report.summary()["min_margin"] >= -1e-8


def test_theorem1_fixed_dims_campaign():
    report = run_campaign(CampaignConfig(theorem="thm1", trials=50, dim_h=4, dim_k=3, num_kraus=3))
    assert report.pass_count == 50
    assert all(t.certificate.dims == {"dim_h": 4, "dim_k": 3, "kraus": 3} for t in report.trials)


def test_theorem4_campaign_up_to_sixteen():
    cfg = CampaignConfig(theorem="thm4", trials=100, dim_h=16, dim_k=1, vary_dims=True, master_seed=4)
    started = time.perf_counter()
    report = run_campaign(cfg)
    assert time.perf_counter() - started < 10
    assert report.pass_count == 100
    assert all(2 <= t.certificate.dims["n"] <= 16 for t in report.trials)
    assert all(t.certificate.rhs <= 1e-10 for t in report.trials)


@pytest.mark.parametrize(
    "theorem, trials, dim_h, dim_k",
    [
        ("eq3", 200, 1, 4),
        ("prop1", 200, 4, 3),
        ("cor2", 200, 4, 3),
        ("thm5", 50, 12, 1),
        ("monotonicity", 50, 1, 3),
    ],
)
def test_theorem_backed_campaigns_pass(theorem, trials, dim_h, dim_k):
    cfg = CampaignConfig(theorem=theorem, trials=trials, dim_h=dim_h, dim_k=dim_k, num_kraus=3, vary_dims=True)
    report = run_campaign(cfg)
    assert report.theorem_backed
    assert report.fail_count == 0, [t.seed for t in report.trials if not t.passed]


def test_auxiliary_checks_are_recorded():
    report = run_campaign(CampaignConfig(theorem="cor2", trials=5, dim_h=3, dim_k=2))
    assert all(t.checks["construction_paths_agree"] for t in report.trials)
    report = run_campaign(CampaignConfig(theorem="prop1", trials=5, dim_h=3, dim_k=2))
    assert all(t.checks["projection_idempotent"] and t.checks["projection_fixes_state"] for t in report.trials)


def test_corollary1_campaign():
    cfg = CampaignConfig(theorem="cor1", trials=50, dim_h=3, dim_k=3, vary_dims=True, roof_restarts=1, master_seed=8)
    report = run_campaign(cfg)
    assert len(report.trials) == 50
    assert report.fail_count == 0
    assert all(t.certificate.details["conjecture_margin"] >= -2e-6 for t in report.trials)
    assert all(t.checks["roof_dominated"] for t in report.trials)


def test_conjecture_campaign_is_not_theorem_backed():
    report = run_campaign(CampaignConfig(theorem="conjecture", trials=3, dim_h=2, dim_k=2, roof_m=4, roof_restarts=1))
    assert not report.theorem_backed
    assert not report.has_theorem_failures
    assert all(t.verdict in ("SUPPORTED", "INCONCLUSIVE") for t in report.trials)
    assert all(t.certificate.details["label"] == "probe" for t in report.trials)


def test_campaigns_are_deterministic_across_workers():
    cfg = CampaignConfig(theorem="cor2", trials=12, dim_h=3, dim_k=2, master_seed=99)
    serial = run_campaign(cfg)
    again = run_campaign(cfg)
    threaded = run_campaign(dataclasses.replace(cfg, workers=4))
    assert numeric_view(serial) == numeric_view(again)
    assert numeric_view(serial) == numeric_view(threaded)


def test_trials_reproduce_from_their_seed():
    cfg = CampaignConfig(theorem="thm1", trials=5, dim_h=3, dim_k=2, master_seed=17)
    report = run_campaign(cfg)
    for t in report.trials:
        assert t.seed == mix_seed(17, t.index)
        replay = run_trial_seed(cfg, t.seed, t.index)
        assert replay.certificate.lhs == t.certificate.lhs
        assert replay.certificate.rhs == t.certificate.rhs


def test_summary_counts_and_argmin():
    report = run_campaign(CampaignConfig(theorem="thm1", trials=8, dim_h=2, dim_k=2))
    summary = report.summary()
    assert summary["pass"] + summary["fail"] == 8
    worst = [t for t in report.trials if t.seed == summary["argmin_seed"]]
    assert worst and worst[0].certificate.margin == summary["min_margin"]


def test_empty_report_writes_header_only_csv(tmp_path):
    report = CampaignReport(config=CampaignConfig(theorem="thm1"), trials=())
    path = tmp_path / "empty.csv"
    emit_report(report, "csv", str(path))
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows == [list(CSV_COLUMNS)]


def test_csv_rows_round_trip_doubles(tmp_path):
    report = run_campaign(CampaignConfig(theorem="thm1", trials=3, dim_h=3, dim_k=2))
    path = tmp_path / "report.csv"
    emit_report(report, "csv", str(path))
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3
    for row, trial in zip(rows, report.trials):
        assert int(row["seed"]) == trial.seed
        assert float(row["lhs"]) == trial.certificate.lhs
        assert float(row["rhs"]) == trial.certificate.rhs
        assert row["pass"] == str(trial.passed)


def test_json_report_is_idempotent(tmp_path):
    report = run_campaign(CampaignConfig(theorem="eq3", trials=3, dim_k=3))
    path = tmp_path / "report.json"
    emit_report(report, "json", str(path))
    with open(path) as fh:
        written = json.load(fh)
    assert report_to_dict(read_report(str(path))) == written


def test_emit_report_rejects_unknown_format(tmp_path):
    report = CampaignReport(config=CampaignConfig(theorem="thm1"), trials=())
    with pytest.raises(ConfigError):
        emit_report(report, "xml", str(tmp_path / "r.xml"))


def test_convert_units_to_bits():
    report = run_campaign(CampaignConfig(theorem="thm1", trials=3))
    bits = convert_units(report, "bits")
    assert bits.units == "bits"
    for nats, b in zip(report.trials, bits.trials):
        assert b.certificate.lhs == pytest.approx(nats.certificate.lhs / math.log(2))
        assert b.passed == nats.passed
    assert convert_units(bits, "nats").trials[0].certificate.lhs == pytest.approx(report.trials[0].certificate.lhs)


def test_convert_units_leaves_choi_distances_alone():
    report = run_campaign(CampaignConfig(theorem="thm4", trials=2, dim_h=3))
    bits = convert_units(report, "bits")
    assert bits.trials[0].certificate.rhs == report.trials[0].certificate.rhs
    with pytest.raises(ConfigError):
        convert_units(report, "hartleys")


def test_demo_showcases_are_equalities():
    showcases = demo_showcases()
    assert len(showcases) == 5
    assert all(item["equality"] for item in showcases)
