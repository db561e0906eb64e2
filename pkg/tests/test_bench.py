import json

import pytest

from minilang.bench import BenchReport, run_benchmark
from minilang.errors import WorkloadFault


def test_small_run_report_fields():
    report = run_benchmark(runs=1, iterations=200)
    assert report.workload == "string-churn"
    assert report.runs == 1 and report.iterations == 200
    for value in (report.plain_seconds, report.instrumented_seconds,
                  report.searching_seconds):
        assert value > 0
    assert report.instrumented_over_plain == pytest.approx(
        report.instrumented_seconds / report.plain_seconds)
    assert report.searching_over_instrumented == pytest.approx(
        report.searching_seconds / report.instrumented_seconds)


def test_report_serializes():
    report = run_benchmark(runs=1, iterations=100)
    payload = json.loads(json.dumps(report.to_dict()))
    assert set(payload) >= {"workload", "runs", "iterations", "plain_seconds",
                            "instrumented_seconds", "searching_seconds",
                            "instrumented_over_plain",
                            "searching_over_instrumented"}
    text = report.format_text()
    assert "plain" in text and "searching" in text


def test_unknown_workload_rejected():
    with pytest.raises(WorkloadFault):
        run_benchmark(workload="sorting")


def test_matching_query_is_a_setup_error():
    # "a" appears in the workload's strings, so the searching condition
    # would pause; that must be flagged, not silently skew the numbers
    with pytest.raises(WorkloadFault):
        run_benchmark(runs=1, iterations=100, query_text="a")
