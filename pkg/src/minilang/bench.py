"""Three-condition overhead benchmark: plain, instrumented-idle, searching.

The searching condition keeps a never-matching query active for the whole
run; a query that does match the workload is a setup error, reported as
WorkloadFault.  Reported numbers are means over N runs plus the two ratios
of interest.
"""

from dataclasses import dataclass, asdict
import time

from .compiler import compile_source
from .errors import WorkloadFault
from .frontend import SourceUnit
from .instrument import ScopePattern, instrument
from .session import Query, matches
from .vm import VM

DEFAULT_ITERATIONS = 40_000
DEFAULT_RUNS = 3
DEFAULT_QUERY = "qzx"
NOISE_MARGIN = 0.10

# loop of short-string concat/upper/compare work
STRING_CHURN = """\
fn main() {
    let i = 0;
    let s = "a";
    while i < {ITERS} {
        let t = s + "bc";
        let u = upper(t);
        if u == "ABC" {
            s = "a";
        } else {
            s = "b";
        }
        i = i + 1;
    }
}
"""

WORKLOADS = {"string-churn": STRING_CHURN}


@dataclass
class BenchReport:
    workload: str
    runs: int
    iterations: int
    plain_seconds: float
    instrumented_seconds: float
    searching_seconds: float
    instrumented_over_plain: float
    searching_over_instrumented: float
    noise_margin: float = NOISE_MARGIN

    def to_dict(self):
        return asdict(self)

    def format_text(self):
        rows = [
            ("plain", self.plain_seconds, ""),
            ("instrumented", self.instrumented_seconds,
             f"x{self.instrumented_over_plain:.3f} vs plain"),
            ("searching", self.searching_seconds,
             f"x{self.searching_over_instrumented:.3f} vs instrumented"),
        ]
        lines = [f"workload: {self.workload}  "
                 f"(iterations={self.iterations}, runs={self.runs})"]
        for name, secs, note in rows:
            lines.append(f"  {name:<14}{secs:>10.4f} s  {note}")
        return "\n".join(lines)


class _DiscardHooks:
    capture_active = False
    pending = ()

    def on_capture(self, site_id, value):
        return False

    def drain(self):
        return None

    def on_output(self, text):
        pass


class _SearchHooks(_DiscardHooks):
    capture_active = True

    def __init__(self, query):
        self.query = query

    def on_capture(self, site_id, value):
        if matches(value, self.query):
            raise WorkloadFault(
                f"benchmark query {self.query.text!r} matched capture "
                f"site {site_id}; the searching condition must never pause")
        return False


def _timed_run(image, hooks):
    vm = VM(image, hooks=hooks)
    start = time.perf_counter()
    stop = vm.run()
    elapsed = time.perf_counter() - start
    if stop.kind == "fault":
        raise WorkloadFault(f"workload faulted: {stop.message}")
    return elapsed


def run_benchmark(workload="string-churn", runs=DEFAULT_RUNS,
                  iterations=DEFAULT_ITERATIONS, query_text=DEFAULT_QUERY):
    if workload not in WORKLOADS:
        raise WorkloadFault(f"unknown workload {workload!r}")
    source = WORKLOADS[workload].replace("{ITERS}", str(iterations))
    image = compile_source([SourceUnit.from_text(source, unit_name=workload)])
    instrumented = instrument(image, ScopePattern("*"))
    query = Query(query_text)

    def mean(condition):
        return sum(condition() for _ in range(runs)) / runs

    # one untimed warm-up so the first measured condition is not cold
    _timed_run(instrumented, _DiscardHooks())

    plain = mean(lambda: _timed_run(image, _DiscardHooks()))
    idle = mean(lambda: _timed_run(instrumented, _DiscardHooks()))
    searching = mean(lambda: _timed_run(instrumented, _SearchHooks(query)))
    return BenchReport(
        workload=workload, runs=runs, iterations=iterations,
        plain_seconds=plain, instrumented_seconds=idle,
        searching_seconds=searching,
        instrumented_over_plain=idle / plain,
        searching_over_instrumented=searching / idle)
