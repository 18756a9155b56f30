"""Batch/timing benchmark for the federated query pipeline.

The workload is synthetic but shaped exactly like the bundled demo: per
batch, one captured record lands in each registered store and one workflow
execution records the identifier of every record. Query latency is then
measured against workspaces holding 1..N batches, split into

* build: parse + validate + plan + SQL rendering, and
* exec: federated execution against the store adapters.

Each batch-count point gets a fresh workspace, a warmup that is discarded,
and ``runs_per_point`` timed runs; the report carries medians. Everything
except wall-clock time is deterministic for a given seed: fixture rows,
reference values, and result row counts do not change across repeated runs.

An optional one-second sleep between timed runs mimics pacing against
remote stores; it is off by default because these adapters are in-process.
"""

from __future__ import annotations

import csv
import gc
import random
import statistics
import time
from dataclasses import dataclass
from typing import Iterable, Sequence

from .executor import execute
from .planner import plan, render_sql
from .provenance import AttributeValueRecord
from .query import parse, validate
from .workspace import SCENARIO_QUERY, SCENARIO_WORKFLOW, Workspace, scenario_workspace

__all__ = [
    "Batch",
    "BatchSpec",
    "TimingPoint",
    "TimingReport",
    "TimingSample",
    "apply_batches",
    "generate_batches",
    "run_benchmark",
]


@dataclass(frozen=True)
class BatchSpec:
    """How much synthetic data to generate.

    One batch is the unit the provenance side counts in: one workflow
    execution plus the records it touched. ``rows_per_store`` scales raw
    store volume (extra rows are never referenced by provenance, so they
    add scan weight without changing results); the default of one row per
    store per batch is the bundled-fixture scale.
    """

    batch_count: int
    rows_per_store: int = 1

    def __post_init__(self):
        if self.batch_count < 1:
            raise ValueError("batch_count must be >= 1")
        if self.rows_per_store < 1:
            raise ValueError("rows_per_store must be >= 1")


@dataclass(frozen=True)
class Batch:
    index: int
    header_rows: tuple[tuple, ...]
    seismic_docs: tuple[dict, ...]
    triples: tuple[tuple[str, str, object], ...]
    training_files: tuple[tuple[str, int], ...]

    # the first row per store is the one the workflow execution captures
    @property
    def captured_header_id(self) -> int:
        return self.header_rows[0][0]

    @property
    def captured_doc_id(self) -> int:
        return self.seismic_docs[0]["identifier"]

    @property
    def captured_uri(self) -> str:
        return self.triples[0][0]

    @property
    def captured_path(self) -> str:
        return self.training_files[0][0]


def generate_batches(spec: BatchSpec, seed: int = 0) -> list[Batch]:
    """Deterministically generate ``spec.batch_count`` batches."""
    rng = random.Random(seed)
    batches = []
    for i in range(1, spec.batch_count + 1):
        header_rows = []
        seismic_docs = []
        triples = []
        training_files = []
        for j in range(spec.rows_per_store):
            tag = f"{i:05d}" if j == 0 else f"{i:05d}r{j}"
            inline = rng.randrange(100, 1000)
            crossline = rng.randrange(100, 1000)
            header_rows.append(
                (
                    10000 + i + 100000 * j,
                    inline,
                    crossline,
                    f"batch {tag} header",
                    f"/segy/batch{tag}.sgy",
                    "Netherlands",
                )
            )
            seismic_docs.append(
                {
                    "identifier": 20000 + i + 100000 * j,
                    "name": "Netherlands",
                    "num_ilines": inline,
                    "num_xlines": crossline,
                    "epsg": rng.choice((4326, 23031, 28992)),
                }
            )
            uri = f"http://oilandgas/Seismic#Batch{tag}"
            triples.extend(
                [
                    (uri, "type", "SeismicCls"),
                    (uri, "name", "Netherlands"),
                    (uri, "hasWell", f"http://oilandgas/Well#W{rng.randrange(1, 1000):03d}"),
                    (uri, "hasHorizon", f"http://oilandgas/Horizon#H{rng.randrange(1, 1000):03d}"),
                ]
            )
            training_files.append((f"/data/batch{tag}.train", rng.randrange(1024, 16384)))
        batches.append(
            Batch(
                index=i,
                header_rows=tuple(header_rows),
                seismic_docs=tuple(seismic_docs),
                triples=tuple(triples),
                training_files=tuple(training_files),
            )
        )
    return batches


_HEADER_COLUMNS = ["id", "inline", "crossline", "header_info", "filepath", "name"]


def apply_batches(ws: Workspace, batches: Sequence[Batch]) -> None:
    """Load batch records into the stores and record one execution per batch."""
    ws.adapters["PostgreSQL"].add_table(
        "SeismicHeader",
        _HEADER_COLUMNS,
        [row for batch in batches for row in batch.header_rows],
    )
    ws.adapters["MongoDB"].add_collection(
        "Seismic_data",
        [doc for batch in batches for doc in batch.seismic_docs],
    )
    graph = ws.adapters["AllegroGraph"]
    for batch in batches:
        for subject, predicate, obj in batch.triples:
            graph.add_triple(subject, predicate, obj)
    files = ws.adapters["LocalFileSystem"]
    for batch in batches:
        for path, size in batch.training_files:
            files.add_record("TrainingFile", path, size)

    for batch in batches:
        exec_id = ws.recorder.begin_workflow_execution(SCENARIO_WORKFLOW)
        ws.recorder.record_transformation_execution(
            exec_id,
            "Data quality assessment",
            [AttributeValueRecord("SeismicHeader.id", batch.captured_header_id)],
        )
        ws.recorder.record_transformation_execution(
            exec_id,
            "Geospatial index generation",
            [AttributeValueRecord("Seismic_data.identifier", batch.captured_doc_id)],
        )
        ws.recorder.record_transformation_execution(
            exec_id,
            "Expert knowledge ingestion",
            [AttributeValueRecord("SeismicCls.URI", batch.captured_uri)],
        )
        ws.recorder.record_transformation_execution(
            exec_id,
            "Data preparation",
            [
                AttributeValueRecord("SeismicHeader.id", batch.captured_header_id, "used"),
                AttributeValueRecord("Seismic_data.identifier", batch.captured_doc_id, "used"),
                AttributeValueRecord("SeismicCls.URI", batch.captured_uri, "used"),
                AttributeValueRecord("TrainingFile.path", batch.captured_path),
            ],
        )
        ws.recorder.end_workflow_execution(exec_id)


@dataclass(frozen=True)
class TimingSample:
    build_ms: float
    exec_ms: float

    @property
    def total_ms(self) -> float:
        return self.build_ms + self.exec_ms


@dataclass(frozen=True)
class TimingPoint:
    batch_count: int
    samples: tuple[TimingSample, ...]
    result_rows: int

    @property
    def median_build_ms(self) -> float:
        return statistics.median(s.build_ms for s in self.samples)

    @property
    def median_exec_ms(self) -> float:
        return statistics.median(s.exec_ms for s in self.samples)

    @property
    def median_total_ms(self) -> float:
        return statistics.median(s.total_ms for s in self.samples)

    @property
    def build_share(self) -> float:
        total = self.median_total_ms
        return self.median_build_ms / total if total else 0.0


@dataclass(frozen=True)
class TimingReport:
    points: tuple[TimingPoint, ...]

    FIELDS = (
        "batch_count",
        "median_build_ms",
        "median_exec_ms",
        "median_total_ms",
        "build_share",
    )

    def _values(self, point: TimingPoint) -> list:
        return [
            point.batch_count,
            round(point.median_build_ms, 3),
            round(point.median_exec_ms, 3),
            round(point.median_total_ms, 3),
            round(point.build_share, 3),
        ]

    def report_lines(self) -> list[str]:
        lines = [", ".join(self.FIELDS)]
        for point in self.points:
            lines.append(", ".join(str(v) for v in self._values(point)))
        return lines

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.FIELDS)
            for point in self.points:
                writer.writerow(self._values(point))


def _timed_run(ws: Workspace, text: str) -> tuple[TimingSample, int]:
    t0 = time.perf_counter_ns()
    query = parse(text)
    validate(query, ws.registry, ws.recorder)
    federated = plan(query, ws.registry, ws.recorder)
    render_sql(federated)
    t1 = time.perf_counter_ns()
    table = execute(federated, ws.adapters)
    t2 = time.perf_counter_ns()
    return TimingSample((t1 - t0) / 1e6, (t2 - t1) / 1e6), len(table.rows)


def run_benchmark(
    batch_counts: Iterable[int],
    runs_per_point: int,
    warmup: int = 3,
    sleep_between: bool = False,
    seed: int = 0,
    rows_per_store: int = 1,
) -> TimingReport:
    """Measure the scenario query against fresh workspaces of growing size.

    Queries run sequentially; every point rebuilds its workspace from
    scratch so earlier points cannot leak executions or rows into later
    ones.
    """
    counts = list(batch_counts)
    if not counts:
        raise ValueError("need at least one batch count")
    if runs_per_point < 1:
        raise ValueError("runs_per_point must be >= 1")
    if warmup < 0:
        raise ValueError("warmup must be >= 0")

    points = []
    for count in counts:
        ws = scenario_workspace(with_data=False, with_provenance=False)
        apply_batches(ws, generate_batches(BatchSpec(count, rows_per_store), seed))
        for _ in range(warmup):
            _timed_run(ws, SCENARIO_QUERY)
        samples = []
        result_rows = 0
        # keep the cycle collector out of the timed window; reference
        # counting still reclaims the per-run garbage immediately
        gc_was_enabled = gc.isenabled()
        gc.disable()
        try:
            for run in range(runs_per_point):
                if sleep_between and run:
                    time.sleep(1.0)
                sample, result_rows = _timed_run(ws, SCENARIO_QUERY)
                samples.append(sample)
        finally:
            if gc_was_enabled:
                gc.enable()
            gc.collect()
        points.append(TimingPoint(count, tuple(samples), result_rows))
    return TimingReport(tuple(points))
