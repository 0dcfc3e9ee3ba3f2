"""
Command-line front end: validate, ktheory and search.

Exit codes: 0 success, 1 validation / H-condition / K-theory failure,
2 parse error or unreadable input, 3 internal consistency error.
"""

import argparse
import sys
import time
from contextlib import contextmanager
from pathlib import Path
from typing import List, Optional, Sequence
import networkx as nx
import numpy as np
from tqdm import tqdm
from src.config import get_settings
from src.errors import (
    ConditionRefusedError,
    DomainError,
    InternalConsistencyError,
    ParseError,
    TildeCKError,
)
from src.formats import first_directive
from src.logger import get_logger, set_console_level, setup_logging
from src.plane import (
    ValidationReport,
    build_pg2,
    default_correspondence,
    parse_correspondence,
    parse_plane,
    validate_correspondence,
    validate_plane,
)
from src.presentation import (
    TrianglePresentation,
    derived_plane,
    ensure_valid,
    link_graph,
    parse_presentation,
    search_presentations,
    serialize_presentation,
    validate_triangle_presentation,
)
from src.ktheory import building_k_theory, k_theory_rank1, kunneth_check, tensor_system
from src.rank1 import (
    ck_simplicity_check,
    graph_to_matrix,
    load_rank1_system,
    parse_graph,
    validate_graph,
)
from src.report import ReportDocument, ReportSection, digest_inputs
from src.tiles import (
    TransitionSystem,
    build_building_system,
    write_letter_table,
    write_matrix,
    write_tile_table,
)
from src.words import Shape, check_conditions, count_words

logger = get_logger(__name__)

EXIT_OK, EXIT_FAILURE, EXIT_PARSE, EXIT_INTERNAL = 0, 1, 2, 3


class ValidationFailed(Exception):
    """A validation report failed; the report is already recorded."""


def _sums_text(values: np.ndarray) -> str:
    if values.size == 0:
        return "-"
    low, high = int(values.min()), int(values.max())
    return str(low) if low == high else f"{low}..{high}"


def _read(path: Path) -> str:
    return Path(path).read_text(encoding="utf-8")


class ToolkitPipeline:
    """Runs the stages of one command and accumulates the report."""

    def __init__(self, command: str, inputs: Sequence[Path], threads: int):
        self.inputs = [Path(p) for p in inputs]
        self.threads = threads
        self.report = ReportDocument(command=command, input_digest=digest_inputs(self.inputs))
        logger.info(f"Pipeline '{command}' on {[str(p) for p in self.inputs]} (threads={threads})")

    @contextmanager
    def stage(self, name: str):
        start = time.perf_counter()
        logger.info(f"Stage {name}: start")
        try:
            yield self.report.section(name)
        finally:
            elapsed = time.perf_counter() - start
            self.report.timings[name] = self.report.timings.get(name, 0.0) + elapsed
            logger.info(f"Stage {name}: {elapsed:.3f}s")

    def _record_validation(self, section: ReportSection, report: ValidationReport):
        section.add("validation", report.render())
        for warning in report.warnings:
            section.add("warning", warning)
        if not report.passed:
            raise ValidationFailed(report.render())

    # -- presentations -----------------------------------------------------

    def load_presentation(self, path: Path) -> TrianglePresentation:
        with self.stage("presentation") as section:
            presentation = parse_presentation(_read(path))
            section.add("q", presentation.q)
            section.add("generators", presentation.num_generators)
            section.add("ordered_triples", len(presentation.triples))
            section.add("relators", len(presentation.relators()))
            report = validate_triangle_presentation(presentation)
            self._record_validation(section, report)
        with self.stage("plane") as section:
            plane = derived_plane(presentation)
            section.add("order", plane.order)
            section.add("points", plane.num_points)
            section.add("lines", plane.num_lines)
            section.add("validation", validate_plane(plane).render())
            link = link_graph(presentation)
            section.add("link_vertices", link.number_of_nodes())
            section.add("link_edges", link.number_of_edges())
            section.add("link_girth", nx.girth(link))
        return ensure_valid(presentation)

    def building_system(self, presentation: TrianglePresentation) -> TransitionSystem:
        with self.stage("alphabet") as section:
            system = build_building_system(presentation)
            m1, m2 = system.matrices
            section.add("tiles", system.size)
            for name, matrix in (("M1", m1), ("M2", m2)):
                section.add(f"{name}_row_sums", _sums_text(matrix.sum(axis=1)))
                section.add(f"{name}_column_sums", _sums_text(matrix.sum(axis=0)))
            if np.array_equal(m1 @ m2, m2 @ m1):
                for shape in (Shape.of(1, 0), Shape.of(0, 1), Shape.of(1, 1)):
                    section.add(f"words{shape}", count_words(system, shape))
        return system

    # -- rank 1 ------------------------------------------------------------

    def load_graph(self, path: Path) -> TransitionSystem:
        with self.stage("graph") as section:
            graph = parse_graph(_read(path))
            section.add("vertices", graph.num_vertices)
            section.add("edges", len(graph.edges))
            self._record_validation(section, validate_graph(graph))
            system = graph_to_matrix(graph)
            self._describe_rank1(section, system)
        return system

    def load_rank1(self, path: Path, name: str) -> TransitionSystem:
        with self.stage(name) as section:
            system = load_rank1_system(path)
            section.add("source", path.name)
            self._describe_rank1(section, system)
        return system

    def _describe_rank1(self, section: ReportSection, system: TransitionSystem):
        (matrix,) = system.matrices
        section.add("letters", system.size)
        section.add("transitions", int(matrix.sum()))
        section.extend(ck_simplicity_check(matrix).render())

    # -- shared stages -----------------------------------------------------

    def h_report(self, system: TransitionSystem):
        with self.stage("h_report") as section:
            report = check_conditions(system)
            section.extend(report.render())
        return report

    def export_matrices(self, system: TransitionSystem, out_dir: Path, generators=None):
        out_dir.mkdir(parents=True, exist_ok=True)
        names = ["M"] if system.rank == 1 else ["M1", "M2"]
        for name, matrix in zip(names, system.matrices):
            (out_dir / f"{name}.txt").write_text(write_matrix(name, matrix), encoding="utf-8")
        if system.tiles is not None and generators is not None:
            (out_dir / "tiles.txt").write_text(write_tile_table(system, generators), encoding="utf-8")
        else:
            (out_dir / "letters.txt").write_text(write_letter_table(system), encoding="utf-8")
        logger.info(f"Matrices written to {out_dir}")

    # -- commands ----------------------------------------------------------

    def run_validate(self, args) -> int:
        if args.presentation:
            self.load_presentation(Path(args.presentation))
        elif args.graph:
            self.load_graph(Path(args.graph))
        else:
            with self.stage("plane") as section:
                plane = parse_plane(_read(Path(args.plane)))
                section.add("order", plane.order)
                section.add("points", plane.num_points)
                section.add("lines", plane.num_lines)
                self._record_validation(section, validate_plane(plane))
        return EXIT_OK

    def run_ktheory(self, args) -> int:
        if args.presentation:
            presentation = self.load_presentation(Path(args.presentation))
            system = self.building_system(presentation)
            h_report = self.h_report(system)
            with self.stage("k_theory") as section:
                result = building_k_theory(system, threads=self.threads, h_report=h_report)
                section.extend(result.render())
            generators = presentation.generators
        elif args.graph:
            path = Path(args.graph)
            if first_directive(_read(path)) == "vertices":
                system = self.load_graph(path)
            else:
                system = self.load_rank1(path, "matrix")
            self.h_report(system)
            with self.stage("k_theory") as section:
                result = k_theory_rank1(system.matrices[0])
                section.extend(result.render())
            generators = None
        else:
            left, right = (Path(p) for p in args.tensor)
            a = self.load_rank1(left, "factor_a")
            b = self.load_rank1(right, "factor_b")
            with self.stage("tensor") as section:
                system = tensor_system(a, b)
                section.add("letters", system.size)
            h_report = self.h_report(system)
            with self.stage("k_theory") as section:
                result = kunneth_check(a, b, threads=self.threads, h_report=h_report)
                section.extend(result.render())
            generators = None

        if args.matrix_out:
            self.export_matrices(system, Path(args.matrix_out), generators)
        if any(d.status == "fail" for d in result.diagnostics):
            self.report.status = "diagnostic-failure"
            return EXIT_FAILURE
        return EXIT_OK

    def run_search(self, args) -> int:
        settings = get_settings()
        with self.stage("search") as section:
            if args.plane > settings.search_max_order:
                raise DomainError(f"search supports q <= {settings.search_max_order}, got q={args.plane}")
            if args.lambda_file:
                corr = parse_correspondence(_read(Path(args.lambda_file)))
                if corr.plane.order != args.plane:
                    raise DomainError(f"lambda file has q={corr.plane.order}, --plane asks for q={args.plane}")
            else:
                corr = default_correspondence(build_pg2(args.plane))
            self._record_validation(section, validate_correspondence(corr))

            result = search_presentations(corr, args.limit, timeout=args.timeout)
            section.add("q", args.plane)
            section.add("limit", args.limit)
            section.add("found", len(result.presentations))
            section.add("partial", str(result.partial).lower())
            section.add("explored", result.explored)

            out_dir = Path(args.out) if args.out else None
            if out_dir is not None:
                out_dir.mkdir(parents=True, exist_ok=True)
            for k, presentation in enumerate(
                tqdm(result.presentations, desc="Writing presentations", file=sys.stderr, disable=out_dir is None)
            ):
                relators = " ".join(
                    "".join(presentation.name(x) for x in relator) for relator in presentation.relators()
                )
                section.add(f"presentation_{k}", relators)
                if out_dir is not None:
                    (out_dir / f"presentation_{k}.tri").write_text(
                        serialize_presentation(presentation), encoding="utf-8"
                    )
        if not result.presentations:
            self.report.status = "none-found"
            return EXIT_FAILURE
        return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default=None, help="Report rendering (default from settings)")
    common.add_argument("--threads", type=int, default=None, help="Cap on internal parallelism")
    common.add_argument(
        "--log-level",
        default=None,
        type=str.upper,
        choices=("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"),
        help="Console (stderr) log level",
    )
    common.add_argument("--timings", action="store_true", help="Include per-stage timings in the report")
    common.add_argument("--report", default=None, help="Also write the report to this file")

    parser = argparse.ArgumentParser(
        prog="pipeline.py",
        description="Triangle presentations, transition matrices and Cuntz-Krieger K-theory",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    validate = commands.add_parser("validate", parents=[common], help="Validate an input file")
    source = validate.add_mutually_exclusive_group(required=True)
    source.add_argument("--presentation", help="Triangle presentation file")
    source.add_argument("--graph", help="Finite graph file")
    source.add_argument("--plane", help="Projective plane incidence table")

    ktheory = commands.add_parser("ktheory", parents=[common], help="Compute K0, K1 and the order of [1]")
    source = ktheory.add_mutually_exclusive_group(required=True)
    source.add_argument("--presentation", help="Triangle presentation file")
    source.add_argument("--graph", help="Finite graph file or matrix triplet file")
    source.add_argument("--tensor", nargs=2, metavar=("FILE", "FILE"), help="Two rank-1 inputs")
    ktheory.add_argument("--matrix-out", default=None, help="Directory for matrix and alphabet exports")

    search = commands.add_parser("search", parents=[common], help="Search triangle presentations (q <= 3)")
    search.add_argument("--plane", type=int, required=True, metavar="Q", help="Plane order")
    search.add_argument("--lambda", dest="lambda_file", default=None, help="Point-line correspondence file")
    search.add_argument("--limit", type=int, default=10, help="Maximum presentations to return")
    search.add_argument("--timeout", type=float, default=None, help="Seconds before a partial result")
    search.add_argument("--out", default=None, help="Directory for presentation_<k>.tri files")
    return parser


def _inputs(args) -> List[Path]:
    if args.command == "search":
        return [Path(args.lambda_file)] if args.lambda_file else []
    if getattr(args, "tensor", None):
        return [Path(p) for p in args.tensor]
    for name in ("presentation", "graph", "plane"):
        value = getattr(args, name, None)
        if value:
            return [Path(value)]
    return []


def main(argv: Optional[Sequence[str]] = None) -> int:
    """CLI entry point; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging()
    if args.log_level:
        set_console_level(args.log_level)
    logger.info(f"Command line arguments: {args}")

    settings = get_settings()
    fmt = args.format or settings.report_format
    threads = args.threads or settings.threads

    try:
        pipeline = ToolkitPipeline(args.command, _inputs(args), threads)
    except OSError as e:
        logger.error(f"Cannot read input: {e}")
        print(f"[ERROR] Cannot read input: {e}", file=sys.stderr)
        return EXIT_PARSE

    runners = {
        "validate": pipeline.run_validate,
        "ktheory": pipeline.run_ktheory,
        "search": pipeline.run_search,
    }
    try:
        code = runners[args.command](args)
    except ParseError as e:
        logger.error(f"Parse error: {e}")
        pipeline.report.status = f"parse-error: {e}"
        code = EXIT_PARSE
    except OSError as e:
        logger.error(f"I/O error: {e}")
        pipeline.report.status = f"io-error: {e}"
        code = EXIT_PARSE
    except ValidationFailed as e:
        pipeline.report.status = f"validation-failure: {e}"
        code = EXIT_FAILURE
    except ConditionRefusedError as e:
        logger.warning(f"Refused: {e}")
        pipeline.report.status = f"refused: {e.condition}"
        code = EXIT_FAILURE
    except DomainError as e:
        logger.warning(f"Domain error: {e}")
        pipeline.report.status = f"domain-error: {e}"
        code = EXIT_FAILURE
    except InternalConsistencyError as e:
        logger.error(f"Internal consistency error: {e}", exc_info=True)
        pipeline.report.status = f"internal-error: {e}"
        code = EXIT_INTERNAL
    except TildeCKError as e:
        logger.error(f"Command failed: {e}")
        pipeline.report.status = f"error: {e}"
        code = EXIT_FAILURE

    rendered = pipeline.report.render(fmt, include_timings=args.timings)
    sys.stdout.write(rendered)
    if args.report:
        Path(args.report).write_text(rendered, encoding="utf-8")
    if code != EXIT_OK:
        print(f"[ERROR] {pipeline.report.status}", file=sys.stderr)
    logger.info(f"Command '{args.command}' finished with exit code {code}")
    return code
