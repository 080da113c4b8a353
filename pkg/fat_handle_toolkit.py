# Orchestrator for the fat round handle toolkit.
# Ties together expression parsing, flow construction, classification,
# ordering, enumeration, rendering and the verification suites.
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Dict, Optional, Tuple

import pandas as pd

from calculus.dsl import (
    DEFAULT_SELECTOR_TABLE,
    FlowExpr,
    apply_selector_table,
    elaborate,
    load_selector_table,
    parse,
    parse_selector,
    select_orbit,
)
from calculus.enumeration import (
    DEFAULT_MAX_SADDLES,
    MAX_SADDLES_ENV,
    FlowCensus,
    check_bound,
    default_workers,
    enumerate_flows,
)
from calculus.errors import BoundExceededError, SelectorError
from calculus.flow_model import (
    BasicHandleKind,
    FatHandle,
    FlowModel,
    Polarity,
    basic_handle,
    identify,
    remove_orbit,
)
from calculus.link_algebra import OrbitIndex
from calculus.order import SaddlePoset, commuting_steps, f3_poset, is_f3, saddle_poset
from tools.export import save_json, write_census_records, write_census_report
from tools.ledger import GoldenLedger
from tools.oracle import oracle_count
from tools.render import (
    DEFAULT_MAX_DRAWABLE_SADDLES,
    DiagramDoc,
    DiagramKind,
    filtration_dot,
    hasse_dot,
    schematic_svg,
)
from tools.verification import run_suite, summarize

ORACLE_LIMIT = 4
WORKERS_ENV = "FAT_HANDLES_WORKERS"


@dataclass
class ToolkitConfig:
    max_saddles: int = DEFAULT_MAX_SADDLES
    max_drawable_saddles: int = DEFAULT_MAX_DRAWABLE_SADDLES
    ledger_path: str = "golden_counts.json"
    output_root: str = "outputs"
    selector_table: Optional[str] = None
    verbose: bool = True
    workers: int = field(default_factory=default_workers)

    @classmethod
    def from_env(cls, **overrides: Any) -> "ToolkitConfig":
        cfg = cls()
        raw = os.getenv(MAX_SADDLES_ENV)
        if raw:
            try:
                cfg.max_saddles = int(raw)
            except ValueError:
                raise BoundExceededError(f"{MAX_SADDLES_ENV} must be an integer, got {raw!r}.")
        cfg.ledger_path = os.getenv("FAT_HANDLES_LEDGER", cfg.ledger_path)
        raw = os.getenv(WORKERS_ENV)
        if raw:
            try:
                cfg.workers = max(1, int(raw))
            except ValueError:
                raise BoundExceededError(f"{WORKERS_ENV} must be an integer, got {raw!r}.")
        for key, value in overrides.items():
            if value is not None:
                setattr(cfg, key, value)
        return cfg


# Run metadata recorded in census reports
@dataclass
class RunContext:
    run_id: str
    started_at: str
    command: str
    output_dir: str
    params: Dict[str, Any] = field(default_factory=dict)


def now_iso() -> str:
    """Return current UTC time in ISO 8601 format (no microseconds) with Z suffix."""
    return datetime.utcnow().replace(microsecond=0).isoformat() + "Z"


class FatHandleToolkit:
    """
    Front end over the calculus.

    Responsibilities:
    - resolve expressions through the selector table and elaborate them into flows
    - classify fat handles and identify pairs of them
    - compute saddle orders and commuting construction steps
    - run censuses, with the oracle cross-check and the golden ledger
    - render diagrams and run the verification suites
    """

    def __init__(self, config: Optional[ToolkitConfig] = None):
        self.config = config or ToolkitConfig.from_env()
        self.verbose = self.config.verbose
        self.selectors = load_selector_table(self.config.selector_table or DEFAULT_SELECTOR_TABLE)
        self.ctx: Optional[RunContext] = None

    def log(self, msg: str) -> None:
        """Print a diagnostic message when verbose is enabled."""
        if self.verbose:
            print(f"[FatHandleToolkit] {msg}", file=sys.stderr)

    # ------------------------------------------------------------ expressions

    def expression(self, text: str) -> FlowExpr:
        resolved = apply_selector_table(text, self.selectors)
        if resolved != text:
            self.log(f"Selector table: {text} -> {resolved}")
        return parse(resolved)

    def build(self, text: str) -> Tuple[FlowExpr, FlowModel]:
        e = self.expression(text)
        flow = elaborate(e)
        self.log(f"Built {text}: {flow.saddle_count} saddle(s), {len(flow.heteroclinic_edges)} heteroclinic")
        return e, flow

    # ------------------------------------------------------------ handles

    def handle(self, spec: str) -> FatHandle:
        """
        A fat handle from '<expr>/<selector>' (remove the selected orbit of the
        flow) or from the shorthand 'kind:a|r[:d0|d2]' for basic handles.
        """
        if "/" in spec:
            text, _, selector = spec.rpartition("/")
            _, flow = self.build(text)
            return remove_orbit(flow, select_orbit(flow, parse_selector(selector)))
        parts = spec.split(":")
        if len(parts) not in (2, 3) or parts[1] not in ("a", "r"):
            raise SelectorError(f"Handle spec {spec!r} is neither '<expr>/<selector>' nor 'kind:a|r[:d0|d2]'.")
        try:
            kind = BasicHandleKind(parts[0])
        except ValueError:
            raise SelectorError(f"Unknown basic handle {parts[0]!r}; expected hdu, ddu, hu or du.")
        polarity = Polarity.ATTRACTIVE if parts[1] == "a" else Polarity.REPULSIVE
        d_index = None
        if len(parts) == 3:
            if parts[2] not in ("d0", "d2"):
                raise SelectorError(f"Separated orbit must be d0 or d2, got {parts[2]!r}.")
            d_index = OrbitIndex(int(parts[2][1]))
        return basic_handle(kind, polarity, d_index)

    def classify(self, text: str, selector: str) -> FatHandle:
        _, flow = self.build(text)
        k = select_orbit(flow, parse_selector(selector))
        fh = remove_orbit(flow, k)
        self.log(f"Removed {flow.orbit_label(k)}: {fh.name} {fh.handle_class.label} ({fh.polarity.value})")
        return fh

    def identify(self, spec_a: str, spec_r: str) -> FlowModel:
        return identify(self.handle(spec_a), self.handle(spec_r))

    # ------------------------------------------------------------ orders

    def order(self, text: str) -> Tuple[FlowModel, SaddlePoset]:
        _, flow = self.build(text)
        poset = f3_poset(flow) if is_f3(flow) else saddle_poset(flow)
        return flow, poset

    def commuting(self, flow: FlowModel):
        pairs = commuting_steps(flow)
        self.log(f"{len(pairs)} commuting step pair(s)")
        return pairs

    # ------------------------------------------------------------ census

    def census(self, n: int, dualize: bool = False) -> FlowCensus:
        check_bound(n, self.config.max_saddles)
        self.log(f"Enumerating flows with {n} saddle(s){' up to duality' if dualize else ''}")
        return enumerate_flows(
            n,
            dualize=dualize,
            max_saddles=self.config.max_saddles,
            verbose=self.verbose,
            workers=self.config.workers,
        )

    def run_census(self, n: int, dualize: bool, output_root: Optional[str] = None) -> str:
        """Write census records, a JSON summary and a markdown report; returns the run directory."""
        run_id = f"census_n{n}_{'dual' if dualize else 'plain'}"
        output_dir = os.path.join(output_root or self.config.output_root, run_id)
        os.makedirs(output_dir, exist_ok=True)
        self.ctx = RunContext(
            run_id=run_id,
            started_at=now_iso(),
            command="enumerate",
            output_dir=output_dir,
            params={"n": n, "dualize": dualize},
        )
        census = self.census(n, dualize)
        oracle = oracle_count(n, dualize) if n <= ORACLE_LIMIT else None
        verdict = GoldenLedger(self.config.ledger_path).check_census(n, dualize, census.size, oracle)
        self.log(f"Oracle: {oracle} classes, ledger {verdict['status']}")

        write_census_records(os.path.join(output_dir, "census.jsonl"), census)
        save_json(os.path.join(output_dir, "census.json"), {
            "n": n,
            "dualize": dualize,
            "flows": census.size,
            "oracle": oracle,
            "links": {link.text: count for link, count in sorted(census.links.items())},
            "classes": census.class_table,
        })
        write_census_report(os.path.join(output_dir, "report.md"), self.ctx, census, oracle)
        self.log(f"Done. Outputs saved to: {output_dir}")
        return output_dir

    # ------------------------------------------------------------ rendering

    def render(self, text: str, kind: DiagramKind) -> DiagramDoc:
        _, flow = self.build(text)
        if kind is DiagramKind.HASSE:
            return hasse_dot(f3_poset(flow) if is_f3(flow) else saddle_poset(flow))
        if kind is DiagramKind.FILTRATION:
            return filtration_dot(flow, self.commuting(flow))
        return schematic_svg(flow, self.config.max_drawable_saddles)

    # ------------------------------------------------------------ verification

    def verify(self, suite: str, n: Optional[int] = None) -> Tuple[pd.DataFrame, Dict[str, Any]]:
        self.log(f"Running verify suite {suite}" + (f" with n={n}" if n is not None else ""))
        report = run_suite(suite, n, self.selectors, GoldenLedger(self.config.ledger_path), workers=self.config.workers)
        summary = summarize(report)
        self.log(f"{summary['passed']}/{summary['total']} assertions passed")
        return report, summary
