import argparse
import sys
from typing import List, Optional

from calculus.dsl import print_expr, read_batch
from calculus.errors import FatHandleError
from calculus.flow_model import FlowModel, link_of
from calculus.link_algebra import canonicalize
from calculus.order import SaddlePoset, is_total
from fat_handle_toolkit import FatHandleToolkit, ToolkitConfig
from tools.export import census_records, census_table, class_table, dumps, flow_document, poset_document
from tools.flow_profiler import profile_flow
from tools.render import DiagramKind, filtration_dot, hasse_dot, schematic_svg, write_diagram

SUITE_NAMES = [
    "basic-catalog", "two-saddle", "bitorus", "class-closure", "heteroclinic",
    "f3-chain", "orders", "collisions", "commutation", "census", "invariants", "all",
]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["text", "json", "dot", "svg"], default="text", help="Output format")
    common.add_argument("--out", default=None, help="Write output to this path (directory for enumerate)")
    common.add_argument("--selectors", default=None, help="Selector table mapping bare expressions to explicit ones")
    common.add_argument("--max-saddles", type=int, default=None, help="Enumeration bound (overrides the environment)")
    common.add_argument("--workers", type=int, default=None, help="Processes used to build census levels")
    common.add_argument("--quiet", action="store_true", help="Reduce logs")

    parser = argparse.ArgumentParser(description="Fat round handle calculus for F_A flows on S^3.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", parents=[common], help="Elaborate an expression into a flow")
    p.add_argument("expr", nargs="?", help="Flow expression, e.g. 'III(III(h,h),h)'")
    p.add_argument("--batch", default=None, help="File with one expression per line")

    p = sub.add_parser("classify", parents=[common], help="Classify the fat handle left by removing an orbit")
    p.add_argument("expr")
    p.add_argument("selector", help="Orbit selector, e.g. 'sep.d2' or 'hopf.0#1'")

    p = sub.add_parser("identify", parents=[common], help="Identify an attractive and a repulsive fat handle")
    p.add_argument("attractive", help="'<expr>/<selector>' or 'kind:a[:d0|d2]'")
    p.add_argument("repulsive", help="'<expr>/<selector>' or 'kind:r[:d0|d2]'")

    p = sub.add_parser("order", parents=[common], help="Saddle order of a flow")
    p.add_argument("expr", nargs="?")
    p.add_argument("--batch", default=None, help="File with one expression per line")

    p = sub.add_parser("enumerate", parents=[common], help="Census of flows with n saddles")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--dualize", action="store_true", help="Identify flows with their time reversal")

    p = sub.add_parser("render", parents=[common], help="Draw a diagram of a flow")
    p.add_argument("expr")
    p.add_argument("kind", choices=[k.value for k in DiagramKind])

    p = sub.add_parser("verify", parents=[common], help="Run a verification suite")
    p.add_argument("suite", choices=SUITE_NAMES)
    p.add_argument("--n", type=int, default=None)
    return parser


def format_log(flow: FlowModel) -> List[str]:
    lines = ["log:"]
    for n, step in enumerate(flow.construction_log, start=1):
        extra = ""
        if step.d_index is not None:
            extra = f" (d{int(step.d_index)})"
        line = (
            f"  {n}. {step.attached.value}{extra} {step.attached_class.label} replaces orbit "
            f"{step.replaced_orbit} of a {step.derived_handle_class.label} handle -> {flow.orbit_label(step.new_saddle)}"
        )
        if step.produced_heteroclinic is not None:
            s, t = step.produced_heteroclinic
            line += f", heteroclinic {flow.orbit_label(s)}->{flow.orbit_label(t)}"
        lines.append(line)
    return lines


def format_flow(text: str, expr_text: str, flow: FlowModel) -> List[str]:
    link = canonicalize(link_of(flow))
    lines = [
        f"expr: {text}",
        f"explicit: {expr_text}",
        f"link: {link.plain_text}",
        f"canonical: {link.text}",
        "regions: " + ", ".join(
            "{" + ",".join(flow.orbit_label(o) for o in sorted(r.residents)) + "}" for r in flow.regions
        ),
    ]
    return lines + format_log(flow)


def format_poset(flow: FlowModel, poset: SaddlePoset) -> List[str]:
    saddles = [x for x in poset.elements if x in flow.saddles]
    sigma = {s: f"σ{n}" for n, s in enumerate(saddles, start=1)}

    def name(x):
        return sigma.get(x, poset.label(x))

    total = is_total(poset)
    if total:
        relation = "<".join(name(x) for x in poset.elements)
    elif poset.covers:
        relation = ", ".join(f"{name(s)}<{name(t)}" for s, t in sorted(poset.covers, key=lambda c: (name(c[0]), name(c[1]))))
    else:
        relation = "(no relations)"
    return [
        f"{relation}; total: {'true' if total else 'false'} over saddles",
        "saddles: " + ", ".join(f"{sigma[s]}={flow.orbit_label(s)}" for s in saddles),
    ]


def _emit(args, lines: List[str]) -> None:
    body = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(body)
    else:
        sys.stdout.write(body)


def _expressions(args) -> List[str]:
    if args.batch:
        return [expr for _, expr in read_batch(args.batch)]
    if not args.expr:
        raise FatHandleError("Give an expression or --batch FILE.")
    return [args.expr]


def cmd_build(tk: FatHandleToolkit, args) -> List[str]:
    out: List[str] = []
    documents = []
    for text in _expressions(args):
        e, flow = tk.build(text)
        if args.format == "json":
            documents.append({"expression": print_expr(e), "flow": flow_document(flow), "profile": profile_flow(flow)})
        elif args.format == "dot":
            out.append(filtration_dot(flow, tk.commuting(flow)).body.rstrip("\n"))
        elif args.format == "svg":
            out.append(schematic_svg(flow, tk.config.max_drawable_saddles).body.rstrip("\n"))
        else:
            if out:
                out.append("")
            out.extend(format_flow(text, print_expr(e), flow))
    if args.format == "json":
        out.append(dumps(documents if args.batch else documents[0]))
    return out


def cmd_classify(tk: FatHandleToolkit, args) -> List[str]:
    fh = tk.classify(args.expr, args.selector)
    if args.format == "json":
        return [dumps({
            "handle": fh.name,
            "class": fh.handle_class.value,
            "polarity": fh.polarity.value,
            "saddles": fh.saddle_count,
            "missing_indices": sorted(int(i) for i in fh.missing_indices),
        })]
    return [f"class: {fh.handle_class.label}", f"handle: {fh.name} ({fh.polarity.value})"]


def cmd_identify(tk: FatHandleToolkit, args) -> List[str]:
    flow = tk.identify(args.attractive, args.repulsive)
    if args.format == "json":
        return [dumps({"flow": flow_document(flow), "profile": profile_flow(flow)})]
    text = f"identify({args.attractive}, {args.repulsive})"
    link = canonicalize(link_of(flow))
    return [f"expr: {text}", f"link: {link.plain_text}", f"canonical: {link.text}"] + format_log(flow)


def cmd_order(tk: FatHandleToolkit, args) -> List[str]:
    out: List[str] = []
    documents = []
    for text in _expressions(args):
        flow, poset = tk.order(text)
        if args.format == "json":
            documents.append(poset_document(poset, is_total(poset)))
        elif args.format == "dot":
            out.append(hasse_dot(poset).body.rstrip("\n"))
        else:
            if args.batch:
                out.append(f"{text}:")
            out.extend(format_poset(flow, poset))
    if args.format == "json":
        out.append(dumps(documents if args.batch else documents[0]))
    return out


def cmd_enumerate(tk: FatHandleToolkit, args) -> List[str]:
    if args.out:
        out_dir = tk.run_census(args.n, args.dualize, output_root=args.out)
        args.out = None
        return [out_dir]
    census = tk.census(args.n, args.dualize)
    if args.format == "json":
        return [dumps(census_records(census))]
    lines = [
        f"n={census.n} dualize={'true' if census.dualize else 'false'}: {census.size} flows, "
        f"{len(census.links)} links, {len(census.collisions)} colliding",
        "",
        census_table(census).to_string(index=False),
        "",
        class_table(census).to_string(),
    ]
    return lines


def cmd_render(tk: FatHandleToolkit, args) -> List[str]:
    doc = tk.render(args.expr, DiagramKind(args.kind))
    if args.out:
        path = write_diagram(doc, args.out)
        args.out = None
        return [path]
    return [doc.body.rstrip("\n")]


def cmd_verify(tk: FatHandleToolkit, args) -> List[str]:
    report, summary = tk.verify(args.suite, args.n)
    args.failed = summary["status"] != "ok"
    if args.format == "json":
        return [dumps({"summary": summary, "checks": report.to_dict(orient="records")})]
    lines = [report.to_string(index=False), "", f"{summary['passed']}/{summary['total']} passed: {summary['status']}"]
    return lines


COMMANDS = {
    "build": cmd_build,
    "classify": cmd_classify,
    "identify": cmd_identify,
    "order": cmd_order,
    "enumerate": cmd_enumerate,
    "render": cmd_render,
    "verify": cmd_verify,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        config = ToolkitConfig.from_env(
            verbose=not args.quiet,
            selector_table=args.selectors,
            max_saddles=args.max_saddles,
            workers=args.workers,
        )
        tk = FatHandleToolkit(config)
        lines = COMMANDS[args.command](tk, args)
    except FatHandleError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1

    _emit(args, lines)
    return 1 if getattr(args, "failed", False) else 0


if __name__ == "__main__":
    sys.exit(main())
