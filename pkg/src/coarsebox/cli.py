"""Command-line surface. stdout carries data, stderr carries structured JSON
errors; exit codes: 2 bad input, 3 budget, 4 internal consistency."""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from . import cayley, detect, homotopy, towers
from .boxspace import compare_towers, validate_obstruction
from .config import DEFAULT_VERTEX_BUDGET, Config
from .errors import BadInputError, CoarseboxError, NoCycleError
from .paper import run_paper
from .words import parse_presentation


def _write_json(path, data) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _print_json(data) -> None:
    print(json.dumps(data, indent=2, sort_keys=True))


def _resolve_budget(args) -> int:
    if getattr(args, "budget", None):
        return args.budget
    env = os.environ.get("COARSEBOX_BUDGET")
    if env:
        try:
            return int(env)
        except ValueError:
            raise BadInputError(f"COARSEBOX_BUDGET={env!r} is not an integer")
    return DEFAULT_VERTEX_BUDGET


def _config(args) -> Config:
    return Config(vertex_budget=_resolve_budget(args))


def _graph_summary(X, with_girth: bool = True) -> dict:
    out = {
        "num_vertices": X.num_vertices,
        "n_generators": X.n_generators,
        "provenance": X.provenance,
        "diameter": cayley.diameter(X),
    }
    if with_girth:
        try:
            length, witness = cayley.girth_word(X)
            out["girth"] = length
            out["girth_witness"] = str(witness)
        except NoCycleError:
            out["girth"] = None
    return out


def cmd_quotient(args) -> int:
    budget = _resolve_budget(args)
    if args.builder == "sl2":
        X = cayley.from_matrices_sl2(args.modulus, vertex_budget=budget)
    elif args.builder == "voltage":
        base = cayley.read_graph(args.input)
        X, cov = cayley.voltage_cover(base, args.m, vertex_budget=budget)
        if args.map_out:
            _write_json(args.map_out, [int(x) for x in cov])
    elif args.builder == "perms":
        with open(args.input) as fh:
            data = json.load(fh)
        X = cayley.from_permutations(int(data["n_generators"]), data["perms"])
    elif args.builder == "bouquet":
        X = cayley.bouquet(args.n)
    else:  # pragma: no cover - argparse restricts choices
        raise BadInputError(f"unknown builder {args.builder}")
    cayley.write_graph(X, args.out)
    _print_json(_graph_summary(X, with_girth=X.num_vertices > 1))
    return 0


def cmd_detect(args) -> int:
    with open(args.presentation) as fh:
        P = parse_presentation(fh.read())
    X = cayley.read_graph(args.quotient)
    deep = cayley.read_graph(args.deep)
    report = detect.detect_report(X, P, deep)
    data = report.to_json_dict()
    _write_json(args.out, data)
    _write_csv(
        Path(args.out).with_suffix(".csv"),
        ["k", "systole_kind", "systole", "window", "betti", "torsion", "applicable"],
        [[
            report.k,
            report.certificate.kind,
            report.certificate.value,
            " ".join(map(str, report.window)),
            report.h1.betti,
            " ".join(map(str, report.h1.torsion)),
            report.detection_applicable,
        ]],
    )
    if args.emit == "dot":
        filled = detect.fill_relators(X, P)
        comments = [f"cell at {c.start}: {c.word}" for c in filled.cells]
        dot_path = Path(args.out).with_suffix(".dot")
        with open(dot_path, "w") as fh:
            fh.write(cayley.to_dot(X, comments=comments))
    if not args.no_figures:
        from .plotting import save_detect_window

        save_detect_window(report, Path(args.out).with_suffix(".png"))
    _print_json(data)
    return 0


def cmd_oracle(args) -> int:
    X = cayley.read_graph(args.graph)
    report = homotopy.classify_loops(
        X,
        args.r,
        args.maxlen,
        state_budget=args.state_budget,
        edge_budget=args.edge_budget,
    )
    data = report.to_json_dict()
    _write_json(args.out, data)
    _write_csv(
        Path(args.out).with_suffix(".csv"),
        ["class", "size", "representative"],
        [
            [i, size, " ".join(map(str, rep))]
            for i, (size, rep) in enumerate(zip(report.class_sizes, report.representatives))
        ],
    )
    if not args.no_figures:
        from .plotting import save_oracle_classes

        save_oracle_classes(report, Path(args.out).with_suffix(".png"))
    _print_json({"class_count": report.class_count, "states": report.n_states})
    return 0


def _tower_csv_rows(tower):
    rows = []
    for i, lv in enumerate(tower.levels, start=1):
        rows.append(
            [
                i,
                str(lv.index),
                str(lv.rank),
                lv.rank.coeff,
                lv.rank.base,
                lv.rank.exponent,
                lv.materialized,
                "" if lv.b1 is None else lv.b1,
            ]
        )
    return rows


def _emit_tower(tower, out: str, no_figures: bool, write_graphs: bool) -> None:
    graph_files = []
    stem = Path(out)
    for i, lv in enumerate(tower.levels, start=1):
        if lv.graph is not None and write_graphs:
            gpath = stem.with_suffix(f".level{i}.graph.json")
            cayley.write_graph(lv.graph, gpath)
            graph_files.append(str(gpath))
        else:
            graph_files.append(None)
    _write_json(out, tower.to_json_dict(graph_files))
    _write_csv(
        stem.with_suffix(".csv"),
        ["level", "index", "rank", "rank_coeff", "rank_base", "rank_exponent", "materialized", "b1"],
        _tower_csv_rows(tower),
    )
    if not no_figures:
        from .plotting import save_index_growth

        save_index_growth([tower], stem.with_suffix(".png"))


def cmd_tower(args) -> int:
    budget = _resolve_budget(args)
    if args.kind == "congruence":
        tower = towers.congruence_tower_sl2(args.family, args.depth, vertex_budget=budget)
    else:
        tower = towers.homology_tower(args.n, args.m, args.depth, vertex_budget=budget)
    _emit_tower(tower, args.out, args.no_figures, args.graphs)
    _print_json(
        {
            "label": tower.label,
            "levels": len(tower.levels),
            "indices": [str(lv.index) for lv in tower.levels],
            "ranks": [str(lv.rank) for lv in tower.levels],
        }
    )
    return 0


def _load_tower(path):
    with open(path) as fh:
        return towers.Tower.from_json_dict(json.load(fh))


def cmd_compare(args) -> int:
    t1 = _load_tower(args.t1)
    t2 = _load_tower(args.t2)
    verdict = compare_towers(t1, t2)
    data = verdict.to_json_dict()
    if verdict.proof is not None:
        data["revalidated"] = validate_obstruction(t1, t2, verdict.proof)
    _write_json(args.out, data)
    _write_csv(
        Path(args.out).with_suffix(".csv"),
        ["verdict", "witness"],
        [[verdict.verdict, verdict.witness]],
    )
    _print_json(data)
    return 0


def cmd_invariants(args) -> int:
    tower = _load_tower(args.tower)
    gradient, bound = towers.rank_gradient(tower)
    try:
        ratios = towers.betti_ratio_sequence(tower)
    except CoarseboxError:
        ratios = None
    data = {
        "label": tower.label,
        "rank_gradient": [str(v) for v in gradient],
        "rank_gradient_bound": str(bound),
        "betti_ratios": None if ratios is None else [str(v) for v in ratios],
    }
    _write_json(args.out, data)
    _write_csv(
        Path(args.out).with_suffix(".csv"),
        ["level", "rank_gradient", "betti_ratio"],
        [
            [i + 1, str(g), "" if ratios is None else str(ratios[i])]
            for i, g in enumerate(gradient)
        ],
    )
    if not args.no_figures:
        from .plotting import save_invariant_sequences

        save_invariant_sequences(gradient, ratios, tower.label, Path(args.out).with_suffix(".png"))
    _print_json(data)
    return 0


def cmd_paper(args) -> int:
    return run_paper(args.section, args.outdir, _config(args), figures=not args.no_figures)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coarsebox",
        description="coarse-geometric invariants of box spaces of finite quotients",
    )
    parser.add_argument("--budget", type=int, help="vertex budget (or COARSEBOX_BUDGET)")
    parser.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    parser.add_argument("--seed", type=int, help="reserved; all algorithms are deterministic")
    sub = parser.add_subparsers(dest="command", required=True)

    q = sub.add_parser("quotient", help="materialize a quotient Cayley graph")
    qsub = q.add_subparsers(dest="builder", required=True)
    q_sl2 = qsub.add_parser("sl2", help="image of F2 in SL2(Z/modulus)")
    q_sl2.add_argument("--modulus", type=int, required=True)
    q_sl2.add_argument("--out", default="graph.json")
    q_volt = qsub.add_parser("voltage", help="mod-m homology cover of a free quotient")
    q_volt.add_argument("--input", required=True)
    q_volt.add_argument("--m", type=int, required=True)
    q_volt.add_argument("--out", default="graph.json")
    q_volt.add_argument("--map-out", help="write the covering map JSON here")
    q_perms = qsub.add_parser("perms", help="orbit closure of explicit permutations")
    q_perms.add_argument("--input", required=True)
    q_perms.add_argument("--out", default="graph.json")
    q_bouquet = qsub.add_parser("bouquet", help="one-vertex quotient of a free group")
    q_bouquet.add_argument("--n", type=int, required=True)
    q_bouquet.add_argument("--out", default="graph.json")
    for p in (q_sl2, q_volt, q_perms, q_bouquet):
        p.set_defaults(func=cmd_quotient)

    d = sub.add_parser("detect", help="window, systole and H1 of the relator-filled complex")
    d.add_argument("--presentation", required=True)
    d.add_argument("--quotient", required=True)
    d.add_argument("--deep", required=True)
    d.add_argument("--out", default="detect.json")
    d.add_argument("--emit", choices=["dot"], help="also export the filled graph as DOT")
    d.set_defaults(func=cmd_detect)

    o = sub.add_parser("oracle", help="classify based loops by bounded move search")
    o.add_argument("--graph", required=True)
    o.add_argument("--r", type=int, required=True)
    o.add_argument("--maxlen", type=int, required=True)
    o.add_argument("--state-budget", type=int, default=Config().oracle_state_budget)
    o.add_argument("--edge-budget", type=int, default=Config().oracle_edge_budget)
    o.add_argument("--out", default="oracle.json")
    o.set_defaults(func=cmd_oracle)

    t = sub.add_parser("tower", help="generate a filtration tower")
    tsub = t.add_subparsers(dest="kind", required=True)
    t_c = tsub.add_parser("congruence", help="SL2 congruence tower of F2")
    t_c.add_argument("--family", choices=["N", "M"], required=True)
    t_c.add_argument("--depth", type=int, required=True)
    t_h = tsub.add_parser("homology", help="mod-m homology tower of a free group")
    t_h.add_argument("--n", type=int, required=True)
    t_h.add_argument("--m", type=int, required=True)
    t_h.add_argument("--depth", type=int, required=True)
    for p in (t_c, t_h):
        p.add_argument("--out", default="tower.json")
        p.add_argument("--graphs", action="store_true", help="write materialized graph files")
        p.set_defaults(func=cmd_tower)

    c = sub.add_parser("compare", help="rank-invariant obstruction between two towers")
    c.add_argument("--t1", required=True)
    c.add_argument("--t2", required=True)
    c.add_argument("--out", default="compare.json")
    c.set_defaults(func=cmd_compare)

    inv = sub.add_parser("invariants", help="rank gradient and Betti ratio sequences")
    inv.add_argument("--tower", required=True)
    inv.add_argument("--out", default="invariants.json")
    inv.set_defaults(func=cmd_invariants)

    p = sub.add_parser("paper", help="reproduction suite with PASS/FAIL rows")
    p.add_argument("section", choices=["4.1", "4.4", "4.5", "all"])
    p.add_argument("--outdir", default="paper_out")
    p.set_defaults(func=cmd_paper)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": 2}),
            file=sys.stderr,
        )
        return 2
    except CoarseboxError as exc:
        print(
            json.dumps(
                {"error": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code}
            ),
            file=sys.stderr,
        )
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
