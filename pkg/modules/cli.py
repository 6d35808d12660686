import argparse
import json
import logging
from pathlib import Path
from typing import List

from colorama import Fore, Style, init
from tabulate import tabulate

from config.settings import DEFAULT_WITNESS_CAP, LOG_LEVEL, SWEEP_WORKERS
from modules.comonads import ComonadKind, build_comonad
from modules.covers import (
    ForestCover,
    PebbleForestCover,
    compute_tree_depth,
    compute_tree_width,
    eliminate_equalities,
    find_pebble_forest_cover,
)
from modules.enumeration import ALL, KRIPKE_SIGNATURE, ClassSpec, enumerate_structures
from modules.equivalence import (
    distinguishing_formula,
    distinguishing_modal_formula,
    equiv_counting,
    kWL_refine,
    modal_equiv,
)
from modules.exceptions import HomlabError, MalformedInputError
from modules.formulas import (
    GradedBox,
    GradedDiamond,
    Prop,
    children,
    eval_formula,
    eval_modal,
    format_formula,
    node_count,
    parse_formula,
    quantifier_depth,
    width,
)
from modules.homcount import hom_count, hom_count_treedec, strong_emb_count
from modules.normal_forms import (
    canonical_conjunctive_query,
    distinct_edge_reference,
    distinct_edge_sentence,
    hom_profile_sentence,
    threshold_lift,
)
from modules.structures import PointedStructure, RelStructure
from modules.utils import (
    comonad_sidecar,
    cover_to_dict,
    dump_structure,
    load_cover,
    load_structure,
    structure_to_dict,
)
from modules.verification import (
    THEOREMS,
    SweepReport,
    check_adjunction,
    check_factorization,
    check_wl_consistency,
    sweep,
    verify_theorem,
)

init(autoreset=True)
logger = logging.getLogger(__name__)


class HomlabCLI:
    """Command line interface for the homlab toolkit."""

    def create_parser(self) -> argparse.ArgumentParser:
        """Creates the argument parser."""
        parser = argparse.ArgumentParser(
            description="homlab - homomorphism counts, covers, game comonads and counting logic",
            formatter_class=argparse.RawDescriptionHelpFormatter,
            epilog="""
Examples:
  python homlab.py hom-count --source K2.json --target K3.json
  python homlab.py equiv --logic ck --width 2 C6.txt 2K3.txt
  python homlab.py sweep --theorem grohe --depth 2 --max-size 4 --witness-cap 5 --out report.json
            """
        )
        parser.add_argument('--verbose', '-v', action='store_true', help='Debug logging and tracebacks')
        sub = parser.add_subparsers(dest='command', required=True)

        p = sub.add_parser('hom-count', help='Count homomorphisms C -> A')
        p.add_argument('--source', required=True, help='Source structure C')
        p.add_argument('--target', required=True, help='Target structure A')
        p.add_argument('--strong-emb', action='store_true', help='Count strong embeddings instead')
        p.add_argument('--treedec', help='Pebble cover of C for the dynamic programming count')

        p = sub.add_parser('treedepth', help='Tree-depth with a realizing forest cover')
        p.add_argument('structure')

        p = sub.add_parser('treewidth', help='Tree-width with a realizing pebble cover')
        p.add_argument('structure')

        p = sub.add_parser('cover', help='Search a k-pebble forest cover')
        p.add_argument('structure')
        p.add_argument('--k', type=int, required=True)
        p.add_argument('--height', type=int)

        p = sub.add_parser('eliminate', help='Eliminate the equality symbol by one-step quotients')
        p.add_argument('structure')
        p.add_argument('cover')

        p = sub.add_parser('comonad', help='Materialize a comonad carrier')
        p.add_argument('structure')
        p.add_argument('--kind', choices=['ef', 'pebble', 'modal'], required=True)
        p.add_argument('--n', type=int, default=1, help='Play length bound')
        p.add_argument('--k', type=int, default=1, help='Pebbles, or path length for modal')
        p.add_argument('--out', help='Write carrier to OUT and the decoding table to OUT with .plays.json')

        p = sub.add_parser('equiv', help='Decide logical equivalence')
        p.add_argument('a')
        p.add_argument('b')
        p.add_argument('--logic', choices=['cn', 'ck', 'ckn', 'modal'], required=True)
        p.add_argument('--depth', '--n', dest='n', type=int)
        p.add_argument('--width', '--k', dest='k', type=int)
        p.add_argument('--explain', action='store_true', help='Print a distinguishing formula')

        p = sub.add_parser('wl', help='k-dimensional Weisfeiler-Leman refinement')
        p.add_argument('a')
        p.add_argument('b')
        p.add_argument('--k', type=int, default=1)

        p = sub.add_parser('eval', help='Evaluate a sentence or modal formula')
        p.add_argument('structure')
        p.add_argument('formula', help='Formula file or inline S-expression')

        p = sub.add_parser('ccq', help='Canonical conjunctive query')
        p.add_argument('structure')
        p.add_argument('--cover', help='Forest or pebble cover fixing the layout')

        p = sub.add_parser('lift', help='Lift a primitive positive formula to threshold t')
        p.add_argument('formula', help='Formula file or inline S-expression')
        p.add_argument('--t', type=int, required=True)

        p = sub.add_parser('demo', help='Worked constructions')
        demo = p.add_subparsers(dest='demo', required=True)
        d = demo.add_parser('distinct-edge', help='Equality-free distinct edge sentence')
        d.add_argument('structure')
        d.add_argument('--bound', type=int, default=9)
        d = demo.add_parser('profile', help='Hom-count profile sentence of a structure')
        d.add_argument('structure')
        d.add_argument('--sources-max', type=int, default=2)

        for name in ('verify', 'sweep'):
            p = sub.add_parser(name, help='Check a theorem on pairs' if name == 'verify'
                               else 'Check a theorem on all pairs of a class')
            p.add_argument('--theorem', choices=THEOREMS, required=True)
            p.add_argument('--depth', '--n', dest='n', type=int)
            p.add_argument('--k', type=int)
            p.add_argument('--max-size', type=int, default=4)
            p.add_argument('--witness-cap', type=int, default=DEFAULT_WITNESS_CAP)
            p.add_argument('--general', action='store_true', help='General structures instead of simple graphs')
            p.add_argument('--workers', type=int, default=SWEEP_WORKERS)
            p.add_argument('--out', help='Write the JSON report here')
            p.add_argument('--timing', action='store_true', help='Include timings in the report')
            if name == 'verify':
                p.add_argument('structures', nargs='*', help='Two structure files')
                p.add_argument('--pairs', help='Directory of structure files; every pair is checked')

        p = sub.add_parser('consistency', help='Cross-check deciders and counting identities')
        p.add_argument('--check', choices=['wl', 'factorization', 'adjunction', 'all'], default='all')
        p.add_argument('--max-size', type=int, default=4)

        return parser

    def run(self, args) -> int:
        """Runs the selected command and returns the exit code."""
        logging.basicConfig(level=logging.DEBUG if args.verbose else LOG_LEVEL)
        handler = getattr(self, '_cmd_' + args.command.replace('-', '_'))
        try:
            result = handler(args)
            return result if isinstance(result, int) else 0
        except KeyboardInterrupt:
            print(f"\n{Fore.YELLOW}Operation canceled{Style.RESET_ALL}")
            return 130
        except HomlabError as e:
            print(f"{Fore.RED} Error: {e}{Style.RESET_ALL}")
            return 2
        except Exception as e:
            print(f"{Fore.RED} Unexpected error: {e}{Style.RESET_ALL}")
            if args.verbose:
                import traceback
                traceback.print_exc()
            return 1

    def _cmd_hom_count(self, args):
        C, A = self._plain(load_structure(args.source)), self._plain(load_structure(args.target))
        if args.strong_emb:
            print(strong_emb_count(C, A))
        elif args.treedec:
            cover = load_cover(args.treedec, C)
            if isinstance(cover, ForestCover):
                raise MalformedInputError("--treedec needs a cover with pebbles")
            print(hom_count_treedec(C, cover, A))
        else:
            print(hom_count(C, A))

    def _cmd_treedepth(self, args):
        A = self._plain(load_structure(args.structure))
        depth, cover = compute_tree_depth(A)
        self._print_header(f"TREE-DEPTH OF {A.name}")
        self._print_table([["tree-depth", depth], ["cover", json.dumps(cover_to_dict(cover))]])

    def _cmd_treewidth(self, args):
        A = self._plain(load_structure(args.structure))
        tw, cover = compute_tree_width(A)
        self._print_header(f"TREE-WIDTH OF {A.name}")
        self._print_table([["tree-width", tw], ["pebbles", cover.k], ["cover", json.dumps(cover_to_dict(cover))]])

    def _cmd_cover(self, args):
        A = self._plain(load_structure(args.structure))
        cover = find_pebble_forest_cover(A, args.k, args.height)
        if cover is None:
            print(f"{Fore.YELLOW} No {args.k}-pebble forest cover"
                  f"{'' if args.height is None else f' of height <= {args.height}'}{Style.RESET_ALL}")
            return 1
        print(json.dumps(cover_to_dict(cover)))

    def _cmd_eliminate(self, args):
        A = self._plain(load_structure(args.structure))
        cover = load_cover(args.cover, A)
        if not isinstance(cover, PebbleForestCover):
            raise MalformedInputError("Equality elimination needs a cover with pebbles")
        result, new_cover = eliminate_equalities(A, cover)
        print(json.dumps({"structure": structure_to_dict(result), "cover": cover_to_dict(new_cover)}, indent=2))

    def _cmd_comonad(self, args):
        kind = {'ef': lambda: ComonadKind.ef(args.n), 'pebble': lambda: ComonadKind.pebble(args.k, args.n),
                'modal': lambda: ComonadKind.modal(args.k)}[args.kind]()
        base = load_structure(args.structure)
        if kind.tag != 'modal':
            base = self._plain(base)
        cs = build_comonad(kind, base)
        sidecar = json.dumps(comonad_sidecar(cs), indent=2)
        if args.out:
            out = Path(args.out)
            out.write_text(dump_structure(cs.carrier))
            out.with_suffix('.plays.json').write_text(sidecar)
            print(f"{Fore.GREEN} {cs.carrier.name}: {cs.carrier.size} elements written to {out}{Style.RESET_ALL}")
        else:
            print(dump_structure(cs.carrier))
            print(sidecar)

    def _cmd_equiv(self, args):
        A, B = load_structure(args.a), load_structure(args.b)
        if args.logic == 'modal':
            if not isinstance(A, PointedStructure) or not isinstance(B, PointedStructure):
                raise MalformedInputError("Modal equivalence needs pointed structures")
            if args.n is None:
                raise MalformedInputError("--depth is required for modal equivalence")
            verdict = modal_equiv(A, B, args.n)
            explain = lambda: distinguishing_modal_formula(A, B, args.n)
        else:
            A, B = self._plain(A), self._plain(B)
            depth = None if args.logic == 'ck' else args.n
            k = None if args.logic == 'cn' else args.k
            if (args.logic != 'ck' and depth is None) or (args.logic != 'cn' and k is None):
                raise MalformedInputError(f"--logic {args.logic} needs "
                                          f"{'--depth' if depth is None and args.logic != 'ck' else '--width'}")
            verdict = equiv_counting(A, B, depth=depth, width=k)
            explain = lambda: distinguishing_formula(A, B, depth=depth, width=k)
        self._print_verdict(f"{A.name} vs {B.name} ({args.logic})", verdict, "equivalent", "distinguished")
        if args.explain and not verdict:
            print(format_formula(explain()))

    def _cmd_wl(self, args):
        A, B = self._plain(load_structure(args.a)), self._plain(load_structure(args.b))
        first, second, equivalent = kWL_refine(A, B, args.k)
        self._print_header(f"{args.k}-WL: {A.name} vs {B.name}")
        rows = [[color, first.histogram().get(color, 0), second.histogram().get(color, 0)]
                for color in sorted(set(first.histogram()) | set(second.histogram()))]
        print(tabulate(rows, headers=["Colour", A.name, B.name], tablefmt="grid"))
        print(f"Stable after {first.rounds} rounds")
        self._print_verdict(f"{A.name} vs {B.name}", equivalent, "equivalent", "distinguished")

    def _cmd_eval(self, args):
        S = load_structure(args.structure)
        phi = parse_formula(self._formula_text(args.formula))
        if self._is_modal(phi):
            if not isinstance(S, PointedStructure):
                raise MalformedInputError("Modal formulas are evaluated at a pointed structure")
            result = eval_modal(S, phi)
        else:
            result = eval_formula(self._plain(S), phi)
        print("true" if result else "false")

    def _cmd_ccq(self, args):
        A = self._plain(load_structure(args.structure))
        layout = load_cover(args.cover, A) if args.cover else None
        print(format_formula(canonical_conjunctive_query(A, layout)))

    def _cmd_lift(self, args):
        phi = parse_formula(self._formula_text(args.formula))
        lifted = threshold_lift(phi, args.t)
        logger.info(f"Lift to {args.t}: {node_count(lifted)} distinct nodes, depth {quantifier_depth(lifted)}, "
                    f"width {width(lifted)}")
        print(format_formula(lifted))

    def _cmd_demo(self, args):
        B = self._plain(load_structure(args.structure))
        if args.demo == 'distinct-edge':
            sentence = distinct_edge_sentence(args.bound, B.signature.names[0])
            reference = distinct_edge_reference(B.signature.names[0])
            self._print_header("DISTINCT EDGE SENTENCE")
            self._print_table([
                ["structure", B.name],
                ["bound", args.bound],
                ["exact on this structure", B.size ** 2 <= args.bound],
                ["formula nodes", node_count(sentence)],
                ["equality-free sentence", eval_formula(B, sentence)],
                ["sentence with equality", eval_formula(B, reference)],
            ])
            return
        sources = list(enumerate_structures(ClassSpec(ALL, args.sources_max, B.signature,
                                                      graphs=B.signature.names == ('E',))))
        sentence = hom_profile_sentence(B, sources)
        self._print_header(f"HOM PROFILE OF {B.name}")
        self._print_table([[C.name, hom_count(C, B)] for C in sources] +
                          [["formula nodes", node_count(sentence)], ["holds in itself", eval_formula(B, sentence)]])

    def _cmd_verify(self, args):
        if args.pairs:
            structures = [load_structure(p) for p in sorted(Path(args.pairs).iterdir()) if p.is_file()]
        elif args.structures:
            if len(args.structures) != 2:
                raise MalformedInputError("verify takes exactly two structure files")
            structures = [load_structure(p) for p in args.structures]
        else:
            return self._cmd_sweep(args)
        params = self._params(args)
        report = SweepReport(args.theorem, params, "files", args.witness_cap)
        for i in range(len(structures)):
            for j in range(i + 1, len(structures)):
                report.pairs.append(verify_theorem(args.theorem, structures[i], structures[j], params,
                                                   args.witness_cap))
        return self._finish_report(report, args)

    def _cmd_sweep(self, args):
        params = self._params(args)
        if args.theorem == 'modal':
            universe = ClassSpec(ALL, args.max_size, KRIPKE_SIGNATURE, graphs=False, pointed=True)
        else:
            universe = ClassSpec(ALL, args.max_size, graphs=not args.general)
        report = sweep(args.theorem, universe, params, args.witness_cap, args.workers)
        return self._finish_report(report, args)

    def _cmd_consistency(self, args):
        checks = ['wl', 'factorization', 'adjunction'] if args.check == 'all' else [args.check]
        rows = []
        failed = False
        for check in checks:
            if check == 'wl':
                report = check_wl_consistency(args.max_size)
            elif check == 'factorization':
                report = check_factorization(min(args.max_size, 3), min(args.max_size, 3))
            else:
                report = check_adjunction(min(args.max_size, 3))
            failed = failed or not report.ok
            rows.append([report.check, report.instances, len(report.mismatches),
                         f"{Fore.GREEN}ok{Style.RESET_ALL}" if report.ok else f"{Fore.RED}FAILED{Style.RESET_ALL}"])
            for line in report.mismatches[:10]:
                print(f"{Fore.RED} {report.check}: {line}{Style.RESET_ALL}")
        self._print_header("CONSISTENCY CHECKS")
        print(tabulate(rows, headers=["Check", "Instances", "Mismatches", "Status"], tablefmt="grid"))
        return 1 if failed else 0

    def _finish_report(self, report: SweepReport, args) -> int:
        summary = report.summary
        self._print_header(f"{report.theorem.upper()} {json.dumps(report.params, sort_keys=True)}")
        rows = [[p.a, p.b, p.logic, p.witness.name if p.witness else "-",
                 p.witness.counts if p.witness else "-", self._color_outcome(p.outcome)]
                for p in report.pairs if p.outcome != 'agree-equivalent' or args.verbose]
        if rows:
            print(tabulate(rows[:50], headers=["A", "B", "Logic", "Witness", "Counts", "Outcome"], tablefmt="grid"))
            if len(rows) > 50:
                print(f"{Fore.YELLOW}... and {len(rows) - 50} more pairs{Style.RESET_ALL}")
        print(tabulate(sorted(summary.items()), headers=["Outcome", "Pairs"], tablefmt="grid"))
        if args.out:
            Path(args.out).write_text(report.to_json(args.timing))
            print(f"{Fore.CYAN} Report written to {args.out}{Style.RESET_ALL}")
        failures = report.failures
        if failures:
            print(f"{Fore.RED} {failures} failures{Style.RESET_ALL}")
            return 1
        print(f"{Fore.GREEN} No failures{Style.RESET_ALL}")
        return 0

    def _params(self, args) -> dict:
        params = {}
        if args.n is not None:
            params['n'] = args.n
        if args.k is not None:
            params['k'] = args.k
        return params

    @staticmethod
    def _plain(S) -> RelStructure:
        return S.structure if isinstance(S, PointedStructure) else S

    @staticmethod
    def _formula_text(source: str) -> str:
        path = Path(source)
        if not source.lstrip().startswith('(') and path.is_file():
            return path.read_text()
        return source

    @staticmethod
    def _is_modal(phi) -> bool:
        stack, seen = [phi], set()
        while stack:
            node = stack.pop()
            if id(node) in seen:
                continue
            seen.add(id(node))
            if isinstance(node, (Prop, GradedDiamond, GradedBox)):
                return True
            stack.extend(children(node))
        return False

    def _color_outcome(self, outcome: str) -> str:
        color = {'failure': Fore.RED, 'exhausted': Fore.YELLOW}.get(outcome, Fore.GREEN)
        return f"{color}{outcome}{Style.RESET_ALL}"

    def _print_verdict(self, title: str, verdict: bool, yes: str, no: str):
        color = Fore.GREEN if verdict else Fore.YELLOW
        print(f"{color}{title}: {yes if verdict else no}{Style.RESET_ALL}")

    def _print_header(self, title: str):
        """Prints a header."""
        print(f"\n{Fore.CYAN}{Style.BRIGHT}{'=' * 60}")
        print(f"{title:^60}")
        print(f"{'=' * 60}{Style.RESET_ALL}\n")

    def _print_table(self, data: List):
        """Prints a field/value table."""
        print(tabulate(data, headers=["Field", "Value"], tablefmt="grid"))
        print()
