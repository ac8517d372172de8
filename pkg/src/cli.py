#!/usr/bin/env python3
"""
Command-line interface for the adaptive-regret toolkit
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from src.experiments.runner import (
    EXIT_ERROR, EXIT_PASS, RunOutcome, audit_from_files, batch_exit_code, run_batch,
)
from src.intervals.covering import cgc_cover, marker_cover
from src.intervals.diagram import KINDS, format_cover, render_intervals
from src.utils.config import (
    horizon_for_diagram, load_environment, load_run_config, render_template,
)
from src.utils.errors import ConfigError, ContractViolation
from src.utils.logger import setup_logger

logger = setup_logger(__name__)


class AdaRegretCLI:
    """Command-line interface for running and auditing adaptive-regret learners"""

    def __init__(self, config_dir: str = 'config'):
        load_environment(config_dir)

    def _report(self, outcome: RunOutcome):
        audit = outcome.audit
        status = '✅ PASSED' if audit.passed else '❌ FAILED'
        print(f"\n📊 {outcome.trace.learner} (seed {outcome.seed}): {status}")
        print(f"   Rounds: {outcome.trace.horizon}")
        print(f"   Total loss: {float(outcome.trace.learner_losses.sum()):.6f}")
        print(f"   Intervals audited: {audit.intervals_audited}")
        print(f"   Reports: {len(audit.reports)} | Violations: {len(audit.violations)}")
        if audit.excluded:
            print(f"   ⚠️  Excluded intervals (solver did not converge): {len(audit.excluded)}")
        for report in audit.violations[:5]:
            print(f"   • {report.check} [{report.r}, {report.s}]: "
                  f"{report.measured:.6g} > {report.bound:.6g}")
        if outcome.directory is not None:
            print(f"   Output: {outcome.directory}")

    def run(self, config_path: str, out_dir: Optional[str], seed: Optional[int]) -> int:
        """Run the configured learner (or seed batch), audit, and write results"""
        config = load_run_config(config_path)
        if seed is not None:
            config = config.with_seed(seed)
        out = out_dir or config.output_dir
        print(f"🚀 Running {config.learner} for T={config.scenario.horizon}...")
        outcomes = run_batch(config, Path(out) if out else None)
        for outcome in outcomes:
            self._report(outcome)
        return batch_exit_code(outcomes)

    def intervals(self, kind: str, horizon: int, markers: Optional[List[int]]) -> int:
        print(render_intervals(kind, horizon_for_diagram(horizon), markers))
        return EXIT_PASS

    def cover(self, kind: str, left: int, right: int) -> int:
        cover = cgc_cover(left, right) if kind == 'cgc' else marker_cover(left, right)
        print(format_cover(cover))
        return EXIT_PASS

    def audit(self, trace_path: str, config_path: str, out: Optional[str], seed: Optional[int] = None) -> int:
        """Re-audit a stored trace offline"""
        config = load_run_config(config_path)
        if seed is not None:
            config = config.with_seed(seed)
        outcome = audit_from_files(Path(trace_path), config, Path(out) if out else None)
        self._report(outcome)
        return outcome.exit_code

    def template(self, learner: str, fmt: str) -> int:
        print(render_template(learner, fmt))
        return EXIT_PASS


def create_parser():
    """Create command-line argument parser"""
    parser = argparse.ArgumentParser(
        description='Strongly adaptive online learning for smooth losses: run, inspect, audit',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python -m src.cli run --config config/sacs.json --out results/sacs
  python -m src.cli intervals --kind cgc --horizon 16
  python -m src.cli cover --kind cgc --from 5 --to 23
  python -m src.cli audit --trace results/sacs/trace.csv --config config/sacs.json
  python -m src.cli template --learner sacs-cpgc
        """
    )

    subparsers = parser.add_subparsers(dest='command', help='Available commands')

    run_parser = subparsers.add_parser('run', help='Run a learner and audit its regret')
    run_parser.add_argument('--config', required=True, help='Run configuration (JSON or YAML)')
    run_parser.add_argument('--out', help='Output directory (defaults to output_dir in the config)')
    run_parser.add_argument('--seed', type=int, help='Override the configured seed')

    intervals_parser = subparsers.add_parser('intervals', help='Draw an interval system')
    intervals_parser.add_argument('--kind', choices=KINDS, default='cgc')
    intervals_parser.add_argument('--horizon', type=int, required=True,
                                  help='Rounds (or marker indices for pgc/cpgc)')
    intervals_parser.add_argument('--markers', type=int, nargs='+',
                                  help='Marker rounds s_1 < s_2 < ... for pgc/cpgc diagrams')

    cover_parser = subparsers.add_parser('cover', help='Greedy interval cover of [from, to]')
    cover_parser.add_argument('--kind', choices=['cgc', 'cpgc'], default='cgc')
    cover_parser.add_argument('--from', dest='left', type=int, required=True)
    cover_parser.add_argument('--to', dest='right', type=int, required=True)

    audit_parser = subparsers.add_parser('audit', help='Audit a stored trace against the bounds')
    audit_parser.add_argument('--trace', required=True, help='trace.csv or its directory')
    audit_parser.add_argument('--config', required=True, help='Configuration the trace was produced with')
    audit_parser.add_argument('--out', help='Summary file (defaults to audit_summary.json beside the trace)')
    audit_parser.add_argument('--seed', type=int, help='Seed the trace was produced with (batch configurations)')

    template_parser = subparsers.add_parser('template', help='Print a configuration template')
    template_parser.add_argument('--learner', choices=['sogd', 'ogd-constant', 'sacs', 'sacs-cpgc'],
                                 default='sacs')
    template_parser.add_argument('--format', dest='fmt', choices=['json', 'yaml'], default='json')

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point; returns the process exit status"""
    parser = create_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return EXIT_PASS

    cli = AdaRegretCLI()

    try:
        if args.command == 'run':
            return cli.run(args.config, args.out, args.seed)

        elif args.command == 'intervals':
            return cli.intervals(args.kind, args.horizon, args.markers)

        elif args.command == 'cover':
            return cli.cover(args.kind, args.left, args.right)

        elif args.command == 'audit':
            return cli.audit(args.trace, args.config, args.out, args.seed)

        elif args.command == 'template':
            return cli.template(args.learner, args.fmt)

    except (ConfigError, ContractViolation, OSError) as e:
        logger.error(f"CLI error: {e}")
        print(f"❌ Error: {e}", file=sys.stderr)
        return EXIT_ERROR

    except KeyboardInterrupt:
        print("\n👋 Interrupted by user", file=sys.stderr)
        return EXIT_ERROR

    return EXIT_PASS


if __name__ == "__main__":
    sys.exit(main())
