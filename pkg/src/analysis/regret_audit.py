"""
Regret Audit Module
Measures interval regret on a recorded run and checks it against the
closed-form bound that matches the learner. Every check yields a
RegretReport with margin = bound − measured; a run fails when any margin
drops below −MARGIN_SLACK.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from src.analysis.comparator import ComparatorOracle, ComparatorResult
from src.experiments.trace_log import RunTrace
from src.geometry.domain import DomainSpec
from src.geometry.losses import LossFunction
from src.intervals.covering import Interval
from src.learners.meta import meta_regret_bound
from src.learners.sacs import cgc_interval_bound, sacs_interval_bound
from src.learners.sacs_cpgc import (
    cpgc_interval_bound, marker_count_bound, meta_regret_bound_cpgc, sacs_cpgc_interval_bound,
)
from src.learners.sogd import ogd_bound, sogd_bound
from src.utils.errors import ContractViolation
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

MARGIN_SLACK = 1e-6
EXHAUSTIVE_LIMIT = 256


@dataclass
class RegretReport:
    """One audited quantity against its bound

    For regret checks `measured` is the regret over [r, s] against `comparator`.
    Counting checks reuse the same shape: marker counts are measured against
    their ceiling, and segment losses use measured = C/4 with bound = the
    segment's comparator loss.
    """
    check: str
    r: int
    s: int
    comparator: Tuple[float, ...]
    comparator_loss: float
    measured: float
    bound: float
    margin: float = field(init=False)

    def __post_init__(self):
        # callers pass numpy scalars; reports are serialised with json
        self.r, self.s = int(self.r), int(self.s)
        self.comparator = tuple(float(x) for x in self.comparator)
        self.comparator_loss = float(self.comparator_loss)
        self.measured = float(self.measured)
        self.bound = float(self.bound)
        self.margin = self.bound - self.measured

    @property
    def passed(self) -> bool:
        return bool(self.margin >= -MARGIN_SLACK)

    def to_dict(self) -> Dict[str, object]:
        return {
            'check': self.check,
            'r': self.r,
            's': self.s,
            'comparator': list(self.comparator),
            'comparator_loss': self.comparator_loss,
            'regret': self.measured,
            'bound': self.bound,
            'margin': self.margin,
            'passed': self.passed,
        }


@dataclass(frozen=True)
class AuditPlan:
    """Which intervals and checks an audit covers"""
    dyadic: bool = True
    sampled: int = 1000
    exhaustive: bool = False
    stages: bool = True
    extra_comparators: int = 3
    seed: int = 0
    # multiplies a(t), ã(t) in the interval bounds; values below 1 weaken the
    # bound on purpose to confirm that the auditor reports violations
    a_scale: float = 1.0
    stage_regret_ratio: Optional[float] = None
    min_stage_length: int = 512


@dataclass(frozen=True)
class BoundContext:
    """Constants the bounds are evaluated with"""
    learner: str
    H: float
    D: float
    delta: float = 1.0
    threshold: Optional[float] = None
    ogd_radius: Optional[float] = None
    ogd_loss_level: Optional[float] = None


@dataclass
class AuditResult:
    reports: List[RegretReport]
    excluded: List[Interval] = field(default_factory=list)
    intervals_audited: int = 0

    @property
    def violations(self) -> List[RegretReport]:
        return [report for report in self.reports if not report.passed]

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> Dict[str, object]:
        return {
            'status': 'PASSED' if self.passed else 'FAILED',
            'intervals_audited': self.intervals_audited,
            'violations': len(self.violations),
            'excluded_intervals': [[i.start, i.end] for i in self.excluded],
            'reports': [report.to_dict() for report in self.reports],
        }


def interval_regret(trace: RunTrace, oracle: ComparatorOracle, r: int, s: int, w: np.ndarray) -> float:
    """Σ_{t=r}^s f_t(w_t) − Σ_{t=r}^s f_t(w)"""
    if r > s:
        raise ContractViolation(f"empty interval [{r}, {s}]")
    if r < 1 or s > trace.horizon:
        raise ContractViolation(f"interval [{r}, {s}] outside the trace")
    return trace.learner_interval_loss(r, s) - oracle.interval_loss(r, s, w)


def dyadic_intervals(horizon: int) -> List[Interval]:
    """[i·2^k, (i+1)·2^k − 1] for i ≥ 1 lying inside [1, horizon]"""
    intervals = []
    length = 1
    while length <= horizon:
        start = length
        while start + length - 1 <= horizon:
            intervals.append(Interval(start, start + length - 1))
            start += length
        length *= 2
    return intervals


def sampled_intervals(horizon: int, count: int, rng: np.random.Generator) -> List[Interval]:
    intervals = []
    for _ in range(count):
        a, b = sorted(int(x) for x in rng.integers(1, horizon + 1, size=2))
        intervals.append(Interval(a, b))
    return intervals


def interval_family(horizon: int, plan: AuditPlan,
                    stages: Sequence[Tuple[int, int]] = ()) -> List[Interval]:
    """Deduplicated, ordered union of the families the plan asks for"""
    family: Set[Interval] = set()
    if plan.exhaustive:
        if horizon > EXHAUSTIVE_LIMIT:
            raise ContractViolation(f"exhaustive audits are limited to T ≤ {EXHAUSTIVE_LIMIT}")
        family.update(Interval(r, s) for r in range(1, horizon + 1) for s in range(r, horizon + 1))
    if plan.dyadic:
        family.update(dyadic_intervals(horizon))
    if plan.sampled:
        family.update(sampled_intervals(horizon, plan.sampled, np.random.default_rng(plan.seed)))
    if plan.stages:
        family.update(Interval(a, b) for a, b in stages)
    return sorted(family)


class _Auditor:
    """Shared state of one audit: trace, comparator oracle and report list"""

    def __init__(self, trace: RunTrace, losses: Sequence[LossFunction], domain: DomainSpec,
                 context: BoundContext, plan: AuditPlan):
        if len(losses) != trace.horizon:
            raise ContractViolation(f"{len(losses)} losses for a trace of {trace.horizon} rounds")
        self.trace = trace
        self.oracle = ComparatorOracle(losses, domain)
        self.domain = domain
        self.context = context
        self.plan = plan
        self.reports: List[RegretReport] = []
        self.excluded: List[Interval] = []
        self._solved: Dict[Tuple[int, int], ComparatorResult] = {}
        self.learner_prefix = np.concatenate([[0.0], np.cumsum(trace.learner_losses)])
        rng = np.random.default_rng(plan.seed + 1)
        self.random_points = domain.sample(plan.extra_comparators, rng) if plan.extra_comparators else []

    def solve(self, r: int, s: int) -> Optional[ComparatorResult]:
        key = (r, s)
        if key not in self._solved:
            result = self.oracle.solve(r, s)
            if not result.converged:
                logger.warning(f"Excluding [{r}, {s}]: comparator solve did not converge")
                self.excluded.append(Interval(r, s))
            self._solved[key] = result
        result = self._solved[key]
        return result if result.converged else None

    def learner_loss(self, r: int, s: int) -> float:
        return float(self.learner_prefix[s] - self.learner_prefix[r - 1])

    def add(self, check: str, r: int, s: int, w: np.ndarray, comparator_loss: float,
            measured: float, bound: float) -> RegretReport:
        report = RegretReport(check, r, s, tuple(float(x) for x in w), comparator_loss, measured, bound)
        self.reports.append(report)
        return report

    def interval_checks(self, name: str, intervals: Iterable[Interval],
                        bound_fn: Callable[[int, int, np.ndarray, float], float]) -> int:
        """Regret over each interval against the minimiser and the random comparators"""
        audited = 0
        for interval in intervals:
            r, s = interval.start, interval.end
            best = self.solve(r, s)
            if best is None:
                continue
            audited += 1
            candidates = [(name, best.point, best.loss)]
            candidates += [(f"{name}-random", w, self.oracle.interval_loss(r, s, w)) for w in self.random_points]
            for check, w, loss in candidates:
                self.add(check, r, s, w, loss, self.learner_loss(r, s) - loss, bound_fn(r, s, w, loss))
        return audited

    def keep_worst(self, candidates: List[RegretReport]) -> None:
        """Per-round checks contribute only their tightest report"""
        if candidates:
            self.reports.append(min(candidates, key=lambda report: report.margin))


def _loss_range_checks(auditor: _Auditor) -> None:
    violations = auditor.trace.loss_range_violations()
    if violations:
        logger.warning(f"{len(violations)} losses fall outside [0, 1]")
    for t, start, value in violations:
        check = 'loss-range' if start is None else f"loss-range-expert-{start}"
        measured = value if value > 1.0 else 1.0 - value
        auditor.add(check, t, t, np.zeros(0), 0.0, measured, 1.0)


def _prefix_checks(auditor: _Auditor, name: str, bound_fn: Callable[[float], float]) -> None:
    """Regret over every prefix [1, t] against the prefix minimiser"""
    for t in range(1, auditor.trace.horizon + 1):
        best = auditor.solve(1, t)
        if best is None:
            continue
        auditor.add(name, 1, t, best.point, best.loss, auditor.learner_loss(1, t) - best.loss, bound_fn(best.loss))


def _expert_streams(auditor: _Auditor):
    learner = auditor.trace.learner_losses
    for start, expert in sorted(auditor.trace.expert_losses.items()):
        rounds = np.arange(start, start + expert.shape[0])
        meta = np.cumsum(learner[start - 1:start - 1 + expert.shape[0]] - expert)
        yield start, rounds, meta, np.cumsum(expert)


def _sogd_checks(auditor: _Auditor) -> None:
    ctx = auditor.context
    _prefix_checks(auditor, 'sogd-prefix', lambda L: sogd_bound(ctx.H, ctx.D, ctx.delta, L))


def _ogd_checks(auditor: _Auditor) -> None:
    ctx = auditor.context
    T = auditor.trace.horizon
    best = auditor.solve(1, T)
    if best is None:
        return
    if best.loss > ctx.ogd_loss_level + MARGIN_SLACK:
        logger.warning(f"Comparator loss {best.loss:.6g} exceeds the tuned level L={ctx.ogd_loss_level}")
    bound = ogd_bound(ctx.H, ctx.ogd_radius, ctx.ogd_loss_level)
    auditor.add('ogd-constant', 1, T, best.point, best.loss, auditor.learner_loss(1, T) - best.loss, bound)


def _meta_checks(auditor: _Auditor, name: str, bound_fn: Callable[[int, float], float]) -> None:
    for start, rounds, meta, expert_cumulative in _expert_streams(auditor):
        candidates = [
            RegretReport(name, start, int(t), (), float(L), float(regret), bound_fn(int(t), float(L)))
            for t, regret, L in zip(rounds, meta, expert_cumulative)
        ]
        auditor.keep_worst(candidates)


def _lifetime_checks(auditor: _Auditor, name: str,
                     bound_fn: Callable[[int, int, np.ndarray, float], float]) -> None:
    """Learner regret over [i, t] for every round t an expert started at i was alive"""
    for start, rounds, _, _ in _expert_streams(auditor):
        candidates = []
        for t in rounds:
            t = int(t)
            best = auditor.solve(start, t)
            if best is None:
                continue
            candidates.append(RegretReport(name, start, t, tuple(float(x) for x in best.point), best.loss,
                                           auditor.learner_loss(start, t) - best.loss,
                                           bound_fn(start, t, best.point, best.loss)))
        auditor.keep_worst(candidates)


def _sacs_checks(auditor: _Auditor, family: List[Interval]) -> int:
    ctx, plan = auditor.context, auditor.plan
    _meta_checks(auditor, 'meta-regret', lambda t, L: meta_regret_bound(t, L))
    _lifetime_checks(auditor, 'cgc-interval',
                     lambda i, t, w, L: cgc_interval_bound(t, L, ctx.H, ctx.D, ctx.delta, plan.a_scale))
    return auditor.interval_checks(
        'sacs-interval', family,
        lambda r, s, w, L: sacs_interval_bound(r, s, L, ctx.H, ctx.D, ctx.delta, plan.a_scale))


def _sacs_cpgc_checks(auditor: _Auditor, family: List[Interval]) -> int:
    ctx, plan, trace = auditor.context, auditor.plan, auditor.trace
    C = ctx.threshold
    markers = trace.markers
    best_prefix = [auditor.solve(1, t) for t in range(1, trace.horizon + 1)]

    def prefix_loss_of(s: int, w: np.ndarray) -> float:
        return auditor.oracle.interval_loss(1, s, w)

    def best_prefix_loss(t: int) -> float:
        result = best_prefix[t - 1]
        return result.loss if result is not None else 0.0

    _meta_checks(auditor, 'meta-regret-cpgc',
                 lambda t, L: meta_regret_bound_cpgc(t, L, best_prefix_loss(t), C))
    _lifetime_checks(auditor, 'cpgc-interval',
                     lambda i, t, w, L: cpgc_interval_bound(t, L, prefix_loss_of(t, w), ctx.H, ctx.D, ctx.delta,
                                                         C, plan.a_scale))

    counts = trace.marker_counts
    auditor.keep_worst([
        RegretReport('marker-count', 1, t, (), best_prefix_loss(t), float(counts[t - 1]),
                     float(marker_count_bound(C, best_prefix_loss(t))))
        for t in range(1, trace.horizon + 1) if best_prefix[t - 1] is not None
    ])

    for first, following in zip(markers, markers[1:]):
        best = auditor.solve(first, following - 1)
        if best is not None:
            auditor.add('marker-segment', first, following - 1, best.point, best.loss, C / 4.0, best.loss)

    return auditor.interval_checks(
        'sacs-cpgc-interval', family,
        lambda r, s, w, L: sacs_cpgc_interval_bound(r, s, L, prefix_loss_of(s, w), ctx.H, ctx.D, ctx.delta,
                                                    C, markers=markers, a_scale=plan.a_scale))


def _stage_ratio_checks(auditor: _Auditor, stages: Sequence[Tuple[int, int]]) -> None:
    """Per-stage regret must be a small fraction of the stage length when the stage is loss-free"""
    ratio = auditor.plan.stage_regret_ratio
    for a, b in stages:
        length = b - a + 1
        best = auditor.solve(a, b)
        if best is None or length < auditor.plan.min_stage_length or best.loss > MARGIN_SLACK:
            continue
        auditor.add('stage-regret-ratio', a, b, best.point, best.loss,
                    auditor.learner_loss(a, b) - best.loss, ratio * length)


def audit_run(trace: RunTrace, losses: Sequence[LossFunction], domain: DomainSpec,
              context: BoundContext, plan: AuditPlan = AuditPlan(),
              stages: Sequence[Tuple[int, int]] = ()) -> AuditResult:
    """Audit a recorded run; reports come back sorted by margin, tightest first"""
    trace.validate()
    auditor = _Auditor(trace, losses, domain, context, plan)
    family = interval_family(trace.horizon, plan, stages)

    _loss_range_checks(auditor)
    audited = 0
    if context.learner == 'sogd':
        _sogd_checks(auditor)
        audited = trace.horizon
    elif context.learner == 'ogd-constant':
        _ogd_checks(auditor)
        audited = 1
    elif context.learner == 'sacs':
        audited = _sacs_checks(auditor, family)
    elif context.learner == 'sacs-cpgc':
        if context.threshold is None:
            raise ContractViolation("auditing sacs-cpgc needs the threshold C")
        audited = _sacs_cpgc_checks(auditor, family)
    else:
        raise ContractViolation(f"unknown learner kind {context.learner!r}")

    if plan.stage_regret_ratio is not None:
        _stage_ratio_checks(auditor, stages)

    reports = sorted(auditor.reports, key=lambda report: (report.margin, report.check, report.r, report.s))
    result = AuditResult(reports, sorted(set(auditor.excluded)), audited)
    log = logger.info if result.passed else logger.warning
    log(f"Audited {context.learner} over T={trace.horizon}: {audited} intervals, "
        f"{len(result.violations)} violations")
    for report in result.violations[:5]:
        logger.warning(f"Violation {report.check} on [{report.r}, {report.s}]: "
                       f"measured {report.measured:.6g} > bound {report.bound:.6g}")
    return result


def bound_slack_summary(result: AuditResult) -> Dict[str, float]:
    """Smallest margin per check name"""
    tightest: Dict[str, float] = {}
    for report in result.reports:
        tightest[report.check] = min(tightest.get(report.check, math.inf), report.margin)
    return tightest
