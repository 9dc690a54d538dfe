"""Redundancy queueing simulation with cancel-on-start.

``n`` FCFS servers; every arriving job sends a copy to each of the ``r``
servers its policy selects, and the remaining copies vanish as soon as one
copy enters service. Service times are bi-modal exponential: rate ``mu1`` for
short jobs and ``mu1/q`` for long jobs (probability ``p``).

Two engines produce the same sample path from the same random inputs:

* ``"events"`` is a textbook event-list simulator (arrival/departure heap,
  per-server deques, explicit copy removal).
* ``"fast"`` uses the fact that each server serves its jobs in arrival order,
  so a job starts at ``min over selected s of max(arrival, free_s)``. This is
  a per-job recursion that numba compiles to a tight loop.
"""

from __future__ import annotations

import enum
import heapq
import math
import warnings
from collections import deque
from dataclasses import dataclass, field, replace

import numba
import numpy as np
from scipy import stats

from redsim.designs import Design
from redsim.errors import InvalidParameter, RedsimError, SimulationUnderrun
from redsim.policies import PolicyKind, new_policy


class JobClass(enum.IntEnum):
    SHORT = 0
    LONG = 1


@dataclass(frozen=True)
class SimConfig:
    n: int
    r: int
    policy: PolicyKind
    mu1: float
    q: float
    p: float
    lam: float
    seed: int = 0
    warmup_jobs: int = 10_000
    measured_jobs: int = 100_000
    replications: int = 20
    horizon: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "policy", PolicyKind.parse(self.policy))
        if not (1 <= self.r <= self.n):
            raise InvalidParameter(f"need 1 <= r <= n, got n={self.n}, r={self.r}")
        if self.mu1 <= 0 or self.lam <= 0:
            raise InvalidParameter("mu1 and lambda must be positive")
        if self.q < 1:
            raise InvalidParameter(f"q must be >= 1, got {self.q}")
        if not 0 <= self.p <= 1:
            raise InvalidParameter(f"p must lie in [0, 1], got {self.p}")
        if self.warmup_jobs < 0 or self.measured_jobs < 2 or self.replications < 1:
            raise InvalidParameter("need warmup >= 0, measured jobs >= 2, replications >= 1")

    @property
    def mean_service(self) -> float:
        return ((1 - self.p) + self.p * self.q) / self.mu1

    @property
    def rho(self) -> float:
        return self.lam * self.mean_service / self.n

    @property
    def total_jobs(self) -> int:
        return self.warmup_jobs + self.measured_jobs


def sample_service(job_class: JobClass, mu1: float, q: float, rng: np.random.Generator) -> float:
    """One service duration: Exp(mu1) for short jobs, Exp(mu1/q) for long ones."""
    scale = q / mu1 if job_class == JobClass.LONG else 1 / mu1
    return float(rng.exponential(scale))


@dataclass
class Workload:
    """Pre-drawn inputs of one replication.

    ``arrivals`` and ``service`` depend only on the workload stream, so
    policies compared on the same replication see identical jobs.
    """

    arrivals: np.ndarray
    classes: np.ndarray
    service: np.ndarray
    selections: np.ndarray


def replication_streams(seed: int, rep: int) -> tuple[np.random.SeedSequence, np.random.SeedSequence]:
    """(workload, policy) seed sequences for replication ``rep``."""
    workload, policy = np.random.SeedSequence([seed, rep]).spawn(2)
    return workload, policy


def make_workload(config: SimConfig, rep: int, design: Design | None = None) -> Workload:
    wl_seq, pol_seq = replication_streams(config.seed, rep)
    rng = np.random.default_rng(wl_seq)
    total = config.total_jobs
    # Unit draws first, then scaling: changing lam, q or mu1 keeps the same underlying numbers.
    gaps = rng.standard_exponential(total)
    long_mask = rng.random(total) < config.p
    unit = rng.standard_exponential(total)
    arrivals = np.cumsum(gaps) / config.lam
    service = unit * np.where(long_mask, config.q, 1.0) / config.mu1
    policy = new_policy(config.policy, config.n, config.r, seed=pol_seq, design=design)
    return Workload(
        arrivals=arrivals,
        classes=long_mask.astype(np.int8),
        service=service,
        selections=policy.draw(total),
    )


# ---------------------------------------------------------------- fast engine


@numba.njit(cache=True)
def _dispatch(arrivals, selections, service, n):
    jobs, r = selections.shape
    free = np.zeros(n)
    start = np.empty(jobs)
    server = np.empty(jobs, dtype=np.int64)
    for k in range(jobs):
        a = arrivals[k]
        best_t = np.inf
        best_s = -1
        for j in range(r):
            s = selections[k, j]
            t = free[s] if free[s] > a else a
            if t < best_t or (t == best_t and s < best_s):
                best_t = t
                best_s = s
        start[k] = best_t
        server[k] = best_s
        free[best_s] = best_t + service[k]
    return start, server


def dispatch_fast(workload: Workload, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Start time and serving server of every job."""
    return _dispatch(
        workload.arrivals,
        np.ascontiguousarray(workload.selections, dtype=np.int64),
        workload.service,
        n,
    )


# -------------------------------------------------------------- event engine


@dataclass
class Job:
    id: int
    arrival_time: float
    job_class: JobClass
    selection: tuple[int, ...]
    copy_locations: set[int] = field(default_factory=set)
    start_time: float | None = None
    server: int | None = None

    @property
    def queuing_time(self) -> float:
        return self.start_time - self.arrival_time


class EventKind(enum.IntEnum):
    ARRIVAL = 0
    DEPARTURE = 1


@dataclass(order=True)
class Event:
    time: float
    sequence: int
    kind: EventKind = field(compare=False)
    server: int = field(default=-1, compare=False)


class EventEngine:
    """Event-list simulator over a pre-drawn workload.

    Service duration of job ``k`` is ``workload.service[k]``, looked up when
    its first copy enters service.
    """

    def __init__(self, n: int, workload: Workload, horizon: float | None = None):
        self.n = n
        self.workload = workload
        self.horizon = horizon
        self.clock = 0.0
        self.queues: list[deque[Job]] = [deque() for _ in range(n)]
        self.in_service: list[Job | None] = [None] * n
        self.jobs: dict[int, Job] = {}
        self.started: list[Job] = []
        self._events: list[Event] = []
        self._seq = 0
        self._next_arrival = 0

    def schedule(self, time: float, kind: EventKind, server: int = -1) -> None:
        heapq.heappush(self._events, Event(time, self._seq, kind, server))
        self._seq += 1

    def _schedule_next_arrival(self) -> None:
        k = self._next_arrival
        if k < len(self.workload.arrivals):
            self.schedule(float(self.workload.arrivals[k]), EventKind.ARRIVAL)

    def _start(self, job: Job, server: int) -> None:
        job.start_time = self.clock
        job.server = server
        for other in job.copy_locations:
            if other != server:
                self.queues[other].remove(job)
        job.copy_locations.clear()
        self.in_service[server] = job
        self.started.append(job)
        self.schedule(self.clock + float(self.workload.service[job.id]), EventKind.DEPARTURE, server)

    def handle_arrival(self, job: Job) -> None:
        self.jobs[job.id] = job
        idle = [s for s in sorted(job.selection) if self.in_service[s] is None]
        if idle:
            self._start(job, idle[0])
        else:
            for s in job.selection:
                self.queues[s].append(job)
                job.copy_locations.add(s)
        self._next_arrival += 1
        self._schedule_next_arrival()

    def handle_departure(self, server: int) -> None:
        assert self.in_service[server] is not None, f"departure from idle server {server}"
        finished = self.in_service[server]
        self.in_service[server] = None
        self.jobs.pop(finished.id, None)
        if self.queues[server]:
            head = self.queues[server].popleft()
            assert head.id in self.jobs, f"copy of unknown job {head.id} at server {server}"
            head.copy_locations.discard(server)
            self._start(head, server)

    def step(self) -> bool:
        if not self._events:
            return False
        if self.horizon is not None and self._events[0].time > self.horizon:
            return False
        ev = heapq.heappop(self._events)
        self.clock = ev.time
        if ev.kind is EventKind.ARRIVAL:
            k = self._next_arrival
            wl = self.workload
            job = Job(
                id=k,
                arrival_time=float(wl.arrivals[k]),
                job_class=JobClass(int(wl.classes[k])),
                selection=tuple(int(s) for s in wl.selections[k]),
            )
            self.handle_arrival(job)
        else:
            self.handle_departure(ev.server)
        return True

    def run(self) -> tuple[np.ndarray, np.ndarray]:
        """Run to exhaustion (or horizon); NaN / -1 mark jobs that never started."""
        if self._next_arrival == 0 and not self._events:
            self._schedule_next_arrival()
        while self.step():
            pass
        total = len(self.workload.arrivals)
        start = np.full(total, np.nan)
        server = np.full(total, -1, dtype=np.int64)
        for job in self.started:
            start[job.id] = job.start_time
            server[job.id] = job.server
        return start, server


def dispatch_events(workload: Workload, n: int, horizon: float | None = None):
    return EventEngine(n, workload, horizon).run()


# ------------------------------------------------------------------- metrics


@dataclass
class ReplicationResult:
    mean_wq: float
    mean_sojourn: float
    mean_in_system: float
    zero_wait_fraction: float


@dataclass
class SimMetrics:
    policy: str
    n: int
    r: int
    mu1: float
    q: float
    p: float
    lam: float
    rho: float
    seed: int
    mean_queuing_time: float
    ci_halfwidth: float
    mean_sojourn_time: float
    mean_jobs_in_system: float
    little_residual: float
    replications: list[ReplicationResult] = field(default_factory=list, repr=False)

    def row(self) -> dict:
        return {
            "policy": self.policy,
            "n": self.n,
            "r": self.r,
            "mu1": self.mu1,
            "q": self.q,
            "p": self.p,
            "lambda": self.lam,
            "rho": self.rho,
            "mean_wq": self.mean_queuing_time,
            "ci95": self.ci_halfwidth,
            "mean_sojourn": self.mean_sojourn_time,
            "little_residual": self.little_residual,
            "seed": self.seed,
        }


SIM_COLUMNS = (
    "policy", "n", "r", "mu1", "q", "p", "lambda", "rho",
    "mean_wq", "ci95", "mean_sojourn", "little_residual", "seed",
)


def summarize_replication(config: SimConfig, wl: Workload, start: np.ndarray) -> ReplicationResult:
    lo, hi = config.warmup_jobs, config.total_jobs
    measured = start[lo:hi]
    if np.isnan(measured).any() or (config.horizon is not None and measured.max() > config.horizon):
        missing = int(np.isnan(measured).sum())
        raise SimulationUnderrun(
            f"simulation stopped before all {config.measured_jobs} measured jobs started "
            f"({missing} never reached service)"
        )
    arr = wl.arrivals
    departures = start + wl.service
    wq = measured - arr[lo:hi]
    sojourn = departures[lo:hi] - arr[lo:hi]
    # Time-average number in system over the measurement window, all jobs included.
    t0, t1 = arr[lo], arr[hi - 1]
    done = ~np.isnan(departures)
    overlap = np.minimum(departures[done], t1) - np.maximum(arr[done], t0)
    area = np.clip(overlap, 0, None).sum()
    return ReplicationResult(
        mean_wq=float(wq.mean()),
        mean_sojourn=float(sojourn.mean()),
        mean_in_system=float(area / (t1 - t0)),
        zero_wait_fraction=float(np.mean(wq == 0)),
    )


def simulate_replication(
    config: SimConfig, rep: int, engine: str = "fast", design: Design | None = None
) -> ReplicationResult:
    wl = make_workload(config, rep, design)
    if engine == "fast":
        start, _ = dispatch_fast(wl, config.n)
    elif engine == "events":
        start, _ = dispatch_events(wl, config.n, config.horizon)
    else:
        raise InvalidParameter(f"unknown engine {engine!r}")
    return summarize_replication(config, wl, start)


def t_halfwidth(values: np.ndarray, level: float = 0.95) -> float:
    if len(values) < 2:
        return math.inf
    return float(stats.t.ppf(0.5 + level / 2, len(values) - 1) * np.std(values, ddof=1) / math.sqrt(len(values)))


def run_sim(config: SimConfig, engine: str = "fast", design: Design | None = None) -> SimMetrics:
    """Simulate ``config.replications`` independent replications and aggregate.

    Each replication discards ``warmup_jobs`` and measures the next
    ``measured_jobs``; the CI is a Student-t interval over replication means.
    Overloaded configurations (rho >= 1) run but emit a warning.
    """
    if config.rho >= 1:
        warnings.warn(f"rho = {config.rho:.3f} >= 1: queue is unstable, results depend on run length")
    reps = [simulate_replication(config, k, engine, design) for k in range(config.replications)]
    wq = np.array([x.mean_wq for x in reps])
    sojourn = float(np.mean([x.mean_sojourn for x in reps]))
    in_system = float(np.mean([x.mean_in_system for x in reps]))
    return SimMetrics(
        policy=config.policy.value,
        n=config.n,
        r=config.r,
        mu1=config.mu1,
        q=config.q,
        p=config.p,
        lam=config.lam,
        rho=config.rho,
        seed=config.seed,
        mean_queuing_time=float(wq.mean()),
        ci_halfwidth=t_halfwidth(wq),
        mean_sojourn_time=sojourn,
        mean_jobs_in_system=in_system,
        little_residual=abs(in_system - config.lam * sojourn) / in_system,
        replications=reps,
    )


ALL_POLICIES = (PolicyKind.RANDOM, PolicyKind.ROUND_ROBIN, PolicyKind.BIBD)


def sweep(
    config: SimConfig,
    lambdas: list[float],
    policies: tuple[PolicyKind, ...] = ALL_POLICIES,
    engine: str = "fast",
) -> list[SimMetrics | dict]:
    """One row per (policy, lambda).

    Policies share the workload stream of each replication (common random
    numbers), so differences between rows at one lambda come from the policy.
    A failing cell becomes a dict with an ``error`` key.
    """
    rows: list[SimMetrics | dict] = []
    for policy in policies:
        for lam in lambdas:
            try:
                rows.append(run_sim(replace(config, policy=policy, lam=lam), engine))
            except RedsimError as exc:
                rows.append({"policy": PolicyKind.parse(policy).value, "lambda": lam, "error": str(exc)})
    return rows


# ------------------------------------------------------------------- presets

PRESETS: dict[str, tuple[int, int, float, float, float]] = {
    "fig5": (13, 4, 10.0, 10.0, 0.1),
    "fig6": (21, 5, 10.0, 10.0, 0.1),
    "fig7": (21, 5, 10.0, 50.0, 0.1),
    "fig8": (21, 5, 10.0, 50.0, 0.5),
}
# The p = 0.5 experiment is described in the text with q = 15 instead of 50.
FIG8_TEXT_Q = 15.0

LOW_LOAD = np.linspace(0.30, 0.60, 8)
HIGH_LOAD = np.linspace(0.65, 0.95, 8)


def preset_config(name: str, *, fig8_text_q: bool = False, **overrides) -> SimConfig:
    """SimConfig for a figure preset; ``overrides`` replace any field."""
    try:
        n, r, mu1, q, p = PRESETS[name]
    except KeyError:
        raise InvalidParameter(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    if name == "fig8" and fig8_text_q:
        q = FIG8_TEXT_Q
    fields = dict(n=n, r=r, policy=PolicyKind.BIBD, mu1=mu1, q=q, p=p, lam=1.0)
    fields.update(overrides)
    cfg = SimConfig(**fields)
    if "lam" not in overrides:
        cfg = replace(cfg, lam=lambda_for_load(cfg, 0.5))
    return cfg


def lambda_for_load(config: SimConfig, rho: float) -> float:
    return rho * config.n / config.mean_service


def preset_lambdas(config: SimConfig) -> dict[str, list[float]]:
    """Low- and high-load arrival-rate grids, 8 points each, rho in 0.30..0.95."""
    return {
        "low": [lambda_for_load(config, x) for x in LOW_LOAD],
        "high": [lambda_for_load(config, x) for x in HIGH_LOAD],
    }
