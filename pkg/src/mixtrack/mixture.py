"""Aggregation engine over a pool of restarting base-learner copies.

Round t works in three phases.  Predict: the live copies' predictions
are merged with the loss's substitution rule under the current
normalized weights.  Ingest: every copy's log-weight absorbs its own
exponentiated loss on the revealed outcome.  Advance: weights are
rerouted toward round t+1 by a sparse kernel in which a copy about to
restart sends its whole mass to the single designated restarter J_{t+1}
(the restarting copy of largest period), while a copy with runtime u at
t+1 keeps a (u-1)/u share of its mass and cedes the 1/u remainder to
J_{t+1}.  Outgoing shares therefore sum to one for every copy, and a
copy that restarts without being J_{t+1} is left with zero mass until
it is next designated.

Two bookkeeping modes produce identical numbers.  Eager materializes
every copy the calendar has created, zero-mass rows included.  Lazy
stores only rows carrying mass, materializing a copy when it is first
designated as the restarter; reductions skip zero-mass rows in both
modes, in the same creation order, so the float arithmetic agrees bit
for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .schemes import ExpertSpec

NEG_INF = -math.inf


def transition_weight(src_runtime: int, tgt_runtime: int, same_expert: bool, tgt_is_jt: bool) -> float:
    """Share of a source copy's mass routed to a target copy.

    Runtimes are taken at the destination round.  The designated
    restarter (runtime 1) receives 1/src_runtime from every live copy;
    a copy not restarting keeps (u-1)/u of its own mass; every other
    pairing gets zero.  For fixed source the shares sum to one: a
    non-restarting copy splits (u-1)/u + 1/u, a restarting one sends
    everything to the designated restarter.
    """
    if src_runtime < 1 or tgt_runtime < 1:
        raise ValueError("runtimes are 1-based")
    if tgt_is_jt and tgt_runtime == 1:
        return 1.0 / src_runtime
    if same_expert and src_runtime != 1:
        # staying put; src and tgt runtime coincide for the same copy
        return (src_runtime - 1.0) / src_runtime
    return 0.0


def select_jt(scheme, t: int) -> ExpertSpec:
    """The designated restarter at round t: largest period, then earliest start."""
    resetters = scheme.resetting_at(t)
    if not resetters:
        raise RuntimeError(f"calendar defect: no copy restarts at round {t}")
    return max(resetters, key=lambda e: (e.period, -e.start))


@dataclass
class StepRecord:
    """Log line for one round."""

    t: int
    prediction: float
    outcome: float
    step_loss: float
    jt_period: float
    live: int
    created: int
    work: int
    drift: float
    map_id: int


@dataclass
class Trace:
    """Full run history, column per StepRecord field."""

    scheme_tag: str
    loss_name: str
    mode: str
    ts: np.ndarray
    outcomes: np.ndarray
    predictions: np.ndarray
    step_losses: np.ndarray
    jt_periods: np.ndarray
    live: np.ndarray
    created: np.ndarray
    work: np.ndarray
    drifts: np.ndarray
    map_ids: np.ndarray
    id_to_spec: dict

    @property
    def horizon(self) -> int:
        return int(self.ts.size)

    @property
    def cum_losses(self) -> np.ndarray:
        return np.cumsum(self.step_losses)

    @property
    def total_loss(self) -> float:
        return float(np.sum(self.step_losses))

    @property
    def total_work(self) -> int:
        return int(np.sum(self.work))

    def map_specs(self) -> list:
        """Highest-weight copy at each round."""
        return [self.id_to_spec[int(i)] for i in self.map_ids]

    def realized_segments(self) -> int:
        """Segments of the per-round highest-weight copy path."""
        if self.map_ids.size == 0:
            return 0
        return 1 + int(np.count_nonzero(np.diff(self.map_ids)))


class Mixture:
    """Weighted pool of restarting copies of one base learner.

    Parameters
    ----------
    scheme : calendar object
        Provides births_at / resetting_at.
    loss : loss family
        Provides evaluate / substitute / mixability.
    base : base learner
        Must declare ``loss_family`` matching ``loss.name``.  Learners
        exposing the columnar interface are updated as array rows; others
        fall back to per-copy scalar calls.
    mode : {"eager", "lazy"}
        Row bookkeeping; the computed numbers are identical.
    """

    def __init__(self, scheme, loss, base, mode: str = "eager"):
        if mode not in ("eager", "lazy"):
            raise ValueError("mode must be 'eager' or 'lazy'")
        fam = getattr(base, "loss_family", None)
        if fam != loss.name:
            raise ValueError(f"base learner feeds {fam!r} but the loss is {loss.name!r}")
        self.scheme = scheme
        self.loss = loss
        self.base = base
        self.mode = mode
        self._columnar = all(
            hasattr(base, m) for m in ("state_width", "init_rows", "predict_rows", "update_rows")
        )

        births = sorted(scheme.births_at(1))
        if not births:
            raise RuntimeError("calendar defect: no copy is born at round 1")

        cap = max(8, 2 * len(births))
        self._p = np.empty(cap)  # period (inf allowed)
        self._p_int = np.empty(cap, dtype=np.int64)  # 0 encodes inf
        self._s = np.empty(cap, dtype=np.int64)
        self._id = np.empty(cap, dtype=np.int64)
        self._logw = np.empty(cap)
        if self._columnar:
            self._rows = np.empty((cap, base.state_width))
            self._states = None
        else:
            self._rows = None
            self._states = []
        self._n = 0

        self.created = 0
        self._id_of: dict[ExpertSpec, int] = {}
        self.t = 1
        self.work_total = 0
        self._log_tab = np.empty(0)
        self._stay_tab = np.empty(0)
        self._finite_periods = False

        k = len(births)
        for spec in births:
            self._register_birth(spec)
            self._append_row(spec, math.log(1.0 / k))
        self._jt = select_jt(scheme, 1)

    # -- row storage -------------------------------------------------------

    def _register_birth(self, spec: ExpertSpec) -> None:
        self._id_of[spec] = self.created
        self.created += 1
        if not math.isinf(spec.period):
            self._finite_periods = True

    def _ensure_capacity(self, extra: int) -> None:
        need = self._n + extra
        cap = self._logw.size
        if need <= cap:
            return
        new = max(2 * cap, need)
        for name in ("_p", "_logw"):
            arr = getattr(self, name)
            grown = np.empty(new)
            grown[: self._n] = arr[: self._n]
            setattr(self, name, grown)
        for name in ("_p_int", "_s", "_id"):
            arr = getattr(self, name)
            grown = np.empty(new, dtype=np.int64)
            grown[: self._n] = arr[: self._n]
            setattr(self, name, grown)
        if self._columnar:
            grown = np.empty((new, self.base.state_width))
            grown[: self._n] = self._rows[: self._n]
            self._rows = grown

    def _append_row(self, spec: ExpertSpec, logw: float) -> None:
        self._insert_row(self._n, spec, logw)

    def _insert_row(self, pos: int, spec: ExpertSpec, logw: float) -> None:
        self._ensure_capacity(1)
        n = self._n
        for arr in (self._p, self._p_int, self._s, self._id, self._logw):
            arr[pos + 1 : n + 1] = arr[pos:n]
        self._p[pos] = spec.period
        self._p_int[pos] = 0 if math.isinf(spec.period) else int(spec.period)
        self._s[pos] = spec.start
        self._id[pos] = self._id_of[spec]
        self._logw[pos] = logw
        if self._columnar:
            self._rows[pos + 1 : n + 1] = self._rows[pos:n]
            self._rows[pos] = self.base.init_rows(1)[0]
        else:
            self._states.insert(pos, self.base.init_state())
        self._n = n + 1

    def _compress(self, keep: np.ndarray) -> None:
        n = self._n
        m = int(np.count_nonzero(keep))
        if m == n:
            return
        for arr in (self._p, self._p_int, self._s, self._id, self._logw):
            arr[:m] = arr[:n][keep]
        if self._columnar:
            self._rows[:m] = self._rows[:n][keep]
        else:
            self._states = [st for st, k in zip(self._states, keep) if k]
        self._n = m

    def _position(self, spec: ExpertSpec) -> int:
        """Row index of ``spec``, or the insertion point if absent."""
        target = self._id_of[spec]
        return int(np.searchsorted(self._id[: self._n], target))

    def _ensure_tables(self, hi: int) -> None:
        if hi >= self._log_tab.size:
            with np.errstate(divide="ignore"):
                self._log_tab = np.log(np.arange(max(2 * self._log_tab.size, hi + 1, 64)))
                # stay share log((u-1)/u); -inf at u=1 kills restarting rows
                self._stay_tab = self._log_tab - np.concatenate(([math.inf], self._log_tab[:-1]))
                self._stay_tab *= -1.0

    def _log_of(self, values: np.ndarray) -> np.ndarray:
        self._ensure_tables(int(values.max()) if values.size else 0)
        return self._log_tab[values]

    # -- introspection -----------------------------------------------------

    @property
    def live_count(self) -> int:
        return int(np.count_nonzero(self._logw[: self._n] > NEG_INF))

    @property
    def jt(self) -> ExpertSpec:
        """Designated restarter of the current round."""
        return self._jt

    def live_table(self):
        """Current pool as a list of (spec, id, log-weight, runtime) tuples."""
        out = []
        t = self.t
        for i in range(self._n):
            p = self._p[i]
            spec = ExpertSpec(p if math.isinf(p) else int(p), int(self._s[i]))
            u = (t - spec.start + 1) if math.isinf(p) else (t - spec.start) % int(p) + 1
            out.append((spec, int(self._id[i]), float(self._logw[i]), int(u)))
        return out

    def posterior(self) -> dict:
        """Normalized weights over massful copies at the current round."""
        n = self._n
        logw = self._logw[:n]
        fin = logw > NEG_INF
        mx = np.max(logw[fin])
        z = mx + math.log(float(np.sum(np.exp(logw[fin] - mx))))
        out = {}
        for i in np.nonzero(fin)[0]:
            p = self._p[i]
            spec = ExpertSpec(p if math.isinf(p) else int(p), int(self._s[i]))
            out[spec] = math.exp(float(logw[i]) - z)
        return out

    # -- the round ---------------------------------------------------------

    def _predictions(self) -> np.ndarray:
        if self._columnar:
            return self.base.predict_rows(self._rows[: self._n])
        return np.array([self.base.predict(st) for st in self._states], dtype=float)

    def step(self, x: float) -> StepRecord:
        """Predict on round t, ingest outcome ``x``, advance to round t+1."""
        t = self.t
        n = self._n
        self.work_total += n
        work_now = n
        logw = self._logw[:n]
        fin = logw > NEG_INF
        all_fin = bool(fin.all())

        preds = self._predictions()
        wsel = logw if all_fin else logw[fin]
        post = np.exp(wsel - np.max(wsel))
        post /= np.sum(post)
        prediction = self.loss.substitute(preds if all_fin else preds[fin], post)
        step_loss = self.loss.evaluate(prediction, float(x))
        map_pos = int(np.argmax(logw))
        map_id = int(self._id[map_pos])
        live_now = n if all_fin else int(np.count_nonzero(fin))
        created_now = self.created

        # ingest: each copy absorbs its own loss
        losses = np.asarray(self.loss.evaluate(preds, float(x)))
        alpha = self.loss.mixability
        logw -= losses if alpha == 1.0 else alpha * losses

        drift = self._advance(float(x))
        self.t = t + 1
        return StepRecord(
            t=t,
            prediction=float(prediction),
            outcome=float(x),
            step_loss=float(step_loss),
            jt_period=float(self._prev_jt.period),
            live=live_now,
            created=created_now,
            work=work_now,
            drift=float(drift),
            map_id=map_id,
        )

    def _advance(self, x: float) -> float:
        """Route weights and base states from round t to round t+1."""
        t1 = self.t + 1
        self._prev_jt = self._jt

        for spec in sorted(self.scheme.births_at(t1)):
            self._register_birth(spec)
            if self.mode == "eager":
                self._append_row(spec, NEG_INF)

        jt = select_jt(self.scheme, t1)
        if self.mode == "lazy":
            pos = self._position(jt)
            if pos == self._n or self._id[pos] != self._id_of[jt]:
                self._insert_row(pos, jt, NEG_INF)

        n = self._n
        logw = self._logw[:n]
        fin = logw > NEG_INF
        all_fin = bool(fin.all())

        # runtimes at the destination round; newborns come out at 1
        age = t1 - self._s[:n]
        p_int = self._p_int[:n]
        if self._finite_periods:
            u1 = np.where(p_int == 0, age + 1, age % np.maximum(p_int, 1) + 1)
        else:
            u1 = age + 1

        log_u1 = self._log_of(u1)
        contrib = logw - log_u1 if all_fin else logw[fin] - log_u1[fin]
        cm = np.max(contrib)
        if not np.isfinite(cm):
            raise RuntimeError("weight pool degenerated: no mass to route")
        inflow = cm + math.log(float(np.sum(np.exp(contrib - cm))))

        # stayers keep (u-1)/u; a restarting copy (u=1) drops to zero mass
        logw += self._stay_tab[u1]

        jpos = self._position(jt)
        logw[jpos] = inflow

        # base statistics: survivors ingest the outcome, restarters wipe
        if self._columnar:
            self.base.update_rows(self._rows[:n], x)
            reset = u1 == 1
            if np.any(reset):
                self._rows[:n][reset] = self.base.init_rows(int(np.count_nonzero(reset)))
        else:
            for i in range(n):
                if u1[i] == 1:
                    self._states[i] = self.base.init_state()
                else:
                    self._states[i] = self.base.update(self._states[i], x)

        shift = float(np.max(logw))
        logw -= shift

        if self.mode == "lazy":
            self._compress(logw > NEG_INF)

        self._jt = jt
        return shift

    def run(self, xs) -> Trace:
        """Feed a whole outcome sequence and collect the trace."""
        xs = np.asarray(xs, dtype=float)
        if xs.size == 0:
            raise ValueError("empty outcome sequence")
        recs = [self.step(float(x)) for x in xs]
        id_to_spec = {i: spec for spec, i in self._id_of.items()}
        return Trace(
            scheme_tag=self.scheme.tag,
            loss_name=self.loss.name,
            mode=self.mode,
            ts=np.array([r.t for r in recs], dtype=np.int64),
            outcomes=np.array([r.outcome for r in recs]),
            predictions=np.array([r.prediction for r in recs]),
            step_losses=np.array([r.step_loss for r in recs]),
            jt_periods=np.array([r.jt_period for r in recs]),
            live=np.array([r.live for r in recs], dtype=np.int64),
            created=np.array([r.created for r in recs], dtype=np.int64),
            work=np.array([r.work for r in recs], dtype=np.int64),
            drifts=np.array([r.drift for r in recs]),
            map_ids=np.array([r.map_id for r in recs], dtype=np.int64),
            id_to_spec=id_to_spec,
        )


def init_mixture(scheme, loss, base, mode: str = "eager") -> Mixture:
    """Convenience constructor matching the harness config vocabulary."""
    return Mixture(scheme, loss, base, mode=mode)
