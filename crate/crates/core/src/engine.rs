//! Event-driven execution of rate-based preemptive policies.
//!
//! A policy assigns rates (summing to at most one) to unfinished jobs and
//! may register *triggers*: absolute processed-amount thresholds on single
//! jobs. Between two decision points every rate is constant, so the engine
//! jumps straight to the next completion or trigger. There is no time step.
//!
//! The policy is re-invoked at `t = 0`, after every completion and after
//! every fired trigger. Simultaneous events are grouped into one decision
//! point; completions are applied before triggers, lower job index first.

use std::io::Write;

use crate::error::{Error, Result};
use crate::instances::JobInstance;
use crate::tol;

/// A processed-amount threshold on one job.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trigger {
    pub job: usize,
    pub threshold: f64,
}

/// Rates for the next interval plus the triggers that end it early.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolicyDecision {
    /// One entry per job; finished jobs must get 0.
    pub rates: Vec<f64>,
    pub triggers: Vec<Trigger>,
}

impl PolicyDecision {
    pub fn idle(n: usize) -> Self {
        Self { rates: vec![0.0; n], triggers: Vec::new() }
    }

    /// Rate 1 on a single job.
    pub fn solo(n: usize, job: usize) -> Self {
        let mut d = Self::idle(n);
        d.rates[job] = 1.0;
        d
    }

    /// Equal rates over `jobs`.
    pub fn share<I: IntoIterator<Item = usize>>(n: usize, jobs: I) -> Self {
        let jobs: Vec<usize> = jobs.into_iter().collect();
        let mut d = Self::idle(n);
        if !jobs.is_empty() {
            let r = 1.0 / jobs.len() as f64;
            for j in jobs {
                d.rates[j] = r;
            }
        }
        d
    }

    pub fn with_trigger(mut self, job: usize, threshold: f64) -> Self {
        self.triggers.push(Trigger { job, threshold });
        self
    }
}

/// Why the engine stopped and re-invoked the policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cause {
    Completion(usize),
    Trigger { job: usize, threshold: f64 },
}

/// What a policy may observe: processed amounts and completions, never sizes.
#[derive(Debug, Clone, Copy)]
pub struct MachineView<'a> {
    pub now: f64,
    /// Length of the interval that just ended (0 at the first decision).
    pub elapsed: f64,
    pub processed: &'a [f64],
    pub finished: &'a [bool],
    /// Events handled at this decision point, in processing order.
    pub causes: &'a [Cause],
}

impl MachineView<'_> {
    pub fn n(&self) -> usize {
        self.processed.len()
    }

    pub fn unfinished(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(move |&i| !self.finished[i])
    }

    pub fn all_finished(&self) -> bool {
        self.finished.iter().all(|&f| f)
    }
}

/// A scheduling policy. Policies are stateful and built fresh for each run.
pub trait Policy {
    fn decide(&mut self, view: &MachineView<'_>) -> PolicyDecision;
}

impl<P: Policy + ?Sized> Policy for Box<P> {
    fn decide(&mut self, view: &MachineView<'_>) -> PolicyDecision {
        (**self).decide(view)
    }
}

/// One decision point in the event log.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: f64,
    pub causes: Vec<Cause>,
    /// Rates in force during the interval that ended at `time`.
    pub rates: Vec<f64>,
    /// Processed amounts at `time`, after snapping.
    pub processed: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionTrace {
    pub completion: Vec<f64>,
    pub objective: f64,
    /// Empty unless the run was recorded.
    pub events: Vec<Event>,
    pub event_count: usize,
    pub recorded: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Keep the full event log (needed for delays and CSV dumps).
    pub record: bool,
    pub max_events: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { record: true, max_events: 10_000_000 }
    }
}

impl RunOptions {
    pub fn lean() -> Self {
        Self { record: false, ..Self::default() }
    }
}

/// Runs `policy` on `x` with a recorded event log.
pub fn run<P: Policy + ?Sized>(policy: &mut P, x: &JobInstance) -> Result<ExecutionTrace> {
    run_with(policy, x, RunOptions::default())
}

pub fn run_with<P: Policy + ?Sized>(
    policy: &mut P,
    x: &JobInstance,
    opts: RunOptions,
) -> Result<ExecutionTrace> {
    let sizes = x.sizes();
    let n = sizes.len();
    let mut processed = vec![0.0; n];
    let mut finished = vec![false; n];
    let mut completion = vec![f64::NAN; n];
    let mut remaining = n;
    let mut now = 0.0_f64;
    let mut elapsed = 0.0_f64;
    let mut causes: Vec<Cause> = Vec::new();
    let mut events: Vec<Event> = Vec::new();
    let mut event_count = 0usize;

    while remaining > 0 {
        let view = MachineView {
            now,
            elapsed,
            processed: &processed,
            finished: &finished,
            causes: &causes,
        };
        let decision = policy.decide(&view);
        validate(&decision, &processed, &finished, now)?;
        let rates = decision.rates;

        // Next event: earliest completion or trigger among running jobs.
        let mut dt = f64::INFINITY;
        let mut lead: Option<Cause> = None;
        for i in 0..n {
            if !finished[i] && rates[i] > 0.0 {
                let d = (sizes[i] - processed[i]) / rates[i];
                if d < dt {
                    dt = d;
                    lead = Some(Cause::Completion(i));
                }
            }
        }
        for t in &decision.triggers {
            let r = rates[t.job];
            if r > 0.0 {
                let d = (t.threshold - processed[t.job]) / r;
                if d < dt {
                    dt = d;
                    lead = Some(Cause::Trigger { job: t.job, threshold: t.threshold });
                }
            }
        }
        let lead = lead.expect("validated decision has a running job");

        for i in 0..n {
            if rates[i] > 0.0 {
                processed[i] += rates[i] * dt;
            }
        }
        let prev = now;
        now += dt;
        elapsed = dt;

        causes.clear();
        for i in 0..n {
            let hit = match lead {
                Cause::Completion(j) => j == i,
                _ => false,
            };
            if !finished[i] && rates[i] > 0.0 && (hit || tol::reached(processed[i], sizes[i])) {
                processed[i] = sizes[i];
                finished[i] = true;
                completion[i] = now;
                remaining -= 1;
                causes.push(Cause::Completion(i));
            }
        }
        let mut fired: Vec<Trigger> = decision
            .triggers
            .iter()
            .copied()
            .filter(|t| {
                let hit = lead == Cause::Trigger { job: t.job, threshold: t.threshold };
                !finished[t.job]
                    && rates[t.job] > 0.0
                    && (hit || (processed[t.job] - t.threshold).abs() <= tol::tol(t.threshold))
            })
            .collect();
        fired.sort_by(|a, b| a.job.cmp(&b.job).then(a.threshold.total_cmp(&b.threshold)));
        for t in fired {
            processed[t.job] = t.threshold;
            causes.push(Cause::Trigger { job: t.job, threshold: t.threshold });
        }

        event_count += 1;
        if event_count > opts.max_events {
            return Err(Error::State(format!(
                "event limit {} exceeded at t={now}",
                opts.max_events
            )));
        }
        if opts.record {
            match events.last_mut() {
                // A step too small to move the clock: fold into the previous entry.
                Some(last) if now <= prev && last.time == now => {
                    last.causes.extend(causes.iter().copied());
                    last.processed.clone_from(&processed);
                }
                _ => events.push(Event {
                    time: now,
                    causes: causes.clone(),
                    rates,
                    processed: processed.clone(),
                }),
            }
        }
    }

    let objective = completion.iter().sum();
    Ok(ExecutionTrace {
        completion,
        objective,
        events,
        event_count,
        recorded: opts.record,
    })
}

fn validate(d: &PolicyDecision, processed: &[f64], finished: &[bool], now: f64) -> Result<()> {
    let n = processed.len();
    let violation = |detail: String| Err(Error::Contract { time: now, detail });
    if d.rates.len() != n {
        return violation(format!("{} rates for {n} jobs", d.rates.len()));
    }
    let mut sum = 0.0;
    let mut progress = false;
    for (i, &r) in d.rates.iter().enumerate() {
        if !(r >= 0.0 && r.is_finite()) {
            return violation(format!("job {i} has rate {r}"));
        }
        if finished[i] && r > 0.0 {
            return violation(format!("finished job {i} has rate {r}"));
        }
        progress |= !finished[i] && r > 0.0;
        sum += r;
    }
    if sum > 1.0 + tol::RATE_SLACK {
        return violation(format!("rates sum to {sum}"));
    }
    for t in &d.triggers {
        if t.job >= n {
            return violation(format!("trigger on unknown job {}", t.job));
        }
        if !(t.threshold > processed[t.job]) {
            return violation(format!(
                "stale trigger on job {} at {} (processed {})",
                t.job, t.threshold, processed[t.job]
            ));
        }
    }
    if !progress {
        let unfinished = finished.iter().filter(|&&f| !f).count();
        return Err(Error::Deadlock { time: now, unfinished });
    }
    Ok(())
}

/// Pairwise delays of a completed, recorded run.
#[derive(Debug, Clone, PartialEq)]
pub struct Delays {
    /// `directed[i][j] = D_ij`: time spent on `i` before `j` completes.
    pub directed: Vec<Vec<f64>>,
}

impl Delays {
    pub fn n(&self) -> usize {
        self.directed.len()
    }

    /// Mutual delay `P_ij = D_ij + D_ji`.
    pub fn mutual(&self, i: usize, j: usize) -> f64 {
        self.directed[i][j] + self.directed[j][i]
    }

    /// `sum_{i<j} P_ij`.
    pub fn total_mutual(&self) -> f64 {
        let n = self.n();
        let mut s = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                s += self.mutual(i, j);
            }
        }
        s
    }
}

/// Extracts `D_ij = S_i(t_j)` from the event log.
pub fn delays_from_trace(trace: &ExecutionTrace, x: &JobInstance) -> Result<Delays> {
    let n = x.len();
    if !trace.recorded {
        return Err(Error::State("trace was run without an event log".into()));
    }
    if trace.completion.len() != n || trace.completion.iter().any(|t| !t.is_finite()) {
        return Err(Error::State("trace is incomplete".into()));
    }
    let mut directed = vec![vec![0.0; n]; n];
    let mut seen = vec![false; n];
    for ev in &trace.events {
        for c in &ev.causes {
            if let Cause::Completion(j) = *c {
                seen[j] = true;
                for i in 0..n {
                    if i != j {
                        directed[i][j] = ev.processed[i];
                    }
                }
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::State("event log misses a completion".into()));
    }
    Ok(Delays { directed })
}

/// Writes the event log as CSV: `time,cause,job,rate_vector`.
///
/// One row per cause; `rate_vector` holds the rates that were in force up
/// to the event, separated by `;`.
pub fn write_trace_csv<W: Write>(trace: &ExecutionTrace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "cause", "job", "rate_vector"])?;
    for ev in &trace.events {
        let rates: Vec<String> = ev.rates.iter().map(|r| r.to_string()).collect();
        let rates = rates.join(";");
        for c in &ev.causes {
            let (cause, job) = match *c {
                Cause::Completion(j) => ("completion".to_string(), j),
                Cause::Trigger { job, threshold } => (format!("trigger({threshold})"), job),
            };
            w.write_record([ev.time.to_string(), cause, job.to_string(), rates.clone()])?;
        }
    }
    w.flush()?;
    Ok(())
}
