//! Exact `D(φ, p)` by depth-first branch-and-bound over multiplicity tables.
//!
//! Residues `1, …, p−1` are visited in ascending order and each is given a multiplicity,
//! largest first. The reach set is extended one copy at a time, so a branch dies the moment
//! a nonempty sub-multiset hits the zero locus. Zero-freeness is hereditary, which makes
//! the following bound sound: for every residue still to be placed we keep the number of
//! copies that could be appended to the *current* sequence on its own; these per-residue
//! caps only shrink as the sequence grows, and their sum plus the current length bounds
//! every completion of the branch.

use std::sync::atomic::{AtomicBool, AtomicU32, AtomicU64, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::modp::{inverse, Prime, Residue};
use crate::phi::{is_zero_free, singleton_cap, zero_locus, MultisetSeq, QuadPhi, ReachSet, ZeroLocus};
use crate::theory;

pub const DEFAULT_MAX_P: u32 = 31;

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub max_p: u32,
    pub enumerate_extremal: bool,
    /// Worker threads; 0 runs on the calling thread.
    pub parallel_width: usize,
    pub node_budget: Option<u64>,
    pub time_budget: Option<Duration>,
    /// Seed the incumbent with witnessed lower bounds and stop at proved upper bounds.
    /// Disable to get a search that is independent of the theory module.
    pub theory_seed: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            max_p: DEFAULT_MAX_P,
            enumerate_extremal: false,
            parallel_width: 0,
            node_budget: None,
            time_budget: None,
            theory_seed: true,
        }
    }
}

impl SearchOptions {
    pub fn enumerate() -> Self {
        SearchOptions {
            enumerate_extremal: true,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.node_budget == Some(0) {
            return Err(Error::domain("node budget must be positive"));
        }
        if self.time_budget == Some(Duration::ZERO) {
            return Err(Error::domain("time budget must be positive"));
        }
        Ok(())
    }
}

/// Result of an exhausted search.
#[derive(Clone, Debug)]
pub struct SearchReport {
    pub d_value: u32,
    /// Sorted canonically. All of `M(φ, p)` when enumeration was requested, otherwise one member.
    pub extremal: Vec<MultisetSeq>,
    /// `|M(φ, p)|`, present only for enumerating searches.
    pub extremal_count: Option<usize>,
    pub nodes_visited: u64,
    pub elapsed: Duration,
}

impl SearchReport {
    pub fn enumerated(&self) -> bool {
        self.extremal_count.is_some()
    }
}

/// Best-so-far state of a search stopped by its budget. Not certified.
#[derive(Clone, Debug)]
pub struct PartialReport {
    pub best_length: u32,
    pub best: Vec<MultisetSeq>,
    pub nodes_visited: u64,
    pub elapsed: Duration,
}

impl PartialReport {
    /// `D(φ, p)` is at least this.
    pub fn d_lower_bound(&self) -> u32 {
        self.best_length + 1
    }
}

/// Search-invariant data shared by all workers.
struct Ctx {
    p: Prime,
    locus: ZeroLocus,
    residues: Vec<Residue>,
    caps: Vec<u32>,
    /// Sequences of length `>= threshold` are kept; `keep_equal` decides whether ties with
    /// the incumbent are worth exploring.
    keep_equal: bool,
    stop_at: Option<u32>,
    incumbent: AtomicU32,
    nodes: AtomicU64,
    stop: AtomicBool,
    budget_hit: AtomicBool,
    node_budget: Option<u64>,
    deadline: Option<Instant>,
}

impl Ctx {
    #[inline]
    fn worth(&self, bound: u32) -> bool {
        let inc = self.incumbent.load(Ordering::Relaxed);
        if self.keep_equal {
            bound >= inc
        } else {
            bound > inc
        }
    }
}

struct Worker<'a> {
    ctx: &'a Ctx,
    cur: MultisetSeq,
    /// Per residue depth: reach after 0, 1, 2, … copies of that residue.
    chains: Vec<Vec<ReachSet>>,
    /// Per depth: caps of the residues at positions `depth..`.
    caps: Vec<Vec<u32>>,
    best_len: u32,
    found: Vec<MultisetSeq>,
    nodes: u64,
    flushed: u64,
}

const FLUSH_EVERY: u64 = 1 << 12;

impl<'a> Worker<'a> {
    fn new(ctx: &'a Ctx) -> Self {
        let n = ctx.residues.len();
        let blank = ReachSet::empty(ctx.p);
        Worker {
            ctx,
            cur: MultisetSeq::empty(ctx.p),
            chains: (0..=n)
                .map(|_| vec![blank.clone(); ctx.p.as_usize()])
                .collect(),
            caps: (0..=n).map(|_| vec![0; n]).collect(),
            best_len: 0,
            found: Vec::new(),
            nodes: 0,
            flushed: 0,
        }
    }

    fn tick(&mut self) -> bool {
        self.nodes += 1;
        let every = self.ctx.node_budget.map_or(FLUSH_EVERY, |b| b.min(FLUSH_EVERY));
        if self.nodes - self.flushed >= every {
            let total = self.ctx.nodes.fetch_add(self.nodes - self.flushed, Ordering::Relaxed)
                + (self.nodes - self.flushed);
            self.flushed = self.nodes;
            let over_nodes = self.ctx.node_budget.is_some_and(|b| total >= b);
            let over_time = self.ctx.deadline.is_some_and(|d| Instant::now() >= d);
            if over_nodes || over_time {
                self.ctx.budget_hit.store(true, Ordering::Relaxed);
                self.ctx.stop.store(true, Ordering::Relaxed);
            }
        }
        !self.ctx.stop.load(Ordering::Relaxed)
    }

    fn flush(&mut self) {
        self.ctx.nodes.fetch_add(self.nodes - self.flushed, Ordering::Relaxed);
        self.flushed = self.nodes;
    }

    fn record(&mut self) {
        let len = self.cur.len();
        let ctx = self.ctx;
        if !ctx.worth(len) {
            return;
        }
        // incumbent >= best_len, so a worthwhile length is never shorter than best_len
        if len > self.best_len || self.found.is_empty() {
            self.best_len = len;
            self.found.clear();
        }
        if ctx.keep_equal || self.found.is_empty() {
            self.found.push(self.cur.clone());
        }
        ctx.incumbent.fetch_max(len, Ordering::Relaxed);
        if ctx.stop_at.is_some_and(|s| len >= s) {
            ctx.stop.store(true, Ordering::Relaxed);
        }
    }

    /// Computes into `out[j]` (for `j >= from`) how many copies of residue `j` fit on top of
    /// `reach`, never exceeding `limit[j]`. Returns the sum.
    fn refine_caps(&self, reach: &ReachSet, from: usize, limit: &[u32], out: &mut [u32], scratch: &mut [ReachSet]) -> u32 {
        let mut total = 0;
        for j in from..self.ctx.residues.len() {
            let u = self.ctx.residues[j];
            let mut k = 0;
            if limit[j] > 0 {
                let (a, rest) = scratch.split_at_mut(1);
                let (cur, nxt) = (&mut a[0], &mut rest[0]);
                if reach.extend_one_into(u, &self.ctx.locus, cur) {
                    k = 1;
                    while k < limit[j] && cur.extend_one_into(u, &self.ctx.locus, nxt) {
                        std::mem::swap(cur, nxt);
                        k += 1;
                    }
                }
            }
            out[j] = k;
            total += k;
        }
        total
    }

    /// Explores all completions of `self.cur` using residues at positions `depth..`.
    /// `reach` is the reach set of `self.cur`; `self.caps[depth]` holds the caps.
    fn dfs(&mut self, depth: usize, reach: &ReachSet) {
        if !self.tick() {
            return;
        }
        let n = self.ctx.residues.len();
        let len = self.cur.len();
        let caps = std::mem::take(&mut self.caps[depth]);
        let remaining: u32 = caps[depth..].iter().sum();
        if remaining == 0 {
            self.record();
            self.caps[depth] = caps;
            return;
        }
        if !self.ctx.worth(len + remaining) {
            self.caps[depth] = caps;
            return;
        }
        // Skip residues that can no longer be used at all.
        let mut d = depth;
        while caps[d] == 0 {
            d += 1;
        }
        let u = self.ctx.residues[d];
        let rest: u32 = caps[d + 1..].iter().sum();

        let mut chain = std::mem::take(&mut self.chains[d]);
        let mut child_caps = std::mem::take(&mut self.caps[d + 1]);
        let mut scratch = [ReachSet::empty(self.ctx.p), ReachSet::empty(self.ctx.p)];
        chain[0].clone_from(reach);
        let top = build_chain(&mut chain, u, &self.ctx.locus, caps[d]);
        for m in (0..=top).rev() {
            if self.ctx.stop.load(Ordering::Relaxed) {
                break;
            }
            if !self.ctx.worth(len + m + rest) {
                // bounds only loosen as m grows, and we go downwards
                break;
            }
            let r = &chain[m as usize];
            let sum = if d + 1 < n {
                self.refine_caps(r, d + 1, &caps, &mut child_caps, &mut scratch)
            } else {
                0
            };
            if !self.ctx.worth(len + m + sum) {
                continue;
            }
            self.cur.set_mult(u.index(), m);
            if d + 1 == n || sum == 0 {
                self.tick();
                self.record();
            } else {
                self.caps[d + 1] = child_caps;
                self.dfs(d + 1, r);
                child_caps = std::mem::take(&mut self.caps[d + 1]);
            }
            self.cur.set_mult(u.index(), 0);
        }
        self.caps[d + 1] = child_caps;
        self.chains[d] = chain;
        self.caps[depth] = caps;
    }
}

/// Fills `chain[1..]` with successive copies of `u`; returns the count of copies that stay zero-free.
fn build_chain(chain: &mut [ReachSet], u: Residue, locus: &ZeroLocus, limit: u32) -> u32 {
    let mut k = 0;
    while k < limit {
        let (head, tail) = chain.split_at_mut(k as usize + 1);
        if !head[k as usize].extend_one_into(u, locus, &mut tail[0]) {
            break;
        }
        k += 1;
    }
    k
}

pub fn max_zero_free(phi: &QuadPhi, opts: &SearchOptions) -> Result<SearchReport> {
    opts.validate()?;
    let p = phi.p();
    if p.get() > opts.max_p {
        return Err(Error::domain(format!(
            "p = {p} exceeds the exact-search cap {}",
            opts.max_p
        )));
    }
    let start = Instant::now();
    let locus = zero_locus(phi);
    let residues: Vec<Residue> = p.units().filter(|&u| singleton_cap(phi, u) > 0).collect();
    let caps: Vec<u32> = residues.iter().map(|&u| singleton_cap(phi, u)).collect();

    let mut seed_len = 0;
    let mut seed: Vec<MultisetSeq> = Vec::new();
    let mut stop_at = None;
    if opts.theory_seed {
        let bounds = theory::bounds(phi)?;
        if let Some(w) = bounds.best_lower_witness() {
            seed_len = w.len();
            seed.push(w.clone());
        }
        if !opts.enumerate_extremal {
            stop_at = Some(bounds.best_upper - 1);
        }
    }

    let ctx = Ctx {
        p,
        locus,
        residues,
        caps,
        keep_equal: opts.enumerate_extremal,
        stop_at,
        incumbent: AtomicU32::new(seed_len),
        nodes: AtomicU64::new(0),
        stop: AtomicBool::new(stop_at.is_some_and(|s| seed_len >= s)),
        budget_hit: AtomicBool::new(false),
        node_budget: opts.node_budget,
        deadline: opts.time_budget.map(|t| start + t),
    };

    let results: Vec<(u32, Vec<MultisetSeq>)> = if opts.parallel_width == 0 {
        vec![run_task(&ctx, &Task::root(&ctx))]
    } else {
        let tasks = frontier(&ctx, opts.parallel_width * 8);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.parallel_width)
            .build()
            .map_err(|e| Error::Resource(e.to_string()))?;
        pool.install(|| tasks.par_iter().map(|t| run_task(&ctx, t)).collect())
    };

    let mut best_len = seed_len;
    let mut best: Vec<MultisetSeq> = if seed.is_empty() { vec![MultisetSeq::empty(p)] } else { seed };
    for (len, found) in results {
        if found.is_empty() {
            continue;
        }
        if len > best_len {
            best_len = len;
            best.clear();
        }
        if len == best_len {
            best.extend(found);
        }
    }
    best.sort();
    best.dedup();
    let nodes_visited = ctx.nodes.load(Ordering::Relaxed);
    let elapsed = start.elapsed();

    if ctx.budget_hit.load(Ordering::Relaxed) {
        return Err(Error::BudgetExhausted(Box::new(PartialReport {
            best_length: best_len,
            best,
            nodes_visited,
            elapsed,
        })));
    }
    if !opts.enumerate_extremal {
        best.truncate(1);
    }
    let extremal_count = opts.enumerate_extremal.then_some(best.len());
    Ok(SearchReport {
        d_value: best_len + 1,
        extremal: best,
        extremal_count,
        nodes_visited,
        elapsed,
    })
}

/// A fixed prefix of multiplicities for the first residues, with its reach set and caps.
struct Task {
    prefix: Vec<u32>,
    reach: ReachSet,
    caps: Vec<u32>,
}

impl Task {
    fn root(ctx: &Ctx) -> Task {
        Task {
            prefix: Vec::new(),
            reach: ReachSet::empty(ctx.p),
            caps: ctx.caps.clone(),
        }
    }
}

/// Expands the search tree breadth-first until there are at least `want` independent subtrees.
fn frontier(ctx: &Ctx, want: usize) -> Vec<Task> {
    let n = ctx.residues.len();
    let mut tasks = vec![Task::root(ctx)];
    let mut scratch = vec![ReachSet::empty(ctx.p); ctx.p.as_usize()];
    while tasks.len() < want {
        let depth = tasks[0].prefix.len();
        if depth + 1 >= n {
            break;
        }
        let mut next = Vec::new();
        for t in tasks {
            let u = ctx.residues[depth];
            scratch[0].clone_from(&t.reach);
            let avail = build_chain(&mut scratch, u, &ctx.locus, t.caps[depth]);
            for m in (0..=avail).rev() {
                let mut prefix = t.prefix.clone();
                prefix.push(m);
                let reach = scratch[m as usize].clone();
                let mut caps = t.caps.clone();
                caps[depth] = 0;
                for (cap, &v) in caps.iter_mut().zip(&ctx.residues).skip(depth + 1) {
                    *cap = copies_that_fit(&reach, v, &ctx.locus, *cap);
                }
                next.push(Task { prefix, reach, caps });
            }
        }
        tasks = next;
    }
    tasks
}

fn copies_that_fit(reach: &ReachSet, u: Residue, locus: &ZeroLocus, limit: u32) -> u32 {
    let mut cur = reach.clone();
    let mut nxt = reach.clone();
    let mut k = 0;
    while k < limit && cur.extend_one_into(u, locus, &mut nxt) {
        std::mem::swap(&mut cur, &mut nxt);
        k += 1;
    }
    k
}

fn run_task(ctx: &Ctx, task: &Task) -> (u32, Vec<MultisetSeq>) {
    let mut w = Worker::new(ctx);
    let depth = task.prefix.len();
    for (j, &m) in task.prefix.iter().enumerate() {
        w.cur.set_mult(ctx.residues[j].index(), m);
    }
    let n = ctx.residues.len();
    let mut caps = task.caps.clone();
    for c in caps.iter_mut().take(depth) {
        *c = 0;
    }
    if depth >= n {
        w.record();
    } else {
        w.caps[depth] = caps;
        w.dfs(depth, &task.reach);
    }
    w.flush();
    (w.best_len, w.found)
}

/// True iff `seq` has length `d_value − 1` and is zero-free.
pub fn verify_extremal(phi: &QuadPhi, seq: &MultisetSeq, d_value: u32) -> bool {
    d_value >= 1 && seq.len() == d_value - 1 && is_zero_free(phi, seq)
}

/// Whether some enumerated extremal sequence contains `[ω₀]^{p−1}`, `ω₀ = −μ·λ⁻¹`.
pub fn omega_hypothesis_holds(phi: &QuadPhi, report: &SearchReport) -> Result<bool> {
    if !report.enumerated() {
        return Err(Error::domain("the ω₀ hypothesis needs a fully enumerated M(φ, p)"));
    }
    let p = phi.p();
    let (lambda, mu) = phi
        .lambda_mu()
        .filter(|(l, m)| !l.is_zero() && !m.is_zero())
        .ok_or_else(|| Error::domain("the ω₀ hypothesis needs a ≠ 0 and λμ ≠ 0"))?;
    let omega = p.neg(p.mul(mu, inverse(lambda, p)?));
    Ok(report.extremal.iter().any(|s| s.mult(omega) == p.get() - 1))
}
