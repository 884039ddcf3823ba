//! The quadratic form `φ = a·s₁² + b·s₂ + c·s₁`, multiplicity-table sequences over `F_p`,
//! and the power-sum reachability grid that decides zero-freeness.
//!
//! A sequence is zero-free when no nonempty sub-multiset `T` has `φ(T) = 0`. Since `φ(T)`
//! only depends on the pair `(s₁(T), s₂(T))`, it suffices to track the set of pairs reached
//! by nonempty sub-multisets ([`ReachSet`]) and test it against the vanishing set of `φ`
//! ([`ZeroLocus`]).

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::modp::{inverse, Prime, Residue};

/// Default cap on the number of sub-multisets [`naive_is_zero_free`] will enumerate.
pub const DEFAULT_NAIVE_BUDGET: u64 = 1 << 20;

/// Coefficients of `φ = a·s₁² + b·s₂ + c·s₁` over `F_p`, with `(a, b) ≠ (0, 0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QuadPhi {
    p: Prime,
    a: Residue,
    b: Residue,
    c: Residue,
}

impl QuadPhi {
    pub fn new(p: Prime, a: i64, b: i64, c: i64) -> Result<Self> {
        let (a, b, c) = (p.residue(a), p.residue(b), p.residue(c));
        if a.is_zero() && b.is_zero() {
            return Err(Error::domain("a and b cannot both vanish"));
        }
        Ok(QuadPhi { p, a, b, c })
    }

    /// The normalized form `s₁² + λ·s₂ + μ·s₁`.
    pub fn normalized(p: Prime, lambda: i64, mu: i64) -> Result<Self> {
        Self::new(p, 1, lambda, mu)
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn a(&self) -> Residue {
        self.a
    }

    pub fn b(&self) -> Residue {
        self.b
    }

    pub fn c(&self) -> Residue {
        self.c
    }

    /// `(λ, μ) = (b·a⁻¹, c·a⁻¹)`; `None` when `a = 0`. Scaling by `a⁻¹` leaves the zero set unchanged.
    pub fn lambda_mu(&self) -> Option<(Residue, Residue)> {
        let inv = inverse(self.a, self.p).ok()?;
        Some((self.p.mul(self.b, inv), self.p.mul(self.c, inv)))
    }

    pub fn lambda(&self) -> Option<Residue> {
        self.lambda_mu().map(|(l, _)| l)
    }

    pub fn mu(&self) -> Option<Residue> {
        self.lambda_mu().map(|(_, m)| m)
    }

    /// `φ` evaluated at the power sums `(s₁, s₂)`.
    #[inline]
    pub fn eval_sums(&self, s1: Residue, s2: Residue) -> Residue {
        let p = self.p;
        let t = p.add(p.mul(self.a, s1), self.c);
        p.add(p.mul(t, s1), p.mul(self.b, s2))
    }

    /// `φ([u]^j)`.
    pub fn eval_power(&self, u: Residue, j: u32) -> Residue {
        let p = self.p;
        let j = p.residue(j as i64);
        let s1 = p.mul(j, u);
        self.eval_sums(s1, p.mul(s1, u))
    }
}

impl fmt::Display for QuadPhi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}·s1² + {}·s2 + {}·s1 (mod {})", self.a, self.b, self.c, self.p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PowerSums {
    pub s1: Residue,
    pub s2: Residue,
}

/// A sequence over `F_p` in multiplicity form `[u₁]^{n₁}⋯[u_t]^{n_t}`.
///
/// Every multiplicity is kept below `p`: `p` copies of one element have both power sums zero,
/// so no zero-free sequence ever needs them.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultisetSeq {
    p: Prime,
    mult: Vec<u32>,
    len: u32,
}

impl MultisetSeq {
    pub fn empty(p: Prime) -> Self {
        MultisetSeq {
            p,
            mult: vec![0; p.as_usize()],
            len: 0,
        }
    }

    /// Builds from `(element, multiplicity)` pairs; elements are reduced mod `p` and repeated
    /// elements accumulate.
    pub fn from_counts(p: Prime, counts: &[(i64, u32)]) -> Result<Self> {
        let mut seq = Self::empty(p);
        for &(u, n) in counts {
            seq.push(p.residue(u), n)?;
        }
        Ok(seq)
    }

    pub fn from_elements(p: Prime, elems: &[i64]) -> Result<Self> {
        let mut seq = Self::empty(p);
        for &u in elems {
            seq.push(p.residue(u), 1)?;
        }
        Ok(seq)
    }

    pub fn push(&mut self, u: Residue, n: u32) -> Result<()> {
        let slot = &mut self.mult[u.index()];
        if *slot + n >= self.p.get() {
            return Err(Error::domain(format!(
                "multiplicity of {u} would reach {} >= p = {}",
                *slot + n,
                self.p
            )));
        }
        *slot += n;
        self.len += n;
        Ok(())
    }

    pub(crate) fn set_mult(&mut self, u: usize, n: u32) {
        debug_assert!(n < self.p.get());
        self.len = self.len - self.mult[u] + n;
        self.mult[u] = n;
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn mult(&self, u: Residue) -> u32 {
        self.mult[u.index()]
    }

    pub fn multiplicities(&self) -> &[u32] {
        &self.mult
    }

    /// `(u, mult[u])` for every element present, ascending in `u`.
    pub fn support(&self) -> impl Iterator<Item = (Residue, u32)> + '_ {
        self.mult
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .map(|(u, &n)| (Residue(u as u32), n))
    }

    pub fn power_sums(&self) -> PowerSums {
        let p = self.p;
        let (mut s1, mut s2) = (Residue::ZERO, Residue::ZERO);
        for (u, n) in self.support() {
            let n = p.residue(n as i64);
            let nu = p.mul(n, u);
            s1 = p.add(s1, nu);
            s2 = p.add(s2, p.mul(nu, u));
        }
        PowerSums { s1, s2 }
    }

    /// Canonical text form `[u1]^n1 [u2]^n2 …`, ascending in `u`; the empty sequence is `[]`.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    /// Parses the canonical text form. Also accepts `[u]` for `[u]^1`, negative
    /// representatives such as `[-1]` or `[−1]`, braced exponents, and juxtaposed factors
    /// like `[1][-1]^{4}`.
    pub fn parse(text: &str, p: Prime) -> Result<Self> {
        let mut seq = Self::empty(p);
        let mut rest = text.trim();
        if rest == "[]" || rest.is_empty() {
            return Ok(seq);
        }
        while !rest.is_empty() {
            let body = rest
                .strip_prefix('[')
                .ok_or_else(|| Error::Parse(format!("expected '[' in {text:?}")))?;
            let close = body
                .find(']')
                .ok_or_else(|| Error::Parse(format!("unclosed '[' in {text:?}")))?;
            let u = i64::from_str(&body[..close].trim().replace('\u{2212}', "-"))
                .map_err(|e| Error::Parse(format!("bad element in {text:?}: {e}")))?;
            rest = &body[close + 1..];
            let mut n = 1;
            if let Some(exp) = rest.strip_prefix('^') {
                let (exp, braced) = match exp.strip_prefix('{') {
                    Some(inner) => (inner, true),
                    None => (exp, false),
                };
                let digits = exp.find(|c: char| !c.is_ascii_digit()).unwrap_or(exp.len());
                n = u32::from_str(&exp[..digits])
                    .map_err(|e| Error::Parse(format!("bad exponent in {text:?}: {e}")))?;
                rest = &exp[digits..];
                if braced {
                    rest = rest
                        .strip_prefix('}')
                        .ok_or_else(|| Error::Parse(format!("unclosed '{{' in {text:?}")))?;
                }
            }
            seq.push(p.residue(u), n)?;
            rest = rest.trim_start();
        }
        Ok(seq)
    }

    /// Whether `self` is a sub-multiset of `other`.
    pub fn is_submultiset_of(&self, other: &MultisetSeq) -> bool {
        self.p == other.p && self.mult.iter().zip(&other.mult).all(|(a, b)| a <= b)
    }
}

impl fmt::Display for MultisetSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("[]");
        }
        let mut first = true;
        for (u, n) in self.support() {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "[{u}]^{n}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for MultisetSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultisetSeq(p={}, {})", self.p, self)
    }
}

impl Ord for MultisetSeq {
    fn cmp(&self, other: &Self) -> Ordering {
        self.p.cmp(&other.p).then_with(|| self.mult.cmp(&other.mult))
    }
}

impl PartialOrd for MultisetSeq {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A `p × p` bit grid indexed by `(s₁, s₂)`: one row per `s₁`, rows packed into `u64` words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Grid {
    p: usize,
    wpr: usize,
    words: Vec<u64>,
}

impl Grid {
    pub fn new(p: Prime) -> Self {
        let p = p.as_usize();
        let wpr = p.div_ceil(64);
        Grid {
            p,
            wpr,
            words: vec![0; p * wpr],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.words[x * self.wpr + y / 64] >> (y % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize) {
        self.words[x * self.wpr + y / 64] |= 1 << (y % 64);
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_clear(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn intersects(&self, other: &Grid) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn is_subset_of(&self, other: &Grid) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// Set points, row-major.
    pub fn points(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.p).flat_map(move |x| (0..self.p).filter(move |&y| self.get(x, y)).map(move |y| (x, y)))
    }

    #[inline]
    fn row(&self, x: usize) -> &[u64] {
        &self.words[x * self.wpr..(x + 1) * self.wpr]
    }
}

/// Cyclic left rotation by `k` of a `p`-bit row stored in `src`, written to `dst`.
fn rotate_row(src: &[u64], k: usize, p: usize, dst: &mut [u64]) {
    dst.fill(0);
    // bits [0, p-k) move up by k, bits [p-k, p) wrap to the bottom.
    or_shifted_left(src, k, dst);
    if k > 0 {
        or_shifted_right(src, p - k, dst);
    }
    let tail = p % 64;
    if tail != 0 {
        *dst.last_mut().unwrap() &= (1u64 << tail) - 1;
    }
}

fn or_shifted_left(src: &[u64], k: usize, dst: &mut [u64]) {
    let (ws, bs) = (k / 64, k % 64);
    for i in (ws..dst.len()).rev() {
        let j = i - ws;
        let mut w = src[j] << bs;
        if bs > 0 && j > 0 {
            w |= src[j - 1] >> (64 - bs);
        }
        dst[i] |= w;
    }
}

fn or_shifted_right(src: &[u64], k: usize, dst: &mut [u64]) {
    let (ws, bs) = (k / 64, k % 64);
    for i in 0..dst.len().saturating_sub(ws) {
        let j = i + ws;
        let mut w = src[j] >> bs;
        if bs > 0 && j + 1 < src.len() {
            w |= src[j + 1] << (64 - bs);
        }
        dst[i] |= w;
    }
}

/// The points `(s₁, s₂)` where `φ` vanishes.
#[derive(Clone, PartialEq, Eq)]
pub struct ZeroLocus {
    grid: Grid,
}

impl ZeroLocus {
    pub fn contains(&self, s1: Residue, s2: Residue) -> bool {
        self.grid.get(s1.index(), s2.index())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.count()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_clear()
    }
}

pub fn zero_locus(phi: &QuadPhi) -> ZeroLocus {
    let p = phi.p();
    let mut grid = Grid::new(p);
    for x in p.residues() {
        for y in p.residues() {
            if phi.eval_sums(x, y).is_zero() {
                grid.set(x.index(), y.index());
            }
        }
    }
    ZeroLocus { grid }
}

/// Power-sum pairs of all nonempty sub-multisets of a sequence.
#[derive(Clone, PartialEq, Eq)]
pub struct ReachSet {
    grid: Grid,
}

impl ReachSet {
    pub fn empty(p: Prime) -> Self {
        ReachSet { grid: Grid::new(p) }
    }

    pub fn of(seq: &MultisetSeq) -> Self {
        let mut reach = Self::empty(seq.p());
        for (u, n) in seq.support() {
            reach = reach_extend(&reach, u, n);
        }
        reach
    }

    pub fn contains(&self, s1: Residue, s2: Residue) -> bool {
        self.grid.get(s1.index(), s2.index())
    }

    pub fn len(&self) -> usize {
        self.grid.count()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_clear()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn is_subset_of(&self, other: &ReachSet) -> bool {
        self.grid.is_subset_of(&other.grid)
    }

    pub fn meets(&self, locus: &ZeroLocus) -> bool {
        self.grid.intersects(&locus.grid)
    }

    /// Writes the reach set after appending one copy of `u` into `out` (same `p`), and
    /// reports whether every newly reached point avoids `locus`. `out` is fully overwritten.
    #[inline]
    pub fn extend_one_into(&self, u: Residue, locus: &ZeroLocus, out: &mut ReachSet) -> bool {
        let g = &self.grid;
        let p = g.p;
        let (u, v) = (u.index(), u.index() * u.index() % p);
        let lw = &locus.grid.words;
        out.grid.words.copy_from_slice(&g.words);
        let ow = &mut out.grid.words;
        let mut hit = locus.grid.get(u, v);
        if g.wpr == 1 {
            let mask = if p == 64 { u64::MAX } else { (1u64 << p) - 1 };
            for (x, &row) in g.words.iter().enumerate() {
                if row == 0 {
                    continue;
                }
                let moved = if v == 0 { row } else { ((row << v) | (row >> (p - v))) & mask };
                let dst = if x + u >= p { x + u - p } else { x + u };
                hit |= moved & lw[dst] != 0;
                ow[dst] |= moved;
            }
        } else {
            let wpr = g.wpr;
            let mut buf = vec![0u64; wpr];
            for x in 0..p {
                let src = g.row(x);
                if src.iter().all(|&w| w == 0) {
                    continue;
                }
                rotate_row(src, v, p, &mut buf);
                let dst = (x + u) % p;
                for (i, &w) in buf.iter().enumerate() {
                    hit |= w & lw[dst * wpr + i] != 0;
                    ow[dst * wpr + i] |= w;
                }
            }
        }
        out.grid.set(u, v);
        !hit
    }
}

/// Reach set of `S ∪ [u]^count` from that of `S`, one copy at a time.
pub fn reach_extend(reach: &ReachSet, u: Residue, count: u32) -> ReachSet {
    let p = reach.grid.p;
    // The locus argument only affects the returned flag; an empty one costs nothing extra.
    let no_locus = ZeroLocus { grid: reach.grid.clone_empty() };
    let mut cur = reach.clone();
    let mut next = reach.clone();
    for _ in 0..count {
        cur.extend_one_into(Residue((u.index() % p) as u32), &no_locus, &mut next);
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}

impl Grid {
    fn clone_empty(&self) -> Grid {
        Grid {
            p: self.p,
            wpr: self.wpr,
            words: vec![0; self.words.len()],
        }
    }
}

/// `φ(S)` for a nonempty sequence.
pub fn phi_eval(phi: &QuadPhi, seq: &MultisetSeq) -> Result<Residue> {
    if seq.is_empty() {
        return Err(Error::domain("φ is only evaluated on nonempty sequences"));
    }
    let PowerSums { s1, s2 } = seq.power_sums();
    Ok(phi.eval_sums(s1, s2))
}

/// True iff no nonempty sub-multiset of `seq` is a zero of `φ`.
pub fn is_zero_free(phi: &QuadPhi, seq: &MultisetSeq) -> bool {
    is_zero_free_with_locus(&zero_locus(phi), seq)
}

pub fn is_zero_free_with_locus(locus: &ZeroLocus, seq: &MultisetSeq) -> bool {
    if seq.mult[0] > 0 {
        return false;
    }
    let mut cur = ReachSet::empty(seq.p());
    let mut next = cur.clone();
    for (u, n) in seq.support() {
        for _ in 0..n {
            if !cur.extend_one_into(u, locus, &mut next) {
                return false;
            }
            std::mem::swap(&mut cur, &mut next);
        }
    }
    true
}

/// Zero-freeness by explicit enumeration of every nonempty sub-multiset.
pub fn naive_is_zero_free(phi: &QuadPhi, seq: &MultisetSeq) -> Result<bool> {
    naive_is_zero_free_with_budget(phi, seq, DEFAULT_NAIVE_BUDGET)
}

pub fn naive_is_zero_free_with_budget(phi: &QuadPhi, seq: &MultisetSeq, budget: u64) -> Result<bool> {
    let support: Vec<(Residue, u32)> = seq.support().collect();
    let total = support
        .iter()
        .try_fold(1u64, |acc, &(_, n)| acc.checked_mul(n as u64 + 1))
        .filter(|&t| t <= budget)
        .ok_or_else(|| Error::Resource(format!("more than {budget} sub-multisets in {seq}")))?;
    let p = seq.p();
    let mut exps = vec![0u32; support.len()];
    for _ in 1..total {
        // odometer step
        for (e, &(_, n)) in exps.iter_mut().zip(&support) {
            if *e < n {
                *e += 1;
                break;
            }
            *e = 0;
        }
        let mut sub = MultisetSeq::empty(p);
        for (&e, &(u, _)) in exps.iter().zip(&support) {
            if e > 0 {
                sub.push(u, e)?;
            }
        }
        if phi_eval(phi, &sub)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Largest `k ≤ p − 1` such that `[u]^j` is not a zero of `φ` for every `1 ≤ j ≤ k`.
pub fn singleton_cap(phi: &QuadPhi, u: Residue) -> u32 {
    if u.is_zero() {
        return 0;
    }
    (1..phi.p().get())
        .take_while(|&j| !phi.eval_power(u, j).is_zero())
        .count() as u32
}
