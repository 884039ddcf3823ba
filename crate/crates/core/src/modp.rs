//! Prime-field arithmetic over `F_p` for small odd primes, plus the
//! quadratic-residue helpers the bounds are phrased in.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest prime accepted by [`Prime::new`]. Search code imposes its own, tighter cap.
pub const UTILITY_MAX_P: u32 = 1021;

/// An odd prime modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Prime(u32);

/// An element of `F_p`, stored as its representative in `[0, p)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Residue(pub(crate) u32);

impl Residue {
    pub const ZERO: Residue = Residue(0);
    pub const ONE: Residue = Residue(1);

    #[inline]
    pub fn value(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Prime {
    /// Accepts odd primes up to [`UTILITY_MAX_P`].
    pub fn new(p: u32) -> Result<Self> {
        Self::with_cap(p, UTILITY_MAX_P)
    }

    pub fn with_cap(p: u32, cap: u32) -> Result<Self> {
        if p < 3 || p.is_multiple_of(2) {
            return Err(Error::domain(format!("{p} is not an odd prime")));
        }
        if p > cap {
            return Err(Error::domain(format!("p = {p} exceeds the configured maximum {cap}")));
        }
        if !is_prime(p as u64) {
            return Err(Error::domain(format!("{p} is not prime")));
        }
        Ok(Prime(p))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn as_usize(self) -> usize {
        self.0 as usize
    }

    /// Reduces any integer (negative included) into `F_p`.
    #[inline]
    pub fn residue(self, x: i64) -> Residue {
        Residue(x.rem_euclid(self.0 as i64) as u32)
    }

    /// All residues `0, 1, …, p−1`.
    pub fn residues(self) -> impl Iterator<Item = Residue> {
        (0..self.0).map(Residue)
    }

    /// Nonzero residues `1, …, p−1`.
    pub fn units(self) -> impl Iterator<Item = Residue> {
        (1..self.0).map(Residue)
    }

    #[inline]
    pub fn add(self, a: Residue, b: Residue) -> Residue {
        let s = a.0 + b.0;
        Residue(if s >= self.0 { s - self.0 } else { s })
    }

    #[inline]
    pub fn sub(self, a: Residue, b: Residue) -> Residue {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn neg(self, a: Residue) -> Residue {
        if a.0 == 0 {
            a
        } else {
            Residue(self.0 - a.0)
        }
    }

    #[inline]
    pub fn mul(self, a: Residue, b: Residue) -> Residue {
        Residue(((a.0 as u64 * b.0 as u64) % self.0 as u64) as u32)
    }

    pub fn pow(self, a: Residue, e: u64) -> Residue {
        Residue(mod_pow(a.0 as u64, e, self.0 as u64) as u32)
    }
}

impl TryFrom<u32> for Prime {
    type Error = Error;

    fn try_from(p: u32) -> Result<Self> {
        Prime::new(p)
    }
}

impl From<Prime> for u32 {
    fn from(p: Prime) -> u32 {
        p.0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn mod_pow(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin; the witness set {2, 3, 5, 7} is exact below 3.2e9.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 4] = [2, 3, 5, 7];
    if n < 2 {
        return false;
    }
    for w in WITNESSES {
        if n.is_multiple_of(w) {
            return n == w;
        }
    }
    assert!(n < 3_215_031_751, "primality test only certified below 3.2e9");
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in WITNESSES {
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = x * x % n;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn inverse(a: Residue, p: Prime) -> Result<Residue> {
    if a.is_zero() {
        return Err(Error::domain("0 has no multiplicative inverse"));
    }
    Ok(p.pow(a, p.get() as u64 - 2))
}

/// Legendre symbol `(a/p)` via Euler's criterion.
pub fn legendre(a: Residue, p: Prime) -> i8 {
    if a.is_zero() {
        return 0;
    }
    match p.pow(a, (p.get() as u64 - 1) / 2).value() {
        1 => 1,
        v => {
            debug_assert_eq!(v, p.get() - 1);
            -1
        }
    }
}

/// Largest `s` with `1, 2, …, s` all quadratic residues mod `p`.
pub fn consecutive_qr_run(p: Prime) -> u32 {
    (1..p.get())
        .take_while(|&i| legendre(Residue(i), p) == 1)
        .count() as u32
}

/// Least `k > 2` dividing `p − 1`.
pub fn smallest_divisor_above_two(p: Prime) -> Result<u32> {
    if p.get() < 5 {
        return Err(Error::domain("smallest divisor above two needs p >= 5"));
    }
    let n = p.get() - 1;
    Ok((3..=n).find(|k| n.is_multiple_of(*k)).expect("p - 1 divides itself"))
}

/// Distinct prime factors of `n`, ascending.
fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Multiplicative order of a unit.
pub fn order(a: Residue, p: Prime) -> u32 {
    assert!(!a.is_zero());
    let mut ord = p.get() - 1;
    for q in prime_factors(p.get() - 1) {
        while ord.is_multiple_of(q) && p.pow(a, (ord / q) as u64) == Residue::ONE {
            ord /= q;
        }
    }
    ord
}

/// Least primitive root mod `p`.
pub fn primitive_root(p: Prime) -> Residue {
    let n = p.get() - 1;
    let factors = prime_factors(n);
    p.units()
        .find(|&g| factors.iter().all(|&q| p.pow(g, (n / q) as u64) != Residue::ONE))
        .expect("F_p* is cyclic")
}

/// An element of multiplicative order exactly `k`, as a power of the least primitive root.
pub fn element_of_order(p: Prime, k: u32) -> Result<Residue> {
    if k == 0 || !(p.get() - 1).is_multiple_of(k) {
        return Err(Error::domain(format!("{k} does not divide p - 1 = {}", p.get() - 1)));
    }
    let g = primitive_root(p);
    Ok(p.pow(g, ((p.get() - 1) / k) as u64))
}
