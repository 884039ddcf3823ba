//! Closed forms, proved bounds and witness constructions for `D(φ, p)`.
//!
//! Coefficient classes:
//!
//! | class                 | condition              | result                                  |
//! |-----------------------|------------------------|-----------------------------------------|
//! | `thm2.1(i)`           | `a = 0, b ≠ 0`         | `D = p`                                 |
//! | `thm2.1(ii)`          | `a ≠ 0, b = c = 0`     | `D = p`                                 |
//! | `thm2.1(iii)`         | `a ≠ 0, b = 0, c ≠ 0`  | `D = p − 1`                             |
//! | `thm2.1(iv)`          | `ab ≠ 0`               | `D ≤ 2p − 1`                            |
//! | `lem3.3`              | `ab ≠ 0, c = 0`        | `D = 1` if `λ = p − 1`, else `D ≥ p − λ + 1` |
//! | `lem3.4`              | `c = 0, λ ∈ {p−2, p−3}`| divisor bounds                          |
//! | `lem4.3`              | `p = 3, abc ≠ 0`       | `D = 3` or `4`                          |
//! | `thm4.6`              | `abc ≠ 0, p ≥ 5`       | `D ≥ p + s`                             |
//! | `thm4.8-conditional`  | `abc ≠ 0`              | `D ≤ (p−1) + (p−1)/2` if `[ω₀]^{p−1}` extends to an extremal sequence |
//! | `cor5.1`              | `λ = μ = 1`            | congruence lower bounds                 |
//!
//! Here `(λ, μ) = (b·a⁻¹, c·a⁻¹)` is the normalized form and `s` the run of quadratic
//! residues `1, 2, …, s` mod `p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modp::{consecutive_qr_run, inverse, legendre, smallest_divisor_above_two, Prime, Residue};
use crate::phi::{is_zero_free, MultisetSeq, QuadPhi};

pub const THM_2_1_I: &str = "thm2.1(i)";
pub const THM_2_1_II: &str = "thm2.1(ii)";
pub const THM_2_1_III: &str = "thm2.1(iii)";
pub const THM_2_1_IV: &str = "thm2.1(iv)";
pub const LEM_3_3: &str = "lem3.3";
pub const LEM_3_4: &str = "lem3.4";
pub const LEM_4_3: &str = "lem4.3";
pub const THM_4_6: &str = "thm4.6";
pub const THM_4_8: &str = "thm4.8-conditional";
pub const COR_5_1: &str = "cor5.1";

/// Which coefficient class `φ` falls into.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// `a = 0, b ≠ 0`
    Linear,
    /// `a ≠ 0, b = c = 0`
    PureSquare,
    /// `a ≠ 0, b = 0, c ≠ 0`
    SquarePlusLinear,
    /// `ab ≠ 0, c = 0`, normalized to `s₁² + λ s₂`
    Lambda { lambda: Residue },
    /// `abc ≠ 0`, normalized to `s₁² + λ s₂ + μ s₁`
    LambdaMu { lambda: Residue, mu: Residue },
}

pub fn family(phi: &QuadPhi) -> Family {
    match phi.lambda_mu() {
        None => Family::Linear,
        Some((l, m)) if l.is_zero() && m.is_zero() => Family::PureSquare,
        Some((l, _)) if l.is_zero() => Family::SquarePlusLinear,
        Some((lambda, m)) if m.is_zero() => Family::Lambda { lambda },
        Some((lambda, mu)) => Family::LambdaMu { lambda, mu },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ClosedKind {
    /// `[u]^α [−u − c·b⁻¹]^{p−1−α}`
    Linear { shift: Residue },
    PureSquare,
    /// `[c·a⁻¹]^{p−2}`
    SquarePlusLinear { base: Residue },
    Degenerate,
    /// `p = 3` with `abc ≠ 0`; the single extremal sequence.
    SmallPrime { lambda: Residue, mu: Residue },
}

/// An exact value of `D(φ, p)` together with a description of `M(φ, p)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedForm {
    pub d_value: u32,
    pub label: &'static str,
    p: Prime,
    kind: ClosedKind,
}

impl ClosedForm {
    /// Every member of `M(φ, p)`, canonically sorted and without repeats.
    pub fn members(&self) -> Vec<MultisetSeq> {
        let p = self.p;
        let n = p.get();
        let mut out = Vec::new();
        match self.kind {
            ClosedKind::Linear { shift } => {
                for u in p.units().filter(|&u| u != p.neg(shift)) {
                    let w = p.neg(p.add(u, shift));
                    for alpha in 0..n {
                        let mut s = MultisetSeq::empty(p);
                        s.push(u, alpha).expect("alpha < p");
                        s.push(w, n - 1 - alpha).expect("u = w only when both exponents add up to p - 1");
                        out.push(s);
                    }
                }
            }
            ClosedKind::PureSquare => {
                for u in p.units() {
                    let mut s = MultisetSeq::empty(p);
                    s.push(u, n - 1).unwrap();
                    out.push(s);
                }
            }
            ClosedKind::SquarePlusLinear { base } => {
                let mut s = MultisetSeq::empty(p);
                s.push(base, n - 2).unwrap();
                out.push(s);
            }
            ClosedKind::Degenerate => out.push(MultisetSeq::empty(p)),
            ClosedKind::SmallPrime { lambda, mu } => {
                let two_mu = p.add(mu, mu);
                let mut s = MultisetSeq::empty(p);
                if lambda == Residue::ONE {
                    s.push(two_mu, 2).unwrap();
                } else {
                    s.push(mu, 2).unwrap();
                    s.push(two_mu, 1).unwrap();
                }
                out.push(s);
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Membership test for `M(φ, p)`, written independently of [`ClosedForm::members`].
    pub fn contains(&self, seq: &MultisetSeq) -> bool {
        let p = self.p;
        if seq.p() != p || seq.len() != self.d_value - 1 {
            return false;
        }
        match self.kind {
            ClosedKind::Linear { shift } => {
                // All elements share one nonzero value of f(u) = u(u + c·b⁻¹).
                let f = |u: Residue| p.mul(u, p.add(u, shift));
                let mut values = seq.support().map(|(u, _)| f(u));
                match values.next() {
                    Some(v0) => !v0.is_zero() && values.all(|v| v == v0),
                    None => false,
                }
            }
            ClosedKind::PureSquare => seq.support().count() == 1 && seq.mult(Residue::ZERO) == 0,
            ClosedKind::SquarePlusLinear { base } => seq.mult(base) == seq.len(),
            ClosedKind::Degenerate => seq.is_empty(),
            ClosedKind::SmallPrime { .. } => self.members().contains(seq),
        }
    }
}

pub fn closed_form(phi: &QuadPhi) -> Option<ClosedForm> {
    let p = phi.p();
    let n = p.get();
    let (d_value, label, kind) = match family(phi) {
        Family::Linear => {
            let shift = p.mul(phi.c(), inverse(phi.b(), p).ok()?);
            (n, THM_2_1_I, ClosedKind::Linear { shift })
        }
        Family::PureSquare => (n, THM_2_1_II, ClosedKind::PureSquare),
        Family::SquarePlusLinear => {
            let base = p.mul(phi.c(), inverse(phi.a(), p).ok()?);
            (n - 1, THM_2_1_III, ClosedKind::SquarePlusLinear { base })
        }
        Family::Lambda { lambda } if lambda.value() == n - 1 => (1, LEM_3_3, ClosedKind::Degenerate),
        Family::LambdaMu { lambda, mu } if n == 3 => {
            let d = if lambda == Residue::ONE { 3 } else { 4 };
            (d, LEM_4_3, ClosedKind::SmallPrime { lambda, mu })
        }
        _ => return None,
    };
    Some(ClosedForm {
        d_value,
        label,
        p,
        kind,
    })
}

/// Status of the hypothesis behind the `thm4.8-conditional` bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hypothesis {
    Unchecked,
    Holds,
    Fails,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LowerBound {
    pub value: u32,
    pub label: &'static str,
    /// A zero-free sequence of length `value − 1`.
    pub witness: Option<MultisetSeq>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpperBound {
    pub value: u32,
    pub label: &'static str,
    /// `None` for proved bounds.
    pub conditional: Option<Hypothesis>,
}

impl UpperBound {
    /// Whether the bound may be used to cap `D`.
    pub fn usable(&self) -> bool {
        matches!(self.conditional, None | Some(Hypothesis::Holds))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundsReport {
    pub lower: Vec<LowerBound>,
    pub upper: Vec<UpperBound>,
    pub best_lower: u32,
    pub best_upper: u32,
}

impl BoundsReport {
    fn new(lower: Vec<LowerBound>, upper: Vec<UpperBound>) -> Self {
        let mut report = BoundsReport {
            lower,
            upper,
            best_lower: 1,
            best_upper: u32::MAX,
        };
        report.recompute();
        report
    }

    fn recompute(&mut self) {
        self.best_lower = self.lower.iter().map(|b| b.value).max().unwrap_or(1).max(1);
        self.best_upper = self
            .upper
            .iter()
            .filter(|b| b.usable())
            .map(|b| b.value)
            .min()
            .unwrap_or(u32::MAX);
    }

    /// Sets the status of every conditional bound and recomputes the best values.
    pub fn set_hypothesis(&mut self, status: Hypothesis) {
        for b in &mut self.upper {
            if b.conditional.is_some() {
                b.conditional = Some(status);
            }
        }
        self.recompute();
    }

    /// Smallest proved upper bound, ignoring conditional ones whatever their status.
    pub fn best_unconditional_upper(&self) -> u32 {
        self.upper
            .iter()
            .filter(|b| b.conditional.is_none())
            .map(|b| b.value)
            .min()
            .unwrap_or(u32::MAX)
    }

    /// The longest witness sequence among the lower bounds.
    pub fn best_lower_witness(&self) -> Option<&MultisetSeq> {
        self.lower
            .iter()
            .filter_map(|b| b.witness.as_ref())
            .max_by_key(|w| w.len())
    }
}

pub fn bounds(phi: &QuadPhi) -> Result<BoundsReport> {
    Ok(BoundsReport::new(lower_bounds(phi)?, upper_bounds(phi)))
}

pub fn upper_bounds(phi: &QuadPhi) -> Vec<UpperBound> {
    let p = phi.p();
    let n = p.get();
    let mut out = Vec::new();
    if let Some(cf) = closed_form(phi) {
        out.push(UpperBound {
            value: cf.d_value,
            label: cf.label,
            conditional: None,
        });
    }
    let fam = family(phi);
    if matches!(fam, Family::Lambda { .. } | Family::LambdaMu { .. }) {
        out.push(UpperBound {
            value: 2 * n - 1,
            label: THM_2_1_IV,
            conditional: None,
        });
    }
    match fam {
        Family::Lambda { lambda } if n >= 5 => {
            let k = smallest_divisor_above_two(p).expect("p >= 5");
            let per_coset = if lambda.value() == n - 2 {
                Some(k - 1)
            } else if lambda.value() == n - 3 {
                Some(2 * (k - 1))
            } else {
                None
            };
            if let Some(c) = per_coset {
                out.push(UpperBound {
                    value: c * (n - 1) / k + 1,
                    label: LEM_3_4,
                    conditional: None,
                });
            }
        }
        Family::LambdaMu { .. } => out.push(UpperBound {
            value: (n - 1) + (n - 1) / 2,
            label: THM_4_8,
            conditional: Some(Hypothesis::Unchecked),
        }),
        _ => {}
    }
    out
}

pub fn lower_bounds(phi: &QuadPhi) -> Result<Vec<LowerBound>> {
    let p = phi.p();
    let n = p.get();
    let mut out = Vec::new();
    if let Some(cf) = closed_form(phi) {
        out.push(LowerBound {
            value: cf.d_value,
            label: cf.label,
            witness: cf.members().into_iter().next(),
        });
    }
    match family(phi) {
        Family::Lambda { lambda } if lambda.value() <= n - 2 => {
            let (_, witness) = construct_lambda_witness(p, lambda)?;
            out.push(LowerBound {
                value: n - lambda.value() + 1,
                label: LEM_3_3,
                witness: Some(witness),
            });
        }
        Family::LambdaMu { lambda, mu } if n >= 5 => {
            let s = consecutive_qr_run(p);
            let omega = omega0(phi)?;
            let u_star = find_u_star(phi)?;
            let mut witness = MultisetSeq::empty(p);
            witness.push(omega, n - 1)?;
            witness.push(u_star, s)?;
            out.push(LowerBound {
                value: n + s,
                label: THM_4_6,
                witness: Some(witness),
            });
            if lambda == Residue::ONE && mu == Residue::ONE {
                if let Some(value) = congruence_lower_bound(p) {
                    out.push(LowerBound {
                        value,
                        label: COR_5_1,
                        witness: None,
                    });
                }
            }
        }
        _ => {}
    }
    for b in &out {
        if let Some(w) = &b.witness {
            if w.len() + 1 != b.value || !is_zero_free(phi, w) {
                return Err(Error::internal(format!(
                    "{} witness {w} does not certify D >= {} for {phi}",
                    b.label, b.value
                )));
            }
        }
    }
    Ok(out)
}

/// `Δ(t) = (2t + λ)² − 4(λ + 1)t²`.
pub fn lambda_discriminant(p: Prime, lambda: Residue, t: Residue) -> Residue {
    let two_t = p.add(t, t);
    let lin = p.add(two_t, lambda);
    let four = p.residue(4);
    p.sub(p.mul(lin, lin), p.mul(p.mul(four, p.add(lambda, Residue::ONE)), p.mul(t, t)))
}

/// Finds `t ∉ {0, 1}` with `Δ(t)` a non-residue and returns it with `[1]^{p−λ−1}[t]`.
///
/// Non-residue `Δ(t)` means `k² + (2t+λ)k + (λ+1)t²` has no root, so no `[1]^k[t]` is a zero.
pub fn construct_lambda_witness(p: Prime, lambda: Residue) -> Result<(Residue, MultisetSeq)> {
    let n = p.get();
    if lambda.is_zero() || lambda.value() > n - 2 {
        return Err(Error::domain(format!("λ = {lambda} outside 1..=p-2")));
    }
    let t = p
        .units()
        .filter(|&t| t != Residue::ONE)
        .find(|&t| legendre(lambda_discriminant(p, lambda, t), p) == -1)
        .ok_or_else(|| Error::internal(format!("no t with non-residue discriminant for p={p}, λ={lambda}")))?;
    let mut seq = MultisetSeq::empty(p);
    seq.push(Residue::ONE, n - lambda.value() - 1)?;
    seq.push(t, 1)?;
    Ok((t, seq))
}

/// `ω₀ = −μ·λ⁻¹`.
pub fn omega0(phi: &QuadPhi) -> Result<Residue> {
    let p = phi.p();
    match family(phi) {
        Family::LambdaMu { lambda, mu } => Ok(p.neg(p.mul(mu, inverse(lambda, p)?))),
        _ => Err(Error::domain("ω₀ needs a ≠ 0 and λμ ≠ 0")),
    }
}

/// Least `u ∈ F_p*` with `−u(λu + μ)` a quadratic non-residue.
pub fn find_u_star(phi: &QuadPhi) -> Result<Residue> {
    let p = phi.p();
    let Family::LambdaMu { lambda, mu } = family(phi) else {
        return Err(Error::domain("u* needs a ≠ 0 and λμ ≠ 0"));
    };
    if p.get() < 5 {
        return Err(Error::domain("u* needs p >= 5"));
    }
    p.units()
        .find(|&u| legendre(p.neg(p.mul(u, p.add(p.mul(lambda, u), mu))), p) == -1)
        .ok_or_else(|| Error::internal(format!("no u* for {phi}")))
}

/// Congruence-class lower bounds for `s₁² + s₂ + s₁`.
///
/// The `p + 4` class is only applied when `p ≡ ±1 (mod 8)` as well: for `p ≡ ±1 (mod 60)`
/// alone, 2 may be a non-residue, and then the residue run gives only `p + 1`.
pub fn congruence_lower_bound(p: Prime) -> Option<u32> {
    let n = p.get();
    let m120 = n % 120;
    let m60 = n % 60;
    let m24 = n % 24;
    let m8 = n % 8;
    if [1, 119, 49, 71].contains(&m120) {
        Some(n + 6)
    } else if [1, 59].contains(&m60) && [1, 7].contains(&m8) {
        Some(n + 4)
    } else if [1, 23].contains(&m24) {
        Some(n + 2)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modp::element_of_order;
    use crate::phi::{naive_is_zero_free, phi_eval, singleton_cap};

    fn pr(p: u32) -> Prime {
        Prime::new(p).unwrap()
    }

    fn phi(p: u32, a: i64, b: i64, c: i64) -> QuadPhi {
        QuadPhi::new(pr(p), a, b, c).unwrap()
    }

    fn primes_up_to(n: u32) -> Vec<Prime> {
        (3..=n).filter_map(|p| Prime::new(p).ok()).collect()
    }

    #[test]
    fn families() {
        assert_eq!(family(&phi(7, 0, 2, 4)), Family::Linear);
        assert_eq!(family(&phi(7, 3, 0, 0)), Family::PureSquare);
        assert_eq!(family(&phi(7, 2, 0, 3)), Family::SquarePlusLinear);
        assert_eq!(family(&phi(7, 2, 4, 0)), Family::Lambda { lambda: pr(7).residue(2) });
        assert_eq!(
            family(&phi(7, 1, 2, 3)),
            Family::LambdaMu {
                lambda: pr(7).residue(2),
                mu: pr(7).residue(3)
            }
        );
    }

    #[test]
    fn closed_form_examples() {
        let p = pr(7);
        let cf = closed_form(&phi(7, 0, 2, 4)).unwrap();
        assert_eq!((cf.d_value, cf.label), (7, THM_2_1_I));
        let m = cf.members();
        // -c b^-1 = -2 = 5 is excluded along with 0
        for s in &m {
            assert_eq!(s.len(), 6);
            assert_eq!(s.mult(Residue::ZERO), 0);
            assert_eq!(s.mult(p.residue(5)), 0);
        }
        assert!(m.contains(&MultisetSeq::from_counts(p, &[(1, 2), (-1 - 2, 4)]).unwrap()));

        let cf = closed_form(&phi(11, 3, 0, 0)).unwrap();
        assert_eq!((cf.d_value, cf.label), (11, THM_2_1_II));
        assert_eq!(cf.members().len(), 10);

        let cf = closed_form(&phi(7, 2, 0, 3)).unwrap();
        assert_eq!((cf.d_value, cf.label), (6, THM_2_1_III));
        assert_eq!(cf.members(), vec![MultisetSeq::from_counts(p, &[(5, 5)]).unwrap()]);

        let cf = closed_form(&phi(3, 1, 2, 0)).unwrap();
        assert_eq!((cf.d_value, cf.label), (1, LEM_3_3));
        assert_eq!(cf.members(), vec![MultisetSeq::empty(pr(3))]);

        let cf = closed_form(&phi(3, 1, 1, 1)).unwrap();
        assert_eq!((cf.d_value, cf.label), (3, LEM_4_3));
        assert_eq!(cf.members()[0].to_text(), "[2]^2");
        let cf = closed_form(&phi(3, 1, 2, 1)).unwrap();
        assert_eq!(cf.d_value, 4);
        assert_eq!(cf.members()[0].to_text(), "[1]^2 [2]^1");

        assert!(closed_form(&phi(7, 1, 1, 1)).is_none());
        assert!(closed_form(&phi(7, 1, 2, 0)).is_none());
        // λ = p - 1 with μ ≠ 0 has no closed form here
        assert!(closed_form(&phi(7, 1, 6, 1)).is_none());
    }

    #[test]
    fn closed_form_members_are_extremal_zero_free() {
        for p in primes_up_to(13) {
            let n = p.get() as i64;
            for (a, b, c) in [(0, 1, 0), (0, 2, 1), (0, n - 1, 3), (1, 0, 0), (3, 0, 0), (1, 0, 1), (2, 0, n - 1), (1, n - 1, 0), (2, n - 2, 0)] {
                // (3, 0, 0) vanishes identically at p = 3
                let Ok(f) = QuadPhi::new(p, a, b, c) else { continue };
                let cf = closed_form(&f).unwrap();
                for s in cf.members() {
                    assert!(is_zero_free(&f, &s), "{f}: {s}");
                    assert_eq!(s.len() + 1, cf.d_value);
                    assert!(cf.contains(&s));
                }
            }
        }
    }

    #[test]
    fn closed_form_predicate_matches_generator() {
        for p in [3u32, 5, 7] {
            let pp = pr(p);
            let all = crate::phi::tests::all_multisets(pp, p);
            for (a, b, c) in [(0, 1, 0), (0, 2, 1), (1, 0, 0), (2, 0, 0), (1, 0, 1), (1, p as i64 - 1, 0)] {
                let cf = closed_form(&phi(p, a, b, c)).unwrap();
                let by_predicate: Vec<_> = all.iter().filter(|s| cf.contains(s)).cloned().collect();
                let mut sorted = by_predicate.clone();
                sorted.sort();
                assert_eq!(sorted, cf.members(), "p={p} ({a},{b},{c})");
            }
        }
    }

    #[test]
    fn upper_bound_examples() {
        let value = |f: &QuadPhi, label| upper_bounds(f).iter().find(|b| b.label == label).map(|b| b.value);
        assert_eq!(value(&phi(5, 1, 3, 0), LEM_3_4), Some(4));
        assert_eq!(value(&phi(7, 1, 5, 0), LEM_3_4), Some(5));
        assert_eq!(value(&phi(7, 1, 4, 0), LEM_3_4), Some(9));
        assert_eq!(value(&phi(7, 1, 2, 0), LEM_3_4), None);
        assert_eq!(value(&phi(7, 1, 2, 0), THM_2_1_IV), Some(13));
        assert_eq!(value(&phi(7, 0, 1, 0), THM_2_1_IV), None);
        let f = phi(31, 1, 1, 1);
        let cond = upper_bounds(&f).into_iter().find(|b| b.label == THM_4_8).unwrap();
        assert_eq!(cond.value, 45);
        assert_eq!(cond.conditional, Some(Hypothesis::Unchecked));
    }

    #[test]
    fn conditional_bound_only_counts_when_it_holds() {
        let f = phi(11, 1, 1, 1);
        let mut report = bounds(&f).unwrap();
        assert_eq!(report.best_upper, 21);
        report.set_hypothesis(Hypothesis::Fails);
        assert_eq!(report.best_upper, 21);
        report.set_hypothesis(Hypothesis::Holds);
        assert_eq!(report.best_upper, 15);
        assert_eq!(report.best_unconditional_upper(), 21);
    }

    #[test]
    fn lower_bound_examples() {
        let lb = lower_bounds(&phi(5, 1, 2, 0)).unwrap();
        assert_eq!(lb[0].value, 4);
        assert_eq!(lb[0].label, LEM_3_3);

        let f = phi(23, 1, 1, 1);
        let lb = lower_bounds(&f).unwrap();
        let thm = lb.iter().find(|b| b.label == THM_4_6).unwrap();
        assert_eq!(thm.value, 27);
        let w = thm.witness.as_ref().unwrap();
        assert_eq!(w.mult(pr(23).residue(22)), 22);
        assert_eq!(w.len(), 26);
        assert_eq!(lb.iter().find(|b| b.label == COR_5_1).unwrap().value, 25);

        let r = bounds(&phi(3, 1, 1, 1)).unwrap();
        assert_eq!((r.best_lower, r.best_upper), (3, 3));
        let r = bounds(&phi(3, 1, 2, 1)).unwrap();
        assert_eq!((r.best_lower, r.best_upper), (4, 4));
    }

    #[test]
    fn lambda_witness_examples() {
        let (t, s) = construct_lambda_witness(pr(5), Residue::ONE).unwrap();
        assert!(t != Residue::ZERO && t != Residue::ONE);
        assert_eq!(s.len(), 4);
        assert!(is_zero_free(&phi(5, 1, 1, 0), &s));

        let p = pr(7);
        let lambda = p.residue(5);
        let (t, s) = construct_lambda_witness(p, lambda).unwrap();
        let tv = t.value() as i64;
        assert_eq!(legendre(p.residue((2 * tv + 5).pow(2) - 24 * tv * tv), p), -1);
        assert_eq!(s.len(), 2);

        assert!(construct_lambda_witness(p, p.residue(6)).is_err());
        assert!(construct_lambda_witness(p, Residue::ZERO).is_err());
    }

    #[test]
    fn lambda_witnesses_for_all_small_primes() {
        for p in primes_up_to(31) {
            for lambda in 1..p.get() - 1 {
                let (_, s) = construct_lambda_witness(p, p.residue(lambda as i64)).unwrap();
                assert_eq!(s.len(), p.get() - lambda);
                let f = QuadPhi::normalized(p, lambda as i64, 0).unwrap();
                assert!(is_zero_free(&f, &s));
                if p.get() <= 7 {
                    assert!(naive_is_zero_free(&f, &s).unwrap());
                }
            }
        }
    }

    #[test]
    fn omega0_examples() {
        assert_eq!(omega0(&phi(5, 1, 1, 1)).unwrap().value(), 4);
        assert_eq!(omega0(&phi(31, 1, 1, 1)).unwrap().value(), 30);
        let f = phi(7, 1, 2, 3);
        let w = omega0(&f).unwrap();
        assert_eq!(w.value(), 2);
        for t in 1..7 {
            assert!(!f.eval_power(w, t).is_zero());
        }
        assert!(omega0(&phi(7, 1, 2, 0)).is_err());
        assert!(omega0(&phi(7, 0, 2, 1)).is_err());
    }

    #[test]
    fn u_star_examples() {
        assert_eq!(find_u_star(&phi(5, 1, 1, 1)).unwrap(), Residue::ONE);
        for p in primes_up_to(61).into_iter().filter(|p| p.get() >= 5) {
            for lambda in 1..p.get() as i64 {
                for mu in 1..p.get() as i64 {
                    let f = QuadPhi::normalized(p, lambda, mu).unwrap();
                    let u = find_u_star(&f).unwrap();
                    assert_ne!(u, omega0(&f).unwrap());
                }
            }
        }
        assert!(find_u_star(&phi(3, 1, 1, 1)).is_err());
    }

    #[test]
    fn congruence_examples() {
        assert_eq!(congruence_lower_bound(pr(23)), Some(25));
        assert_eq!(congruence_lower_bound(pr(71)), Some(77));
        assert_eq!(congruence_lower_bound(pr(13)), None);
        assert_eq!(congruence_lower_bound(pr(239)), Some(245));
        // ±1 mod 60 but 2 is a non-residue: the run of residues is only 1
        assert_eq!(consecutive_qr_run(pr(59)), 1);
        assert_eq!(congruence_lower_bound(pr(59)), None);
        assert_eq!(congruence_lower_bound(pr(61)), None);
    }

    #[test]
    fn congruence_never_beats_residue_run() {
        for n in (5..10_000u32).filter(|&n| crate::modp::is_prime(n as u64)) {
            let p = Prime::with_cap(n, 10_000).unwrap();
            if let Some(b) = congruence_lower_bound(p) {
                assert!(b <= n + consecutive_qr_run(p), "p = {n}");
            }
        }
    }

    #[test]
    fn omega_power_identity() {
        for p in primes_up_to(31) {
            for (lambda, mu) in [(1i64, 1i64), (2, 3), (p.get() as i64 - 1, 1), (5, 7)] {
                let Ok(f) = QuadPhi::normalized(p, lambda, mu) else { continue };
                let Ok(w) = omega0(&f) else { continue };
                let ratio = p.mul(f.mu().unwrap(), inverse(f.lambda().unwrap(), p).unwrap());
                for t in 1..p.get() {
                    let s = MultisetSeq::from_counts(p, &[(w.value() as i64, t)]).unwrap();
                    let tr = p.mul(p.residue(t as i64), ratio);
                    assert_eq!(phi_eval(&f, &s).unwrap(), p.mul(tr, tr));
                }
            }
        }
    }

    #[test]
    fn omega_is_the_only_full_power() {
        for p in primes_up_to(31) {
            for (lambda, mu) in [(1i64, 1i64), (2, 3), (3, 1), (p.get() as i64 - 2, 2)] {
                let f = QuadPhi::normalized(p, lambda, mu).unwrap();
                if !matches!(family(&f), Family::LambdaMu { .. }) {
                    continue;
                }
                let w = omega0(&f).unwrap();
                assert_eq!(singleton_cap(&f, w), p.get() - 1);
                for u in p.units().filter(|&u| u != w) {
                    assert!(singleton_cap(&f, u) < p.get() - 1, "p={p} u={u}");
                }
            }
        }
    }

    #[test]
    fn divisor_cycle_is_a_zero() {
        for p in primes_up_to(31).into_iter().filter(|p| p.get() >= 5) {
            let k = smallest_divisor_above_two(p).unwrap();
            let beta = element_of_order(p, k).unwrap();
            for lambda in 1..p.get() as i64 {
                let f = QuadPhi::normalized(p, lambda, 0).unwrap();
                for a in p.units() {
                    let mut s = MultisetSeq::empty(p);
                    let mut x = a;
                    for _ in 0..k {
                        s.push(x, 1).unwrap();
                        x = p.mul(x, beta);
                    }
                    assert_eq!(s.len(), k);
                    let sums = s.power_sums();
                    assert!(sums.s1.is_zero() && sums.s2.is_zero());
                    assert!(phi_eval(&f, &s).unwrap().is_zero());
                }
            }
        }
    }
}
