//! Symmetry sets `Sym_η(A) = {x : |A ∩ xA| ≥ η|A|}`.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::set::{conv_table, inverse_set, power, product, ConvTable, GSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetrySet {
    base: GSet,
    eta: Rational,
    members: GSet,
}

impl SymmetrySet {
    pub fn base(&self) -> &GSet {
        &self.base
    }

    pub fn eta(&self) -> &Rational {
        &self.eta
    }

    pub fn members(&self) -> &GSet {
        &self.members
    }

    pub fn into_members(self) -> GSet {
        self.members
    }

    /// Contains the identity and is closed under inversion.
    pub fn is_symmetric_neighbourhood(&self) -> bool {
        self.members.contains(self.members.ctx().identity()) && self.members.is_symmetric()
    }
}

fn check_eta(eta: &Rational) -> Result<()> {
    if !eta.is_positive() || *eta > Rational::one() {
        return Err(Error::ParameterRange(format!("threshold {eta} outside (0, 1]")));
    }
    Ok(())
}

fn check_eps(eps: &Rational) -> Result<()> {
    if eps.is_negative() || *eps >= Rational::one() {
        return Err(Error::ParameterRange(format!("epsilon {eps} outside [0, 1)")));
    }
    Ok(())
}

/// Smallest integer count `m` with `m ≥ η·size`.
pub(crate) fn min_count(eta: &Rational, size: usize) -> u64 {
    let needed = (eta * &Rational::from(size)).ceil();
    needed.max(BigInt::from(0)).to_u64().unwrap_or(u64::MAX)
}

/// The table `x ↦ |A ∩ xA|` over its support `AA⁻¹`.
pub(crate) fn overlap_table(a: &GSet) -> Result<ConvTable> {
    conv_table(a, &inverse_set(a))
}

pub(crate) fn members_at(table: &ConvTable, min: u64) -> GSet {
    let ctx = table.domain().ctx();
    let elems = table.iter().filter(|&(_, c)| c >= min).map(|(x, _)| x).collect();
    GSet::from_sorted(ctx.clone(), elems)
}

/// `Sym_η(A)`, scanning only the support `AA⁻¹`. Membership is the exact,
/// non-strict comparison `|A ∩ xA| ≥ η|A|`.
pub fn sym_set(a: &GSet, eta: &Rational) -> Result<SymmetrySet> {
    check_eta(eta)?;
    if a.is_empty() {
        return Err(Error::EmptySet("symmetry set of an empty set"));
    }
    let table = overlap_table(a)?;
    Ok(SymmetrySet {
        base: a.clone(),
        eta: eta.clone(),
        members: members_at(&table, min_count(eta, a.len())),
    })
}

/// `Sym_η(A) ⊆ Sym_η'(A)` for `η ≥ η'`.
pub fn check_nesting(a: &GSet, eta: &Rational, eta_lower: &Rational) -> Result<bool> {
    check_eta(eta)?;
    check_eta(eta_lower)?;
    if eta < eta_lower {
        return Err(Error::ParameterRange(format!(
            "nesting needs eta >= eta', got {eta} < {eta_lower}"
        )));
    }
    let high = sym_set(a, eta)?;
    let low = sym_set(a, eta_lower)?;
    Ok(high.members().is_subset(low.members()))
}

/// `Sym_{1-ε}(A) · Sym_{1-ε'}(A) ⊆ Sym_{1-(ε+ε')}(A)`.
pub fn check_submultiplicativity(a: &GSet, eps: &Rational, eps_other: &Rational) -> Result<bool> {
    check_eps(eps)?;
    check_eps(eps_other)?;
    let total = eps + eps_other;
    if total >= Rational::one() {
        return Err(Error::ParameterRange(format!(
            "epsilon sum {total} must be below 1"
        )));
    }
    let one = Rational::one();
    let left = sym_set(a, &(&one - eps))?;
    let right = sym_set(a, &(&one - eps_other))?;
    let target = sym_set(a, &(&one - &total))?;
    let prod = product(left.members(), right.members())?;
    Ok(prod.is_subset(target.members()))
}

/// `Sym_{1-ε}(A)^k ⊆ Sym_{1-kε}(A)` whenever `kε < 1`.
pub fn check_iterated(a: &GSet, eps: &Rational, k: u32) -> Result<bool> {
    check_eps(eps)?;
    if k == 0 {
        return Err(Error::ParameterRange("k must be at least 1".into()));
    }
    let one = Rational::one();
    let scaled = eps * &Rational::from(k as u64);
    if scaled >= one {
        return Err(Error::ParameterRange(format!(
            "k*epsilon = {scaled} must be below 1"
        )));
    }
    let base = sym_set(a, &(&one - eps))?;
    let target = sym_set(a, &(&one - &scaled))?;
    Ok(power(base.members(), k)?.is_subset(target.members()))
}
