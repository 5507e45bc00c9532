//! Large symmetric neighbourhoods inside `A²A⁻²` for sets of small doubling.
//!
//! [`lemma_step`] is the dichotomy: given `A' ⊆ A`, either some `A' ∩ tA'`
//! with large overlap has a product set with `A` at most `(1-ε)|A'A|`
//! (shrink), or every such `t` lies in `Sym_{1-ε}(A'A)`, which is then large
//! (terminate). [`proposition_run`] iterates it from `A' = A`. Since `|A'A|`
//! falls by a factor `(1-ε)` per shrink and never drops below `|A|`, the loop
//! stops after at most `⌈log K / -log(1-ε)⌉` shrinks. [`theorem_main`] runs it
//! at `ε = 1/(k+1)`; sub-multiplicativity then gives `S^k ⊆ A²A⁻²` for
//! `S = Sym_{1-ε}(A'A)`.
//!
//! Every inequality the argument relies on is recomputed exactly and
//! recorded in a ledger; a failing entry in the dichotomy is reported as
//! [`Error::InvariantViolated`].

use num_bigint::BigInt;

use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::instances::InstanceSpec;
use crate::ledger::{first_failure, LedgerEntry, Relation};
use crate::oracle;
use crate::rational::Rational;
use crate::set::{conv_table, inverse_set, power, product, product_chain, GSet};
use crate::symmetry::{members_at, min_count, overlap_table, sym_set, SymmetrySet};

/// Exponents `(4^i - 1)/3` above this are not expanded; see [`size_bound`].
pub const MAX_EXPANDED_EXPONENT: u64 = 1024;

/// Inert record of the sharper bound known for the same statement.
pub const COMPARISON_BOUND: &str = "|S| >= exp(-O(k^2 K log K))|A|";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LemmaCase {
    Shrink { shrunk: GSet, witness: GroupElement },
    Terminate { level_set: GSet, sym: SymmetrySet },
}

#[derive(Clone, Debug)]
pub struct LemmaOutcome {
    pub case: LemmaCase,
    pub aprime_size: u64,
    pub a_size: u64,
    /// `|A'A|`
    pub aprime_a_size: u64,
    pub level_set_size: u64,
    /// `|A'|⁴ / (2|A'A||A|²)`
    pub overlap_threshold: Rational,
    pub ledger: Vec<LedgerEntry>,
}

impl LemmaOutcome {
    pub fn is_shrink(&self) -> bool {
        matches!(self.case, LemmaCase::Shrink { .. })
    }

    pub fn witness(&self) -> Option<GroupElement> {
        match &self.case {
            LemmaCase::Shrink { witness, .. } => Some(*witness),
            LemmaCase::Terminate { .. } => None,
        }
    }
}

fn check_epsilon(eps: &Rational) -> Result<()> {
    if !eps.is_positive() || *eps > Rational::one() {
        return Err(Error::ParameterRange(format!("epsilon {eps} outside (0, 1]")));
    }
    Ok(())
}

fn big(n: u64) -> BigInt {
    BigInt::from(n)
}

/// Threshold for the terminating symmetry set. At `ε = 1` the nominal
/// threshold `0` is outside `(0, 1]`; the smallest positive threshold with the
/// same integer cut-off, `1/|A'A|`, is used instead.
pub fn terminal_threshold(eps: &Rational, aprime_a_size: u64) -> Rational {
    let eta = &Rational::one() - eps;
    if eta.is_positive() {
        eta
    } else {
        Rational::new(1u64, aprime_a_size)
    }
}

/// One application of the dichotomy to `A' ⊆ A`.
///
/// `t` ranges over `A'A'⁻¹` in canonical order and the first `t` in the level
/// set `L` whose overlap `A' ∩ tA'` shrinks the product set is taken.
pub fn lemma_step(aprime: &GSet, a: &GSet, eps: &Rational) -> Result<LemmaOutcome> {
    check_epsilon(eps)?;
    if aprime.is_empty() || a.is_empty() {
        return Err(Error::EmptySet("the dichotomy needs non-empty A' and A"));
    }
    if aprime.ctx() != a.ctx() {
        return Err(Error::ContextMismatch);
    }
    if !aprime.is_subset(a) {
        return Err(Error::SubsetViolation("A' is not contained in A".into()));
    }

    let n1 = aprime.len() as u64;
    let n = a.len() as u64;
    let apa = product(aprime, a)?;
    let m = apa.len() as u64;

    let tau = Rational::new(big(n1).pow(4), big(2) * big(m) * big(n).pow(2));
    let overlaps = overlap_table(aprime)?;
    let level_set = members_at(&overlaps, min_count(&tau, 1));
    let l = level_set.len() as u64;

    let mut ledger = Vec::new();
    ledger.push(LedgerEntry::new(
        "level_set_lower_bound",
        l,
        Relation::Ge,
        Rational::new(big(n1).pow(3), big(2) * big(m) * big(n)),
    ));

    // Σ (1_A * 1_A')² ≥ Σ (1_A' * 1_A')² ≥ |A'|⁴/|A'A'| ≥ |A'|⁴/|A'A|
    let mixed = conv_table(a, aprime)?;
    let own = conv_table(aprime, aprime)?;
    let e_mixed = mixed.sum_of_squares();
    let e_own = own.sum_of_squares();
    let swapped = conv_table(&inverse_set(a), a)?.inner(&overlaps);
    let aprime_sq = own.domain().len() as u64;
    ledger.push(LedgerEntry::new(
        "energy_identity",
        e_mixed,
        Relation::Eq,
        swapped,
    ));
    ledger.push(LedgerEntry::new("energy_monotone", e_mixed, Relation::Ge, e_own));
    ledger.push(LedgerEntry::new(
        "energy_cauchy_schwarz",
        e_own,
        Relation::Ge,
        Rational::new(big(n1).pow(4), big(aprime_sq)),
    ));
    ledger.push(LedgerEntry::new(
        "energy_lower_bound",
        e_own,
        Relation::Ge,
        Rational::new(big(n1).pow(4), big(m)),
    ));
    ledger.push(LedgerEntry::new(
        "level_set_split",
        &Rational::from(l * n * n1) + &(&tau * &Rational::from(n * n)),
        Relation::Ge,
        e_mixed,
    ));

    let keep = &Rational::one() - eps;
    let shrink_cap = &keep * &Rational::from(m);
    let mut choice = None;
    for t in level_set.iter() {
        let shrunk = aprime.overlap_with_translate(t)?;
        let grown = product(&shrunk, a)?;
        if shrink_cap.cmp_int(grown.len() as u64).is_ge() {
            choice = Some((t, shrunk, grown.len() as u64));
            break;
        }
    }

    let case = match choice {
        Some((witness, shrunk, grown)) => {
            ledger.push(LedgerEntry::new(
                "shrink_subset",
                shrunk.difference(aprime)?.len() as u64,
                Relation::Eq,
                0u64,
            ));
            ledger.push(LedgerEntry::new(
                "shrink_size",
                shrunk.len() as u64,
                Relation::Ge,
                tau.clone(),
            ));
            ledger.push(LedgerEntry::new("shrink_growth", grown, Relation::Le, shrink_cap));
            LemmaCase::Shrink { shrunk, witness }
        }
        None => {
            let sym = sym_set(&apa, &terminal_threshold(eps, m))?;
            ledger.push(LedgerEntry::new(
                "terminate_sym_size",
                sym.members().len() as u64,
                Relation::Ge,
                Rational::new(big(n1).pow(3), big(2) * big(m) * big(n)),
            ));
            ledger.push(LedgerEntry::new(
                "level_set_in_sym",
                level_set.difference(sym.members())?.len() as u64,
                Relation::Eq,
                0u64,
            ));
            LemmaCase::Terminate { level_set, sym }
        }
    };

    if let Some(bad) = first_failure(&ledger) {
        return Err(Error::InvariantViolated(bad.to_string()));
    }

    Ok(LemmaOutcome {
        case,
        aprime_size: n1,
        a_size: n,
        aprime_a_size: m,
        level_set_size: l,
        overlap_threshold: tau,
        ledger,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepCase {
    Shrink,
    Terminate,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub index: u64,
    pub aprime_size: u64,
    pub aprime_a_size: u64,
    pub level_set_size: u64,
    pub case: StepCase,
    pub witness: Option<GroupElement>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IterationTrace {
    pub epsilon: Rational,
    /// `|A²|/|A|`
    pub k0: Rational,
    /// Index of the terminating step, i.e. the number of shrinks.
    pub i0: u64,
    pub steps: Vec<TraceStep>,
}

#[derive(Clone, Debug)]
pub struct PropositionRun {
    pub aprime: GSet,
    pub sym: SymmetrySet,
    pub trace: IterationTrace,
    /// Ledgers of every dichotomy step, prefixed `step[i]`, then the trace bounds.
    pub ledger: Vec<LedgerEntry>,
}

/// `⌈log K / -log(1-ε)⌉`, computed as the least `m ≥ 0` with `K(1-ε)^m ≤ 1`.
pub fn termination_bound(k0: &Rational, eps: &Rational) -> u64 {
    let keep = &Rational::one() - eps;
    if !keep.is_positive() {
        return 0;
    }
    let mut value = k0.clone();
    let mut m = 0;
    while value.cmp_int(1).is_gt() {
        value = &value * &keep;
        m += 1;
    }
    m
}

/// `(4^i - 1)/3`, saturating.
pub fn size_exponent(i: u64) -> u64 {
    if i >= 32 {
        return u64::MAX;
    }
    (4u64.pow(i as u32) - 1) / 3
}

/// Right-hand side of `|A'_i| ≥ |A|/(2K)^((4^i-1)/3)`.
///
/// When the exponent exceeds [`MAX_EXPANDED_EXPONENT`] and `(2K)^e ≥ |A|`,
/// the bound is below one and is replaced by the larger value `1`, which
/// every non-empty `A'_i` still meets. The second component reports whether
/// that replacement happened.
pub fn size_bound(a_size: u64, k0: &Rational, i: u64) -> (Rational, bool) {
    let e = size_exponent(i);
    let base = &Rational::from(2u64) * k0;
    if e <= MAX_EXPANDED_EXPONENT {
        return (&Rational::from(a_size) / &base.pow(e as u32), false);
    }
    // base ≥ 2, so this reaches |A| within log2|A| + 1 multiplications
    let mut acc = Rational::one();
    let mut used = 0u64;
    while acc.cmp_int(a_size).is_lt() && used < e {
        acc = &acc * &base;
        used += 1;
    }
    if acc.cmp_int(a_size).is_ge() {
        (Rational::one(), true)
    } else {
        (&Rational::from(a_size) / &acc, false)
    }
}

/// Bounds every trace must satisfy, recomputed from the recorded sizes.
pub fn trace_ledger(trace: &IterationTrace, a_size: u64) -> Vec<LedgerEntry> {
    let mut ledger = Vec::new();
    let keep = &Rational::one() - &trace.epsilon;
    for step in &trace.steps {
        let i = step.index;
        let growth = &(&keep.pow(i as u32) * &trace.k0) * &Rational::from(a_size);
        ledger.push(LedgerEntry::new(
            format!("trace[{i}].growth_bound"),
            step.aprime_a_size,
            Relation::Le,
            growth,
        ));
        let (rhs, capped) = size_bound(a_size, &trace.k0, i);
        let name = if capped {
            format!("trace[{i}].size_bound_capped")
        } else {
            format!("trace[{i}].size_bound")
        };
        ledger.push(LedgerEntry::new(name, step.aprime_size, Relation::Ge, rhs));
    }
    ledger.push(LedgerEntry::new(
        "trace.termination_bound",
        trace.i0,
        Relation::Le,
        termination_bound(&trace.k0, &trace.epsilon),
    ));
    if (&trace.k0 * &keep).cmp_int(1).is_lt() {
        ledger.push(LedgerEntry::new(
            "trace.no_shrink_small_doubling",
            trace.i0,
            Relation::Eq,
            0u64,
        ));
    }
    ledger
}

/// Iterates [`lemma_step`] from `A' = A` until it terminates.
///
/// `ε = 1` is rejected here; only [`lemma_step`] accepts it.
pub fn proposition_run(a: &GSet, eps: &Rational) -> Result<PropositionRun> {
    check_epsilon(eps)?;
    if *eps == Rational::one() {
        return Err(Error::ParameterRange("the iteration needs epsilon < 1".into()));
    }
    if a.is_empty() {
        return Err(Error::EmptySet("the iteration needs a non-empty set"));
    }
    let a_sq = product(a, a)?;
    let k0 = Rational::new(a_sq.len() as u64, a.len() as u64);
    let bound = termination_bound(&k0, eps);

    let mut aprime = a.clone();
    let mut steps = Vec::new();
    let mut ledger = Vec::new();
    for index in 0.. {
        let outcome = lemma_step(&aprime, a, eps)?;
        ledger.extend(
            outcome
                .ledger
                .iter()
                .cloned()
                .map(|e| e.prefixed(&format!("step[{index}]"))),
        );
        steps.push(TraceStep {
            index,
            aprime_size: outcome.aprime_size,
            aprime_a_size: outcome.aprime_a_size,
            level_set_size: outcome.level_set_size,
            case: if outcome.is_shrink() {
                StepCase::Shrink
            } else {
                StepCase::Terminate
            },
            witness: outcome.witness(),
        });
        match outcome.case {
            LemmaCase::Shrink { shrunk, .. } => {
                if index >= bound {
                    return Err(Error::InvariantViolated(format!(
                        "shrink step {index} exceeds the termination bound {bound}"
                    )));
                }
                aprime = shrunk;
            }
            LemmaCase::Terminate { sym, .. } => {
                let trace = IterationTrace {
                    epsilon: eps.clone(),
                    k0,
                    i0: index,
                    steps,
                };
                ledger.extend(trace_ledger(&trace, a.len() as u64));
                if let Some(bad) = first_failure(&ledger) {
                    return Err(Error::InvariantViolated(bad.to_string()));
                }
                return Ok(PropositionRun {
                    aprime,
                    sym,
                    trace,
                    ledger,
                });
            }
        }
    }
    unreachable!("the iteration either shrinks or terminates")
}

/// Entry counting the elements of `inner` missing from `outer`.
fn containment(name: &str, inner: &GSet, outer: &GSet) -> Result<LedgerEntry> {
    Ok(LedgerEntry::new(
        name,
        inner.difference(outer)?.len() as u64,
        Relation::Eq,
        0u64,
    ))
}

/// `A²A⁻²`.
pub fn square_difference(a: &GSet) -> Result<GSet> {
    let a_inv = inverse_set(a);
    product_chain(&[a, a, &a_inv, &a_inv])
}

fn check_k(k: u32) -> Result<()> {
    if k == 0 {
        return Err(Error::ParameterRange("k must be at least 1".into()));
    }
    Ok(())
}

/// Runs the iteration at `ε = 1/(k+1)` and certifies `S = Sym_{1-ε}(A'A)`.
///
/// The certificate names `a` explicitly; use [`theorem_for_instance`] to
/// record a generator spec instead. A failed check yields `verified = false`.
pub fn theorem_main(a: &GSet, k: u32) -> Result<Certificate> {
    theorem_with_spec(a, k, InstanceSpec::explicit(a))
}

/// As [`theorem_main`], for the set generated by `spec`.
pub fn theorem_for_instance(spec: &InstanceSpec, a: &GSet, k: u32) -> Result<Certificate> {
    let regenerated = crate::instances::generate_in(a.ctx(), &spec.set)?;
    if &regenerated != a || a.ctx().spec() != &spec.group {
        return Err(Error::InvalidInstance(
            "the set does not match its instance spec".into(),
        ));
    }
    theorem_with_spec(a, k, spec.clone())
}

fn theorem_with_spec(a: &GSet, k: u32, instance: InstanceSpec) -> Result<Certificate> {
    check_k(k)?;
    if a.is_empty() {
        return Err(Error::EmptySet(
            "the neighbourhood construction needs a non-empty set",
        ));
    }
    let eps = Rational::new(1u64, k as u64 + 1);
    let run = proposition_run(a, &eps)?;
    let s = run.sym.members().clone();
    let ctx = a.ctx();

    let mut ledger = run.ledger.clone();
    ledger.push(LedgerEntry::new(
        "theorem.identity_in_s",
        u64::from(s.contains(ctx.identity())),
        Relation::Eq,
        1u64,
    ));
    ledger.push(containment("theorem.s_symmetric", &inverse_set(&s), &s)?);

    let n1 = run.aprime.len() as u64;
    let apa = product(&run.aprime, a)?;
    let m = apa.len() as u64;
    let n = a.len() as u64;
    ledger.push(LedgerEntry::new(
        "theorem.s_size_lower_bound",
        s.len() as u64,
        Relation::Ge,
        Rational::new(big(n1).pow(3), big(2) * big(m) * big(n)),
    ));

    let s_k = power(&s, k)?;
    let low = sym_set(&apa, &Rational::new(1u64, k as u64 + 1))?;
    let apa_diff = product(&apa, &inverse_set(&apa))?;
    let target = square_difference(a)?;
    ledger.push(containment("theorem.power_in_low_sym", &s_k, low.members())?);
    ledger.push(containment(
        "theorem.low_sym_in_difference",
        low.members(),
        &apa_diff,
    )?);
    ledger.push(containment("theorem.difference_in_target", &apa_diff, &target)?);
    ledger.push(containment("theorem.power_in_target", &s_k, &target)?);

    let oracle_ok = oracle::oracle_power_within(&s, k, &oracle::oracle_square_difference(a)?)?.is_none();
    ledger.push(LedgerEntry::new(
        "oracle.power_in_target",
        u64::from(!oracle_ok),
        Relation::Eq,
        0u64,
    ));

    let verified = ledger.iter().all(|e| e.holds);
    Ok(Certificate {
        instance,
        k,
        epsilon: eps,
        aprime: run.aprime,
        s,
        trace: run.trace,
        ledger,
        verified,
        comparison_bound: COMPARISON_BOUND.to_string(),
    })
}

#[derive(Clone, Debug)]
pub struct AlmostInvariant {
    pub s: GSet,
    /// Chosen level `l ∈ 0..k`.
    pub level: u32,
    /// `S^l A`
    pub astar: GSet,
    /// `|S^{l+1}A| / |S^lA|`
    pub ratio: Rational,
    /// `|S^j A|` for `j = 0..=k`.
    pub chain: Vec<u64>,
    pub ledger: Vec<LedgerEntry>,
}

/// Pigeonholes along `A ⊆ SA ⊆ … ⊆ S^kA` for the level with the smallest
/// growth ratio (ties go to the smallest level).
pub fn almost_invariant(a: &GSet, k: u32) -> Result<AlmostInvariant> {
    let cert = theorem_main(a, k)?;
    almost_invariant_for(a, &cert.s, k)
}

/// The pigeonhole step for a given neighbourhood `s`.
pub fn almost_invariant_for(a: &GSet, s: &GSet, k: u32) -> Result<AlmostInvariant> {
    check_k(k)?;
    if a.is_empty() {
        return Err(Error::EmptySet("the pigeonhole needs a non-empty set"));
    }
    let mut levels = vec![a.clone()];
    for j in 0..k as usize {
        let next = product(s, &levels[j])?;
        levels.push(next);
    }
    let chain: Vec<u64> = levels.iter().map(|x| x.len() as u64).collect();

    let mut best = 0usize;
    let mut best_ratio = Rational::new(chain[1], chain[0]);
    for l in 1..k as usize {
        let r = Rational::new(chain[l + 1], chain[l]);
        if r < best_ratio {
            best = l;
            best_ratio = r;
        }
    }

    let top = &levels[k as usize];
    let a_inv = inverse_set(a);
    let target = product_chain(&[a, a, &a_inv, &a_inv, a])?;
    let ledger = vec![
        LedgerEntry::new(
            "pigeonhole.ratio_power",
            best_ratio.pow(k),
            Relation::Le,
            Rational::new(chain[k as usize], chain[0]),
        ),
        containment("pigeonhole.base_in_chain", a, top)?,
        containment("pigeonhole.chain_in_target", top, &target)?,
    ];

    Ok(AlmostInvariant {
        s: s.clone(),
        level: best as u32,
        astar: levels.swap_remove(best),
        ratio: best_ratio,
        chain,
        ledger,
    })
}
