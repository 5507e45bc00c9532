//! Brute-force reference semantics.
//!
//! Everything here works on `BTreeSet`s with plain nested loops over the
//! group law and shares no code with the set arithmetic, symmetry or
//! iteration modules. [`verify_certificate`] uses these routines to re-derive
//! a certificate from scratch: it replays the iteration, recomputes the
//! symmetry set and every ledger entry, and checks `S^k ⊆ A²A⁻²` directly.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_bigint::BigInt;
use serde::Serialize;

use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::group::{GroupContext, GroupElement};
use crate::ledger::{LedgerEntry, Relation};
use crate::neighbourhood::StepCase;
use crate::rational::Rational;
use crate::set::GSet;

type Set = BTreeSet<GroupElement>;

fn raw(a: &GSet) -> Set {
    a.iter().collect()
}

fn wrap(ctx: &Arc<GroupContext>, set: Set) -> GSet {
    GSet::from_sorted(ctx.clone(), set.into_iter().collect())
}

fn budget(ctx: &GroupContext, what: &'static str, needed: u128) -> Result<()> {
    let limit = ctx.limits().pair_budget;
    if needed > limit as u128 {
        return Err(Error::ResourceExceeded {
            what,
            needed,
            budget: limit,
        });
    }
    Ok(())
}

fn mul_sets(ctx: &GroupContext, a: &Set, b: &Set) -> Result<Set> {
    budget(ctx, "oracle product", a.len() as u128 * b.len() as u128)?;
    let mut out = Set::new();
    for &x in a {
        for &y in b {
            out.insert(ctx.op(x, y));
        }
    }
    Ok(out)
}

fn inv_set(ctx: &GroupContext, a: &Set) -> Set {
    a.iter().map(|&x| ctx.inv(x)).collect()
}

/// `|A ∩ xB|` by scanning `A`.
fn overlap(ctx: &GroupContext, a: &Set, b: &Set, x: GroupElement) -> u64 {
    let x_inv = ctx.inv(x);
    a.iter().filter(|&&y| b.contains(&ctx.op(x_inv, y))).count() as u64
}

fn pair_counts(ctx: &GroupContext, a: &Set, b: &Set) -> Result<BTreeMap<GroupElement, u64>> {
    budget(ctx, "oracle convolution", a.len() as u128 * b.len() as u128)?;
    let mut counts = BTreeMap::new();
    for &x in a {
        for &y in b {
            *counts.entry(ctx.op(x, y)).or_insert(0u64) += 1;
        }
    }
    Ok(counts)
}

pub fn oracle_product(a: &GSet, b: &GSet) -> Result<GSet> {
    Ok(wrap(a.ctx(), mul_sets(a.ctx(), &raw(a), &raw(b))?))
}

pub fn oracle_power(a: &GSet, k: u32) -> Result<GSet> {
    let ctx = a.ctx();
    let base = raw(a);
    let mut acc = Set::from([ctx.identity()]);
    for _ in 0..k {
        acc = mul_sets(ctx, &acc, &base)?;
    }
    Ok(wrap(ctx, acc))
}

/// `A²A⁻²` by a naive chain of products.
pub fn oracle_square_difference(a: &GSet) -> Result<GSet> {
    let ctx = a.ctx();
    let set = raw(a);
    let inv = inv_set(ctx, &set);
    let sq = mul_sets(ctx, &set, &set)?;
    let sq_inv = mul_sets(ctx, &inv, &inv)?;
    Ok(wrap(ctx, mul_sets(ctx, &sq, &sq_inv)?))
}

/// First element of `S^k` found outside `target`, scanning the last
/// multiplication and stopping at the first violation.
pub fn oracle_power_within(s: &GSet, k: u32, target: &GSet) -> Result<Option<GroupElement>> {
    let ctx = s.ctx();
    let base = raw(s);
    let goal = raw(target);
    let mut acc = Set::from([ctx.identity()]);
    for _ in 1..k {
        acc = mul_sets(ctx, &acc, &base)?;
    }
    budget(ctx, "oracle power", acc.len() as u128 * base.len() as u128)?;
    for &x in &acc {
        for &y in &base {
            let z = ctx.op(x, y);
            if !goal.contains(&z) {
                return Ok(Some(z));
            }
        }
    }
    Ok(None)
}

/// Number of pairs `(a, b)` with `ab = x`.
pub fn oracle_conv(a: &GSet, b: &GSet, x: GroupElement) -> u64 {
    let ctx = a.ctx();
    let mut count = 0;
    for p in a.iter() {
        for q in b.iter() {
            if ctx.op(p, q) == x {
                count += 1;
            }
        }
    }
    count
}

pub fn oracle_conv_table(a: &GSet, b: &GSet) -> Result<BTreeMap<GroupElement, u64>> {
    pair_counts(a.ctx(), &raw(a), &raw(b))
}

/// `|{(b, c, d, e) : bc = de}|` by a four-fold loop.
pub fn oracle_quadruples(b: &GSet, c: &GSet, d: &GSet, e: &GSet) -> Result<u64> {
    let ctx = b.ctx();
    let work = b.len() as u128 * c.len() as u128 * d.len() as u128 * e.len() as u128;
    budget(ctx, "oracle quadruples", work)?;
    let (c, d, e) = (c.elements(), d.elements(), e.elements());
    let mut count = 0u64;
    for x in b.iter() {
        for &y in c {
            let left = ctx.op(x, y);
            for &z in d {
                for &w in e {
                    if ctx.op(z, w) == left {
                        count += 1;
                    }
                }
            }
        }
    }
    Ok(count)
}

fn meets(count: u64, eta: &Rational, size: u64) -> bool {
    // count ≥ (p/q)·size  ⇔  count·q ≥ p·size
    BigInt::from(count) * eta.denom() >= eta.numer() * BigInt::from(size)
}

/// `Sym_η(A)` by counting `|A ∩ xA|` for every `x` in a naive `AA⁻¹`.
pub fn oracle_sym(a: &GSet, eta: &Rational) -> Result<GSet> {
    let ctx = a.ctx();
    let set = raw(a);
    let diff = mul_sets(ctx, &set, &inv_set(ctx, &set))?;
    let members = diff
        .into_iter()
        .filter(|&x| meets(overlap(ctx, &set, &set, x), eta, set.len() as u64))
        .collect();
    Ok(wrap(ctx, members))
}

/// Full-scan evaluation of one dichotomy step.
#[derive(Clone, Debug)]
pub struct OracleLemma {
    pub level_set: GSet,
    /// Every `t ∈ L` whose overlap shrinks the product set, in canonical order.
    pub qualifying: Vec<GroupElement>,
    pub aprime_a_size: u64,
}

impl OracleLemma {
    pub fn choice(&self) -> Option<GroupElement> {
        self.qualifying.first().copied()
    }
}

pub fn oracle_lemma(aprime: &GSet, a: &GSet, eps: &Rational) -> Result<OracleLemma> {
    let ctx = a.ctx();
    let ap = raw(aprime);
    let full = raw(a);
    let n1 = ap.len() as u64;
    let n = full.len() as u64;
    let m = mul_sets(ctx, &ap, &full)?.len() as u64;
    let tau = Rational::new(
        BigInt::from(n1).pow(4),
        BigInt::from(2 * m) * BigInt::from(n).pow(2),
    );
    let candidates = mul_sets(ctx, &ap, &inv_set(ctx, &ap))?;
    let level: Set = candidates
        .into_iter()
        .filter(|&t| tau.cmp_int(overlap(ctx, &ap, &ap, t)).is_le())
        .collect();
    let keep = &Rational::one() - eps;
    let mut qualifying = Vec::new();
    for &t in &level {
        let t_inv = ctx.inv(t);
        let shrunk: Set = ap
            .iter()
            .copied()
            .filter(|&x| ap.contains(&ctx.op(t_inv, x)))
            .collect();
        let grown = mul_sets(ctx, &shrunk, &full)?.len() as u64;
        if (&keep * &Rational::from(m)).cmp_int(grown).is_ge() {
            qualifying.push(t);
        }
    }
    Ok(OracleLemma {
        level_set: wrap(ctx, level),
        qualifying,
        aprime_a_size: m,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    pub overall: bool,
}

impl VerificationReport {
    fn push(&mut self, name: impl Into<String>, expected: impl ToString, actual: impl ToString) {
        let (expected, actual) = (expected.to_string(), actual.to_string());
        self.checks.push(Check {
            name: name.into(),
            pass: expected == actual,
            expected,
            actual,
        });
    }

    fn finish(mut self) -> VerificationReport {
        self.overall = self.checks.iter().all(|c| c.pass);
        self
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

fn show(ctx: &GroupContext, set: &Set) -> String {
    let parts: Vec<String> = set.iter().map(|&x| format!("{:?}", ctx.components(x))).collect();
    format!("[{}]", parts.join(", "))
}

fn missing(inner: &Set, outer: &Set) -> u64 {
    inner.iter().filter(|x| !outer.contains(x)).count() as u64
}

/// Rebuilds a certificate from scratch and compares it field by field.
pub fn verify_certificate(cert: &Certificate, a: &GSet) -> Result<VerificationReport> {
    let mut report = VerificationReport {
        checks: Vec::new(),
        overall: false,
    };
    let ctx = a.ctx();
    if cert.s.ctx() != ctx || cert.aprime.ctx() != ctx {
        return Err(Error::MalformedCertificate(
            "certificate group differs from the instance".into(),
        ));
    }
    if a.is_empty() {
        return Err(Error::EmptySet("verification needs a non-empty set"));
    }

    let regenerated = crate::instances::generate_in(ctx, &cert.instance.set)
        .map_err(|e| Error::MalformedCertificate(e.to_string()))?;
    report.push(
        "instance_matches",
        true,
        regenerated == *a && ctx.spec() == &cert.instance.group,
    );
    report.push("k_positive", true, cert.k >= 1);
    let k = cert.k.max(1);
    let eps = Rational::new(1u64, k as u64 + 1);
    report.push("epsilon", &eps, &cert.epsilon);
    report.push("trace_epsilon", &eps, &cert.trace.epsilon);

    let base = raw(a);
    let n = base.len() as u64;
    let s = raw(&cert.s);
    report.push("identity_in_s", true, s.contains(&ctx.identity()));
    report.push("s_symmetric", true, inv_set(ctx, &s) == s);

    let mut expected = Vec::new();

    // Replay the iteration.
    let k0 = Rational::new(mul_sets(ctx, &base, &base)?.len() as u64, n);
    report.push("trace_k0", &k0, &cert.trace.k0);
    let mut ap = base.clone();
    let mut replay_ok = true;
    let mut terminal_m = None;
    let mut index = 0u64;
    loop {
        let ap_set = wrap(ctx, ap.clone());
        let lemma = oracle_lemma(&ap_set, a, &eps)?;
        let m = lemma.aprime_a_size;
        let step_name = format!("trace[{index}]");
        let Some(step) = cert.trace.steps.get(index as usize) else {
            report.push(format!("{step_name}.present"), true, false);
            replay_ok = false;
            break;
        };
        let case = if lemma.choice().is_some() {
            StepCase::Shrink
        } else {
            StepCase::Terminate
        };
        report.push(format!("{step_name}.index"), index, step.index);
        report.push(format!("{step_name}.aprime_size"), ap.len(), step.aprime_size);
        report.push(format!("{step_name}.aprime_a_size"), m, step.aprime_a_size);
        report.push(
            format!("{step_name}.level_set_size"),
            lemma.level_set.len(),
            step.level_set_size,
        );
        report.push(
            format!("{step_name}.case"),
            format!("{case:?}"),
            format!("{:?}", step.case),
        );
        report.push(
            format!("{step_name}.witness"),
            format!("{:?}", lemma.choice().map(|t| ctx.components(t))),
            format!("{:?}", step.witness.map(|t| ctx.components(t))),
        );
        expected.extend(
            lemma_ledger(ctx, &ap, &base, &eps, &lemma)?
                .into_iter()
                .map(|e| e.prefixed(&format!("step[{index}]"))),
        );
        match lemma.choice() {
            Some(t) => {
                if step.case != StepCase::Shrink || index > 4096 {
                    replay_ok = false;
                    break;
                }
                let t_inv = ctx.inv(t);
                ap = ap
                    .iter()
                    .copied()
                    .filter(|&x| ap.contains(&ctx.op(t_inv, x)))
                    .collect();
                index += 1;
            }
            None => {
                terminal_m = Some(m);
                break;
            }
        }
    }
    report.push("trace_replayed", true, replay_ok);
    report.push("trace_i0", index, cert.trace.i0);
    report.push("trace_length", index + 1, cert.trace.steps.len());
    report.push("aprime", show(ctx, &ap), show(ctx, &raw(&cert.aprime)));

    for (i, step) in cert.trace.steps.iter().enumerate() {
        expected.extend(trace_entries(
            i as u64,
            step.aprime_size,
            step.aprime_a_size,
            &k0,
            &eps,
            n,
        ));
    }
    expected.extend(termination_entries(cert.trace.i0, &k0, &eps));

    // S against a fresh symmetry set of A'A.
    let ap_a = mul_sets(ctx, &ap, &base)?;
    let m = ap_a.len() as u64;
    if let Some(tm) = terminal_m {
        report.push("terminal_aprime_a_size", tm, m);
    }
    let keep = &Rational::one() - &eps;
    let fresh_sym = raw(&oracle_sym(&wrap(ctx, ap_a.clone()), &keep)?);
    report.push("s_equals_symmetry_set", show(ctx, &fresh_sym), show(ctx, &s));
    let bad_members = s
        .iter()
        .filter(|&&x| !meets(overlap(ctx, &ap_a, &ap_a, x), &keep, m))
        .count();
    report.push("s_membership_counts", 0, bad_members);

    // Containments.
    let target = raw(&oracle_square_difference(a)?);
    let s_k = raw(&oracle_power(&cert.s, k)?);
    report.push("power_in_target", 0, missing(&s_k, &target));

    let n1 = ap.len() as u64;
    expected.push(LedgerEntry::new(
        "theorem.identity_in_s",
        u64::from(s.contains(&ctx.identity())),
        Relation::Eq,
        1u64,
    ));
    expected.push(LedgerEntry::new(
        "theorem.s_symmetric",
        missing(&inv_set(ctx, &s), &s),
        Relation::Eq,
        0u64,
    ));
    expected.push(LedgerEntry::new(
        "theorem.s_size_lower_bound",
        s.len() as u64,
        Relation::Ge,
        Rational::new(BigInt::from(n1).pow(3), BigInt::from(2 * m) * BigInt::from(n)),
    ));
    let low = raw(&oracle_sym(
        &wrap(ctx, ap_a.clone()),
        &Rational::new(1u64, k as u64 + 1),
    )?);
    let ap_a_diff = mul_sets(ctx, &ap_a, &inv_set(ctx, &ap_a))?;
    expected.push(LedgerEntry::new(
        "theorem.power_in_low_sym",
        missing(&s_k, &low),
        Relation::Eq,
        0u64,
    ));
    expected.push(LedgerEntry::new(
        "theorem.low_sym_in_difference",
        missing(&low, &ap_a_diff),
        Relation::Eq,
        0u64,
    ));
    expected.push(LedgerEntry::new(
        "theorem.difference_in_target",
        missing(&ap_a_diff, &target),
        Relation::Eq,
        0u64,
    ));
    expected.push(LedgerEntry::new(
        "theorem.power_in_target",
        missing(&s_k, &target),
        Relation::Eq,
        0u64,
    ));
    let early = oracle_power_within(&cert.s, k, &wrap(ctx, target.clone()))?;
    expected.push(LedgerEntry::new(
        "oracle.power_in_target",
        u64::from(early.is_some()),
        Relation::Eq,
        0u64,
    ));

    // Ledger: every entry recomputed, none missing, none extra.
    let recorded: BTreeMap<&str, &LedgerEntry> = cert.ledger.iter().map(|e| (e.name.as_str(), e)).collect();
    report.push("ledger_names_unique", cert.ledger.len(), recorded.len());
    report.push("ledger_size", expected.len(), cert.ledger.len());
    for want in &expected {
        let got = recorded
            .get(want.name.as_str())
            .map(|e| format!("{} {} {} holds={}", e.lhs, e.relation, e.rhs, e.holds))
            .unwrap_or_else(|| "missing".into());
        report.push(
            format!("ledger:{}", want.name),
            format!("{} {} {} holds=true", want.lhs, want.relation, want.rhs),
            got,
        );
    }
    let all_hold = cert.ledger.iter().all(|e| e.holds && e.is_consistent());
    report.push("verified_flag", all_hold, cert.verified);

    Ok(report.finish())
}

/// Ledger entries of one dichotomy step, from brute-force counts.
fn lemma_ledger(
    ctx: &GroupContext,
    ap: &Set,
    full: &Set,
    eps: &Rational,
    lemma: &OracleLemma,
) -> Result<Vec<LedgerEntry>> {
    let n1 = ap.len() as u64;
    let n = full.len() as u64;
    let m = lemma.aprime_a_size;
    let big = BigInt::from;
    let tau = Rational::new(big(n1).pow(4), big(2 * m) * big(n).pow(2));
    let l = lemma.level_set.len() as u64;
    let level = raw(&lemma.level_set);

    let mixed = pair_counts(ctx, full, ap)?;
    let own = pair_counts(ctx, ap, ap)?;
    let e_mixed: u64 = mixed.values().map(|v| v * v).sum();
    let e_own: u64 = own.values().map(|v| v * v).sum();
    let left = pair_counts(ctx, &inv_set(ctx, full), full)?;
    let right = pair_counts(ctx, ap, &inv_set(ctx, ap))?;
    let swapped: u64 = left
        .iter()
        .map(|(x, v)| v * right.get(x).copied().unwrap_or(0))
        .sum();

    let mut out = vec![
        LedgerEntry::new(
            "level_set_lower_bound",
            l,
            Relation::Ge,
            Rational::new(big(n1).pow(3), big(2 * m) * big(n)),
        ),
        LedgerEntry::new("energy_identity", e_mixed, Relation::Eq, swapped),
        LedgerEntry::new("energy_monotone", e_mixed, Relation::Ge, e_own),
        LedgerEntry::new(
            "energy_cauchy_schwarz",
            e_own,
            Relation::Ge,
            Rational::new(big(n1).pow(4), big(own.len() as u64)),
        ),
        LedgerEntry::new(
            "energy_lower_bound",
            e_own,
            Relation::Ge,
            Rational::new(big(n1).pow(4), big(m)),
        ),
        LedgerEntry::new(
            "level_set_split",
            &Rational::from(l * n * n1) + &(&tau * &Rational::from(n * n)),
            Relation::Ge,
            e_mixed,
        ),
    ];
    let keep = &Rational::one() - eps;
    match lemma.choice() {
        Some(t) => {
            let t_inv = ctx.inv(t);
            let shrunk: Set = ap
                .iter()
                .copied()
                .filter(|&x| ap.contains(&ctx.op(t_inv, x)))
                .collect();
            let grown = mul_sets(ctx, &shrunk, full)?.len() as u64;
            out.push(LedgerEntry::new(
                "shrink_subset",
                missing(&shrunk, ap),
                Relation::Eq,
                0u64,
            ));
            out.push(LedgerEntry::new(
                "shrink_size",
                shrunk.len() as u64,
                Relation::Ge,
                tau,
            ));
            out.push(LedgerEntry::new(
                "shrink_growth",
                grown,
                Relation::Le,
                &keep * &Rational::from(m),
            ));
        }
        None => {
            let ap_a = mul_sets(ctx, ap, full)?;
            let eta = if keep.is_positive() {
                keep
            } else {
                Rational::new(1u64, m)
            };
            let sym = raw(&oracle_sym(
                &GSet::from_sorted(lemma.level_set.ctx().clone(), ap_a.into_iter().collect()),
                &eta,
            )?);
            out.push(LedgerEntry::new(
                "terminate_sym_size",
                sym.len() as u64,
                Relation::Ge,
                Rational::new(big(n1).pow(3), big(2 * m) * big(n)),
            ));
            out.push(LedgerEntry::new(
                "level_set_in_sym",
                missing(&level, &sym),
                Relation::Eq,
                0u64,
            ));
        }
    }
    Ok(out)
}

const EXPANSION_CAP: u64 = 1024;

fn trace_entries(i: u64, size: u64, growth: u64, k0: &Rational, eps: &Rational, n: u64) -> Vec<LedgerEntry> {
    let keep = &Rational::one() - eps;
    let mut decay = Rational::one();
    for _ in 0..i {
        decay = &decay * &keep;
    }
    let growth_rhs = &(&decay * k0) * &Rational::from(n);
    let base = &Rational::from(2u64) * k0;
    // exponent (4^i - 1)/3 = 1 + 4 + ... + 4^(i-1)
    let exponent = (0..i).try_fold(0u64, |acc, j| {
        4u64.checked_pow(j as u32).and_then(|p| acc.checked_add(p))
    });
    let (name, rhs) = match exponent {
        Some(e) if e <= EXPANSION_CAP => {
            let mut denom = Rational::one();
            for _ in 0..e {
                denom = &denom * &base;
            }
            (format!("trace[{i}].size_bound"), &Rational::from(n) / &denom)
        }
        _ => {
            // the bound is below 1 as soon as (2K)^e ≥ n
            let mut acc = Rational::one();
            let mut used = 0u64;
            let e = exponent.unwrap_or(u64::MAX);
            while acc.cmp_int(n).is_lt() && used < e {
                acc = &acc * &base;
                used += 1;
            }
            if acc.cmp_int(n).is_ge() {
                (format!("trace[{i}].size_bound_capped"), Rational::one())
            } else {
                (format!("trace[{i}].size_bound"), &Rational::from(n) / &acc)
            }
        }
    };
    vec![
        LedgerEntry::new(
            format!("trace[{i}].growth_bound"),
            growth,
            Relation::Le,
            growth_rhs,
        ),
        LedgerEntry::new(name, size, Relation::Ge, rhs),
    ]
}

fn termination_entries(i0: u64, k0: &Rational, eps: &Rational) -> Vec<LedgerEntry> {
    let keep = &Rational::one() - eps;
    let mut bound = 0u64;
    if keep.is_positive() {
        let mut value = k0.clone();
        while value > Rational::one() {
            value = &value * &keep;
            bound += 1;
        }
    }
    let mut out = vec![LedgerEntry::new(
        "trace.termination_bound",
        i0,
        Relation::Le,
        bound,
    )];
    if (k0 * &keep) < Rational::one() {
        out.push(LedgerEntry::new(
            "trace.no_shrink_small_doubling",
            i0,
            Relation::Eq,
            0u64,
        ));
    }
    out
}
