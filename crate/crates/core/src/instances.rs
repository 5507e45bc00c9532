//! Deterministic instance generators.
//!
//! An instance is a group plus a rule producing a subset of it. Generation is
//! a pure function of the spec, so certificates can name their instance by
//! spec instead of carrying the set.
//!
//! Seeded generators use the counter-based stream in [`crate::prng`]:
//!
//! * `random(size, seed)`: draw `d % order` for draws `0, 1, 2, ...` and keep
//!   the first `size` distinct codes.
//! * `perturbed_subgroup(generators, swaps, seed)`: start from the sorted
//!   subgroup; for each swap, remove the element at position `d % len` of the
//!   current sorted set, then draw `d % order` until the code lies outside both
//!   the original subgroup and the current set, and insert it.

use std::collections::{BTreeSet, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupContext, GroupElement, GroupSpec, Limits};
use crate::prng::SplitMix;
use crate::set::{doubling_stats, DoublingStats, GSet};

/// A group element in instance JSON: a bare code for one-component
/// encodings, or the component array.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElementSpec {
    Scalar(u64),
    Components(Vec<u64>),
}

impl ElementSpec {
    pub fn resolve(&self, ctx: &GroupContext) -> Result<GroupElement> {
        match self {
            ElementSpec::Scalar(v) => ctx.from_components(&[*v]),
            ElementSpec::Components(parts) => ctx.from_components(parts),
        }
    }

    pub fn of(ctx: &GroupContext, x: GroupElement) -> ElementSpec {
        ElementSpec::Components(ctx.components(x))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    Explicit {
        elements: Vec<ElementSpec>,
    },
    Subgroup {
        generators: Vec<ElementSpec>,
    },
    /// Union of the left cosets `rH` of `H = <generators>`.
    CosetUnion {
        generators: Vec<ElementSpec>,
        representatives: Vec<ElementSpec>,
    },
    /// `{start, start+1, .., start+length-1}` in a cyclic group.
    Interval {
        start: u64,
        length: u64,
    },
    /// Words of length at most `radius` in the generators, identity included.
    Ball {
        generators: Vec<ElementSpec>,
        radius: u32,
    },
    Random {
        size: u64,
        seed: u64,
    },
    PerturbedSubgroup {
        generators: Vec<ElementSpec>,
        swaps: u64,
        seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub group: GroupSpec,
    pub set: SetSpec,
}

impl InstanceSpec {
    pub fn new(group: GroupSpec, set: SetSpec) -> InstanceSpec {
        InstanceSpec { group, set }
    }

    /// Spec that reproduces `a` verbatim.
    pub fn explicit(a: &GSet) -> InstanceSpec {
        let ctx = a.ctx();
        InstanceSpec {
            group: ctx.spec().clone(),
            set: SetSpec::Explicit {
                elements: a.iter().map(|x| ElementSpec::of(ctx, x)).collect(),
            },
        }
    }

    pub fn context(&self, limits: Limits) -> Result<Arc<GroupContext>> {
        Ok(Arc::new(GroupContext::with_limits(self.group.clone(), limits)?))
    }

    pub fn from_json(text: &str) -> Result<InstanceSpec> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInstance(e.to_string()))
    }
}

/// Generates the instance's set with default limits.
pub fn generate(spec: &InstanceSpec) -> Result<GSet> {
    generate_with(spec, Limits::default())
}

pub fn generate_with(spec: &InstanceSpec, limits: Limits) -> Result<GSet> {
    let ctx = spec.context(limits)?;
    generate_in(&ctx, &spec.set)
}

/// Generates a set fragment inside an existing context.
pub fn generate_in(ctx: &Arc<GroupContext>, set: &SetSpec) -> Result<GSet> {
    let resolve =
        |list: &[ElementSpec]| -> Result<Vec<GroupElement>> { list.iter().map(|e| e.resolve(ctx)).collect() };
    match set {
        SetSpec::Explicit { elements } => GSet::new(ctx, resolve(elements)?),
        SetSpec::Subgroup { generators } => subgroup(ctx, &resolve(generators)?),
        SetSpec::CosetUnion {
            generators,
            representatives,
        } => {
            let h = subgroup(ctx, &resolve(generators)?)?;
            let reps = resolve(representatives)?;
            ctx.limits()
                .check_pairs("coset union", reps.len() as u128 * h.len() as u128)?;
            let elems = reps.iter().flat_map(|&r| h.iter().map(move |x| ctx.op(r, x)));
            GSet::new(ctx, elems.collect::<Vec<_>>())
        }
        SetSpec::Interval { start, length } => {
            let GroupSpec::Cyclic { n } = ctx.spec() else {
                return Err(Error::InvalidInstance("interval sets need a cyclic group".into()));
            };
            if *length == 0 || length > n {
                return Err(Error::InvalidInstance(format!(
                    "interval length {length} outside 1..={n}"
                )));
            }
            let start = start % n;
            GSet::from_codes(
                ctx,
                (0..*length).map(|i| ((start as u128 + i as u128) % *n as u128) as u64),
            )
        }
        SetSpec::Ball { generators, radius } => ball(ctx, &resolve(generators)?, *radius),
        SetSpec::Random { size, seed } => random(ctx, *size, *seed),
        SetSpec::PerturbedSubgroup {
            generators,
            swaps,
            seed,
        } => perturbed_subgroup(ctx, &resolve(generators)?, *swaps, *seed),
    }
}

/// Closure of `{1}` under right multiplication by the generators.
fn subgroup(ctx: &Arc<GroupContext>, generators: &[GroupElement]) -> Result<GSet> {
    let mut seen = BTreeSet::from([ctx.identity()]);
    let mut queue = VecDeque::from([ctx.identity()]);
    while let Some(x) = queue.pop_front() {
        ctx.limits()
            .check_pairs("subgroup closure", seen.len() as u128 * generators.len() as u128)?;
        for &g in generators {
            let y = ctx.op(x, g);
            if seen.insert(y) {
                queue.push_back(y);
            }
        }
    }
    Ok(GSet::from_sorted(ctx.clone(), seen.into_iter().collect()))
}

/// Breadth-first Cayley ball: layer `i+1` is layer `i` times each generator.
fn ball(ctx: &Arc<GroupContext>, generators: &[GroupElement], radius: u32) -> Result<GSet> {
    let mut seen = BTreeSet::from([ctx.identity()]);
    let mut frontier = vec![ctx.identity()];
    for _ in 0..radius {
        if frontier.is_empty() {
            break;
        }
        ctx.limits()
            .check_pairs("ball expansion", seen.len() as u128 * generators.len() as u128)?;
        let mut next = Vec::new();
        for &x in &frontier {
            for &g in generators {
                let y = ctx.op(x, g);
                if seen.insert(y) {
                    next.push(y);
                }
            }
        }
        frontier = next;
    }
    Ok(GSet::from_sorted(ctx.clone(), seen.into_iter().collect()))
}

fn draw_attempts(order: u64) -> u64 {
    order.saturating_mul(64).max(1 << 16)
}

fn random(ctx: &Arc<GroupContext>, size: u64, seed: u64) -> Result<GSet> {
    let order = ctx.order();
    if size == 0 || size > order {
        return Err(Error::InvalidInstance(format!(
            "random size {size} outside 1..={order}"
        )));
    }
    ctx.limits().check_pairs("random set", size as u128)?;
    let mut rng = SplitMix::new(seed);
    let mut chosen = BTreeSet::new();
    let limit = draw_attempts(order);
    while (chosen.len() as u64) < size {
        if rng.counter() >= limit {
            return Err(Error::InvalidInstance(
                "random generator failed to fill the set".into(),
            ));
        }
        chosen.insert(GroupElement::from_code(rng.below(order)));
    }
    Ok(GSet::from_sorted(ctx.clone(), chosen.into_iter().collect()))
}

fn perturbed_subgroup(
    ctx: &Arc<GroupContext>,
    generators: &[GroupElement],
    swaps: u64,
    seed: u64,
) -> Result<GSet> {
    let h = subgroup(ctx, generators)?;
    let outside = ctx.order() - h.len() as u64;
    if swaps > outside || swaps > h.len() as u64 {
        return Err(Error::InvalidInstance(format!(
            "{swaps} swaps exceed the subgroup size {} or its complement {outside}",
            h.len()
        )));
    }
    let mut rng = SplitMix::new(seed);
    let mut current: Vec<GroupElement> = h.elements().to_vec();
    let limit = draw_attempts(ctx.order());
    for _ in 0..swaps {
        let pos = rng.below(current.len() as u64) as usize;
        current.remove(pos);
        let fresh = loop {
            if rng.counter() >= limit {
                return Err(Error::InvalidInstance(
                    "perturbation failed to find an outside element".into(),
                ));
            }
            let x = GroupElement::from_code(rng.below(ctx.order()));
            if !h.contains(x) && current.binary_search(&x).is_err() {
                break x;
            }
        };
        let at = current.binary_search(&fresh).unwrap_err();
        current.insert(at, fresh);
    }
    Ok(GSet::from_sorted(ctx.clone(), current))
}

/// One axis of a sweep: a dotted field path into the instance JSON
/// (e.g. `"set.length"` or `"group.n"`) and the values it takes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub parameter: String,
    pub values: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: u64,
    pub instance: InstanceSpec,
    pub stats: DoublingStats,
}

pub fn with_parameter(base: &InstanceSpec, path: &str, value: u64) -> Result<InstanceSpec> {
    let mut json = serde_json::to_value(base)?;
    let mut node = &mut json;
    let parts: Vec<&str> = path.split('.').collect();
    let (last, prefix) = parts
        .split_last()
        .ok_or_else(|| Error::InvalidInstance("empty sweep parameter".into()))?;
    for part in prefix {
        node = node
            .get_mut(*part)
            .ok_or_else(|| Error::InvalidInstance(format!("no field {part:?} in sweep path {path:?}")))?;
    }
    let obj = node
        .as_object_mut()
        .filter(|o| o.contains_key(*last))
        .ok_or_else(|| Error::InvalidInstance(format!("sweep path {path:?} does not name a field")))?;
    obj.insert(last.to_string(), value.into());
    serde_json::from_value(json).map_err(|e| Error::InvalidInstance(e.to_string()))
}

/// Doubling statistics for each grid point, in grid order.
pub fn family_sweep(base: &InstanceSpec, grid: &SweepGrid, limits: Limits) -> Result<Vec<SweepPoint>> {
    grid.values
        .iter()
        .map(|&value| {
            let instance = with_parameter(base, &grid.parameter, value)?;
            let set = generate_with(&instance, limits)?;
            Ok(SweepPoint {
                value,
                stats: doubling_stats(&set)?,
                instance,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::Rational;
    use crate::set::{inverse_set, product};

    fn spec(json: &str) -> InstanceSpec {
        InstanceSpec::from_json(json).unwrap()
    }

    #[test]
    fn even_residues() {
        let s =
            spec(r#"{"group": {"type": "cyclic", "n": 20}, "set": {"type": "subgroup", "generators": [2]}}"#);
        let a = generate(&s).unwrap();
        assert_eq!(a.codes(), (0..20).step_by(2).collect::<Vec<_>>());
        assert_eq!(doubling_stats(&a).unwrap().doubling, Rational::one());
    }

    #[test]
    fn interval_wraps() {
        let s = spec(
            r#"{"group": {"type": "cyclic", "n": 20}, "set": {"type": "interval", "start": 18, "length": 4}}"#,
        );
        assert_eq!(generate(&s).unwrap().codes(), vec![0, 1, 18, 19]);
        let s = spec(
            r#"{"group": {"type": "dihedral", "n": 20}, "set": {"type": "interval", "start": 0, "length": 4}}"#,
        );
        assert!(matches!(generate(&s), Err(Error::InvalidInstance(_))));
    }

    #[test]
    fn dihedral_ball() {
        let s = spec(
            r#"{"group": {"type": "dihedral", "n": 6},
                "set": {"type": "ball", "generators": [[1, 0], [0, 1]], "radius": 2}}"#,
        );
        let a = generate(&s).unwrap();
        let ctx = a.ctx();
        let e = |p: &[u64]| ctx.from_components(p).unwrap();
        // 1, r, s, r^2, rs, sr = r^5 s
        let expected = GSet::new(
            ctx,
            [
                e(&[0, 0]),
                e(&[1, 0]),
                e(&[0, 1]),
                e(&[2, 0]),
                e(&[1, 1]),
                e(&[5, 1]),
            ],
        )
        .unwrap();
        assert_eq!(a, expected);
    }

    #[test]
    fn coset_union_and_closure() {
        let s = spec(
            r#"{"group": {"type": "cyclic", "n": 24},
                "set": {"type": "coset_union", "generators": [6], "representatives": [0, 1]}}"#,
        );
        assert_eq!(generate(&s).unwrap().codes(), vec![0, 1, 6, 7, 12, 13, 18, 19]);

        let s = spec(
            r#"{"group": {"type": "symmetric", "n": 4},
                "set": {"type": "subgroup", "generators": [[1,0,0,0], [0,1,0,0]]}}"#,
        );
        let h = generate(&s).unwrap();
        assert_eq!(product(&h, &h).unwrap(), h);
        assert_eq!(inverse_set(&h), h);
    }

    #[test]
    fn seeded_generators_are_reproducible() {
        let s = spec(
            r#"{"group": {"type": "heisenberg_mod", "p": 5}, "set": {"type": "random", "size": 30, "seed": 7}}"#,
        );
        let a = generate(&s).unwrap();
        assert_eq!(a.len(), 30);
        assert_eq!(a, generate(&s).unwrap());
        let other = spec(
            r#"{"group": {"type": "heisenberg_mod", "p": 5}, "set": {"type": "random", "size": 30, "seed": 8}}"#,
        );
        assert_ne!(a, generate(&other).unwrap());

        let p = spec(
            r#"{"group": {"type": "cyclic", "n": 60},
                "set": {"type": "perturbed_subgroup", "generators": [3], "swaps": 2, "seed": 1}}"#,
        );
        let b = generate(&p).unwrap();
        assert_eq!(b.len(), 20);
        assert_eq!(b.iter().filter(|x| x.code() % 3 != 0).count(), 2);
        assert_eq!(b, generate(&p).unwrap());
    }

    #[test]
    fn random_draws_follow_documented_stream() {
        let s = spec(
            r#"{"group": {"type": "cyclic", "n": 1000}, "set": {"type": "random", "size": 3, "seed": 99}}"#,
        );
        let mut expected: Vec<u64> = Vec::new();
        let mut i = 0;
        while expected.len() < 3 {
            let c = crate::prng::draw(99, i) % 1000;
            if !expected.contains(&c) {
                expected.push(c);
            }
            i += 1;
        }
        expected.sort();
        assert_eq!(generate(&s).unwrap().codes(), expected);
    }

    #[test]
    fn rejects_unknown_fields_and_bad_elements() {
        assert!(InstanceSpec::from_json(r#"{"group": {"type": "cyclic", "n": 5, "m": 1}, "set": {"type": "random", "size": 1, "seed": 0}}"#).is_err());
        let s =
            spec(r#"{"group": {"type": "cyclic", "n": 5}, "set": {"type": "explicit", "elements": [7]}}"#);
        assert!(matches!(generate(&s), Err(Error::InvalidElement(_))));
        let s =
            spec(r#"{"group": {"type": "dihedral", "n": 5}, "set": {"type": "explicit", "elements": [1]}}"#);
        assert!(matches!(generate(&s), Err(Error::InvalidElement(_))));
    }

    #[test]
    fn interval_sweep_matches_closed_form() {
        let base = spec(
            r#"{"group": {"type": "cyclic", "n": 40}, "set": {"type": "interval", "start": 0, "length": 2}}"#,
        );
        let grid = SweepGrid {
            parameter: "set.length".into(),
            values: (2..=10).collect(),
        };
        let points = family_sweep(&base, &grid, Limits::default()).unwrap();
        assert_eq!(points.len(), 9);
        for p in points {
            assert_eq!(p.stats.doubling, Rational::new(2 * p.value - 1, p.value));
        }
        assert!(with_parameter(&base, "set.nope", 3).is_err());
    }

    #[test]
    fn heisenberg_balls_grow() {
        let base = spec(
            r#"{"group": {"type": "heisenberg_mod", "p": 5},
                "set": {"type": "ball", "generators": [[1,0,0],[0,1,0]], "radius": 1}}"#,
        );
        let grid = SweepGrid {
            parameter: "set.radius".into(),
            values: vec![1, 2, 3],
        };
        let sizes: Vec<u64> = family_sweep(&base, &grid, Limits::default())
            .unwrap()
            .iter()
            .map(|p| p.stats.size)
            .collect();
        assert!(sizes.windows(2).all(|w| w[0] <= w[1]), "{sizes:?}");
    }

    #[test]
    fn explicit_round_trip() {
        let s = spec(
            r#"{"group": {"type": "dihedral", "n": 7}, "set": {"type": "random", "size": 5, "seed": 3}}"#,
        );
        let a = generate(&s).unwrap();
        assert_eq!(generate(&InstanceSpec::explicit(&a)).unwrap(), a);
    }
}
