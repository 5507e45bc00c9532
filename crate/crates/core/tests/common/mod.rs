#![allow(dead_code)]

use std::sync::Arc;

use symgrowth::group::{GroupContext, GroupSpec};
use symgrowth::prng::SplitMix;
use symgrowth::{GSet, InstanceSpec};

pub struct SuiteCase {
    pub name: &'static str,
    pub spec: InstanceSpec,
    pub k: u32,
}

fn case(name: &'static str, group: &str, set: &str, k: u32) -> SuiteCase {
    let text = format!(r#"{{"group": {group}, "set": {set}}}"#);
    SuiteCase {
        name,
        spec: InstanceSpec::from_json(&text).unwrap_or_else(|e| panic!("{name}: {e}")),
        k,
    }
}

const D: &str = r#"[[1, 0], [0, 1]]"#;
const H2: &str = r#"[[1, 0, 0], [0, 1, 0]]"#;

/// Fixed instance suite shared by the acceptance and integration tests.
pub fn suite() -> Vec<SuiteCase> {
    let cyc = |n: u64| format!(r#"{{"type": "cyclic", "n": {n}}}"#);
    let dih = |n: u64| format!(r#"{{"type": "dihedral", "n": {n}}}"#);
    let heis = |p: u64| format!(r#"{{"type": "heisenberg_mod", "p": {p}}}"#);
    let ball = |gens: &str, r: u32| format!(r#"{{"type": "ball", "generators": {gens}, "radius": {r}}}"#);
    let interval = |s: u64, l: u64| format!(r#"{{"type": "interval", "start": {s}, "length": {l}}}"#);
    let sub = |gens: &str| format!(r#"{{"type": "subgroup", "generators": {gens}}}"#);
    let cosets = |gens: &str, reps: &str| {
        format!(r#"{{"type": "coset_union", "generators": {gens}, "representatives": {reps}}}"#)
    };
    let perturbed = |gens: &str, swaps: u64, seed: u64| {
        format!(r#"{{"type": "perturbed_subgroup", "generators": {gens}, "swaps": {swaps}, "seed": {seed}}}"#)
    };
    let random = |size: u64, seed: u64| format!(r#"{{"type": "random", "size": {size}, "seed": {seed}}}"#);

    vec![
        case("cyclic20_subgroup", &cyc(20), &sub("[4]"), 3),
        case("cyclic20_interval5", &cyc(20), &interval(0, 5), 2),
        case("cyclic24_interval6", &cyc(24), &interval(0, 6), 5),
        case("cyclic40_interval8", &cyc(40), &interval(5, 8), 1),
        case("cyclic60_interval12", &cyc(60), &interval(3, 12), 3),
        case("cyclic100_interval20", &cyc(100), &interval(0, 20), 2),
        case("cyclic150_interval30", &cyc(150), &interval(0, 30), 5),
        case("cyclic200_interval40", &cyc(200), &interval(10, 40), 1),
        case("cyclic16_even_plus_one", &cyc(16), &cosets("[2]", "[0, 1]"), 2),
        case("cyclic16_cosets", &cyc(16), &cosets("[4]", "[0, 1]"), 2),
        case("cyclic48_cosets", &cyc(48), &cosets("[8]", "[0, 1, 3]"), 5),
        case("cyclic120_perturbed", &cyc(120), &perturbed("[6]", 2, 7), 2),
        case("cyclic30_random", &cyc(30), &random(8, 1), 1),
        case("dihedral6_ball2", &dih(6), &ball(D, 2), 1),
        case("dihedral8_ball3", &dih(8), &ball(D, 3), 2),
        case("dihedral10_ball2", &dih(10), &ball(D, 2), 3),
        case("dihedral12_ball4", &dih(12), &ball(D, 4), 5),
        case("dihedral16_ball3", &dih(16), &ball("[[1, 0], [1, 1]]", 3), 2),
        case("dihedral12_rotations", &dih(12), &sub("[[2, 0]]"), 3),
        case(
            "dihedral12_cosets",
            &dih(12),
            &cosets("[[3, 0]]", "[[0, 0], [1, 1]]"),
            2,
        ),
        case(
            "dihedral16_perturbed",
            &dih(16),
            &perturbed("[[2, 0], [0, 1]]", 3, 11),
            2,
        ),
        case("dihedral14_random", &dih(14), &random(10, 3), 1),
        case("heisenberg3_ball2", &heis(3), &ball(H2, 2), 1),
        case("heisenberg3_ball3", &heis(3), &ball(H2, 3), 2),
        case("heisenberg5_ball2", &heis(5), &ball(H2, 2), 2),
        case("heisenberg5_ball3", &heis(5), &ball(H2, 3), 3),
        case(
            "heisenberg5_subgroup",
            &heis(5),
            &sub("[[0, 0, 1], [1, 0, 0]]"),
            5,
        ),
        case(
            "heisenberg5_cosets",
            &heis(5),
            &cosets("[[0, 0, 1]]", "[[0, 0, 0], [1, 0, 0], [0, 1, 0]]"),
            2,
        ),
        case(
            "heisenberg5_perturbed",
            &heis(5),
            &perturbed("[[1, 0, 0], [0, 0, 1]]", 2, 5),
            3,
        ),
        case(
            "symmetric4_alternating",
            r#"{"type": "symmetric", "n": 4}"#,
            &sub("[[1, 1, 0, 0], [1, 0, 1, 0]]"),
            2,
        ),
        case(
            "symmetric5_transposition_ball",
            r#"{"type": "symmetric", "n": 5}"#,
            &ball("[[1, 0, 0, 0, 0], [0, 1, 0, 0, 0], [0, 0, 1, 0, 0]]", 2),
            1,
        ),
        case(
            "product_cyclic6_dihedral4",
            r#"{"type": "direct_product", "factors": [{"type": "cyclic", "n": 6}, {"type": "dihedral", "n": 4}]}"#,
            &ball("[[1, 0, 0], [0, 1, 0], [0, 0, 1]]", 2),
            2,
        ),
        case(
            "table_cyclic6",
            r#"{"type": "table", "identity": 0, "table": [[0,1,2,3,4,5],[1,2,3,4,5,0],[2,3,4,5,0,1],[3,4,5,0,1,2],[4,5,0,1,2,3],[5,0,1,2,3,4]]}"#,
            r#"{"type": "explicit", "elements": [0, 1, 2]}"#,
            3,
        ),
    ]
}

/// Groups used for randomized checks.
pub fn backends() -> Vec<Arc<GroupContext>> {
    let specs = [
        GroupSpec::Cyclic { n: 30 },
        GroupSpec::Cyclic { n: 97 },
        GroupSpec::Dihedral { n: 9 },
        GroupSpec::Dihedral { n: 16 },
        GroupSpec::Symmetric { n: 4 },
        GroupSpec::Symmetric { n: 5 },
        GroupSpec::HeisenbergMod { p: 3 },
        GroupSpec::HeisenbergMod { p: 5 },
        GroupSpec::DirectProduct {
            factors: vec![GroupSpec::Cyclic { n: 4 }, GroupSpec::Dihedral { n: 3 }],
        },
    ];
    specs
        .into_iter()
        .map(|s| Arc::new(GroupContext::new(s).unwrap()))
        .collect()
}

/// Non-empty random subset of size at most `max`.
pub fn random_set(ctx: &Arc<GroupContext>, rng: &mut SplitMix, max: u64) -> GSet {
    let size = 1 + rng.below(max.min(ctx.order()));
    let codes: Vec<u64> = (0..size).map(|_| rng.below(ctx.order())).collect();
    GSet::from_codes(ctx, codes).unwrap()
}

/// Non-empty random subset of `a`.
pub fn random_subset(a: &GSet, rng: &mut SplitMix) -> GSet {
    let keep: Vec<_> = a.iter().filter(|_| rng.below(3) != 0).collect();
    if keep.is_empty() {
        GSet::new(a.ctx(), [a.elements()[0]]).unwrap()
    } else {
        GSet::new(a.ctx(), keep).unwrap()
    }
}
