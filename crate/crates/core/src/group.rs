//! Finite groups with a dense canonical encoding.
//!
//! Every backend numbers its elements `0..order` so that the numeric order of
//! the code equals the lexicographic order of the per-backend component tuple:
//!
//! | backend            | components            | code                         |
//! |--------------------|-----------------------|------------------------------|
//! | `cyclic(n)`        | `[r]`                 | `r`                          |
//! | `dihedral(n)`      | `[rotation, flip]`    | `2*rotation + flip`          |
//! | `symmetric(n)`     | Lehmer digits `[d0..]`| rank of the Lehmer code      |
//! | `heisenberg_mod(p)`| `[a, b, c]`           | `(a*p + b)*p + c`            |
//! | `direct_product`   | concatenation         | mixed radix, first factor high |
//! | `table`            | `[row]`               | `row`                        |
//!
//! Dihedral elements are `r^rotation s^flip` with `s r = r^-1 s`. Heisenberg
//! elements are the unitriangular matrices `[[1,a,c],[0,1,b],[0,0,1]]` mod `p`.
//! Permutations compose right to left: `(x*y)(i) = x(y(i))`.

use std::env;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prng::SplitMix;

/// Environment variable that overrides [`Limits::pair_budget`].
pub const BUDGET_ENV: &str = "SYMGROWTH_BUDGET_PAIRS";

pub const DEFAULT_PAIR_BUDGET: u64 = 100_000_000;
pub const DEFAULT_MAX_SYMMETRIC_DEGREE: u32 = 10;
/// Hard ceiling: 20! is the largest factorial that fits in a u64.
pub const MAX_SYMMETRIC_DEGREE: u32 = 20;

const FULL_ASSOCIATIVITY_CHECK: usize = 512;
const SAMPLED_ASSOCIATIVITY_TRIPLES: usize = 100_000;
const ENUMERATION_LIMIT: u64 = 1 << 24;

/// An element of a finite group, identified by its canonical code.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement(u64);

impl GroupElement {
    #[inline]
    pub fn code(self) -> u64 {
        self.0
    }

    #[inline]
    pub(crate) fn from_code(code: u64) -> GroupElement {
        GroupElement(code)
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Resource limits shared by every computation on a context.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Maximum number of element pairs a single product or convolution may touch.
    pub pair_budget: u64,
    pub max_symmetric_degree: u32,
}

impl Default for Limits {
    fn default() -> Limits {
        Limits {
            pair_budget: DEFAULT_PAIR_BUDGET,
            max_symmetric_degree: DEFAULT_MAX_SYMMETRIC_DEGREE,
        }
    }
}

impl Limits {
    /// Defaults, with the pair budget taken from `SYMGROWTH_BUDGET_PAIRS` when set.
    pub fn from_env() -> Result<Limits> {
        let mut limits = Limits::default();
        if let Ok(raw) = env::var(BUDGET_ENV) {
            limits.pair_budget = raw.trim().parse().map_err(|_| {
                Error::ParameterRange(format!("{BUDGET_ENV} must be a positive integer, got {raw:?}"))
            })?;
            if limits.pair_budget == 0 {
                return Err(Error::ParameterRange(format!("{BUDGET_ENV} must be positive")));
            }
        }
        Ok(limits)
    }

    pub(crate) fn check_pairs(&self, what: &'static str, needed: u128) -> Result<()> {
        if needed > self.pair_budget as u128 {
            return Err(Error::ResourceExceeded {
                what,
                needed,
                budget: self.pair_budget,
            });
        }
        Ok(())
    }
}

/// Serialized description of a group, the `"group"` fragment of an instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupSpec {
    Cyclic { n: u64 },
    Dihedral { n: u64 },
    Symmetric { n: u32 },
    HeisenbergMod { p: u64 },
    DirectProduct { factors: Vec<GroupSpec> },
    Table { table: Vec<Vec<u32>>, identity: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Backend {
    Cyclic { n: u64 },
    Dihedral { n: u64 },
    Symmetric(Symmetric),
    Heisenberg { p: u64 },
    Product(Product),
    Table(CayleyTable),
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Symmetric {
    n: usize,
    /// `fact[i] = i!`
    fact: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Product {
    factors: Vec<Backend>,
    orders: Vec<u64>,
    /// `strides[i]` is the product of the orders of factors after `i`.
    strides: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct CayleyTable {
    n: usize,
    entries: Vec<u32>,
    identity: u32,
    inverses: Vec<u32>,
}

/// An immutable finite group together with the limits its computations obey.
///
/// Contexts compare equal when their groups do; limits are not part of identity.
#[derive(Clone, Debug)]
pub struct GroupContext {
    spec: GroupSpec,
    backend: Backend,
    order: u64,
    limits: Limits,
}

impl PartialEq for GroupContext {
    fn eq(&self, other: &GroupContext) -> bool {
        self.backend == other.backend
    }
}

impl Eq for GroupContext {}

impl GroupContext {
    pub fn new(spec: GroupSpec) -> Result<GroupContext> {
        GroupContext::with_limits(spec, Limits::default())
    }

    pub fn with_limits(spec: GroupSpec, limits: Limits) -> Result<GroupContext> {
        let backend = Backend::build(&spec, &limits)?;
        let order = backend.order()?;
        Ok(GroupContext {
            spec,
            backend,
            order,
            limits,
        })
    }

    pub fn cyclic(n: u64) -> Result<GroupContext> {
        GroupContext::new(GroupSpec::Cyclic { n })
    }

    pub fn dihedral(n: u64) -> Result<GroupContext> {
        GroupContext::new(GroupSpec::Dihedral { n })
    }

    pub fn symmetric(n: u32) -> Result<GroupContext> {
        GroupContext::new(GroupSpec::Symmetric { n })
    }

    pub fn heisenberg_mod(p: u64) -> Result<GroupContext> {
        GroupContext::new(GroupSpec::HeisenbergMod { p })
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn limits(&self) -> &Limits {
        &self.limits
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Number of integers in the component encoding of one element.
    pub fn width(&self) -> usize {
        self.backend.width()
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement(self.backend.identity())
    }

    pub fn is_valid(&self, x: GroupElement) -> bool {
        x.0 < self.order
    }

    pub fn check(&self, x: GroupElement) -> Result<GroupElement> {
        if self.is_valid(x) {
            Ok(x)
        } else {
            Err(Error::InvalidElement(format!(
                "code {} out of range for a group of order {}",
                x.0, self.order
            )))
        }
    }

    pub fn element(&self, code: u64) -> Result<GroupElement> {
        self.check(GroupElement(code))
    }

    /// Group law with validation of both operands.
    pub fn multiply(&self, x: GroupElement, y: GroupElement) -> Result<GroupElement> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.op(x, y))
    }

    pub fn inverse(&self, x: GroupElement) -> Result<GroupElement> {
        self.check(x)?;
        Ok(self.inv(x))
    }

    /// Unchecked group law; operands must be valid for this context.
    #[inline]
    pub fn op(&self, x: GroupElement, y: GroupElement) -> GroupElement {
        debug_assert!(self.is_valid(x) && self.is_valid(y));
        GroupElement(self.backend.mul(x.0, y.0))
    }

    #[inline]
    pub fn inv(&self, x: GroupElement) -> GroupElement {
        debug_assert!(self.is_valid(x));
        GroupElement(self.backend.inv(x.0))
    }

    pub fn components(&self, x: GroupElement) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.width());
        self.backend.components(x.0, &mut out);
        out
    }

    pub fn from_components(&self, parts: &[u64]) -> Result<GroupElement> {
        if parts.len() != self.width() {
            return Err(Error::InvalidElement(format!(
                "expected {} components, got {}",
                self.width(),
                parts.len()
            )));
        }
        self.backend.from_components(parts).map(GroupElement)
    }

    /// All elements in canonical order. Refused for very large groups.
    pub fn elements(&self) -> Result<impl Iterator<Item = GroupElement>> {
        if self.order > ENUMERATION_LIMIT {
            return Err(Error::ResourceExceeded {
                what: "group enumeration",
                needed: self.order as u128,
                budget: ENUMERATION_LIMIT,
            });
        }
        Ok((0..self.order).map(GroupElement))
    }

    /// Builds a permutation from its images `[p(0), .., p(n-1)]`.
    pub fn permutation(&self, images: &[usize]) -> Result<GroupElement> {
        match &self.backend {
            Backend::Symmetric(s) => s.encode_images(images).map(GroupElement),
            _ => Err(Error::InvalidElement("not a symmetric group".into())),
        }
    }

    /// Builds a permutation from 1-based disjoint cycles, e.g. `[[1, 2, 3]]`.
    pub fn permutation_from_cycles(&self, cycles: &[&[usize]]) -> Result<GroupElement> {
        let Backend::Symmetric(s) = &self.backend else {
            return Err(Error::InvalidElement("not a symmetric group".into()));
        };
        let mut images: Vec<usize> = (0..s.n).collect();
        for cycle in cycles {
            for (i, &point) in cycle.iter().enumerate() {
                let next = cycle[(i + 1) % cycle.len()];
                if point == 0 || point > s.n || next == 0 || next > s.n {
                    return Err(Error::InvalidElement(format!(
                        "cycle point out of range in {cycle:?}"
                    )));
                }
                images[point - 1] = next - 1;
            }
        }
        s.encode_images(&images).map(GroupElement)
    }

    pub fn permutation_images(&self, x: GroupElement) -> Result<Vec<usize>> {
        self.check(x)?;
        match &self.backend {
            Backend::Symmetric(s) => Ok(s.decode(x.0)),
            _ => Err(Error::InvalidElement("not a symmetric group".into())),
        }
    }
}

impl Backend {
    fn build(spec: &GroupSpec, limits: &Limits) -> Result<Backend> {
        Ok(match spec {
            GroupSpec::Cyclic { n } => {
                if *n == 0 {
                    return Err(Error::InvalidGroup("cyclic order must be at least 1".into()));
                }
                Backend::Cyclic { n: *n }
            }
            GroupSpec::Dihedral { n } => {
                if *n == 0 || *n > u64::MAX / 2 {
                    return Err(Error::InvalidGroup(format!(
                        "dihedral parameter {n} out of range"
                    )));
                }
                Backend::Dihedral { n: *n }
            }
            GroupSpec::Symmetric { n } => {
                let cap = limits.max_symmetric_degree.min(MAX_SYMMETRIC_DEGREE);
                if *n == 0 || *n > cap {
                    return Err(Error::InvalidGroup(format!(
                        "symmetric degree {n} outside 1..={cap}"
                    )));
                }
                let n = *n as usize;
                let mut fact = vec![1u64; n + 1];
                for i in 1..=n {
                    fact[i] = fact[i - 1] * i as u64;
                }
                Backend::Symmetric(Symmetric { n, fact })
            }
            GroupSpec::HeisenbergMod { p } => {
                if *p < 2 || p.checked_pow(3).is_none() {
                    return Err(Error::InvalidGroup(format!(
                        "heisenberg modulus {p} out of range"
                    )));
                }
                Backend::Heisenberg { p: *p }
            }
            GroupSpec::DirectProduct { factors } => {
                if factors.is_empty() {
                    return Err(Error::InvalidGroup(
                        "direct product needs at least one factor".into(),
                    ));
                }
                let factors = factors
                    .iter()
                    .map(|f| Backend::build(f, limits))
                    .collect::<Result<Vec<_>>>()?;
                let orders = factors.iter().map(Backend::order).collect::<Result<Vec<_>>>()?;
                let mut strides = vec![1u64; orders.len()];
                for i in (0..orders.len().saturating_sub(1)).rev() {
                    strides[i] = strides[i + 1].checked_mul(orders[i + 1]).ok_or_else(|| {
                        Error::InvalidGroup("direct product order overflows 64 bits".into())
                    })?;
                }
                strides[0]
                    .checked_mul(orders[0])
                    .ok_or_else(|| Error::InvalidGroup("direct product order overflows 64 bits".into()))?;
                Backend::Product(Product {
                    factors,
                    orders,
                    strides,
                })
            }
            GroupSpec::Table { table, identity } => Backend::Table(CayleyTable::load(table, *identity)?),
        })
    }

    fn order(&self) -> Result<u64> {
        Ok(match self {
            Backend::Cyclic { n } => *n,
            Backend::Dihedral { n } => 2 * n,
            Backend::Symmetric(s) => s.fact[s.n],
            Backend::Heisenberg { p } => p * p * p,
            Backend::Product(prod) => prod.strides[0]
                .checked_mul(prod.orders[0])
                .ok_or_else(|| Error::InvalidGroup("direct product order overflows 64 bits".into()))?,
            Backend::Table(t) => t.n as u64,
        })
    }

    fn width(&self) -> usize {
        match self {
            Backend::Cyclic { .. } | Backend::Table(_) => 1,
            Backend::Dihedral { .. } => 2,
            Backend::Symmetric(s) => s.n,
            Backend::Heisenberg { .. } => 3,
            Backend::Product(prod) => prod.factors.iter().map(Backend::width).sum(),
        }
    }

    fn identity(&self) -> u64 {
        match self {
            Backend::Cyclic { .. } | Backend::Dihedral { .. } | Backend::Heisenberg { .. } => 0,
            // the identity permutation has Lehmer code 0
            Backend::Symmetric(_) => 0,
            Backend::Product(prod) => prod
                .factors
                .iter()
                .zip(&prod.strides)
                .map(|(f, s)| f.identity() * s)
                .sum(),
            Backend::Table(t) => t.identity as u64,
        }
    }

    fn mul(&self, x: u64, y: u64) -> u64 {
        match self {
            Backend::Cyclic { n } => ((x as u128 + y as u128) % *n as u128) as u64,
            Backend::Dihedral { n } => {
                let (xr, xf) = (x >> 1, x & 1);
                let (yr, yf) = (y >> 1, y & 1);
                // r^a s^f r^b s^g = r^(a + (-1)^f b) s^(f+g)
                let r = if xf == 0 {
                    (xr as u128 + yr as u128) % *n as u128
                } else {
                    (xr as u128 + *n as u128 - yr as u128) % *n as u128
                };
                ((r as u64) << 1) | (xf ^ yf)
            }
            Backend::Symmetric(s) => {
                let px = s.decode(x);
                let py = s.decode(y);
                let composed: Vec<usize> = py.iter().map(|&i| px[i]).collect();
                s.encode_unchecked(&composed)
            }
            Backend::Heisenberg { p } => {
                let p = *p as u128;
                let (xa, xb, xc) = heis_split(x as u128, p);
                let (ya, yb, yc) = heis_split(y as u128, p);
                let a = (xa + ya) % p;
                let b = (xb + yb) % p;
                let c = (xc + yc + xa * yb) % p;
                ((a * p + b) * p + c) as u64
            }
            Backend::Product(prod) => {
                let mut out = 0u64;
                for (i, f) in prod.factors.iter().enumerate() {
                    let xi = (x / prod.strides[i]) % prod.orders[i];
                    let yi = (y / prod.strides[i]) % prod.orders[i];
                    out += f.mul(xi, yi) * prod.strides[i];
                }
                out
            }
            Backend::Table(t) => t.entries[x as usize * t.n + y as usize] as u64,
        }
    }

    fn inv(&self, x: u64) -> u64 {
        match self {
            Backend::Cyclic { n } => (n - x % n) % n,
            Backend::Dihedral { n } => {
                if x & 1 == 1 {
                    // reflections are involutions
                    x
                } else {
                    let r = x >> 1;
                    ((n - r) % n) << 1
                }
            }
            Backend::Symmetric(s) => {
                let px = s.decode(x);
                let mut inv = vec![0usize; s.n];
                for (i, &j) in px.iter().enumerate() {
                    inv[j] = i;
                }
                s.encode_unchecked(&inv)
            }
            Backend::Heisenberg { p } => {
                let p = *p as u128;
                let (a, b, c) = heis_split(x as u128, p);
                let na = (p - a) % p;
                let nb = (p - b) % p;
                // (a,b,c)^-1 = (-a, -b, ab - c)
                let nc = (a * b % p + p - c) % p;
                ((na * p + nb) * p + nc) as u64
            }
            Backend::Product(prod) => {
                let mut out = 0u64;
                for (i, f) in prod.factors.iter().enumerate() {
                    let xi = (x / prod.strides[i]) % prod.orders[i];
                    out += f.inv(xi) * prod.strides[i];
                }
                out
            }
            Backend::Table(t) => t.inverses[x as usize] as u64,
        }
    }

    fn components(&self, x: u64, out: &mut Vec<u64>) {
        match self {
            Backend::Cyclic { .. } | Backend::Table(_) => out.push(x),
            Backend::Dihedral { .. } => {
                out.push(x >> 1);
                out.push(x & 1);
            }
            Backend::Symmetric(s) => out.extend(s.lehmer_digits(x)),
            Backend::Heisenberg { p } => {
                let (a, b, c) = heis_split(x as u128, *p as u128);
                out.extend([a as u64, b as u64, c as u64]);
            }
            Backend::Product(prod) => {
                for (i, f) in prod.factors.iter().enumerate() {
                    f.components((x / prod.strides[i]) % prod.orders[i], out);
                }
            }
        }
    }

    fn from_components(&self, parts: &[u64]) -> Result<u64> {
        let bad = |why: String| Error::InvalidElement(why);
        match self {
            Backend::Cyclic { n } => {
                if parts[0] >= *n {
                    return Err(bad(format!("residue {} not below {n}", parts[0])));
                }
                Ok(parts[0])
            }
            Backend::Table(t) => {
                if parts[0] >= t.n as u64 {
                    return Err(bad(format!("row {} not below {}", parts[0], t.n)));
                }
                Ok(parts[0])
            }
            Backend::Dihedral { n } => {
                if parts[0] >= *n || parts[1] > 1 {
                    return Err(bad(format!("dihedral components {parts:?} out of range")));
                }
                Ok((parts[0] << 1) | parts[1])
            }
            Backend::Symmetric(s) => {
                let mut code = 0u64;
                for (i, &d) in parts.iter().enumerate() {
                    if d >= (s.n - i) as u64 {
                        return Err(bad(format!("Lehmer digit {d} at position {i} out of range")));
                    }
                    code += d * s.fact[s.n - 1 - i];
                }
                Ok(code)
            }
            Backend::Heisenberg { p } => {
                if parts.iter().any(|&v| v >= *p) {
                    return Err(bad(format!("heisenberg entries {parts:?} not reduced mod {p}")));
                }
                Ok((parts[0] * p + parts[1]) * p + parts[2])
            }
            Backend::Product(prod) => {
                let mut code = 0u64;
                let mut offset = 0;
                for (i, f) in prod.factors.iter().enumerate() {
                    let w = f.width();
                    code += f.from_components(&parts[offset..offset + w])? * prod.strides[i];
                    offset += w;
                }
                Ok(code)
            }
        }
    }
}

#[inline]
fn heis_split(x: u128, p: u128) -> (u128, u128, u128) {
    (x / (p * p), (x / p) % p, x % p)
}

impl Symmetric {
    fn lehmer_digits(&self, code: u64) -> Vec<u64> {
        (0..self.n)
            .map(|i| (code / self.fact[self.n - 1 - i]) % (self.n - i) as u64)
            .collect()
    }

    fn decode(&self, code: u64) -> Vec<usize> {
        let mut remaining: Vec<usize> = (0..self.n).collect();
        self.lehmer_digits(code)
            .into_iter()
            .map(|d| remaining.remove(d as usize))
            .collect()
    }

    fn encode_unchecked(&self, images: &[usize]) -> u64 {
        let mut code = 0u64;
        for i in 0..self.n {
            let smaller_after = images[i + 1..].iter().filter(|&&v| v < images[i]).count() as u64;
            code += smaller_after * self.fact[self.n - 1 - i];
        }
        code
    }

    fn encode_images(&self, images: &[usize]) -> Result<u64> {
        if images.len() != self.n {
            return Err(Error::InvalidElement(format!(
                "permutation of length {} in symmetric({})",
                images.len(),
                self.n
            )));
        }
        let mut seen = vec![false; self.n];
        for &v in images {
            if v >= self.n || seen[v] {
                return Err(Error::InvalidElement(format!("{images:?} is not a permutation")));
            }
            seen[v] = true;
        }
        Ok(self.encode_unchecked(images))
    }
}

impl CayleyTable {
    fn load(rows: &[Vec<u32>], identity: u32) -> Result<CayleyTable> {
        let n = rows.len();
        let bad = |why: String| Error::InvalidGroup(format!("cayley table: {why}"));
        if n == 0 {
            return Err(bad("empty table".into()));
        }
        if n > u32::MAX as usize {
            return Err(bad("too many rows".into()));
        }
        if identity as usize >= n {
            return Err(bad(format!("identity {identity} out of range")));
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(bad(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            if let Some(&v) = row.iter().find(|&&v| v as usize >= n) {
                return Err(bad(format!("entry {v} in row {i} out of range")));
            }
            entries.extend_from_slice(row);
        }
        let at = |x: usize, y: usize| entries[x * n + y] as usize;
        let e = identity as usize;
        for x in 0..n {
            if at(e, x) != x || at(x, e) != x {
                return Err(bad(format!("{identity} is not a two-sided identity at {x}")));
            }
        }
        let mut seen = vec![false; n];
        for x in 0..n {
            seen.iter_mut().for_each(|s| *s = false);
            for y in 0..n {
                if std::mem::replace(&mut seen[at(x, y)], true) {
                    return Err(bad(format!("row {x} repeats an entry")));
                }
            }
            seen.iter_mut().for_each(|s| *s = false);
            for y in 0..n {
                if std::mem::replace(&mut seen[at(y, x)], true) {
                    return Err(bad(format!("column {x} repeats an entry")));
                }
            }
        }
        let mut inverses = vec![0u32; n];
        for x in 0..n {
            let y = (0..n)
                .find(|&y| at(x, y) == e)
                .expect("latin rows contain the identity");
            if at(y, x) != e {
                return Err(bad(format!("left and right inverses of {x} differ")));
            }
            inverses[x] = y as u32;
        }
        let assoc = |x: usize, y: usize, z: usize| at(at(x, y), z) == at(x, at(y, z));
        if n <= FULL_ASSOCIATIVITY_CHECK {
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        if !assoc(x, y, z) {
                            return Err(bad(format!("not associative at ({x}, {y}, {z})")));
                        }
                    }
                }
            }
        } else {
            let mut rng = SplitMix::new(0x5eed_cafe);
            for _ in 0..SAMPLED_ASSOCIATIVITY_TRIPLES {
                let x = rng.below(n as u64) as usize;
                let y = rng.below(n as u64) as usize;
                let z = rng.below(n as u64) as usize;
                if !assoc(x, y, z) {
                    return Err(bad(format!("not associative at ({x}, {y}, {z})")));
                }
            }
        }
        Ok(CayleyTable {
            n,
            entries,
            identity,
            inverses,
        })
    }
}
