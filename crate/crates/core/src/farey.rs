//! The Farey complex with exact slope arithmetic.
//!
//! Vertices are extended rationals `p/q` in lowest terms, two slopes are
//! adjacent when `|p·s − q·r| = 1`, and the complex is the flag completion of
//! that graph. Every edge lies in exactly two triangles, so triangles can be
//! walked by unfolding across edges, and the automorphism group (projectively,
//! `PGL(2, Z)`) acts simply transitively on ordered triangles.
//!
//! This is the curve complex of the four-holed sphere, and also the link of
//! every vertex of the tetrahedral complex built in [`crate::tet_tree`].

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest dual radius [`farey_ball`] accepts by default (`3·2^16 − 2` triangles).
pub const DEFAULT_FAREY_RADIUS_CAP: usize = 16;

/// A vertex of the Farey complex: a reduced fraction `num/den` with `den ≥ 0`.
///
/// The point at infinity is the single value `1/0`. Field equality is value
/// equality.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Slope {
    num: BigInt,
    den: BigInt,
}

impl Slope {
    /// Builds the canonical representative of `num/den`. Fails only on `0/0`.
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self> {
        let (num, den) = (num.into(), den.into());
        if den.is_zero() {
            if num.is_zero() {
                return Err(Error::InvalidSlope("0/0".into()));
            }
            return Ok(Self::infinity());
        }
        let g = num.gcd(&den);
        let (mut num, mut den) = (num / &g, den / &g);
        if den.is_negative() {
            num = -num;
            den = -den;
        }
        Ok(Slope { num, den })
    }

    pub fn infinity() -> Self {
        Slope {
            num: BigInt::one(),
            den: BigInt::zero(),
        }
    }

    pub fn zero() -> Self {
        Slope {
            num: BigInt::zero(),
            den: BigInt::one(),
        }
    }

    pub fn one() -> Self {
        Slope {
            num: BigInt::one(),
            den: BigInt::one(),
        }
    }

    pub fn num(&self) -> &BigInt {
        &self.num
    }

    pub fn den(&self) -> &BigInt {
        &self.den
    }

    pub fn is_infinity(&self) -> bool {
        self.den.is_zero()
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl fmt::Debug for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Slope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSlope(s.to_string());
        let (p, q) = match s.trim().split_once('/') {
            Some((p, q)) => (p.trim(), q.trim()),
            None => (s.trim(), "1"),
        };
        let p: BigInt = p.parse().map_err(|_| bad())?;
        let q: BigInt = q.parse().map_err(|_| bad())?;
        Slope::new(p, q).map_err(|_| bad())
    }
}

impl TryFrom<String> for Slope {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Slope> for String {
    fn from(s: Slope) -> String {
        s.to_string()
    }
}

fn cross(a: &Slope, b: &Slope) -> BigInt {
    &a.num * &b.den - &a.den * &b.num
}

/// True iff `|p·s − q·r| = 1` for `a = p/q`, `b = r/s`.
pub fn farey_adjacent(a: &Slope, b: &Slope) -> bool {
    cross(a, b).abs().is_one()
}

fn require_adjacent(a: &Slope, b: &Slope) -> Result<()> {
    if farey_adjacent(a, b) {
        Ok(())
    } else {
        Err(Error::NotFareyAdjacent(Box::new((a.clone(), b.clone()))))
    }
}

/// `(p+r)/(q+s)` for a Farey-adjacent pair.
pub fn mediant(a: &Slope, b: &Slope) -> Result<Slope> {
    require_adjacent(a, b)?;
    Slope::new(&a.num + &b.num, &a.den + &b.den)
}

/// The two slopes adjacent to both members of an adjacent pair, in ascending order.
///
/// These are the mediant `(p+r)/(q+s)` and the difference slope `(p−r)/(q−s)`;
/// the latter collapses to `1/0` when `q = s`.
pub fn common_neighbors(a: &Slope, b: &Slope) -> Result<[Slope; 2]> {
    let m = mediant(a, b)?;
    let d = Slope::new(&a.num - &b.num, &a.den - &b.den)?;
    Ok(if m <= d { [m, d] } else { [d, m] })
}

/// An unordered Farey triangle; vertices are kept sorted.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize)]
#[serde(transparent)]
pub struct FareyTriangle([Slope; 3]);

impl FareyTriangle {
    pub fn new(a: Slope, b: Slope, c: Slope) -> Result<Self> {
        let mut v = [a, b, c];
        v.sort();
        if !(farey_adjacent(&v[0], &v[1]) && farey_adjacent(&v[0], &v[2]) && farey_adjacent(&v[1], &v[2])) {
            return Err(Error::NotATriangle(format!("{{{}, {}, {}}}", v[0], v[1], v[2])));
        }
        Ok(FareyTriangle(v))
    }

    /// The fundamental triangle `{0/1, 1/0, 1/1}`.
    pub fn base() -> Self {
        FareyTriangle([Slope::zero(), Slope::infinity(), Slope::one()])
    }

    pub fn vertices(&self) -> &[Slope; 3] {
        &self.0
    }

    pub fn contains(&self, s: &Slope) -> bool {
        self.0.contains(s)
    }

    /// Edges as `(edge, opposite vertex)`; edge `i` omits vertex `i`.
    pub fn edges(&self) -> [((&Slope, &Slope), &Slope); 3] {
        let v = &self.0;
        [
            ((&v[1], &v[2]), &v[0]),
            ((&v[0], &v[2]), &v[1]),
            ((&v[0], &v[1]), &v[2]),
        ]
    }

    fn opposite(&self, a: &Slope, b: &Slope) -> Result<&Slope> {
        if a == b || !self.contains(a) || !self.contains(b) {
            return Err(Error::EdgeNotInTriangle(Box::new((a.clone(), b.clone()))));
        }
        Ok(self
            .0
            .iter()
            .find(|s| *s != a && *s != b)
            .expect("three distinct vertices"))
    }
}

/// A Farey triangle with a chosen order on its vertices.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct OrderedFareyTriangle([Slope; 3]);

impl OrderedFareyTriangle {
    pub fn new(a: Slope, b: Slope, c: Slope) -> Result<Self> {
        FareyTriangle::new(a.clone(), b.clone(), c.clone())?;
        Ok(OrderedFareyTriangle([a, b, c]))
    }

    /// `(0/1, 1/0, 1/1)`.
    pub fn base() -> Self {
        OrderedFareyTriangle([Slope::zero(), Slope::infinity(), Slope::one()])
    }

    pub fn vertices(&self) -> &[Slope; 3] {
        &self.0
    }

    pub fn unordered(&self) -> FareyTriangle {
        let mut v = self.0.clone();
        v.sort();
        FareyTriangle(v)
    }
}

/// The other triangle containing `edge`.
pub fn triangle_unfold(t: &FareyTriangle, edge: (&Slope, &Slope)) -> Result<FareyTriangle> {
    let third = t.opposite(edge.0, edge.1)?;
    let [n0, n1] = common_neighbors(edge.0, edge.1)?;
    let fresh = if &n0 == third { n1 } else { n0 };
    FareyTriangle::new(edge.0.clone(), edge.1.clone(), fresh)
}

/// The triangles within a given dual distance of a base triangle.
///
/// `triangles` is in breadth-first order; `depth[i]` is the dual distance of
/// `triangles[i]` from the base.
#[derive(Clone, Debug)]
pub struct FareyPatch {
    radius: usize,
    triangles: Vec<FareyTriangle>,
    depth: Vec<usize>,
    index: HashMap<FareyTriangle, usize>,
}

impl FareyPatch {
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn triangles(&self) -> &[FareyTriangle] {
        &self.triangles
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn contains(&self, t: &FareyTriangle) -> bool {
        self.index.contains_key(t)
    }

    pub fn depth_of(&self, t: &FareyTriangle) -> Option<usize> {
        self.index.get(t).map(|&i| self.depth[i])
    }

    /// Every slope appearing in the patch, sorted.
    pub fn slopes(&self) -> Vec<Slope> {
        let mut out: Vec<Slope> = self.triangles.iter().flat_map(|t| t.0.iter().cloned()).collect();
        out.sort();
        out.dedup();
        out
    }

    /// `{"radius": n, "triangles": [["0/1","1/0","1/1"], …]}`
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "radius": self.radius,
            "triangles": self.triangles,
        })
    }
}

/// Breadth-first window of `3·2^n − 2` triangles around `base`.
pub fn farey_ball(base: &FareyTriangle, n: usize) -> Result<FareyPatch> {
    farey_ball_capped(base, n, DEFAULT_FAREY_RADIUS_CAP)
}

pub fn farey_ball_capped(base: &FareyTriangle, n: usize, cap: usize) -> Result<FareyPatch> {
    if n > cap {
        return Err(Error::RadiusCap { radius: n, cap });
    }
    let mut patch = FareyPatch {
        radius: n,
        triangles: vec![base.clone()],
        depth: vec![0],
        index: HashMap::from([(base.clone(), 0)]),
    };
    let mut head = 0;
    while head < patch.triangles.len() {
        let d = patch.depth[head];
        if d < n {
            let t = patch.triangles[head].clone();
            for (edge, _) in t.edges() {
                let next = triangle_unfold(&t, edge)?;
                if !patch.index.contains_key(&next) {
                    patch.index.insert(next.clone(), patch.triangles.len());
                    patch.triangles.push(next);
                    patch.depth.push(d + 1);
                }
            }
        }
        head += 1;
    }
    Ok(patch)
}

/// A finite slope-to-slope map.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct SlopeMap(BTreeMap<Slope, Slope>);

impl SlopeMap {
    pub fn get(&self, s: &Slope) -> Option<&Slope> {
        self.0.get(s)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Slope, &Slope)> {
        self.0.iter()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|(k, v)| k == v)
    }

    /// `other ∘ self` on the slopes where both are defined.
    pub fn then(&self, other: &SlopeMap) -> SlopeMap {
        SlopeMap(
            self.0
                .iter()
                .filter_map(|(k, v)| other.get(v).map(|w| (k.clone(), w.clone())))
                .collect(),
        )
    }
}

/// The unique simplicial map on `domain`'s slopes sending `src` to `dst` slot by slot.
///
/// Built by unfolding triangles in parallel on both sides. The image is
/// computed exactly, so it is never limited by a codomain window; see
/// [`ordered_triangle_map_into`] for the windowed variant.
pub fn ordered_triangle_map(
    src: &OrderedFareyTriangle,
    dst: &OrderedFareyTriangle,
    domain: &FareyPatch,
) -> Result<SlopeMap> {
    propagate(src, dst, domain, None)
}

/// As [`ordered_triangle_map`], but every image triangle must lie in `codomain`.
pub fn ordered_triangle_map_into(
    src: &OrderedFareyTriangle,
    dst: &OrderedFareyTriangle,
    domain: &FareyPatch,
    codomain: &FareyPatch,
) -> Result<SlopeMap> {
    propagate(src, dst, domain, Some(codomain))
}

fn propagate(
    src: &OrderedFareyTriangle,
    dst: &OrderedFareyTriangle,
    domain: &FareyPatch,
    codomain: Option<&FareyPatch>,
) -> Result<SlopeMap> {
    let start = src.unordered();
    if !domain.contains(&start) {
        return Err(Error::OutsideDomain);
    }
    let check = |t: &FareyTriangle| match codomain {
        Some(c) if !c.contains(t) => Err(Error::CodomainTooSmall(format!(
            "image triangle {:?} is outside the radius-{} codomain patch",
            t.0,
            c.radius()
        ))),
        _ => Ok(()),
    };
    check(&dst.unordered())?;

    let mut map: BTreeMap<Slope, Slope> = src.0.iter().cloned().zip(dst.0.iter().cloned()).collect();
    let mut seen = vec![false; domain.len()];
    seen[domain.index[&start]] = true;
    let mut queue = VecDeque::from([(start, dst.unordered())]);
    while let Some((t, image)) = queue.pop_front() {
        for (edge, _) in t.edges() {
            let next = triangle_unfold(&t, edge)?;
            let Some(&i) = domain.index.get(&next) else {
                continue;
            };
            if seen[i] {
                continue;
            }
            seen[i] = true;
            let (ia, ib) = (map[edge.0].clone(), map[edge.1].clone());
            let next_image = triangle_unfold(&image, (&ia, &ib))?;
            check(&next_image)?;
            let fresh = next.opposite(edge.0, edge.1)?.clone();
            let fresh_image = next_image.opposite(&ia, &ib)?.clone();
            if let Some(prev) = map.insert(fresh.clone(), fresh_image.clone()) {
                debug_assert_eq!(prev, fresh_image, "inconsistent propagation at {fresh}");
            }
            queue.push_back((next, next_image));
        }
    }
    Ok(SlopeMap(map))
}

/// A 2×2 integer matrix `[[a, b], [c, d]]` acting by `p/q ↦ (a·p + b·q)/(c·p + d·q)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Matrix2 {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub d: BigInt,
}

impl Matrix2 {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>, c: impl Into<BigInt>, d: impl Into<BigInt>) -> Self {
        Matrix2 {
            a: a.into(),
            b: b.into(),
            c: c.into(),
            d: d.into(),
        }
    }

    pub fn identity() -> Self {
        Matrix2::new(1, 0, 0, 1)
    }

    pub fn det(&self) -> BigInt {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn mul(&self, o: &Matrix2) -> Matrix2 {
        Matrix2 {
            a: &self.a * &o.a + &self.b * &o.c,
            b: &self.a * &o.b + &self.b * &o.d,
            c: &self.c * &o.a + &self.d * &o.c,
            d: &self.c * &o.b + &self.d * &o.d,
        }
    }

    /// Adjugate; a projective inverse whenever `det = ±1`.
    pub fn adjugate(&self) -> Matrix2 {
        Matrix2 {
            a: self.d.clone(),
            b: -&self.b,
            c: -&self.c,
            d: self.a.clone(),
        }
    }

    /// The matrix taking `(0/1, 1/0, 1/1)` to `t` slot by slot.
    fn from_base(t: &OrderedFareyTriangle) -> Matrix2 {
        let [s0, s1, s2] = &t.0;
        let plus = Slope::new(&s1.num + &s0.num, &s1.den + &s0.den).ok();
        let sign = if plus.as_ref() == Some(s2) { 1 } else { -1 };
        Matrix2 {
            a: s1.num.clone(),
            b: &s0.num * sign,
            c: s1.den.clone(),
            d: &s0.den * sign,
        }
    }

    /// The matrix whose fractional-linear action sends `src` to `dst` slot by slot.
    pub fn between(src: &OrderedFareyTriangle, dst: &OrderedFareyTriangle) -> Matrix2 {
        Matrix2::from_base(dst).mul(&Matrix2::from_base(src).adjugate())
    }
}

/// Independent fractional-linear evaluation, used to cross-check propagation.
pub fn mobius_oracle(m: &Matrix2, s: &Slope) -> Result<Slope> {
    let det = m.det();
    if !det.abs().is_one() {
        return Err(Error::NotUnimodular(det.to_string()));
    }
    Slope::new(&m.a * &s.num + &m.b * &s.den, &m.c * &s.num + &m.d * &s.den)
}
