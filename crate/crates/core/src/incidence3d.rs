//! Points, lines and planes of F_q^3, the embedding `[a,b;c,d] ↦ (a,d,c)`,
//! incidence counting and plane richness.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::{Elem, FieldCtx};
use crate::plane::{Mat2, MatrixSet, Point2, Sl2};

/// Largest `q` for which [`plane_richness`] sweeps every plane.
pub const PLANE_SWEEP_LIMIT: u32 = 16;
/// Pair budget of the line-pair fallback used above [`PLANE_SWEEP_LIMIT`].
pub const PAIR_BUDGET: usize = 2_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Point3(pub [Elem; 3]);

impl Point3 {
    pub fn from_codes(x: u32, y: u32, z: u32) -> Self {
        Point3([Elem(x), Elem(y), Elem(z)])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|e| e.is_zero())
    }

    pub fn pack(&self, q: u32) -> usize {
        let q = q as usize;
        (self.0[0].0 as usize * q + self.0[1].0 as usize) * q + self.0[2].0 as usize
    }
}

impl fmt::Display for Point3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.0[0], self.0[1], self.0[2])
    }
}

fn add3(f: &FieldCtx, u: Point3, v: Point3) -> Point3 {
    Point3([
        f.add(u.0[0], v.0[0]),
        f.add(u.0[1], v.0[1]),
        f.add(u.0[2], v.0[2]),
    ])
}

fn sub3(f: &FieldCtx, u: Point3, v: Point3) -> Point3 {
    Point3([
        f.sub(u.0[0], v.0[0]),
        f.sub(u.0[1], v.0[1]),
        f.sub(u.0[2], v.0[2]),
    ])
}

fn scale3(f: &FieldCtx, s: Elem, v: Point3) -> Point3 {
    Point3(v.0.map(|x| f.mul(s, x)))
}

fn dot3(f: &FieldCtx, u: Point3, v: Point3) -> Elem {
    (0..3).fold(Elem::ZERO, |acc, i| f.add(acc, f.mul(u.0[i], v.0[i])))
}

fn cross3(f: &FieldCtx, u: Point3, v: Point3) -> Point3 {
    let [u0, u1, u2] = u.0;
    let [v0, v1, v2] = v.0;
    Point3([
        f.sub(f.mul(u1, v2), f.mul(u2, v1)),
        f.sub(f.mul(u2, v0), f.mul(u0, v2)),
        f.sub(f.mul(u0, v1), f.mul(u1, v0)),
    ])
}

/// `det[u v w]`.
pub fn det3(f: &FieldCtx, u: Point3, v: Point3, w: Point3) -> Elem {
    dot3(f, u, cross3(f, v, w))
}

/// Scales `v` so its first nonzero coordinate is 1; returns the scale and
/// that coordinate's index.
fn monic(f: &FieldCtx, v: Point3) -> Option<(Point3, Elem, usize)> {
    let j = v.0.iter().position(|x| !x.is_zero())?;
    let s = f.recip(v.0[j]);
    Some((scale3(f, s, v), s, j))
}

/// `(a, d, c)`.
pub fn f_map(m: &Mat2) -> Point3 {
    Point3([m.a, m.d, m.c])
}

/// The unique determinant-one matrix over `(a, d, c)` when `c != 0`.
pub fn f_preimage(f: &FieldCtx, p: Point3) -> Option<Mat2> {
    let [a, d, c] = p.0;
    if c.is_zero() {
        return None;
    }
    let b = f.mul(f.sub(f.mul(a, d), Elem::ONE), f.recip(c));
    Some(Mat2 { a, b, c, d })
}

/// An affine line `base + t·dir`, stored canonically: `dir` has leading
/// nonzero coordinate 1 at index `j` and `base[j] = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Line3 {
    base: Point3,
    dir: Point3,
}

impl Line3 {
    pub fn new(f: &FieldCtx, base: Point3, dir: Point3) -> Result<Self> {
        let (dir, _, j) = monic(f, dir).ok_or(Error::ZeroDirection)?;
        let base = sub3(f, base, scale3(f, base.0[j], dir));
        Ok(Line3 { base, dir })
    }

    pub fn base(&self) -> Point3 {
        self.base
    }

    pub fn dir(&self) -> Point3 {
        self.dir
    }

    fn lead(&self) -> usize {
        self.dir
            .0
            .iter()
            .position(|x| !x.is_zero())
            .expect("canonical direction")
    }

    pub fn point_at(&self, f: &FieldCtx, t: Elem) -> Point3 {
        add3(f, self.base, scale3(f, t, self.dir))
    }

    pub fn points<'a>(&'a self, f: &'a FieldCtx) -> impl Iterator<Item = Point3> + 'a {
        f.elements().map(move |t| self.point_at(f, t))
    }

    /// Constant time: the parameter of `p` can only be `p[j]`.
    pub fn contains(&self, f: &FieldCtx, p: Point3) -> bool {
        self.point_at(f, p.0[self.lead()]) == p
    }
}

impl fmt::Display for Line3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+t{}", self.base, self.dir)
    }
}

/// Every line of F_q^3 in canonical form; there are `q^2 (q^2 + q + 1)`.
pub fn all_lines(f: &FieldCtx) -> impl Iterator<Item = Line3> + '_ {
    canonical_vectors(f).flat_map(move |dir| {
        let j = dir.0.iter().position(|x| !x.is_zero()).unwrap();
        f.elements().flat_map(move |s| {
            f.elements().map(move |t| {
                let mut base = [Elem::ZERO; 3];
                let free: Vec<usize> = (0..3).filter(|&i| i != j).collect();
                base[free[0]] = s;
                base[free[1]] = t;
                Line3 {
                    base: Point3(base),
                    dir,
                }
            })
        })
    })
}

/// Nonzero vectors whose first nonzero coordinate is 1, in lexicographic
/// order of `(1, *, *)`, `(0, 1, *)`, `(0, 0, 1)`.
fn canonical_vectors(f: &FieldCtx) -> impl Iterator<Item = Point3> + '_ {
    let a = f
        .elements()
        .flat_map(move |y| f.elements().map(move |z| Point3([Elem::ONE, y, z])));
    let b = f.elements().map(|z| Point3([Elem::ZERO, Elem::ONE, z]));
    a.chain(b)
        .chain(std::iter::once(Point3([Elem::ZERO, Elem::ZERO, Elem::ONE])))
}

/// The affine plane `{x : <normal, x> = offset}` with a monic normal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Plane3 {
    normal: Point3,
    offset: Elem,
}

impl Plane3 {
    pub fn new(f: &FieldCtx, normal: Point3, offset: Elem) -> Result<Self> {
        let (normal, s, _) = monic(f, normal).ok_or(Error::ZeroDirection)?;
        Ok(Plane3 {
            normal,
            offset: f.mul(s, offset),
        })
    }

    pub fn normal(&self) -> Point3 {
        self.normal
    }

    pub fn offset(&self) -> Elem {
        self.offset
    }

    /// All `q (q^2 + q + 1)` planes.
    pub fn all(f: &FieldCtx) -> impl Iterator<Item = Plane3> + '_ {
        canonical_vectors(f)
            .flat_map(move |normal| f.elements().map(move |offset| Plane3 { normal, offset }))
    }

    pub fn contains_point(&self, f: &FieldCtx, p: Point3) -> bool {
        dot3(f, self.normal, p) == self.offset
    }

    pub fn contains_line(&self, f: &FieldCtx, l: &Line3) -> bool {
        dot3(f, self.normal, l.dir).is_zero() && self.contains_point(f, l.base)
    }

    /// The plane spanned by two distinct coplanar lines.
    pub fn spanned_by(f: &FieldCtx, l1: &Line3, l2: &Line3) -> Option<Plane3> {
        let normal = match line_relation(f, l1, l2) {
            LineRelation::Parallel => cross3(f, l1.dir, sub3(f, l2.base, l1.base)),
            LineRelation::Intersecting => cross3(f, l1.dir, l2.dir),
            LineRelation::Equal | LineRelation::Skew => return None,
        };
        Plane3::new(f, normal, dot3(f, normal, l1.base)).ok()
    }
}

impl fmt::Display for Plane3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{},x>={}", self.normal, self.offset)
    }
}

/// The line `f({θ : θ m1 = m2})` for `m1 = (u1, v1)`, `m2 = (u2, v2)` with
/// `u1, u2 != 0` and `(v1, v2) != (0, 0)`:
/// base `(u2/u1, u1/u2, v2/u1 - v1/u2)`, direction
/// `(-v1/u1, v2/u2, -v1 v2/(u1 u2))`.
pub fn pair_line(f: &FieldCtx, m1: Point2, m2: Point2) -> Result<Line3> {
    let (u1, v1, u2, v2) = (m1.x, m1.y, m2.x, m2.y);
    if u1.is_zero() || u2.is_zero() {
        return Err(Error::PairLine("first coordinates must be nonzero"));
    }
    if v1.is_zero() && v2.is_zero() {
        return Err(Error::PairLine("second coordinates must not both vanish"));
    }
    let (i1, i2) = (f.recip(u1), f.recip(u2));
    let base = Point3([
        f.mul(u2, i1),
        f.mul(u1, i2),
        f.sub(f.mul(v2, i1), f.mul(v1, i2)),
    ]);
    let dir = Point3([
        f.neg(f.mul(v1, i1)),
        f.mul(v2, i2),
        f.neg(f.mul(f.mul(v1, v2), f.mul(i1, i2))),
    ]);
    Line3::new(f, base, dir)
}

/// `{θ ∈ SL2 : θ m1 = m2}` by filtering the whole group.
pub fn solution_set(f: &FieldCtx, m1: Point2, m2: Point2) -> Result<MatrixSet> {
    if m1.is_origin() || m2.is_origin() {
        return Err(Error::OriginHasNoLine);
    }
    Ok(Sl2::new(f)
        .filter(|m| m.apply(f, m1) == m2)?
        .into_iter()
        .collect())
}

/// `Σ_{ℓ ∈ L} |P ∩ ℓ|` by walking each line's `q` points against a hash set.
pub fn count_incidences(f: &FieldCtx, points: &HashSet<Point3>, lines: &[Line3]) -> u64 {
    lines
        .par_iter()
        .map(|l| l.points(f).filter(|p| points.contains(p)).count() as u64)
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LineRelation {
    Equal,
    Parallel,
    Intersecting,
    Skew,
}

pub fn line_relation(f: &FieldCtx, l1: &Line3, l2: &Line3) -> LineRelation {
    if l1 == l2 {
        LineRelation::Equal
    } else if l1.dir == l2.dir {
        LineRelation::Parallel
    } else if det3(f, l1.dir, l2.dir, sub3(f, l2.base, l1.base)).is_zero() {
        LineRelation::Intersecting
    } else {
        LineRelation::Skew
    }
}

/// For three distinct, pairwise parallel lines: whether they share a plane.
/// `None` when the lines are not distinct and pairwise parallel.
pub fn parallel_triple_coplanar(f: &FieldCtx, l1: &Line3, l2: &Line3, l3: &Line3) -> Option<bool> {
    let parallel = |a: &Line3, b: &Line3| line_relation(f, a, b) == LineRelation::Parallel;
    if !(parallel(l1, l2) && parallel(l1, l3) && parallel(l2, l3)) {
        return None;
    }
    let d = det3(
        f,
        l1.dir,
        sub3(f, l2.base, l1.base),
        sub3(f, l3.base, l1.base),
    );
    Some(d.is_zero())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Richness {
    /// Maximum number of lines of the family inside one plane.
    pub max_lines: usize,
    pub witness: Option<Plane3>,
    /// Set when the search may have missed the best plane.
    pub lower_bound_only: bool,
}

/// Plane richness: a full sweep of all planes when `q <= 16`, otherwise the
/// planes spanned by pairs of lines (capped at [`PAIR_BUDGET`] pairs).
pub fn plane_richness(f: &FieldCtx, lines: &[Line3]) -> Richness {
    if f.q() <= PLANE_SWEEP_LIMIT {
        plane_richness_sweep(f, lines)
    } else {
        plane_richness_pairs(f, lines, PAIR_BUDGET)
    }
}

pub fn plane_richness_sweep(f: &FieldCtx, lines: &[Line3]) -> Richness {
    let normals: Vec<Point3> = canonical_vectors(f).collect();
    let best = normals
        .par_iter()
        .map(|&normal| {
            let mut counts = vec![0usize; f.q() as usize];
            for l in lines {
                if dot3(f, normal, l.dir).is_zero() {
                    counts[dot3(f, normal, l.base).0 as usize] += 1;
                }
            }
            let (offset, &count) = counts
                .iter()
                .enumerate()
                .rev()
                .max_by_key(|(_, &c)| c)
                .expect("q >= 2");
            (
                count,
                Plane3 {
                    normal,
                    offset: Elem(offset as u32),
                },
            )
        })
        .collect::<Vec<_>>();
    // first plane (in sweep order) attaining the maximum
    let mut out = Richness {
        max_lines: 0,
        witness: None,
        lower_bound_only: false,
    };
    for (count, plane) in best {
        if count > out.max_lines {
            out.max_lines = count;
            out.witness = Some(plane);
        }
    }
    out
}

/// Any plane holding two or more lines is spanned by a pair of them, so with
/// enough budget this is exact.
pub fn plane_richness_pairs(f: &FieldCtx, lines: &[Line3], budget: usize) -> Richness {
    let distinct: Vec<Line3> = lines
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut out = Richness {
        max_lines: usize::from(!distinct.is_empty()),
        witness: None,
        lower_bound_only: false,
    };
    if let Some(l) = distinct.first() {
        out.witness = Plane3::all(f).find(|p| p.contains_line(f, l));
    }
    let mut seen = HashSet::new();
    let mut pairs = 0usize;
    'outer: for (i, l1) in distinct.iter().enumerate() {
        for l2 in &distinct[i + 1..] {
            if pairs == budget {
                out.lower_bound_only = true;
                break 'outer;
            }
            pairs += 1;
            if let Some(plane) = Plane3::spanned_by(f, l1, l2) {
                if seen.insert(plane) {
                    let count = distinct
                        .iter()
                        .filter(|l| plane.contains_line(f, l))
                        .count();
                    if count > out.max_lines {
                        out.max_lines = count;
                        out.witness = Some(plane);
                    }
                }
            }
        }
    }
    out
}

/// Multiplicity-class data attached to an instance built from a point set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClassData {
    pub m0: usize,
    pub m1: usize,
    /// Size of the line-class stabilizer whose image forms the point set.
    pub s_size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IncidenceInstance {
    pub q: u32,
    pub points: Vec<Point3>,
    pub lines: Vec<Line3>,
    pub incidences: u64,
    pub richness: Richness,
    pub class: Option<ClassData>,
}

impl IncidenceInstance {
    /// Deduplicates `points` and `lines`, then counts incidences and plane
    /// richness.
    pub fn new(
        f: &FieldCtx,
        points: impl IntoIterator<Item = Point3>,
        lines: impl IntoIterator<Item = Line3>,
    ) -> Self {
        let points: Vec<Point3> = points
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let lines: Vec<Line3> = lines
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let set: HashSet<Point3> = points.iter().copied().collect();
        let incidences = count_incidences(f, &set, &lines);
        let richness = plane_richness(f, &lines);
        IncidenceInstance {
            q: f.q(),
            points,
            lines,
            incidences,
            richness,
            class: None,
        }
    }

    pub fn with_class(mut self, class: ClassData) -> Self {
        self.class = Some(class);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IncidenceRow {
    pub name: &'static str,
    pub applicable: bool,
    pub observed: f64,
    pub rhs: f64,
    /// `observed / rhs`, the implied constant.
    pub ratio: Option<f64>,
}

impl IncidenceRow {
    fn new(name: &'static str, applicable: bool, observed: f64, rhs: f64) -> Self {
        let ratio = (rhs > 0.0).then(|| observed / rhs);
        IncidenceRow {
            name,
            applicable,
            observed,
            rhs,
            ratio,
        }
    }
}

/// Right-hand sides of the incidence bounds and their implied constants.
///
/// Rows:
/// - `richness`: `|P|^{1/2}|L|^{3/4}M^{1/4} + |P| + |L|`
/// - `deviation`: `|I - |P||L|/q^2|` against `q·sqrt(|P||L|)`
/// - `few_planar`: `|L||P|^{2/5} + |P|^{6/5}`, applicable when `M <= c·sqrt|L|`
/// - `balanced`: `(|P||L|)^{11/15}`, applicable when `|P|^{7/8} < |L| < |P|^{8/7}`
///
/// With class data attached, four more rows compare the stabilizer size `|S|`
/// with `16c²(m0 m1)^{3/2}`, `q² m1`, `(m0 m1)^{5/3}` and `m0^{7/4} m1^{11/4}`.
pub fn incidence_bound_report(inst: &IncidenceInstance, c: f64) -> Vec<IncidenceRow> {
    let np = inst.points.len() as f64;
    let nl = inst.lines.len() as f64;
    let m = inst.richness.max_lines as f64;
    let i = inst.incidences as f64;
    let q = inst.q as f64;

    let mut rows = vec![
        IncidenceRow::new(
            "richness",
            true,
            i,
            np.sqrt() * nl.powf(0.75) * m.powf(0.25) + np + nl,
        ),
        IncidenceRow::new(
            "deviation",
            true,
            (i - np * nl / (q * q)).abs(),
            q * (np * nl).sqrt(),
        ),
        IncidenceRow::new(
            "few_planar",
            m <= c * nl.sqrt(),
            i,
            nl * np.powf(0.4) + np.powf(1.2),
        ),
        IncidenceRow::new(
            "balanced",
            np.powf(7.0 / 8.0) < nl && nl < np.powf(8.0 / 7.0),
            i,
            (np * nl).powf(11.0 / 15.0),
        ),
    ];
    if let Some(cd) = inst.class {
        let (m0, m1, s) = (cd.m0 as f64, cd.m1 as f64, cd.s_size as f64);
        rows.push(IncidenceRow::new(
            "s_via_richness",
            true,
            s,
            16.0 * c * c * (m0 * m1).powf(1.5),
        ));
        rows.push(IncidenceRow::new("s_via_deviation", true, s, q * q * m1));
        rows.push(IncidenceRow::new(
            "s_via_few_planar",
            true,
            s,
            (m0 * m1).powf(5.0 / 3.0),
        ));
        rows.push(IncidenceRow::new(
            "s_via_balanced",
            true,
            s,
            m0.powf(1.75) * m1.powf(2.75),
        ));
    }
    rows
}
