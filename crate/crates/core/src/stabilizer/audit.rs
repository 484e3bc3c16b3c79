//! Triple-counting audit for one line-multiplicity class of `E`.
//!
//! For the `m0` lines meeting `E \ {0}` in exactly `m1` points, with
//! `E_j = ℓ_j ∩ E`, the audit builds
//!
//! - `S`: matrices permuting `{E_1, ..., E_m0}`, split into `S1` (moving the
//!   x-axis) and `S2` (fixing it);
//! - `B`: one base point per `E_j`, off the axes; `C`: `∪ E_j` off the axes;
//! - `Ω = {(u1, u2, θ) ∈ B × C × S : θ u1 = u2}`;
//! - `L`: the pair lines of `B × C` in F_q^3.
//!
//! It counts `Ω` directly and checks it against the incidence count
//! `I(L, f(S1))`, the lower bound `(m0 - 4)|S|`, `|B||C| <= m0² m1`, and the
//! plane richness `M(L) <= 2 m0`, together with the skew and parallel
//! configurations of pair lines sharing a base point.

use std::collections::HashSet;

use serde::Serialize;

use super::{line_intersections, stabilizer_fast};
use crate::error::{Error, Result};
use crate::gf::FieldCtx;
use crate::incidence3d::{
    count_incidences, f_map, line_relation, pair_line, parallel_triple_coplanar, plane_richness,
    ClassData, IncidenceInstance, Line3, LineRelation, Point3,
};
use crate::plane::{normalize_two_lines, Mat2, Point2, PointSet, ProjLine, Sl2};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RelationTally {
    pub checked: u64,
    pub failed: u64,
}

impl RelationTally {
    fn record(&mut self, ok: bool) {
        self.checked += 1;
        self.failed += u64::from(!ok);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassAudit {
    pub m0: usize,
    pub m1: usize,
    /// Change of coordinates applied to `E` before the audit.
    pub normalization: Mat2,
    /// The chosen `a_j`, smallest packed code in each `E_j` (normalized
    /// coordinates).
    pub base_points: Vec<Point2>,
    pub b_size: usize,
    pub c_size: usize,
    pub s_size: usize,
    pub s1_size: usize,
    pub s2_size: usize,
    pub r_e: usize,
    pub omega: u64,
    pub omega_s2: u64,
    pub omega_s1: u64,
    /// `I(L, f(S1))` from the incidence engine.
    pub incidence_part: u64,
    pub line_count: usize,
    pub plane_richness: usize,
    /// `(m0 - 4)|S|`.
    pub lower_bound: i64,
    /// `2c(m0^{7/4} m1^{3/4} |S|^{1/2} + m0² m1 + |S|)`.
    pub upper_rhs: f64,
    pub c: f64,
    pub stabilizer_contained: bool,
    /// `|S| <= 16c²(m0 m1)^{3/2}` at the supplied `c`; informational.
    pub s_within_bound: bool,
    /// Pair lines `ℓ_{u→v}`, `ℓ_{u→w}` with `v`, `w` on different lines
    /// through the origin, tested for being skew as affine lines. Such pairs
    /// can meet at a point with third coordinate 0, where the embedding is
    /// not injective, so failures here are reported but not violations.
    pub skew_pairs: RelationTally,
    /// The same pairs, tested for sharing no point with nonzero third
    /// coordinate.
    pub disjoint_on_image: RelationTally,
    /// Triples `ℓ_{u→v_i}` with collinear `v_i`; each should be pairwise
    /// parallel and not coplanar.
    pub parallel_triples: RelationTally,
}

impl ClassAudit {
    /// Names of the structural identities that failed.
    pub fn violations(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.stabilizer_contained {
            out.push("stabilizer_not_in_s");
        }
        if self.omega != self.omega_s2 + self.incidence_part {
            out.push("omega_decomposition");
        }
        if self.omega_s1 != self.incidence_part {
            out.push("incidence_mismatch");
        }
        if (self.omega as i64) < self.lower_bound {
            out.push("omega_lower_bound");
        }
        let bc = (self.b_size * self.c_size) as u64;
        if self.omega_s2 > bc || bc > (self.m0 * self.m0 * self.m1) as u64 {
            out.push("s2_part_bound");
        }
        if self.plane_richness > 2 * self.m0 {
            out.push("plane_richness");
        }
        if self.disjoint_on_image.failed > 0 {
            out.push("pair_lines_meet_on_image");
        }
        if self.parallel_triples.failed > 0 {
            out.push("parallel_triples");
        }
        out
    }

    pub fn passed(&self) -> bool {
        self.violations().is_empty()
    }
}

/// Audits the class of lines meeting `E \ {0}` in exactly `m1` points.
///
/// Coordinates are changed so that the first two class lines become the
/// axes, unless the class has fewer than two lines or already contains an
/// axis.
pub fn audit_line_class(f: &FieldCtx, e: &PointSet, m1: usize, c: f64) -> Result<ClassAudit> {
    let ClassSetup {
        g,
        m0,
        s,
        b,
        c_set,
        base_points,
        e,
    } = class_setup(f, e, m1)?;
    let q = f.q();
    let (s1, s2): (Vec<Mat2>, Vec<Mat2>) = s.iter().partition(|m| !m.c.is_zero());
    let c_member = PointSet::from_points(q, c_set.iter().copied());

    let mut omega = 0u64;
    let mut omega_s2 = 0u64;
    let mut omega_s1 = 0u64;
    for m in &s {
        for &u in &b {
            if c_member.contains(m.apply(f, u)) {
                omega += 1;
                if m.c.is_zero() {
                    omega_s2 += 1;
                } else {
                    omega_s1 += 1;
                }
            }
        }
    }

    let lines = pair_lines(f, &b, &c_set)?;
    let distinct: HashSet<Line3> = lines.iter().copied().collect();
    debug_assert_eq!(distinct.len(), lines.len());
    let f_s1: HashSet<Point3> = s1.iter().map(f_map).collect();
    let incidence_part = count_incidences(f, &f_s1, &lines);
    let richness = plane_richness(f, &lines);

    let mut skew_pairs = RelationTally::default();
    let mut disjoint_on_image = RelationTally::default();
    let mut parallel_triples = RelationTally::default();
    for &u in &b {
        let with_line: Vec<(ProjLine, Line3)> = c_set
            .iter()
            .map(|&v| {
                (
                    ProjLine::through(f, v).expect("off axes"),
                    pair_line(f, u, v).expect("admissible"),
                )
            })
            .collect();
        for (i, (lv, l1)) in with_line.iter().enumerate() {
            for (lw, l2) in &with_line[i + 1..] {
                if lv != lw {
                    let relation = line_relation(f, l1, l2);
                    skew_pairs.record(relation == LineRelation::Skew);
                    let meets_on_image = relation == LineRelation::Intersecting
                        && l1.points(f).any(|p| !p.0[2].is_zero() && l2.contains(f, p));
                    disjoint_on_image.record(!meets_on_image);
                }
            }
        }
        for group in class_groups(&with_line) {
            for i in 0..group.len() {
                for j in i + 1..group.len() {
                    for k in j + 1..group.len() {
                        let ok = parallel_triple_coplanar(f, &group[i], &group[j], &group[k])
                            == Some(false);
                        parallel_triples.record(ok);
                    }
                }
            }
        }
    }

    let r_e = stabilizer_fast(f, &e)?;
    let s_lookup: HashSet<&Mat2> = s.iter().collect();
    let stabilizer_contained = r_e.iter().all(|m| s_lookup.contains(m));

    let (m0f, m1f, sf) = (m0 as f64, m1 as f64, s.len() as f64);
    Ok(ClassAudit {
        m0,
        m1,
        normalization: g,
        base_points,
        b_size: b.len(),
        c_size: c_set.len(),
        s_size: s.len(),
        s1_size: s1.len(),
        s2_size: s2.len(),
        r_e: r_e.len(),
        omega,
        omega_s2,
        omega_s1,
        incidence_part,
        line_count: lines.len(),
        plane_richness: richness.max_lines,
        lower_bound: (m0 as i64 - 4) * s.len() as i64,
        upper_rhs: 2.0 * c * (m0f.powf(1.75) * m1f.powf(0.75) * sf.sqrt() + m0f * m0f * m1f + sf),
        c,
        stabilizer_contained,
        s_within_bound: sf <= 16.0 * c * c * (m0f * m1f).powf(1.5),
        skew_pairs,
        disjoint_on_image,
        parallel_triples,
    })
}

struct ClassSetup {
    g: Mat2,
    m0: usize,
    /// Matrices permuting the `E_j`.
    s: Vec<Mat2>,
    b: Vec<Point2>,
    c_set: Vec<Point2>,
    base_points: Vec<Point2>,
    /// `E \ {0}` in normalized coordinates.
    e: PointSet,
}

fn class_setup(f: &FieldCtx, e: &PointSet, m1: usize) -> Result<ClassSetup> {
    let inter = line_intersections(f, e);
    let class: Vec<ProjLine> = inter
        .iter()
        .filter(|(_, p)| p.len() == m1)
        .map(|(l, _)| *l)
        .collect();
    let m0 = class.len();
    if m0 == 0 {
        return Err(Error::MissingClass(m1));
    }
    let has_axis = class
        .iter()
        .any(|&l| l == ProjLine::X_AXIS || l == ProjLine::YAxis);
    let g = if m0 >= 2 && !has_axis {
        normalize_two_lines(f, class[0], class[1])?
    } else {
        Mat2::IDENTITY
    };

    let q = f.q();
    let e = e.without_origin().image(f, &g);
    // E_j in normalized coordinates, each sorted by packed code
    let parts: Vec<Vec<Point2>> = class
        .iter()
        .map(|&l| {
            let mut pts: Vec<Point2> = inter[&l].iter().map(|&p| g.apply(f, p)).collect();
            pts.sort_by_key(|p| p.pack(q));
            pts
        })
        .collect();
    let union = PointSet::from_points(q, parts.iter().flatten().copied());
    let off_axes = |p: &Point2| !p.x.is_zero() && !p.y.is_zero();

    // θ(E_j) lies on one line and has m1 points, so θ(E_j) ⊆ ∪E_k forces
    // θ(E_j) = E_k for some k.
    let s = Sl2::new(f).filter(|m| union.is_preserved_by(f, m))?;
    let base_points: Vec<Point2> = parts.iter().map(|pts| pts[0]).collect();
    let b = base_points.iter().copied().filter(off_axes).collect();
    let c_set = union.iter().filter(off_axes).collect();
    Ok(ClassSetup {
        g,
        m0,
        s,
        b,
        c_set,
        base_points,
        e,
    })
}

fn pair_lines(f: &FieldCtx, b: &[Point2], c_set: &[Point2]) -> Result<Vec<Line3>> {
    let mut lines = Vec::with_capacity(b.len() * c_set.len());
    for &u in b {
        for &v in c_set {
            lines.push(pair_line(f, u, v)?);
        }
    }
    Ok(lines)
}

/// The incidence instance behind the audit of one class: the points
/// `f(S1)` and the pair lines `L` of `B x C`.
pub fn class_incidence(f: &FieldCtx, e: &PointSet, m1: usize) -> Result<IncidenceInstance> {
    let setup = class_setup(f, e, m1)?;
    let s1 = setup.s.iter().filter(|m| !m.c.is_zero()).map(f_map);
    let lines = pair_lines(f, &setup.b, &setup.c_set)?;
    let class = ClassData {
        m0: setup.m0,
        m1,
        s_size: setup.s.len(),
    };
    Ok(IncidenceInstance::new(f, s1, lines).with_class(class))
}

/// Pair lines grouped by the origin line of their target point.
fn class_groups(with_line: &[(ProjLine, Line3)]) -> Vec<Vec<Line3>> {
    let mut groups: std::collections::BTreeMap<ProjLine, Vec<Line3>> = Default::default();
    for (l, line) in with_line {
        groups.entry(*l).or_default().push(*line);
    }
    groups.into_values().collect()
}
