//! Stabilizers `R_E = {θ ∈ SL2 : θ(E) = E}` and the machinery around them.

mod audit;
mod report;

pub use audit::{audit_line_class, class_incidence, ClassAudit, RelationTally};
pub use report::{
    bound_report, bound_report_with, BoundConstants, BoundReport, BoundRow, ContainmentRow,
};

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::{Elem, FieldCtx};
use crate::plane::{
    transporter, Mat2, MatrixSet, Point2, PointSet, ProjLine, Sl2, MATERIALIZE_LIMIT,
};
use crate::rng::SplitMix64;

/// Exact `R_E` by filtering all of SL2.
pub fn stabilizer_brute(f: &FieldCtx, e: &PointSet) -> Result<MatrixSet> {
    let out: MatrixSet = Sl2::new(f)
        .filter(|m| e.is_preserved_by(f, m))?
        .into_iter()
        .collect();
    debug_assert_eq!(closure_violations(f, &out, 4096, 0), 0);
    Ok(out)
}

/// `R_E` filtered from a pre-materialized list of group elements.
pub fn stabilizer_brute_with(f: &FieldCtx, elements: &[Mat2], e: &PointSet) -> MatrixSet {
    elements
        .iter()
        .copied()
        .filter(|m| e.is_preserved_by(f, m))
        .collect()
}

/// Precomputed point permutations of every SL2 element, for campaigns that
/// evaluate many sets over one small field.
pub struct PermTable {
    pub elements: Vec<Mat2>,
    pub perms: Vec<Vec<u32>>,
}

impl PermTable {
    pub fn new(f: &FieldCtx) -> Result<Self> {
        let elements = Sl2::new(f).materialize()?;
        let perms = elements.iter().map(|m| m.point_permutation(f)).collect();
        Ok(PermTable { elements, perms })
    }

    pub fn stabilizer_size(&self, e: &PointSet) -> u64 {
        self.perms
            .iter()
            .filter(|p| e.is_preserved_by_perm(p))
            .count() as u64
    }

    pub fn stabilizer(&self, e: &PointSet) -> MatrixSet {
        self.elements
            .iter()
            .zip(&self.perms)
            .filter(|(_, p)| e.is_preserved_by_perm(p))
            .map(|(m, _)| *m)
            .collect()
    }
}

/// Exact `R_E` from the `|E|·q` candidates sending a fixed base point to each
/// point of `E \ {0}`.
///
/// The base point is the nonzero member with the smallest packed code. Every
/// `θ ∈ R_E` maps it to some nonzero `m2 ∈ E` lying on a line that meets
/// `E \ {0}` equally often, and `{θ : θ m1 = m2}` is a one-parameter family.
pub fn stabilizer_fast(f: &FieldCtx, e: &PointSet) -> Result<MatrixSet> {
    let punctured = e.without_origin();
    let base = punctured.iter().next().ok_or(Error::OnlyOrigin)?;
    let q = f.q();
    let mut line_count = vec![0usize; q as usize + 1];
    for p in punctured.iter() {
        line_count[ProjLine::through(f, p)?.index(q)] += 1;
    }
    let base_mult = line_count[ProjLine::through(f, base)?.index(q)];

    let mut out = MatrixSet::new();
    for target in punctured.iter() {
        if line_count[ProjLine::through(f, target)?.index(q)] != base_mult {
            continue;
        }
        for m in transporter(f, base, target)? {
            if punctured.is_preserved_by(f, &m) {
                out.insert(m);
            }
        }
    }
    Ok(out)
}

/// Number of failed closure checks (product or inverse missing) over pairs
/// of members. All pairs when `|set|^2 <= max_pairs`, otherwise `max_pairs`
/// seeded random pairs.
pub fn closure_violations(f: &FieldCtx, set: &MatrixSet, max_pairs: usize, seed: u64) -> usize {
    let items: Vec<&Mat2> = set.iter().collect();
    let n = items.len();
    if n == 0 {
        return 0;
    }
    let mut bad = items
        .iter()
        .filter(|m| !set.contains(&m.inverse(f)))
        .count();
    if n * n <= max_pairs {
        for a in &items {
            for b in &items {
                bad += usize::from(!set.contains(&a.compose(f, b)));
            }
        }
    } else {
        let mut rng = SplitMix64::new(seed);
        for _ in 0..max_pairs {
            let a = items[rng.below(n as u64) as usize];
            let b = items[rng.below(n as u64) as usize];
            bad += usize::from(!set.contains(&a.compose(f, b)));
        }
    }
    bad
}

/// The nonzero points of `E` on each line through the origin that meets it.
pub fn line_intersections(f: &FieldCtx, e: &PointSet) -> BTreeMap<ProjLine, Vec<Point2>> {
    let mut out: BTreeMap<ProjLine, Vec<Point2>> = BTreeMap::new();
    for p in e.iter().filter(|p| !p.is_origin()) {
        out.entry(ProjLine::through(f, p).expect("nonzero"))
            .or_default()
            .push(p);
    }
    out
}

/// Lines through the origin meeting `E \ {0}`, grouped by how many points
/// they meet.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LinePartition {
    /// multiplicity `m1` -> lines meeting `E \ {0}` in exactly `m1` points
    pub classes: BTreeMap<usize, Vec<ProjLine>>,
    pub lines_meeting: usize,
    pub punctured_size: usize,
}

impl LinePartition {
    /// `m0` for the class of multiplicity `m1`.
    pub fn class_size(&self, m1: usize) -> usize {
        self.classes.get(&m1).map_or(0, Vec::len)
    }

    /// `Σ m0·m1 = |E \ {0}|`.
    pub fn is_consistent(&self) -> bool {
        self.classes
            .iter()
            .map(|(m1, ls)| m1 * ls.len())
            .sum::<usize>()
            == self.punctured_size
            && self.classes.values().map(Vec::len).sum::<usize>() == self.lines_meeting
            && !self.classes.contains_key(&0)
    }

    pub fn lines(&self) -> Vec<ProjLine> {
        let mut all: Vec<ProjLine> = self.classes.values().flatten().copied().collect();
        all.sort();
        all
    }
}

pub fn line_partition(f: &FieldCtx, e: &PointSet) -> LinePartition {
    let mut classes: BTreeMap<usize, Vec<ProjLine>> = BTreeMap::new();
    let inter = line_intersections(f, e);
    for (line, pts) in &inter {
        classes.entry(pts.len()).or_default().push(*line);
    }
    LinePartition {
        classes,
        lines_meeting: inter.len(),
        punctured_size: e.len_punctured(),
    }
}

/// `2·m^3·(m-1)^2`.
pub fn lineset_bound(m: u64) -> u64 {
    2 * m.pow(3) * (m.saturating_sub(1)).pow(2)
}

/// All `θ` permuting the given set of lines through the origin.
pub fn lineset_stabilizer(f: &FieldCtx, lines: &[ProjLine]) -> Result<MatrixSet> {
    let mut member = vec![false; f.q() as usize + 1];
    for l in lines {
        member[l.index(f.q())] = true;
    }
    let out: MatrixSet = Sl2::new(f)
        .filter(|m| {
            lines
                .iter()
                .all(|&l| member[m.apply_line(f, l).index(f.q())])
        })?
        .into_iter()
        .collect();
    let m = lines
        .iter()
        .collect::<std::collections::BTreeSet<_>>()
        .len() as u64;
    debug_assert!(m < 3 || out.len() as u64 <= lineset_bound(m));
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitDecomposition {
    pub group: MatrixSet,
    /// Orbits on F_q^2 ordered by their smallest packed point.
    pub orbits: Vec<PointSet>,
}

impl OrbitDecomposition {
    /// `|H| = |Hx|·|Stab_H(x)|` at the first point of every orbit.
    pub fn orbit_stabilizer_holds(&self, f: &FieldCtx) -> bool {
        self.orbits.iter().all(|orbit| {
            let x = orbit.iter().next().expect("orbits are nonempty");
            let stab = self.group.iter().filter(|h| h.apply(f, x) == x).count();
            self.group.len() == orbit.len() * stab
        })
    }

    /// Orbits other than `{(0,0)}`.
    pub fn nonorigin_orbits(&self) -> impl Iterator<Item = &PointSet> {
        self.orbits.iter().filter(|o| !o.contains_origin())
    }
}

/// The subgroup generated by `generators` (breadth-first products) and its
/// orbit partition of F_q^2.
pub fn subgroup_orbits(f: &FieldCtx, generators: &[Mat2]) -> Result<OrbitDecomposition> {
    subgroup_orbits_with_limit(f, generators, MATERIALIZE_LIMIT)
}

pub fn subgroup_orbits_with_limit(
    f: &FieldCtx,
    generators: &[Mat2],
    limit: u64,
) -> Result<OrbitDecomposition> {
    for g in generators {
        let det = g.det(f);
        if det != Elem::ONE {
            return Err(Error::NotSl2 { det: det.0 });
        }
    }
    let mut group = MatrixSet::new();
    group.insert(Mat2::IDENTITY);
    let mut queue = VecDeque::from([Mat2::IDENTITY]);
    while let Some(h) = queue.pop_front() {
        for g in generators {
            let gh = g.compose(f, &h);
            if group.insert(gh) {
                if group.len() as u64 > limit {
                    return Err(Error::EnumerationLimit {
                        count: group.len() as u64,
                        limit,
                    });
                }
                queue.push_back(gh);
            }
        }
    }

    let q = f.q();
    let n = q as usize * q as usize;
    let mut seen = vec![false; n];
    let mut orbits = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut orbit = PointSet::empty(q);
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(code) = stack.pop() {
            orbit.insert_code(code);
            let x = Point2::unpack(code, q);
            for g in generators {
                let y = g.apply(f, x).pack(q);
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        orbits.push(orbit);
    }
    let out = OrbitDecomposition { group, orbits };
    debug_assert!(out.orbit_stabilizer_holds(f));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plane::sl2_elements;

    fn field(p: u32, r: u32) -> FieldCtx {
        FieldCtx::new(p, r).unwrap()
    }

    fn pts(q: u32, list: &[(u32, u32)]) -> PointSet {
        PointSet::from_points(q, list.iter().map(|&(x, y)| Point2::from_codes(x, y)))
    }

    #[test]
    fn brute_examples() {
        let f3 = field(3, 1);
        assert_eq!(
            stabilizer_brute(&f3, &PointSet::empty(3)).unwrap().len(),
            24
        );
        let axis = PointSet::from_points(3, ProjLine::X_AXIS.points(&f3));
        assert_eq!(stabilizer_brute(&f3, &axis).unwrap().len(), 6);

        let f2 = field(2, 1);
        let e = pts(2, &[(1, 0), (0, 1)]);
        let want: MatrixSet = [Mat2::IDENTITY, Mat2::from_codes(0, 1, 1, 0)]
            .into_iter()
            .collect();
        assert_eq!(stabilizer_brute(&f2, &e).unwrap(), want);
        assert_eq!(stabilizer_fast(&f2, &e).unwrap(), want);
    }

    #[test]
    fn fast_examples() {
        let f4 = field(2, 2);
        let sub = pts(4, &[(0, 0), (0, 1), (1, 0), (1, 1)]);
        let r = stabilizer_fast(&f4, &sub).unwrap();
        assert_eq!(r.len(), 6);
        assert!(r
            .iter()
            .all(|m| [m.a, m.b, m.c, m.d].iter().all(|x| x.0 < 2)));

        let f7 = field(7, 1);
        let e = pts(7, &[(0, 1), (0, 2), (0, 4)]);
        assert_eq!(stabilizer_fast(&f7, &e).unwrap().len(), 21);
        assert_eq!(
            stabilizer_fast(&f7, &pts(7, &[(0, 0)])),
            Err(Error::OnlyOrigin)
        );
    }

    #[test]
    fn fast_matches_brute_on_all_small_subsets() {
        for (p, r) in [(2, 1), (3, 1)] {
            let f = field(p, r);
            let q = f.q();
            let table = PermTable::new(&f).unwrap();
            for mask in 0..(1u64 << (q * q)) {
                let e = PointSet::from_mask(q, mask);
                if e.len_punctured() == 0 {
                    continue;
                }
                assert_eq!(
                    stabilizer_fast(&f, &e).unwrap(),
                    table.stabilizer(&e),
                    "mask {mask:#x}"
                );
            }
        }
    }

    #[test]
    fn partitions() {
        let f5 = field(5, 1);
        let e = pts(5, &[(1, 0), (0, 1), (0, 2)]);
        let lp = line_partition(&f5, &e);
        assert_eq!(lp.classes[&1], vec![ProjLine::X_AXIS]);
        assert_eq!(lp.classes[&2], vec![ProjLine::YAxis]);
        assert!(lp.is_consistent());

        let axis = PointSet::from_points(5, ProjLine::X_AXIS.points(&f5)).without_origin();
        let lp = line_partition(&f5, &axis);
        assert_eq!(lp.classes.len(), 1);
        assert_eq!(lp.classes[&4], vec![ProjLine::X_AXIS]);

        let f9 = field(3, 2);
        let sub = f9.subfield_elements(1).unwrap();
        let plane = PointSet::from_points(
            9,
            sub.iter()
                .flat_map(|x| sub.iter().map(move |y| Point2::new(x, y))),
        );
        let lp = line_partition(&f9, &plane);
        assert_eq!(lp.classes.keys().copied().collect::<Vec<_>>(), vec![2]);
        assert_eq!(lp.class_size(2), 4);
    }

    #[test]
    fn lineset_examples() {
        let f2 = field(2, 1);
        let all: Vec<_> = ProjLine::all(&f2).collect();
        assert_eq!(lineset_stabilizer(&f2, &all).unwrap().len(), 6);
        assert_eq!(lineset_bound(3), 216);

        let f5 = field(5, 1);
        let three = [ProjLine::X_AXIS, ProjLine::YAxis, ProjLine::Slope(Elem(1))];
        let brute = sl2_elements(&f5)
            .unwrap()
            .into_iter()
            .filter(|m| {
                let mut img: Vec<_> = three.iter().map(|&l| m.apply_line(&f5, l)).collect();
                img.sort();
                let mut src = three.to_vec();
                src.sort();
                img == src
            })
            .count();
        let got = lineset_stabilizer(&f5, &three).unwrap();
        assert_eq!(got.len(), brute);
        assert!(got.len() <= 216);

        let x = lineset_stabilizer(&f5, &[ProjLine::X_AXIS]).unwrap();
        assert_eq!(x.len(), 20);
        assert!(x.iter().all(|m| m.c.is_zero()));
    }

    #[test]
    fn orbits() {
        let f3 = field(3, 1);
        let dec = subgroup_orbits(&f3, &[Mat2::from_codes(1, 1, 0, 1)]).unwrap();
        assert_eq!(dec.group.len(), 3);
        let sizes: Vec<usize> = dec.orbits.iter().map(PointSet::len).collect();
        assert_eq!(sizes.iter().filter(|&&s| s == 1).count(), 3);
        assert_eq!(sizes.iter().filter(|&&s| s == 3).count(), 2);
        assert_eq!(sizes.iter().sum::<usize>(), 9);
        for o in dec.orbits.iter().filter(|o| o.len() == 1) {
            assert!(o.iter().all(|p| p.y.is_zero()));
        }
        assert!(dec.orbit_stabilizer_holds(&f3));

        let trivial = subgroup_orbits(&f3, &[Mat2::IDENTITY]).unwrap();
        assert_eq!(trivial.group.len(), 1);
        assert_eq!(trivial.orbits.len(), 9);

        let f2 = field(2, 1);
        let gens = [Mat2::from_codes(1, 1, 0, 1), Mat2::from_codes(1, 0, 1, 1)];
        let full = subgroup_orbits(&f2, &gens).unwrap();
        assert_eq!(full.group.len(), 6);
        assert_eq!(full.orbits.len(), 2);
        assert_eq!(full.orbits[0], pts(2, &[(0, 0)]));
        assert_eq!(full.orbits[1].len(), 3);

        assert!(matches!(
            subgroup_orbits(&f3, &[Mat2::from_codes(1, 1, 1, 1)]),
            Err(Error::NotSl2 { .. })
        ));
        assert!(matches!(
            subgroup_orbits_with_limit(&f3, &gens.map(|_| Mat2::from_codes(1, 1, 0, 1)), 2),
            Err(Error::EnumerationLimit { .. })
        ));
    }

    #[test]
    fn closure_check_detects_missing_products() {
        let f3 = field(3, 1);
        let mut s: MatrixSet = [Mat2::IDENTITY, Mat2::from_codes(1, 1, 0, 1)]
            .into_iter()
            .collect();
        assert!(closure_violations(&f3, &s, 1000, 0) > 0);
        s.insert(Mat2::from_codes(1, 2, 0, 1));
        assert_eq!(closure_violations(&f3, &s, 1000, 0), 0);
    }
}
