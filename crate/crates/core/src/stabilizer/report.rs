use serde::Serialize;

use super::{line_partition, lineset_bound, stabilizer_fast};
use crate::error::Result;
use crate::gf::FieldCtx;
use crate::plane::{Point2, PointSet};

/// Report parameters. `c` scales report-only columns; `c1, c2, alpha, beta`
/// define the size/stabilizer thresholds of the line-containment check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundConstants {
    pub c: f64,
    pub c1: f64,
    pub c2: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for BoundConstants {
    fn default() -> Self {
        BoundConstants {
            c: 1.0,
            c1: 1.0,
            c2: 1.0,
            alpha: 0.5,
            beta: 0.75,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundRow {
    pub name: &'static str,
    pub applicable: bool,
    pub rhs: f64,
    /// `|R_E| / rhs` when applicable and `rhs > 0`.
    pub ratio: Option<f64>,
    /// Set only for proved bounds that the observation exceeds.
    pub violated: bool,
}

impl BoundRow {
    fn proved(name: &'static str, applicable: bool, rhs: f64, observed: u64) -> Self {
        BoundRow {
            name,
            applicable,
            rhs,
            ratio: ratio(applicable, observed, rhs),
            violated: applicable && observed as f64 > rhs,
        }
    }

    fn empirical(name: &'static str, applicable: bool, rhs: f64, observed: u64) -> Self {
        BoundRow {
            name,
            applicable,
            rhs,
            ratio: ratio(applicable, observed, rhs),
            violated: false,
        }
    }
}

fn ratio(applicable: bool, observed: u64, rhs: f64) -> Option<f64> {
    (applicable && rhs > 0.0).then(|| observed as f64 / rhs)
}

/// Threshold check: `|E| <= c1 q^alpha`, `|R_E| >= c2 q^beta` and
/// `beta >= 3 alpha / 2` should force `E` into a line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ContainmentRow {
    pub size_threshold: f64,
    pub stabilizer_threshold: f64,
    pub hypotheses_met: bool,
    /// Hypotheses met and `E` collinear.
    pub confirmed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub size: usize,
    pub size_punctured: usize,
    pub r_e: u64,
    pub lines_meeting: usize,
    /// At most one line through the origin meets `E \ {0}`.
    pub in_origin_line: bool,
    /// All points of `E` lie on one affine line.
    pub collinear: bool,
    /// At least three lines meet `E \ {0}` and every multiplicity class has
    /// one or two lines.
    pub small_classes: bool,
    /// `|R_E| / |E \ {0}|^{3/2}` with the two-line hypothesis.
    pub three_halves: BoundRow,
    /// `|R_E| / |E|^{3/2}` counting the origin when present.
    pub three_halves_ratio_full: Option<f64>,
    pub two_line: BoundRow,
    pub line_set: BoundRow,
    pub p_power: BoundRow,
    pub quadratic: BoundRow,
    pub containment: ContainmentRow,
}

impl BoundReport {
    pub fn any_violation(&self) -> bool {
        self.violations().next().is_some()
    }

    pub fn violations(&self) -> impl Iterator<Item = &'static str> + '_ {
        [&self.two_line, &self.line_set, &self.p_power]
            .into_iter()
            .filter(|r| r.violated)
            .map(|r| r.name)
    }
}

/// Evaluates every bound for `E`, computing `R_E` with [`stabilizer_fast`].
pub fn bound_report(f: &FieldCtx, e: &PointSet, constants: &BoundConstants) -> Result<BoundReport> {
    let r_e = if e.len_punctured() == 0 {
        crate::plane::Sl2::new(f).order()
    } else {
        stabilizer_fast(f, e)?.len() as u64
    };
    Ok(bound_report_with(f, e, r_e, constants))
}

/// Same as [`bound_report`] with `|R_E|` supplied by the caller.
pub fn bound_report_with(f: &FieldCtx, e: &PointSet, r_e: u64, k: &BoundConstants) -> BoundReport {
    let q = f.q() as f64;
    let size = e.len();
    let size_punctured = e.len_punctured();
    let partition = line_partition(f, e);
    let lines = partition.lines_meeting;
    let full = e.capacity();
    let trivial_whole = size == full || (size == full - 1 && !e.contains_origin());

    let three_halves_ok = lines >= 2;
    let three_halves = BoundRow::empirical(
        "three_halves",
        three_halves_ok,
        (size_punctured as f64).powf(1.5),
        r_e,
    );
    let three_halves_ratio_full = ratio(three_halves_ok, r_e, (size as f64).powf(1.5));
    let two_line = BoundRow::proved("two_line", lines == 2, size_punctured as f64, r_e);
    let line_set = BoundRow::proved(
        "line_set",
        lines >= 3,
        lineset_bound(lines as u64) as f64,
        r_e,
    );
    let p_power_rhs = (f.p() as f64).powi(f.r() as i32 - 1) * size as f64;
    let p_power = BoundRow::proved("p_power", lines >= 2 && !trivial_whole, p_power_rhs, r_e);
    let quadratic = BoundRow::empirical("quadratic", size > 0 && size < full, q * q, r_e);

    let collinear = is_collinear(f, e);
    let size_threshold = k.c1 * q.powf(k.alpha);
    let stabilizer_threshold = k.c2 * q.powf(k.beta);
    let hypotheses_met = k.beta >= 1.5 * k.alpha
        && size as f64 <= size_threshold
        && r_e as f64 >= stabilizer_threshold;
    let containment = ContainmentRow {
        size_threshold,
        stabilizer_threshold,
        hypotheses_met,
        confirmed: hypotheses_met && collinear,
    };

    BoundReport {
        size,
        size_punctured,
        r_e,
        lines_meeting: lines,
        in_origin_line: lines <= 1,
        collinear,
        small_classes: lines >= 3 && partition.classes.values().all(|ls| ls.len() <= 2),
        three_halves,
        three_halves_ratio_full,
        two_line,
        line_set,
        p_power,
        quadratic,
        containment,
    }
}

/// Whether all points of `E` lie on a common affine line.
pub fn is_collinear(f: &FieldCtx, e: &PointSet) -> bool {
    let mut it = e.iter();
    let (p0, p1) = match (it.next(), it.next()) {
        (Some(a), Some(b)) => (a, b),
        _ => return true,
    };
    let d = Point2::new(f.sub(p1.x, p0.x), f.sub(p1.y, p0.y));
    it.all(|p| {
        let v = Point2::new(f.sub(p.x, p0.x), f.sub(p.y, p0.y));
        f.mul(d.x, v.y) == f.mul(d.y, v.x)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plane::ProjLine;

    fn pts(q: u32, list: &[(u32, u32)]) -> PointSet {
        PointSet::from_points(q, list.iter().map(|&(x, y)| Point2::from_codes(x, y)))
    }

    #[test]
    fn axis_is_in_a_line() {
        let f = FieldCtx::new(5, 1).unwrap();
        let e = PointSet::from_points(5, ProjLine::X_AXIS.points(&f));
        let rep = bound_report(&f, &e, &BoundConstants::default()).unwrap();
        assert_eq!(rep.lines_meeting, 1);
        assert!(!rep.three_halves.applicable);
        assert!(rep.in_origin_line && rep.collinear);
        assert_eq!(rep.r_e, 20);
    }

    #[test]
    fn subfield_plane_ratio() {
        let f = FieldCtx::new(2, 2).unwrap();
        let e = pts(4, &[(0, 0), (0, 1), (1, 0), (1, 1)]);
        let rep = bound_report(&f, &e, &BoundConstants::default()).unwrap();
        assert_eq!(rep.r_e, 6);
        assert_eq!(rep.three_halves_ratio_full, Some(0.75));
        assert!(!rep.small_classes);
        assert!(!rep.any_violation());
    }

    #[test]
    fn two_point_boundary() {
        let f = FieldCtx::new(2, 1).unwrap();
        let e = pts(2, &[(1, 0), (0, 1)]);
        let rep = bound_report(&f, &e, &BoundConstants::default()).unwrap();
        assert!(rep.two_line.applicable);
        assert_eq!(rep.r_e, 2);
        assert_eq!(rep.two_line.rhs, 2.0);
        assert!(!rep.two_line.violated);
        assert!(!rep.collinear || e.len() <= 2);
    }

    #[test]
    fn empty_and_origin_use_whole_group() {
        let f = FieldCtx::new(3, 1).unwrap();
        let rep = bound_report(&f, &PointSet::empty(3), &BoundConstants::default()).unwrap();
        assert_eq!(rep.r_e, 24);
        assert_eq!(rep.three_halves.ratio, None);
        let rep = bound_report(&f, &pts(3, &[(0, 0)]), &BoundConstants::default()).unwrap();
        assert_eq!(rep.r_e, 24);
        assert!(rep.quadratic.applicable);
    }

    #[test]
    fn collinearity() {
        let f = FieldCtx::new(5, 1).unwrap();
        assert!(is_collinear(&f, &pts(5, &[(1, 0), (1, 1), (1, 4)])));
        assert!(!is_collinear(&f, &pts(5, &[(1, 0), (1, 1), (2, 4)])));
        assert!(is_collinear(&f, &pts(5, &[(1, 0), (2, 3)])));
    }
}
