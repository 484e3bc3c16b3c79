//! Points of F_q^2, SL2(F_q) and its linear action, lines through the origin.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Range;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::{Elem, FieldCtx};

/// Largest `q^3` that may be streamed through [`Sl2::iter`].
pub const STREAM_LIMIT: u64 = 1_000_000_000;
/// Largest `q^3` that may be collected into memory.
pub const MATERIALIZE_LIMIT: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Point2 {
    pub x: Elem,
    pub y: Elem,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 {
        x: Elem::ZERO,
        y: Elem::ZERO,
    };

    pub fn new(x: Elem, y: Elem) -> Self {
        Point2 { x, y }
    }

    pub fn from_codes(x: u32, y: u32) -> Self {
        Point2 {
            x: Elem(x),
            y: Elem(y),
        }
    }

    #[inline]
    pub fn pack(self, q: u32) -> usize {
        self.x.0 as usize * q as usize + self.y.0 as usize
    }

    #[inline]
    pub fn unpack(code: usize, q: u32) -> Self {
        let q = q as usize;
        Point2::from_codes((code / q) as u32, (code % q) as u32)
    }

    pub fn is_origin(self) -> bool {
        self == Self::ORIGIN
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// A 2x2 matrix `[a, b; c, d]` acting on column vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Mat2 {
    pub a: Elem,
    pub b: Elem,
    pub c: Elem,
    pub d: Elem,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        a: Elem::ONE,
        b: Elem::ZERO,
        c: Elem::ZERO,
        d: Elem::ONE,
    };

    pub const fn new_unchecked(a: Elem, b: Elem, c: Elem, d: Elem) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn from_codes(a: u32, b: u32, c: u32, d: u32) -> Self {
        Mat2 {
            a: Elem(a),
            b: Elem(b),
            c: Elem(c),
            d: Elem(d),
        }
    }

    /// An element of SL2, rejecting matrices whose determinant is not 1.
    pub fn sl2(f: &FieldCtx, a: Elem, b: Elem, c: Elem, d: Elem) -> Result<Self> {
        let m = Mat2 { a, b, c, d };
        let det = m.det(f);
        if det == Elem::ONE {
            Ok(m)
        } else {
            Err(Error::NotSl2 { det: det.0 })
        }
    }

    #[inline]
    pub fn det(&self, f: &FieldCtx) -> Elem {
        f.sub(f.mul(self.a, self.d), f.mul(self.b, self.c))
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, f: &FieldCtx, other: &Mat2) -> Mat2 {
        Mat2 {
            a: f.add(f.mul(self.a, other.a), f.mul(self.b, other.c)),
            b: f.add(f.mul(self.a, other.b), f.mul(self.b, other.d)),
            c: f.add(f.mul(self.c, other.a), f.mul(self.d, other.c)),
            d: f.add(f.mul(self.c, other.b), f.mul(self.d, other.d)),
        }
    }

    /// Inverse of a determinant-one matrix: `[d, -b; -c, a]`.
    pub fn inverse(&self, f: &FieldCtx) -> Mat2 {
        Mat2 {
            a: self.d,
            b: f.neg(self.b),
            c: f.neg(self.c),
            d: self.a,
        }
    }

    #[inline]
    pub fn apply(&self, f: &FieldCtx, v: Point2) -> Point2 {
        Point2 {
            x: f.add(f.mul(self.a, v.x), f.mul(self.b, v.y)),
            y: f.add(f.mul(self.c, v.x), f.mul(self.d, v.y)),
        }
    }

    pub fn apply_line(&self, f: &FieldCtx, line: ProjLine) -> ProjLine {
        ProjLine::through(f, self.apply(f, line.direction()))
            .expect("invertible maps send nonzero vectors to nonzero vectors")
    }

    /// The permutation of packed points induced by this matrix.
    pub fn point_permutation(&self, f: &FieldCtx) -> Vec<u32> {
        let q = f.q();
        (0..(q as usize * q as usize))
            .map(|code| self.apply(f, Point2::unpack(code, q)).pack(q) as u32)
            .collect()
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{};{},{}]", self.a, self.b, self.c, self.d)
    }
}

/// Parses the `[a,b;c,d]` text form. Codes are checked against the field but
/// the determinant is not.
pub fn parse_mat2(f: &FieldCtx, text: &str) -> Result<Mat2> {
    let bad = |reason: &str| Error::SetSpec {
        spec: text.to_string(),
        reason: reason.to_string(),
    };
    let inner = text
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| bad("matrix must look like [a,b;c,d]"))?;
    let mut codes = Vec::with_capacity(4);
    for row in inner.split(';') {
        for entry in row.split(',') {
            let v: u64 = entry
                .trim()
                .parse()
                .map_err(|_| bad("matrix entries must be integer codes"))?;
            codes.push(f.elem(v)?);
        }
    }
    match codes[..] {
        [a, b, c, d] => Ok(Mat2 { a, b, c, d }),
        _ => Err(bad("matrix needs exactly four entries")),
    }
}

/// Parses the `(x,y)` text form.
pub fn parse_point2(f: &FieldCtx, text: &str) -> Result<Point2> {
    let bad = |reason: &str| Error::SetSpec {
        spec: text.to_string(),
        reason: reason.to_string(),
    };
    let inner = text
        .trim()
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| bad("point must look like (x,y)"))?;
    let (x, y) = inner
        .split_once(',')
        .ok_or_else(|| bad("point needs two coordinates"))?;
    let x: u64 = x
        .trim()
        .parse()
        .map_err(|_| bad("coordinates must be integer codes"))?;
    let y: u64 = y
        .trim()
        .parse()
        .map_err(|_| bad("coordinates must be integer codes"))?;
    Ok(Point2::new(f.elem(x)?, f.elem(y)?))
}

/// A deduplicated, ordered set of matrices.
pub type MatrixSet = BTreeSet<Mat2>;

/// Indexed enumeration of SL2(F_q).
///
/// Index order: first the `a = 0` sweep over `(b, d)` with `b != 0` and
/// `c = -1/b`, then `a = 1..q` lexicographically over `(a, b, c)` with
/// `d = (1 + bc)/a`. Disjoint index ranges partition the group, so parallel
/// workers can split the enumeration deterministically.
#[derive(Clone, Copy, Debug)]
pub struct Sl2<'f> {
    field: &'f FieldCtx,
}

impl<'f> Sl2<'f> {
    pub fn new(field: &'f FieldCtx) -> Self {
        Sl2 { field }
    }

    /// `q^3 - q`.
    pub fn order(&self) -> u64 {
        let q = self.field.q() as u64;
        q * q * q - q
    }

    fn zero_sweep_len(&self) -> u64 {
        let q = self.field.q() as u64;
        q * (q - 1)
    }

    pub fn nth(&self, index: u64) -> Mat2 {
        let f = self.field;
        let q = f.q() as u64;
        debug_assert!(index < self.order());
        if index < self.zero_sweep_len() {
            let b = Elem((1 + index / q) as u32);
            let d = Elem((index % q) as u32);
            let c = f.neg(f.recip(b));
            Mat2 {
                a: Elem::ZERO,
                b,
                c,
                d,
            }
        } else {
            let j = index - self.zero_sweep_len();
            let a = Elem((1 + j / (q * q)) as u32);
            let b = Elem(((j / q) % q) as u32);
            let c = Elem((j % q) as u32);
            let d = f.mul(f.add(Elem::ONE, f.mul(b, c)), f.recip(a));
            Mat2 { a, b, c, d }
        }
    }

    fn check(&self, limit: u64) -> Result<()> {
        let q = self.field.q() as u64;
        let count = q * q * q;
        if count > limit {
            Err(Error::EnumerationLimit { count, limit })
        } else {
            Ok(())
        }
    }

    /// Streams every element once, in index order.
    pub fn iter(&self) -> Result<impl Iterator<Item = Mat2> + 'f> {
        self.check(STREAM_LIMIT)?;
        Ok(self.range_iter(0..self.order()))
    }

    pub fn range_iter(&self, range: Range<u64>) -> impl Iterator<Item = Mat2> + 'f {
        let this = *self;
        range.map(move |i| this.nth(i))
    }

    pub fn materialize(&self) -> Result<Vec<Mat2>> {
        self.check(MATERIALIZE_LIMIT)?;
        Ok(self.range_iter(0..self.order()).collect())
    }

    /// All elements satisfying `pred`, in index order, filtered in parallel.
    pub fn filter<P>(&self, pred: P) -> Result<Vec<Mat2>>
    where
        P: Fn(&Mat2) -> bool + Sync,
    {
        self.check(STREAM_LIMIT)?;
        let this = *self;
        Ok((0..self.order() as usize)
            .into_par_iter()
            .with_min_len(1024)
            .map(move |i| this.nth(i as u64))
            .filter(|m| pred(m))
            .collect())
    }
}

/// Convenience wrapper around [`Sl2::materialize`].
pub fn sl2_elements(f: &FieldCtx) -> Result<Vec<Mat2>> {
    Sl2::new(f).materialize()
}

/// A line through the origin, named by its canonical direction: `(1, t)` for
/// `Slope(t)` and `(0, 1)` for the y-axis. The y-axis sorts last.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ProjLine {
    Slope(Elem),
    YAxis,
}

impl ProjLine {
    pub const X_AXIS: ProjLine = ProjLine::Slope(Elem::ZERO);

    pub fn all(f: &FieldCtx) -> impl Iterator<Item = ProjLine> + '_ {
        f.elements()
            .map(ProjLine::Slope)
            .chain(std::iter::once(ProjLine::YAxis))
    }

    /// The line containing a nonzero vector.
    pub fn through(f: &FieldCtx, v: Point2) -> Result<ProjLine> {
        if !v.x.is_zero() {
            Ok(ProjLine::Slope(f.mul(v.y, f.recip(v.x))))
        } else if !v.y.is_zero() {
            Ok(ProjLine::YAxis)
        } else {
            Err(Error::OriginHasNoLine)
        }
    }

    pub fn direction(self) -> Point2 {
        match self {
            ProjLine::Slope(t) => Point2::new(Elem::ONE, t),
            ProjLine::YAxis => Point2::new(Elem::ZERO, Elem::ONE),
        }
    }

    /// Position in `0..=q`, the y-axis being `q`.
    pub fn index(self, q: u32) -> usize {
        match self {
            ProjLine::Slope(t) => t.0 as usize,
            ProjLine::YAxis => q as usize,
        }
    }

    pub fn from_index(index: usize, q: u32) -> ProjLine {
        if index == q as usize {
            ProjLine::YAxis
        } else {
            ProjLine::Slope(Elem(index as u32))
        }
    }

    /// All `q` points of the line, origin included.
    pub fn points(self, f: &FieldCtx) -> impl Iterator<Item = Point2> + '_ {
        let dir = self.direction();
        f.elements()
            .map(move |s| Point2::new(f.mul(s, dir.x), f.mul(s, dir.y)))
    }

    pub fn contains(self, f: &FieldCtx, v: Point2) -> bool {
        v.is_origin() || ProjLine::through(f, v) == Ok(self)
    }
}

impl fmt::Display for ProjLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProjLine::Slope(t) => write!(f, "slope:{t}"),
            ProjLine::YAxis => write!(f, "y-axis"),
        }
    }
}

/// A determinant-one matrix sending `first` to the x-axis and `second` to the
/// y-axis. Its inverse has columns `v1` and `v2 / det[v1 v2]`, where `v1`, `v2`
/// are the canonical directions.
pub fn normalize_two_lines(f: &FieldCtx, first: ProjLine, second: ProjLine) -> Result<Mat2> {
    if first == second {
        return Err(Error::SameLine(first));
    }
    let v1 = first.direction();
    let v2 = second.direction();
    let delta = f.sub(f.mul(v1.x, v2.y), f.mul(v2.x, v1.y));
    let s = f.recip(delta);
    let basis = Mat2 {
        a: v1.x,
        b: f.mul(s, v2.x),
        c: v1.y,
        d: f.mul(s, v2.y),
    };
    Ok(basis.inverse(f))
}

/// A determinant-one matrix whose first column is `v`.
pub fn column_lift(f: &FieldCtx, v: Point2) -> Result<Mat2> {
    if !v.x.is_zero() {
        Ok(Mat2 {
            a: v.x,
            b: Elem::ZERO,
            c: v.y,
            d: f.recip(v.x),
        })
    } else if !v.y.is_zero() {
        Ok(Mat2 {
            a: Elem::ZERO,
            b: f.neg(f.recip(v.y)),
            c: v.y,
            d: Elem::ZERO,
        })
    } else {
        Err(Error::OriginHasNoLine)
    }
}

/// The `q` matrices with `θ m1 = m2`, as the coset `g2 · {[1,α;0,1]} · g1⁻¹`
/// where `g_i` lifts `m_i` to a first column.
pub fn transporter(
    f: &FieldCtx,
    m1: Point2,
    m2: Point2,
) -> Result<impl Iterator<Item = Mat2> + '_> {
    let g1_inv = column_lift(f, m1)?.inverse(f);
    let g2 = column_lift(f, m2)?;
    Ok(f.elements().map(move |alpha| {
        let shear = Mat2 {
            a: Elem::ONE,
            b: alpha,
            c: Elem::ZERO,
            d: Elem::ONE,
        };
        g2.compose(f, &shear).compose(f, &g1_inv)
    }))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointStabilizer {
    pub matrices: MatrixSet,
    /// Set when the input was the origin, whose stabilizer is the whole group.
    pub whole_group: bool,
}

/// `{θ ∈ SL2 : θx = x}`. For `x = (u, v) ≠ 0` this is the transvection family
/// `[1 - αuv, αu²; -αv², 1 + αuv]`.
pub fn point_stabilizer(f: &FieldCtx, x: Point2) -> Result<PointStabilizer> {
    if x.is_origin() {
        let matrices = Sl2::new(f).materialize()?.into_iter().collect();
        return Ok(PointStabilizer {
            matrices,
            whole_group: true,
        });
    }
    let (u, v) = (x.x, x.y);
    let uv = f.mul(u, v);
    let matrices = f
        .elements()
        .map(|alpha| Mat2 {
            a: f.sub(Elem::ONE, f.mul(alpha, uv)),
            b: f.mul(alpha, f.mul(u, u)),
            c: f.neg(f.mul(alpha, f.mul(v, v))),
            d: f.add(Elem::ONE, f.mul(alpha, uv)),
        })
        .collect();
    Ok(PointStabilizer {
        matrices,
        whole_group: false,
    })
}

/// Membership bitset over the `q^2` packed points of F_q^2.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointSet {
    q: u32,
    words: Vec<u64>,
    len: usize,
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PointSet(q={}, {})", self.q, self.to_text())
    }
}

impl PointSet {
    pub fn empty(q: u32) -> Self {
        let n = q as usize * q as usize;
        PointSet {
            q,
            words: vec![0; n.div_ceil(64)],
            len: 0,
        }
    }

    pub fn full(q: u32) -> Self {
        let mut s = Self::empty(q);
        for code in 0..s.capacity() {
            s.insert_code(code);
        }
        s
    }

    pub fn from_points<I: IntoIterator<Item = Point2>>(q: u32, points: I) -> Self {
        let mut s = Self::empty(q);
        for p in points {
            s.insert(p);
        }
        s
    }

    /// The set whose packed codes are the bits of `mask`. Requires `q^2 <= 64`.
    pub fn from_mask(q: u32, mask: u64) -> Self {
        assert!(q * q <= 64);
        let n = q * q;
        let mask = if n == 64 {
            mask
        } else {
            mask & ((1u64 << n) - 1)
        };
        PointSet {
            q,
            words: vec![mask],
            len: mask.count_ones() as usize,
        }
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn capacity(&self) -> usize {
        self.q as usize * self.q as usize
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `|E \ {(0,0)}|`.
    pub fn len_punctured(&self) -> usize {
        self.len - usize::from(self.contains_origin())
    }

    pub fn contains_origin(&self) -> bool {
        self.contains_code(0)
    }

    #[inline]
    pub fn contains_code(&self, code: usize) -> bool {
        self.words[code / 64] >> (code % 64) & 1 == 1
    }

    #[inline]
    pub fn contains(&self, p: Point2) -> bool {
        self.contains_code(p.pack(self.q))
    }

    pub fn insert_code(&mut self, code: usize) -> bool {
        let (w, b) = (code / 64, code % 64);
        let fresh = self.words[w] >> b & 1 == 0;
        self.words[w] |= 1 << b;
        self.len += usize::from(fresh);
        fresh
    }

    pub fn insert(&mut self, p: Point2) -> bool {
        self.insert_code(p.pack(self.q))
    }

    pub fn remove(&mut self, p: Point2) -> bool {
        let code = p.pack(self.q);
        let (w, b) = (code / 64, code % 64);
        let present = self.words[w] >> b & 1 == 1;
        self.words[w] &= !(1 << b);
        self.len -= usize::from(present);
        present
    }

    pub fn codes(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * 64 + b)
            })
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = Point2> + '_ {
        let q = self.q;
        self.codes().map(move |c| Point2::unpack(c, q))
    }

    pub fn complement(&self) -> PointSet {
        let mut out = PointSet::empty(self.q);
        for code in 0..self.capacity() {
            if !self.contains_code(code) {
                out.insert_code(code);
            }
        }
        out
    }

    pub fn without_origin(&self) -> PointSet {
        let mut out = self.clone();
        out.remove(Point2::ORIGIN);
        out
    }

    pub fn with_origin(&self) -> PointSet {
        let mut out = self.clone();
        out.insert(Point2::ORIGIN);
        out
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        let words: Vec<u64> = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a | b)
            .collect();
        let len = words.iter().map(|w| w.count_ones() as usize).sum();
        PointSet {
            q: self.q,
            words,
            len,
        }
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn image(&self, f: &FieldCtx, m: &Mat2) -> PointSet {
        PointSet::from_points(self.q, self.iter().map(|p| m.apply(f, p)))
    }

    /// `θ(E) = E`. Since θ is a bijection it suffices that `θ(E) ⊆ E`.
    pub fn is_preserved_by(&self, f: &FieldCtx, m: &Mat2) -> bool {
        self.iter().all(|p| self.contains(m.apply(f, p)))
    }

    /// Same test through a precomputed point permutation.
    pub fn is_preserved_by_perm(&self, perm: &[u32]) -> bool {
        self.codes().all(|c| self.contains_code(perm[c] as usize))
    }

    /// Packed code bits when `q^2 <= 64`.
    pub fn mask(&self) -> Option<u64> {
        (self.capacity() <= 64).then(|| self.words[0])
    }

    /// `points:(x,y);(x,y);...`
    pub fn to_text(&self) -> String {
        let pts: Vec<String> = self.iter().map(|p| p.to_string()).collect();
        format!("points:{}", pts.join(";"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn field(p: u32, r: u32) -> FieldCtx {
        FieldCtx::new(p, r).unwrap()
    }

    #[test]
    fn sl2_counts_and_uniqueness() {
        for (p, r, n) in [(2, 1, 6), (5, 1, 120), (3, 2, 720), (2, 2, 60), (7, 1, 336)] {
            let f = field(p, r);
            let all = sl2_elements(&f).unwrap();
            assert_eq!(all.len(), n);
            let distinct: HashSet<_> = all.iter().collect();
            assert_eq!(distinct.len(), n);
            assert!(all.iter().all(|m| m.det(&f) == Elem::ONE));
        }
    }

    #[test]
    fn sl2_limits() {
        let f = FieldCtx::new(2, 16).unwrap();
        assert!(matches!(
            Sl2::new(&f).materialize(),
            Err(Error::EnumerationLimit { .. })
        ));
        assert!(matches!(
            Sl2::new(&f).iter().map(|_| ()),
            Err(Error::EnumerationLimit { .. })
        ));
        let f = FieldCtx::new(257, 1).unwrap();
        assert!(Sl2::new(&f).iter().is_ok());
        assert!(Sl2::new(&f).materialize().is_err());
    }

    #[test]
    fn matrix_ops() {
        let f = field(5, 1);
        assert_eq!(
            Mat2::IDENTITY.apply(&f, Point2::from_codes(3, 4)),
            Point2::from_codes(3, 4)
        );
        let shear = Mat2::from_codes(1, 1, 0, 1);
        for u in 0..5 {
            for v in 0..5 {
                let img = shear.apply(&f, Point2::from_codes(u, v));
                assert_eq!(img, Point2::from_codes((u + v) % 5, v));
            }
        }
        let rot = Mat2::from_codes(0, 1, 4, 0);
        assert_eq!(rot.inverse(&f), Mat2::from_codes(0, 4, 1, 0));
        assert_eq!(rot.compose(&f, &rot.inverse(&f)), Mat2::IDENTITY);
        assert!(Mat2::sl2(&f, Elem(1), Elem(1), Elem(1), Elem(1)).is_err());
        assert_eq!(parse_mat2(&f, "[0,1;4,0]").unwrap(), rot);
        assert_eq!(rot.to_string(), "[0,1;4,0]");
        assert!(parse_mat2(&f, "[0,1;4]").is_err());
        assert!(parse_mat2(&f, "[0,1;4,9]").is_err());
    }

    #[test]
    fn lines() {
        let f3 = field(3, 1);
        assert_eq!(ProjLine::all(&f3).count(), 4);
        let f7 = field(7, 1);
        assert_eq!(
            ProjLine::through(&f7, Point2::from_codes(0, 5)),
            Ok(ProjLine::YAxis)
        );
        assert_eq!(
            ProjLine::through(&f7, Point2::ORIGIN),
            Err(Error::OriginHasNoLine)
        );
        let f5 = field(5, 1);
        let pts: Vec<_> = ProjLine::Slope(Elem(2)).points(&f5).collect();
        let want: Vec<_> = (0..5).map(|t| Point2::from_codes(t, 2 * t % 5)).collect();
        assert_eq!(pts, want);
        // every nonzero point on exactly one line
        for code in 1..25 {
            let p = Point2::unpack(code, 5);
            assert_eq!(ProjLine::all(&f5).filter(|l| l.contains(&f5, p)).count(), 1);
        }
    }

    #[test]
    fn normalization() {
        let f5 = field(5, 1);
        let x = ProjLine::X_AXIS;
        let y = ProjLine::YAxis;
        assert_eq!(normalize_two_lines(&f5, x, y).unwrap(), Mat2::IDENTITY);
        assert_eq!(
            normalize_two_lines(&f5, y, x).unwrap(),
            Mat2::from_codes(0, 1, 4, 0)
        );
        assert!(normalize_two_lines(&f5, x, x).is_err());
        for f in [field(5, 1), field(2, 2), field(3, 2)] {
            for l1 in ProjLine::all(&f) {
                for l2 in ProjLine::all(&f).filter(|&l| l != l1) {
                    let g = normalize_two_lines(&f, l1, l2).unwrap();
                    assert_eq!(g.det(&f), Elem::ONE);
                    assert_eq!(g.apply_line(&f, l1), x);
                    assert_eq!(g.apply_line(&f, l2), y);
                }
            }
        }
    }

    #[test]
    fn double_transitivity_on_lines() {
        for (p, r) in [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1)] {
            let f = field(p, r);
            let all = sl2_elements(&f).unwrap();
            let lines: Vec<_> = ProjLine::all(&f).collect();
            let n = lines.len();
            let mut reached = HashSet::new();
            for m in &all {
                reached.insert((m.apply_line(&f, lines[0]), m.apply_line(&f, lines[1])));
            }
            assert_eq!(reached.len(), n * (n - 1));
        }
    }

    #[test]
    fn stabilizer_of_points() {
        let f3 = field(3, 1);
        let st = point_stabilizer(&f3, Point2::from_codes(1, 0)).unwrap();
        let want: MatrixSet = (0..3).map(|a| Mat2::from_codes(1, a, 0, 1)).collect();
        assert_eq!(st.matrices, want);

        // conjugate family for e_beta with beta = 2 over GF(5)
        let f5 = field(5, 1);
        let st = point_stabilizer(&f5, Point2::from_codes(1, 2)).unwrap();
        let want: MatrixSet = f5
            .elements()
            .map(|al| {
                let ab = f5.mul(al, Elem(2));
                Mat2 {
                    a: f5.sub(Elem::ONE, ab),
                    b: al,
                    c: f5.neg(f5.mul(Elem(4), al)),
                    d: f5.add(ab, Elem::ONE),
                }
            })
            .collect();
        assert_eq!(st.matrices, want);
        assert_eq!(st.matrices.len(), 5);

        let origin = point_stabilizer(&f3, Point2::ORIGIN).unwrap();
        assert!(origin.whole_group);
        assert_eq!(origin.matrices.len(), 24);
    }

    #[test]
    fn point_stabilizer_matches_brute_filter() {
        for (p, r) in [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (2, 3), (3, 2)] {
            let f = field(p, r);
            let all = sl2_elements(&f).unwrap();
            for code in 1..(f.q() * f.q()) as usize {
                let x = Point2::unpack(code, f.q());
                let brute: MatrixSet = all
                    .iter()
                    .copied()
                    .filter(|m| m.apply(&f, x) == x)
                    .collect();
                assert_eq!(point_stabilizer(&f, x).unwrap().matrices, brute);
            }
        }
    }

    #[test]
    fn transporter_matches_brute_filter() {
        let f = field(2, 2);
        let all = sl2_elements(&f).unwrap();
        for c1 in 1..16 {
            for c2 in 1..16 {
                let (m1, m2) = (Point2::unpack(c1, 4), Point2::unpack(c2, 4));
                let got: MatrixSet = transporter(&f, m1, m2).unwrap().collect();
                let brute: MatrixSet = all
                    .iter()
                    .copied()
                    .filter(|m| m.apply(&f, m1) == m2)
                    .collect();
                assert_eq!(got, brute);
            }
        }
    }

    #[test]
    fn point_set_basics() {
        let mut s = PointSet::empty(3);
        assert!(s.insert(Point2::from_codes(1, 2)));
        assert!(!s.insert(Point2::from_codes(1, 2)));
        s.insert(Point2::ORIGIN);
        assert_eq!(s.len(), 2);
        assert_eq!(s.len_punctured(), 1);
        assert_eq!(s.complement().len(), 7);
        assert_eq!(s.to_text(), "points:(0,0);(1,2)");
        assert_eq!(PointSet::full(3).len(), 9);
        let m = PointSet::from_mask(2, 0b1011);
        assert_eq!(m.len(), 3);
        assert_eq!(m.mask(), Some(0b1011));
        assert!(s.without_origin().is_subset(&s));
        assert_eq!(
            parse_point2(&field(3, 1), "(1,2)").unwrap(),
            Point2::from_codes(1, 2)
        );
    }
}
