//! Named point-set families and the set-spec text grammar.
//!
//! Grammar: `family:<name>[:<k>=<v>,...]` or `points:(x,y);(x,y);...`.
//! Values may contain commas when wrapped in brackets, e.g.
//! `family:complement:of=[family:axis-subgroup:c=2]` or
//! `family:orbit-union:gens=[1,1;0,1]|[1,0;1,1],orbits=nonorigin`.

use std::fmt;

use crate::error::{Error, Result};
use crate::gf::{Elem, FieldCtx};
use crate::plane::{parse_mat2, parse_point2, Mat2, Point2, PointSet, ProjLine};
use crate::rng::SplitMix64;
use crate::stabilizer::subgroup_orbits;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrbitSelector {
    /// Every orbit other than `{(0,0)}`.
    NonOrigin,
    /// Orbits by position in the decomposition (ordered by smallest point).
    Indices(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilySpec {
    Empty,
    Origin,
    Full,
    FullMinusOrigin,
    /// The line through the origin with the given slope code (`None` is the
    /// y-axis).
    LineOrigin {
        slope: Option<u32>,
    },
    /// The affine line `{x = x0}`.
    LineAffine {
        x0: u32,
    },
    Complement(Box<FamilySpec>),
    /// The index-`c` multiplicative subgroup placed on the y-axis.
    AxisSubgroup {
        c: u32,
    },
    /// `F_{p^{sub_r}} x F_{p^{sub_r}}` inside `F_q^2`.
    SubfieldPlane {
        sub_r: u32,
    },
    OrbitUnion {
        gens: Vec<Mat2>,
        selector: OrbitSelector,
    },
    Random {
        n: usize,
        seed: u64,
    },
    Explicit(Vec<Point2>),
}

impl FamilySpec {
    /// Parses a set spec; matrix and point codes are validated against `f`.
    pub fn parse(f: &FieldCtx, text: &str) -> Result<Self> {
        let text = text.trim();
        let bad = |reason: String| Error::SetSpec {
            spec: text.to_string(),
            reason,
        };
        if let Some(list) = text.strip_prefix("points:") {
            let pts = split_top(list, ';')
                .into_iter()
                .filter(|s| !s.trim().is_empty())
                .map(|s| parse_point2(f, s))
                .collect::<Result<Vec<_>>>()?;
            return Ok(FamilySpec::Explicit(pts));
        }
        let rest = text
            .strip_prefix("family:")
            .ok_or_else(|| bad("expected `family:` or `points:`".into()))?;
        let (name, params) = match rest.split_once(':') {
            Some((n, p)) => (n, p),
            None => (rest, ""),
        };
        let mut kv = Vec::new();
        for item in split_top(params, ',')
            .into_iter()
            .filter(|s| !s.trim().is_empty())
        {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| bad(format!("parameter {item:?} is not k=v")))?;
            kv.push((k.trim(), unbracket(v.trim())));
        }
        let get = |key: &str| kv.iter().find(|(k, _)| *k == key).map(|(_, v)| *v);
        let num = |key: &str| -> Result<Option<u64>> {
            get(key)
                .map(|v| {
                    v.parse::<u64>()
                        .map_err(|_| bad(format!("{key} must be a nonnegative integer")))
                })
                .transpose()
        };
        let required = |key: &str| -> Result<u64> {
            num(key)?.ok_or_else(|| bad(format!("missing parameter {key}")))
        };
        let known: &[&str] = match name {
            "line-origin" => &["slope"],
            "line-affine" => &["x"],
            "complement" => &["of"],
            "axis-subgroup" => &["c"],
            "subfield-plane" => &["sub-r"],
            "orbit-union" => &["gens", "orbits"],
            "random" => &["n", "seed"],
            _ => &[],
        };
        if let Some((k, _)) = kv.iter().find(|(k, _)| !known.contains(k)) {
            return Err(bad(format!("unknown parameter {k} for {name}")));
        }
        let spec = match name {
            "empty" => FamilySpec::Empty,
            "origin" => FamilySpec::Origin,
            "full" => FamilySpec::Full,
            "full-minus-origin" => FamilySpec::FullMinusOrigin,
            "line-origin" => match get("slope") {
                None => FamilySpec::LineOrigin { slope: Some(0) },
                Some("inf") => FamilySpec::LineOrigin { slope: None },
                Some(_) => FamilySpec::LineOrigin {
                    slope: Some(required("slope")? as u32),
                },
            },
            "line-affine" => FamilySpec::LineAffine {
                x0: num("x")?.unwrap_or(1) as u32,
            },
            "complement" => {
                let inner = get("of").ok_or_else(|| bad("missing parameter of".into()))?;
                let inner = if inner.contains(':') {
                    inner.to_string()
                } else {
                    format!("family:{inner}")
                };
                FamilySpec::Complement(Box::new(FamilySpec::parse(f, &inner)?))
            }
            "axis-subgroup" => FamilySpec::AxisSubgroup {
                c: required("c")? as u32,
            },
            "subfield-plane" => FamilySpec::SubfieldPlane {
                sub_r: required("sub-r")? as u32,
            },
            "orbit-union" => {
                let gens = get("gens")
                    .ok_or_else(|| bad("missing parameter gens".into()))?
                    .split('|')
                    .map(|m| parse_mat2(f, m))
                    .collect::<Result<Vec<_>>>()?;
                let selector = match get("orbits").unwrap_or("nonorigin") {
                    "nonorigin" => OrbitSelector::NonOrigin,
                    list => OrbitSelector::Indices(
                        list.split('|')
                            .map(|i| {
                                i.trim()
                                    .parse()
                                    .map_err(|_| bad(format!("bad orbit index {i:?}")))
                            })
                            .collect::<Result<Vec<_>>>()?,
                    ),
                };
                FamilySpec::OrbitUnion { gens, selector }
            }
            "random" => FamilySpec::Random {
                n: required("n")? as usize,
                seed: num("seed")?.unwrap_or(0),
            },
            other => return Err(bad(format!("unknown family {other:?}"))),
        };
        spec.validate(f)?;
        Ok(spec)
    }

    /// Checks the parameters against the field.
    pub fn validate(&self, f: &FieldCtx) -> Result<()> {
        let q = f.q();
        let bad = |reason: String| Error::SetSpec {
            spec: self.to_string(),
            reason,
        };
        match self {
            FamilySpec::LineOrigin { slope: Some(s) } => {
                f.elem(u64::from(*s))?;
            }
            FamilySpec::LineAffine { x0 } => {
                f.elem(u64::from(*x0))?;
            }
            FamilySpec::Complement(inner) => inner.validate(f)?,
            FamilySpec::AxisSubgroup { c } => {
                if *c == 0 || !(q - 1).is_multiple_of(*c) {
                    return Err(Error::NotDivisor {
                        divisor: u64::from(*c),
                        value: u64::from(q - 1),
                    });
                }
            }
            FamilySpec::SubfieldPlane { sub_r } => {
                if *sub_r == 0 || !f.r().is_multiple_of(*sub_r) {
                    return Err(Error::NotDivisor {
                        divisor: u64::from(*sub_r),
                        value: u64::from(f.r()),
                    });
                }
            }
            FamilySpec::OrbitUnion { gens, .. } => {
                if gens.is_empty() {
                    return Err(bad("orbit-union needs at least one generator".into()));
                }
                for g in gens {
                    let det = g.det(f);
                    if det != Elem::ONE {
                        return Err(Error::NotSl2 { det: det.0 });
                    }
                }
            }
            FamilySpec::Random { n, .. } => {
                let cap = q as usize * q as usize;
                if *n > cap {
                    return Err(bad(format!("n = {n} exceeds q^2 = {cap}")));
                }
            }
            FamilySpec::Explicit(pts) => {
                for p in pts {
                    f.elem(u64::from(p.x.0))?;
                    f.elem(u64::from(p.y.0))?;
                }
            }
            _ => {}
        }
        Ok(())
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Empty => write!(out, "family:empty"),
            FamilySpec::Origin => write!(out, "family:origin"),
            FamilySpec::Full => write!(out, "family:full"),
            FamilySpec::FullMinusOrigin => write!(out, "family:full-minus-origin"),
            FamilySpec::LineOrigin { slope: Some(s) } => {
                write!(out, "family:line-origin:slope={s}")
            }
            FamilySpec::LineOrigin { slope: None } => write!(out, "family:line-origin:slope=inf"),
            FamilySpec::LineAffine { x0 } => write!(out, "family:line-affine:x={x0}"),
            FamilySpec::Complement(inner) => write!(out, "family:complement:of=[{inner}]"),
            FamilySpec::AxisSubgroup { c } => write!(out, "family:axis-subgroup:c={c}"),
            FamilySpec::SubfieldPlane { sub_r } => {
                write!(out, "family:subfield-plane:sub-r={sub_r}")
            }
            FamilySpec::OrbitUnion { gens, selector } => {
                let gens: Vec<String> = gens.iter().map(Mat2::to_string).collect();
                let sel = match selector {
                    OrbitSelector::NonOrigin => "nonorigin".to_string(),
                    OrbitSelector::Indices(ix) => ix
                        .iter()
                        .map(usize::to_string)
                        .collect::<Vec<_>>()
                        .join("|"),
                };
                write!(
                    out,
                    "family:orbit-union:gens={},orbits={sel}",
                    gens.join("|")
                )
            }
            FamilySpec::Random { n, seed } => write!(out, "family:random:n={n},seed={seed}"),
            FamilySpec::Explicit(pts) => {
                let pts: Vec<String> = pts.iter().map(Point2::to_string).collect();
                write!(out, "points:{}", pts.join(";"))
            }
        }
    }
}

/// Splits on `sep` outside of `()` and `[]`.
fn split_top(text: &str, sep: char) -> Vec<&str> {
    let mut depth = 0i32;
    let mut start = 0;
    let mut out = Vec::new();
    for (i, ch) in text.char_indices() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(&text[start..i]);
                start = i + ch.len_utf8();
            }
            _ => {}
        }
    }
    out.push(&text[start..]);
    out
}

/// Strips the brackets around a nested set spec such as `[family:x:c=2]`.
fn unbracket(v: &str) -> &str {
    match v.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
        Some(inner) if inner.starts_with("family:") || inner.starts_with("points:") => inner,
        _ => v,
    }
}

/// Builds the set described by `spec`.
pub fn gen_family(f: &FieldCtx, spec: &FamilySpec) -> Result<PointSet> {
    spec.validate(f)?;
    let q = f.q();
    Ok(match spec {
        FamilySpec::Empty => PointSet::empty(q),
        FamilySpec::Origin => PointSet::from_points(q, [Point2::ORIGIN]),
        FamilySpec::Full => PointSet::full(q),
        FamilySpec::FullMinusOrigin => PointSet::full(q).without_origin(),
        FamilySpec::LineOrigin { slope } => {
            let line = match slope {
                Some(s) => ProjLine::Slope(f.elem(u64::from(*s))?),
                None => ProjLine::YAxis,
            };
            PointSet::from_points(q, line.points(f))
        }
        FamilySpec::LineAffine { x0 } => {
            let x = f.elem(u64::from(*x0))?;
            PointSet::from_points(q, f.elements().map(|y| Point2::new(x, y)))
        }
        FamilySpec::Complement(inner) => gen_family(f, inner)?.complement(),
        FamilySpec::AxisSubgroup { c } => {
            let s = f.mult_subgroup(*c)?;
            PointSet::from_points(q, s.iter().map(|y| Point2::new(Elem::ZERO, y)))
        }
        FamilySpec::SubfieldPlane { sub_r } => {
            let s = f.subfield_elements(*sub_r)?;
            PointSet::from_points(
                q,
                s.iter()
                    .flat_map(|x| s.iter().map(move |y| Point2::new(x, y))),
            )
        }
        FamilySpec::OrbitUnion { gens, selector } => {
            let dec = subgroup_orbits(f, gens)?;
            let mut out = PointSet::empty(q);
            match selector {
                OrbitSelector::NonOrigin => {
                    for o in dec.nonorigin_orbits() {
                        out = out.union(o);
                    }
                }
                OrbitSelector::Indices(ix) => {
                    for &i in ix {
                        let o = dec.orbits.get(i).ok_or_else(|| Error::SetSpec {
                            spec: spec.to_string(),
                            reason: format!(
                                "orbit index {i} out of range ({} orbits)",
                                dec.orbits.len()
                            ),
                        })?;
                        out = out.union(o);
                    }
                }
            }
            out
        }
        FamilySpec::Random { n, seed } => {
            let cap = q as usize * q as usize;
            let mut rng = SplitMix64::new(*seed);
            let mut out = PointSet::empty(q);
            for code in rng.sample_indices(cap, *n) {
                out.insert_code(code);
            }
            out
        }
        FamilySpec::Explicit(pts) => PointSet::from_points(q, pts.iter().copied()),
    })
}

/// `m1` random nonzero points on each of `m0` random lines through the
/// origin, so every line meeting the set meets it equally often.
pub fn random_uniform_class(
    f: &FieldCtx,
    m0: usize,
    m1: usize,
    rng: &mut SplitMix64,
) -> Result<PointSet> {
    let q = f.q() as usize;
    if m0 == 0 || m0 > q + 1 || m1 == 0 || m1 > q - 1 {
        return Err(Error::Config(format!(
            "need 1 <= m0 <= {} and 1 <= m1 <= {}",
            q + 1,
            q - 1
        )));
    }
    let mut out = PointSet::empty(f.q());
    for li in rng.sample_indices(q + 1, m0) {
        let pts: Vec<Point2> = ProjLine::from_index(li, f.q())
            .points(f)
            .filter(|p| !p.is_origin())
            .collect();
        for i in rng.sample_indices(pts.len(), m1) {
            out.insert(pts[i]);
        }
    }
    Ok(out)
}

/// Parses `text` and builds the set.
pub fn parse_set(f: &FieldCtx, text: &str) -> Result<PointSet> {
    gen_family(f, &FamilySpec::parse(f, text)?)
}
