//! Independent oracles: schoolbook polynomial arithmetic over F_p and a
//! brute-force stabilizer over all 4-tuples, sharing only the element
//! encoding and the modulus with the library.

#![allow(dead_code)]

use std::collections::BTreeSet;

use slab_core::{FieldCtx, Mat2, Point2, PointSet};

pub struct Oracle {
    pub p: u32,
    pub r: u32,
    pub q: u32,
    add: Vec<u32>,
    mul: Vec<u32>,
    /// All `(a, b, c, d)` with `ad - bc = 1`.
    pub sl2: Vec<[u32; 4]>,
}

impl Oracle {
    pub fn new(f: &FieldCtx) -> Self {
        let (p, r, q) = (f.p(), f.r(), f.q());
        let modulus = f.modulus().to_vec();
        assert_eq!(modulus.len() as u32, r + 1);
        assert_eq!(*modulus.last().unwrap(), 1, "monic");
        let digits = |mut x: u32| -> Vec<u32> {
            (0..r)
                .map(|_| {
                    let d = x % p;
                    x /= p;
                    d
                })
                .collect()
        };
        let encode = |ds: &[u32]| ds.iter().rev().fold(0, |acc, &d| acc * p + d);
        let n = q as usize;
        let mut add = vec![0; n * n];
        let mut mul = vec![0; n * n];
        for x in 0..q {
            for y in 0..q {
                let (dx, dy) = (digits(x), digits(y));
                let s: Vec<u32> = dx.iter().zip(&dy).map(|(a, b)| (a + b) % p).collect();
                add[(x * q + y) as usize] = encode(&s);
                let mut prod = vec![0u32; 2 * r as usize];
                for (i, a) in dx.iter().enumerate() {
                    for (j, b) in dy.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + a * b) % p;
                    }
                }
                for k in (r as usize..prod.len()).rev() {
                    let lead = prod[k];
                    if lead != 0 {
                        for (i, m) in modulus.iter().enumerate() {
                            let idx = k - r as usize + i;
                            prod[idx] = (prod[idx] + p * p - lead * m % p) % p;
                        }
                    }
                }
                mul[(x * q + y) as usize] = encode(&prod[..r as usize]);
            }
        }
        let mut o = Oracle {
            p,
            r,
            q,
            add,
            mul,
            sl2: Vec::new(),
        };
        for x in 1..q {
            assert!(
                (1..q).any(|y| o.mul(x, y) == 1),
                "modulus is not irreducible"
            );
        }
        let mut sl2 = Vec::new();
        for a in 0..q {
            for b in 0..q {
                for c in 0..q {
                    for d in 0..q {
                        if o.sub(o.mul(a, d), o.mul(b, c)) == 1 {
                            sl2.push([a, b, c, d]);
                        }
                    }
                }
            }
        }
        assert_eq!(sl2.len() as u64, u64::from(q).pow(3) - u64::from(q));
        o.sl2 = sl2;
        o
    }

    pub fn add(&self, x: u32, y: u32) -> u32 {
        self.add[(x * self.q + y) as usize]
    }

    pub fn mul(&self, x: u32, y: u32) -> u32 {
        self.mul[(x * self.q + y) as usize]
    }

    pub fn neg(&self, x: u32) -> u32 {
        (0..self.q).find(|&y| self.add(x, y) == 0).unwrap()
    }

    pub fn sub(&self, x: u32, y: u32) -> u32 {
        self.add(x, self.neg(y))
    }

    pub fn inv(&self, x: u32) -> u32 {
        (1..self.q).find(|&y| self.mul(x, y) == 1).unwrap()
    }

    pub fn apply(&self, m: [u32; 4], (x, y): (u32, u32)) -> (u32, u32) {
        let [a, b, c, d] = m;
        (
            self.add(self.mul(a, x), self.mul(b, y)),
            self.add(self.mul(c, x), self.mul(d, y)),
        )
    }

    /// Every `θ` with `θ(E) ⊆ E`, which for a bijection means `θ(E) = E`.
    pub fn stabilizer(&self, e: &BTreeSet<(u32, u32)>) -> BTreeSet<[u32; 4]> {
        self.sl2
            .iter()
            .copied()
            .filter(|&m| e.iter().all(|&v| e.contains(&self.apply(m, v))))
            .collect()
    }

    pub fn stabilizer_of(&self, e: &PointSet) -> BTreeSet<[u32; 4]> {
        self.stabilizer(&to_pairs(e))
    }
}

pub fn to_pairs(e: &PointSet) -> BTreeSet<(u32, u32)> {
    e.iter().map(|p| (p.x.0, p.y.0)).collect()
}

pub fn from_pairs(q: u32, pairs: impl IntoIterator<Item = (u32, u32)>) -> PointSet {
    PointSet::from_points(q, pairs.into_iter().map(|(x, y)| Point2::from_codes(x, y)))
}

pub fn codes(set: &BTreeSet<Mat2>) -> BTreeSet<[u32; 4]> {
    set.iter().map(|m| [m.a.0, m.b.0, m.c.0, m.d.0]).collect()
}

pub fn field(p: u32, r: u32) -> FieldCtx {
    FieldCtx::new(p, r).unwrap()
}

/// `(p, r)` for every `q = p^r <= max_q`.
pub fn fields_up_to(max_q: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for p in [2u32, 3, 5, 7, 11, 13] {
        let mut q = p;
        let mut r = 1;
        while q <= max_q {
            out.push((p, r));
            q *= p;
            r += 1;
        }
    }
    out.sort_by_key(|&(p, r)| p.pow(r));
    out
}
