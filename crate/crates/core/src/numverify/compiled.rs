use alloc::vec::Vec;

use num_traits::ToPrimitive;

use crate::sym::{RationalFunction, SparsePoly};

fn powu(mut b: f64, mut e: u32) -> f64 {
    let mut acc = 1.0;
    while e > 0 {
        if e & 1 == 1 {
            acc *= b;
        }
        b *= b;
        e >>= 1;
    }
    acc
}

#[derive(Debug, Clone)]
struct FlatPoly(Vec<(f64, Vec<(usize, u32)>)>);

impl FlatPoly {
    fn new(p: &SparsePoly) -> Self {
        FlatPoly(
            p.terms()
                .map(|(m, c)| (c.to_f64().unwrap_or(f64::NAN), m.iter().map(|(s, e)| (s.index(), e)).collect()))
                .collect(),
        )
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.0.iter().map(|(c, m)| m.iter().fold(*c, |acc, &(i, e)| acc * powu(x[i], e))).sum()
    }

    fn is_one(&self) -> bool {
        self.0.len() == 1 && self.0[0].0 == 1.0 && self.0[0].1.is_empty()
    }
}

/// A rational function flattened for fast evaluation on symbol-indexed slices.
#[derive(Debug, Clone)]
pub struct Compiled {
    num: FlatPoly,
    den: FlatPoly,
}

impl Compiled {
    pub fn new(e: &RationalFunction) -> Self {
        Compiled { num: FlatPoly::new(e.num()), den: FlatPoly::new(e.den()) }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let n = self.num.eval(x);
        if self.den.is_one() {
            n
        } else {
            n / self.den.eval(x)
        }
    }

    pub fn den(&self, x: &[f64]) -> f64 {
        self.den.eval(x)
    }
}
