//! Closest-vector style enumeration for `p = 2` on the exact rational Gram
//! matrix. Independent of the triangular kernel and used to cross-check it.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::{BallQuery, EnumError, Lattice};
use crate::exactvec::{root_bounds, PNorm, Rational, SparseVector};

struct Ldl {
    l: Vec<Vec<Rational>>,
    d: Vec<Rational>,
}

fn ldl(g: &[Vec<Rational>]) -> Result<Ldl, EnumError> {
    let k = g.len();
    let mut l = vec![vec![Rational::zero(); k]; k];
    let mut d = vec![Rational::zero(); k];
    for j in 0..k {
        let mut dj = g[j][j].clone();
        for m in 0..j {
            dj -= &l[j][m] * &l[j][m] * &d[m];
        }
        if dj.is_zero() {
            return Err(EnumError::SingularGram);
        }
        for i in j + 1..k {
            let mut s = g[i][j].clone();
            for m in 0..j {
                s -= &l[i][m] * &l[j][m] * &d[m];
            }
            l[i][j] = s / &dj;
        }
        l[j][j] = Rational::from_integer(BigInt::from(1));
        d[j] = dj;
    }
    Ok(Ldl { l, d })
}

impl Ldl {
    // Solves G y = b.
    fn solve(&self, b: &[Rational]) -> Vec<Rational> {
        let k = b.len();
        let mut z = b.to_vec();
        for i in 0..k {
            for m in 0..i {
                let t = &self.l[i][m] * &z[m];
                z[i] -= t;
            }
        }
        for (zi, di) in z.iter_mut().zip(&self.d) {
            *zi = &*zi / di;
        }
        for i in (0..k).rev() {
            for m in i + 1..k {
                let t = &self.l[m][i] * &z[m];
                z[i] -= t;
            }
        }
        z
    }
}

fn floor(x: &Rational) -> BigInt {
    x.floor().to_integer()
}

fn ceil(x: &Rational) -> BigInt {
    x.ceil().to_integer()
}

struct Search<'a> {
    ldl: &'a Ldl,
    y: &'a [Rational],
    budget: Rational,
    strict: bool,
    n: Vec<BigInt>,
    out: Vec<Vec<BigInt>>,
}

impl Search<'_> {
    fn accept(&self, total: &Rational) -> bool {
        match total.cmp(&self.budget) {
            Ordering::Less => true,
            Ordering::Equal => !self.strict,
            Ordering::Greater => false,
        }
    }

    fn level(&mut self, i: usize, used: Rational) {
        let k = self.y.len();
        // s = sum_{j>i} L_{ji} (n_j - y_j)
        let mut s = Rational::zero();
        for j in i + 1..k {
            s += &self.ldl.l[j][i] * (Rational::from_integer(self.n[j].clone()) - &self.y[j]);
        }
        let center = &self.y[i] - &s;
        let rem = &self.budget - &used;
        if rem.is_negative() {
            return;
        }
        let (_, hi) = root_bounds(&(&rem / &self.ldl.d[i]), PNorm::L2, 32);
        let lo_n = ceil(&(&center - &hi));
        let hi_n = floor(&(&center + &hi));
        let mut n = lo_n;
        while n <= hi_n {
            let t = Rational::from_integer(n.clone()) - &center;
            let total = &used + &self.ldl.d[i] * &t * &t;
            if total <= self.budget {
                self.n[i] = n.clone();
                if i == 0 {
                    if self.accept(&total) {
                        self.out.push(self.n.clone());
                    }
                } else {
                    self.level(i - 1, total);
                }
            }
            n += 1;
        }
        self.n[i] = BigInt::zero();
    }
}

/// All elements of the ball for `p = 2`, via the Gram matrix of the
/// lattice basis. Sorted by element.
pub fn enumerate_gram(lattice: &Lattice, query: &BallQuery) -> Result<Vec<SparseVector>, EnumError> {
    if lattice.p().p() != 2 {
        return Err(EnumError::UnsupportedNorm(lattice.p().p()));
    }
    let basis = lattice.basis().ok_or(EnumError::BoundUnderivable)?;
    let k = basis.len();
    let c = &query.center;
    let c_norm = c.dot(c);
    let radius = query.radius.value().clone();
    if k == 0 {
        let inside = match c_norm.cmp(&radius) {
            Ordering::Less => true,
            Ordering::Equal => !query.strict,
            Ordering::Greater => false,
        };
        return Ok(if inside { vec![SparseVector::zero()] } else { Vec::new() });
    }
    let g: Vec<Vec<Rational>> = basis.iter().map(|a| basis.iter().map(|b| a.dot(b)).collect()).collect();
    let ldl = ldl(&g)?;
    let rhs: Vec<Rational> = basis.iter().map(|b| b.dot(c)).collect();
    let y = ldl.solve(&rhs);
    // ||x - c||^2 = q(n - y) + ||c_perp||^2
    let par: Rational = y.iter().zip(&rhs).map(|(a, b)| a * b).sum();
    let perp = c_norm - par;
    let budget = radius - perp;
    if budget.is_negative() || (query.strict && budget.is_zero()) {
        return Ok(Vec::new());
    }
    let mut search = Search { ldl: &ldl, y: &y, budget, strict: query.strict, n: vec![BigInt::zero(); k], out: Vec::new() };
    search.level(k - 1, Rational::zero());
    let mut out: Vec<SparseVector> = search
        .out
        .iter()
        .map(|n| {
            basis.iter().zip(n).fold(SparseVector::zero(), |acc, (b, c)| {
                if c.is_zero() {
                    acc
                } else {
                    acc.add_scaled(b, &Rational::from_integer(c.clone()))
                }
            })
        })
        .collect();
    out.sort();
    Ok(out)
}
