//! Exact branch-and-bound over a triangular basis in scaled integer
//! coordinates.
//!
//! Each basis level `i` owns the coordinates that no older level touches;
//! once the coefficients of levels `>= i` are fixed those coordinates are
//! final. The search fixes the newest nonzero coefficient first and then
//! jumps to the next nonzero level below it, so every element is visited
//! exactly once through its sequence of nonzero levels.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::ControlFlow;

use super::EnumError;

const NO_LEVEL: usize = usize::MAX;

/// A prepared search problem. All coordinates are multiplied by a common
/// integer scale so the values are exact `i128`s.
pub(crate) struct Kernel {
    p: u32,
    limit: i128,
    rows: Vec<Vec<(usize, i128)>>,
    own: Vec<Vec<(usize, i128)>>,
    pivot: Vec<usize>,
    pivot_val: Vec<i128>,
    prefix_weight: Vec<i128>,
    min_gen: Vec<usize>,
    pivot_level: Vec<usize>,
    val: Vec<i128>,
    touch: Vec<u32>,
    touched: Vec<usize>,
    root_cost: i128,
}

pub(crate) struct Visit<'a> {
    /// `(level, coefficient)` for every nonzero level, newest first.
    pub coeffs: &'a [(usize, i64)],
    /// Scaled `p`-th power distance to the center.
    pub cost: i128,
}

fn pow_sat(x: i128, p: u32) -> i128 {
    x.unsigned_abs()
        .checked_pow(p)
        .and_then(|v| i128::try_from(v).ok())
        .unwrap_or(i128::MAX)
}

/// Largest `r >= 0` with `r^p <= x`.
pub(crate) fn iroot(x: i128, p: u32) -> i128 {
    if x <= 0 {
        return 0;
    }
    if p == 1 {
        return x;
    }
    let bits = 128 - x.leading_zeros();
    let (mut lo, mut hi) = (0i128, 1i128 << (bits / p + 1).min(126));
    // invariant: lo^p <= x < hi^p
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pow_sat(mid, p) <= x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn div_floor(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn div_ceil(a: i128, b: i128) -> i128 {
    -div_floor(-a, b)
}

impl Kernel {
    /// `rows[i]` lists `(position, scaled entry)` for level `i`; `center`
    /// lists scaled center coordinates; a point `x` is accepted when
    /// `sum |x - center|^p <= limit` in scaled units.
    pub(crate) fn new(
        p: u32,
        positions: usize,
        rows: Vec<Vec<(usize, i128)>>,
        center: &[(usize, i128)],
        limit: i128,
    ) -> Result<Kernel, EnumError> {
        let k = rows.len();
        let mut min_gen = vec![NO_LEVEL; positions];
        for (i, row) in rows.iter().enumerate() {
            for &(q, _) in row {
                if min_gen[q] == NO_LEVEL {
                    min_gen[q] = i;
                }
            }
        }
        let mut own: Vec<Vec<(usize, i128)>> = vec![Vec::new(); k];
        for (i, row) in rows.iter().enumerate() {
            for &(q, x) in row {
                if min_gen[q] == i {
                    own[i].push((q, x));
                }
            }
        }
        let mut pivot = Vec::with_capacity(k);
        let mut pivot_val = Vec::with_capacity(k);
        let mut pivot_level = vec![NO_LEVEL; positions];
        for (i, o) in own.iter().enumerate() {
            let &(q, x) = o
                .iter()
                .max_by_key(|(_, x)| x.unsigned_abs())
                .ok_or(EnumError::BoundUnderivable)?;
            pivot.push(q);
            pivot_val.push(x);
            pivot_level[q] = i;
        }
        let mut prefix_weight = Vec::with_capacity(k);
        let mut acc = i128::MAX;
        for &x in &pivot_val {
            acc = acc.min(pow_sat(x, p));
            prefix_weight.push(acc);
        }
        let mut val = vec![0i128; positions];
        let mut touch = vec![0u32; positions];
        let mut touched = Vec::new();
        let mut root_cost: i128 = 0;
        for &(q, c) in center {
            val[q] = c.checked_neg().ok_or(EnumError::Overflow)?;
            if min_gen[q] == NO_LEVEL {
                root_cost = root_cost.saturating_add(pow_sat(c, p));
            } else {
                touch[q] = 1;
                touched.push(q);
            }
        }
        Ok(Kernel {
            p,
            limit,
            rows,
            own,
            pivot,
            pivot_val,
            prefix_weight,
            min_gen,
            pivot_level,
            val,
            touch,
            touched,
            root_cost,
        })
    }

    pub(crate) fn run<F>(&mut self, visit: &mut F) -> Result<(), EnumError>
    where
        F: FnMut(Visit<'_>) -> ControlFlow<()>,
    {
        if self.root_cost > self.limit {
            return Ok(());
        }
        let mut coeffs = Vec::new();
        let top = self.rows.len();
        let _ = self.explore(top, self.root_cost, &mut coeffs, visit)?;
        Ok(())
    }

    fn explore<F>(
        &mut self,
        top: usize,
        cost_fixed: i128,
        coeffs: &mut Vec<(usize, i64)>,
        visit: &mut F,
    ) -> Result<ControlFlow<()>, EnumError>
    where
        F: FnMut(Visit<'_>) -> ControlFlow<()>,
    {
        let mut pending: Vec<(usize, usize, i128)> = self
            .touched
            .iter()
            .filter(|&&q| self.min_gen[q] < top)
            .map(|&q| (q, self.min_gen[q], pow_sat(self.val[q], self.p)))
            .filter(|&(_, _, w)| w > 0)
            .collect();
        let leaf = pending.iter().fold(cost_fixed, |s, &(_, _, w)| s.saturating_add(w));
        if leaf <= self.limit && visit(Visit { coeffs, cost: leaf }).is_break() {
            return Ok(ControlFlow::Break(()));
        }
        pending.sort_unstable_by_key(|a| core::cmp::Reverse(a.1));

        let mut j = top;
        let mut ptr = 0;
        let mut cost_before = cost_fixed;
        while j > 0 {
            j -= 1;
            while ptr < pending.len() && pending[ptr].1 > j {
                cost_before = cost_before.saturating_add(pending[ptr].2);
                ptr += 1;
            }
            if cost_before > self.limit {
                break;
            }
            let rem = self.limit - cost_before;
            if rem < self.prefix_weight[j] {
                // Only a level whose pivot is already nonzero can still fit.
                let next = pending[ptr..]
                    .iter()
                    .map(|&(q, _, _)| self.pivot_level[q])
                    .find(|&l| l != NO_LEVEL);
                match next {
                    None => break,
                    Some(l) if l < j => {
                        j = l + 1;
                        continue;
                    }
                    Some(_) => {}
                }
            }
            if self.try_level(j, rem, cost_before, coeffs, visit)?.is_break() {
                return Ok(ControlFlow::Break(()));
            }
        }
        Ok(ControlFlow::Continue(()))
    }

    fn try_level<F>(
        &mut self,
        j: usize,
        rem: i128,
        cost_before: i128,
        coeffs: &mut Vec<(usize, i64)>,
        visit: &mut F,
    ) -> Result<ControlFlow<()>, EnumError>
    where
        F: FnMut(Visit<'_>) -> ControlFlow<()>,
    {
        let a = self.val[self.pivot[j]];
        let pv = self.pivot_val[j];
        let r = iroot(rem, self.p);
        // |n*pv + a| <= r
        let (lo, hi) = if pv > 0 {
            (div_ceil(-r - a, pv), div_floor(r - a, pv))
        } else {
            (div_ceil(r - a, pv), div_floor(-r - a, pv))
        };
        for n in lo..=hi {
            if n == 0 {
                continue;
            }
            let mut cost_j: i128 = 0;
            for &(q, x) in &self.own[j] {
                let v = x.checked_mul(n).and_then(|t| t.checked_add(self.val[q])).ok_or(EnumError::Overflow)?;
                cost_j = cost_j.saturating_add(pow_sat(v, self.p));
            }
            let total = cost_before.saturating_add(cost_j);
            if total > self.limit {
                continue;
            }
            let n64 = i64::try_from(n).map_err(|_| EnumError::Overflow)?;
            self.apply(j, n)?;
            coeffs.push((j, n64));
            let flow = self.explore(j, total, coeffs, visit);
            coeffs.pop();
            self.unapply(j, n);
            if flow?.is_break() {
                return Ok(ControlFlow::Break(()));
            }
        }
        Ok(ControlFlow::Continue(()))
    }

    fn apply(&mut self, j: usize, n: i128) -> Result<(), EnumError> {
        for idx in 0..self.rows[j].len() {
            let (q, x) = self.rows[j][idx];
            let v = x.checked_mul(n).and_then(|t| t.checked_add(self.val[q]));
            let Some(v) = v else {
                for &(q2, x2) in &self.rows[j][..idx] {
                    self.val[q2] -= x2 * n;
                    self.touch[q2] -= 1;
                    if self.touch[q2] == 0 {
                        self.touched.pop();
                    }
                }
                return Err(EnumError::Overflow);
            };
            self.val[q] = v;
            self.touch[q] += 1;
            if self.touch[q] == 1 {
                self.touched.push(q);
            }
        }
        Ok(())
    }

    fn unapply(&mut self, j: usize, n: i128) {
        for &(q, x) in self.rows[j].iter().rev() {
            self.val[q] -= x * n;
            self.touch[q] -= 1;
            if self.touch[q] == 0 {
                let popped = self.touched.pop();
                debug_assert_eq!(popped, Some(q));
            }
        }
    }
}
