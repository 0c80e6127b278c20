//! Exact rational feasibility LP (two-phase simplex, Bland's rule).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn q(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

/// Feasibility problem over rationals: variables are either free or
/// nonnegative; constraints are `a·x = b` or `a·x >= b`.
#[derive(Clone, Debug, Default)]
pub struct Feasibility {
    free: Vec<bool>,
    eqs: Vec<(Vec<Q>, Q)>,
    ges: Vec<(Vec<Q>, Q)>,
}

impl Feasibility {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a variable and returns its index.
    pub fn var(&mut self, free: bool) -> usize {
        self.free.push(free);
        self.free.len() - 1
    }

    pub fn vars(&mut self, n: usize, free: bool) -> Vec<usize> {
        (0..n).map(|_| self.var(free)).collect()
    }

    pub fn num_vars(&self) -> usize {
        self.free.len()
    }

    /// `Σ coeff·x_var = rhs`
    pub fn eq(&mut self, terms: &[(usize, Q)], rhs: Q) {
        let row = self.dense(terms);
        self.eqs.push((row, rhs));
    }

    /// `Σ coeff·x_var >= rhs`
    pub fn ge(&mut self, terms: &[(usize, Q)], rhs: Q) {
        let row = self.dense(terms);
        self.ges.push((row, rhs));
    }

    fn dense(&self, terms: &[(usize, Q)]) -> Vec<Q> {
        let mut row = vec![Q::zero(); self.free.len()];
        for (v, c) in terms {
            row[*v] += c;
        }
        row
    }

    /// Returns a feasible point, or `None` if the system is infeasible.
    pub fn solve(&self) -> Option<Vec<Q>> {
        let n = self.free.len();
        // standard-form columns: x = x+ - x- for free vars, slack per >= row
        let mut col_of: Vec<(usize, Option<usize>)> = Vec::with_capacity(n);
        let mut ncols = 0;
        for &f in &self.free {
            if f {
                col_of.push((ncols, Some(ncols + 1)));
                ncols += 2;
            } else {
                col_of.push((ncols, None));
                ncols += 1;
            }
        }
        let nslack = self.ges.len();
        let total = ncols + nslack;
        let mut a: Vec<Vec<Q>> = Vec::new();
        let mut b: Vec<Q> = Vec::new();
        let expand = |row: &[Q]| {
            let mut out = vec![Q::zero(); total];
            for (v, c) in row.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let (p, m) = col_of[v];
                out[p] += c;
                if let Some(m) = m {
                    out[m] -= c;
                }
            }
            out
        };
        for (row, rhs) in &self.eqs {
            a.push(expand(row));
            b.push(rhs.clone());
        }
        for (k, (row, rhs)) in self.ges.iter().enumerate() {
            let mut r = expand(row);
            r[ncols + k] = -Q::one();
            a.push(r);
            b.push(rhs.clone());
        }
        let y = phase_one(a, b, total)?;
        Some(
            col_of
                .iter()
                .map(|&(p, m)| match m {
                    Some(m) => &y[p] - &y[m],
                    None => y[p].clone(),
                })
                .collect(),
        )
    }

    pub fn is_feasible(&self) -> bool {
        self.solve().is_some()
    }
}

/// Phase-one simplex for `A y = b, y >= 0`. Returns a feasible `y`.
fn phase_one(mut a: Vec<Vec<Q>>, mut b: Vec<Q>, n: usize) -> Option<Vec<Q>> {
    let m = a.len();
    if m == 0 {
        return Some(vec![Q::zero(); n]);
    }
    for i in 0..m {
        if b[i].is_negative() {
            b[i] = -&b[i];
            for v in a[i].iter_mut() {
                *v = -&*v;
            }
        }
    }
    // tableau: columns 0..n real, n..n+m artificial, last = rhs
    let width = n + m + 1;
    let mut t: Vec<Vec<Q>> = (0..m)
        .map(|i| {
            let mut row = a[i].clone();
            row.extend((0..m).map(|j| if i == j { Q::one() } else { Q::zero() }));
            row.push(b[i].clone());
            row
        })
        .collect();
    let mut basis: Vec<usize> = (n..n + m).collect();
    // objective: minimise the sum of artificials; reduced costs row
    let mut obj = vec![Q::zero(); width];
    for row in &t {
        for j in 0..n {
            obj[j] -= &row[j];
        }
        obj[width - 1] -= &row[width - 1];
    }
    loop {
        let Some(enter) = (0..n + m).find(|&j| obj[j].is_negative()) else { break };
        let mut leave: Option<(usize, Q)> = None;
        for i in 0..m {
            if t[i][enter].is_positive() {
                let ratio = &t[i][width - 1] / &t[i][enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (r, _) = leave?; // unbounded cannot happen in phase one
        pivot(&mut t, &mut obj, r, enter);
        basis[r] = enter;
    }
    if !obj[width - 1].is_zero() {
        return None;
    }
    let mut y = vec![Q::zero(); n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            y[bv] = t[i][width - 1].clone();
        }
    }
    Some(y)
}

fn pivot(t: &mut [Vec<Q>], obj: &mut [Q], r: usize, c: usize) {
    let p = t[r][c].clone();
    for v in t[r].iter_mut() {
        *v = &*v / &p;
    }
    let pr = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i != r && !row[c].is_zero() {
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(pr.iter()) {
                *x = &*x - &f * y;
            }
        }
    }
    if !obj[c].is_zero() {
        let f = obj[c].clone();
        for (x, y) in obj.iter_mut().zip(pr.iter()) {
            *x = &*x - &f * y;
        }
    }
}
