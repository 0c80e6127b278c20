//! Exact integer matrix algebra: Smith and Hermite normal forms, integer
//! kernels, saturation and finitely generated abelian quotient groups.
//!
//! Everything here works over [`BigInt`]; there is no overflow and no
//! floating point. Matrices are small (a few dozen rows at most) so the
//! algorithms favour clarity over asymptotics.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Dense row-major integer matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntMatrix{}x{}[", self.rows, self.cols)?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from `i64` rows. An empty slice gives a `0 x cols` matrix.
    pub fn from_rows<R: AsRef<[i64]>>(cols: usize, rows: &[R]) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "row {i} has {} entries, expected {cols}", r.len());
            for (j, &v) in r.iter().enumerate() {
                m[(i, j)] = BigInt::from(v);
            }
        }
        m
    }

    pub fn from_big_rows(cols: usize, rows: Vec<Vec<BigInt>>) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        let n = rows.len();
        for r in rows {
            assert_eq!(r.len(), cols);
            data.extend(r);
        }
        IntMatrix { rows: n, cols, data }
    }

    pub fn diag(entries: &[i64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = BigInt::from(e);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vec(&self, i: usize) -> Vec<BigInt> {
        self.row(i).to_vec()
    }

    pub fn col_vec(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    /// Row `i` as `i64`s; panics if an entry does not fit.
    pub fn row_i64(&self, i: usize) -> Vec<i64> {
        self.row(i).iter().map(big_to_i64).collect()
    }

    pub fn to_i64_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows).map(|i| self.row_i64(i)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    /// `self * v` for a column vector `v`.
    pub fn apply(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn apply_i64(&self, v: &[i64]) -> Vec<BigInt> {
        let v: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
        self.apply(&v)
    }

    /// Vertical concatenation.
    pub fn stack(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        IntMatrix { rows: self.rows + other.rows, cols: self.cols, data }
    }

    pub fn select_rows(&self, idx: &[usize]) -> IntMatrix {
        IntMatrix::from_big_rows(self.cols, idx.iter().map(|&i| self.row_vec(i)).collect())
    }

    pub fn select_cols(&self, idx: &[usize]) -> IntMatrix {
        let rows = (0..self.rows)
            .map(|i| idx.iter().map(|&j| self[(i, j)].clone()).collect())
            .collect();
        IntMatrix::from_big_rows(idx.len(), rows)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// row[dst] += k * row[src]
    fn add_row(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = &self.data[src * self.cols + j] * k;
            self.data[dst * self.cols + j] += v;
        }
    }

    /// col[dst] += k * col[src]
    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -&self.data[i * self.cols + j];
            self.data[i * self.cols + j] = v;
        }
    }

    /// Replaces rows (a, b) by (p*a + q*b, r*a + s*b).
    fn combine_rows(&mut self, a: usize, b: usize, p: &BigInt, q: &BigInt, r: &BigInt, s: &BigInt) {
        for j in 0..self.cols {
            let x = self.data[a * self.cols + j].clone();
            let y = self.data[b * self.cols + j].clone();
            self.data[a * self.cols + j] = p * &x + q * &y;
            self.data[b * self.cols + j] = r * &x + s * &y;
        }
    }

    fn combine_cols(&mut self, a: usize, b: usize, p: &BigInt, q: &BigInt, r: &BigInt, s: &BigInt) {
        for i in 0..self.rows {
            let x = self.data[i * self.cols + a].clone();
            let y = self.data[i * self.cols + b].clone();
            self.data[i * self.cols + a] = p * &x + q * &y;
            self.data[i * self.cols + b] = r * &x + s * &y;
        }
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if m[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !m[(i, k)].is_zero()) {
                    Some(i) => {
                        m.swap_rows(i, k);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&m[(i, j)] * &m[(k, k)] - &m[(i, k)] * &m[(k, j)]) / &prev;
                    m[(i, j)] = v;
                }
            }
            prev = m[(k, k)].clone();
        }
        sign * &m[(n - 1, n - 1)]
    }

    /// Rank over the rationals.
    pub fn rank(&self) -> usize {
        let (_, d, _) = smith_normal_form(self);
        (0..d.rows.min(d.cols)).filter(|&i| !d[(i, i)].is_zero()).count()
    }

    /// Exact inverse of a square matrix with determinant +-1.
    pub fn inverse_unimodular(&self) -> Option<IntMatrix> {
        let inv = rational_inverse(self)?;
        let mut out = IntMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let q = &inv[i][j];
                if !q.is_integer() {
                    return None;
                }
                out[(i, j)] = q.to_integer();
            }
        }
        Some(out)
    }
}

pub(crate) fn big_to_i64(x: &BigInt) -> i64 {
    x.to_i64().unwrap_or_else(|| panic!("integer {x} does not fit in i64"))
}

fn rational_inverse(m: &IntMatrix) -> Option<Vec<Vec<BigRational>>> {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            let mut row: Vec<BigRational> =
                (0..n).map(|j| BigRational::from_integer(m[(i, j)].clone())).collect();
            row.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !a[i][c].is_zero())?;
        a.swap(p, c);
        let piv = a[c][c].clone();
        for v in a[c].iter_mut() {
            *v = &*v / &piv;
        }
        for i in 0..n {
            if i != c && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                let pivot_row = a[c].clone();
                for (x, y) in a[i].iter_mut().zip(pivot_row.iter()) {
                    *x = &*x - &f * y;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Smith normal form: returns `(U, D, V)` with `U * M * V = D`, `U` and `V`
/// unimodular and `D` diagonal, nonnegative, with `d1 | d2 | ...`.
pub fn smith_normal_form(m: &IntMatrix) -> (IntMatrix, IntMatrix, IntMatrix) {
    let (rows, cols) = (m.rows, m.cols);
    let mut d = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);
    let steps = rows.min(cols);
    let mut t = 0;
    while t < steps {
        // pick the smallest nonzero entry in the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !d[(i, j)].is_zero() {
                    let better = match best {
                        None => true,
                        Some((bi, bj)) => d[(i, j)].abs() < d[(bi, bj)].abs(),
                    };
                    if better {
                        best = Some((i, j));
                    }
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        d.swap_rows(t, pi);
        u.swap_rows(t, pi);
        d.swap_cols(t, pj);
        v.swap_cols(t, pj);

        // Unimodular 2x2 gcd steps rather than quotient steps: the latter
        // let entries of the trailing block explode.
        loop {
            for i in t + 1..rows {
                if d[(i, t)].is_zero() {
                    continue;
                }
                let (x, y, r, s) = gcd_step(&d[(t, t)], &d[(i, t)]);
                d.combine_rows(t, i, &x, &y, &r, &s);
                u.combine_rows(t, i, &x, &y, &r, &s);
            }
            for j in t + 1..cols {
                if d[(t, j)].is_zero() {
                    continue;
                }
                let (x, y, r, s) = gcd_step(&d[(t, t)], &d[(t, j)]);
                d.combine_cols(t, j, &x, &y, &r, &s);
                v.combine_cols(t, j, &x, &y, &r, &s);
            }
            if (t + 1..rows).any(|i| !d[(i, t)].is_zero()) {
                continue;
            }
            // divisibility of the trailing block by the pivot
            let piv = d[(t, t)].clone();
            let offender = (t + 1..rows)
                .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                .find(|&(i, j)| !d[(i, j)].is_multiple_of(&piv));
            match offender {
                Some((i, _)) => {
                    let one = BigInt::one();
                    d.add_row(t, i, &one);
                    u.add_row(t, i, &one);
                }
                None => break,
            }
        }
        if d[(t, t)].is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
        t += 1;
    }
    (u, d, v)
}

/// Coefficients `[x y; r s]` of determinant one sending `(a, b)` to
/// `(gcd, 0)`. When `a` already divides `b` the step is a plain subtraction.
fn gcd_step(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt, BigInt) {
    if !a.is_zero() && b.is_multiple_of(a) {
        return (BigInt::one(), BigInt::zero(), -(b / a), BigInt::one());
    }
    let eg = a.extended_gcd(b);
    let (g, x, y) = (eg.gcd, eg.x, eg.y);
    (x, y, -(b / &g), a / &g)
}

/// Row-style Hermite normal form: returns `(H, U)` with `U * M = H`, `U`
/// unimodular, `H` in row echelon form with positive pivots, zero rows at
/// the bottom, and entries above each pivot reduced into `[0, pivot)`.
pub fn hermite_normal_form(m: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let (rows, cols) = (m.rows, m.cols);
    let mut h = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for c in 0..cols {
        if pivot_row == rows {
            break;
        }
        for i in pivot_row + 1..rows {
            if h[(i, c)].is_zero() {
                continue;
            }
            let a = h[(pivot_row, c)].clone();
            let b = h[(i, c)].clone();
            let eg = a.extended_gcd(&b);
            let (g, x, y) = (eg.gcd, eg.x, eg.y);
            // [x y; -b/g a/g] has determinant 1
            let r = -(&b / &g);
            let s = &a / &g;
            h.combine_rows(pivot_row, i, &x, &y, &r, &s);
            u.combine_rows(pivot_row, i, &x, &y, &r, &s);
        }
        if h[(pivot_row, c)].is_zero() {
            continue;
        }
        if h[(pivot_row, c)].is_negative() {
            h.negate_row(pivot_row);
            u.negate_row(pivot_row);
        }
        let piv = h[(pivot_row, c)].clone();
        for i in 0..pivot_row {
            let q = h[(i, c)].div_floor(&piv);
            let nq = -q;
            h.add_row(i, pivot_row, &nq);
            u.add_row(i, pivot_row, &nq);
        }
        pivots.push(c);
        pivot_row += 1;
    }
    (h, u)
}

/// Basis (as rows) of the integer kernel `{x : M x = 0}`.
pub fn kernel_basis(m: &IntMatrix) -> IntMatrix {
    let (_, d, v) = smith_normal_form(m);
    let rank = (0..d.rows.min(d.cols)).filter(|&i| !d[(i, i)].is_zero()).count();
    let idx: Vec<usize> = (rank..m.cols).collect();
    v.select_cols(&idx).transpose()
}

/// Basis (as rows) of the saturation `span_Q(rows) ∩ Z^n` of the row lattice.
pub fn saturation(rows: &IntMatrix) -> IntMatrix {
    let k = kernel_basis(rows);
    kernel_basis(&k)
}

/// Finitely generated abelian group presented as a quotient `Z^n / R`.
///
/// Elements are written in presentation coordinates: first `free_rank`
/// integers, then one residue per invariant factor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FgAbelianGroup {
    pub free_rank: usize,
    pub invariant_factors: Vec<i64>,
    #[serde(skip)]
    projection: Option<IntMatrix>,
}

/// Element of an [`FgAbelianGroup`] in presentation coordinates.
pub type Class = Vec<i64>;

impl FgAbelianGroup {
    pub fn trivial() -> Self {
        FgAbelianGroup { free_rank: 0, invariant_factors: vec![], projection: Some(IntMatrix::zeros(0, 0)) }
    }

    /// Ambient rank of the presentation.
    pub fn ambient_rank(&self) -> usize {
        self.projection().cols()
    }

    /// The projection from the ambient lattice: `class(x) = P x` followed by
    /// reduction of the torsion coordinates.
    pub fn projection(&self) -> &IntMatrix {
        self.projection.as_ref().expect("group carries no projection")
    }

    pub fn coords(&self) -> usize {
        self.free_rank + self.invariant_factors.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.invariant_factors.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }

    /// Order of a finite group; `None` when infinite.
    pub fn order(&self) -> Option<u64> {
        if self.free_rank > 0 {
            return None;
        }
        Some(self.invariant_factors.iter().map(|&d| d as u64).product())
    }

    pub fn zero(&self) -> Class {
        vec![0; self.coords()]
    }

    pub fn reduce(&self, mut c: Class) -> Class {
        for (k, &m) in self.invariant_factors.iter().enumerate() {
            let i = self.free_rank + k;
            c[i] = c[i].rem_euclid(m);
        }
        c
    }

    pub fn class_of(&self, x: &[i64]) -> Class {
        let p = self.projection().apply_i64(x);
        self.reduce_big(p)
    }

    pub fn class_of_big(&self, x: &[BigInt]) -> Class {
        let p = self.projection().apply(x);
        self.reduce_big(p)
    }

    fn reduce_big(&self, p: Vec<BigInt>) -> Class {
        let mut out = Vec::with_capacity(p.len());
        for (i, v) in p.into_iter().enumerate() {
            if i >= self.free_rank {
                let m = BigInt::from(self.invariant_factors[i - self.free_rank]);
                out.push(big_to_i64(&v.mod_floor(&m)));
            } else {
                out.push(big_to_i64(&v));
            }
        }
        out
    }

    pub fn add(&self, a: &[i64], b: &[i64]) -> Class {
        self.reduce(a.iter().zip(b).map(|(x, y)| x + y).collect())
    }

    pub fn scale(&self, a: &[i64], k: i64) -> Class {
        self.reduce(a.iter().map(|x| x * k).collect())
    }

    pub fn neg(&self, a: &[i64]) -> Class {
        self.scale(a, -1)
    }

    /// Order of an element; `None` when it has a nonzero free part.
    pub fn element_order(&self, a: &[i64]) -> Option<u64> {
        if a[..self.free_rank].iter().any(|&x| x != 0) {
            return None;
        }
        let mut ord: u64 = 1;
        for (k, &m) in self.invariant_factors.iter().enumerate() {
            let x = a[self.free_rank + k];
            let o = (m / num_integer::gcd(x, m)) as u64;
            ord = num_integer::lcm(ord, o);
        }
        Some(ord)
    }

    /// The torsion subgroup, with the projection restricted to torsion
    /// coordinates.
    pub fn torsion_part(&self) -> FgAbelianGroup {
        let idx: Vec<usize> = (self.free_rank..self.coords()).collect();
        FgAbelianGroup {
            free_rank: 0,
            invariant_factors: self.invariant_factors.clone(),
            projection: self.projection.as_ref().map(|p| p.select_rows(&idx)),
        }
    }

    /// All elements of a finite group, in lexicographic order of residues.
    pub fn elements(&self) -> Option<Vec<Class>> {
        if self.free_rank > 0 {
            return None;
        }
        let mut out = vec![vec![]];
        for &m in &self.invariant_factors {
            let mut next = Vec::with_capacity(out.len() * m as usize);
            for c in &out {
                for r in 0..m {
                    let mut e = c.clone();
                    e.push(r);
                    next.push(e);
                }
            }
            out = next;
        }
        Some(out)
    }
}

/// `Z^ambient_rank / rowspan(relations)`.
///
/// Torsion rows of the projection are scaled by a unit so that their first
/// entry invertible modulo the invariant factor becomes 1; this makes the
/// presentation of cyclic groups independent of elimination order.
pub fn quotient_group(ambient_rank: usize, relations: &IntMatrix) -> FgAbelianGroup {
    assert_eq!(relations.cols(), ambient_rank, "relations must have ambient_rank columns");
    if relations.rows() == 0 || relations.is_zero() {
        return FgAbelianGroup {
            free_rank: ambient_rank,
            invariant_factors: vec![],
            projection: Some(IntMatrix::identity(ambient_rank)),
        };
    }
    let (_, d, v) = smith_normal_form(relations);
    let diag: Vec<BigInt> = (0..ambient_rank)
        .map(|i| if i < d.rows() { d[(i, i)].clone() } else { BigInt::zero() })
        .collect();
    // x maps to V^T x: rowspan(R) V = rowspan(D)
    let vt = v.transpose();
    let mut free_rows = Vec::new();
    let mut tors_rows = Vec::new();
    let mut factors = Vec::new();
    for (i, di) in diag.iter().enumerate() {
        if di.is_zero() {
            free_rows.push(vt.row_vec(i));
        } else if !di.is_one() {
            let m = di.clone();
            let row: Vec<BigInt> = vt.row(i).iter().map(|x| x.mod_floor(&m)).collect();
            tors_rows.push(normalize_torsion_row(row, &m));
            factors.push(big_to_i64(&m));
        }
    }
    let free_rank = free_rows.len();
    let mut rows = free_rows;
    rows.extend(tors_rows);
    FgAbelianGroup {
        free_rank,
        invariant_factors: factors,
        projection: Some(IntMatrix::from_big_rows(ambient_rank, rows)),
    }
}

fn normalize_torsion_row(row: Vec<BigInt>, m: &BigInt) -> Vec<BigInt> {
    let Some(first_unit) = row.iter().find(|x| x.gcd(m).is_one()) else {
        return row;
    };
    let inv = first_unit.extended_gcd(m).x.mod_floor(m);
    row.into_iter().map(|x| (x * &inv).mod_floor(m)).collect()
}

/// Rational solution `x` of `x * B = target` for a row basis `B`, if the
/// target lies in the row span. Returned as integers when possible.
pub fn solve_in_row_span(basis: &IntMatrix, target: &[BigInt]) -> Option<Vec<BigRational>> {
    // Gaussian elimination on the augmented transpose system B^T x = target.
    let k = basis.rows();
    let n = basis.cols();
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|j| {
            let mut row: Vec<BigRational> =
                (0..k).map(|i| BigRational::from_integer(basis[(i, j)].clone())).collect();
            row.push(BigRational::from_integer(target[j].clone()));
            row
        })
        .collect();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..k {
        let Some(p) = (r..n).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(p, r);
        let piv = a[r][c].clone();
        for v in a[r].iter_mut() {
            *v = &*v / &piv;
        }
        for i in 0..n {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                let pr = a[r].clone();
                for (x, y) in a[i].iter_mut().zip(pr.iter()) {
                    *x = &*x - &f * y;
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    if a[r..].iter().any(|row| !row[k].is_zero()) {
        return None;
    }
    let mut x = vec![BigRational::zero(); k];
    for (i, &c) in pivot_cols.iter().enumerate() {
        x[c] = a[i][k].clone();
    }
    Some(x)
}

/// Extends the rows of `rays` (assumed to be part of a lattice basis) to a
/// unimodular basis of `Z^n`; the given rows come first.
pub fn extend_to_basis(rays: &IntMatrix) -> Option<IntMatrix> {
    let k = rays.rows();
    let n = rays.cols();
    let (u, d, v) = smith_normal_form(rays);
    if (0..k).any(|i| !d[(i, i)].is_one()) {
        return None;
    }
    let uinv = u.inverse_unimodular()?;
    let vinv = v.inverse_unimodular()?;
    // rays = U^{-1} [I 0] V^{-1}
    let mut block = IntMatrix::identity(n);
    for i in 0..k {
        for j in 0..k {
            block[(i, j)] = uinv[(i, j)].clone();
        }
    }
    Some(block.mul(&vinv))
}

/// The unimodular integer matrix `M` with `M src_i = dst_i` for a basis
/// `src` of `Q^n`, if it exists.
pub fn unimodular_transform(src: &[Vec<i64>], dst: &[Vec<i64>]) -> Option<Vec<Vec<i64>>> {
    let n = src.len();
    let a = IntMatrix::from_rows(n, src);
    if a.det().is_zero() {
        return None;
    }
    // row k of M solves x A^T = (dst_i[k])_i
    let at = a.transpose();
    let mut m = vec![vec![0i64; n]; n];
    for (k, row) in m.iter_mut().enumerate() {
        let target: Vec<BigInt> = dst.iter().map(|v| BigInt::from(v[k])).collect();
        let sol = solve_in_row_span(&at, &target)?;
        for (x, v) in row.iter_mut().zip(&sol) {
            if !v.is_integer() {
                return None;
            }
            *x = big_to_i64(&v.to_integer());
        }
    }
    IntMatrix::from_rows(n, &m).det().abs().is_one().then_some(m)
}

/// Whether the rows can be extended to a basis of the lattice (unimodular cone).
pub fn is_unimodular(rays: &IntMatrix) -> bool {
    if rays.rows() == 0 {
        return true;
    }
    let (_, d, _) = smith_normal_form(rays);
    (0..rays.rows()).all(|i| i < d.cols() && d[(i, i)].is_one())
}
