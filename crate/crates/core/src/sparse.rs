//! Sparse symmetric linear algebra: compressed-row storage, IC(0)
//! preconditioned conjugate gradients, and a dense matrix exponential used
//! for small projected problems and as a test oracle.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write as _};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Anything that can compute `y = A x`.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// Row-compressed matrix with sorted, duplicate-free column indices.
///
/// Intended for structurally symmetric matrices; use [`SymSparseMatrix::is_symmetric`]
/// to confirm numerical symmetry.
#[derive(Debug, Clone, PartialEq)]
pub struct SymSparseMatrix {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SymSparseMatrix {
    /// Builds a matrix from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(i, j, _) in triplets {
            assert!(i < n && j < n, "triplet ({i}, {j}) out of range for n = {n}");
            counts[i + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0f64; triplets.len()];
        for &(i, j, v) in triplets {
            cols[next[i]] = j;
            vals[next[i]] = v;
            next[i] += 1;
        }

        let mut row_offsets = Vec::with_capacity(n + 1);
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_offsets.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for i in 0..n {
            scratch.clear();
            scratch.extend((counts[i]..counts[i + 1]).map(|k| (cols[k], vals[k])));
            scratch.sort_by_key(|e| e.0);
            for &(j, v) in &scratch {
                if col_indices.len() > row_offsets[i] && *col_indices.last().unwrap() == j {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Self {
            n,
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map(|k| vals[k]).unwrap_or(0.0)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Exact (bitwise) numerical symmetry.
    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).all(|(&j, &v)| self.get(j, i) == v)
        })
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let r = self.row_offsets[i]..self.row_offsets[i + 1];
            let mut acc = 0.0;
            for (&j, &v) in self.col_indices[r.clone()].iter().zip(&self.values[r]) {
                acc += v * x[j];
            }
            *yi = acc;
        }
    }

    /// Returns `alpha * I + beta * self`.
    pub fn shifted(&self, alpha: f64, beta: f64) -> Self {
        let mut triplets = Vec::with_capacity(self.nnz() + self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                triplets.push((i, j, beta * v));
            }
            triplets.push((i, i, alpha));
        }
        Self::from_triplets(self.n, &triplets)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                d[(i, j)] = v;
            }
        }
        d
    }

    pub fn from_dense(d: &DMatrix<f64>) -> Self {
        assert_eq!(d.nrows(), d.ncols());
        let mut triplets = Vec::new();
        for i in 0..d.nrows() {
            for j in 0..d.ncols() {
                if d[(i, j)] != 0.0 {
                    triplets.push((i, j, d[(i, j)]));
                }
            }
        }
        Self::from_triplets(d.nrows(), &triplets)
    }

    /// Writes one `i j value` line per stored entry (0-based).
    pub fn write_triplets(&self, path: &Path) -> Result<()> {
        let mut text = String::with_capacity(self.nnz() * 24);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let _ = writeln!(text, "{i} {j} {v:?}");
            }
        }
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
    }

    /// Reads the triplet format written by [`write_triplets`](Self::write_triplets).
    /// The dimension is one more than the largest index seen unless `n` is given.
    pub fn read_triplets(path: &Path, n: Option<usize>) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut triplets = Vec::new();
        let mut max_index = 0usize;
        for (lineno, line) in BufReader::new(f).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message,
            };
            let mut it = line.split_whitespace();
            let (Some(a), Some(b), Some(c), None) = (it.next(), it.next(), it.next(), it.next()) else {
                return Err(parse_err(format!("expected `i j value`, got `{line}`")));
            };
            let i: usize = a.parse().map_err(|e| parse_err(format!("{e}")))?;
            let j: usize = b.parse().map_err(|e| parse_err(format!("{e}")))?;
            let v: f64 = c.parse().map_err(|e| parse_err(format!("{e}")))?;
            max_index = max_index.max(i).max(j);
            triplets.push((i, j, v));
        }
        let n = n.unwrap_or(if triplets.is_empty() { 0 } else { max_index + 1 });
        if max_index >= n && !triplets.is_empty() {
            return Err(Error::Dimension {
                expected: n,
                found: max_index + 1,
            });
        }
        Ok(Self::from_triplets(n, &triplets))
    }
}

impl LinearOperator for SymSparseMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec_into(x, y);
    }
}

/// Zero-fill incomplete Cholesky factor `L` with `A ≈ L Lᵀ`, stored by rows
/// (lower triangle including the diagonal, diagonal last in each row).
#[derive(Debug, Clone)]
pub struct Ic0Factor {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

/// IC(0) factorization restricted to the lower-triangular pattern of `a`.
pub fn ic0_factor(a: &SymSparseMatrix) -> Result<Ic0Factor> {
    let n = a.n();
    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut col_indices = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    row_offsets.push(0);
    for i in 0..n {
        let (cols, vals) = a.row(i);
        let start = col_indices.len();
        let mut has_diag = false;
        for (&j, &v) in cols.iter().zip(vals) {
            if j <= i {
                col_indices.push(j);
                values.push(v);
                has_diag |= j == i;
            }
        }
        if !has_diag {
            return Err(Error::PivotBreakdown { row: i, pivot: 0.0 });
        }
        let end = col_indices.len();
        // L_ik = (a_ik - sum_{j<k} L_ij L_kj) / L_kk over the fixed pattern.
        for p in start..end - 1 {
            let k = col_indices[p];
            let (ks, ke) = (row_offsets[k], row_offsets[k + 1]);
            let mut s = values[p];
            let (mut q, mut r) = (start, ks);
            while q < p && r < ke - 1 {
                match col_indices[q].cmp(&col_indices[r]) {
                    std::cmp::Ordering::Less => q += 1,
                    std::cmp::Ordering::Greater => r += 1,
                    std::cmp::Ordering::Equal => {
                        s -= values[q] * values[r];
                        q += 1;
                        r += 1;
                    }
                }
            }
            values[p] = s / values[ke - 1];
        }
        let mut d = values[end - 1];
        for p in start..end - 1 {
            d -= values[p] * values[p];
        }
        if !(d > 0.0) {
            return Err(Error::PivotBreakdown { row: i, pivot: d });
        }
        values[end - 1] = d.sqrt();
        row_offsets.push(end);
    }
    Ok(Ic0Factor {
        n,
        row_offsets,
        col_indices,
        values,
    })
}

impl Ic0Factor {
    pub fn n(&self) -> usize {
        self.n
    }

    /// The factor as a dense lower-triangular matrix.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for p in self.row_offsets[i]..self.row_offsets[i + 1] {
                d[(i, self.col_indices[p])] = self.values[p];
            }
        }
        d
    }

    /// Solves `L Lᵀ z = r` in place.
    pub fn solve_in_place(&self, z: &mut [f64]) {
        for i in 0..self.n {
            let (s, e) = (self.row_offsets[i], self.row_offsets[i + 1]);
            let mut acc = z[i];
            for p in s..e - 1 {
                acc -= self.values[p] * z[self.col_indices[p]];
            }
            z[i] = acc / self.values[e - 1];
        }
        for i in (0..self.n).rev() {
            let (s, e) = (self.row_offsets[i], self.row_offsets[i + 1]);
            let zi = z[i] / self.values[e - 1];
            z[i] = zi;
            for p in s..e - 1 {
                z[self.col_indices[p]] -= self.values[p] * zi;
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// True relative residual `‖b − A x‖ / ‖b‖`.
    pub residual: f64,
}

pub const DEFAULT_CG_TOL: f64 = 1e-10;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Preconditioned conjugate gradients from a zero initial guess.
pub fn cg_solve(
    a: &SymSparseMatrix,
    b: &[f64],
    precond: Option<&Ic0Factor>,
    tol: f64,
    maxit: usize,
) -> Result<CgOutcome> {
    cg_solve_from(a, b, vec![0.0; b.len()], precond, tol, maxit)
}

/// Preconditioned conjugate gradients from the initial guess `x`.
///
/// Stops once `‖b − A x‖₂ ≤ tol · ‖b‖₂`, confirmed on the true residual.
pub fn cg_solve_from(
    a: &SymSparseMatrix,
    b: &[f64],
    mut x: Vec<f64>,
    precond: Option<&Ic0Factor>,
    tol: f64,
    maxit: usize,
) -> Result<CgOutcome> {
    let n = a.n();
    if b.len() != n || x.len() != n {
        return Err(Error::Dimension {
            expected: n,
            found: b.len(),
        });
    }
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(CgOutcome {
            x: vec![0.0; n],
            iterations: 0,
            residual: 0.0,
        });
    }
    let target = tol * bnorm;
    let mut ax = a.matvec(&x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    if norm(&r) <= target {
        let residual = norm(&r) / bnorm;
        return Ok(CgOutcome {
            x,
            iterations: 0,
            residual,
        });
    }
    let precondition = |r: &[f64], z: &mut Vec<f64>| {
        z.clear();
        z.extend_from_slice(r);
        if let Some(m) = precond {
            m.solve_in_place(z);
        }
    };
    let mut z = Vec::with_capacity(n);
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    let mut iterations = 0;
    while iterations < maxit {
        iterations += 1;
        a.matvec_into(&p, &mut q);
        let pq = dot(&p, &q);
        if pq <= 0.0 || !pq.is_finite() {
            break;
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        if norm(&r) <= target {
            a.matvec_into(&x, &mut ax);
            for i in 0..n {
                r[i] = b[i] - ax[i];
            }
            if norm(&r) <= target {
                let residual = norm(&r) / bnorm;
                return Ok(CgOutcome {
                    x,
                    iterations,
                    residual,
                });
            }
        }
        precondition(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    a.matvec_into(&x, &mut ax);
    let true_res = b.iter().zip(&ax).map(|(bi, ai)| (bi - ai).powi(2)).sum::<f64>().sqrt();
    Err(Error::CgNoConvergence {
        iterations,
        residual: true_res / bnorm,
    })
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn pade_coefficients(m: usize) -> &'static [f64] {
    match m {
        3 => &[120.0, 60.0, 12.0, 1.0],
        5 => &[30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0],
        7 => &[17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0],
        9 => &[
            17643225600.0,
            8821612800.0,
            2075673600.0,
            302702400.0,
            30270240.0,
            2162160.0,
            110880.0,
            3960.0,
            90.0,
            1.0,
        ],
        _ => &PADE13,
    }
}

fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Dense matrix exponential by scaling and squaring with diagonal Padé
/// approximants (degree selected from the 1-norm, Higham 2005 thresholds).
pub fn dense_expm(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    assert_eq!(a.nrows(), a.ncols(), "dense_expm needs a square matrix");
    let n = a.nrows();
    let ident = DMatrix::<f64>::identity(n, n);
    if n == 0 {
        return Ok(ident);
    }
    let anorm = norm1(a);
    if !anorm.is_finite() {
        return Err(Error::Unsupported("matrix exponential of non-finite input".into()));
    }
    const THETA: [(usize, f64); 4] = [
        (3, 1.495585217958292e-2),
        (5, 2.539_398_330_063_23e-1),
        (7, 9.504178996162932e-1),
        (9, 2.097847961257068),
    ];
    const THETA13: f64 = 5.371920351148152;

    let (m, squarings) = match THETA.iter().find(|(_, t)| anorm <= *t) {
        Some(&(m, _)) => (m, 0u32),
        None => {
            let s = ((anorm / THETA13).log2().ceil()).max(0.0) as u32;
            (13, s)
        }
    };
    if squarings > 1000 {
        return Err(Error::Unsupported(format!(
            "matrix exponential overflow (1-norm {anorm:e})"
        )));
    }
    let scaled = if squarings > 0 {
        a / 2f64.powi(squarings as i32)
    } else {
        a.clone()
    };
    let c = pade_coefficients(m);
    let a2 = &scaled * &scaled;
    let (u, v) = if m < 13 {
        let mut powers = vec![ident.clone(), a2.clone()];
        while powers.len() < m.div_ceil(2) + 1 {
            let next = powers.last().unwrap() * &a2;
            powers.push(next);
        }
        let mut odd = DMatrix::zeros(n, n);
        let mut even = DMatrix::zeros(n, n);
        for k in 0..=(m / 2) {
            odd += &powers[k] * c[2 * k + 1];
            even += &powers[k] * c[2 * k];
        }
        (&scaled * odd, even)
    } else {
        let a4 = &a2 * &a2;
        let a6 = &a4 * &a2;
        let inner_u = &a6 * (&a6 * c[13] + &a4 * c[11] + &a2 * c[9]);
        let u = &scaled * (inner_u + &a6 * c[7] + &a4 * c[5] + &a2 * c[3] + &ident * c[1]);
        let inner_v = &a6 * (&a6 * c[12] + &a4 * c[10] + &a2 * c[8]);
        let v = inner_v + &a6 * c[6] + &a4 * c[4] + &a2 * c[2] + &ident * c[0];
        (u, v)
    };
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .ok_or_else(|| Error::Unsupported("singular Padé denominator".into()))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::Unsupported(format!(
            "matrix exponential overflow (1-norm {anorm:e})"
        )));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> SymSparseMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, -2.0));
            if i > 0 {
                t.push((i, i - 1, 1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, 1.0));
            }
        }
        SymSparseMatrix::from_triplets(n, &t)
    }

    pub(crate) fn laplacian_2d(m: usize) -> SymSparseMatrix {
        let idx = |i: usize, j: usize| i + m * j;
        let mut t = Vec::new();
        for j in 0..m {
            for i in 0..m {
                t.push((idx(i, j), idx(i, j), 4.0));
                if i > 0 {
                    t.push((idx(i, j), idx(i - 1, j), -1.0));
                }
                if i + 1 < m {
                    t.push((idx(i, j), idx(i + 1, j), -1.0));
                }
                if j > 0 {
                    t.push((idx(i, j), idx(i, j - 1), -1.0));
                }
                if j + 1 < m {
                    t.push((idx(i, j), idx(i, j + 1), -1.0));
                }
            }
        }
        SymSparseMatrix::from_triplets(m * m, &t)
    }

    #[test]
    fn identity_matvec() {
        let x = vec![1.0, -2.0, 3.5];
        assert_eq!(SymSparseMatrix::identity(3).matvec(&x), x);
    }

    #[test]
    fn laplacian_times_ones_telescopes() {
        let y = laplacian_1d(5).matvec(&[1.0; 5]);
        assert_eq!(y, vec![-1.0, 0.0, 0.0, 0.0, -1.0]);
    }

    #[test]
    fn duplicates_are_summed_and_sorted() {
        let a = SymSparseMatrix::from_triplets(2, &[(0, 1, 1.0), (0, 0, 2.0), (0, 1, 0.5)]);
        assert_eq!(a.row(0).0, &[0, 1]);
        assert_eq!(a.get(0, 1), 1.5);
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn ic0_of_diagonal_is_sqrt() {
        let a = SymSparseMatrix::from_triplets(3, &[(0, 0, 4.0), (1, 1, 9.0), (2, 2, 2.0)]);
        let l = ic0_factor(&a).unwrap().to_dense();
        assert_eq!(l[(0, 0)], 2.0);
        assert_eq!(l[(1, 1)], 3.0);
        assert_eq!(l[(2, 2)], 2f64.sqrt());
    }

    #[test]
    fn ic0_tridiagonal_matches_complete_cholesky() {
        let a = laplacian_1d(12).scaled(-1.0);
        let l = ic0_factor(&a).unwrap().to_dense();
        let full = nalgebra::Cholesky::new(a.to_dense()).unwrap().l();
        assert!((l - full).abs().max() <= 1e-13);
    }

    #[test]
    fn ic0_rejects_indefinite() {
        let a = SymSparseMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]);
        assert!(matches!(ic0_factor(&a), Err(Error::PivotBreakdown { row: 1, .. })));
    }

    #[test]
    fn ic0_reduces_cg_iterations() {
        let a = laplacian_2d(8);
        let x: Vec<f64> = (0..64).map(|k| ((k * 37 % 64) as f64 / 64.0) - 0.3).collect();
        let b = a.matvec(&x);
        let plain = cg_solve(&a, &b, None, 1e-10, 640).unwrap();
        let ic = ic0_factor(&a).unwrap();
        let pre = cg_solve(&a, &b, Some(&ic), 1e-10, 640).unwrap();
        assert!(
            pre.iterations < plain.iterations,
            "{} vs {}",
            pre.iterations,
            plain.iterations
        );
        assert!(pre.x.iter().zip(&x).all(|(v, e)| (v - e).abs() < 1e-8));
    }

    #[test]
    fn ic0_matches_matrix_on_pattern() {
        let a = laplacian_2d(6);
        let l = ic0_factor(&a).unwrap().to_dense();
        let llt = &l * l.transpose();
        for i in 0..a.n() {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                assert!((llt[(i, j)] - v).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn cg_identity_one_iteration() {
        let b = vec![1.0, 2.0, 3.0];
        let out = cg_solve(&SymSparseMatrix::identity(3), &b, None, 1e-12, 30).unwrap();
        assert_eq!(out.iterations, 1);
        assert_eq!(out.x, b);
    }

    #[test]
    fn cg_reports_nonconvergence() {
        let a = laplacian_2d(10);
        let b = vec![1.0; 100];
        match cg_solve(&a, &b, None, 1e-14, 2) {
            Err(Error::CgNoConvergence { iterations, residual }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 1e-14);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn expm_closed_forms() {
        let z = dense_expm(&DMatrix::zeros(3, 3)).unwrap();
        assert_eq!(z, DMatrix::identity(3, 3));
        let d = dense_expm(&DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0]))).unwrap();
        assert!((d[(0, 0)] - 1f64.exp()).abs() < 1e-15 * 3.0);
        assert!((d[(1, 1)] - 2f64.exp()).abs() < 1e-14);
        assert_eq!(d[(0, 1)], 0.0);
        let nil = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let e = dense_expm(&nil).unwrap();
        assert_eq!(e, DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]));
    }

    #[test]
    fn expm_large_norm_diagonal() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-50.0, 3.0, -0.001]));
        let e = dense_expm(&a).unwrap();
        for (i, v) in [-50.0f64, 3.0, -0.001].iter().enumerate() {
            assert!((e[(i, i)] - v.exp()).abs() <= 1e-12 * v.exp().max(1e-300));
        }
    }

    #[test]
    fn triplet_file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.txt");
        let a = laplacian_2d(4).scaled(0.1);
        a.write_triplets(&path).unwrap();
        let b = SymSparseMatrix::read_triplets(&path, None).unwrap();
        assert_eq!(a, b);
    }
}
