//! Sparse symmetric positive-definite solves: CSR storage, reverse
//! Cuthill-McKee ordering and an envelope (skyline) Cholesky factor.

use std::collections::VecDeque;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds an `n × n` matrix, summing duplicate entries.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in triplets {
            rows[i].push((j, v));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut r in rows {
            r.sort_by_key(|e| e.0);
            for (j, v) in r {
                if cols.len() > *row_ptr.last().unwrap() && *cols.last().unwrap() == j {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    /// `self + diag(d)`.
    pub fn add_diagonal(&self, d: &[f64]) -> Self {
        let mut t: Vec<(usize, usize, f64)> = Vec::with_capacity(self.nnz() + self.n);
        for i in 0..self.n {
            t.extend(self.row(i).map(|(j, v)| (i, j, v)));
            t.push((i, i, d[i]));
        }
        CsrMatrix::from_triplets(self.n, &t)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| self.row(i).all(|(j, v)| (v - self.get(j, i)).abs() <= tol * v.abs().max(1.0)))
    }
}

/// Reverse Cuthill-McKee ordering; `order[k]` is the original index placed
/// at position `k`. Each component starts from a minimum-degree node.
pub fn rcm_order(a: &CsrMatrix) -> Vec<usize> {
    let n = a.dim();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).filter(|&(j, _)| j != i).count()).collect();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    for &start in &by_degree {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = a.row(v).map(|(j, _)| j).filter(|&j| !seen[j]).collect();
            next.sort_by_key(|&j| (degree[j], j));
            for j in next {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    order.reverse();
    order
}

/// Envelope Cholesky factor `P A Pᵀ = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct SkylineCholesky {
    perm: Vec<usize>,
    /// First stored column of each row of `L`.
    first: Vec<usize>,
    /// Row `i` holds `L[i][first[i]..=i]`.
    rows: Vec<Vec<f64>>,
}

impl SkylineCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.dim();
        let perm = rcm_order(a);
        let mut inv = vec![0; n];
        for (k, &i) in perm.iter().enumerate() {
            inv[i] = k;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (i, &pi) in perm.iter().enumerate() {
            for (j, _) in a.row(pi) {
                first[i] = first[i].min(inv[j]);
            }
        }
        let mut rows: Vec<Vec<f64>> = (0..n).map(|i| vec![0.0; i - first[i] + 1]).collect();
        for (i, &pi) in perm.iter().enumerate() {
            for (j, v) in a.row(pi) {
                let pj = inv[j];
                if pj <= i {
                    rows[i][pj - first[i]] = v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let mut s = rows[i][j - fi];
                for k in k0..j {
                    s -= rows[i][k - fi] * rows[j][k - fj];
                }
                rows[i][j - fi] = s / rows[j][j - fj];
            }
            let a_ii = rows[i][i - fi];
            let mut d = a_ii;
            for k in fi..i {
                d -= rows[i][k - fi] * rows[i][k - fi];
            }
            if !(d > 1e-12 * a_ii.abs() && d.is_finite()) {
                return Err(Error::Thermal(format!(
                    "matrix is not positive definite (pivot {d:e} at row {})",
                    perm[i]
                )));
            }
            rows[i][i - fi] = d.sqrt();
        }
        Ok(SkylineCholesky { perm, first, rows })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let mut s = y[i];
            for k in fi..i {
                s -= self.rows[i][k - fi] * y[k];
            }
            y[i] = s / self.rows[i][i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            y[i] /= self.rows[i][i - fi];
            let yi = y[i];
            for k in fi..i {
                y[k] -= self.rows[i][k - fi] * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (k, &i) in self.perm.iter().enumerate() {
            x[i] = y[k];
        }
        x
    }
}

/// Jacobi-preconditioned conjugate gradients, stopping at
/// `‖r‖∞ ≤ tol · ‖b‖∞`.
pub fn conjugate_gradient(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = a.dim();
    let diag = a.diagonal();
    let norm_b = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut x = vec![0.0; n];
    if norm_b == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    for _ in 0..max_iter {
        let ap = a.mul_vec(&p);
        let alpha = rz / p.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>();
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if r.iter().fold(0.0f64, |m, v| m.max(v.abs())) <= tol * norm_b {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_next: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Thermal(format!("conjugate gradients did not converge in {max_iter} iterations")))
}
