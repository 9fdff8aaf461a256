//! Sparse symmetric matrices and a sparse Cholesky factorization.
//!
//! [`SparseSymMatrix`] stores only the upper triangle (`row <= col`) in
//! compressed-row form; every operation applies the symmetric completion.
//! [`SpdFactorization`] computes `P·A·Pᵀ = L·Lᵀ` with a minimum-degree
//! ordering `P` and an up-looking left factor `L`.

use std::collections::BTreeSet;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not positive definite: pivot {pivot} at elimination step {step} is {value:e}")]
    NotPositiveDefinite { pivot: usize, step: usize, value: f64 },
}

/// Unordered symmetric contributions waiting to be summed.
#[derive(Debug, Clone)]
pub struct TripletAccumulator {
    dim: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletAccumulator {
    pub fn new(dim: usize) -> Self {
        Self { dim, entries: Vec::new() }
    }

    pub fn with_capacity(dim: usize, capacity: usize) -> Self {
        Self { dim, entries: Vec::with_capacity(capacity) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Adds `value` at `(row, col)`; the pair is folded onto the upper
    /// triangle, so `(1, 0)` and `(0, 1)` address the same entry.
    ///
    /// # Panics
    ///
    /// Panics if either index is `>= dim`.
    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        assert!(
            row < self.dim && col < self.dim,
            "triplet ({row}, {col}) out of range for dimension {}",
            self.dim
        );
        self.entries.push((row.min(col), row.max(col), value));
    }

    /// Sums duplicates and drops entries that cancel to exactly zero.
    ///
    /// Duplicates are summed in ascending value order, so the result is
    /// bitwise independent of insertion order.
    pub fn finalize(mut self) -> SparseSymMatrix {
        self.entries
            .sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));
        let mut row_ptr = vec![0usize; self.dim + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut k = 0;
        while k < self.entries.len() {
            let (r, c, _) = self.entries[k];
            let mut sum = 0.0;
            while k < self.entries.len() && self.entries[k].0 == r && self.entries[k].1 == c {
                sum += self.entries[k].2;
                k += 1;
            }
            if sum != 0.0 {
                row_ptr[r + 1] += 1;
                col_idx.push(c);
                values.push(sum);
            }
        }
        for r in 0..self.dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseSymMatrix { dim: self.dim, row_ptr, col_idx, values }
    }
}

/// Symmetric sparse matrix holding the upper triangle in CSR form, sorted
/// and duplicate-free.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, row_ptr: vec![0; dim + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut acc = TripletAccumulator::with_capacity(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            acc.add(i, i, d);
        }
        acc.finalize()
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![1.0; dim])
    }

    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut acc = TripletAccumulator::with_capacity(dim, triplets.len());
        for &(r, c, v) in triplets {
            acc.add(r, c, v);
        }
        acc.finalize()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored (upper-triangle) entries.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored entries as `(row, col, value)` with `row <= col`, in row-major
    /// order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |p| (r, self.col_idx[p], self.values[p]))
        })
    }

    /// Entry `(row, col)` of the full symmetric matrix.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        let (r, c) = (row.min(col), row.max(col));
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(p) => self.values[span.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sum of every entry of the full symmetric matrix, `𝟙ᵀ·A·𝟙`.
    pub fn total_sum(&self) -> f64 {
        self.iter().map(|(r, c, v)| if r == c { v } else { 2.0 * v }).sum()
    }

    /// `y = A·x`; each stored off-diagonal entry contributes to both rows.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>, LinalgError> {
        self.check_dim(x.len())?;
        let mut y = vec![0.0; self.dim];
        for (r, c, v) in self.iter() {
            y[r] += v * x[c];
            if r != c {
                y[c] += v * x[r];
            }
        }
        Ok(y)
    }

    /// `alpha·self + beta·other`.
    pub fn add_scaled(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self, LinalgError> {
        self.check_dim(other.dim)?;
        let mut acc = TripletAccumulator::with_capacity(self.dim, self.nnz() + other.nnz());
        for (r, c, v) in self.iter() {
            acc.add(r, c, alpha * v);
        }
        for (r, c, v) in other.iter() {
            acc.add(r, c, beta * v);
        }
        Ok(acc.finalize())
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out.drop_zeros();
        out
    }

    /// `self · middle · self`, the congruence of `middle` by `self`. The
    /// product is symmetric, so only its upper triangle is formed.
    pub fn sandwich(&self, middle: &Self) -> Result<Self, LinalgError> {
        self.check_dim(middle.dim)?;
        let b = FullCsr::from_sym(self);
        let m = FullCsr::from_sym(middle);
        let mb = m.mul(&b);
        Ok(b.mul_upper(&mb))
    }

    /// `self · diag(d) · self`.
    pub fn sandwich_diagonal(&self, d: &[f64]) -> Result<Self, LinalgError> {
        self.check_dim(d.len())?;
        self.sandwich(&Self::from_diagonal(d))
    }

    /// Row-major dense copy of the full matrix.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.dim]; self.dim];
        for (r, c, v) in self.iter() {
            out[r][c] = v;
            out[c][r] = v;
        }
        out
    }

    /// Off-diagonal structure as sorted neighbour lists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.dim];
        for (r, c, _) in self.iter() {
            if r != c {
                adj[r].push(c);
                adj[c].push(r);
            }
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    fn drop_zeros(&mut self) {
        let mut acc = TripletAccumulator::with_capacity(self.dim, self.nnz());
        for (r, c, v) in self.iter() {
            acc.add(r, c, v);
        }
        *self = acc.finalize();
    }

    fn check_dim(&self, found: usize) -> Result<(), LinalgError> {
        if found == self.dim {
            Ok(())
        } else {
            Err(LinalgError::DimensionMismatch { expected: self.dim, found })
        }
    }
}

/// Full (both triangles) CSR used internally for products.
struct FullCsr {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl FullCsr {
    fn from_sym(a: &SparseSymMatrix) -> Self {
        let mut counts = vec![0usize; a.dim + 1];
        for (r, c, _) in a.iter() {
            counts[r + 1] += 1;
            if r != c {
                counts[c + 1] += 1;
            }
        }
        for i in 0..a.dim {
            counts[i + 1] += counts[i];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0; row_ptr[a.dim]];
        let mut values = vec![0.0; row_ptr[a.dim]];
        // Rows filled in increasing column order: lower part (from earlier
        // rows' upper entries) arrives before the row's own upper entries.
        for (r, c, v) in a.iter() {
            if r != c {
                let p = next[c];
                col_idx[p] = r;
                values[p] = v;
                next[c] += 1;
            }
        }
        for (r, c, v) in a.iter() {
            let p = next[r];
            col_idx[p] = c;
            values[p] = v;
            next[r] += 1;
        }
        Self { dim: a.dim, row_ptr, col_idx, values }
    }

    fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |p| (self.col_idx[p], self.values[p]))
    }

    fn mul(&self, other: &Self) -> Self {
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut work = SparseAccumulator::new(self.dim);
        for i in 0..self.dim {
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    work.add(j, a * b);
                }
            }
            for (j, v) in work.drain_sorted(0) {
                col_idx.push(j);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Self { dim: self.dim, row_ptr, col_idx, values }
    }

    fn mul_upper(&self, other: &Self) -> SparseSymMatrix {
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut work = SparseAccumulator::new(self.dim);
        for i in 0..self.dim {
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    if j >= i {
                        work.add(j, a * b);
                    }
                }
            }
            for (j, v) in work.drain_sorted(i) {
                col_idx.push(j);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        SparseSymMatrix { dim: self.dim, row_ptr, col_idx, values }
    }
}

/// Gustavson-style dense scratch row.
struct SparseAccumulator {
    values: Vec<f64>,
    occupied: Vec<bool>,
    pattern: Vec<usize>,
}

impl SparseAccumulator {
    fn new(dim: usize) -> Self {
        Self { values: vec![0.0; dim], occupied: vec![false; dim], pattern: Vec::new() }
    }

    fn add(&mut self, j: usize, v: f64) {
        if !self.occupied[j] {
            self.occupied[j] = true;
            self.pattern.push(j);
        }
        self.values[j] += v;
    }

    /// Yields accumulated nonzero entries with column `>= min_col` in
    /// ascending column order and resets the scratch row.
    fn drain_sorted(&mut self, min_col: usize) -> Vec<(usize, f64)> {
        self.pattern.sort_unstable();
        let out = self
            .pattern
            .iter()
            .filter(|&&j| j >= min_col && self.values[j] != 0.0)
            .map(|&j| (j, self.values[j]))
            .collect();
        for &j in &self.pattern {
            self.values[j] = 0.0;
            self.occupied[j] = false;
        }
        self.pattern.clear();
        out
    }
}

/// Minimum-degree elimination order on an explicit elimination graph.
/// Ties are broken by the lowest node index, so the order is deterministic.
pub fn minimum_degree_order(adjacency: &[Vec<usize>]) -> Vec<usize> {
    let n = adjacency.len();
    let mut adj: Vec<Vec<usize>> = adjacency.to_vec();
    let mut queue: BTreeSet<(usize, usize)> = (0..n).map(|i| (adj[i].len(), i)).collect();
    let mut order = Vec::with_capacity(n);
    while let Some((_, v)) = queue.pop_first() {
        order.push(v);
        let clique = std::mem::take(&mut adj[v]);
        for &u in &clique {
            queue.remove(&(adj[u].len(), u));
            adj[u] = merge_excluding(&adj[u], &clique, u, v);
            queue.insert((adj[u].len(), u));
        }
    }
    order
}

/// Sorted union of `a` and `b` without `skip_a` and `skip_b`.
fn merge_excluding(a: &[usize], b: &[usize], skip_a: usize, skip_b: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x == y => {
                i += 1;
                j += 1;
                x
            }
            (Some(&x), Some(&y)) if x < y => {
                i += 1;
                x
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (_, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        if next != skip_a && next != skip_b {
            out.push(next);
        }
    }
    out
}

/// Sparse Cholesky factor of a symmetric positive-definite matrix:
/// `P·A·Pᵀ = L·Lᵀ`, with `L` stored column-wise, diagonal first.
#[derive(Debug, Clone)]
pub struct SpdFactorization {
    dim: usize,
    /// `perm[k]` is the original index eliminated at step `k`.
    perm: Vec<usize>,
    /// Inverse of `perm`.
    pinv: Vec<usize>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SpdFactorization {
    /// Factorizes with a minimum-degree ordering.
    pub fn new(a: &SparseSymMatrix) -> Result<Self, LinalgError> {
        let perm = minimum_degree_order(&a.adjacency());
        Self::with_ordering(a, perm)
    }

    /// Factorizes with a caller-supplied elimination order.
    ///
    /// # Panics
    ///
    /// Panics if `perm` is not a permutation of `0..dim`.
    pub fn with_ordering(a: &SparseSymMatrix, perm: Vec<usize>) -> Result<Self, LinalgError> {
        let n = a.dim();
        assert_eq!(perm.len(), n, "ordering length");
        let mut pinv = vec![usize::MAX; n];
        for (k, &i) in perm.iter().enumerate() {
            assert!(pinv[i] == usize::MAX, "ordering repeats index {i}");
            pinv[i] = k;
        }

        // Upper triangle of P·A·Pᵀ, column-wise: column k holds rows i <= k.
        let (cp, ci, cx) = permuted_upper_csc(a, &pinv);
        let parent = elimination_tree(n, &cp, &ci);

        // Symbolic pass: column counts of L from the row patterns.
        let mut counts = vec![1usize; n];
        let mut stack = vec![0; n];
        let mut mark = vec![usize::MAX; n];
        for k in 0..n {
            let top = ereach(k, &cp, &ci, &parent, &mut stack, &mut mark);
            for &i in &stack[top..n] {
                counts[i] += 1;
            }
        }
        let mut col_ptr = vec![0usize; n + 1];
        for k in 0..n {
            col_ptr[k + 1] = col_ptr[k] + counts[k];
        }
        let nnz = col_ptr[n];
        let mut row_idx = vec![0usize; nnz];
        let mut values = vec![0.0; nnz];

        // Numeric up-looking pass, one row of L at a time.
        let mut next = col_ptr[..n].to_vec();
        let mut x = vec![0.0; n];
        mark.iter_mut().for_each(|m| *m = usize::MAX);
        for k in 0..n {
            let top = ereach(k, &cp, &ci, &parent, &mut stack, &mut mark);
            for p in cp[k]..cp[k + 1] {
                x[ci[p]] = cx[p];
            }
            let mut d = x[k];
            // Cancellation leaves a singular pivot at rounding level rather
            // than exactly zero, so compare against the original diagonal.
            let tiny = n as f64 * f64::EPSILON * d.abs();
            x[k] = 0.0;
            for &i in &stack[top..n] {
                let lki = x[i] / values[col_ptr[i]];
                x[i] = 0.0;
                for p in col_ptr[i] + 1..next[i] {
                    x[row_idx[p]] -= values[p] * lki;
                }
                d -= lki * lki;
                let p = next[i];
                next[i] += 1;
                row_idx[p] = k;
                values[p] = lki;
            }
            if !(d > tiny) {
                return Err(LinalgError::NotPositiveDefinite { pivot: perm[k], step: k, value: d });
            }
            let p = next[k];
            next[k] += 1;
            row_idx[p] = k;
            values[p] = d.sqrt();
        }
        Ok(Self { dim: n, perm, pinv, col_ptr, row_idx, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Stored entries of `L`, diagonal included.
    pub fn factor_nnz(&self) -> usize {
        self.values.len()
    }

    /// Elimination order; `perm()[k]` is the original index at step `k`.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Solves `A·x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let y = self.solve_lower(b, false)?;
        self.solve_lower(&y, true)
    }

    /// Triangular solve with `G = Pᵀ·L`, the factor expressed in the
    /// original ordering (`A = G·Gᵀ`).
    ///
    /// With `transposed == false` this solves `G·y = b`: `b` is indexed by
    /// original node and `y` by elimination step. With `transposed == true`
    /// it solves `Gᵀ·x = b`: `b` is indexed by elimination step and `x` by
    /// original node. For `b ~ N(0, I)` the transposed solve yields a draw
    /// with covariance `A⁻¹`.
    pub fn solve_lower(&self, b: &[f64], transposed: bool) -> Result<Vec<f64>, LinalgError> {
        if b.len() != self.dim {
            return Err(LinalgError::DimensionMismatch { expected: self.dim, found: b.len() });
        }
        let n = self.dim;
        if !transposed {
            let mut y: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
            for j in 0..n {
                let start = self.col_ptr[j];
                y[j] /= self.values[start];
                let yj = y[j];
                for p in start + 1..self.col_ptr[j + 1] {
                    y[self.row_idx[p]] -= self.values[p] * yj;
                }
            }
            Ok(y)
        } else {
            let mut y = b.to_vec();
            for j in (0..n).rev() {
                let start = self.col_ptr[j];
                let mut s = y[j];
                for p in start + 1..self.col_ptr[j + 1] {
                    s -= self.values[p] * y[self.row_idx[p]];
                }
                y[j] = s / self.values[start];
            }
            Ok((0..n).map(|i| y[self.pinv[i]]).collect())
        }
    }
}

/// Factorizes `a`; see [`SpdFactorization::new`].
pub fn factorize(a: &SparseSymMatrix) -> Result<SpdFactorization, LinalgError> {
    SpdFactorization::new(a)
}

fn permuted_upper_csc(a: &SparseSymMatrix, pinv: &[usize]) -> (Vec<usize>, Vec<usize>, Vec<f64>) {
    let n = a.dim();
    let mut cp = vec![0usize; n + 1];
    for (r, c, _) in a.iter() {
        cp[pinv[r].max(pinv[c]) + 1] += 1;
    }
    for k in 0..n {
        cp[k + 1] += cp[k];
    }
    let mut next = cp.clone();
    let mut ci = vec![0; a.nnz()];
    let mut cx = vec![0.0; a.nnz()];
    for (r, c, v) in a.iter() {
        let (pr, pc) = (pinv[r], pinv[c]);
        let col = pr.max(pc);
        let p = next[col];
        next[col] += 1;
        ci[p] = pr.min(pc);
        cx[p] = v;
    }
    (cp, ci, cx)
}

fn elimination_tree(n: usize, cp: &[usize], ci: &[usize]) -> Vec<usize> {
    let mut parent = vec![usize::MAX; n];
    let mut ancestor = vec![usize::MAX; n];
    for k in 0..n {
        for &row in &ci[cp[k]..cp[k + 1]] {
            let mut i = row;
            while i != usize::MAX && i < k {
                let inext = ancestor[i];
                ancestor[i] = k;
                if inext == usize::MAX {
                    parent[i] = k;
                }
                i = inext;
            }
        }
    }
    parent
}

/// Nonzero pattern of row `k` of `L` (excluding the diagonal), written to
/// `stack[top..n]` in topological order; returns `top`.
fn ereach(
    k: usize,
    cp: &[usize],
    ci: &[usize],
    parent: &[usize],
    stack: &mut [usize],
    mark: &mut [usize],
) -> usize {
    let n = parent.len();
    let mut top = n;
    mark[k] = k;
    for &row in &ci[cp[k]..cp[k + 1]] {
        let mut i = row;
        if i > k {
            continue;
        }
        let mut len = 0;
        while mark[i] != k {
            stack[len] = i;
            len += 1;
            mark[i] = k;
            i = parent[i];
        }
        while len > 0 {
            len -= 1;
            top -= 1;
            stack[top] = stack[len];
        }
    }
    top
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finalize_sums_duplicates() {
        let m = SparseSymMatrix::from_triplets(1, &[(0, 0, 1.0), (0, 0, 2.0)]);
        assert_eq!(m.iter().collect::<Vec<_>>(), vec![(0, 0, 3.0)]);
    }

    #[test]
    fn finalize_folds_to_upper() {
        let m = SparseSymMatrix::from_triplets(2, &[(1, 0, 2.0)]);
        assert_eq!(m.iter().collect::<Vec<_>>(), vec![(0, 1, 2.0)]);
        assert_eq!(m.get(1, 0), 2.0);
    }

    #[test]
    fn finalize_drops_exact_cancellation() {
        let m = SparseSymMatrix::from_triplets(2, &[(0, 1, 1.0), (0, 1, -1.0)]);
        assert_eq!(m.nnz(), 0);
    }

    #[test]
    fn finalize_is_order_independent() {
        let t = [(0, 1, 0.1), (0, 1, 0.2), (1, 0, 0.3), (2, 2, 1e-17), (2, 2, 1.0)];
        let mut rev = t;
        rev.reverse();
        let a = SparseSymMatrix::from_triplets(3, &t);
        let b = SparseSymMatrix::from_triplets(3, &rev);
        assert_eq!(a, b);
        let bits = |m: &SparseSymMatrix| m.iter().map(|e| e.2.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn accumulator_rejects_bad_index() {
        TripletAccumulator::new(2).add(0, 2, 1.0);
    }

    #[test]
    fn matvec_examples() {
        let id = SparseSymMatrix::identity(3);
        assert_eq!(id.matvec(&[1.0, -2.0, 3.5]).unwrap(), vec![1.0, -2.0, 3.5]);
        let m = SparseSymMatrix::from_triplets(2, &[(0, 1, 2.0)]);
        assert_eq!(m.matvec(&[1.0, 0.0]).unwrap(), vec![0.0, 2.0]);
        assert_eq!(
            m.matvec(&[1.0]),
            Err(LinalgError::DimensionMismatch { expected: 2, found: 1 })
        );
    }

    #[test]
    fn factorize_scalar() {
        let f = factorize(&SparseSymMatrix::from_diagonal(&[4.0])).unwrap();
        assert_eq!(f.values, vec![2.0]);
        assert_eq!(f.solve_lower(&[6.0], false).unwrap(), vec![3.0]);
    }

    #[test]
    fn factorize_rejects_semidefinite() {
        // [[1, -1], [-1, 1]] has the constant vector in its null space.
        let a = SparseSymMatrix::from_triplets(2, &[(0, 0, 1.0), (1, 1, 1.0), (0, 1, -1.0)]);
        assert!(matches!(factorize(&a), Err(LinalgError::NotPositiveDefinite { .. })));
        let neg = SparseSymMatrix::from_diagonal(&[1.0, -1.0]);
        assert!(matches!(
            factorize(&neg),
            Err(LinalgError::NotPositiveDefinite { pivot: 1, .. })
        ));
    }

    #[test]
    fn solve_examples() {
        let f = factorize(&SparseSymMatrix::identity(3)).unwrap();
        assert_eq!(f.solve(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        let f = factorize(&SparseSymMatrix::from_diagonal(&[2.0, 2.0])).unwrap();
        let x = f.solve(&[4.0, 6.0]).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-15 && (x[1] - 3.0).abs() < 1e-15);
        let r = 1.0 / 2f64.sqrt();
        for transposed in [false, true] {
            let y = f.solve_lower(&[1.0, 3.0], transposed).unwrap();
            assert!((y[0] - r).abs() < 1e-15 && (y[1] - 3.0 * r).abs() < 1e-15);
        }
        assert!(f.solve(&[1.0]).is_err());
    }

    #[test]
    fn tridiagonal_solve_with_fill() {
        // Arrow matrix: dense first row/column, diagonal otherwise.
        let n = 6;
        let mut t = vec![(0, 0, n as f64 + 1.0)];
        for i in 1..n {
            t.push((i, i, 2.0));
            t.push((0, i, 1.0));
        }
        let a = SparseSymMatrix::from_triplets(n, &t);
        let x: Vec<f64> = (0..n).map(|i| i as f64 - 2.0).collect();
        let b = a.matvec(&x).unwrap();
        for perm in [(0..n).collect::<Vec<_>>(), (0..n).rev().collect()] {
            let f = SpdFactorization::with_ordering(&a, perm).unwrap();
            let got = f.solve(&b).unwrap();
            for (g, e) in got.iter().zip(&x) {
                assert!((g - e).abs() < 1e-13);
            }
        }
        // Minimum degree defers the hub until the leaves are gone: no fill.
        let f = factorize(&a).unwrap();
        assert!(f.perm().iter().position(|&i| i == 0).unwrap() >= n - 2);
        assert_eq!(f.factor_nnz(), a.nnz());
        // Eliminating the hub first fills the whole factor.
        let dense = SpdFactorization::with_ordering(&a, (0..n).collect()).unwrap();
        assert_eq!(dense.factor_nnz(), n * (n + 1) / 2);
    }

    #[test]
    fn sandwich_matches_dense() {
        let b = SparseSymMatrix::from_triplets(
            3,
            &[(0, 0, 2.0), (1, 1, 3.0), (2, 2, 4.0), (0, 1, -1.0), (1, 2, 0.5)],
        );
        let d = [0.5, 2.0, 1.5];
        let q = b.sandwich_diagonal(&d).unwrap();
        let bd = b.to_dense();
        for i in 0..3 {
            for j in 0..3 {
                let e: f64 = (0..3).map(|k| bd[i][k] * d[k] * bd[k][j]).sum();
                assert!((q.get(i, j) - e).abs() < 1e-14, "{i}{j}");
            }
        }
        // 0 and 2 are two hops apart through 1.
        assert!(q.get(0, 2) != 0.0);
    }

    #[test]
    fn add_scaled_and_sum() {
        let a = SparseSymMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 1, 1.0)]);
        let b = SparseSymMatrix::from_triplets(2, &[(1, 1, 1.0), (0, 1, -2.0)]);
        let c = a.add_scaled(2.0, &b, 1.0).unwrap();
        assert_eq!(c.iter().collect::<Vec<_>>(), vec![(0, 0, 2.0), (1, 1, 1.0)]);
        assert_eq!(c.total_sum(), 3.0);
        assert_eq!(a.scaled(0.0).nnz(), 0);
    }

    #[test]
    fn merge_excluding_unions() {
        assert_eq!(merge_excluding(&[1, 3, 5], &[2, 3, 6], 5, 2), vec![1, 3, 6]);
    }
}
