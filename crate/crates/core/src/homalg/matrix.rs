//! Sparse column matrices and exact column reduction.
//!
//! [`Reduction`] brings a matrix `D` to a column-reduced form `R = D V`: every
//! nonzero column of `R` has a distinct lowest row (its pivot). Columns are
//! visited sparsest first. On graph incidence matrices the reduction amounts to
//! edge contraction and never fills in.

use std::collections::HashMap;

use super::field::Field;

/// Sparse vector: `(index, value)` pairs sorted by index, no stored zeros.
pub type SparseVec<E> = Vec<(usize, E)>;

/// `a + factor * b`.
pub fn axpy<F: Field>(
    field: &F,
    a: &SparseVec<F::Elem>,
    factor: &F::Elem,
    b: &SparseVec<F::Elem>,
) -> SparseVec<F::Elem> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i].clone());
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            out.push((b[j].0, field.mul(factor, &b[j].1)));
            j += 1;
        } else {
            let v = field.add(&a[i].1, &field.mul(factor, &b[j].1));
            if !field.is_zero(&v) {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

pub fn scale<F: Field>(field: &F, factor: &F::Elem, v: &SparseVec<F::Elem>) -> SparseVec<F::Elem> {
    if field.is_zero(factor) {
        return Vec::new();
    }
    v.iter().map(|(i, x)| (*i, field.mul(factor, x))).collect()
}

/// Builds a sparse vector from unsorted entries, summing duplicates.
pub fn collect_sparse<F: Field>(
    field: &F,
    entries: impl IntoIterator<Item = (usize, F::Elem)>,
) -> SparseVec<F::Elem> {
    let mut entries: Vec<_> = entries.into_iter().collect();
    entries.sort_by_key(|e| e.0);
    let mut out: SparseVec<F::Elem> = Vec::with_capacity(entries.len());
    for (i, x) in entries {
        match out.last_mut() {
            Some(last) if last.0 == i => last.1 = field.add(&last.1, &x),
            _ => out.push((i, x)),
        }
    }
    out.retain(|(_, x)| !field.is_zero(x));
    out
}

fn lookup<E>(v: &SparseVec<E>, i: usize) -> Option<&E> {
    v.binary_search_by_key(&i, |e| e.0).ok().map(|k| &v[k].1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<E> {
    nrows: usize,
    cols: Vec<SparseVec<E>>,
}

impl<E: Clone> SparseMatrix<E> {
    pub fn new(nrows: usize, cols: Vec<SparseVec<E>>) -> Self {
        debug_assert!(cols.iter().flatten().all(|(r, _)| *r < nrows));
        Self { nrows, cols }
    }

    pub fn zero(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            cols: vec![Vec::new(); ncols],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn col(&self, j: usize) -> &SparseVec<E> {
        &self.cols[j]
    }

    pub fn cols(&self) -> &[SparseVec<E>] {
        &self.cols
    }

    pub fn transpose(&self) -> Self {
        let mut rows = vec![Vec::new(); self.nrows];
        for (j, col) in self.cols.iter().enumerate() {
            for (i, x) in col {
                rows[*i].push((j, x.clone()));
            }
        }
        Self {
            nrows: self.cols.len(),
            cols: rows,
        }
    }

    pub fn map<G: Clone>(&self, f: impl Fn(&E) -> G) -> SparseMatrix<G> {
        SparseMatrix {
            nrows: self.nrows,
            cols: self
                .cols
                .iter()
                .map(|c| c.iter().map(|(i, x)| (*i, f(x))).collect())
                .collect(),
        }
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }
}

impl SparseMatrix<i64> {
    pub fn over<F: Field>(&self, field: &F) -> SparseMatrix<F::Elem> {
        let cols = self
            .cols
            .iter()
            .map(|c| {
                c.iter()
                    .map(|(i, x)| (*i, field.from_i64(*x)))
                    .filter(|(_, x)| !field.is_zero(x))
                    .collect()
            })
            .collect();
        SparseMatrix {
            nrows: self.nrows,
            cols,
        }
    }
}

impl<E: Clone> SparseMatrix<E> {
    pub fn mul_vec<F: Field<Elem = E>>(&self, field: &F, x: &SparseVec<E>) -> SparseVec<E> {
        let mut acc = Vec::new();
        for (j, xj) in x {
            acc = axpy(field, &acc, xj, &self.cols[*j]);
        }
        acc
    }

    /// `self * other`.
    pub fn mul<F: Field<Elem = E>>(&self, field: &F, other: &SparseMatrix<E>) -> SparseMatrix<E> {
        let cols = other.cols.iter().map(|c| self.mul_vec(field, c)).collect();
        SparseMatrix {
            nrows: self.nrows,
            cols,
        }
    }
}

/// Column reduction `R = D V` of a matrix.
#[derive(Clone, Debug)]
pub struct Reduction<F: Field> {
    field: F,
    nrows: usize,
    ncols: usize,
    /// Nonzero reduced columns.
    basis: Vec<SparseVec<F::Elem>>,
    /// Column combinations producing `basis` (when tracked).
    combos: Option<Vec<SparseVec<F::Elem>>>,
    kernel: Option<Vec<SparseVec<F::Elem>>>,
    pivots: HashMap<usize, usize>,
}

impl<F: Field> Reduction<F> {
    /// Reduces `matrix`; `track` also records `V`, which kernel bases and
    /// [`Reduction::solve`] need.
    pub fn new(field: &F, matrix: &SparseMatrix<F::Elem>, track: bool) -> Self {
        let mut order: Vec<usize> = (0..matrix.ncols()).collect();
        order.sort_by_key(|&j| (matrix.col(j).len(), j));
        let mut red = Reduction {
            field: field.clone(),
            nrows: matrix.nrows(),
            ncols: matrix.ncols(),
            basis: Vec::new(),
            combos: track.then(Vec::new),
            kernel: track.then(Vec::new),
            pivots: HashMap::new(),
        };
        for j in order {
            let mut col = matrix.col(j).clone();
            let mut combo: SparseVec<F::Elem> = if track {
                vec![(j, field.one())]
            } else {
                Vec::new()
            };
            loop {
                let Some((low, value)) = col.last().cloned() else {
                    if let Some(kernel) = red.kernel.as_mut() {
                        kernel.push(combo);
                    }
                    break;
                };
                match red.pivots.get(&low) {
                    Some(&k) => {
                        let pivot_value = &red.basis[k].last().expect("nonzero basis column").1;
                        let factor = field.neg(&field.div(&value, pivot_value));
                        col = axpy(field, &col, &factor, &red.basis[k]);
                        if let Some(combos) = &red.combos {
                            combo = axpy(field, &combo, &factor, &combos[k]);
                        }
                    }
                    None => {
                        red.pivots.insert(low, red.basis.len());
                        red.basis.push(col);
                        if let Some(combos) = red.combos.as_mut() {
                            combos.push(combo);
                        }
                        break;
                    }
                }
            }
        }
        red
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Pivot rows of the column space, ascending.
    pub fn pivot_rows(&self) -> Vec<usize> {
        let mut rows: Vec<usize> = self.pivots.keys().copied().collect();
        rows.sort_unstable();
        rows
    }

    /// Reduces `v` against the column space until no entry sits on a pivot
    /// row. The residue depends only on `v` modulo the column space. Also
    /// returns the combination `x` of basis columns with `v = residue + R x`.
    fn reduce_with_combo(
        &self,
        v: &SparseVec<F::Elem>,
    ) -> (SparseVec<F::Elem>, Vec<(usize, F::Elem)>) {
        let field = &self.field;
        let mut v = v.clone();
        let mut used = Vec::new();
        let mut bound = usize::MAX;
        loop {
            let next = v
                .iter()
                .rev()
                .find(|(i, _)| *i < bound && self.pivots.contains_key(i))
                .cloned();
            let Some((row, value)) = next else { break };
            let k = self.pivots[&row];
            let factor = field.div(&value, &self.basis[k].last().expect("nonzero").1);
            v = axpy(field, &v, &field.neg(&factor), &self.basis[k]);
            used.push((k, factor));
            bound = row;
        }
        (v, used)
    }

    /// Canonical representative of `v` modulo the column space.
    pub fn reduce(&self, v: &SparseVec<F::Elem>) -> SparseVec<F::Elem> {
        self.reduce_with_combo(v).0
    }

    pub fn contains(&self, v: &SparseVec<F::Elem>) -> bool {
        self.reduce(v).is_empty()
    }

    /// Some `x` with `D x = b`, or `None` when `b` is not in the column space.
    /// Requires tracking.
    pub fn solve(&self, b: &SparseVec<F::Elem>) -> Option<SparseVec<F::Elem>> {
        let combos = self
            .combos
            .as_ref()
            .expect("solve needs a tracked reduction");
        let (residue, used) = self.reduce_with_combo(b);
        if !residue.is_empty() {
            return None;
        }
        let mut x = Vec::new();
        for (k, factor) in used {
            x = axpy(&self.field, &x, &factor, &combos[k]);
        }
        Some(x)
    }

    /// Basis of the null space (requires tracking), in reduced echelon form.
    pub fn kernel_basis(&self) -> Vec<SparseVec<F::Elem>> {
        let kernel = self
            .kernel
            .as_ref()
            .expect("kernel basis needs a tracked reduction");
        echelon_basis(&self.field, self.ncols, kernel)
    }

    pub fn nullity(&self) -> usize {
        self.ncols - self.rank()
    }

    /// Basis of the column space in reduced echelon form: pivots normalized to 1,
    /// and no basis vector has an entry on another vector's pivot row.
    pub fn image_basis(&self) -> Vec<SparseVec<F::Elem>> {
        let field = &self.field;
        let mut out: Vec<(usize, SparseVec<F::Elem>)> = self
            .basis
            .iter()
            .map(|b| {
                let (low, lead) = b.last().cloned().expect("nonzero");
                let mut v = scale(field, &field.inv(&lead), b);
                let mut bound = low;
                loop {
                    let next = v
                        .iter()
                        .rev()
                        .find(|(i, _)| *i < bound && self.pivots.contains_key(i))
                        .cloned();
                    let Some((row, value)) = next else { break };
                    let k = self.pivots[&row];
                    let factor = field.div(&value, &self.basis[k].last().expect("nonzero").1);
                    v = axpy(field, &v, &field.neg(&factor), &self.basis[k]);
                    bound = row;
                }
                (low, v)
            })
            .collect();
        out.sort_by_key(|(low, _)| *low);
        out.into_iter().map(|(_, v)| v).collect()
    }
}

/// Reduced echelon basis of the span of `vectors` (vectors of length `dim`).
pub fn echelon_basis<F: Field>(
    field: &F,
    dim: usize,
    vectors: &[SparseVec<F::Elem>],
) -> Vec<SparseVec<F::Elem>> {
    let m = SparseMatrix::new(dim, vectors.to_vec());
    Reduction::new(field, &m, false).image_basis()
}

pub fn rank<F: Field>(field: &F, matrix: &SparseMatrix<F::Elem>) -> usize {
    Reduction::new(field, matrix, false).rank()
}

pub fn kernel_basis<F: Field>(
    field: &F,
    matrix: &SparseMatrix<F::Elem>,
) -> Vec<SparseVec<F::Elem>> {
    Reduction::new(field, matrix, true).kernel_basis()
}

pub fn image_basis<F: Field>(field: &F, matrix: &SparseMatrix<F::Elem>) -> Vec<SparseVec<F::Elem>> {
    Reduction::new(field, matrix, false).image_basis()
}

/// Value of `v` at index `i` (zero when absent).
pub fn entry<F: Field>(field: &F, v: &SparseVec<F::Elem>, i: usize) -> F::Elem {
    lookup(v, i).cloned().unwrap_or_else(|| field.zero())
}
