//! Cube chains, their faces and the boundary operator.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::homalg::field::Field;
use crate::homalg::matrix::{collect_sparse, SparseMatrix};
use crate::precubical::{CubeId, PrecubicalSet, ReachablePairs, Side};

/// A sequence of cubes `c_1, ..., c_l` with `d^1(c_i) = d^0(c_{i+1})`, from
/// `start` to `end`. The empty chain sits at a single vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CubeChain {
    start: CubeId,
    end: CubeId,
    cubes: Vec<CubeId>,
    types: Vec<usize>,
}

impl CubeChain {
    pub fn empty(v: CubeId) -> Self {
        Self {
            start: v,
            end: v,
            cubes: Vec::new(),
            types: Vec::new(),
        }
    }

    /// Checks dimensions and corner matching against `x`.
    pub fn new(x: &PrecubicalSet, start: CubeId, cubes: Vec<CubeId>) -> Result<Self> {
        if x.dim(start) != 0 {
            return domain(format!("chain start {} is not a vertex", x.label(start)));
        }
        let mut types = Vec::with_capacity(cubes.len());
        let mut cur = start;
        for &c in &cubes {
            let n = x.dim(c);
            if n == 0 {
                return domain(format!("chain member {} is a vertex", x.label(c)));
            }
            let (lo, hi) = x.corners(c);
            if lo != cur {
                return domain(format!(
                    "chain member {} does not start at {}",
                    x.label(c),
                    x.label(cur)
                ));
            }
            types.push(n);
            cur = hi;
        }
        Ok(Self {
            start,
            end: cur,
            cubes,
            types,
        })
    }

    pub fn start(&self) -> CubeId {
        self.start
    }

    pub fn end(&self) -> CubeId {
        self.end
    }

    pub fn cubes(&self) -> &[CubeId] {
        &self.cubes
    }

    /// `(n_1, ..., n_l)`.
    pub fn types(&self) -> &[usize] {
        &self.types
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    /// `Σ n_k`.
    pub fn length(&self) -> usize {
        self.types.iter().sum()
    }

    /// `Σ n_k - l`.
    pub fn dim(&self) -> usize {
        self.length() - self.cubes.len()
    }

    /// Concatenation, or `None` when `self` does not end where `other` starts.
    pub fn concat(&self, other: &CubeChain) -> Option<CubeChain> {
        (self.end == other.start).then(|| CubeChain {
            start: self.start,
            end: other.end,
            cubes: self.cubes.iter().chain(&other.cubes).copied().collect(),
            types: self.types.iter().chain(&other.types).copied().collect(),
        })
    }

    /// The chain of cubes `lo..hi`.
    pub fn sub(&self, x: &PrecubicalSet, lo: usize, hi: usize) -> CubeChain {
        let start = if lo == 0 {
            self.start
        } else {
            x.corners(self.cubes[lo - 1]).1
        };
        let end = if hi == self.cubes.len() {
            self.end
        } else {
            x.corners(self.cubes[hi]).0
        };
        CubeChain {
            start,
            end,
            cubes: self.cubes[lo..hi].to_vec(),
            types: self.types[lo..hi].to_vec(),
        }
    }

    /// Positions `k` such that the chain visits `v` after its first `k` cubes.
    pub fn visits(&self, x: &PrecubicalSet, v: CubeId) -> Vec<usize> {
        let mut out = Vec::new();
        if self.start == v {
            out.push(0);
        }
        for (k, &c) in self.cubes.iter().enumerate() {
            if x.corners(c).1 == v {
                out.push(k + 1);
            }
        }
        out
    }

    /// Cube labels, for display and JSON.
    pub fn labels(&self, x: &PrecubicalSet) -> Vec<String> {
        self.cubes.iter().map(|&c| x.label(c).to_string()).collect()
    }

    pub fn display(&self, x: &PrecubicalSet) -> String {
        if self.cubes.is_empty() {
            format!("()@{}", x.label(self.start))
        } else {
            format!("({})", self.labels(x).join(", "))
        }
    }
}

impl Ord for CubeChain {
    fn cmp(&self, other: &Self) -> Ordering {
        (
            self.length(),
            &self.types,
            &self.cubes,
            self.start,
            self.end,
        )
            .cmp(&(
                other.length(),
                &other.types,
                &other.cubes,
                other.start,
                other.end,
            ))
    }
}

impl PartialOrd for CubeChain {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `sgn(I)`: `+1` iff `Σ I ≡ r(r+1)/2 (mod 2)` with `r = |I|`.
pub fn sgn(indices: &[usize]) -> i64 {
    let r = indices.len();
    let sum: usize = indices.iter().sum();
    if sum % 2 == (r * (r + 1) / 2) % 2 {
        1
    } else {
        -1
    }
}

/// `d_{k,I}(c)` with 0-based position `k`: `c_k` is replaced by
/// `(d^0_{Ī}(c_k), d^1_I(c_k))`.
pub fn chain_face(
    x: &PrecubicalSet,
    c: &CubeChain,
    k: usize,
    indices: &[usize],
) -> Result<CubeChain> {
    let Some(&n) = c.types.get(k) else {
        return domain(format!(
            "position {k} out of range for a chain of {} cubes",
            c.len()
        ));
    };
    let mut set: Vec<usize> = indices.to_vec();
    set.sort_unstable();
    set.dedup();
    if set.len() != indices.len() || set.iter().any(|&i| i >= n) {
        return domain(format!(
            "{indices:?} is not a set of directions of a {n}-cube"
        ));
    }
    if set.is_empty() || set.len() == n {
        return domain(format!("{indices:?} does not split a {n}-cube"));
    }
    let complement: Vec<usize> = (0..n).filter(|i| !set.contains(i)).collect();
    let cube = c.cubes[k];
    let first = x.iterated_face(cube, Side::Lower, &complement)?;
    let second = x.iterated_face(cube, Side::Upper, &set)?;
    let mut cubes = Vec::with_capacity(c.len() + 1);
    let mut types = Vec::with_capacity(c.len() + 1);
    cubes.extend_from_slice(&c.cubes[..k]);
    types.extend_from_slice(&c.types[..k]);
    cubes.extend([first, second]);
    types.extend([set.len(), n - set.len()]);
    cubes.extend_from_slice(&c.cubes[k + 1..]);
    types.extend_from_slice(&c.types[k + 1..]);
    Ok(CubeChain {
        start: c.start,
        end: c.end,
        cubes,
        types,
    })
}

/// All `r`-subsets of `0..n` in lexicographic order.
pub(crate) fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < r - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, r, &mut Vec::with_capacity(r), &mut out);
    out
}

/// Finite combination of cube chains sharing endpoints and dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct FormalChain<E> {
    pub from: CubeId,
    pub to: CubeId,
    pub dim: usize,
    terms: BTreeMap<CubeChain, E>,
}

impl<E: Clone> FormalChain<E> {
    pub fn zero(from: CubeId, to: CubeId, dim: usize) -> Self {
        Self {
            from,
            to,
            dim,
            terms: BTreeMap::new(),
        }
    }

    /// Checks that every key has the given endpoints and dimension; drops nothing.
    pub fn from_terms(
        from: CubeId,
        to: CubeId,
        dim: usize,
        terms: BTreeMap<CubeChain, E>,
    ) -> Result<Self> {
        if let Some(c) = terms
            .keys()
            .find(|c| c.start != from || c.end != to || c.dim() != dim)
        {
            return Err(Error::Operand(format!(
                "chain of dimension {} does not fit a dimension {dim} combination with fixed endpoints",
                c.dim()
            )));
        }
        Ok(Self {
            from,
            to,
            dim,
            terms,
        })
    }

    pub fn into_terms(self) -> BTreeMap<CubeChain, E> {
        self.terms
    }

    pub fn terms(&self) -> &BTreeMap<CubeChain, E> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient<F: Field<Elem = E>>(&self, field: &F, c: &CubeChain) -> E {
        self.terms.get(c).cloned().unwrap_or_else(|| field.zero())
    }

    /// Adds `coeff * c`.
    pub fn add_term<F: Field<Elem = E>>(
        &mut self,
        field: &F,
        c: CubeChain,
        coeff: E,
    ) -> Result<()> {
        if c.start != self.from || c.end != self.to || c.dim() != self.dim {
            return Err(Error::Operand(format!(
                "chain of dimension {} does not belong to a dimension {} combination with fixed endpoints",
                c.dim(),
                self.dim
            )));
        }
        let entry = self.terms.entry(c).or_insert_with(|| field.zero());
        *entry = field.add(entry, &coeff);
        if field.is_zero(entry) {
            self.terms.retain(|_, v| !field.is_zero(v));
        }
        Ok(())
    }
}

impl FormalChain<i64> {
    pub fn over<F: Field>(&self, field: &F) -> FormalChain<F::Elem> {
        let terms = self
            .terms
            .iter()
            .map(|(c, &v)| (c.clone(), field.from_i64(v)))
            .filter(|(_, v)| !field.is_zero(v))
            .collect();
        FormalChain {
            from: self.from,
            to: self.to,
            dim: self.dim,
            terms,
        }
    }
}

/// `∂c` with integer coefficients; zero for a chain of dimension 0.
///
/// The term `d_{k,I}(c)` (1-based `k`) carries `(-1)^{n_1+...+n_{k-1}+k} sgn(I)`.
/// Adding `r + 1` to that exponent agrees on odd `r` but breaks `∂∘∂ = 0` from
/// 3-cubes on; see [`boundary_with_r_exponent`].
pub fn boundary(x: &PrecubicalSet, c: &CubeChain) -> FormalChain<i64> {
    signed_boundary(x, c, false)
}

/// The variant with exponent `n_1+...+n_{k-1}+k+r+1`. Kept for comparison only.
pub fn boundary_with_r_exponent(x: &PrecubicalSet, c: &CubeChain) -> FormalChain<i64> {
    signed_boundary(x, c, true)
}

fn signed_boundary(x: &PrecubicalSet, c: &CubeChain, with_r: bool) -> FormalChain<i64> {
    let mut acc: BTreeMap<CubeChain, i64> = BTreeMap::new();
    let mut prefix = 0usize;
    for (k, &n) in c.types.iter().enumerate() {
        for r in 1..n {
            let extra = if with_r { r + 1 } else { 0 };
            let parity = (prefix + k + 1 + extra) % 2;
            let base = if parity == 0 { 1 } else { -1 };
            for set in subsets(n, r) {
                let face = chain_face(x, c, k, &set).expect("valid split of a chain member");
                *acc.entry(face).or_insert(0) += base * sgn(&set);
            }
        }
        prefix += n;
    }
    acc.retain(|_, v| *v != 0);
    FormalChain {
        from: c.start,
        to: c.end,
        dim: c.dim().saturating_sub(1),
        terms: acc,
    }
}

/// Chain enumeration over a fixed complex, reusing its reachability relation.
pub struct ChainEnumerator<'a> {
    x: &'a PrecubicalSet,
    reach: ReachablePairs,
    max_length: usize,
}

impl<'a> ChainEnumerator<'a> {
    pub fn new(x: &'a PrecubicalSet) -> Self {
        let max_length = x.vertices().len().saturating_sub(1);
        Self {
            x,
            reach: x.reachable_pairs(),
            max_length,
        }
    }

    pub fn complex(&self) -> &'a PrecubicalSet {
        self.x
    }

    pub fn reach(&self) -> &ReachablePairs {
        &self.reach
    }

    /// Chains `v → w` of dimension at most `max_dim`, one sorted list per
    /// dimension. Lengths are capped at `|V| - 1`, which loses nothing on
    /// complexes without directed loops.
    pub fn enumerate(&self, v: CubeId, w: CubeId, max_dim: usize) -> Vec<Vec<CubeChain>> {
        let mut out = vec![Vec::new(); max_dim + 1];
        if !self.reach.contains(v, w) {
            return out;
        }
        let mut stack = Vec::new();
        self.dfs(v, w, 0, 0, max_dim, &mut stack, &mut out);
        for layer in &mut out {
            layer.sort();
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        cur: CubeId,
        w: CubeId,
        dim: usize,
        length: usize,
        max_dim: usize,
        stack: &mut Vec<CubeId>,
        out: &mut [Vec<CubeChain>],
    ) {
        if cur == w {
            let start = stack.first().map_or(cur, |&c| self.x.corners(c).0);
            let types = stack.iter().map(|&c| self.x.dim(c)).collect();
            out[dim].push(CubeChain {
                start,
                end: w,
                cubes: stack.clone(),
                types,
            });
        }
        for &c in self.x.outgoing(cur) {
            let n = self.x.dim(c);
            let end = self.x.corners(c).1;
            if dim + n - 1 > max_dim || length + n > self.max_length || !self.reach.contains(end, w)
            {
                continue;
            }
            stack.push(c);
            self.dfs(end, w, dim + n - 1, length + n, max_dim, stack, out);
            stack.pop();
        }
    }

    pub fn slice(&self, v: CubeId, w: CubeId, max_dim: usize) -> Result<ChainComplexSlice> {
        ChainComplexSlice::from_bases(self.x, v, w, self.enumerate(v, w, max_dim))
    }
}

pub fn enumerate_chains(
    x: &PrecubicalSet,
    v: CubeId,
    w: CubeId,
    max_dim: usize,
) -> Vec<Vec<CubeChain>> {
    ChainEnumerator::new(x).enumerate(v, w, max_dim)
}

/// The truncated chain complex `R_*[X]_v^w` in dimensions `0..=max_dim`.
#[derive(Clone, Debug)]
pub struct ChainComplexSlice {
    pub from: CubeId,
    pub to: CubeId,
    bases: Vec<Vec<CubeChain>>,
    index: Vec<HashMap<CubeChain, usize>>,
    /// `boundaries[i]` maps dimension `i` to `i - 1`; `boundaries[0]` has no rows.
    boundaries: Vec<SparseMatrix<i64>>,
}

impl ChainComplexSlice {
    pub fn from_bases(
        x: &PrecubicalSet,
        v: CubeId,
        w: CubeId,
        bases: Vec<Vec<CubeChain>>,
    ) -> Result<Self> {
        let index: Vec<HashMap<CubeChain, usize>> = bases
            .iter()
            .map(|b| b.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect())
            .collect();
        let mut boundaries = Vec::with_capacity(bases.len());
        for (i, basis) in bases.iter().enumerate() {
            if i == 0 {
                boundaries.push(SparseMatrix::zero(0, basis.len()));
                continue;
            }
            let mut cols = Vec::with_capacity(basis.len());
            for c in basis {
                let db = boundary(x, c);
                let mut col = Vec::with_capacity(db.terms.len());
                for (face, coeff) in db.terms {
                    let Some(&row) = index[i - 1].get(&face) else {
                        return Err(Error::Integrity(format!(
                            "face {} of {} is missing from the dimension {} basis",
                            face.display(x),
                            c.display(x),
                            i - 1
                        )));
                    };
                    col.push((row, coeff));
                }
                col.sort_by_key(|e| e.0);
                cols.push(col);
            }
            boundaries.push(SparseMatrix::new(bases[i - 1].len(), cols));
        }
        let slice = Self {
            from: v,
            to: w,
            bases,
            index,
            boundaries,
        };
        slice.verify()?;
        Ok(slice)
    }

    /// Checks `∂∘∂ = 0` exactly over the integers.
    pub fn verify(&self) -> Result<()> {
        for i in 2..self.boundaries.len() {
            let outer = &self.boundaries[i - 1];
            for (j, col) in self.boundaries[i].cols().iter().enumerate() {
                let mut acc: HashMap<usize, i64> = HashMap::new();
                for (mid, a) in col {
                    for (row, b) in outer.col(*mid) {
                        *acc.entry(*row).or_insert(0) += a * b;
                    }
                }
                if let Some((row, _)) = acc.iter().find(|(_, v)| **v != 0) {
                    return Err(Error::Integrity(format!(
                        "∂∘∂ ≠ 0: dimension {i} basis chain {j} hits dimension {} chain {row}",
                        i - 2
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn max_dim(&self) -> usize {
        self.bases.len() - 1
    }

    pub fn basis(&self, dim: usize) -> &[CubeChain] {
        self.bases.get(dim).map_or(&[], Vec::as_slice)
    }

    pub fn bases(&self) -> &[Vec<CubeChain>] {
        &self.bases
    }

    pub fn position(&self, c: &CubeChain) -> Option<usize> {
        self.index.get(c.dim())?.get(c).copied()
    }

    /// `∂` on dimension `dim` (a `0 × n` matrix for `dim = 0`, an empty one above the top).
    pub fn boundary_matrix(&self, dim: usize) -> SparseMatrix<i64> {
        match self.boundaries.get(dim) {
            Some(m) => m.clone(),
            None => SparseMatrix::zero(self.basis(dim - 1).len(), 0),
        }
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.bases.iter().map(Vec::len).collect()
    }

    /// Coordinates of a formal chain in the basis of its dimension.
    pub fn coordinates<F: Field>(
        &self,
        field: &F,
        c: &FormalChain<F::Elem>,
    ) -> Result<Vec<(usize, F::Elem)>> {
        let mut entries = Vec::with_capacity(c.terms.len());
        for (chain, coeff) in &c.terms {
            let pos = self
                .position(chain)
                .ok_or_else(|| Error::Operand("chain is not in this slice".to_string()))?;
            entries.push((pos, coeff.clone()));
        }
        Ok(collect_sparse(field, entries))
    }

    pub fn to_json<F: Field>(&self, x: &PrecubicalSet, field: &F) -> SliceJson {
        SliceJson {
            from: x.label(self.from).to_string(),
            to: x.label(self.to).to_string(),
            basis: self
                .bases
                .iter()
                .map(|b| b.iter().map(|c| c.labels(x)).collect())
                .collect(),
            boundary: self
                .boundaries
                .iter()
                .map(|m| {
                    m.cols()
                        .iter()
                        .enumerate()
                        .flat_map(|(j, col)| {
                            col.iter()
                                .map(move |(i, v)| (*i, j, field.render(&field.from_i64(*v))))
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

/// JSON export of a slice; `boundary[i]` lists `(row, col, coeff)` of `∂` on dimension `i`.
#[derive(Clone, Debug, Serialize)]
pub struct SliceJson {
    pub from: String,
    pub to: String,
    pub basis: Vec<Vec<Vec<String>>>,
    pub boundary: Vec<Vec<(usize, usize, String)>>,
}

pub fn complex_slice(
    x: &PrecubicalSet,
    v: CubeId,
    w: CubeId,
    max_dim: usize,
) -> Result<ChainComplexSlice> {
    ChainEnumerator::new(x).slice(v, w, max_dim)
}

/// Two chains of the same dimension and endpoints with different lengths.
#[derive(Clone, Debug)]
pub struct LengthCounterexample {
    pub from: CubeId,
    pub to: CubeId,
    pub dim: usize,
    pub chains: [CubeChain; 2],
}

/// Which pairs [`check_equal_length`] looks at.
#[derive(Clone, Copy, Debug)]
pub enum LengthScope {
    AllPairs,
    Pair(CubeId, CubeId),
}

/// `Ok(())` iff for every pair in scope and every dimension all chains have one
/// length; otherwise the first counterexample in vertex order.
pub fn check_equal_length(
    x: &PrecubicalSet,
    scope: LengthScope,
) -> std::result::Result<(), LengthCounterexample> {
    let max_length = x.vertices().len().saturating_sub(1);
    let sources: Vec<CubeId> = match scope {
        LengthScope::AllPairs => x.vertices().to_vec(),
        LengthScope::Pair(v, _) => vec![v],
    };
    for v in sources {
        // (vertex, dim) -> lengths of chains from v.
        let mut seen: HashSet<(CubeId, usize, usize)> = HashSet::new();
        let mut frontier = vec![(v, 0usize, 0usize)];
        seen.insert((v, 0, 0));
        let mut lengths: BTreeMap<(CubeId, usize), Vec<usize>> = BTreeMap::new();
        lengths.entry((v, 0)).or_default().push(0);
        while let Some((u, d, l)) = frontier.pop() {
            for &c in x.outgoing(u) {
                let n = x.dim(c);
                let state = (x.corners(c).1, d + n - 1, l + n);
                if state.2 <= max_length && seen.insert(state) {
                    lengths.entry((state.0, state.1)).or_default().push(state.2);
                    frontier.push(state);
                }
            }
        }
        let mut bad: Option<(CubeId, usize, usize, usize)> = None;
        for ((w, d), ls) in &lengths {
            if let LengthScope::Pair(_, target) = scope {
                if *w != target {
                    continue;
                }
            }
            let lo = *ls.iter().min().expect("nonempty");
            let hi = *ls.iter().max().expect("nonempty");
            if lo != hi {
                bad = Some((*w, *d, lo, hi));
                break;
            }
        }
        if let Some((w, d, lo, hi)) = bad {
            let chains = enumerate_chains(x, v, w, d).swap_remove(d);
            let a = chains
                .iter()
                .find(|c| c.length() == lo)
                .expect("witness")
                .clone();
            let b = chains
                .iter()
                .find(|c| c.length() == hi)
                .expect("witness")
                .clone();
            return Err(LengthCounterexample {
                from: v,
                to: w,
                dim: d,
                chains: [a, b],
            });
        }
    }
    Ok(())
}
