//! Exact linear algebra and (co)homology of chain complex slices.

pub mod field;
pub mod matrix;

use std::collections::BTreeMap;

use petgraph::unionfind::UnionFind;
use serde::Serialize;

use crate::chains::ChainComplexSlice;
use crate::precubical::PrecubicalSet;
use field::Field;
use matrix::{echelon_basis, Reduction, SparseMatrix, SparseVec};

/// One basis element of a (co)homology group: `(chain labels, coefficient)` terms.
pub type RenderedVector = Vec<(Vec<String>, String)>;

/// Ranks of `HM_{i+1}` (or `HM^{i+1}`) for one endpoint pair, keyed by the
/// module index `i + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomologySummary {
    pub from: String,
    pub to: String,
    #[serde(rename = "HM")]
    pub ranks: BTreeMap<usize, usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub representatives: Option<BTreeMap<usize, Vec<RenderedVector>>>,
}

impl HomologySummary {
    pub fn rank(&self, module_index: usize) -> usize {
        self.ranks.get(&module_index).copied().unwrap_or(0)
    }
}

/// Cycle (or cocycle) basis modulo boundaries in one chain dimension.
#[derive(Clone, Debug)]
pub struct DegreeHomology<F: Field> {
    pub dim: usize,
    pub rank: usize,
    /// Canonical representatives: reduced against the boundaries, in echelon form.
    pub representatives: Vec<SparseVec<F::Elem>>,
}

/// Chain dimensions whose homology the slice determines: all but the top one,
/// whose incoming boundary is not enumerated.
fn computable_dims(slice: &ChainComplexSlice) -> std::ops::Range<usize> {
    0..slice.max_dim()
}

fn quotient<F: Field>(
    field: &F,
    outgoing: &SparseMatrix<F::Elem>,
    incoming: &SparseMatrix<F::Elem>,
    dim: usize,
    representatives: bool,
) -> DegreeHomology<F> {
    let out_red = Reduction::new(field, outgoing, representatives);
    let in_red = Reduction::new(field, incoming, false);
    let rank = out_red.nullity() - in_red.rank();
    let representatives = if representatives {
        let residues: Vec<_> = out_red
            .kernel_basis()
            .iter()
            .map(|z| in_red.reduce(z))
            .collect();
        echelon_basis(field, outgoing.ncols(), &residues)
    } else {
        Vec::new()
    };
    DegreeHomology {
        dim,
        rank,
        representatives,
    }
}

/// `H_i` of the slice for every computable chain dimension `i` (`= HM_{i+1}`).
pub fn homology<F: Field>(
    field: &F,
    slice: &ChainComplexSlice,
    representatives: bool,
) -> Vec<DegreeHomology<F>> {
    computable_dims(slice)
        .map(|i| {
            let d_i = slice.boundary_matrix(i).over(field);
            let d_next = slice.boundary_matrix(i + 1).over(field);
            quotient(field, &d_i, &d_next, i, representatives)
        })
        .collect()
}

/// `H^i` of the dual complex with `δ^i = (∂_{i+1})^T`, and `δ^{-1} = 0`.
pub fn cohomology<F: Field>(
    field: &F,
    slice: &ChainComplexSlice,
    representatives: bool,
) -> Vec<DegreeHomology<F>> {
    computable_dims(slice)
        .map(|i| {
            let delta_i = slice.boundary_matrix(i + 1).over(field).transpose();
            let delta_prev = if i == 0 {
                SparseMatrix::zero(slice.basis(0).len(), 0)
            } else {
                slice.boundary_matrix(i).over(field).transpose()
            };
            quotient(field, &delta_i, &delta_prev, i, representatives)
        })
        .collect()
}

fn summarize<F: Field>(
    field: &F,
    x: &PrecubicalSet,
    slice: &ChainComplexSlice,
    groups: Vec<DegreeHomology<F>>,
    representatives: bool,
) -> HomologySummary {
    let ranks = groups.iter().map(|g| (g.dim + 1, g.rank)).collect();
    let representatives = representatives.then(|| {
        groups
            .iter()
            .map(|g| {
                let basis = slice.basis(g.dim);
                let rendered = g
                    .representatives
                    .iter()
                    .map(|v| {
                        v.iter()
                            .map(|(i, c)| (basis[*i].labels(x), field.render(c)))
                            .collect()
                    })
                    .collect();
                (g.dim + 1, rendered)
            })
            .collect()
    });
    HomologySummary {
        from: x.label(slice.from).to_string(),
        to: x.label(slice.to).to_string(),
        ranks,
        representatives,
    }
}

pub fn homology_ranks<F: Field>(
    field: &F,
    x: &PrecubicalSet,
    slice: &ChainComplexSlice,
    representatives: bool,
) -> HomologySummary {
    summarize(
        field,
        x,
        slice,
        homology(field, slice, representatives),
        representatives,
    )
}

pub fn cohomology_ranks<F: Field>(
    field: &F,
    x: &PrecubicalSet,
    slice: &ChainComplexSlice,
    representatives: bool,
) -> HomologySummary {
    summarize(
        field,
        x,
        slice,
        cohomology(field, slice, representatives),
        representatives,
    )
}

/// Partition of the dimension-0 chains of a slice into classes linked by
/// dimension-1 chains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathComponents {
    /// Component label of each dimension-0 basis chain, numbered by first occurrence.
    pub labels: Vec<usize>,
    pub count: usize,
}

impl PathComponents {
    pub fn members(&self, component: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == component)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Union-find over the dimension-0 chains; needs a slice with `max_dim ≥ 1`.
pub fn path_components(slice: &ChainComplexSlice) -> PathComponents {
    let n = slice.basis(0).len();
    let mut uf = UnionFind::<usize>::new(n);
    let d1 = slice.boundary_matrix(1);
    for col in d1.cols() {
        if let Some((first, _)) = col.first() {
            for (row, _) in &col[1..] {
                uf.union(*first, *row);
            }
        }
    }
    let mut numbering: BTreeMap<usize, usize> = BTreeMap::new();
    let labels: Vec<usize> = (0..n)
        .map(|i| {
            let root = uf.find(i);
            let next = numbering.len();
            *numbering.entry(root).or_insert(next)
        })
        .collect();
    PathComponents {
        labels,
        count: numbering.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::complex_slice;
    use crate::homalg::field::{PrimeField, Rationals};
    use crate::precubical::{build_grid, GridSpec};

    fn grid(extents: Vec<u32>, forbidden: Vec<Vec<u32>>) -> PrecubicalSet {
        build_grid(&GridSpec::new(extents, forbidden)).unwrap()
    }

    fn slice(x: &PrecubicalSet, a: &[u32], b: &[u32], max_dim: usize) -> ChainComplexSlice {
        let g = x.grid().unwrap();
        complex_slice(x, g.vertex_at(a).unwrap(), g.vertex_at(b).unwrap(), max_dim).unwrap()
    }

    fn four_obstacle_grid() -> PrecubicalSet {
        grid(
            vec![4, 4],
            vec![vec![0, 0], vec![1, 2], vec![2, 1], vec![3, 3]],
        )
    }

    #[test]
    fn squares() {
        let hollow = grid(vec![1, 1], vec![vec![0, 0]]);
        let s = slice(&hollow, &[0, 0], &[1, 1], 2);
        let h = homology_ranks(&Rationals, &hollow, &s, false);
        assert_eq!((h.rank(1), h.rank(2)), (2, 0));
        assert_eq!(cohomology_ranks(&Rationals, &hollow, &s, false).rank(1), 2);
        let filled = grid(vec![1, 1], vec![]);
        let s = slice(&filled, &[0, 0], &[1, 1], 2);
        let h = homology_ranks(&Rationals, &filled, &s, true);
        assert_eq!(h.rank(1), 1);
        assert_eq!(h.representatives.unwrap()[&1].len(), 1);
        assert_eq!(path_components(&s).count, 1);
    }

    #[test]
    fn four_obstacle_model_ranks() {
        let x = four_obstacle_grid();
        let s = slice(&x, &[0, 0], &[4, 4], 3);
        let h = homology_ranks(&Rationals, &x, &s, false);
        assert_eq!(h.ranks, BTreeMap::from([(1, 12), (2, 0), (3, 0)]));
        let c = cohomology_ranks(&Rationals, &x, &s, true);
        assert_eq!(c.ranks, h.ranks);
        assert_eq!(c.representatives.unwrap()[&1].len(), 12);
        let pc = path_components(&s);
        assert_eq!((pc.labels.len(), pc.count), (70, 12));
        let s = slice(&x, &[0, 0], &[3, 2], 2);
        assert_eq!(cohomology_ranks(&Rationals, &x, &s, false).rank(1), 4);
        assert_eq!(path_components(&s).count, 4);
        assert_eq!(s.basis(0).len(), 10);
        let s = slice(&x, &[3, 2], &[4, 4], 2);
        assert_eq!(cohomology_ranks(&Rationals, &x, &s, false).rank(1), 2);
    }

    #[test]
    fn full_grid_is_connected() {
        let x = grid(vec![4, 4], vec![]);
        let s = slice(&x, &[0, 0], &[4, 4], 2);
        assert_eq!(path_components(&s).count, 1);
        assert_eq!(
            homology_ranks(&Rationals, &x, &s, false).ranks,
            BTreeMap::from([(1, 1), (2, 0)])
        );
    }

    #[test]
    fn fields_agree_on_grids() {
        let x = grid(vec![3, 3, 2], vec![vec![1, 1, 0], vec![0, 2, 1]]);
        let s = slice(&x, &[0, 0, 0], &[3, 3, 2], 3);
        let q = homology_ranks(&Rationals, &x, &s, false).ranks;
        for p in [2, 3, 101] {
            let f = PrimeField::new(p).unwrap();
            assert_eq!(homology_ranks(&f, &x, &s, false).ranks, q);
            assert_eq!(cohomology_ranks(&f, &x, &s, false).ranks, q);
        }
    }

    #[test]
    fn hollow_cube_has_a_degree_two_class() {
        let x = grid(vec![2, 2, 2], vec![vec![1, 1, 1]]);
        let s = slice(&x, &[1, 1, 1], &[2, 2, 2], 3);
        let h = homology_ranks(&Rationals, &x, &s, false);
        assert_eq!(h.rank(1), 1);
        assert_eq!(h.rank(2), 1);
    }

    mod props {
        use proptest::prelude::*;

        use super::super::*;
        use crate::chains::ChainEnumerator;
        use crate::homalg::field::{PrimeField, Rationals};
        use crate::precubical::build_grid;
        use crate::precubical::testing::arb_grid;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn ranks_agree_over_rationals_and_a_prime(spec in arb_grid()) {
                let x = build_grid(&spec).unwrap();
                let chains = ChainEnumerator::new(&x);
                let p = PrimeField::new(101).unwrap();
                for (v, w) in x.reachable_pairs().iter() {
                    let s = chains.slice(v, w, 3).unwrap();
                    let q = homology_ranks(&Rationals, &x, &s, false);
                    prop_assert_eq!(&q, &homology_ranks(&p, &x, &s, false));
                    prop_assert_eq!(&q.ranks, &cohomology_ranks(&Rationals, &x, &s, false).ranks);
                    prop_assert_eq!(q.rank(1), path_components(&s).count);
                }
            }
        }
    }
}
