//! Finite precubical sets: cells graded by dimension, face maps, properness,
//! the non-looping length covering, grid models and reachability.
//!
//! Every cell gets a [`CubeId`], an index into one flat table. Cells are added
//! faces-first, so a face always has a smaller id than the cube it bounds. Face
//! directions are 0-based: a cube of dimension `n` has faces `d^ε_i` for
//! `i in 0..n` and `ε` in [`Side`].

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CubeId(pub u32);

impl CubeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for CubeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// The `ε` of a face map: `Lower` is `d^0`, `Upper` is `d^1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Lower,
    Upper,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Lower, Side::Upper];

    fn slot(self) -> usize {
        match self {
            Side::Lower => 0,
            Side::Upper => 1,
        }
    }

    pub fn as_int(self) -> i64 {
        self.slot() as i64
    }
}

/// A cell together with its dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cube {
    pub id: CubeId,
    pub dim: usize,
}

#[derive(Clone, Debug)]
struct Cell {
    dim: usize,
    /// `faces[i] = [d^0_i, d^1_i]`.
    faces: Vec<[CubeId; 2]>,
    label: String,
    corners: (CubeId, CubeId),
}

/// Coordinates of a grid cell: its lowest corner and the axes it spans.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridCell {
    pub base: Vec<u32>,
    pub axes: Vec<usize>,
}

/// Extra bookkeeping carried by complexes built from a [`GridSpec`].
#[derive(Clone, Debug)]
pub struct GridEmbedding {
    pub spec: GridSpec,
    cells: Vec<GridCell>,
    vertices: HashMap<Vec<u32>, CubeId>,
}

impl GridEmbedding {
    pub fn cell(&self, id: CubeId) -> &GridCell {
        &self.cells[id.index()]
    }

    pub fn vertex_at(&self, coords: &[u32]) -> Option<CubeId> {
        self.vertices.get(coords).copied()
    }

    pub fn coords(&self, vertex: CubeId) -> &[u32] {
        &self.cells[vertex.index()].base
    }
}

#[derive(Clone, Debug)]
pub struct PrecubicalSet {
    cells: Vec<Cell>,
    by_dim: Vec<Vec<CubeId>>,
    labels: HashMap<String, CubeId>,
    /// Cubes of positive dimension keyed by their start vertex.
    outgoing: Vec<Vec<CubeId>>,
    grid: Option<GridEmbedding>,
}

/// Incremental construction of a [`PrecubicalSet`]; faces must be added before
/// the cubes that use them.
#[derive(Default)]
pub struct PrecubicalSetBuilder {
    cells: Vec<Cell>,
    labels: HashMap<String, CubeId>,
}

impl PrecubicalSetBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, label: impl Into<String>) -> Result<CubeId> {
        self.add_cube(label, Vec::new())
    }

    /// Adds a cube of dimension `faces.len()`; `faces[i]` is `[d^0_i, d^1_i]`.
    pub fn add_cube(
        &mut self,
        label: impl Into<String>,
        faces: Vec<[CubeId; 2]>,
    ) -> Result<CubeId> {
        let label = label.into();
        if self.labels.contains_key(&label) {
            return Err(Error::Model(format!("duplicate cell id {label:?}")));
        }
        let dim = faces.len();
        for face in faces.iter().flatten() {
            let Some(cell) = self.cells.get(face.index()) else {
                return Err(Error::Model(format!(
                    "cell {label:?} references unknown face {face}"
                )));
            };
            if cell.dim + 1 != dim {
                return Err(Error::Model(format!(
                    "cell {label:?} of dimension {dim} has face {:?} of dimension {}",
                    cell.label, cell.dim
                )));
            }
        }
        let id = CubeId(self.cells.len() as u32);
        let corners = if dim == 0 {
            (id, id)
        } else {
            let lower = self.cells[faces[dim - 1][0].index()].corners.0;
            let upper = self.cells[faces[dim - 1][1].index()].corners.1;
            (lower, upper)
        };
        self.labels.insert(label.clone(), id);
        self.cells.push(Cell {
            dim,
            faces,
            label,
            corners,
        });
        Ok(id)
    }

    pub fn build(self) -> PrecubicalSet {
        let top = self.cells.iter().map(|c| c.dim).max().unwrap_or(0);
        let mut by_dim = vec![Vec::new(); if self.cells.is_empty() { 0 } else { top + 1 }];
        let mut outgoing = vec![Vec::new(); self.cells.len()];
        for (i, cell) in self.cells.iter().enumerate() {
            let id = CubeId(i as u32);
            by_dim[cell.dim].push(id);
            if cell.dim > 0 {
                outgoing[cell.corners.0.index()].push(id);
            }
        }
        PrecubicalSet {
            cells: self.cells,
            by_dim,
            labels: self.labels,
            outgoing,
            grid: None,
        }
    }
}

/// A precubical identity `d^ε_i d^δ_j = d^δ_{j-1} d^ε_i` (`i < j`) that fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityViolation {
    pub cube: CubeId,
    pub i: usize,
    pub j: usize,
    pub eps: Side,
    pub delta: Side,
}

impl PrecubicalSet {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Largest cell dimension (0 for an empty set).
    pub fn top_dim(&self) -> usize {
        self.by_dim.len().saturating_sub(1)
    }

    pub fn cells_of_dim(&self, dim: usize) -> &[CubeId] {
        self.by_dim.get(dim).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn vertices(&self) -> &[CubeId] {
        self.cells_of_dim(0)
    }

    pub fn cube(&self, id: CubeId) -> Cube {
        Cube {
            id,
            dim: self.cells[id.index()].dim,
        }
    }

    pub fn dim(&self, id: CubeId) -> usize {
        self.cells[id.index()].dim
    }

    pub fn label(&self, id: CubeId) -> &str {
        &self.cells[id.index()].label
    }

    pub fn by_label(&self, label: &str) -> Option<CubeId> {
        self.labels.get(label).copied()
    }

    pub fn grid(&self) -> Option<&GridEmbedding> {
        self.grid.as_ref()
    }

    /// Cubes of positive dimension whose start vertex is `v`, in id order.
    pub fn outgoing(&self, v: CubeId) -> &[CubeId] {
        &self.outgoing[v.index()]
    }

    /// Number of cells per dimension.
    pub fn cell_counts(&self) -> Vec<usize> {
        self.by_dim.iter().map(Vec::len).collect()
    }

    /// `d^ε_i(c)`.
    pub fn face(&self, c: CubeId, eps: Side, i: usize) -> Result<CubeId> {
        let cell = &self.cells[c.index()];
        if cell.dim == 0 {
            return domain(format!("vertex {} has no faces", cell.label));
        }
        match cell.faces.get(i) {
            Some(pair) => Ok(pair[eps.slot()]),
            None => domain(format!(
                "direction {i} out of range for {}-cube {}",
                cell.dim, cell.label
            )),
        }
    }

    /// `d^ε_I(c)`: single faces applied in strictly decreasing direction order.
    pub fn iterated_face(&self, c: CubeId, eps: Side, dirs: &[usize]) -> Result<CubeId> {
        let dim = self.dim(c);
        let mut sorted = dirs.to_vec();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        sorted.dedup();
        if sorted.len() != dirs.len() {
            return domain(format!("repeated direction in {dirs:?}"));
        }
        if let Some(&bad) = sorted.first().filter(|&&d| d >= dim) {
            return domain(format!("direction {bad} out of range for a {dim}-cube"));
        }
        let mut cur = c;
        for d in sorted {
            cur = self.cells[cur.index()].faces[d][eps.slot()];
        }
        Ok(cur)
    }

    /// `(d^0(c), d^1(c))`; `(c, c)` for a vertex.
    pub fn corners(&self, c: CubeId) -> (CubeId, CubeId) {
        self.cells[c.index()].corners
    }

    pub fn is_proper(&self) -> bool {
        self.properness_violation().is_none()
    }

    /// Two distinct cubes with the same corner set, if any.
    pub fn properness_violation(&self) -> Option<(CubeId, CubeId)> {
        let mut seen: HashMap<(CubeId, CubeId), CubeId> = HashMap::new();
        for (i, cell) in self.cells.iter().enumerate() {
            let (a, b) = cell.corners;
            let key = if a <= b { (a, b) } else { (b, a) };
            if let Some(&other) = seen.get(&key) {
                return Some((other, CubeId(i as u32)));
            }
            seen.insert(key, CubeId(i as u32));
        }
        None
    }

    /// First failure of the precubical identity, if any.
    pub fn identity_violation(&self) -> Option<IdentityViolation> {
        for (idx, cell) in self.cells.iter().enumerate() {
            for j in 1..cell.dim {
                for i in 0..j {
                    for eps in Side::BOTH {
                        for delta in Side::BOTH {
                            let lhs = self.cells[cell.faces[j][delta.slot()].index()].faces[i]
                                [eps.slot()];
                            let rhs = self.cells[cell.faces[i][eps.slot()].index()].faces[j - 1]
                                [delta.slot()];
                            if lhs != rhs {
                                return Some(IdentityViolation {
                                    cube: CubeId(idx as u32),
                                    i,
                                    j,
                                    eps,
                                    delta,
                                });
                            }
                        }
                    }
                }
            }
        }
        None
    }

    /// Transitive-reflexive closure of the edge relation of the underlying quiver.
    pub fn reachable_pairs(&self) -> ReachablePairs {
        let verts = self.vertices().to_vec();
        let mut pos = vec![usize::MAX; self.cells.len()];
        for (i, v) in verts.iter().enumerate() {
            pos[v.index()] = i;
        }
        let n = verts.len();
        let words = n.div_ceil(64).max(1);
        let mut bits = vec![vec![0u64; words]; n];
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &e in self.cells_of_dim(1) {
            let (a, b) = self.corners(e);
            succ[pos[a.index()]].push(pos[b.index()]);
        }
        for (s, row) in bits.iter_mut().enumerate() {
            let mut queue = VecDeque::from([s]);
            row[s / 64] |= 1 << (s % 64);
            while let Some(x) = queue.pop_front() {
                for &y in &succ[x] {
                    if row[y / 64] & (1 << (y % 64)) == 0 {
                        row[y / 64] |= 1 << (y % 64);
                        queue.push_back(y);
                    }
                }
            }
        }
        ReachablePairs {
            vertices: verts,
            pos,
            bits,
        }
    }

    /// The non-looping length covering restricted to levels `lo..=hi`: cells
    /// `(c, k)` with `d^ε_i(c, k) = (d^ε_i(c), k + ε)`. Cells with a face
    /// outside the window are dropped.
    pub fn length_covering(&self, lo: i64, hi: i64) -> Result<LengthCovering> {
        if lo > hi {
            return domain(format!("empty level window [{lo}, {hi}]"));
        }
        let mut builder = PrecubicalSetBuilder::new();
        let mut index: HashMap<(CubeId, i64), CubeId> = HashMap::new();
        let mut origin = Vec::new();
        for dim in 0..self.by_dim.len() {
            for &c in &self.by_dim[dim] {
                'level: for k in lo..=hi {
                    let mut faces = Vec::with_capacity(dim);
                    for pair in &self.cells[c.index()].faces {
                        let Some(&f0) = index.get(&(pair[0], k)) else {
                            continue 'level;
                        };
                        let Some(&f1) = index.get(&(pair[1], k + 1)) else {
                            continue 'level;
                        };
                        faces.push([f0, f1]);
                    }
                    let id = builder.add_cube(format!("{}@{k}", self.label(c)), faces)?;
                    index.insert((c, k), id);
                    origin.push((c, k));
                }
            }
        }
        Ok(LengthCovering {
            set: builder.build(),
            origin,
        })
    }

    /// Exports the complex in the JSON model format.
    pub fn to_json(&self) -> ComplexJson {
        let cells = self
            .by_dim
            .iter()
            .map(|ids| {
                ids.iter()
                    .map(|&c| JsonId::Str(self.label(c).to_string()))
                    .collect()
            })
            .collect();
        let mut faces = BTreeMap::new();
        for cell in self.cells.iter().filter(|c| c.dim > 0) {
            let d0 = cell
                .faces
                .iter()
                .map(|p| JsonId::Str(self.label(p[0]).to_string()))
                .collect();
            let d1 = cell
                .faces
                .iter()
                .map(|p| JsonId::Str(self.label(p[1]).to_string()))
                .collect();
            faces.insert(cell.label.clone(), FaceJson { d0, d1 });
        }
        ComplexJson {
            dims: self.top_dim(),
            cells,
            faces,
        }
    }

    /// Loads a complex from the JSON model format.
    pub fn from_json(json: &ComplexJson) -> Result<Self> {
        if json.cells.len() != json.dims + 1 {
            return Err(Error::Model(format!(
                "\"dims\" is {} but {} cell lists are given",
                json.dims,
                json.cells.len()
            )));
        }
        let mut builder = PrecubicalSetBuilder::new();
        for (dim, ids) in json.cells.iter().enumerate() {
            for id in ids {
                let label = id.to_string();
                if dim == 0 {
                    builder.add_vertex(label)?;
                    continue;
                }
                let Some(entry) = json.faces.get(&label) else {
                    return Err(Error::Model(format!(
                        "no faces given for {dim}-cell {label:?}"
                    )));
                };
                if entry.d0.len() != dim || entry.d1.len() != dim {
                    return Err(Error::Model(format!(
                        "{dim}-cell {label:?} needs {dim} faces per side"
                    )));
                }
                let mut faces = Vec::with_capacity(dim);
                for (a, b) in entry.d0.iter().zip(&entry.d1) {
                    let lookup = |x: &JsonId| {
                        builder.labels.get(&x.to_string()).copied().ok_or_else(|| {
                            Error::Model(format!(
                                "{dim}-cell {label:?} references unknown cell {:?}",
                                x.to_string()
                            ))
                        })
                    };
                    faces.push([lookup(a)?, lookup(b)?]);
                }
                builder.add_cube(label, faces)?;
            }
        }
        Ok(builder.build())
    }
}

/// Identifier in the JSON model format: integers and strings are both accepted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JsonId {
    Num(u64),
    Str(String),
}

impl fmt::Display for JsonId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JsonId::Num(n) => write!(f, "{n}"),
            JsonId::Str(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceJson {
    pub d0: Vec<JsonId>,
    pub d1: Vec<JsonId>,
}

/// `{"dims": N, "cells": [[ids per dim]], "faces": {id: {"d0": [...], "d1": [...]}}}`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub dims: usize,
    pub cells: Vec<Vec<JsonId>>,
    #[serde(default)]
    pub faces: BTreeMap<String, FaceJson>,
}

/// Window of the length covering with the `(c, k)` origin of every cell.
#[derive(Clone, Debug)]
pub struct LengthCovering {
    pub set: PrecubicalSet,
    pub origin: Vec<(CubeId, i64)>,
}

/// Pairs `(v, w)` of vertices such that a directed edge path runs from `v` to `w`.
#[derive(Clone, Debug)]
pub struct ReachablePairs {
    vertices: Vec<CubeId>,
    pos: Vec<usize>,
    bits: Vec<Vec<u64>>,
}

impl ReachablePairs {
    pub fn contains(&self, v: CubeId, w: CubeId) -> bool {
        let (Some(&a), Some(&b)) = (self.pos.get(v.index()), self.pos.get(w.index())) else {
            return false;
        };
        if a == usize::MAX || b == usize::MAX {
            return false;
        }
        self.bits[a][b / 64] & (1 << (b % 64)) != 0
    }

    /// All pairs in vertex order.
    pub fn iter(&self) -> impl Iterator<Item = (CubeId, CubeId)> + '_ {
        self.vertices.iter().enumerate().flat_map(move |(a, &v)| {
            self.vertices
                .iter()
                .enumerate()
                .filter(move |&(b, _)| self.bits[a][b / 64] & (1 << (b % 64)) != 0)
                .map(move |(_, &w)| (v, w))
        })
    }

    pub fn len(&self) -> usize {
        self.bits
            .iter()
            .flatten()
            .map(|w| w.count_ones() as usize)
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A full grid `∏ [0, k_l]` with some top-dimensional cells removed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub extents: Vec<u32>,
    #[serde(default)]
    pub forbidden: BTreeSet<Vec<u32>>,
}

impl GridSpec {
    pub fn new(extents: Vec<u32>, forbidden: impl IntoIterator<Item = Vec<u32>>) -> Self {
        Self {
            extents,
            forbidden: forbidden.into_iter().collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(pos) = self.extents.iter().position(|&k| k == 0) {
            return Err(Error::Model(format!("extent {pos} is zero")));
        }
        for cell in &self.forbidden {
            let in_range = cell.len() == self.extents.len()
                && cell.iter().zip(&self.extents).all(|(&c, &k)| c < k);
            if !in_range {
                return Err(Error::Model(format!(
                    "forbidden cell {cell:?} lies outside extents {:?}",
                    self.extents
                )));
            }
        }
        Ok(())
    }
}

fn grid_label(cell: &GridCell) -> String {
    let coords: Vec<String> = cell.base.iter().map(u32::to_string).collect();
    if cell.axes.is_empty() {
        format!("({})", coords.join(","))
    } else {
        let axes: Vec<String> = cell.axes.iter().map(usize::to_string).collect();
        format!("({})+[{}]", coords.join(","), axes.join(","))
    }
}

/// Builds the grid complex: every axis-aligned unit cube of `∏ [0, k_l]` except
/// the forbidden top cells, whose faces are kept. Within a dimension, cubes are
/// ordered by base corner and then by axis set.
pub fn build_grid(spec: &GridSpec) -> Result<PrecubicalSet> {
    spec.validate()?;
    let n = spec.extents.len();
    let mut builder = PrecubicalSetBuilder::new();
    let mut index: HashMap<GridCell, CubeId> = HashMap::new();
    let mut cells = Vec::new();
    let mut vertices = HashMap::new();
    for m in 0..=n {
        let mut layer: Vec<GridCell> = Vec::new();
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != m {
                continue;
            }
            let axes: Vec<usize> = (0..n).filter(|a| mask & (1 << a) != 0).collect();
            let limits: Vec<u32> = (0..n)
                .map(|a| {
                    if mask & (1 << a) != 0 {
                        spec.extents[a] - 1
                    } else {
                        spec.extents[a]
                    }
                })
                .collect();
            for base in lattice_points(&limits) {
                if m == n && spec.forbidden.contains(&base) {
                    continue;
                }
                layer.push(GridCell {
                    base,
                    axes: axes.clone(),
                });
            }
        }
        layer.sort();
        for cell in layer {
            let mut faces = Vec::with_capacity(m);
            for (i, &axis) in cell.axes.iter().enumerate() {
                let mut axes = cell.axes.clone();
                axes.remove(i);
                let lower = GridCell {
                    base: cell.base.clone(),
                    axes: axes.clone(),
                };
                let mut upper_base = cell.base.clone();
                upper_base[axis] += 1;
                let upper = GridCell {
                    base: upper_base,
                    axes,
                };
                faces.push([index[&lower], index[&upper]]);
            }
            let id = builder.add_cube(grid_label(&cell), faces)?;
            if m == 0 {
                vertices.insert(cell.base.clone(), id);
            }
            index.insert(cell.clone(), id);
            cells.push(cell);
        }
    }
    let mut set = builder.build();
    debug_assert!(set.identity_violation().is_none());
    set.grid = Some(GridEmbedding {
        spec: spec.clone(),
        cells,
        vertices,
    });
    Ok(set)
}

/// All integer points of `∏ [0, limit_l]` in lexicographic order.
pub(crate) fn lattice_points(limits: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::with_capacity(limits.len())];
    for &lim in limits {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..=lim).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}
