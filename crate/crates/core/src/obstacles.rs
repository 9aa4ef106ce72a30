//! Point obstacles with half-integer coordinates and the chain-of-obstacles
//! basis of trace space cohomology.
//!
//! Coordinates are stored doubled, so an obstacle at `(1/2, 5/2)` is `[1, 5]`.
//! Grid vertices `u` are compared through `2u`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::precubical::{GridSpec, JsonId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Obstacle {
    pub id: String,
    /// Twice the coordinates; always odd.
    pub doubled: Vec<u32>,
}

impl Obstacle {
    pub fn ambient_dim(&self) -> usize {
        self.doubled.len()
    }

    fn render_coords(&self) -> Vec<String> {
        self.doubled.iter().map(|c| format!("{c}/2")).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObstacleModel {
    extents: Vec<u32>,
    obstacles: Vec<Obstacle>,
    class_degree: usize,
}

/// A chain `u < O_{i_1} < ... < O_{i_k} < v`, obstacles by index in the model.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChainClass {
    pub u: Vec<u32>,
    pub v: Vec<u32>,
    pub chain: Vec<usize>,
}

impl ChainClass {
    pub fn size(&self) -> usize {
        self.chain.len()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ObstacleJson {
    pub id: JsonId,
    pub coords: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ObstacleModelJson {
    pub extents: Vec<u32>,
    pub obstacles: Vec<ObstacleJson>,
    pub class_degree: usize,
}

fn parse_half(s: &str) -> Result<u32> {
    let bad = || Error::Model(format!("{s:?} is not an odd multiple of 1/2"));
    let (num, den) = s.trim().split_once('/').ok_or_else(bad)?;
    if den.trim() != "2" {
        return Err(bad());
    }
    let num: u32 = num.trim().parse().map_err(|_| bad())?;
    if num.is_multiple_of(2) {
        return Err(bad());
    }
    Ok(num)
}

impl ObstacleModel {
    pub fn new(extents: Vec<u32>, obstacles: Vec<Obstacle>, class_degree: usize) -> Result<Self> {
        let n = extents.len();
        if class_degree > 1 {
            return Err(Error::Model(format!(
                "class degree {class_degree} is not 0 or 1"
            )));
        }
        for o in &obstacles {
            if o.ambient_dim() != n {
                return Err(Error::Model(format!(
                    "obstacle {} has {} coordinates, expected {n}",
                    o.id,
                    o.ambient_dim()
                )));
            }
            for (l, (&c, &k)) in o.doubled.iter().zip(&extents).enumerate() {
                if c % 2 == 0 || c >= 2 * k {
                    return Err(Error::Model(format!(
                        "obstacle {} coordinate {l} = {c}/2 is not a half-integer inside [0, {k}]",
                        o.id
                    )));
                }
            }
        }
        for (i, a) in obstacles.iter().enumerate() {
            for b in &obstacles[i + 1..] {
                if a.id == b.id {
                    return Err(Error::Model(format!("duplicate obstacle id {}", a.id)));
                }
                if let Some(l) = (0..n).find(|&l| a.doubled[l] == b.doubled[l]) {
                    return Err(Error::Model(format!(
                        "obstacles {} and {} share coordinate {l}",
                        a.id, b.id
                    )));
                }
            }
        }
        Ok(Self {
            extents,
            obstacles,
            class_degree,
        })
    }

    /// Obstacles at the centers of the forbidden top cells, with class degree
    /// `n - 2`; only `n ∈ {2, 3}` is supported.
    pub fn from_grid(spec: &GridSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.extents.len();
        if !(2..=3).contains(&n) {
            return Err(Error::Model(format!(
                "obstacle models need dimension 2 or 3, got {n}"
            )));
        }
        let obstacles = spec
            .forbidden
            .iter()
            .enumerate()
            .map(|(i, base)| Obstacle {
                id: format!("O{}", i + 1),
                doubled: base.iter().map(|b| 2 * b + 1).collect(),
            })
            .collect();
        Self::new(spec.extents.clone(), obstacles, n - 2)
    }

    pub fn from_json(json: &ObstacleModelJson) -> Result<Self> {
        let obstacles = json
            .obstacles
            .iter()
            .map(|o| {
                Ok(Obstacle {
                    id: o.id.to_string(),
                    doubled: o
                        .coords
                        .iter()
                        .map(|c| parse_half(c))
                        .collect::<Result<_>>()?,
                })
            })
            .collect::<Result<_>>()?;
        Self::new(json.extents.clone(), obstacles, json.class_degree)
    }

    pub fn to_json(&self) -> ObstacleModelJson {
        ObstacleModelJson {
            extents: self.extents.clone(),
            obstacles: self
                .obstacles
                .iter()
                .map(|o| ObstacleJson {
                    id: JsonId::Str(o.id.clone()),
                    coords: o.render_coords(),
                })
                .collect(),
            class_degree: self.class_degree,
        }
    }

    pub fn extents(&self) -> &[u32] {
        &self.extents
    }

    pub fn obstacles(&self) -> &[Obstacle] {
        &self.obstacles
    }

    pub fn class_degree(&self) -> usize {
        self.class_degree
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.obstacles.iter().position(|o| o.id == id)
    }

    /// `O_i < O_j` componentwise.
    pub fn less(&self, i: usize, j: usize) -> bool {
        let (a, b) = (&self.obstacles[i].doubled, &self.obstacles[j].doubled);
        a.iter().zip(b).all(|(x, y)| x < y)
    }

    /// `u < O_i < v` componentwise.
    pub fn inside(&self, i: usize, u: &[u32], v: &[u32]) -> bool {
        let o = &self.obstacles[i].doubled;
        o.iter()
            .zip(u)
            .zip(v)
            .all(|((&c, &a), &b)| 2 * a < c && c < 2 * b)
    }

    fn check_point(&self, p: &[u32]) -> Result<()> {
        if p.len() != self.extents.len() || p.iter().zip(&self.extents).any(|(a, k)| a > k) {
            return domain(format!(
                "{p:?} is not a point of the grid {:?}",
                self.extents
            ));
        }
        Ok(())
    }

    fn is_chain(&self, ids: &[usize]) -> bool {
        ids.windows(2).all(|w| self.less(w[0], w[1]))
    }

    /// Sorts a set of obstacles along the first coordinate, which is the chain
    /// order whenever the set is a chain.
    fn sorted(&self, mut ids: Vec<usize>) -> Vec<usize> {
        ids.sort_by_key(|&i| self.obstacles[i].doubled[0]);
        ids
    }

    /// All chains of obstacles strictly inside `(u, v)`, by size and then
    /// lexicographically. Empty when `u ≰ v`.
    pub fn enumerate_classes(&self, u: &[u32], v: &[u32]) -> Result<Vec<ChainClass>> {
        self.check_point(u)?;
        self.check_point(v)?;
        if u.iter().zip(v).any(|(a, b)| a > b) {
            return Ok(Vec::new());
        }
        let inner = self.sorted(
            (0..self.obstacles.len())
                .filter(|&i| self.inside(i, u, v))
                .collect(),
        );
        let mut chains: Vec<Vec<usize>> = vec![Vec::new()];
        // Extend each chain by a later element above its last one.
        let mut frontier = chains.clone();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for c in &frontier {
                for &i in &inner {
                    if c.last().is_none_or(|&last| self.less(last, i)) {
                        let mut d = c.clone();
                        d.push(i);
                        next.push(d);
                    }
                }
            }
            chains.extend(next.iter().cloned());
            frontier = next;
        }
        let mut out: Vec<ChainClass> = chains
            .into_iter()
            .map(|chain| ChainClass {
                u: u.to_vec(),
                v: v.to_vec(),
                chain,
            })
            .collect();
        out.sort_by(|a, b| (a.size(), &a.chain).cmp(&(b.size(), &b.chain)));
        Ok(out)
    }

    /// Index of the directed cohomology module holding a class: `s·d + 1`.
    pub fn hm_index(&self, c: &ChainClass) -> usize {
        c.size() * self.class_degree + 1
    }

    /// Number of classes per module index.
    pub fn betti_profile(&self, u: &[u32], v: &[u32]) -> Result<BTreeMap<usize, usize>> {
        let mut out = BTreeMap::new();
        for c in self.enumerate_classes(u, v)? {
            *out.entry(self.hm_index(&c)).or_insert(0) += 1;
        }
        Ok(out)
    }

    /// `a ⌣ b` as a signed class, `None` for zero.
    ///
    /// With class degree 0 this is the union when it is a chain (so `c ⌣ c = c`).
    /// With class degree 1 a shared obstacle also gives zero, and the sign
    /// counts the transpositions needed to sort `a` followed by `b`.
    pub fn cup(&self, a: &ChainClass, b: &ChainClass) -> Result<Option<(i64, ChainClass)>> {
        if (&a.u, &a.v) != (&b.u, &b.v) {
            return domain("cup product of classes on different intervals");
        }
        let concat: Vec<usize> = a.chain.iter().chain(&b.chain).copied().collect();
        let mut union: Vec<usize> = concat.clone();
        union.sort_unstable();
        union.dedup();
        if self.class_degree == 1 && union.len() < concat.len() {
            return Ok(None);
        }
        let union = self.sorted(union);
        if !self.is_chain(&union) {
            return Ok(None);
        }
        let sign = if self.class_degree == 1 {
            let pos: BTreeMap<usize, usize> =
                union.iter().enumerate().map(|(k, &i)| (i, k)).collect();
            let ranks: Vec<usize> = concat.iter().map(|i| pos[i]).collect();
            let inversions = (0..ranks.len())
                .flat_map(|i| (i + 1..ranks.len()).map(move |j| (i, j)))
                .filter(|&(i, j)| ranks[i] > ranks[j])
                .count();
            if inversions % 2 == 0 {
                1
            } else {
                -1
            }
        } else {
            1
        };
        Ok(Some((
            sign,
            ChainClass {
                u: a.u.clone(),
                v: a.v.clone(),
                chain: union,
            },
        )))
    }

    /// `a ↷ b`: concatenation of a chain on `(u, β)` with one on `(β, v)`.
    pub fn cap_chain(&self, a: &ChainClass, b: &ChainClass) -> Result<ChainClass> {
        if a.v != b.u {
            return domain("↷ needs the first interval to end where the second starts");
        }
        let chain: Vec<usize> = a.chain.iter().chain(&b.chain).copied().collect();
        debug_assert!(self.is_chain(&chain));
        Ok(ChainClass {
            u: a.u.clone(),
            v: b.v.clone(),
            chain,
        })
    }

    /// Every `a ↷ b` for `a` on `(u, β)` and `b` on `(β, v)`.
    pub fn cap_image(&self, u: &[u32], beta: &[u32], v: &[u32]) -> Result<BTreeSet<ChainClass>> {
        let left = self.enumerate_classes(u, beta)?;
        let right = self.enumerate_classes(beta, v)?;
        let mut out = BTreeSet::new();
        for a in &left {
            for b in &right {
                out.insert(self.cap_chain(a, b)?);
            }
        }
        Ok(out)
    }

    pub fn render(&self, c: &ChainClass) -> String {
        let mut parts = vec![format!("{:?}", c.u)];
        parts.extend(c.chain.iter().map(|&i| self.obstacles[i].id.clone()));
        parts.push(format!("{:?}", c.v));
        parts.join(" < ")
    }

    /// The chain labelling the path component of a lattice path in a planar
    /// model, given as its sequence of grid points from `u` to `v`.
    ///
    /// An obstacle inside `(u, v)` is passed above when the path crosses its
    /// column above it. The label keeps the obstacles passed above that have no
    /// incomparable obstacle, also passed above, further up and to the left.
    pub fn label_path(&self, points: &[Vec<u32>]) -> Result<ChainClass> {
        if self.extents.len() != 2 {
            return domain("path labels are only defined for planar models");
        }
        let (Some(u), Some(v)) = (points.first(), points.last()) else {
            return domain("empty path");
        };
        for w in points.windows(2) {
            let steps: u32 = w[0]
                .iter()
                .zip(&w[1])
                .map(|(a, b)| b.wrapping_sub(*a))
                .sum();
            if steps != 1 || w[0].iter().zip(&w[1]).any(|(a, b)| b < a) {
                return domain("path points must advance by unit steps");
            }
        }
        let above: Vec<usize> = (0..self.obstacles.len())
            .filter(|&i| self.inside(i, u, v))
            .filter(|&i| {
                let o = &self.obstacles[i].doubled;
                let column = (o[0] - 1) / 2;
                let step = points
                    .windows(2)
                    .find(|w| w[0][0] == column && w[1][0] == column + 1)
                    .expect("path crosses");
                2 * step[0][1] > o[1]
            })
            .collect();
        let chain = above
            .iter()
            .copied()
            .filter(|&i| {
                let o = &self.obstacles[i].doubled;
                !above.iter().any(|&j| {
                    let p = &self.obstacles[j].doubled;
                    p[0] < o[0] && p[1] > o[1]
                })
            })
            .collect();
        Ok(ChainClass {
            u: u.clone(),
            v: v.clone(),
            chain: self.sorted(chain),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_obstacle_grid() -> ObstacleModel {
        ObstacleModel::from_grid(&GridSpec::new(
            vec![4, 4],
            [vec![0, 0], vec![1, 2], vec![2, 1], vec![3, 3]],
        ))
        .unwrap()
    }

    fn paper_3d() -> ObstacleModel {
        ObstacleModel::from_grid(&GridSpec::new(
            vec![4, 4, 4],
            [vec![0, 0, 0], vec![1, 2, 1], vec![2, 1, 2], vec![3, 3, 3]],
        ))
        .unwrap()
    }

    fn names(m: &ObstacleModel, c: &ChainClass) -> Vec<String> {
        c.chain
            .iter()
            .map(|&i| m.obstacles()[i].id.clone())
            .collect()
    }

    #[test]
    fn planar_counts() {
        let m = four_obstacle_grid();
        assert_eq!(m.enumerate_classes(&[0, 0], &[4, 4]).unwrap().len(), 12);
        let small = m.enumerate_classes(&[0, 0], &[3, 2]).unwrap();
        let got: Vec<Vec<String>> = small.iter().map(|c| names(&m, c)).collect();
        assert_eq!(
            got,
            vec![
                vec![],
                vec!["O1".to_string()],
                vec!["O3".to_string()],
                vec!["O1".into(), "O3".into()]
            ]
        );
        assert!(m.enumerate_classes(&[3, 2], &[0, 0]).unwrap().is_empty());
        assert!(m.enumerate_classes(&[0, 0], &[5, 5]).is_err());
    }

    #[test]
    fn order_and_ids() {
        let m = four_obstacle_grid();
        assert!(m.less(0, 1) && m.less(0, 2) && m.less(1, 3) && m.less(2, 3));
        assert!(!m.less(1, 2) && !m.less(2, 1));
        assert_eq!(m.index_of("O4"), Some(3));
    }

    #[test]
    fn planar_cup_is_idempotent() {
        let m = four_obstacle_grid();
        let classes = m.enumerate_classes(&[0, 0], &[4, 4]).unwrap();
        for c in &classes {
            assert_eq!(m.cup(c, c).unwrap(), Some((1, c.clone())));
        }
        let o2 = classes.iter().find(|c| names(&m, c) == ["O2"]).unwrap();
        let o3 = classes.iter().find(|c| names(&m, c) == ["O3"]).unwrap();
        assert_eq!(m.cup(o2, o3).unwrap(), None);
    }

    #[test]
    fn spatial_profiles() {
        let m = paper_3d();
        let profile = |u: &[u32], v: &[u32]| {
            m.betti_profile(u, v)
                .unwrap()
                .into_values()
                .collect::<Vec<_>>()
        };
        assert_eq!(profile(&[0, 0, 0], &[4, 4, 4]), vec![1, 4, 5, 2]);
        assert_eq!(profile(&[0, 0, 0], &[2, 3, 2]), vec![1, 2, 1]);
        assert_eq!(profile(&[2, 3, 2], &[4, 4, 4]), vec![1, 1]);
        assert_eq!(profile(&[1, 1, 1], &[3, 3, 3]), vec![1, 2]);
    }

    #[test]
    fn spatial_cup_signs() {
        let m = paper_3d();
        let classes = m.enumerate_classes(&[0, 0, 0], &[4, 4, 4]).unwrap();
        let single = |name: &str| {
            classes
                .iter()
                .find(|c| names(&m, c) == [name])
                .unwrap()
                .clone()
        };
        let (c1, c2, c3, c4) = (single("O1"), single("O2"), single("O3"), single("O4"));
        assert_eq!(m.cup(&c2, &c3).unwrap(), None);
        assert_eq!(m.cup(&c1, &c1).unwrap(), None);
        let (s, c13) = m.cup(&c1, &c3).unwrap().unwrap();
        assert_eq!(s, 1);
        let (s, c134) = m.cup(&c13, &c4).unwrap().unwrap();
        assert_eq!(
            (s, names(&m, &c134)),
            (1, vec!["O1".into(), "O3".into(), "O4".into()])
        );
        let (s, _) = m.cup(&c3, &c1).unwrap().unwrap();
        assert_eq!(s, -1);
        let other = ChainClass {
            u: vec![0, 0, 0],
            v: vec![2, 2, 2],
            chain: vec![],
        };
        assert!(m.cup(&c1, &other).is_err());
    }

    #[test]
    fn cap_concatenates() {
        let m = four_obstacle_grid();
        let left = m.enumerate_classes(&[0, 0], &[3, 2]).unwrap();
        let right = m.enumerate_classes(&[3, 2], &[4, 4]).unwrap();
        let c = m.cap_chain(&left[3], &right[1]).unwrap();
        assert_eq!(names(&m, &c), vec!["O1", "O3", "O4"]);
        let image = m.cap_image(&[0, 0], &[3, 2], &[4, 4]).unwrap();
        assert_eq!(image.len(), 8);
        assert!(image.iter().all(|c| !c.chain.contains(&1)));
        assert!(m.cap_chain(&right[0], &left[0]).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let m = paper_3d();
        let text = serde_json::to_string(&m.to_json()).unwrap();
        assert!(text.contains("\"3/2\""));
        let back = ObstacleModel::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, m);
        let bad = ObstacleModelJson {
            extents: vec![2, 2],
            obstacles: vec![ObstacleJson {
                id: JsonId::Num(1),
                coords: vec!["1".into(), "1/2".into()],
            }],
            class_degree: 0,
        };
        assert!(ObstacleModel::from_json(&bad).is_err());
    }

    #[test]
    fn shared_coordinates_are_rejected() {
        let spec = GridSpec::new(vec![3, 3], [vec![0, 0], vec![0, 2]]);
        assert!(matches!(
            ObstacleModel::from_grid(&spec),
            Err(Error::Model(_))
        ));
    }

    #[test]
    fn labels_of_staircase_paths() {
        let m = four_obstacle_grid();
        let path = |moves: &str| {
            let mut p = vec![vec![0u32, 0]];
            for ch in moves.chars() {
                let mut q = p.last().unwrap().clone();
                q[if ch == 'x' { 0 } else { 1 }] += 1;
                p.push(q);
            }
            p
        };
        // Along the bottom then up the right side: below every obstacle.
        assert!(m.label_path(&path("xxxxyyyy")).unwrap().chain.is_empty());
        // Up the left side then across the top: above every obstacle.
        let top = m.label_path(&path("yyyyxxxx")).unwrap();
        assert_eq!(names(&m, &top), vec!["O1", "O2", "O4"]);
    }
}
