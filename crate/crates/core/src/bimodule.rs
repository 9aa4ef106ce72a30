//! Path algebra actions, products of classes, and the coboundary operator.
//!
//! [`Engine`] ties a complex to a coefficient field and caches chain complex
//! slices. Classes are stored through canonical representatives (reduced
//! modulo boundaries or coboundaries), so two classes are equal iff their
//! representatives are.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use serde_json::{json, Value};

use crate::chains::{boundary, ChainComplexSlice, ChainEnumerator, CubeChain, FormalChain};
use crate::error::{Error, Result};
use crate::homalg::field::Field;
use crate::homalg::matrix::{axpy, echelon_basis, Reduction, SparseMatrix, SparseVec};
use crate::homalg::{cohomology, homology};
use crate::precubical::{CubeId, PrecubicalSet};

fn add_into<F: Field>(
    field: &F,
    map: &mut BTreeMap<CubeChain, F::Elem>,
    key: CubeChain,
    value: F::Elem,
) {
    if field.is_zero(&value) {
        return;
    }
    match map.get_mut(&key) {
        Some(v) => {
            *v = field.add(v, &value);
            if field.is_zero(v) {
                map.remove(&key);
            }
        }
        None => {
            map.insert(key, value);
        }
    }
}

/// Field combination of directed paths (dimension-0 chains) with any endpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct PathAlgebraElement<E> {
    terms: BTreeMap<CubeChain, E>,
}

impl<E: Clone> PathAlgebraElement<E> {
    pub fn zero() -> Self {
        Self {
            terms: BTreeMap::new(),
        }
    }

    /// The idempotent `()_{v,v}`.
    pub fn unit<F: Field<Elem = E>>(field: &F, v: CubeId) -> Self {
        Self {
            terms: BTreeMap::from([(CubeChain::empty(v), field.one())]),
        }
    }

    pub fn path<F: Field<Elem = E>>(field: &F, p: CubeChain) -> Result<Self> {
        Self::from_terms(field, [(p, field.one())])
    }

    pub fn from_terms<F: Field<Elem = E>>(
        field: &F,
        terms: impl IntoIterator<Item = (CubeChain, E)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (p, c) in terms {
            if p.dim() != 0 {
                return Err(Error::Operand(format!(
                    "a path algebra term has dimension {}",
                    p.dim()
                )));
            }
            add_into(field, &mut map, p, c);
        }
        Ok(Self { terms: map })
    }

    pub fn terms(&self) -> &BTreeMap<CubeChain, E> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(start, end)` shared by all terms, if any.
    pub fn endpoints(&self) -> Option<(CubeId, CubeId)> {
        let mut it = self.terms.keys().map(|p| (p.start(), p.end()));
        let first = it.next()?;
        it.all(|e| e == first).then_some(first)
    }

    /// `self × other`: concatenation, zero on mismatched ends.
    pub fn mul<F: Field<Elem = E>>(&self, field: &F, other: &Self) -> Self {
        let mut map = BTreeMap::new();
        for (p, a) in &self.terms {
            for (q, b) in &other.terms {
                if let Some(pq) = p.concat(q) {
                    add_into(field, &mut map, pq, field.mul(a, b));
                }
            }
        }
        Self { terms: map }
    }

    /// `self ×* other = other × self`.
    pub fn mul_op<F: Field<Elem = E>>(&self, field: &F, other: &Self) -> Self {
        other.mul(field, self)
    }

    pub fn add<F: Field<Elem = E>>(&self, field: &F, other: &Self) -> Self {
        let mut map = self.terms.clone();
        for (p, b) in &other.terms {
            add_into(field, &mut map, p.clone(), b.clone());
        }
        Self { terms: map }
    }
}

/// Linear functional on the chains of one dimension between fixed endpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct Cochain<E> {
    pub from: CubeId,
    pub to: CubeId,
    pub dim: usize,
    values: BTreeMap<CubeChain, E>,
}

impl<E: Clone> Cochain<E> {
    pub fn zero(from: CubeId, to: CubeId, dim: usize) -> Self {
        Self {
            from,
            to,
            dim,
            values: BTreeMap::new(),
        }
    }

    pub fn from_values<F: Field<Elem = E>>(
        field: &F,
        from: CubeId,
        to: CubeId,
        dim: usize,
        values: impl IntoIterator<Item = (CubeChain, E)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (c, v) in values {
            if c.start() != from || c.end() != to || c.dim() != dim {
                return Err(Error::Operand(format!(
                    "cochain value on a dimension {} chain outside its endpoints or dimension {dim}",
                    c.dim()
                )));
            }
            add_into(field, &mut map, c, v);
        }
        Ok(Self {
            from,
            to,
            dim,
            values: map,
        })
    }

    pub fn values(&self) -> &BTreeMap<CubeChain, E> {
        &self.values
    }

    pub fn value<F: Field<Elem = E>>(&self, field: &F, c: &CubeChain) -> E {
        self.values.get(c).cloned().unwrap_or_else(|| field.zero())
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// `⟨f, c⟩`.
    pub fn eval<F: Field<Elem = E>>(&self, field: &F, c: &FormalChain<E>) -> E {
        c.terms().iter().fold(field.zero(), |acc, (chain, coeff)| {
            field.add(&acc, &field.mul(coeff, &self.value(field, chain)))
        })
    }

    pub fn add<F: Field<Elem = E>>(&self, field: &F, other: &Self) -> Result<Self> {
        if (self.from, self.to, self.dim) != (other.from, other.to, other.dim) {
            return Err(Error::Operand(
                "cochains live on different slices".to_string(),
            ));
        }
        let mut map = self.values.clone();
        for (c, v) in &other.values {
            add_into(field, &mut map, c.clone(), v.clone());
        }
        Ok(Self {
            values: map,
            ..self.clone()
        })
    }
}

/// `∂` extended linearly to a formal chain.
pub fn boundary_of<F: Field>(
    field: &F,
    x: &PrecubicalSet,
    c: &FormalChain<F::Elem>,
) -> FormalChain<F::Elem> {
    let mut map = BTreeMap::new();
    for (chain, coeff) in c.terms() {
        for (face, k) in boundary(x, chain).terms() {
            add_into(
                field,
                &mut map,
                face.clone(),
                field.mul(coeff, &field.from_i64(*k)),
            );
        }
    }
    FormalChain::from_terms(c.from, c.to, c.dim.saturating_sub(1), map)
        .expect("faces keep endpoints")
}

/// `c ⊗ d`: concatenation, zero when `c` does not end where `d` starts.
pub fn tensor<F: Field>(
    field: &F,
    c: &FormalChain<F::Elem>,
    d: &FormalChain<F::Elem>,
) -> FormalChain<F::Elem> {
    let mut map = BTreeMap::new();
    if c.to == d.from {
        for (a, x) in c.terms() {
            for (b, y) in d.terms() {
                add_into(
                    field,
                    &mut map,
                    a.concat(b).expect("matching ends"),
                    field.mul(x, y),
                );
            }
        }
    }
    FormalChain::from_terms(c.from, d.to, c.dim + d.dim, map)
        .expect("concatenations keep endpoints")
}

/// Sign of the second term in `∂(c⊗d) = ∂c⊗d ± c⊗∂d`: `(-1)^{dim c}`.
pub fn leibniz_sign(dim_c: usize) -> i64 {
    if dim_c.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

fn negate<F: Field>(field: &F, c: &FormalChain<F::Elem>) -> FormalChain<F::Elem> {
    let terms = c
        .terms()
        .iter()
        .map(|(k, v)| (k.clone(), field.neg(v)))
        .collect();
    FormalChain::from_terms(c.from, c.to, c.dim, terms).expect("same keys")
}

fn sum<F: Field>(
    field: &F,
    a: &FormalChain<F::Elem>,
    b: &FormalChain<F::Elem>,
) -> FormalChain<F::Elem> {
    let mut map = a.terms().clone();
    for (k, v) in b.terms() {
        add_into(field, &mut map, k.clone(), v.clone());
    }
    let dim = if a.is_zero() { b.dim } else { a.dim };
    FormalChain::from_terms(a.from, a.to, dim, map).expect("same slice")
}

/// `∂(c⊗d) - ∂c⊗d - (-1)^{dim c} c⊗∂d`; zero when the product rule holds.
pub fn leibniz_defect<F: Field>(
    field: &F,
    x: &PrecubicalSet,
    c: &FormalChain<F::Elem>,
    d: &FormalChain<F::Elem>,
) -> FormalChain<F::Elem> {
    let lhs = boundary_of(field, x, &tensor(field, c, d));
    let first = tensor(field, &boundary_of(field, x, c), d);
    let mut second = tensor(field, c, &boundary_of(field, x, d));
    if leibniz_sign(c.dim) < 0 {
        second = negate(field, &second);
    }
    let rhs = sum(field, &first, &second);
    sum(field, &lhs, &negate(field, &rhs))
}

fn homogeneous<E: Clone>(p: &PathAlgebraElement<E>) -> Result<Option<(CubeId, CubeId)>> {
    if p.is_zero() {
        return Ok(None);
    }
    p.endpoints()
        .map(Some)
        .ok_or_else(|| Error::Operand("path algebra element mixes endpoints".to_string()))
}

/// `p∙x∙q = p⊗x⊗q` for a chain combination; `p` and `q` must each have one
/// pair of endpoints.
pub fn act_chain<F: Field>(
    field: &F,
    p: &PathAlgebraElement<F::Elem>,
    x: &FormalChain<F::Elem>,
    q: &PathAlgebraElement<F::Elem>,
) -> Result<FormalChain<F::Elem>> {
    let (Some((from, _)), Some((_, to))) = (homogeneous(p)?, homogeneous(q)?) else {
        return Ok(FormalChain::zero(x.from, x.to, x.dim));
    };
    let as_chain = |e: &PathAlgebraElement<F::Elem>| {
        let (a, b) = e.endpoints().expect("homogeneous");
        FormalChain::from_terms(a, b, 0, e.terms().clone()).expect("dimension 0 terms")
    };
    let px = tensor(field, &as_chain(p), x);
    let mut out = tensor(field, &px, &as_chain(q));
    out.from = from;
    out.to = to;
    Ok(out)
}

/// `(p∙f∙q)(x) = f(p⊗x⊗q)`. For `f` on `(α', β')`, `p` runs `α' → α` and `q`
/// runs `β → β'`; the result lives on `(α, β)`.
pub fn act_cochain<F: Field>(
    field: &F,
    x: &PrecubicalSet,
    p: &PathAlgebraElement<F::Elem>,
    f: &Cochain<F::Elem>,
    q: &PathAlgebraElement<F::Elem>,
) -> Result<Cochain<F::Elem>> {
    let (Some((p_from, alpha)), Some((beta, q_to))) = (homogeneous(p)?, homogeneous(q)?) else {
        return Ok(Cochain::zero(f.from, f.to, f.dim));
    };
    let mut map = BTreeMap::new();
    if p_from == f.from && q_to == f.to {
        for (y, value) in &f.values {
            for (pi, a) in &p.terms {
                let lp = pi.len();
                if y.cubes().len() < lp || y.cubes()[..lp] != *pi.cubes() {
                    continue;
                }
                for (qj, b) in &q.terms {
                    let lq = qj.len();
                    let n = y.cubes().len();
                    if n < lp + lq || y.cubes()[n - lq..] != *qj.cubes() {
                        continue;
                    }
                    let middle = y.sub(x, lp, n - lq);
                    if middle.start() != alpha || middle.end() != beta {
                        continue;
                    }
                    add_into(field, &mut map, middle, field.mul(value, &field.mul(a, b)));
                }
            }
        }
    }
    Ok(Cochain {
        from: alpha,
        to: beta,
        dim: f.dim,
        values: map,
    })
}

/// `f⊠g`: `c⊗d ↦ f(c) g(d)` on chains through the shared vertex, zero elsewhere.
/// Fails if some chain factors through that vertex in two ways.
pub fn box_tensor<F: Field>(
    field: &F,
    f: &Cochain<F::Elem>,
    g: &Cochain<F::Elem>,
) -> Result<Cochain<F::Elem>> {
    let mut values = BTreeMap::new();
    if f.to == g.from {
        let mut seen: HashMap<CubeChain, (CubeChain, CubeChain)> = HashMap::new();
        for (c, a) in &f.values {
            for (d, b) in &g.values {
                let cd = c.concat(d).expect("matching ends");
                if let Some(prev) = seen.insert(cd.clone(), (c.clone(), d.clone())) {
                    if prev != (c.clone(), d.clone()) {
                        return Err(Error::Model(
                            "a chain factors twice through the middle vertex (directed loop)"
                                .to_string(),
                        ));
                    }
                }
                add_into(field, &mut values, cd, field.mul(a, b));
            }
        }
    }
    Ok(Cochain {
        from: f.from,
        to: g.to,
        dim: f.dim + g.dim,
        values,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClassKind {
    Homology,
    Cohomology,
}

impl ClassKind {
    pub fn tag(self) -> &'static str {
        match self {
            ClassKind::Homology => "HM",
            ClassKind::Cohomology => "HMdual",
        }
    }
}

/// A class of `HM_degree` or `HM^degree` between `from` and `to`, held through
/// its canonical representative on chains of dimension `degree - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct BimoduleClass<E> {
    pub kind: ClassKind,
    pub degree: usize,
    pub from: CubeId,
    pub to: CubeId,
    pub rep: BTreeMap<CubeChain, E>,
}

impl<E: Clone> BimoduleClass<E> {
    pub fn is_zero(&self) -> bool {
        self.rep.is_empty()
    }

    pub fn chain_dim(&self) -> usize {
        self.degree - 1
    }

    pub fn as_chain(&self) -> FormalChain<E> {
        FormalChain::from_terms(self.from, self.to, self.chain_dim(), self.rep.clone())
            .expect("valid representative")
    }

    pub fn as_cochain(&self) -> Cochain<E> {
        Cochain {
            from: self.from,
            to: self.to,
            dim: self.chain_dim(),
            values: self.rep.clone(),
        }
    }

    pub fn to_json<F: Field<Elem = E>>(&self, x: &PrecubicalSet, field: &F) -> Value {
        let rep: serde_json::Map<String, Value> = self
            .rep
            .iter()
            .map(|(c, v)| (c.display(x), Value::String(field.render(v))))
            .collect();
        json!({
            "kind": self.kind.tag(),
            "degree": self.degree,
            "from": x.label(self.from),
            "to": x.label(self.to),
            "rep": rep,
        })
    }
}

type SliceKey = (CubeId, CubeId, usize);

/// A complex with a coefficient field and a cache of chain complex slices.
pub struct Engine<'a, F: Field> {
    field: F,
    chains: ChainEnumerator<'a>,
    slices: Mutex<HashMap<SliceKey, Arc<ChainComplexSlice>>>,
}

impl<'a, F: Field> Engine<'a, F> {
    pub fn new(x: &'a PrecubicalSet, field: F) -> Self {
        Self {
            field,
            chains: ChainEnumerator::new(x),
            slices: Mutex::new(HashMap::new()),
        }
    }

    pub fn complex(&self) -> &'a PrecubicalSet {
        self.chains.complex()
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn enumerator(&self) -> &ChainEnumerator<'a> {
        &self.chains
    }

    /// The slice `v → w` up to chain dimension `max_dim`, built once.
    pub fn slice(&self, v: CubeId, w: CubeId, max_dim: usize) -> Result<Arc<ChainComplexSlice>> {
        let key = (v, w, max_dim);
        if let Some(s) = self.slices.lock().expect("slice cache").get(&key) {
            return Ok(s.clone());
        }
        let s = Arc::new(self.chains.slice(v, w, max_dim)?);
        self.slices
            .lock()
            .expect("slice cache")
            .insert(key, s.clone());
        Ok(s)
    }

    fn coords(
        &self,
        s: &ChainComplexSlice,
        dim: usize,
        map: &BTreeMap<CubeChain, F::Elem>,
    ) -> Result<SparseVec<F::Elem>> {
        let mut v = Vec::with_capacity(map.len());
        for (c, x) in map {
            match s.position(c) {
                Some(i) if c.dim() == dim => v.push((i, x.clone())),
                _ => {
                    return Err(Error::Operand(format!(
                        "{} is not a dimension {dim} chain of the slice",
                        c.display(self.complex())
                    )))
                }
            }
        }
        v.sort_by_key(|e| e.0);
        Ok(v)
    }

    fn uncoords(
        &self,
        s: &ChainComplexSlice,
        dim: usize,
        v: &SparseVec<F::Elem>,
    ) -> BTreeMap<CubeChain, F::Elem> {
        v.iter()
            .map(|(i, x)| (s.basis(dim)[*i].clone(), x.clone()))
            .collect()
    }

    /// `∂*f = f∘∂`.
    pub fn coboundary(&self, f: &Cochain<F::Elem>) -> Result<Cochain<F::Elem>> {
        let s = self.slice(f.from, f.to, f.dim + 1)?;
        let fv = self.coords(&s, f.dim, &f.values)?;
        let delta = s.boundary_matrix(f.dim + 1).over(&self.field).transpose();
        let out = delta.mul_vec(&self.field, &fv);
        Ok(Cochain {
            from: f.from,
            to: f.to,
            dim: f.dim + 1,
            values: self.uncoords(&s, f.dim + 1, &out),
        })
    }

    /// The class of a cycle, canonicalized modulo boundaries.
    pub fn homology_class(&self, c: &FormalChain<F::Elem>) -> Result<BimoduleClass<F::Elem>> {
        let field = &self.field;
        let s = self.slice(c.from, c.to, c.dim + 1)?;
        let v = self.coords(&s, c.dim, c.terms())?;
        if !s
            .boundary_matrix(c.dim)
            .over(field)
            .mul_vec(field, &v)
            .is_empty()
        {
            return Err(Error::Operand("representative is not a cycle".to_string()));
        }
        let rep =
            Reduction::new(field, &s.boundary_matrix(c.dim + 1).over(field), false).reduce(&v);
        Ok(BimoduleClass {
            kind: ClassKind::Homology,
            degree: c.dim + 1,
            from: c.from,
            to: c.to,
            rep: self.uncoords(&s, c.dim, &rep),
        })
    }

    /// The class of a cocycle, canonicalized modulo coboundaries.
    pub fn cohomology_class(&self, f: &Cochain<F::Elem>) -> Result<BimoduleClass<F::Elem>> {
        let field = &self.field;
        let s = self.slice(f.from, f.to, f.dim + 1)?;
        let v = self.coords(&s, f.dim, &f.values)?;
        if !s
            .boundary_matrix(f.dim + 1)
            .over(field)
            .transpose()
            .mul_vec(field, &v)
            .is_empty()
        {
            return Err(Error::Operand(
                "representative is not a cocycle".to_string(),
            ));
        }
        let rep = if f.dim == 0 {
            v
        } else {
            Reduction::new(
                field,
                &s.boundary_matrix(f.dim).over(field).transpose(),
                false,
            )
            .reduce(&v)
        };
        Ok(BimoduleClass {
            kind: ClassKind::Cohomology,
            degree: f.dim + 1,
            from: f.from,
            to: f.to,
            rep: self.uncoords(&s, f.dim, &rep),
        })
    }

    fn zero_class(
        &self,
        kind: ClassKind,
        degree: usize,
        from: CubeId,
        to: CubeId,
    ) -> BimoduleClass<F::Elem> {
        BimoduleClass {
            kind,
            degree,
            from,
            to,
            rep: BTreeMap::new(),
        }
    }

    /// Basis of `HM_degree` (or `HM^degree`) from `v` to `w`.
    pub fn basis(
        &self,
        kind: ClassKind,
        v: CubeId,
        w: CubeId,
        degree: usize,
    ) -> Result<Vec<BimoduleClass<F::Elem>>> {
        if degree == 0 {
            return Err(Error::Domain("module indices start at 1".to_string()));
        }
        let s = self.slice(v, w, degree)?;
        let groups = match kind {
            ClassKind::Homology => homology(&self.field, &s, true),
            ClassKind::Cohomology => cohomology(&self.field, &s, true),
        };
        let group = groups
            .into_iter()
            .nth(degree - 1)
            .expect("degree below the slice top");
        Ok(group
            .representatives
            .iter()
            .map(|r| BimoduleClass {
                kind,
                degree,
                from: v,
                to: w,
                rep: self.uncoords(&s, degree - 1, r),
            })
            .collect())
    }

    /// Dimension of the span of classes sharing kind, degree and endpoints.
    pub fn span_rank(&self, classes: &[BimoduleClass<F::Elem>]) -> Result<usize> {
        let Some(first) = classes.first() else {
            return Ok(0);
        };
        if classes.iter().any(|c| {
            (c.kind, c.degree, c.from, c.to) != (first.kind, first.degree, first.from, first.to)
        }) {
            return Err(Error::Operand(
                "classes live in different modules".to_string(),
            ));
        }
        let s = self.slice(first.from, first.to, first.degree)?;
        let dim = first.chain_dim();
        let vectors = classes
            .iter()
            .map(|c| self.coords(&s, dim, &c.rep))
            .collect::<Result<Vec<_>>>()?;
        Ok(echelon_basis(&self.field, s.basis(dim).len(), &vectors).len())
    }

    /// `[a] ⊛ [b] = [a⊗b]`.
    pub fn conc(
        &self,
        a: &BimoduleClass<F::Elem>,
        b: &BimoduleClass<F::Elem>,
    ) -> Result<BimoduleClass<F::Elem>> {
        if a.kind != ClassKind::Homology || b.kind != ClassKind::Homology {
            return Err(Error::Operand("⊛ takes homology classes".to_string()));
        }
        let degree = a.degree + b.degree - 1;
        if a.to != b.from {
            return Ok(self.zero_class(ClassKind::Homology, degree, a.from, b.to));
        }
        self.homology_class(&tensor(&self.field, &a.as_chain(), &b.as_chain()))
    }

    /// `[f] ↷ [g]`: the class restricting to `[f⊠g]` on the chains through the
    /// middle vertex `β`.
    ///
    /// `f⊠g` is a cocycle on the subcomplex of chains through `β`, but usually
    /// not on the whole slice. It is reduced modulo coboundaries of that
    /// subcomplex, then extended by values on chains avoiding `β` so that the
    /// sum is a cocycle. Both steps are deterministic, so the result depends
    /// only on the classes. On `HM^1` the extension is the locally constant
    /// function equal to `f⊠g` on components meeting `β` and zero on the others.
    pub fn cap(
        &self,
        a: &BimoduleClass<F::Elem>,
        b: &BimoduleClass<F::Elem>,
    ) -> Result<BimoduleClass<F::Elem>> {
        if a.kind != ClassKind::Cohomology || b.kind != ClassKind::Cohomology {
            return Err(Error::Operand("↷ takes cohomology classes".to_string()));
        }
        let field = &self.field;
        let x = self.complex();
        let degree = a.degree + b.degree - 1;
        if a.to != b.from {
            return Ok(self.zero_class(ClassKind::Cohomology, degree, a.from, b.to));
        }
        let beta = a.to;
        let n = degree - 1;
        let fg = box_tensor(field, &a.as_cochain(), &b.as_cochain())?;
        let s = self.slice(a.from, b.to, n + 1)?;
        let in_k: Vec<bool> = s
            .basis(n)
            .iter()
            .map(|c| !c.visits(x, beta).is_empty())
            .collect();
        let mut f0 = self.coords(&s, n, &fg.values)?;
        if n >= 1 {
            let dn = s.boundary_matrix(n).over(field);
            let cols = (0..dn.ncols())
                .map(|j| {
                    if in_k[j] {
                        dn.col(j).clone()
                    } else {
                        Vec::new()
                    }
                })
                .collect();
            let delta_k = SparseMatrix::new(dn.nrows(), cols).transpose();
            f0 = Reduction::new(field, &delta_k, false).reduce(&f0);
        }
        let delta = s.boundary_matrix(n + 1).over(field).transpose();
        let rhs: SparseVec<F::Elem> = delta
            .mul_vec(field, &f0)
            .into_iter()
            .map(|(i, v)| (i, field.neg(&v)))
            .collect();
        let cols = (0..delta.ncols())
            .map(|j| {
                if in_k[j] {
                    Vec::new()
                } else {
                    delta.col(j).clone()
                }
            })
            .collect();
        let avoiding = SparseMatrix::new(delta.nrows(), cols);
        let h = Reduction::new(field, &avoiding, true)
            .solve(&rhs)
            .ok_or_else(|| {
                Error::Operand("f⊠g has no cocycle extension off the middle vertex".to_string())
            })?;
        let full = axpy(field, &f0, &field.one(), &h);
        let cochain = Cochain {
            from: a.from,
            to: b.to,
            dim: n,
            values: self.uncoords(&s, n, &full),
        };
        self.cohomology_class(&cochain)
    }

    /// Pointwise product of two `HM^1` classes with the same endpoints.
    pub fn cup0(
        &self,
        a: &BimoduleClass<F::Elem>,
        b: &BimoduleClass<F::Elem>,
    ) -> Result<BimoduleClass<F::Elem>> {
        if a.kind != ClassKind::Cohomology || b.kind != ClassKind::Cohomology {
            return Err(Error::Operand("⌣ takes cohomology classes".to_string()));
        }
        for c in [a, b] {
            if c.degree != 1 {
                return Err(Error::UnsupportedDegree(c.degree));
            }
        }
        if (a.from, a.to) != (b.from, b.to) {
            return Err(Error::Operand(
                "⌣ needs classes with the same endpoints".to_string(),
            ));
        }
        let field = &self.field;
        let values = a
            .rep
            .iter()
            .filter_map(|(c, x)| b.rep.get(c).map(|y| (c.clone(), field.mul(x, y))));
        self.cohomology_class(&Cochain::from_values(field, a.from, a.to, 0, values)?)
    }
}
