use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::{c, inner, QError, SpaceLayout, C64, TOL};

/// Outcome label attached to one basis vector.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(untagged)]
pub enum Label {
    Int(i64),
    Sym(String),
    Tuple(Vec<Label>),
}

impl Label {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Label::Int(v) => Some(*v),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Int(v) => write!(f, "{v}"),
            Label::Sym(s) => f.write_str(s),
            Label::Tuple(ls) => {
                f.write_str("(")?;
                for (i, l) in ls.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{l}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl From<i64> for Label {
    fn from(v: i64) -> Self {
        Label::Int(v)
    }
}

/// One label per measured factor.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Outcome(pub Vec<Label>);

impl Outcome {
    pub fn single(l: Label) -> Self {
        Outcome(vec![l])
    }

    /// Product of the integer labels, if every label is an integer.
    pub fn int_product(&self) -> Option<i64> {
        self.0.iter().map(Label::as_int).product()
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "{}", self.0[0]);
        }
        write!(f, "{}", Label::Tuple(self.0.clone()))
    }
}

/// Orthonormal basis of the joint space of `targets`, one label per vector.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSpec {
    target: SpaceLayout,
    vectors: Vec<Vec<C64>>,
    labels: Vec<Label>,
}

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

impl BasisSpec {
    pub fn new(target: SpaceLayout, vectors: Vec<Vec<C64>>, labels: Vec<Label>) -> Result<Self, QError> {
        let dim = target.total_dimension();
        if vectors.len() != dim {
            return Err(QError::IncompleteBasis { dim, got: vectors.len() });
        }
        if labels.len() != vectors.len() {
            return Err(QError::LengthMismatch { expected: vectors.len(), got: labels.len() });
        }
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !seen.insert(l) {
                return Err(QError::DuplicateLabel(l.to_string()));
            }
        }
        let mut dev: f64 = 0.0;
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(QError::LengthMismatch { expected: dim, got: v.len() });
            }
            for (j, w) in vectors.iter().enumerate().skip(i) {
                let want = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((inner(v, w) - c(want, 0.0)).norm());
            }
        }
        if dev > TOL {
            return Err(QError::NotOrthonormal { deviation: dev });
        }
        Ok(BasisSpec { target, vectors, labels })
    }

    /// Computational basis of one subsystem, labelled `0..dim`.
    pub fn computational(id: &str, dim: usize) -> Result<Self, QError> {
        let target = SpaceLayout::new([(id, dim)])?;
        let vectors = (0..dim)
            .map(|k| (0..dim).map(|j| c(if j == k { 1.0 } else { 0.0 }, 0.0)).collect())
            .collect();
        Self::new(target, vectors, (0..dim as i64).map(Label::Int).collect())
    }

    /// Qubit computational basis with eigenvalue labels: |0⟩ ↦ +1, |1⟩ ↦ −1.
    pub fn basis1(id: &str) -> Result<Self, QError> {
        let target = SpaceLayout::new([(id, 2)])?;
        Self::new(
            target,
            vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]],
            vec![Label::Int(1), Label::Int(-1)],
        )
    }

    /// `(|+1⟩ ± i|−1⟩)/√2` over the computational qubit basis.
    pub fn basis3(id: &str) -> Result<Self, QError> {
        let target = SpaceLayout::new([(id, 2)])?;
        Self::new(
            target,
            vec![vec![c(H, 0.0), c(0.0, H)], vec![c(H, 0.0), c(0.0, -H)]],
            vec![Label::Int(1), Label::Int(-1)],
        )
    }

    /// Basis of a (system, record) qubit pair whose first two vectors are
    /// `(|+1,+1⟩ ± i|−1,−1⟩)/√2` with `|±1,±1⟩` the basis-3 copy states.
    /// The remaining two vectors `|+1,−1⟩`, `|−1,+1⟩` complete the basis and
    /// carry the symbolic labels `off+-` and `off-+`.
    pub fn basis2(system: &str, record: &str) -> Result<Self, QError> {
        let target = SpaceLayout::new([(system, 2), (record, 2)])?;
        let b3 = Self::basis3(system)?;
        let pair = |l: usize, m: usize| -> Vec<C64> {
            let (u, v) = (&b3.vectors[l], &b3.vectors[m]);
            u.iter().flat_map(|a| v.iter().map(move |b| a * b)).collect()
        };
        let pp = pair(0, 0);
        let mm = pair(1, 1);
        let combo = |sign: f64| -> Vec<C64> {
            pp.iter().zip(&mm).map(|(a, b)| (a + c(0.0, sign) * b) * H).collect()
        };
        Self::new(
            target,
            vec![combo(1.0), combo(-1.0), pair(0, 1), pair(1, 0)],
            vec![
                Label::Int(1),
                Label::Int(-1),
                Label::Sym("off+-".into()),
                Label::Sym("off-+".into()),
            ],
        )
    }

    /// Tensor-product basis over the concatenated targets, labelled by tuples.
    pub fn product(factors: &[&BasisSpec]) -> Result<Self, QError> {
        let first = factors.first().ok_or(QError::LengthMismatch { expected: 1, got: 0 })?;
        let mut target = first.target.clone();
        let mut vectors = first.vectors.clone();
        let mut labels: Vec<Vec<Label>> = first.labels.iter().map(|l| vec![l.clone()]).collect();
        for f in &factors[1..] {
            target = target.concat(&f.target)?;
            let mut nv = Vec::new();
            let mut nl = Vec::new();
            for (v, l) in vectors.iter().zip(&labels) {
                for (w, m) in f.vectors.iter().zip(&f.labels) {
                    nv.push(v.iter().flat_map(|a| w.iter().map(move |b| a * b)).collect());
                    let mut t = l.clone();
                    t.push(m.clone());
                    nl.push(t);
                }
            }
            vectors = nv;
            labels = nl;
        }
        Self::new(target, vectors, labels.into_iter().map(Label::Tuple).collect())
    }

    /// Same vectors, moved onto differently named subsystems of equal dimension.
    pub fn retarget<S: AsRef<str>>(&self, ids: &[S]) -> Result<Self, QError> {
        if ids.len() != self.target.len() {
            return Err(QError::LayoutMismatch("retarget needs one id per subsystem".into()));
        }
        let target = SpaceLayout::new(
            ids.iter().map(|s| s.as_ref()).zip(self.target.dims()),
        )?;
        Ok(BasisSpec { target, vectors: self.vectors.clone(), labels: self.labels.clone() })
    }

    pub fn target(&self) -> &SpaceLayout {
        &self.target
    }

    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vectors
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn index_of(&self, label: &Label) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Same vectors (within `tol`) and labels on the same targets.
    pub fn approx_eq(&self, other: &BasisSpec, tol: f64) -> bool {
        self.target == other.target
            && self.labels == other.labels
            && self.vectors.iter().zip(&other.vectors).all(|(v, w)| {
                v.iter().zip(w).all(|(a, b)| (a - b).norm() <= tol)
            })
    }

    /// Projector onto vector `k`, as a dense matrix over the target space.
    pub fn projector(&self, k: usize) -> nalgebra::DMatrix<C64> {
        let v = nalgebra::DVector::from_column_slice(&self.vectors[k]);
        &v * v.adjoint()
    }
}

/// One measured factor: a basis plus the real eigenvalue assigned to each label.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub basis: BasisSpec,
    pub eigenvalues: BTreeMap<Label, f64>,
}

impl Factor {
    /// Integer labels are their own eigenvalues; symbolic labels get none.
    pub fn new(basis: BasisSpec) -> Self {
        let eigenvalues = basis
            .labels()
            .iter()
            .filter_map(|l| l.as_int().map(|v| (l.clone(), v as f64)))
            .collect();
        Factor { basis, eigenvalues }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Composition {
    /// Outcome is the tuple of factor labels.
    Product,
    /// The factors form one measurement over their joint space; outcome is a
    /// single tuple-valued label.
    Single,
}

/// Bijective renaming of an observable's outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct Relabel {
    map: BTreeMap<Outcome, Label>,
}

impl Relabel {
    pub fn get(&self, o: &Outcome) -> Option<&Label> {
        self.map.get(o)
    }

    pub fn inverse(&self, l: &Label) -> Option<&Outcome> {
        self.map.iter().find(|(_, v)| *v == l).map(|(k, _)| k)
    }

    pub fn entries(&self) -> &BTreeMap<Outcome, Label> {
        &self.map
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSpec {
    factors: Vec<Factor>,
    composition: Composition,
    encoding: Option<Relabel>,
}

impl ObservableSpec {
    pub fn new(factors: Vec<Factor>, composition: Composition) -> Result<Self, QError> {
        if factors.is_empty() {
            return Err(QError::LengthMismatch { expected: 1, got: 0 });
        }
        let mut seen = BTreeSet::new();
        for f in &factors {
            for id in f.basis.target().ids() {
                if !seen.insert(id.to_string()) {
                    return Err(QError::OverlappingTargets(id.to_string()));
                }
            }
        }
        Ok(ObservableSpec { factors, composition, encoding: None })
    }

    pub fn from_basis(b: BasisSpec) -> Self {
        ObservableSpec { factors: vec![Factor::new(b)], composition: Composition::Product, encoding: None }
    }

    pub fn product(bases: Vec<BasisSpec>) -> Result<Self, QError> {
        Self::new(bases.into_iter().map(Factor::new).collect(), Composition::Product)
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn composition(&self) -> Composition {
        self.composition
    }

    pub fn encoding(&self) -> Option<&Relabel> {
        self.encoding.as_ref()
    }

    /// Subsystem ids measured, in factor order.
    pub fn targets(&self) -> Vec<String> {
        self.factors
            .iter()
            .flat_map(|f| f.basis.target().ids().into_iter().map(String::from))
            .collect()
    }

    /// Joint basis over [`targets`](Self::targets) with the raw (pre-encoding)
    /// outcome of each vector.
    pub fn joint_basis(&self) -> Result<(BasisSpec, Vec<Outcome>), QError> {
        let bases: Vec<&BasisSpec> = self.factors.iter().map(|f| &f.basis).collect();
        if bases.len() == 1 {
            let b = bases[0].clone();
            let outs = b.labels().iter().cloned().map(Outcome::single).collect();
            return Ok((b, outs));
        }
        let b = BasisSpec::product(&bases)?;
        let outs = b
            .labels()
            .iter()
            .map(|l| match l {
                Label::Tuple(ls) => Outcome(ls.clone()),
                other => Outcome::single(other.clone()),
            })
            .collect();
        Ok((b, outs))
    }

    /// Every raw outcome in joint-basis order.
    pub fn raw_outcomes(&self) -> Vec<Outcome> {
        self.factors.iter().fold(vec![Outcome(Vec::new())], |acc, f| {
            acc.iter()
                .flat_map(|o| {
                    f.basis.labels().iter().map(move |l| {
                        let mut v = o.0.clone();
                        v.push(l.clone());
                        Outcome(v)
                    })
                })
                .collect()
        })
    }

    /// Reported outcome for a raw outcome: composition then encoding applied.
    pub fn present(&self, raw: &Outcome) -> Outcome {
        if let Some(enc) = &self.encoding {
            if let Some(l) = enc.get(raw) {
                return Outcome::single(l.clone());
            }
        }
        match self.composition {
            Composition::Product => raw.clone(),
            Composition::Single if raw.0.len() == 1 => raw.clone(),
            Composition::Single => Outcome::single(Label::Tuple(raw.0.clone())),
        }
    }

    /// Inverse of [`present`](Self::present).
    pub fn raw_of(&self, presented: &Outcome) -> Option<Outcome> {
        self.raw_outcomes().into_iter().find(|r| &self.present(r) == presented)
    }

    /// Product of factor eigenvalues for a raw outcome.
    pub fn eigenvalue(&self, raw: &Outcome) -> Option<f64> {
        if raw.0.len() != self.factors.len() {
            return None;
        }
        self.factors
            .iter()
            .zip(&raw.0)
            .map(|(f, l)| f.eigenvalues.get(l).copied())
            .product()
    }

    /// Whether every pair of spectral projectors of `self` and `other`
    /// commutes on the union of their targets.
    pub fn commutes_with(&self, other: &ObservableSpec) -> Result<bool, QError> {
        let (ba, _) = self.joint_basis()?;
        let (bb, _) = other.joint_basis()?;
        let mut union = ba.target().clone();
        for s in bb.target().subsystems() {
            if union.position(&s.id).is_none() {
                union = union.concat(&SpaceLayout::new([(s.id.clone(), s.dim)])?)?;
            }
        }
        let embed = |b: &BasisSpec, k: usize| -> Result<nalgebra::DMatrix<C64>, QError> {
            let pos = union.embed(b.target())?;
            let (t, r) = super::local_offsets(&union.dims(), &pos);
            let p = b.projector(k);
            let n = union.total_dimension();
            let mut m = nalgebra::DMatrix::<C64>::zeros(n, n);
            for &base in &r {
                for (i, &ti) in t.iter().enumerate() {
                    for (j, &tj) in t.iter().enumerate() {
                        m[(base + ti, base + tj)] = p[(i, j)];
                    }
                }
            }
            Ok(m)
        };
        for i in 0..ba.len() {
            let p = embed(&ba, i)?;
            for j in 0..bb.len() {
                let q = embed(&bb, j)?;
                let comm = &p * &q - &q * &p;
                if comm.iter().any(|z| z.norm() > TOL) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Attach a bijective outcome renaming to `o`. `map` must cover every raw
/// outcome of `o` exactly once with distinct new labels.
pub fn relabel(o: &ObservableSpec, map: BTreeMap<Outcome, Label>) -> Result<ObservableSpec, QError> {
    let raw: BTreeSet<Outcome> = o.raw_outcomes().into_iter().collect();
    let keys: BTreeSet<Outcome> = map.keys().cloned().collect();
    if raw != keys {
        let missing = raw.difference(&keys).next();
        let extra = keys.difference(&raw).next();
        return Err(QError::NotBijective(match (missing, extra) {
            (Some(m), _) => format!("outcome {m} is not mapped"),
            (None, Some(e)) => format!("{e} is not an outcome of the observable"),
            (None, None) => unreachable!(),
        }));
    }
    let mut images = BTreeSet::new();
    for v in map.values() {
        if !images.insert(v) {
            return Err(QError::NotBijective(format!("label {v} used twice")));
        }
    }
    let mut out = o.clone();
    out.encoding = Some(Relabel { map });
    Ok(out)
}

/// `±1` tuple to bits via `x_n = (−1)^{b_n}`, and the integer
/// `v = Σ_n 2^{n−1} b_n` (first entry least significant).
pub fn encode_bits(x: &[i64]) -> Result<(Vec<u8>, u64), QError> {
    let mut bits = Vec::with_capacity(x.len());
    let mut v = 0u64;
    for (n, &xn) in x.iter().enumerate() {
        let b = match xn {
            1 => 0u8,
            -1 => 1u8,
            other => return Err(QError::NotSign(other)),
        };
        v |= (b as u64) << n;
        bits.push(b);
    }
    Ok((bits, v))
}

/// Inverse of [`encode_bits`] for `n` entries.
pub fn decode_bits(v: u64, n: usize) -> Vec<i64> {
    (0..n).map(|k| if (v >> k) & 1 == 1 { -1 } else { 1 }).collect()
}

impl ObservableSpec {
    /// Relabel an all-`±1` observable with the bit encoding of
    /// [`encode_bits`]: each outcome tuple becomes the integer `v`.
    pub fn with_bit_encoding(&self) -> Result<ObservableSpec, QError> {
        let mut map = BTreeMap::new();
        for raw in self.raw_outcomes() {
            let xs: Vec<i64> = raw
                .0
                .iter()
                .map(|l| l.as_int().ok_or_else(|| QError::UnknownLabel(l.to_string())))
                .collect::<Result<_, _>>()?;
            let (_, v) = encode_bits(&xs)?;
            map.insert(raw, Label::Int(v as i64));
        }
        relabel(self, map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_orthonormal() {
        BasisSpec::basis1("q").unwrap();
        BasisSpec::basis3("q").unwrap();
        BasisSpec::basis2("s", "a").unwrap();
        BasisSpec::computational("d", 5).unwrap();
    }

    #[test]
    fn duplicate_labels_rejected() {
        let t = SpaceLayout::qubits(&["q"]).unwrap();
        let e = BasisSpec::new(
            t,
            vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]],
            vec![Label::Int(0), Label::Int(0)],
        );
        assert_eq!(e, Err(QError::DuplicateLabel("0".into())));
    }

    #[test]
    fn non_orthogonal_rejected() {
        let t = SpaceLayout::qubits(&["q"]).unwrap();
        let e = BasisSpec::new(
            t,
            vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(H, 0.0), c(H, 0.0)]],
            vec![Label::Int(0), Label::Int(1)],
        );
        assert!(matches!(e, Err(QError::NotOrthonormal { .. })));
    }

    #[test]
    fn appendix_bit_encoding_values() {
        assert_eq!(encode_bits(&[1, 1, 1]).unwrap(), (vec![0, 0, 0], 0));
        assert_eq!(encode_bits(&[-1, 1, -1]).unwrap(), (vec![1, 0, 1], 5));
        assert_eq!(encode_bits(&[-1, -1, -1]).unwrap().1, 7);
        assert_eq!(encode_bits(&[1, 0]), Err(QError::NotSign(0)));
        assert_eq!(decode_bits(5, 3), vec![-1, 1, -1]);
    }

    #[test]
    fn relabel_rejects_non_bijection() {
        let o = ObservableSpec::from_basis(BasisSpec::basis1("q").unwrap());
        let mut m = BTreeMap::new();
        m.insert(Outcome::single(Label::Int(1)), Label::Int(0));
        assert!(matches!(relabel(&o, m.clone()), Err(QError::NotBijective(_))));
        m.insert(Outcome::single(Label::Int(-1)), Label::Int(0));
        assert!(matches!(relabel(&o, m.clone()), Err(QError::NotBijective(_))));
        m.insert(Outcome::single(Label::Int(-1)), Label::Int(1));
        let r = relabel(&o, m).unwrap();
        assert_eq!(r.present(&Outcome::single(Label::Int(-1))), Outcome::single(Label::Int(1)));
    }

    #[test]
    fn product_observable_must_be_disjoint() {
        let a = BasisSpec::basis1("q").unwrap();
        assert!(matches!(
            ObservableSpec::product(vec![a.clone(), a]),
            Err(QError::OverlappingTargets(_))
        ));
    }

    #[test]
    fn commutation() {
        let z = ObservableSpec::from_basis(BasisSpec::basis1("q").unwrap());
        let y = ObservableSpec::from_basis(BasisSpec::basis3("q").unwrap());
        let z2 = ObservableSpec::from_basis(BasisSpec::basis1("r").unwrap());
        assert!(z.commutes_with(&z).unwrap());
        assert!(z.commutes_with(&z2).unwrap());
        assert!(!z.commutes_with(&y).unwrap());
    }
}
