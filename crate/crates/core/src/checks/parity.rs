use serde::Serialize;

use super::CheckError;

/// Largest variable count [`parity_search`] enumerates.
pub const MAX_VARIABLES: usize = 20;

/// A `±1` variable, optionally negated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Literal {
    pub name: String,
    pub negated: bool,
}

impl Literal {
    pub fn pos(name: &str) -> Self {
        Literal { name: name.into(), negated: false }
    }

    pub fn neg(name: &str) -> Self {
        Literal { name: name.into(), negated: true }
    }
}

/// The product of `literals` must equal `required`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParityConstraint {
    pub literals: Vec<Literal>,
    pub required: i8,
    pub provenance: String,
}

impl ParityConstraint {
    pub fn new(literals: Vec<Literal>, required: i64, provenance: &str) -> Result<Self, CheckError> {
        if required != 1 && required != -1 {
            return Err(CheckError::BadRequired(required));
        }
        Ok(ParityConstraint { literals, required: required as i8, provenance: provenance.into() })
    }

    /// Positive literals over `names`.
    pub fn product(names: &[&str], required: i64, provenance: &str) -> Result<Self, CheckError> {
        Self::new(names.iter().map(|n| Literal::pos(n)).collect(), required, provenance)
    }

    pub fn holds(&self, value: impl Fn(&str) -> i8) -> bool {
        let p: i8 = self
            .literals
            .iter()
            .map(|l| if l.negated { -value(&l.name) } else { value(&l.name) })
            .product();
        p == self.required
    }

    /// Replaces every occurrence of `name` by the product of `by`.
    pub fn substitute(&self, name: &str, by: &[Literal]) -> Self {
        let mut lits = Vec::new();
        for l in &self.literals {
            if l.name == name {
                for (k, b) in by.iter().enumerate() {
                    let flip = k == 0 && l.negated;
                    lits.push(Literal { name: b.name.clone(), negated: b.negated ^ flip });
                }
            } else {
                lits.push(l.clone());
            }
        }
        ParityConstraint { literals: lits, required: self.required, provenance: self.provenance.clone() }
    }
}

/// Value a monomial is forced to by squaring out a constraint combination.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormalProduct {
    pub monomial: Vec<String>,
    /// Forced value of the monomial's square.
    pub square: i8,
    /// `"+1"`, `"-1"`, or `"±1"` / `"±i"` when only the square is fixed.
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssignmentSearchResult {
    pub variables: Vec<String>,
    pub domain_size: u64,
    /// Each entry lists values in [`variables`](Self::variables) order.
    pub satisfying: Vec<Vec<i8>>,
    pub formal_product: Option<FormalProduct>,
}

impl AssignmentSearchResult {
    pub fn is_empty(&self) -> bool {
        self.satisfying.is_empty()
    }
}

/// Exhaustive search of `{±1}^n` over the variables of `constraints`.
/// Variables are ordered as in `order`, then by first appearance; `order`
/// may name variables that occur in no constraint.
pub fn parity_search(constraints: &[ParityConstraint], order: &[&str]) -> Result<AssignmentSearchResult, CheckError> {
    let mut vars: Vec<String> = Vec::new();
    let names = order.iter().copied().chain(constraints.iter().flat_map(|c| c.literals.iter().map(|l| l.name.as_str())));
    for n in names {
        if !vars.iter().any(|v| v == n) {
            vars.push(n.to_string());
        }
    }
    let n = vars.len();
    if n > MAX_VARIABLES {
        return Err(CheckError::TooManyVariables(n));
    }
    // variable index per literal, so the inner loop is arithmetic only
    let compiled: Vec<(Vec<(usize, bool)>, i8)> = constraints
        .iter()
        .map(|c| {
            let lits = c
                .literals
                .iter()
                .map(|l| (vars.iter().position(|v| *v == l.name).expect("collected"), l.negated))
                .collect();
            (lits, c.required)
        })
        .collect();
    let mut satisfying = Vec::new();
    for mask in 0u64..(1u64 << n) {
        let value = |k: usize| if (mask >> k) & 1 == 1 { -1i8 } else { 1 };
        let ok = compiled.iter().all(|(lits, req)| {
            let p: i8 = lits.iter().map(|&(k, neg)| if neg { -value(k) } else { value(k) }).product();
            p == *req
        });
        if ok {
            satisfying.push((0..n).map(value).collect());
        }
    }
    Ok(AssignmentSearchResult { variables: vars, domain_size: 1u64 << n, satisfying, formal_product: None })
}

/// Multiplies the `numerator` constraints and divides by the `denominator`
/// ones. When every surviving variable appears exactly squared, returns the
/// value that combination forces on the square of their product.
pub fn formal_square(numerator: &[&ParityConstraint], denominator: &[&ParityConstraint]) -> Option<FormalProduct> {
    let mut exp: Vec<(String, i64)> = Vec::new();
    let mut sign: i8 = 1;
    for (cs, step) in [(numerator, 1i64), (denominator, -1)] {
        for c in cs {
            sign *= c.required;
            for l in &c.literals {
                if l.negated {
                    sign = -sign;
                }
                match exp.iter_mut().find(|(n, _)| *n == l.name) {
                    Some((_, e)) => *e += step,
                    None => exp.push((l.name.clone(), step)),
                }
            }
        }
    }
    let mut monomial = Vec::new();
    for (n, e) in exp {
        match e {
            0 => {}
            2 => monomial.push(n),
            _ => return None,
        }
    }
    if monomial.is_empty() {
        return None;
    }
    monomial.sort();
    let value = if sign == 1 { "±1" } else { "±i" }.to_string();
    Some(FormalProduct { monomial, square: sign, value })
}
