use serde::Serialize;

use super::QError;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Subsystem {
    pub id: String,
    pub dim: usize,
}

/// Ordered tensor factorization of a composite Hilbert space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SpaceLayout {
    subsystems: Vec<Subsystem>,
}

impl SpaceLayout {
    pub fn new<I, S>(subsystems: I) -> Result<Self, QError>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut out: Vec<Subsystem> = Vec::new();
        for (id, dim) in subsystems {
            let id = id.into();
            if dim < 2 {
                return Err(QError::InvalidDimension { id, dim });
            }
            if out.iter().any(|s| s.id == id) {
                return Err(QError::DuplicateSubsystem(id));
            }
            out.push(Subsystem { id, dim });
        }
        Ok(SpaceLayout { subsystems: out })
    }

    /// Layout of `ids.len()` qubits.
    pub fn qubits(ids: &[&str]) -> Result<Self, QError> {
        Self::new(ids.iter().map(|id| (*id, 2)))
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|s| s.dim).collect()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.subsystems.iter().map(|s| s.id.as_str()).collect()
    }

    pub fn total_dimension(&self) -> usize {
        self.subsystems.iter().map(|s| s.dim).product()
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.subsystems.iter().position(|s| s.id == id)
    }

    pub fn dim_of(&self, id: &str) -> Option<usize> {
        self.subsystems.iter().find(|s| s.id == id).map(|s| s.dim)
    }

    /// Positions of `ids` in this layout, in the order given.
    pub fn positions<S: AsRef<str>>(&self, ids: &[S]) -> Result<Vec<usize>, QError> {
        let mut out = Vec::with_capacity(ids.len());
        for id in ids {
            let id = id.as_ref();
            let p = self
                .position(id)
                .ok_or_else(|| QError::UnknownSubsystem(id.to_string()))?;
            if out.contains(&p) {
                return Err(QError::OverlappingTargets(id.to_string()));
            }
            out.push(p);
        }
        Ok(out)
    }

    /// Sub-layout over `ids`, in the order given.
    pub fn select<S: AsRef<str>>(&self, ids: &[S]) -> Result<SpaceLayout, QError> {
        let pos = self.positions(ids)?;
        Ok(SpaceLayout {
            subsystems: pos.into_iter().map(|p| self.subsystems[p].clone()).collect(),
        })
    }

    /// Concatenation `self ⊗ other`.
    pub fn concat(&self, other: &SpaceLayout) -> Result<SpaceLayout, QError> {
        let mut subs = self.subsystems.clone();
        for s in &other.subsystems {
            if subs.iter().any(|t| t.id == s.id) {
                return Err(QError::DuplicateSubsystem(s.id.clone()));
            }
            subs.push(s.clone());
        }
        Ok(SpaceLayout { subsystems: subs })
    }

    /// Check that `other` is a sub-layout of `self` (same ids with same dims)
    /// and return the positions of its subsystems in `self`.
    pub fn embed(&self, other: &SpaceLayout) -> Result<Vec<usize>, QError> {
        let pos = self.positions(&other.ids())?;
        for (p, s) in pos.iter().zip(&other.subsystems) {
            if self.subsystems[*p].dim != s.dim {
                return Err(QError::LayoutMismatch(format!(
                    "`{}` has dimension {} here but {} in the operand",
                    s.id, self.subsystems[*p].dim, s.dim
                )));
            }
        }
        Ok(pos)
    }
}
