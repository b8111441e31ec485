use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, Error, Result};

type Projector = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// Closed convex feasible set with an exact Euclidean projection.
#[derive(Clone)]
pub enum ConstraintSet {
    /// Componentwise bounds; infinite entries leave a side open.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// User supplied projector onto a convex set of the given dimension.
    Custom { dim: usize, projector: Arc<Projector> },
}

impl fmt::Debug for ConstraintSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintSet::Box { lower, upper } => f
                .debug_struct("Box")
                .field("lower", lower)
                .field("upper", upper)
                .finish(),
            ConstraintSet::Custom { dim, .. } => f.debug_struct("Custom").field("dim", dim).finish_non_exhaustive(),
        }
    }
}

impl ConstraintSet {
    pub fn bounded(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if l.is_nan() || u.is_nan() || l > u {
                return Err(Error::InvalidArgument(format!(
                    "bound {i}: lower {l} must not exceed upper {u}"
                )));
            }
        }
        Ok(ConstraintSet::Box { lower, upper })
    }

    pub fn unconstrained(dim: usize) -> Self {
        ConstraintSet::Box {
            lower: vec![f64::NEG_INFINITY; dim],
            upper: vec![f64::INFINITY; dim],
        }
    }

    pub fn custom<F>(dim: usize, projector: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        ConstraintSet::Custom {
            dim,
            projector: Arc::new(projector),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConstraintSet::Box { lower, .. } => lower.len(),
            ConstraintSet::Custom { dim, .. } => *dim,
        }
    }

    /// Euclidean projection of `z` onto the set.
    pub fn project(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), z.len())?;
        match self {
            ConstraintSet::Box { lower, upper } => Ok(z
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(&v, (&l, &u))| v.max(l).min(u))
                .collect()),
            ConstraintSet::Custom { dim, projector } => {
                let out = projector(z);
                check_dim(*dim, out.len())?;
                Ok(out)
            }
        }
    }

    /// Membership test, exact for boxes.
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            ConstraintSet::Box { lower, upper } => {
                x.len() == lower.len() && x.iter().zip(lower.iter().zip(upper)).all(|(v, (l, u))| v >= l && v <= u)
            }
            ConstraintSet::Custom { .. } => match self.project(x) {
                Ok(p) => p.iter().zip(x).all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + b.abs())),
                Err(_) => false,
            },
        }
    }
}

/// Free function form of [`ConstraintSet::project`].
pub fn project(z: &[f64], set: &ConstraintSet) -> Result<Vec<f64>> {
    set.project(z)
}
