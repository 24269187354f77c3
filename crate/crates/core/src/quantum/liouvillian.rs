use num_complex::Complex64;

use super::{CollapseSet, Operator, StateVector, SuperOperator, DIM, SUPER_DIM};

/// Generator of the master equation acting on column-stacked density matrices:
/// `vec(ρ)[c·4 + r] = ρ[r, c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian(SuperOperator);

impl Liouvillian {
    pub fn from_matrix(m: SuperOperator) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &SuperOperator {
        &self.0
    }

    pub fn apply(&self, rho: &Operator) -> Operator {
        unvec(&(self.0 * vec(rho)))
    }

    /// max |Σ_r L[(r,r), k]| over columns k: how far the vectorized identity
    /// is from being a left null vector.
    pub fn trace_residual(&self) -> f64 {
        (0..SUPER_DIM)
            .map(|k| (0..DIM).map(|r| self.0[(diag_index(r), k)]).sum::<Complex64>().norm())
            .fold(0.0, f64::max)
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

/// `L = −i(I⊗H − Hᵀ⊗I) + Σ_j [c̄_j⊗c_j − ½ I⊗(c_j†c_j) − ½ (c_j†c_j)ᵀ⊗I]`.
pub fn build_liouvillian(h: &Operator, collapse: &CollapseSet) -> Liouvillian {
    let id = Operator::identity();
    let minus_i = Complex64::new(0.0, -1.0);
    let half = Complex64::new(0.5, 0.0);

    let mut l = (kron(&id, h) - kron(&h.transpose(), &id)) * minus_i;
    for op in collapse.ops() {
        let c = op.operator();
        let cdc = c.adjoint() * c;
        l += kron(&c.conjugate(), &c);
        l -= kron(&id, &cdc) * half;
        l -= kron(&cdc.transpose(), &id) * half;
    }
    Liouvillian(l)
}

pub fn kron(a: &Operator, b: &Operator) -> SuperOperator {
    SuperOperator::from_fn(|r, c| a[(r / DIM, c / DIM)] * b[(r % DIM, c % DIM)])
}

pub fn vec(rho: &Operator) -> StateVector {
    StateVector::from_column_slice(rho.as_slice())
}

pub fn unvec(v: &StateVector) -> Operator {
    Operator::from_column_slice(v.as_slice())
}

pub(crate) fn diag_index(level: usize) -> usize {
    level * DIM + level
}
