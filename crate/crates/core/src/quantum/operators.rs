use num_complex::Complex64;

use super::{Operator, SystemParams, DIM};

/// |i⟩⟨j| for zero-based indices.
pub fn transition(i: usize, j: usize) -> Operator {
    let mut m = Operator::zeros();
    m[(i, j)] = Complex64::new(1.0, 0.0);
    m
}

/// Rotating-frame Hamiltonian (frame generator ω_l(Π₃ + Π₄)):
///
/// `diag(−δ_h/2, δ_h/2, −Δ − δ_e/2, −Δ + δ_e/2) + Ω(σ₁₃ + σ₃₁ + σ₂₄ + σ₄₂)`.
///
/// The result is real symmetric.
pub fn build_rotating_hamiltonian(p: &SystemParams) -> Operator {
    let re = |x: f64| Complex64::new(x, 0.0);
    let mut h = Operator::zeros();
    h[(0, 0)] = re(-0.5 * p.delta_h);
    h[(1, 1)] = re(0.5 * p.delta_h);
    h[(2, 2)] = re(-p.laser_detuning - 0.5 * p.delta_e);
    h[(3, 3)] = re(-p.laser_detuning + 0.5 * p.delta_e);
    for (g, e) in [(0, 2), (1, 3)] {
        h[(g, e)] = re(p.rabi);
        h[(e, g)] = re(p.rabi);
    }
    h
}

/// One Lindblad channel `√rate · |target⟩⟨source|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapseOp {
    /// Zero-based level the channel feeds.
    pub target: usize,
    /// Zero-based level the channel drains.
    pub source: usize,
    pub rate: f64,
}

impl CollapseOp {
    pub fn new(target: usize, source: usize, rate: f64) -> Self {
        assert!(target < DIM && source < DIM, "level index out of range");
        assert!(rate >= 0.0, "negative collapse rate");
        Self { target, source, rate }
    }

    /// The operator with the amplitude √rate folded in.
    pub fn operator(&self) -> Operator {
        transition(self.target, self.source) * Complex64::new(self.rate.sqrt(), 0.0)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CollapseSet(Vec<CollapseOp>);

impl CollapseSet {
    pub fn new(ops: Vec<CollapseOp>) -> Self {
        Self(ops)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn ops(&self) -> &[CollapseOp] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total rate out of zero-based `level`.
    pub fn decay_rate(&self, level: usize) -> f64 {
        self.0.iter().filter(|c| c.source == level).map(|c| c.rate).sum()
    }
}

/// Radiative decay of both trion levels into both ground levels at γ each,
/// plus symmetric spin flips at 1/(2T1) when a spin lifetime is set.
pub fn build_collapse_operators(p: &SystemParams) -> CollapseSet {
    let mut ops = vec![
        CollapseOp::new(0, 2, p.gamma),
        CollapseOp::new(1, 2, p.gamma),
        CollapseOp::new(0, 3, p.gamma),
        CollapseOp::new(1, 3, p.gamma),
    ];
    if let Some(t1) = p.t1_spin {
        let flip = 0.5 / t1;
        ops.push(CollapseOp::new(0, 1, flip));
        ops.push(CollapseOp::new(1, 0, flip));
    }
    CollapseSet(ops)
}
