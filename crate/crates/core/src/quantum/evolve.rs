//! Time integration of the master equation, used as an independent check on
//! the direct steady-state solve.
//!
//! The right-hand side is evaluated straight from H and the collapse
//! operators, never through the Liouvillian superoperator. Because the
//! equation is linear and autonomous, one classical RK4 step is a fixed
//! linear map M. Stepping is done by repeated squaring of M, so 2^k steps
//! cost k matrix products and slow pumping time scales stay cheap.

use num_complex::Complex64;

use super::liouvillian::{diag_index, unvec, vec};
use super::{CollapseSet, DensityMatrix, Operator, SolverError, SuperOperator, DIM, SUPER_DIM};

/// ‖M^(2n) − M^n‖_max below which the stride is treated as the projector onto
/// the stationary manifold.
const PROJECTOR_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    /// RK4 step in ns.
    pub dt: f64,
    /// Convergence threshold on max |dρ/dt| (rad/ns).
    pub tol: f64,
    /// Upper bound on the number of RK4 steps.
    pub max_steps: u64,
}

impl EvolveOptions {
    pub fn new(dt: f64, tol: f64) -> Self {
        Self { dt, tol, max_steps: 1 << 44 }
    }

    /// Step chosen so that `dt · scale = 0.05` for the given generator.
    pub fn for_system(h: &Operator, collapse: &CollapseSet) -> Self {
        Self::new(0.05 / fastest_rate(h, collapse), 1e-10)
    }
}

/// dρ/dt = −i[H, ρ] + Σ_j (c_j ρ c_j† − ½{c_j†c_j, ρ}).
pub fn master_rhs(h: &Operator, collapse: &CollapseSet, rho: &Operator) -> Operator {
    let mut out = (h * rho - rho * h) * Complex64::new(0.0, -1.0);
    for op in collapse.ops() {
        // c = √γ |t⟩⟨s|: cρc† = γ ρ_ss |t⟩⟨t|, c†c = γ |s⟩⟨s|.
        let (t, s, g) = (op.target, op.source, op.rate);
        out[(t, t)] += rho[(s, s)] * g;
        for k in 0..DIM {
            out[(s, k)] -= rho[(s, k)] * (0.5 * g);
            out[(k, s)] -= rho[(k, s)] * (0.5 * g);
        }
    }
    out
}

pub fn rk4_step(h: &Operator, collapse: &CollapseSet, rho: &Operator, dt: f64) -> Operator {
    let half = Complex64::new(0.5 * dt, 0.0);
    let full = Complex64::new(dt, 0.0);
    let k1 = master_rhs(h, collapse, rho);
    let k2 = master_rhs(h, collapse, &(rho + k1 * half));
    let k3 = master_rhs(h, collapse, &(rho + k2 * half));
    let k4 = master_rhs(h, collapse, &(rho + k3 * full));
    rho + (k1 + (k2 + k3) * Complex64::new(2.0, 0.0) + k4) * Complex64::new(dt / 6.0, 0.0)
}

/// Largest of max |H_ij| and the largest single-level decay rate.
pub fn fastest_rate(h: &Operator, collapse: &CollapseSet) -> f64 {
    let hmax = h.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let rmax = (0..DIM).map(|l| collapse.decay_rate(l)).fold(0.0, f64::max);
    hmax.max(rmax).max(f64::MIN_POSITIVE)
}

/// Integrates from `rho0` until max |dρ/dt| < `tol` and the propagation
/// stride has settled onto the stationary projector.
pub fn evolve_to_steady_state(
    h: &Operator,
    collapse: &CollapseSet,
    rho0: &DensityMatrix,
    opts: EvolveOptions,
) -> Result<DensityMatrix, SolverError> {
    rho0.check()?;
    if !(opts.dt > 0.0) || opts.dt * fastest_rate(h, collapse) >= 0.1 {
        return Err(SolverError::InvalidParams(format!(
            "time step {} does not resolve the fastest scale {}",
            opts.dt,
            fastest_rate(h, collapse)
        )));
    }

    let mut rho = *rho0.matrix();
    let mut residual = max_abs(&master_rhs(h, collapse, &rho));
    if residual == 0.0 {
        return Ok(*rho0);
    }

    let mut stride = one_step_map(h, collapse, opts.dt);
    let mut stride_len: u64 = 1;
    let mut steps: u64 = 0;
    loop {
        rho = unvec(&(stride * vec(&rho)));
        steps += stride_len;
        residual = max_abs(&master_rhs(h, collapse, &rho));

        let mut next = stride * stride;
        enforce_trace_preservation(&mut next);
        let settled = (next - stride).iter().map(|z| z.norm()).fold(0.0, f64::max) < PROJECTOR_TOL;
        if residual < opts.tol && settled {
            break;
        }
        if steps.saturating_add(2 * stride_len) > opts.max_steps {
            return Err(SolverError::NoConvergence { steps, residual });
        }
        stride = next;
        stride_len *= 2;
    }

    let rho = (rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let trace = rho.trace();
    Ok(DensityMatrix::new_unchecked(rho / trace))
}

/// The RK4 step as a 16×16 matrix on column-stacked density matrices.
fn one_step_map(h: &Operator, collapse: &CollapseSet, dt: f64) -> SuperOperator {
    let mut map = SuperOperator::zeros();
    for k in 0..SUPER_DIM {
        let mut basis = Operator::zeros();
        basis[(k % DIM, k / DIM)] = Complex64::new(1.0, 0.0);
        let stepped = vec(&rk4_step(h, collapse, &basis, dt));
        map.set_column(k, &stepped);
    }
    enforce_trace_preservation(&mut map);
    map
}

/// Removes rounding drift from the trace row of a propagator, which would
/// otherwise be amplified exponentially by repeated squaring.
fn enforce_trace_preservation(map: &mut SuperOperator) {
    for k in 0..SUPER_DIM {
        let target = if (0..DIM).any(|r| diag_index(r) == k) { 1.0 } else { 0.0 };
        let sum: Complex64 = (0..DIM).map(|r| map[(diag_index(r), k)]).sum();
        let err = (sum - Complex64::new(target, 0.0)) / DIM as f64;
        for r in 0..DIM {
            map[(diag_index(r), k)] -= err;
        }
    }
}

fn max_abs(m: &Operator) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
