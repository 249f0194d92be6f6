//! Dual semidefinite program of total-variation minimization,
//!
//! ```text
//! maximize  Re⟨ŷ, u⟩
//! s.t.      [[M, u], [uᴴ, 1]] ⪰ 0,   Σ_i M[i, i+j] = δ_j  (j = 0..2fc)
//! ```
//!
//! solved by ADMM on the stacked Hermitian matrix `X = [[M, u], [uᴴ, 1]]`:
//! the affine step projects onto the diagonal-sum constraints (plus the
//! linear objective), the cone step projects onto the PSD cone through a
//! Hermitian eigendecomposition. The penalty is rebalanced from the ratio of
//! primal to dual residuals and the affine iterate is over-relaxed.

use num_complex::Complex64;

use crate::linalg::{min_hermitian_eigenvalue, psd_projection, CMatrix};
use crate::series::FourierCoeffVector;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Stopping rules and step parameters for [`solve_dual_sdp`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpOptions {
    /// Bound on both `‖X - Z‖_F` (distance of the affine iterate from the
    /// PSD cone) and the scaled dual residual.
    pub feasibility_tol: f64,
    /// Relative objective change tolerated over `stall_window` iterations.
    pub stall_tol: f64,
    pub stall_window: usize,
    pub max_iterations: usize,
    /// Over-relaxation factor in `(0, 2)`.
    pub relaxation: f64,
    pub initial_penalty: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-8,
            stall_tol: 1e-10,
            stall_window: 50,
            max_iterations: 200_000,
            relaxation: 1.6,
            initial_penalty: 1.0,
        }
    }
}

/// Output of the dual solve. `u` and `M` are indexed `k = -fc..=fc`.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub fc: usize,
    pub u: Vec<Complex64>,
    pub m: CMatrix,
    /// `Re⟨ŷ, u⟩`.
    pub objective: f64,
    /// Complementary-slackness violation `|⟨Y, Z⟩|` of the cone multiplier.
    pub primal_dual_gap_estimate: f64,
    pub iterations: usize,
    pub converged: bool,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

impl SdpSolution {
    /// The stacked matrix `[[M, u], [uᴴ, 1]]`.
    pub fn block(&self) -> CMatrix {
        let n = self.u.len();
        let mut x = CMatrix::zeros(n + 1, n + 1);
        x.view_mut((0, 0), (n, n)).copy_from(&self.m);
        for (i, &ui) in self.u.iter().enumerate() {
            x[(i, n)] = ui;
            x[(n, i)] = ui.conj();
        }
        x[(n, n)] = ONE;
        x
    }

    /// `‖M - Mᴴ‖_max`.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.m.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.m[(i, j)] - self.m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the stacked block.
    pub fn min_block_eigenvalue(&self) -> f64 {
        let b = self.block();
        let h = (&b + b.adjoint()).scale(0.5);
        min_hermitian_eigenvalue(&h)
    }

    /// `max_j |Σ_i M[i, i+j] - δ_j|`.
    pub fn diagonal_sum_residual(&self) -> f64 {
        let n = self.m.nrows();
        (0..n)
            .map(|j| {
                let s: Complex64 = (0..n - j).map(|i| self.m[(i, i + j)]).sum();
                let target = if j == 0 { ONE } else { ZERO };
                (s - target).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `Σ_k u_k e^{j k ω0 t}` evaluated at `z = e^{j ω0 t}`.
    pub fn dual_polynomial_at(&self, omega0: f64, t: f64) -> Complex64 {
        trig_poly(&self.u, self.fc, omega0, t).0
    }
}

/// Value, first and second `t`-derivative of `Σ_k u_k e^{j k ω0 t}`.
pub(crate) fn trig_poly(
    u: &[Complex64],
    fc: usize,
    omega0: f64,
    t: f64,
) -> (Complex64, Complex64, Complex64) {
    let mut q = ZERO;
    let mut dq = ZERO;
    let mut ddq = ZERO;
    for (i, &uk) in u.iter().enumerate() {
        let w = (i as f64 - fc as f64) * omega0;
        let term = uk * Complex64::from_polar(1.0, w * t);
        q += term;
        dq += term * Complex64::new(0.0, w);
        ddq -= term * (w * w);
    }
    (q, dq, ddq)
}

/// Maximizes `Re⟨ŷ, u⟩` over the dual feasible set.
pub fn solve_dual_sdp(y_hat: &FourierCoeffVector, opts: &SdpOptions) -> SdpSolution {
    let n = y_hat.values().len();
    solve_masked(y_hat, &vec![true; n], opts)
}

/// Dual solve in which `u_m` is pinned to zero wherever `constrained[m]` is
/// false, i.e. the corresponding coefficient constraints are dropped from the
/// primal problem.
pub fn solve_dual_sdp_masked(
    y_hat: &FourierCoeffVector,
    constrained: &[bool],
    opts: &SdpOptions,
) -> SdpSolution {
    assert_eq!(constrained.len(), y_hat.values().len(), "mask length");
    solve_masked(y_hat, constrained, opts)
}

struct AffineSet<'a> {
    n: usize,
    constrained: &'a [bool],
}

impl AffineSet<'_> {
    /// Frobenius projection of a Hermitian matrix onto the diagonal-sum
    /// constraints, the unit corner and the pinned entries of `u`.
    fn project(&self, x: &mut CMatrix) {
        let n = self.n;
        for j in 0..n {
            let len = n - j;
            let s: Complex64 = (0..len).map(|i| x[(i, i + j)]).sum();
            let target = if j == 0 { ONE } else { ZERO };
            let shift = (target - s) / len as f64;
            for i in 0..len {
                if j == 0 {
                    x[(i, i)] = Complex64::new(x[(i, i)].re + shift.re, 0.0);
                } else {
                    let v = x[(i, i + j)] + shift;
                    x[(i, i + j)] = v;
                    x[(i + j, i)] = v.conj();
                }
            }
        }
        for (i, &keep) in self.constrained.iter().enumerate() {
            if !keep {
                x[(i, n)] = ZERO;
                x[(n, i)] = ZERO;
            }
        }
        x[(n, n)] = ONE;
    }
}

fn hermitian_part(x: &CMatrix) -> CMatrix {
    (x + x.adjoint()).scale(0.5)
}

fn project_psd(x: &CMatrix) -> CMatrix {
    psd_projection(x)
}

fn frob_inner(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

fn solve_masked(y_hat: &FourierCoeffVector, constrained: &[bool], opts: &SdpOptions) -> SdpSolution {
    let fc = y_hat.fc();
    let n = 2 * fc + 1;
    let size = n + 1;
    let data: Vec<Complex64> = y_hat
        .values()
        .iter()
        .zip(constrained)
        .map(|(&v, &keep)| if keep { v } else { ZERO })
        .collect();
    // The maximizer is invariant to positive scaling of ŷ; solve at unit scale.
    let scale = data.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let inv_scale = if scale > 0.0 { 1.0 / scale } else { 0.0 };

    // Linear cost ⟨C, X⟩ = -Re Σ conj(u_m) ŷ_m.
    let mut cost = CMatrix::zeros(size, size);
    for (i, &v) in data.iter().enumerate() {
        cost[(i, n)] = -v * (0.5 * inv_scale);
        cost[(n, i)] = -v.conj() * (0.5 * inv_scale);
    }
    let affine = AffineSet { n, constrained };

    let mut z = CMatrix::zeros(size, size);
    for i in 0..n {
        z[(i, i)] = Complex64::new(1.0 / n as f64, 0.0);
    }
    z[(n, n)] = ONE;
    let mut dual = CMatrix::zeros(size, size);
    let mut x = z.clone();
    let mut rho = opts.initial_penalty;
    let alpha = opts.relaxation;

    let objective_of = |x: &CMatrix| -> f64 {
        (0..n)
            .map(|i| (x[(i, n)].conj() * data[i]).re)
            .sum::<f64>()
    };
    let mut history: Vec<f64> = Vec::with_capacity(opts.stall_window + 1);
    let mut iterations = 0;
    let mut converged = false;
    let mut primal_residual = f64::INFINITY;
    let mut dual_residual = f64::INFINITY;

    while iterations < opts.max_iterations {
        iterations += 1;
        x = &z - &dual - cost.scale(1.0 / rho);
        x = hermitian_part(&x);
        affine.project(&mut x);
        let relaxed = x.scale(alpha) + z.scale(1.0 - alpha);
        let z_next = project_psd(&(&relaxed + &dual));
        dual += &relaxed - &z_next;
        primal_residual = (&x - &z_next).norm();
        dual_residual = rho * (&z_next - &z).norm();
        z = z_next;

        let obj = objective_of(&x);
        history.push(obj);
        if history.len() > opts.stall_window + 1 {
            history.remove(0);
        }
        let stalled = history.len() == opts.stall_window + 1
            && (obj - history[0]).abs() <= opts.stall_tol * obj.abs().max(1.0);
        if primal_residual <= opts.feasibility_tol
            && dual_residual <= opts.feasibility_tol
            && stalled
        {
            converged = true;
            break;
        }
        if iterations % 10 == 0 {
            if primal_residual > 10.0 * dual_residual {
                rho *= 2.0;
                dual.scale_mut(0.5);
            } else if dual_residual > 10.0 * primal_residual {
                rho *= 0.5;
                dual.scale_mut(2.0);
            }
        }
    }

    let gap = (rho * frob_inner(&dual, &z)).abs() * scale;
    let u: Vec<Complex64> = (0..n).map(|i| x[(i, n)]).collect();
    let m = x.view((0, 0), (n, n)).into_owned();
    let objective = u
        .iter()
        .zip(y_hat.values())
        .zip(constrained)
        .filter(|(_, &keep)| keep)
        .map(|((ui, yi), _)| (ui.conj() * yi).re)
        .sum();
    SdpSolution {
        fc,
        u,
        m,
        objective,
        primal_dual_gap_estimate: gap,
        iterations,
        converged,
        primal_residual,
        dual_residual,
    }
}
