//! Spectra of Schrödinger-type operators H = -Δ - V(x).
//!
//! The potentials of interest come from time-averaged reaction slopes: the
//! linearization of the averaged problem at zero is -Δ - α̂ and at infinity
//! -Δ - ω̂. What the solvability analysis consumes is not the raw spectrum
//! but derived integers and gaps:
//!
//! * `m_minus`: the number of negative eigenvalues below the essential
//!   spectrum threshold (the Morse index of the quadratic form);
//! * `kernel_gap`: the distance from 0 to the reported spectrum, which must
//!   be positive for the index to be stable (nonresonance);
//! * the parity (-1)^{m_minus}, compared between the operators at zero and
//!   at infinity to certify a sign change of the relevant degree.
//!
//! Two eigensolvers are provided and cross-checked: a dense solve in the
//! sine basis (one dimension) and a matrix-free block LOBPCG iteration with
//! a shifted-inverse-Laplacian preconditioner (any dimension).

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::grid::{Field, SpatialGrid};

/// Matrix-free handle for H = -Δ - V with Dirichlet boundary conditions.
///
/// The Laplacian acts diagonally in the grid's sine basis (with the grid's
/// stencil or continuum symbol); the potential acts pointwise. H is symmetric
/// with respect to the grid L² inner product.
pub struct SchrodingerOperator {
    grid: Arc<SpatialGrid>,
    potential: Field,
}

impl SchrodingerOperator {
    pub fn new(potential: Field) -> Self {
        let grid = Arc::clone(potential.grid());
        Self { grid, potential }
    }

    pub fn grid(&self) -> &Arc<SpatialGrid> {
        &self.grid
    }

    pub fn potential(&self) -> &Field {
        &self.potential
    }

    /// H u for raw grid values, writing into `out`.
    fn apply_raw(&self, input: &[f64], out: &mut [f64]) {
        // -Δ part: multiply mode k by +μ_k.
        out.copy_from_slice(input);
        self.grid
            .apply_spectral_multiplier(out, self.grid.mode_eigenvalues());
        for ((o, u), v) in out.iter_mut().zip(input).zip(self.potential.values()) {
            *o -= v * u;
        }
    }

    pub fn apply(&self, u: &Field) -> Result<Field> {
        if !u.grid().same_as(&self.grid) {
            return Err(Error::GridMismatch);
        }
        let mut out = vec![0.0; u.values().len()];
        self.apply_raw(u.values(), &mut out);
        self.grid.field_from_values(out)
    }

    /// Rayleigh quotient <Hu, u>/<u, u>.
    pub fn rayleigh(&self, u: &Field) -> Result<f64> {
        let hu = self.apply(u)?;
        Ok(hu.inner_l2(u)? / u.inner_l2(u)?)
    }

    /// max |<Hu,v> - <u,Hv>| / scale over random unit pairs; roundoff-sized
    /// for a correctly assembled operator.
    pub fn symmetry_defect(&self, pairs: usize, seed: u64) -> Result<f64> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let dist = Uniform::new(-1.0, 1.0);
        let mut worst = 0.0f64;
        for _ in 0..pairs {
            let u = self.random_unit_field(&mut rng, &dist)?;
            let v = self.random_unit_field(&mut rng, &dist)?;
            let hu = self.apply(&u)?;
            let hv = self.apply(&v)?;
            let lhs = hu.inner_l2(&v)?;
            let rhs = u.inner_l2(&hv)?;
            let scale = hu.norm_l2().max(hv.norm_l2()).max(1.0);
            worst = worst.max((lhs - rhs).abs() / scale);
        }
        Ok(worst)
    }

    fn random_unit_field(
        &self,
        rng: &mut ChaCha12Rng,
        dist: &Uniform<f64>,
    ) -> Result<Field> {
        let values: Vec<f64> = (0..self.grid.len()).map(|_| dist.sample(rng)).collect();
        let f = self.grid.field_from_values(values)?;
        let n = f.norm_l2();
        Ok(f.scaled(1.0 / n))
    }
}

/// One converged eigenpair, eigenfunction normalized to unit L² norm.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    pub function: Field,
}

/// Lowest `k` eigenpairs by the solver suited to the grid dimension: dense
/// in one dimension, LOBPCG otherwise.
///
/// Every returned pair satisfies ‖Hψ - λψ‖ ≤ tol·max(1,|λ|) for unit ψ.
pub fn eigen_lowest(
    op: &SchrodingerOperator,
    k: usize,
    tol: f64,
    seed: u64,
) -> Result<Vec<EigenPair>> {
    if op.grid().dim() == 1 {
        eigen_lowest_dense(op, k)
    } else {
        eigen_lowest_lobpcg(op, k, tol, 500, seed)
    }
}

/// Dense solve in the sine basis (one-dimensional grids only): H is
/// assembled column by column and diagonalized directly. Serves as the
/// reference route for the iterative solver.
pub fn eigen_lowest_dense(op: &SchrodingerOperator, k: usize) -> Result<Vec<EigenPair>> {
    let grid = op.grid();
    if grid.dim() != 1 {
        return Err(Error::InvalidArgument(
            "dense eigensolver supports one-dimensional grids only".to_string(),
        ));
    }
    let m = grid.len();
    if k == 0 || k > m {
        return Err(Error::InvalidArgument(format!(
            "requested {k} eigenpairs from an operator of rank {m}"
        )));
    }
    // Column j of H in the sine basis: μ_j e_j minus the sine coefficients
    // of V·φ_j.
    let mut h = DMatrix::<f64>::zeros(m, m);
    let mut coeff = vec![0.0; m];
    for j in 0..m {
        coeff.iter_mut().for_each(|c| *c = 0.0);
        coeff[j] = 1.0;
        let phi = grid.field_from_coefficients(&coeff)?;
        let vphi = phi.pointwise_mul(op.potential())?;
        let vcoeff = vphi.sine_coefficients();
        for i in 0..m {
            h[(i, j)] = -vcoeff[i];
        }
        h[(j, j)] += grid.mode_eigenvalues()[j];
    }
    // Symmetrize away the roundoff asymmetry before factorizing.
    let h = (&h + h.transpose()) * 0.5;
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut out = Vec::with_capacity(k);
    for &idx in order.iter().take(k) {
        let col: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
        let f = grid.field_from_coefficients(&col)?;
        let n = f.norm_l2();
        out.push(EigenPair {
            value: eig.eigenvalues[idx],
            function: f.scaled(1.0 / n),
        });
    }
    Ok(out)
}

/// Matrix-free block LOBPCG for the lowest `k` eigenpairs, preconditioned by
/// (-Δ + σ)^{-1} with σ chosen from the potential's range.
pub fn eigen_lowest_lobpcg(
    op: &SchrodingerOperator,
    k: usize,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<Vec<EigenPair>> {
    let grid = op.grid();
    let n = grid.len();
    if k == 0 || 3 * (k + 2) > n {
        return Err(Error::InvalidArgument(format!(
            "requested {k} eigenpairs from an operator of rank {n}"
        )));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eigensolver tolerance must be positive, got {tol}"
        )));
    }
    // Two guard vectors sharpen the Ritz values of the requested block.
    let block = k + 2;

    let sup_v = op
        .potential()
        .values()
        .iter()
        .fold(0.0f64, |acc, v| acc.max(*v));
    let sigma = 1.0 + sup_v;
    let precond: Vec<f64> = grid
        .mode_eigenvalues()
        .iter()
        .map(|mu| 1.0 / (mu + sigma))
        .collect();

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let dist = Uniform::new(-1.0, 1.0);
    let mut x: Vec<Vec<f64>> = (0..block)
        .map(|_| (0..n).map(|_| dist.sample(&mut rng)).collect())
        .collect();
    orthonormalize(&mut x, 1e-12)?;
    let mut p: Vec<Vec<f64>> = Vec::new();

    let mut last_residual = f64::INFINITY;
    for _iter in 0..max_iter {
        // Rayleigh quotients and residuals of the current block.
        let ax: Vec<Vec<f64>> = x.iter().map(|col| apply_vec(op, col)).collect();
        let lambda: Vec<f64> = x.iter().zip(&ax).map(|(xc, axc)| dot(xc, axc)).collect();
        let mut residuals: Vec<Vec<f64>> = Vec::with_capacity(block);
        let mut worst = 0.0f64;
        for i in 0..block {
            let r: Vec<f64> = ax[i]
                .iter()
                .zip(&x[i])
                .map(|(a, xv)| a - lambda[i] * xv)
                .collect();
            if i < k {
                worst = worst.max(norm(&r) / lambda[i].abs().max(1.0));
            }
            residuals.push(r);
        }
        last_residual = worst;
        if worst <= tol {
            let mut pairs: Vec<EigenPair> = Vec::with_capacity(k);
            let mut order: Vec<usize> = (0..block).collect();
            order.sort_by(|&a, &b| lambda[a].total_cmp(&lambda[b]));
            for &i in order.iter().take(k) {
                let f = grid.field_from_values(x[i].clone())?;
                let nrm = f.norm_l2();
                pairs.push(EigenPair {
                    value: lambda[i],
                    function: f.scaled(1.0 / nrm),
                });
            }
            return Ok(pairs);
        }

        // Preconditioned residuals.
        let mut w: Vec<Vec<f64>> = residuals;
        for col in &mut w {
            grid.apply_spectral_multiplier(col, &precond);
        }

        // Rayleigh-Ritz on span[X, W, P].
        let mut basis = Vec::with_capacity(3 * block);
        basis.extend(x.iter().cloned());
        basis.extend(w.into_iter());
        basis.extend(p.iter().cloned());
        orthonormalize(&mut basis, 1e-10)?;
        let s = basis.len();
        if s < block {
            return Err(Error::EigenNoConvergence {
                iterations: _iter,
                residual: worst,
            });
        }
        let abasis: Vec<Vec<f64>> = basis.iter().map(|col| apply_vec(op, col)).collect();
        let mut hs = DMatrix::<f64>::zeros(s, s);
        for i in 0..s {
            for j in i..s {
                let v = dot(&basis[i], &abasis[j]);
                hs[(i, j)] = v;
                hs[(j, i)] = v;
            }
        }
        let eig = hs.symmetric_eigen();
        let mut order: Vec<usize> = (0..s).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        let ritz = |coeffs: &DVector<f64>, skip_x: bool| -> Vec<f64> {
            let mut out = vec![0.0; n];
            for (bi, col) in basis.iter().enumerate() {
                if skip_x && bi < block {
                    continue;
                }
                let c = coeffs[bi];
                if c != 0.0 {
                    for (o, v) in out.iter_mut().zip(col) {
                        *o += c * v;
                    }
                }
            }
            out
        };

        let mut x_new = Vec::with_capacity(block);
        let mut p_new = Vec::with_capacity(block);
        for &idx in order.iter().take(block) {
            let c = eig.eigenvectors.column(idx).into_owned();
            x_new.push(ritz(&c, false));
            p_new.push(ritz(&c, true));
        }
        orthonormalize(&mut x_new, 1e-12)?;
        let _ = orthonormalize(&mut p_new, 1e-8);
        x = x_new;
        p = p_new;
    }
    Err(Error::EigenNoConvergence {
        iterations: max_iter,
        residual: last_residual,
    })
}

fn apply_vec(op: &SchrodingerOperator, input: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; input.len()];
    op.apply_raw(input, &mut out);
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Modified Gram-Schmidt with one reorthogonalization pass; drops columns
/// whose projection falls below `drop_tol` of their original norm.
fn orthonormalize(cols: &mut Vec<Vec<f64>>, drop_tol: f64) -> Result<()> {
    let mut kept: Vec<Vec<f64>> = Vec::with_capacity(cols.len());
    for mut col in cols.drain(..) {
        let original = norm(&col).max(f64::MIN_POSITIVE);
        for _pass in 0..2 {
            for q in &kept {
                let c = dot(q, &col);
                for (cv, qv) in col.iter_mut().zip(q) {
                    *cv -= c * qv;
                }
            }
        }
        let remaining = norm(&col);
        if remaining > drop_tol * original && remaining > 0.0 {
            let inv = 1.0 / remaining;
            col.iter_mut().for_each(|v| *v *= inv);
            kept.push(col);
        }
    }
    if kept.is_empty() {
        return Err(Error::KrylovBreakdown(
            "orthonormalization lost every direction".to_string(),
        ));
    }
    *cols = kept;
    Ok(())
}

/// Digest of one operator's low spectrum relative to its essential
/// spectrum threshold.
#[derive(Debug, Clone)]
pub struct SpectralReport {
    /// Eigenvalues certified below the essential threshold (ascending).
    pub eigenvalues: Vec<f64>,
    /// Computed values within the safety margin of the threshold; reported
    /// but not certified as discrete spectrum.
    pub discarded: Vec<f64>,
    /// Count of certified eigenvalues below -gap_tol.
    pub m_minus: usize,
    /// Distance from 0 to the reported spectrum, capped by the threshold.
    pub kernel_gap: f64,
    /// Lower bound of the essential spectrum (from the nondecaying slope).
    pub essential_lower_bound: f64,
    /// Width of the zero-neighborhood treated as resonant.
    pub gap_tol: f64,
    /// True when the kernel gap is within gap_tol: index counts near 0 are
    /// unreliable and parity comparisons must be refused.
    pub resonant: bool,
}

impl SpectralReport {
    /// (-1)^{m_minus}.
    pub fn parity(&self) -> i32 {
        if self.m_minus % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

/// Computes the low spectrum of H = -Δ - V and classifies it against the
/// essential spectrum threshold.
///
/// `essential_lower_bound` must be positive: it is the uniform coercivity
/// margin of the nondecaying slope part, below which the discrete spectrum
/// can be trusted on the truncated domain. Eigenvalues within one part in
/// 10³ of the threshold are reported as `discarded` rather than certified.
/// `gap_tol` defaults to threshold·10⁻⁶.
pub fn analyze_spectrum(
    op: &SchrodingerOperator,
    essential_lower_bound: f64,
    k: usize,
    tol: f64,
    gap_tol: Option<f64>,
    seed: u64,
) -> Result<SpectralReport> {
    if !(essential_lower_bound.is_finite() && essential_lower_bound > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "essential spectrum threshold must be positive, got {essential_lower_bound}; \
             a nonpositive threshold means the coercivity hypothesis already fails"
        )));
    }
    let gap_tol = match gap_tol {
        Some(g) => {
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "gap tolerance must be positive, got {g}"
                )));
            }
            g
        }
        None => 1e-6 * essential_lower_bound,
    };
    let pairs = eigen_lowest(op, k, tol, seed)?;
    let margin = 1e-3 * essential_lower_bound;
    let cutoff = essential_lower_bound - margin;
    let mut eigenvalues = Vec::new();
    let mut discarded = Vec::new();
    for pair in &pairs {
        if pair.value < cutoff {
            eigenvalues.push(pair.value);
        } else {
            discarded.push(pair.value);
        }
    }
    let m_minus = eigenvalues.iter().filter(|v| **v < -gap_tol).count();
    let kernel_gap = eigenvalues
        .iter()
        .fold(essential_lower_bound, |acc, v| acc.min(v.abs()));
    Ok(SpectralReport {
        eigenvalues,
        discarded,
        m_minus,
        kernel_gap,
        essential_lower_bound,
        gap_tol,
        resonant: kernel_gap <= gap_tol,
    })
}

/// Outcome of comparing the index parity of the operators at zero and at
/// infinity.
#[derive(Debug, Clone)]
pub struct ParityOutcome {
    pub m_minus_zero: usize,
    pub m_minus_infinity: usize,
    /// True when (-1)^{m_minus} differs between the two operators — the sign
    /// change that forces a nontrivial solution.
    pub differs: bool,
}

/// Compares index parities, refusing when either spectrum is resonant
/// (an eigenvalue within gap_tol of 0 makes the count unstable).
pub fn parity_condition(zero: &SpectralReport, infinity: &SpectralReport) -> Result<ParityOutcome> {
    if zero.resonant {
        return Err(Error::InvalidArgument(format!(
            "operator at zero is resonant (kernel gap {:.3e} <= tolerance {:.3e}); \
             refusing the parity comparison",
            zero.kernel_gap, zero.gap_tol
        )));
    }
    if infinity.resonant {
        return Err(Error::InvalidArgument(format!(
            "operator at infinity is resonant (kernel gap {:.3e} <= tolerance {:.3e}); \
             refusing the parity comparison",
            infinity.kernel_gap, infinity.gap_tol
        )));
    }
    Ok(ParityOutcome {
        m_minus_zero: zero.m_minus,
        m_minus_infinity: infinity.m_minus,
        differs: zero.parity() != infinity.parity(),
    })
}
