//! Inner solver for the implicit stage relation K = L + h g(t, Y + λK).

use nalgebra::{DMatrix, DVectorViewMut, Dyn, LU};

use super::{max_norm, Allocator, InnerSolver, SplitOde, StepperConfig};
use crate::error::{Error, Result};

struct NewtonWork {
    gz: Vec<f64>,
    jac: DMatrix<f64>,
    // Perturbed argument and g value for finite-difference Jacobians.
    fd: Option<(Vec<f64>, Vec<f64>)>,
}

enum FixedPointOutcome {
    Converged,
    Stalled(f64),
}

/// Stage solver with one argument buffer, lazily allocated Newton work and
/// an LU cache for affine g.
///
/// The argument buffer doubles as the stepper's scratch for explicit
/// evaluations (it is free between solves).
pub struct StageSolver {
    config: StepperConfig,
    dim: usize,
    alloc: Allocator,
    scratch: Vec<f64>,
    newton: Option<NewtonWork>,
    lu_cache: Vec<((u64, u64), LU<f64, Dyn, Dyn>)>,
    cache_h: Option<u64>,
    escalated: bool,
    pub(crate) iterations: usize,
    pub(crate) factorizations: usize,
    pub(crate) escalations: usize,
}

impl StageSolver {
    pub fn new(dim: usize, config: StepperConfig) -> Self {
        let mut alloc = Allocator::default();
        let scratch = alloc.vector(dim);
        StageSolver {
            config,
            dim,
            alloc,
            scratch,
            newton: None,
            lu_cache: Vec::new(),
            cache_h: None,
            escalated: false,
            iterations: 0,
            factorizations: 0,
            escalations: 0,
        }
    }

    pub fn scratch(&mut self) -> &mut [f64] {
        &mut self.scratch
    }

    pub fn scratch_vectors(&self) -> usize {
        self.alloc.vectors
    }

    pub fn scratch_matrices(&self) -> usize {
        self.alloc.matrices
    }

    /// Whether fixed point has handed over to Newton (for the rest of the run).
    pub fn escalated(&self) -> bool {
        self.escalated
    }

    /// Solves K = L + h g(t, base + λK), starting from the content of `k`.
    /// `l = None` stands for L = 0.
    #[allow(clippy::too_many_arguments)]
    pub fn solve(
        &mut self,
        ode: &dyn SplitOde,
        t: f64,
        base: &[f64],
        h: f64,
        lambda: f64,
        l: Option<&[f64]>,
        k: &mut [f64],
    ) -> Result<()> {
        if h == 0.0 {
            match l {
                Some(l) => k.copy_from_slice(l),
                None => k.fill(0.0),
            }
            return Ok(());
        }
        match self.config.solver {
            InnerSolver::LinearDirect => self.linear_direct(ode, t, base, h, lambda, l, k),
            InnerSolver::Newton => self.newton(ode, t, base, h, lambda, l, k),
            InnerSolver::FixedPoint if self.escalated => self.newton(ode, t, base, h, lambda, l, k),
            InnerSolver::FixedPoint => match self.fixed_point(ode, t, base, h, lambda, l, k) {
                FixedPointOutcome::Converged => Ok(()),
                FixedPointOutcome::Stalled(residual) => {
                    if !self.config.escalate {
                        return Err(Error::NonConvergence {
                            iterations: self.config.max_iter,
                            residual,
                        });
                    }
                    self.escalated = true;
                    self.escalations += 1;
                    match l {
                        Some(l) => k.copy_from_slice(l),
                        None => k.fill(0.0),
                    }
                    self.newton(ode, t, base, h, lambda, l, k)
                }
            },
        }
    }

    /// K ← L + h g(base + λK). The previous iterate is recovered from the
    /// argument buffer as (z − base)/λ, so no second vector is needed.
    #[allow(clippy::too_many_arguments)]
    fn fixed_point(
        &mut self,
        ode: &dyn SplitOde,
        t: f64,
        base: &[f64],
        h: f64,
        lambda: f64,
        l: Option<&[f64]>,
        k: &mut [f64],
    ) -> FixedPointOutcome {
        let tol = self.config.tol;
        let mut previous = f64::INFINITY;
        let mut slow = 0;
        let mut diff = f64::INFINITY;
        for _ in 0..self.config.max_iter {
            let z = &mut self.scratch;
            for j in 0..self.dim {
                z[j] = base[j] + lambda * k[j];
            }
            ode.g(t, z, k);
            diff = 0.0;
            let mut norm = 0.0f64;
            for j in 0..self.dim {
                let old = (z[j] - base[j]) / lambda;
                let new = l.map_or(0.0, |l| l[j]) + h * k[j];
                diff = diff.max((new - old).abs());
                norm = norm.max(new.abs());
                k[j] = new;
            }
            self.iterations += 1;
            if !diff.is_finite() {
                return FixedPointOutcome::Stalled(diff);
            }
            if diff <= tol * (1.0 + norm) {
                return FixedPointOutcome::Converged;
            }
            if diff >= 0.9 * previous {
                slow += 1;
                if slow >= 5 {
                    return FixedPointOutcome::Stalled(diff);
                }
            } else {
                slow = 0;
            }
            previous = diff;
        }
        FixedPointOutcome::Stalled(diff)
    }

    #[allow(clippy::too_many_arguments)]
    fn newton(
        &mut self,
        ode: &dyn SplitOde,
        t: f64,
        base: &[f64],
        h: f64,
        lambda: f64,
        l: Option<&[f64]>,
        k: &mut [f64],
    ) -> Result<()> {
        let n = self.dim;
        if self.newton.is_none() {
            let gz = self.alloc.vector(n);
            let jac = self.alloc.matrix(n);
            self.newton = Some(NewtonWork { gz, jac, fd: None });
        }
        let tol = self.config.tol;
        let mut diff = f64::INFINITY;
        for _ in 0..self.config.max_iter {
            let z = &mut self.scratch;
            for j in 0..n {
                z[j] = base[j] + lambda * k[j];
            }
            let work = self.newton.as_mut().expect("allocated above");
            ode.g(t, z, &mut work.gz);
            work.jac.fill(0.0);
            if !ode.g_jacobian(t, z, &mut work.jac) {
                if work.fd.is_none() {
                    work.fd = Some((self.alloc.vector(n), self.alloc.vector(n)));
                }
                let (zp, gp) = work.fd.as_mut().expect("allocated above");
                zp.copy_from_slice(z);
                for c in 0..n {
                    let delta = f64::EPSILON.sqrt() * (1.0 + z[c].abs());
                    zp[c] = z[c] + delta;
                    ode.g(t, zp, gp);
                    for r in 0..n {
                        work.jac[(r, c)] = (gp[r] - work.gz[r]) / delta;
                    }
                    zp[c] = z[c];
                }
            }
            // Newton matrix I − hλ ∂g and right-hand side −F = L + h g − K.
            work.jac *= -h * lambda;
            for j in 0..n {
                work.jac[(j, j)] += 1.0;
                work.gz[j] = l.map_or(0.0, |l| l[j]) + h * work.gz[j] - k[j];
            }
            let lu = work.jac.clone().lu();
            self.factorizations += 1;
            let mut rhs = DVectorViewMut::from_slice(&mut work.gz, n);
            if !lu.solve_mut(&mut rhs) {
                return Err(Error::SingularSystem);
            }
            diff = 0.0;
            for j in 0..n {
                k[j] += work.gz[j];
                diff = diff.max(work.gz[j].abs());
            }
            self.iterations += 1;
            if !diff.is_finite() {
                break;
            }
            if diff <= tol * (1.0 + max_norm(k)) {
                return Ok(());
            }
        }
        Err(Error::NonConvergence {
            iterations: self.config.max_iter,
            residual: diff,
        })
    }

    /// For g = M y + q: (I − hλM) K = L + h g(base), one solve with a
    /// factorization cached per (λ, h).
    #[allow(clippy::too_many_arguments)]
    fn linear_direct(
        &mut self,
        ode: &dyn SplitOde,
        t: f64,
        base: &[f64],
        h: f64,
        lambda: f64,
        l: Option<&[f64]>,
        k: &mut [f64],
    ) -> Result<()> {
        let m = ode.g_linear().ok_or_else(|| {
            Error::Domain(format!("linear-direct inner solver needs an affine g, {} has none", ode.name()))
        })?;
        let n = self.dim;
        if self.cache_h != Some(h.to_bits()) {
            self.lu_cache.clear();
            self.cache_h = Some(h.to_bits());
        }
        let key = (lambda.to_bits(), h.to_bits());
        let index = match self.lu_cache.iter().position(|(k, _)| *k == key) {
            Some(i) => i,
            None => {
                let mut a = m * (-h * lambda);
                for j in 0..n {
                    a[(j, j)] += 1.0;
                }
                let lu = a.lu();
                if !lu.is_invertible() {
                    return Err(Error::SingularSystem);
                }
                self.factorizations += 1;
                self.alloc.matrices += 1;
                self.lu_cache.push((key, lu));
                self.lu_cache.len() - 1
            }
        };
        ode.g(t, base, k);
        for j in 0..n {
            k[j] = l.map_or(0.0, |l| l[j]) + h * k[j];
        }
        let mut rhs = DVectorViewMut::from_slice(k, n);
        if !self.lu_cache[index].1.solve_mut(&mut rhs) {
            return Err(Error::SingularSystem);
        }
        self.iterations += 1;
        Ok(())
    }
}
