//! SUnSAL: alternating-direction solver for the CLS and CSR problems.
//!
//! Each iteration solves an equality-constrained quadratic for `x` using a
//! precomputed factorization of `B = AᵀA + μI`, then applies a (nonnegative)
//! soft threshold to get `u`, then updates the scaled dual `d`. CLS is CSR
//! with λ = 0; there is no separate code path.

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, DenseVector, SpdFactorization};
use crate::model::{
    objective, validate, ReturnIterate, SolveResult, SolverConfig, SpectralLibrary,
};
use crate::prox::{soft_threshold_in_place, soft_threshold_nonneg_in_place};
use crate::scalar::{lit, Real};

/// Iterate magnitude beyond which a run is declared divergent. A divergent
/// auxiliary sequence signals an unsolvable problem instance.
pub(crate) const DIVERGENCE_GUARD: f64 = 1e12;

/// Precomputed per-(A, μ, y) quantities, immutable and shareable across
/// threads. The factorization part depends only on (A, μ), so a workspace
/// serves every λ in a sweep; `aty` ties it to one observation.
#[derive(Debug, Clone)]
pub struct SunsalWorkspace<T> {
    /// Explicit `B⁻¹`, applied as a matvec in the hot loop.
    binv: DenseMatrix<T>,
    /// `C = B⁻¹1 / (1ᵀB⁻¹1)`; `None` when the sum constraint is off
    /// (equivalent to `C = 0`).
    c_vec: Option<DenseVector<T>>,
    aty: DenseVector<T>,
    inv_one_b_one: T,
    mu: T,
}

impl<T: Real> SunsalWorkspace<T> {
    pub fn prepare(
        lib: &SpectralLibrary<T>,
        y: &DenseVector<T>,
        cfg: &SolverConfig<T>,
    ) -> Result<Self> {
        validate(lib, y, cfg)?;
        let b = lib.matrix().gram_plus_diag(cfg.mu);
        let binv = SpdFactorization::factorize(&b)?.inverse();
        let n = lib.signatures();
        let binv_one = binv.matvec(&DenseVector::from_elem(n, T::one()))?;
        let one_b_one = binv_one.sum();
        let c_vec = cfg
            .enforce_asc
            .then(|| binv_one.scale(one_b_one.recip()));
        Ok(Self {
            binv,
            c_vec,
            aty: lib.matrix().matvec_t(y)?,
            inv_one_b_one: one_b_one.recip(),
            mu: cfg.mu,
        })
    }

    /// Reuses the (A, μ)-dependent factorization for a new observation.
    pub fn with_observation(
        &self,
        lib: &SpectralLibrary<T>,
        y: &DenseVector<T>,
    ) -> Result<Self> {
        let mut ws = self.clone();
        ws.aty = lib.matrix().matvec_t(y)?;
        Ok(ws)
    }

    pub fn c_vec(&self) -> Option<&DenseVector<T>> {
        self.c_vec.as_ref()
    }

    pub fn aty(&self) -> &DenseVector<T> {
        &self.aty
    }

    /// `(1ᵀB⁻¹1)⁻¹`.
    pub fn inv_one_b_one(&self) -> T {
        self.inv_one_b_one
    }

    pub fn mu(&self) -> T {
        self.mu
    }
}

/// The ADMM triple.
#[derive(Debug, Clone)]
pub struct IterateState<T> {
    pub x: DenseVector<T>,
    pub u: DenseVector<T>,
    pub d: DenseVector<T>,
}

/// Minimizer of `½‖Ax−y‖² + (μ/2)‖x−u−d‖²` subject to `1ᵀx = 1` when the
/// sum constraint is on; the unconstrained minimizer `B⁻¹w` otherwise.
pub fn x_update<T: Real>(
    ws: &SunsalWorkspace<T>,
    u: &DenseVector<T>,
    d: &DenseVector<T>,
    mu: T,
) -> Result<DenseVector<T>> {
    let n = ws.aty.len();
    if u.len() != n || d.len() != n {
        return Err(Error::DimensionMismatch {
            context: "sunsal::x_update",
            expected: n,
            got: u.len().max(d.len()),
        });
    }
    // w = Aᵀy + μ(u + d)
    let mut w = ws.aty.clone();
    for ((wi, ui), di) in w.as_mut_slice().iter_mut().zip(u.iter()).zip(d.iter()) {
        *wi += mu * (*ui + *di);
    }
    let bw = ws.binv.matvec(&w)?;
    match &ws.c_vec {
        Some(c) => {
            let gap = bw.sum() - T::one();
            Ok(bw.axpy(-gap, c))
        }
        None => Ok(bw),
    }
}

enum Outcome {
    Running,
    Converged,
}

/// One SUnSAL run with step-level access to the iterates.
pub struct SunsalRun<'a, T: Real> {
    ws: &'a SunsalWorkspace<T>,
    lib: &'a SpectralLibrary<T>,
    y: &'a DenseVector<T>,
    cfg: &'a SolverConfig<T>,
    threshold: T,
    state: IterateState<T>,
    iterations: usize,
    primal: Vec<T>,
    dual: Vec<T>,
    obj: Vec<T>,
}

impl<'a, T: Real> SunsalRun<'a, T> {
    pub fn new(
        ws: &'a SunsalWorkspace<T>,
        lib: &'a SpectralLibrary<T>,
        y: &'a DenseVector<T>,
        cfg: &'a SolverConfig<T>,
    ) -> Result<Self> {
        let n = lib.signatures();
        Self::with_init(ws, lib, y, cfg, DenseVector::zeros(n), DenseVector::zeros(n))
    }

    /// Warm start from a given `(u₀, d₀)` pair.
    pub fn with_init(
        ws: &'a SunsalWorkspace<T>,
        lib: &'a SpectralLibrary<T>,
        y: &'a DenseVector<T>,
        cfg: &'a SolverConfig<T>,
        u0: DenseVector<T>,
        d0: DenseVector<T>,
    ) -> Result<Self> {
        validate(lib, y, cfg)?;
        if !cfg.kind.is_regression() {
            return Err(Error::KindParamConflict {
                kind: cfg.kind.name(),
                param: "solver",
                fixed: "sunsal handles cls/csr only",
            });
        }
        let n = lib.signatures();
        if u0.len() != n || d0.len() != n {
            return Err(Error::DimensionMismatch {
                context: "sunsal init",
                expected: n,
                got: u0.len().max(d0.len()),
            });
        }
        Ok(Self {
            ws,
            lib,
            y,
            cfg,
            threshold: cfg.lambda / cfg.mu,
            state: IterateState {
                x: DenseVector::zeros(n),
                u: u0,
                d: d0,
            },
            iterations: 0,
            primal: Vec::new(),
            dual: Vec::new(),
            obj: Vec::new(),
        })
    }

    pub fn state(&self) -> &IterateState<T> {
        &self.state
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    fn step_inner(&mut self) -> Result<Outcome> {
        let mu = self.cfg.mu;
        let x = x_update(self.ws, &self.state.u, &self.state.d, mu)?;

        // ν = x − d, then the (nonnegative) soft threshold.
        let mut u_new = x.sub(&self.state.d);
        if self.cfg.enforce_anc {
            soft_threshold_nonneg_in_place(u_new.as_mut_slice(), self.threshold);
        } else {
            soft_threshold_in_place(u_new.as_mut_slice(), self.threshold);
        }

        let dual = mu * u_new.dist2(&self.state.u);
        let r = x.sub(&u_new);
        let d = self.state.d.sub(&r);

        let guard = lit::<T>(DIVERGENCE_GUARD);
        if x.norm_inf() > guard
            || u_new.norm_inf() > guard
            || d.norm_inf() > guard
            || !x.norm_inf().is_finite()
            || !d.norm_inf().is_finite()
        {
            return Err(Error::Diverged {
                iteration: self.iterations,
            });
        }

        let primal = r.norm2();
        self.obj.push(objective(self.lib, self.y, self.cfg, &x)?);
        self.primal.push(primal);
        self.dual.push(dual);
        self.state = IterateState { x, u: u_new, d };
        self.iterations += 1;

        // primal_tol = 0 means pure iteration-count stopping.
        let n_sqrt = T::from_usize(self.lib.signatures()).unwrap().sqrt();
        if self.cfg.primal_tol > T::zero() && primal <= self.cfg.primal_tol * n_sqrt {
            Ok(Outcome::Converged)
        } else {
            Ok(Outcome::Running)
        }
    }

    /// Advances one iteration; returns `true` once the primal stopping
    /// criterion is met.
    pub fn step(&mut self) -> Result<bool> {
        Ok(matches!(self.step_inner()?, Outcome::Converged))
    }

    pub fn into_result(self) -> Result<SolveResult<T>> {
        let iterate = match self.cfg.return_iterate {
            ReturnIterate::X => self.state.x,
            ReturnIterate::U => self.state.u,
        };
        SolveResult::from_iterate(
            self.lib,
            self.y,
            iterate,
            self.iterations,
            self.primal,
            self.dual,
            self.obj,
        )
    }
}

/// Runs SUnSAL with a prebuilt workspace.
pub fn solve_with_workspace<T: Real>(
    ws: &SunsalWorkspace<T>,
    lib: &SpectralLibrary<T>,
    y: &DenseVector<T>,
    cfg: &SolverConfig<T>,
) -> Result<SolveResult<T>> {
    let mut run = SunsalRun::new(ws, lib, y, cfg)?;
    for _ in 0..cfg.max_iters {
        if run.step()? {
            break;
        }
    }
    run.into_result()
}

/// Convenience entry point: prepares a workspace and solves.
pub fn solve<T: Real>(
    lib: &SpectralLibrary<T>,
    y: &DenseVector<T>,
    cfg: &SolverConfig<T>,
) -> Result<SolveResult<T>> {
    if !cfg.kind.is_regression() {
        return Err(Error::KindParamConflict {
            kind: cfg.kind.name(),
            param: "solver",
            fixed: "sunsal handles cls/csr only",
        });
    }
    let ws = SunsalWorkspace::prepare(lib, y, cfg)?;
    solve_with_workspace(&ws, lib, y, cfg)
}
