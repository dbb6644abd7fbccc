//! C-SUnSAL: alternating-direction solver for the CBP and CBPDN problems.
//!
//! The splitting stacks `Ax` and `x`, so the auxiliary variable has two
//! blocks: `u₁` lives in band space and is projected onto the ball
//! `B(y, δ)`, while `u₂` lives in abundance space and takes the nonnegative
//! soft threshold. `B = AᵀA + I` is positive definite unconditionally.

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, DenseVector, SpdFactorization};
use crate::model::{
    validate, ReturnIterate, SolveResult, SolverConfig, SpectralLibrary,
};
use crate::prox::{
    project_ball_in_place, soft_threshold_in_place, soft_threshold_nonneg_in_place, Ball,
};
use crate::scalar::{lit, Real};
use crate::sunsal::DIVERGENCE_GUARD;

/// Precomputed per-A quantities; independent of y, δ, λ, and μ.
#[derive(Debug, Clone)]
pub struct CsunsalWorkspace<T> {
    /// Explicit `B⁻¹`, applied as a matvec in the hot loop.
    binv: DenseMatrix<T>,
    c_vec: Option<DenseVector<T>>,
    inv_one_b_one: T,
}

impl<T: Real> CsunsalWorkspace<T> {
    pub fn prepare(lib: &SpectralLibrary<T>, cfg: &SolverConfig<T>) -> Result<Self> {
        let b = lib.matrix().gram_plus_diag(T::one());
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
            inv_one_b_one: one_b_one.recip(),
        })
    }

    pub fn c_vec(&self) -> Option<&DenseVector<T>> {
        self.c_vec.as_ref()
    }

    pub fn inv_one_b_one(&self) -> T {
        self.inv_one_b_one
    }
}

/// The split ADMM state: `u = [u₁; u₂]` with matching duals.
#[derive(Debug, Clone)]
pub struct SplitIterate<T> {
    pub x: DenseVector<T>,
    pub u1: DenseVector<T>,
    pub d1: DenseVector<T>,
    pub u2: DenseVector<T>,
    pub d2: DenseVector<T>,
}

/// Minimizer of `½‖Ax−(u₁+d₁)‖² + ½‖x−(u₂+d₂)‖²` subject to `1ᵀx = 1`
/// when the sum constraint is on.
pub fn x_update<T: Real>(
    ws: &CsunsalWorkspace<T>,
    lib: &SpectralLibrary<T>,
    u1: &DenseVector<T>,
    d1: &DenseVector<T>,
    u2: &DenseVector<T>,
    d2: &DenseVector<T>,
) -> Result<DenseVector<T>> {
    let (k, n) = (lib.bands(), lib.signatures());
    if u1.len() != k || d1.len() != k {
        return Err(Error::DimensionMismatch {
            context: "csunsal::x_update band block",
            expected: k,
            got: u1.len().max(d1.len()),
        });
    }
    if u2.len() != n || d2.len() != n {
        return Err(Error::DimensionMismatch {
            context: "csunsal::x_update abundance block",
            expected: n,
            got: u2.len().max(d2.len()),
        });
    }
    // w = Aᵀ(u₁+d₁) + (u₂+d₂)
    let mut w = lib.matrix().matvec_t(&u1.add(d1))?;
    for ((wi, ui), di) in w.as_mut_slice().iter_mut().zip(u2.iter()).zip(d2.iter()) {
        *wi += *ui + *di;
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

/// Ball projection of `ν₁ = Ax − d₁` onto `B(y, δ)`.
pub fn u1_update<T: Real>(
    lib: &SpectralLibrary<T>,
    x: &DenseVector<T>,
    d1: &DenseVector<T>,
    y: &DenseVector<T>,
    delta: T,
) -> Result<DenseVector<T>> {
    let mut nu = lib.matrix().matvec(x)?.sub(d1);
    let ball = Ball::new(y, delta)?;
    project_ball_in_place(&mut nu, &ball);
    Ok(nu)
}

/// Nonnegative soft threshold of `ν₂ = x − d₂` with weight λ/μ.
pub fn u2_update<T: Real>(
    x: &DenseVector<T>,
    d2: &DenseVector<T>,
    lambda: T,
    mu: T,
    anc: bool,
) -> Result<DenseVector<T>> {
    if !(lambda >= T::zero()) || !(mu > T::zero()) {
        return Err(Error::NegativeThreshold);
    }
    let mut nu = x.sub(d2);
    if anc {
        soft_threshold_nonneg_in_place(nu.as_mut_slice(), lambda / mu);
    } else {
        soft_threshold_in_place(nu.as_mut_slice(), lambda / mu);
    }
    Ok(nu)
}

/// One C-SUnSAL run with step-level access to the iterates.
pub struct CsunsalRun<'a, T: Real> {
    ws: &'a CsunsalWorkspace<T>,
    lib: &'a SpectralLibrary<T>,
    y: &'a DenseVector<T>,
    cfg: &'a SolverConfig<T>,
    state: SplitIterate<T>,
    iterations: usize,
    primal: Vec<T>,
    dual: Vec<T>,
    obj: Vec<T>,
}

impl<'a, T: Real> CsunsalRun<'a, T> {
    pub fn new(
        ws: &'a CsunsalWorkspace<T>,
        lib: &'a SpectralLibrary<T>,
        y: &'a DenseVector<T>,
        cfg: &'a SolverConfig<T>,
    ) -> Result<Self> {
        validate(lib, y, cfg)?;
        if cfg.kind.is_regression() {
            return Err(Error::KindParamConflict {
                kind: cfg.kind.name(),
                param: "solver",
                fixed: "csunsal handles cbp/cbpdn only",
            });
        }
        let n = lib.signatures();
        Ok(Self {
            ws,
            lib,
            y,
            cfg,
            // u₁ starts at y: feasible in the ball for any δ.
            state: SplitIterate {
                x: DenseVector::zeros(n),
                u1: y.clone(),
                d1: DenseVector::zeros(lib.bands()),
                u2: DenseVector::zeros(n),
                d2: DenseVector::zeros(n),
            },
            iterations: 0,
            primal: Vec::new(),
            dual: Vec::new(),
            obj: Vec::new(),
        })
    }

    pub fn state(&self) -> &SplitIterate<T> {
        &self.state
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Advances one iteration; returns `true` once the primal stopping
    /// criterion is met.
    pub fn step(&mut self) -> Result<bool> {
        let cfg = self.cfg;
        let x = x_update(
            self.ws,
            self.lib,
            &self.state.u1,
            &self.state.d1,
            &self.state.u2,
            &self.state.d2,
        )?;
        let ax = self.lib.matrix().matvec(&x)?;

        let mut u1 = ax.sub(&self.state.d1);
        let ball = Ball::new(self.y, cfg.delta)?;
        project_ball_in_place(&mut u1, &ball);
        let u2 = u2_update(&x, &self.state.d2, cfg.lambda, cfg.mu, cfg.enforce_anc)?;

        let dual = cfg.mu
            * (u1.dist2(&self.state.u1).powi(2) + u2.dist2(&self.state.u2).powi(2)).sqrt();

        let r1 = ax.sub(&u1);
        let r2 = x.sub(&u2);
        let d1 = self.state.d1.sub(&r1);
        let d2 = self.state.d2.sub(&r2);

        let guard = lit::<T>(DIVERGENCE_GUARD);
        let worst = x
            .norm_inf()
            .max(u1.norm_inf())
            .max(u2.norm_inf())
            .max(d1.norm_inf())
            .max(d2.norm_inf());
        if worst > guard || !worst.is_finite() {
            return Err(Error::Diverged {
                iteration: self.iterations,
            });
        }

        let primal = r1.norm2().max(r2.norm2());
        self.obj.push(x.norm1());
        self.primal.push(primal);
        self.dual.push(dual);
        self.state = SplitIterate { x, u1, d1, u2, d2 };
        self.iterations += 1;

        // primal_tol = 0 means pure iteration-count stopping.
        let n_sqrt = T::from_usize(self.lib.signatures()).unwrap().sqrt();
        Ok(cfg.primal_tol > T::zero() && primal <= cfg.primal_tol * n_sqrt)
    }

    pub fn into_result(self) -> Result<SolveResult<T>> {
        let iterate = match self.cfg.return_iterate {
            ReturnIterate::X => self.state.x,
            ReturnIterate::U => self.state.u2,
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

/// Runs C-SUnSAL with a prebuilt workspace.
pub fn solve_with_workspace<T: Real>(
    ws: &CsunsalWorkspace<T>,
    lib: &SpectralLibrary<T>,
    y: &DenseVector<T>,
    cfg: &SolverConfig<T>,
) -> Result<SolveResult<T>> {
    let mut run = CsunsalRun::new(ws, lib, y, cfg)?;
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
    if cfg.kind.is_regression() {
        return Err(Error::KindParamConflict {
            kind: cfg.kind.name(),
            param: "solver",
            fixed: "csunsal handles cbp/cbpdn only",
        });
    }
    let ws = CsunsalWorkspace::prepare(lib, cfg)?;
    solve_with_workspace(&ws, lib, y, cfg)
}
