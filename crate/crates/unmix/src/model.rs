//! Problem and configuration data model shared by the solvers and the CLI.

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, DenseVector};
use crate::scalar::{lit, Real};

/// The mixing matrix `A`: one column per spectral signature, one row per band.
#[derive(Debug, Clone)]
pub struct SpectralLibrary<T> {
    a: DenseMatrix<T>,
}

impl<T: Real> SpectralLibrary<T> {
    pub fn new(a: DenseMatrix<T>) -> Result<Self> {
        if a.rows() == 0 || a.cols() == 0 {
            return Err(Error::EmptyLibrary);
        }
        for j in 0..a.cols() {
            if (0..a.rows()).all(|i| a.get(i, j) == T::zero()) {
                return Err(Error::ZeroColumn(j));
            }
        }
        Ok(Self { a })
    }

    /// Number of spectral bands `k`.
    pub fn bands(&self) -> usize {
        self.a.rows()
    }

    /// Number of library signatures `n`.
    pub fn signatures(&self) -> usize {
        self.a.cols()
    }

    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.a
    }
}

/// Which constrained problem a solve targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    /// Constrained least squares: `min ½‖Ax−y‖²` under ANC/ASC (λ = 0).
    Cls,
    /// Constrained sparse regression: `min ½‖Ax−y‖² + λ‖x‖₁` under ANC/ASC.
    Csr,
    /// Constrained basis pursuit: `min ‖x‖₁ s.t. Ax = y` under ANC/ASC (δ = 0).
    Cbp,
    /// Constrained basis pursuit denoising: `min ‖x‖₁ s.t. ‖Ax−y‖₂ ≤ δ`.
    Cbpdn,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Cls => "cls",
            ProblemKind::Csr => "csr",
            ProblemKind::Cbp => "cbp",
            ProblemKind::Cbpdn => "cbpdn",
        }
    }

    /// True for the problems SUnSAL handles; false for the C-SUnSAL pair.
    pub fn is_regression(self) -> bool {
        matches!(self, ProblemKind::Cls | ProblemKind::Csr)
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "cls" => Ok(ProblemKind::Cls),
            "csr" => Ok(ProblemKind::Csr),
            "cbp" => Ok(ProblemKind::Cbp),
            "cbpdn" => Ok(ProblemKind::Cbpdn),
            other => Err(format!("unknown problem kind: {other}")),
        }
    }
}

/// Which ADMM iterate a solve returns as the abundance estimate.
///
/// The `u` iterate satisfies the non-negativity constraint exactly by
/// construction; the `x` iterate satisfies the sum constraint exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReturnIterate {
    X,
    #[default]
    U,
}

/// Full solver configuration.
#[derive(Debug, Clone)]
pub struct SolverConfig<T> {
    pub kind: ProblemKind,
    /// ℓ₁ weight. For CBP/CBPDN this is only the internal prox weight
    /// (the objective is plain ‖x‖₁); the conventional setting there is 1,
    /// with μ acting as the tuning knob.
    pub lambda: T,
    /// Ball radius for CBPDN; fixed to 0 for CBP.
    pub delta: T,
    /// Augmented-Lagrangian weight, constant across iterations.
    pub mu: T,
    pub enforce_asc: bool,
    pub enforce_anc: bool,
    pub max_iters: usize,
    /// Early-stop threshold on the primal residual, scaled by √n.
    /// 0 means pure iteration-count stopping.
    pub primal_tol: T,
    pub return_iterate: ReturnIterate,
}

impl<T: Real> SolverConfig<T> {
    pub fn new(kind: ProblemKind) -> Self {
        Self {
            kind,
            lambda: if kind.is_regression() { T::zero() } else { T::one() },
            delta: T::zero(),
            mu: lit(0.01),
            enforce_asc: true,
            enforce_anc: true,
            max_iters: 200,
            primal_tol: T::zero(),
            return_iterate: ReturnIterate::U,
        }
    }

    pub fn with_lambda(mut self, lambda: T) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_delta(mut self, delta: T) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_mu(mut self, mu: T) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_max_iters(mut self, iters: usize) -> Self {
        self.max_iters = iters;
        self
    }

    pub fn with_primal_tol(mut self, tol: T) -> Self {
        self.primal_tol = tol;
        self
    }

    pub fn with_asc(mut self, on: bool) -> Self {
        self.enforce_asc = on;
        self
    }

    pub fn with_anc(mut self, on: bool) -> Self {
        self.enforce_anc = on;
        self
    }

    pub fn with_return_iterate(mut self, r: ReturnIterate) -> Self {
        self.return_iterate = r;
        self
    }
}

/// Documented default for the CSR regularization weight: `1e-3 · ‖Aᵀy‖∞`.
pub fn default_lambda<T: Real>(lib: &SpectralLibrary<T>, y: &DenseVector<T>) -> Result<T> {
    Ok(lit::<T>(1e-3) * lib.matrix().matvec_t(y)?.norm_inf())
}

/// A problem bundle whose dimensions and parameters have been checked;
/// solvers consume this to guarantee their preconditions.
#[derive(Debug, Clone, Copy)]
pub struct Validated<'a, T> {
    pub lib: &'a SpectralLibrary<T>,
    pub y: &'a DenseVector<T>,
    pub cfg: &'a SolverConfig<T>,
}

pub fn validate<'a, T: Real>(
    lib: &'a SpectralLibrary<T>,
    y: &'a DenseVector<T>,
    cfg: &'a SolverConfig<T>,
) -> Result<Validated<'a, T>> {
    if y.len() != lib.bands() {
        return Err(Error::DimensionMismatch {
            context: "validate: observation vs library bands",
            expected: lib.bands(),
            got: y.len(),
        });
    }
    if !(cfg.mu > T::zero()) || !cfg.mu.is_finite() {
        return Err(Error::NonPositiveMu);
    }
    if !(cfg.lambda >= T::zero()) || !cfg.lambda.is_finite() {
        return Err(Error::NegativeLambda);
    }
    if !(cfg.delta >= T::zero()) || !cfg.delta.is_finite() {
        return Err(Error::NegativeDelta);
    }
    if cfg.max_iters == 0 {
        return Err(Error::ZeroIterations);
    }
    if cfg.kind == ProblemKind::Cls && cfg.lambda != T::zero() {
        return Err(Error::KindParamConflict {
            kind: "cls",
            param: "lambda",
            fixed: "0",
        });
    }
    if cfg.kind == ProblemKind::Cbp && cfg.delta != T::zero() {
        return Err(Error::KindParamConflict {
            kind: "cbp",
            param: "delta",
            fixed: "0",
        });
    }
    Ok(Validated { lib, y, cfg })
}

/// Objective value at `x`: `½‖Ax−y‖² + λ‖x‖₁` for CLS/CSR, `‖x‖₁` for
/// CBP/CBPDN (their feasibility is reported separately in [`SolveResult`]).
pub fn objective<T: Real>(
    lib: &SpectralLibrary<T>,
    y: &DenseVector<T>,
    cfg: &SolverConfig<T>,
    x: &DenseVector<T>,
) -> Result<T> {
    if x.len() != lib.signatures() {
        return Err(Error::DimensionMismatch {
            context: "objective",
            expected: lib.signatures(),
            got: x.len(),
        });
    }
    match cfg.kind {
        ProblemKind::Cls | ProblemKind::Csr => {
            let r = lib.matrix().matvec(x)?.sub(y);
            Ok(lit::<T>(0.5) * r.norm2_sq() + cfg.lambda * x.norm1())
        }
        ProblemKind::Cbp | ProblemKind::Cbpdn => Ok(x.norm1()),
    }
}

/// Outcome of one solver run.
#[derive(Debug, Clone)]
pub struct SolveResult<T> {
    /// Estimated abundance vector (the configured iterate).
    pub abundances: DenseVector<T>,
    pub iterations: usize,
    /// `‖x_k − u_k‖₂` per iteration (max over the two blocks for C-SUnSAL).
    pub primal_residual_history: Vec<T>,
    /// `μ‖u_{k+1} − u_k‖₂` per iteration; recorded, never used for stopping.
    pub dual_residual_history: Vec<T>,
    pub objective_history: Vec<T>,
    /// `|1ᵀx̂ − 1|` of the returned iterate.
    pub asc_violation: T,
    /// `max(0, −min component)` of the returned iterate.
    pub anc_violation: T,
    /// `‖Ax̂ − y‖₂` of the returned iterate.
    pub data_residual: T,
}

impl<T: Real> SolveResult<T> {
    pub(crate) fn from_iterate(
        lib: &SpectralLibrary<T>,
        y: &DenseVector<T>,
        abundances: DenseVector<T>,
        iterations: usize,
        primal: Vec<T>,
        dual: Vec<T>,
        obj: Vec<T>,
    ) -> Result<Self> {
        let asc_violation = (abundances.sum() - T::one()).abs();
        let anc_violation = (-abundances.min()).max(T::zero());
        let data_residual = lib.matrix().matvec(&abundances)?.sub(y).norm2();
        Ok(Self {
            abundances,
            iterations,
            primal_residual_history: primal,
            dual_residual_history: dual,
            objective_history: obj,
            asc_violation,
            anc_violation,
            data_residual,
        })
    }
}
