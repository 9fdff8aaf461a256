//! Sparse GMRF precision `Q_u = (k·J + D)·Q_f·(k·J + D)` for the solution of
//! `k·u − ∇²u = 𝒲`, with sampling, covariance columns, and a comparison
//! against the Matérn correlation it approximates.
//!
//! The default noise precision is `Q_f = diag(1/ã)`: the projected white
//! noise on hat function `i` has variance `ãᵢ = ∫φᵢ`. Any sparse SPD `Q_f`
//! may be supplied instead through [`build_precision_with_noise`].

use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

use crate::assembly::FemMatrices;
use crate::bessel::bessel_k1;
use crate::linalg::{LinalgError, SparseSymMatrix, SpdFactorization};
use crate::mesh::{dist2, quality_report, Mesh, QualityReport};
use crate::pde::Field;
use crate::rng::standard_normals;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GmrfError {
    #[error("k must be positive, got {0}")]
    NonPositiveK(f64),
    #[error("white-noise variance at node {node} must be positive, got {value}")]
    NonPositiveVariance { node: usize, value: f64 },
    #[error("node index {index} out of range for {dim} nodes")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Precision of the driving noise `f`.
#[derive(Debug, Clone, PartialEq)]
pub enum NoisePrecision {
    /// `Q_f = diag(1/ã)`, independent noise per basis function.
    Diagonal { a_tilde: Vec<f64> },
    /// An arbitrary sparse SPD precision.
    Sparse(SparseSymMatrix),
}

/// The precision `Q_u` with the pieces it was built from. Factorizations
/// are computed on first use and cached; the model is `Sync`.
#[derive(Debug)]
pub struct PrecisionModel {
    precision: SparseSymMatrix,
    operator: SparseSymMatrix,
    k: f64,
    noise: NoisePrecision,
    precision_factor: OnceLock<Result<SpdFactorization, LinalgError>>,
    operator_factor: OnceLock<Result<SpdFactorization, LinalgError>>,
    noise_factor: OnceLock<Result<SpdFactorization, LinalgError>>,
}

/// Builds `Q_u = B·diag(1/ã)·B` with `B = k·J + D`.
pub fn build_precision(fem: &FemMatrices, k: f64) -> Result<PrecisionModel, GmrfError> {
    if let Some((node, &value)) = fem.a_tilde.iter().enumerate().find(|(_, &a)| !(a > 0.0)) {
        return Err(GmrfError::NonPositiveVariance { node, value });
    }
    let operator = checked_operator(fem, k)?;
    let inv: Vec<f64> = fem.a_tilde.iter().map(|a| 1.0 / a).collect();
    let precision = operator.sandwich_diagonal(&inv)?;
    Ok(PrecisionModel::from_parts(
        precision,
        operator,
        k,
        NoisePrecision::Diagonal { a_tilde: fem.a_tilde.clone() },
    ))
}

/// Builds `Q_u = B·Q_f·B` for a caller-supplied noise precision.
pub fn build_precision_with_noise(
    fem: &FemMatrices,
    k: f64,
    noise_precision: SparseSymMatrix,
) -> Result<PrecisionModel, GmrfError> {
    let operator = checked_operator(fem, k)?;
    let precision = operator.sandwich(&noise_precision)?;
    Ok(PrecisionModel::from_parts(precision, operator, k, NoisePrecision::Sparse(noise_precision)))
}

fn checked_operator(fem: &FemMatrices, k: f64) -> Result<SparseSymMatrix, GmrfError> {
    if !(k > 0.0) {
        return Err(GmrfError::NonPositiveK(k));
    }
    Ok(fem.operator(k))
}

impl PrecisionModel {
    fn from_parts(precision: SparseSymMatrix, operator: SparseSymMatrix, k: f64, noise: NoisePrecision) -> Self {
        Self {
            precision,
            operator,
            k,
            noise,
            precision_factor: OnceLock::new(),
            operator_factor: OnceLock::new(),
            noise_factor: OnceLock::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.precision.dim()
    }

    /// `Q_u`.
    pub fn precision(&self) -> &SparseSymMatrix {
        &self.precision
    }

    /// `B = k·J + D`.
    pub fn operator(&self) -> &SparseSymMatrix {
        &self.operator
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn noise(&self) -> &NoisePrecision {
        &self.noise
    }

    /// Cholesky factor of `Q_u`.
    pub fn factor(&self) -> Result<&SpdFactorization, GmrfError> {
        cached_factor(&self.precision_factor, &self.precision)
    }

    fn operator_factor(&self) -> Result<&SpdFactorization, GmrfError> {
        cached_factor(&self.operator_factor, &self.operator)
    }

    /// `Q_f⁻¹·x`.
    fn noise_covariance_apply(&self, x: &[f64]) -> Result<Vec<f64>, GmrfError> {
        match &self.noise {
            NoisePrecision::Diagonal { a_tilde } => Ok(a_tilde.iter().zip(x).map(|(a, v)| a * v).collect()),
            NoisePrecision::Sparse(q) => Ok(cached_factor(&self.noise_factor, q)?.solve(x)?),
        }
    }

    /// `n` independent draws with covariance `Q_u⁻¹`.
    ///
    /// Sample `s` solves `Gᵀ·x = z` where `Q_u = G·Gᵀ` and `z` is stream
    /// `s` of `seed`; identical inputs give bitwise-identical output.
    pub fn sample(&self, seed: u64, n: usize) -> Result<Vec<Field>, GmrfError> {
        if n == 0 {
            return Err(GmrfError::NoSamples);
        }
        let factor = self.factor()?;
        (0..n as u64)
            .map(|s| {
                let z = standard_normals(seed, s, self.dim());
                Ok(Field { weights: factor.solve_lower(&z, true)? })
            })
            .collect()
    }

    /// Column `i` of `Q_u⁻¹`, computed as `B⁻¹·Q_f⁻¹·B⁻¹·eᵢ`.
    pub fn covariance_column(&self, i: usize) -> Result<Vec<f64>, GmrfError> {
        let n = self.dim();
        if i >= n {
            return Err(GmrfError::IndexOutOfRange { index: i, dim: n });
        }
        let b = self.operator_factor()?;
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        let y = b.solve(&e)?;
        let w = self.noise_covariance_apply(&y)?;
        Ok(b.solve(&w)?)
    }

    /// `Var(uᵢ)` at the listed nodes.
    pub fn marginal_variances_at(&self, nodes: &[usize]) -> Result<Vec<f64>, GmrfError> {
        let n = self.dim();
        let b = self.operator_factor()?;
        nodes
            .iter()
            .map(|&i| {
                if i >= n {
                    return Err(GmrfError::IndexOutOfRange { index: i, dim: n });
                }
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                let y = b.solve(&e)?;
                // eᵢᵀ·B⁻¹·Q_f⁻¹·B⁻¹·eᵢ = yᵀ·Q_f⁻¹·y.
                let w = self.noise_covariance_apply(&y)?;
                Ok(y.iter().zip(&w).map(|(a, b)| a * b).sum())
            })
            .collect()
    }

    /// `Var(uᵢ)` for every node; one operator solve per node.
    pub fn marginal_variances(&self) -> Result<Vec<f64>, GmrfError> {
        let all: Vec<usize> = (0..self.dim()).collect();
        self.marginal_variances_at(&all)
    }
}

fn cached_factor<'a>(
    cell: &'a OnceLock<Result<SpdFactorization, LinalgError>>,
    matrix: &SparseSymMatrix,
) -> Result<&'a SpdFactorization, GmrfError> {
    cell.get_or_init(|| SpdFactorization::new(matrix))
        .as_ref()
        .map_err(|e| GmrfError::Linalg(e.clone()))
}

/// Matérn parameters implied by `k·u − ∇²u = 𝒲` in 2D: smoothness `ν = 1`
/// and `κ = √k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaternSpec {
    pub kappa: f64,
}

impl MaternSpec {
    pub const NU: f64 = 1.0;

    /// # Panics
    ///
    /// Panics unless `kappa > 0`.
    pub fn new(kappa: f64) -> Self {
        assert!(kappa > 0.0, "kappa must be positive, got {kappa}");
        Self { kappa }
    }

    pub fn from_k(k: f64) -> Self {
        Self::new(k.sqrt())
    }

    /// Parameters whose empirical range `√(8ν)/κ` equals `range`.
    pub fn from_range(range: f64) -> Self {
        Self::new((8.0 * Self::NU).sqrt() / range)
    }

    pub fn empirical_range(&self) -> f64 {
        (8.0 * Self::NU).sqrt() / self.kappa
    }

    /// The operator coefficient `k = κ²`.
    pub fn k(&self) -> f64 {
        self.kappa * self.kappa
    }
}

/// `r(d) = κd·K₁(κd)`, with `r(0) = 1`.
///
/// # Panics
///
/// Panics if `d` is negative.
pub fn matern_correlation(d: f64, spec: &MaternSpec) -> f64 {
    assert!(d >= 0.0, "distance must be non-negative, got {d}");
    if d == 0.0 {
        return 1.0;
    }
    let x = spec.kappa * d;
    x * bessel_k1(x)
}

/// Outcome of comparing FEM correlations around a probe node with the
/// Matérn correlation.
#[derive(Debug, Clone, PartialEq)]
pub struct MaternValidation {
    pub probe: usize,
    pub quality: QualityReport,
    /// Nodes within `2·range` of the probe and at least `range/2` from the
    /// boundary.
    pub compared: usize,
    /// `max |ρ_FEM − r(d)|` over the compared nodes; NaN when none.
    pub max_discrepancy: f64,
    /// Node attaining `max_discrepancy`.
    pub worst_node: Option<usize>,
}

impl MaternValidation {
    /// True when the mesh breaks a rule of thumb, so the discrepancy is
    /// informational only.
    pub fn flagged(&self) -> bool {
        !self.quality.passes()
    }
}

impl fmt::Display for MaternValidation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "probe node: {}", self.probe)?;
        write!(f, "{}", self.quality)?;
        if self.flagged() {
            writeln!(f, "rules of thumb violated: discrepancy is not enforced")?;
        }
        writeln!(f, "nodes compared: {}", self.compared)?;
        writeln!(f, "max correlation discrepancy: {:.6}", self.max_discrepancy)?;
        if let Some(w) = self.worst_node {
            writeln!(f, "worst node: {w}")?;
        }
        Ok(())
    }
}

/// Compares `Corr(u_probe, u_j)` from the model with `r(‖x_j − x_probe‖)`.
pub fn validate_matern(
    mesh: &Mesh,
    model: &PrecisionModel,
    spec: &MaternSpec,
    probe: usize,
) -> Result<MaternValidation, GmrfError> {
    let n = mesh.node_count();
    if probe >= n {
        return Err(GmrfError::IndexOutOfRange { index: probe, dim: n });
    }
    let range = spec.empirical_range();
    let origin = mesh.nodes()[probe];
    let quality = quality_report(mesh, range, &[origin]);

    let nearby: Vec<usize> = (0..n)
        .filter(|&j| dist2(mesh.nodes()[j], origin).sqrt() <= 2.0 * range)
        .filter(|&j| mesh.boundary_distance(mesh.nodes()[j]) >= range / 2.0)
        .collect();

    let column = model.covariance_column(probe)?;
    let var_probe = column[probe];
    let variances = model.marginal_variances_at(&nearby)?;

    let mut max_discrepancy = f64::NAN;
    let mut worst_node = None;
    for (&j, &var_j) in nearby.iter().zip(&variances) {
        let fem = column[j] / (var_probe * var_j).sqrt();
        let d = dist2(mesh.nodes()[j], origin).sqrt();
        let diff = (fem - matern_correlation(d, spec)).abs();
        if worst_node.is_none() || diff > max_discrepancy {
            max_discrepancy = diff;
            worst_node = Some(j);
        }
    }
    Ok(MaternValidation { probe, quality, compared: nearby.len(), max_discrepancy, worst_node })
}
