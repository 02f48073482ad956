//! Problem instances: `min xᵀAx + 2bᵀx  s.t. ‖Fᵏx + gᵏ‖² ≤ 1, k = 1..m`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{dot, norm, sym_eig, LinalgError, Matrix, SymMatrix};

/// Absolute tolerance on squared-norm constraint residuals.
pub const FEAS_TOL: f64 = 1e-8;

/// How far inside the unit sphere every `gᵏ` must be.
const INTERIOR_MARGIN: f64 = 1e-10;

/// Asymmetry accepted when reading `A` from JSON.
const JSON_SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("instance has no ellipsoid constraints")]
    NoConstraints,
    #[error("shape mismatch in {what}: expected {expected}, got {got}")]
    Shape {
        what: String,
        expected: usize,
        got: usize,
    },
    #[error("instance has non-finite entries")]
    NonFinite,
    #[error("origin is not interior: ‖g^k‖ ≥ 1 for k in {indices:?} (gamma = {gamma})")]
    NotInterior { indices: Vec<usize>, gamma: f64 },
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("malformed instance JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// One constraint `‖F x + g‖² ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    /// `rᵏ × n`
    pub f: Matrix,
    pub g: Vec<f64>,
}

impl Ellipsoid {
    pub fn ball(n: usize) -> Self {
        Self {
            f: Matrix::identity(n),
            g: vec![0.0; n],
        }
    }

    /// `F x + g`
    pub fn affine(&self, x: &[f64]) -> Vec<f64> {
        let mut v = self.f.mul_vec(x);
        v.iter_mut().zip(&self.g).for_each(|(a, b)| *a += b);
        v
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let v = self.affine(x);
        dot(&v, &v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EcqpInstance {
    pub a: SymMatrix,
    pub b: Vec<f64>,
    pub ellipsoids: Vec<Ellipsoid>,
    /// Constant added to reported objective values only.
    pub offset: f64,
}

impl EcqpInstance {
    pub fn new(a: SymMatrix, b: Vec<f64>, ellipsoids: Vec<Ellipsoid>) -> Self {
        Self {
            a,
            b,
            ellipsoids,
            offset: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.a.dim()
    }

    pub fn m(&self) -> usize {
        self.ellipsoids.len()
    }

    /// `xᵀAx + 2bᵀx`, without the offset.
    pub fn objective(&self, x: &[f64]) -> f64 {
        self.a.quad_form(x) + 2.0 * dot(&self.b, x)
    }

    pub fn gamma(&self) -> f64 {
        self.ellipsoids
            .iter()
            .map(|e| norm(&e.g))
            .fold(0.0, f64::max)
    }

    /// `rank(FᵏᵀFᵏ)` per constraint.
    pub fn constraint_ranks(&self) -> Vec<usize> {
        self.ellipsoids
            .iter()
            .map(|e| {
                let ev = sym_eig(&e.f.gram()).map(|s| s.values).unwrap_or_default();
                let top = ev.first().copied().unwrap_or(0.0);
                ev.iter().filter(|&&l| l > 1e-10 * top.max(1e-300)).count()
            })
            .collect()
    }

    pub fn to_json(&self) -> InstanceJson {
        InstanceJson {
            n: self.n(),
            m: self.m(),
            a: self.a.to_rows(),
            b: self.b.clone(),
            ellipsoids: self
                .ellipsoids
                .iter()
                .map(|e| EllipsoidJson {
                    f: e.f.to_rows(),
                    g: e.g.clone(),
                })
                .collect(),
            offset: self.offset,
        }
    }

    pub fn from_json(j: &InstanceJson) -> Result<Self, ModelError> {
        if j.a.len() != j.n {
            return Err(ModelError::Shape {
                what: "A rows".into(),
                expected: j.n,
                got: j.a.len(),
            });
        }
        if j.ellipsoids.len() != j.m {
            return Err(ModelError::Shape {
                what: "ellipsoid count".into(),
                expected: j.m,
                got: j.ellipsoids.len(),
            });
        }
        let a = SymMatrix::from_rows(&j.a, JSON_SYMMETRY_TOL)?;
        let ellipsoids = j
            .ellipsoids
            .iter()
            .map(|e| {
                let f = if e.f.is_empty() {
                    Matrix::zeros(0, j.n)
                } else {
                    Matrix::from_rows(&e.f)?
                };
                Ok(Ellipsoid { f, g: e.g.clone() })
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        let inst = Self {
            a,
            b: j.b.clone(),
            ellipsoids,
            offset: j.offset,
        };
        check_shapes(&inst)?;
        Ok(inst)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipsoidJson {
    #[serde(rename = "F")]
    pub f: Vec<Vec<f64>>,
    pub g: Vec<f64>,
}

/// On-disk instance format. Matrices are row-major lists of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceJson {
    pub n: usize,
    pub m: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub ellipsoids: Vec<EllipsoidJson>,
    #[serde(default)]
    pub offset: f64,
}

fn check_shapes(inst: &EcqpInstance) -> Result<(), ModelError> {
    let n = inst.n();
    if inst.b.len() != n {
        return Err(ModelError::Shape {
            what: "b".into(),
            expected: n,
            got: inst.b.len(),
        });
    }
    if inst.ellipsoids.is_empty() {
        return Err(ModelError::NoConstraints);
    }
    for (k, e) in inst.ellipsoids.iter().enumerate() {
        if e.f.cols() != n {
            return Err(ModelError::Shape {
                what: format!("F^{} columns", k + 1),
                expected: n,
                got: e.f.cols(),
            });
        }
        if e.f.rows() == 0 || e.g.len() != e.f.rows() {
            return Err(ModelError::Shape {
                what: format!("g^{}", k + 1),
                expected: e.f.rows(),
                got: e.g.len(),
            });
        }
        if !e.f.is_finite() || e.g.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite);
        }
    }
    if !inst.a.is_finite() || inst.b.iter().any(|v| !v.is_finite()) || !inst.offset.is_finite() {
        return Err(ModelError::NonFinite);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    /// `max_k ‖gᵏ‖`
    pub gamma: f64,
    pub g_norms: Vec<f64>,
}

/// Shape checks plus strict interiority of the origin.
pub fn validate(inst: &EcqpInstance) -> Result<ValidationReport, ModelError> {
    check_shapes(inst)?;
    let g_norms: Vec<f64> = inst.ellipsoids.iter().map(|e| norm(&e.g)).collect();
    let gamma = g_norms.iter().copied().fold(0.0, f64::max);
    let indices: Vec<usize> = g_norms
        .iter()
        .enumerate()
        .filter(|(_, &g)| g >= 1.0 - INTERIOR_MARGIN)
        .map(|(k, _)| k)
        .collect();
    if !indices.is_empty() {
        return Err(ModelError::NotInterior { indices, gamma });
    }
    Ok(ValidationReport { gamma, g_norms })
}

/// Lifted quadratic forms on `(x, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogenizedProblem {
    /// `[[A, b], [bᵀ, 0]]`
    pub b: SymMatrix,
    /// `[[FᵀF, Fᵀg], [gᵀF, ‖g‖² − 1]]`
    pub bk: Vec<SymMatrix>,
}

impl HomogenizedProblem {
    pub fn dim(&self) -> usize {
        self.b.dim()
    }
}

pub fn homogenize(inst: &EcqpInstance) -> HomogenizedProblem {
    let n = inst.n();
    let b = SymMatrix::from_fn(n + 1, |i, j| match (i == n, j == n) {
        (false, false) => inst.a.get(i, j),
        (false, true) => inst.b[i],
        (true, false) => inst.b[j],
        (true, true) => 0.0,
    });
    let bk = inst
        .ellipsoids
        .iter()
        .map(|e| {
            let ftf = e.f.gram();
            let ftg = e.f.tr_mul_vec(&e.g);
            let gg = dot(&e.g, &e.g);
            SymMatrix::from_fn(n + 1, |i, j| match (i == n, j == n) {
                (false, false) => ftf.get(i, j),
                (false, true) => ftg[i],
                (true, false) => ftg[j],
                (true, true) => gg - 1.0,
            })
        })
        .collect();
    HomogenizedProblem { b, bk }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub objective: f64,
    /// `max(0, ‖Fᵏx + gᵏ‖² − 1)` per constraint.
    pub residuals: Vec<f64>,
}

impl Evaluation {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_feasible(&self, tol: f64) -> bool {
        self.max_residual() <= tol
    }
}

pub fn evaluate(inst: &EcqpInstance, x: &[f64]) -> Evaluation {
    Evaluation {
        objective: inst.objective(x),
        residuals: inst
            .ellipsoids
            .iter()
            .map(|e| (e.value(x) - 1.0).max(0.0))
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveKind {
    /// Mixed-sign spectrum.
    Indefinite,
    /// `A ⪯ 0`
    Concave,
    /// `A ⪰ 0`
    Convex,
}

/// Knobs for [`random_instance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    /// Upper bound on every `‖gᵏ‖`; the first constraint attains it exactly.
    pub gamma_max: f64,
    /// Force `Σ FᵏᵀFᵏ ≻ 0`.
    pub bounded: bool,
    /// Every `Fᵏ = I`.
    pub ball: bool,
    pub objective: ObjectiveKind,
    /// Draw a linear term `b`.
    pub linear: bool,
}

impl Default for InstanceSpec {
    fn default() -> Self {
        Self {
            gamma_max: 0.5,
            bounded: true,
            ball: false,
            objective: ObjectiveKind::Indefinite,
            linear: true,
        }
    }
}

impl InstanceSpec {
    pub fn ball() -> Self {
        Self {
            gamma_max: 0.0,
            ball: true,
            ..Self::default()
        }
    }
}

fn gaussian_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Orthogonal matrix from Gram–Schmidt on Gaussian columns.
fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v = gaussian_vec(rng, n);
        for c in &cols {
            let p = dot(&v, c);
            v.iter_mut().zip(c).for_each(|(a, b)| *a -= p * b);
        }
        let nv = norm(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|a| *a /= nv);
            cols.push(v);
        }
    }
    Matrix::from_columns(n, &cols)
}

/// Seeded random instance satisfying the interiority assumption by construction.
///
/// `A = Q D Qᵀ` with `Q` orthogonal and `D` drawn per [`ObjectiveKind`];
/// indefinite spectra always contain one entry in `[-1, -0.5]` and, for
/// `n ≥ 2`, one in `[0.5, 1]`.
pub fn random_instance(
    seed: u64,
    n: usize,
    m: usize,
    spec: &InstanceSpec,
) -> Result<EcqpInstance, ModelError> {
    if n == 0 || m == 0 {
        return Err(ModelError::InvalidSpec("n and m must be positive".into()));
    }
    if !(0.0..1.0).contains(&spec.gamma_max) {
        return Err(ModelError::InvalidSpec(format!(
            "gamma_max must lie in [0, 1), got {}",
            spec.gamma_max
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut d: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    match spec.objective {
        ObjectiveKind::Indefinite => {
            d[0] = -rng.gen_range(0.5..1.0);
            if n >= 2 {
                d[1] = rng.gen_range(0.5..1.0);
            }
        }
        ObjectiveKind::Concave => d.iter_mut().for_each(|v| *v = -v.abs()),
        ObjectiveKind::Convex => d.iter_mut().for_each(|v| *v = v.abs()),
    }
    let q = random_orthogonal(&mut rng, n);
    let a = SymMatrix::diag(&d).congruence(&q.transpose());

    let b = if spec.linear {
        gaussian_vec(&mut rng, n).iter().map(|v| 0.5 * v).collect()
    } else {
        vec![0.0; n]
    };

    let scale = 1.0 / (n as f64).sqrt();
    let mut ellipsoids: Vec<Ellipsoid> = (0..m)
        .map(|k| {
            let f = if spec.ball {
                Matrix::identity(n)
            } else {
                let rows = rng.gen_range(1..=n);
                let entries = gaussian_vec(&mut rng, rows * n);
                Matrix::from_fn(rows, n, |i, j| scale * entries[i * n + j])
            };
            let radius = if k == 0 {
                spec.gamma_max
            } else {
                rng.gen_range(0.0..=spec.gamma_max)
            };
            let dir = gaussian_vec(&mut rng, f.rows());
            let dn = norm(&dir).max(1e-300);
            let g = dir.iter().map(|v| v * radius / dn).collect();
            Ellipsoid { f, g }
        })
        .collect();

    if spec.bounded {
        let mut total = SymMatrix::zeros(n);
        for e in &ellipsoids {
            total.axpy(1.0, &e.f.gram());
        }
        if total.min_eigenvalue()? < 1e-3 {
            // append 0.5·I rows to the first constraint and extend its centre with zeros
            let first = &mut ellipsoids[0];
            let mut rows = first.f.to_rows();
            for i in 0..n {
                let mut r = vec![0.0; n];
                r[i] = 0.5;
                rows.push(r);
            }
            first.f = Matrix::from_rows(&rows)?;
            first.g.extend(std::iter::repeat_n(0.0, n));
        }
    }

    Ok(EcqpInstance::new(a, b, ellipsoids))
}
