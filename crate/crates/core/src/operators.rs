//! Generators with an energy inner product, and the model zoo of partially
//! dissipative test systems.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};

/// Relative level below which a singular value counts as zero.
pub const SINGULARITY_THRESHOLD: f64 = 1e-12;

/// Which member of the model zoo a [`ModelSpec`] asks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[serde(rename = "heat_wave_1d")]
    HeatWave1d,
    WeaklyDampedChain,
    UniformlyDamped,
    ConservativeOscillator,
    Diagonal,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::HeatWave1d => "heat_wave_1d",
            ModelKind::WeaklyDampedChain => "weakly_damped_chain",
            ModelKind::UniformlyDamped => "uniformly_damped",
            ModelKind::ConservativeOscillator => "conservative_oscillator",
            ModelKind::Diagonal => "diagonal",
        }
    }
}

/// `{"kind": "...", "parameters": {...}}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    #[serde(default)]
    pub parameters: Map<String, Value>,
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        ModelSpec {
            kind,
            parameters: Map::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn heat_wave(nx_heat: usize, nx_wave: usize) -> Self {
        ModelSpec::new(ModelKind::HeatWave1d)
            .with("nx_heat", nx_heat)
            .with("nx_wave", nx_wave)
    }

    pub fn weakly_damped_chain(n: usize, damping: f64, coupling: f64, stiffness: f64) -> Self {
        ModelSpec::new(ModelKind::WeaklyDampedChain)
            .with("n", n)
            .with("damping", damping)
            .with("coupling", coupling)
            .with("stiffness", stiffness)
    }

    pub fn uniformly_damped(dim: usize) -> Self {
        ModelSpec::new(ModelKind::UniformlyDamped).with("dim", dim)
    }

    pub fn conservative_oscillator() -> Self {
        ModelSpec::new(ModelKind::ConservativeOscillator)
    }

    pub fn diagonal(eigenvalues: &[Complex64]) -> Self {
        let list: Vec<Value> = eigenvalues
            .iter()
            .map(|z| serde_json::json!([z.re, z.im]))
            .collect();
        ModelSpec::new(ModelKind::Diagonal).with("eigenvalues", Value::Array(list))
    }
}

/// Structural properties recorded at construction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    /// `Re <Ax, x>_H <= 0` for every state.
    pub dissipative: bool,
    /// Some part of the dynamics is undamped: an eigenvalue sits on the
    /// imaginary axis.
    pub conservative_part: bool,
}

/// Row-compressed copy of the generator for fast matrix-vector products.
#[derive(Debug, Clone)]
pub struct SparseRows {
    rows: Vec<Vec<(usize, Complex64)>>,
}

impl SparseRows {
    fn from_dense(a: &CMatrix) -> Self {
        let rows = (0..a.nrows())
            .map(|i| {
                (0..a.ncols())
                    .filter(|&j| a[(i, j)] != Complex64::new(0.0, 0.0))
                    .map(|j| (j, a[(i, j)]))
                    .collect()
            })
            .collect();
        SparseRows { rows }
    }

    pub fn mul_into(&self, x: &CVector, out: &mut CVector) {
        for (i, row) in self.rows.iter().enumerate() {
            out[i] = row.iter().map(|&(j, v)| v * x[j]).sum();
        }
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }
}

/// A square system matrix `A` together with the Gram matrix `G` of the
/// energy inner product `<x, y>_H = y* G x`.
///
/// With `G = C^T C` (Cholesky), every H-operator norm is the spectral norm of
/// the similarity transform `C M C^{-1}`; the transformed generator is cached.
#[derive(Debug)]
pub struct Generator {
    label: String,
    a: CMatrix,
    gram: DMatrix<f64>,
    chol: CMatrix,
    chol_inv: CMatrix,
    weighted: CMatrix,
    weighted_norm: f64,
    is_real: bool,
    flags: Flags,
    metadata: BTreeMap<String, Value>,
    sparse: SparseRows,
    eigenvalues: OnceLock<Vec<Complex64>>,
    sigma_min_a: OnceLock<f64>,
    weighted_inverse: OnceLock<Option<CMatrix>>,
}

impl Generator {
    /// Builds a generator from a real system matrix.
    pub fn new(label: impl Into<String>, a: DMatrix<f64>, gram: DMatrix<f64>) -> Result<Self> {
        let mut g = Self::from_complex(label, linalg::to_complex(&a), gram)?;
        g.is_real = true;
        Ok(g)
    }

    /// Builds a generator whose system matrix may be complex. The Gram
    /// matrix is always real symmetric positive definite.
    pub fn from_complex(label: impl Into<String>, a: CMatrix, gram: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if n == 0 {
            return Err(Error::InvalidInput("generator must have dim >= 1".into()));
        }
        if a.ncols() != n {
            return Err(Error::InvalidInput(format!(
                "system matrix is {}x{}, not square",
                n,
                a.ncols()
            )));
        }
        if gram.nrows() != n || gram.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: gram.nrows(),
            });
        }
        let gscale = gram.amax().max(f64::MIN_POSITIVE);
        let asym = (&gram - gram.transpose()).amax();
        if asym > 1e-12 * gscale {
            return Err(Error::InvalidInput(format!(
                "Gram matrix is not symmetric (defect {asym:e})"
            )));
        }
        let chol_l = nalgebra::Cholesky::new(gram.clone())
            .ok_or_else(|| Error::InvalidInput("Gram matrix is not positive definite".into()))?
            .unpack();
        if (0..n).any(|k| !(chol_l[(k, k)] > 0.0)) {
            return Err(Error::InvalidInput(
                "Gram matrix has a non-positive pivot".into(),
            ));
        }
        let upper = chol_l.transpose();
        let upper_inv = upper
            .clone()
            .solve_upper_triangular(&DMatrix::identity(n, n))
            .ok_or_else(|| Error::InvalidInput("Cholesky factor is singular".into()))?;
        let chol = linalg::to_complex(&upper);
        let chol_inv = linalg::to_complex(&upper_inv);
        let weighted = &chol * &a * &chol_inv;
        let weighted_norm = if n <= linalg::DENSE_SVD_LIMIT {
            linalg::sigma_max(&weighted)
        } else {
            weighted.norm()
        };
        let is_real = a.iter().all(|z| z.im == 0.0);
        let sparse = SparseRows::from_dense(&a);
        Ok(Generator {
            label: label.into(),
            a,
            gram,
            chol,
            chol_inv,
            weighted,
            weighted_norm,
            is_real,
            flags: Flags::default(),
            metadata: BTreeMap::new(),
            sparse,
            eigenvalues: OnceLock::new(),
            sigma_min_a: OnceLock::new(),
            weighted_inverse: OnceLock::new(),
        })
    }

    pub fn with_flags(mut self, flags: Flags) -> Self {
        self.flags = flags;
        self
    }

    pub fn with_metadata(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.a
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// `C A C^{-1}`: the generator in coordinates where the energy norm is
    /// Euclidean.
    pub fn weighted(&self) -> &CMatrix {
        &self.weighted
    }

    /// `||A||_H`.
    pub fn weighted_norm(&self) -> f64 {
        self.weighted_norm
    }

    pub fn is_real(&self) -> bool {
        self.is_real
    }

    pub fn flags(&self) -> Flags {
        self.flags
    }

    pub fn metadata(&self) -> &BTreeMap<String, Value> {
        &self.metadata
    }

    pub fn metadata_f64(&self, key: &str) -> Option<f64> {
        self.metadata.get(key).and_then(Value::as_f64)
    }

    pub fn sparse(&self) -> &SparseRows {
        &self.sparse
    }

    /// Maps a state into energy coordinates: `y = C x`, so `|y| = ||x||_H`.
    pub fn to_energy_coords(&self, x: &CVector) -> CVector {
        &self.chol * x
    }

    pub fn from_energy_coords(&self, y: &CVector) -> CVector {
        &self.chol_inv * y
    }

    /// Converts an operator to its energy-coordinate form `C M C^{-1}`.
    pub fn weigh(&self, m: &CMatrix) -> CMatrix {
        &self.chol * m * &self.chol_inv
    }

    /// `sqrt(x* G x)`.
    pub fn energy_norm(&self, x: &CVector) -> Result<f64> {
        self.check_len(x.len())?;
        Ok(self.to_energy_coords(x).norm())
    }

    pub fn energy_norm_real(&self, x: &DVector<f64>) -> Result<f64> {
        self.energy_norm(&linalg::real_vector_to_complex(x))
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: len,
            });
        }
        Ok(())
    }

    /// Spectrum of `A`, from a complex Schur decomposition. Computed once.
    pub fn eigenvalues(&self) -> &[Complex64] {
        self.eigenvalues.get_or_init(|| {
            let (_, t) = nalgebra::Schur::new(self.weighted.clone()).unpack();
            (0..t.nrows()).map(|k| t[(k, k)]).collect()
        })
    }

    /// `max Re sigma(A)`.
    pub fn spectral_abscissa(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest eigenvalue of the Hermitian part of `C A C^{-1}`, i.e. the
    /// supremum of `Re <Ax,x>_H` over the unit sphere of H.
    pub fn numerical_abscissa(&self) -> f64 {
        let h = (&self.weighted + self.weighted.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(h);
        eig.eigenvalues
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Whether `GA + A*G` is negative semidefinite to `1e-10 ||A||_H`.
    pub fn is_numerically_dissipative(&self) -> bool {
        self.numerical_abscissa() <= 1e-10 * self.weighted_norm.max(f64::MIN_POSITIVE)
    }

    /// `sigma_min(A)` in the energy norm.
    pub fn sigma_min(&self) -> f64 {
        *self
            .sigma_min_a
            .get_or_init(|| linalg::sigma_min(&self.weighted))
    }

    pub fn is_invertible(&self) -> bool {
        self.sigma_min() > SINGULARITY_THRESHOLD * self.weighted_norm
    }

    /// `C A^{-1} C^{-1}`, or `SingularGenerator`.
    pub fn weighted_inverse(&self) -> Result<&CMatrix> {
        self.weighted_inverse
            .get_or_init(|| {
                if !self.is_invertible() {
                    return None;
                }
                self.weighted.clone().try_inverse()
            })
            .as_ref()
            .ok_or(Error::SingularGenerator)
    }

    /// Solves `A x = b` with `||Ax - b||_H <= 1e-10 ||b||_H`.
    pub fn apply_inverse(&self, b: &CVector) -> Result<CVector> {
        self.check_len(b.len())?;
        if !self.is_invertible() {
            return Err(Error::SingularGenerator);
        }
        let lu = self.a.clone().lu();
        let mut x = lu.solve(b).ok_or(Error::SingularGenerator)?;
        let bnorm = self.energy_norm(b)?;
        for _ in 0..3 {
            let r = b - &self.a * &x;
            if self.energy_norm(&r)? <= 1e-10 * bnorm {
                return Ok(x);
            }
            x += lu.solve(&r).ok_or(Error::SingularGenerator)?;
        }
        let r = b - &self.a * &x;
        if self.energy_norm(&r)? <= 1e-10 * bnorm {
            Ok(x)
        } else {
            Err(Error::SingularGenerator)
        }
    }
}

/// Builds any member of the model zoo.
pub fn make_model(spec: &ModelSpec) -> Result<Generator> {
    match spec.kind {
        ModelKind::HeatWave1d => make_heat_wave_1d(spec),
        ModelKind::WeaklyDampedChain => make_weakly_damped_chain(spec),
        _ => make_reference(spec),
    }
}

/// Tracks which parameters were read so unknown keys can be rejected.
struct Params<'a> {
    map: &'a Map<String, Value>,
    seen: Vec<&'static str>,
}

impl<'a> Params<'a> {
    fn new(map: &'a Map<String, Value>) -> Self {
        Params {
            map,
            seen: Vec::new(),
        }
    }

    fn raw(&mut self, key: &'static str) -> Option<&'a Value> {
        self.seen.push(key);
        self.map.get(key)
    }

    fn usize_or(&mut self, key: &'static str, default: Option<usize>) -> Result<usize> {
        match self.raw(key) {
            None => default.ok_or_else(|| Error::InvalidSpec(format!("missing parameter `{key}`"))),
            Some(v) => v.as_u64().map(|x| x as usize).ok_or_else(|| {
                Error::InvalidSpec(format!("`{key}` must be a non-negative integer"))
            }),
        }
    }

    fn f64_or(&mut self, key: &'static str, default: Option<f64>) -> Result<f64> {
        match self.raw(key) {
            None => default.ok_or_else(|| Error::InvalidSpec(format!("missing parameter `{key}`"))),
            Some(v) => v
                .as_f64()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::InvalidSpec(format!("`{key}` must be a finite number"))),
        }
    }

    fn bool_or(&mut self, key: &'static str, default: bool) -> Result<bool> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v
                .as_bool()
                .ok_or_else(|| Error::InvalidSpec(format!("`{key}` must be a boolean"))),
        }
    }

    fn finish(self) -> Result<()> {
        for key in self.map.keys() {
            if !self.seen.contains(&key.as_str()) {
                return Err(Error::InvalidSpec(format!("unknown parameter `{key}`")));
            }
        }
        Ok(())
    }
}

fn positive(key: &str, x: f64) -> Result<f64> {
    if x > 0.0 {
        Ok(x)
    } else {
        Err(Error::InvalidSpec(format!("`{key}` must be > 0, got {x}")))
    }
}

fn nonnegative(key: &str, x: f64) -> Result<f64> {
    if x >= 0.0 {
        Ok(x)
    } else {
        Err(Error::InvalidSpec(format!("`{key}` must be >= 0, got {x}")))
    }
}

fn grid_size(key: &str, n: usize) -> Result<usize> {
    if n >= 2 {
        Ok(n)
    } else {
        Err(Error::InvalidSpec(format!("`{key}` must be >= 2, got {n}")))
    }
}

fn wrong_kind(spec: &ModelSpec) -> Error {
    Error::InvalidSpec(format!("unexpected model kind `{}`", spec.kind.as_str()))
}

/// Heat equation `u_t = c u_xx` on `(-L_h, 0)` coupled at `x = 0` to the wave
/// equation `w_tt = kappa w_xx` on `(0, L_w)`, Dirichlet at both outer ends,
/// with `u(0) = w_t(0)` and `c u_x(0) = kappa w_x(0)`.
///
/// Mass-lumped centred differences on uniform grids. The wave grid has
/// `nx_wave` cells; its displacement unknowns are the interface node and the
/// `nx_wave - 1` interior nodes, its velocity unknowns the interior nodes.
/// The heat grid has `nx_heat` interior nodes plus the interface node, which
/// also carries the wave velocity there. State layout is `(w, w_t, u)`, so
/// `dim = 2 nx_wave + nx_heat`.
///
/// The Gram matrix is the exact energy of the piecewise-linear interpolant
/// under the lumped mass, `kappa |w_x|^2 + |w_t|^2 + |u|^2`; the interface
/// fluxes cancel in `GA + A^T G`, leaving `-2c` times the heat stiffness.
pub fn make_heat_wave_1d(spec: &ModelSpec) -> Result<Generator> {
    if spec.kind != ModelKind::HeatWave1d {
        return Err(wrong_kind(spec));
    }
    let mut p = Params::new(&spec.parameters);
    let nh = grid_size("nx_heat", p.usize_or("nx_heat", None)?)?;
    let nw = grid_size("nx_wave", p.usize_or("nx_wave", None)?)?;
    let c = positive("diffusivity", p.f64_or("diffusivity", Some(1.0))?)?;
    let speed = positive("wave_speed", p.f64_or("wave_speed", Some(1.0))?)?;
    let heat_len = positive("heat_length", p.f64_or("heat_length", Some(1.0))?)?;
    let wave_len = positive("wave_length", p.f64_or("wave_length", Some(1.0))?)?;
    p.finish()?;

    let kappa = speed * speed;
    let m = nw;
    let k = nh + 1;
    let hw = wave_len / m as f64;
    let hh = heat_len / k as f64;
    let dim = 2 * m + nh;

    let iw = |j: usize| j; // j = 0..m-1
    let iv = |j: usize| m + j - 1; // j = 1..m-1
    let iu = |i: usize| 2 * m - 1 + i - 1; // i = 1..k, k is the interface
    let interface_mass = 0.5 * (hh + hw);

    let mut a = DMatrix::<f64>::zeros(dim, dim);
    let mut g = DMatrix::<f64>::zeros(dim, dim);

    // displacement rates
    a[(iw(0), iu(k))] = 1.0;
    for j in 1..m {
        a[(iw(j), iv(j))] = 1.0;
    }

    // wave momentum at interior nodes, w_m = 0
    let wave_coef = kappa / (hw * hw);
    for j in 1..m {
        a[(iv(j), iw(j))] = -2.0 * wave_coef;
        a[(iv(j), iw(j - 1))] = wave_coef;
        if j + 1 < m {
            a[(iv(j), iw(j + 1))] = wave_coef;
        }
    }

    // heat at interior nodes, u_0 = 0
    let heat_coef = c / (hh * hh);
    for i in 1..k {
        a[(iu(i), iu(i))] = -2.0 * heat_coef;
        if i > 1 {
            a[(iu(i), iu(i - 1))] = heat_coef;
        }
        a[(iu(i), iu(i + 1))] = heat_coef;
    }

    // interface balance: heat flux in from the left, wave stress from the right
    let ik = iu(k);
    a[(ik, ik)] = -c / hh / interface_mass;
    a[(ik, iu(k - 1))] = c / hh / interface_mass;
    a[(ik, iw(0))] = -kappa / hw / interface_mass;
    if m > 1 {
        a[(ik, iw(1))] = kappa / hw / interface_mass;
    }

    // kappa * stiffness on displacements
    for j in 0..m {
        g[(iw(j), iw(j))] = kappa * if j == 0 { 1.0 } else { 2.0 } / hw;
        if j + 1 < m {
            g[(iw(j), iw(j + 1))] = -kappa / hw;
            g[(iw(j + 1), iw(j))] = -kappa / hw;
        }
    }
    for j in 1..m {
        g[(iv(j), iv(j))] = hw;
    }
    for i in 1..k {
        g[(iu(i), iu(i))] = hh;
    }
    g[(ik, ik)] = interface_mass;

    let nyquist = PI / hw * speed;
    let label = format!("heat_wave_1d(nx_heat={nh}, nx_wave={nw})");
    Ok(Generator::new(label, a, g)?
        .with_flags(Flags {
            dissipative: true,
            conservative_part: false,
        })
        .with_metadata("kind", "heat_wave_1d")
        .with_metadata("nx_heat", nh)
        .with_metadata("nx_wave", nw)
        .with_metadata("diffusivity", c)
        .with_metadata("wave_speed", speed)
        .with_metadata("heat_length", heat_len)
        .with_metadata("wave_length", wave_len)
        .with_metadata("dx_heat", hh)
        .with_metadata("dx_wave", hw)
        .with_metadata("nyquist_frequency", nyquist))
}

/// Two strings of `n` nodes each, `x1'' + d x1' + K x1 + g (x1 - x2) = 0` and
/// `x2'' + K x2 + g (x2 - x1) = 0`, where `K` is the Dirichlet finite-difference
/// stiffness of a unit-length string scaled by `stiffness`. Damping reaches
/// the second string only through the coupling. State layout is
/// `(x1, x2, x1', x2')` and `G = diag(Kc, I)` with `Kc` the coupled stiffness.
pub fn make_weakly_damped_chain(spec: &ModelSpec) -> Result<Generator> {
    if spec.kind != ModelKind::WeaklyDampedChain {
        return Err(wrong_kind(spec));
    }
    let mut p = Params::new(&spec.parameters);
    let n = p.usize_or("n", None)?;
    if n < 1 {
        return Err(Error::InvalidSpec("`n` must be >= 1".into()));
    }
    let d = nonnegative("damping", p.f64_or("damping", Some(1.0))?)?;
    let gamma = nonnegative("coupling", p.f64_or("coupling", Some(1.0))?)?;
    let stiffness = positive("stiffness", p.f64_or("stiffness", Some(1.0))?)?;
    p.finish()?;

    let h_inv2 = ((n + 1) as f64).powi(2);
    let kmat = DMatrix::<f64>::from_fn(n, n, |i, j| {
        if i == j {
            2.0 * stiffness * h_inv2
        } else if i.abs_diff(j) == 1 {
            -stiffness * h_inv2
        } else {
            0.0
        }
    });

    let dim = 4 * n;
    let mut coupled = DMatrix::<f64>::zeros(2 * n, 2 * n);
    coupled.view_mut((0, 0), (n, n)).copy_from(&kmat);
    coupled.view_mut((n, n), (n, n)).copy_from(&kmat);
    for i in 0..n {
        coupled[(i, i)] += gamma;
        coupled[(n + i, n + i)] += gamma;
        coupled[(i, n + i)] -= gamma;
        coupled[(n + i, i)] -= gamma;
    }

    let mut a = DMatrix::<f64>::zeros(dim, dim);
    let mut g = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..2 * n {
        a[(i, 2 * n + i)] = 1.0;
        g[(2 * n + i, 2 * n + i)] = 1.0;
    }
    a.view_mut((2 * n, 0), (2 * n, 2 * n))
        .copy_from(&(-&coupled));
    for i in 0..n {
        a[(2 * n + i, 2 * n + i)] = -d;
    }
    g.view_mut((0, 0), (2 * n, 2 * n)).copy_from(&coupled);

    let max_freq = (coupled.symmetric_eigenvalues().max()).sqrt();
    let label = format!("weakly_damped_chain(n={n}, d={d}, coupling={gamma})");
    Ok(Generator::new(label, a, g)?
        .with_flags(Flags {
            dissipative: true,
            conservative_part: d == 0.0 || gamma == 0.0,
        })
        .with_metadata("kind", "weakly_damped_chain")
        .with_metadata("n", n)
        .with_metadata("damping", d)
        .with_metadata("coupling", gamma)
        .with_metadata("stiffness", stiffness)
        .with_metadata("max_frequency", max_freq))
}

fn parse_eigenvalue(v: &Value) -> Result<Complex64> {
    let bad = || Error::InvalidSpec(format!("cannot read eigenvalue from {v}"));
    match v {
        Value::Number(x) => Ok(Complex64::new(x.as_f64().ok_or_else(bad)?, 0.0)),
        Value::Array(parts) if parts.len() == 2 => Ok(Complex64::new(
            parts[0].as_f64().ok_or_else(bad)?,
            parts[1].as_f64().ok_or_else(bad)?,
        )),
        Value::Object(obj) => Ok(Complex64::new(
            obj.get("re").and_then(Value::as_f64).ok_or_else(bad)?,
            obj.get("im").and_then(Value::as_f64).unwrap_or(0.0),
        )),
        _ => Err(bad()),
    }
}

/// Analytic reference models, all with `G = I`:
/// `uniformly_damped` (`A = -I`), `conservative_oscillator`
/// (`A = [[0, 1], [-1, 0]]`) and `diagonal` (`A = diag(lambda_i)`).
///
/// For `diagonal`, conjugate pairs are realized as real normal blocks
/// `[[a, b], [-b, a]]` so the matrix stays real; an unpaired non-real
/// eigenvalue makes the generator complex.
pub fn make_reference(spec: &ModelSpec) -> Result<Generator> {
    let mut p = Params::new(&spec.parameters);
    let generator = match spec.kind {
        ModelKind::UniformlyDamped => {
            let dim = p.usize_or("dim", Some(1))?;
            if dim < 1 {
                return Err(Error::InvalidSpec("`dim` must be >= 1".into()));
            }
            p.finish()?;
            Generator::new(
                format!("uniformly_damped(dim={dim})"),
                -DMatrix::<f64>::identity(dim, dim),
                DMatrix::identity(dim, dim),
            )?
            .with_flags(Flags {
                dissipative: true,
                conservative_part: false,
            })
            .with_metadata("dim", dim)
        }
        ModelKind::ConservativeOscillator => {
            p.finish()?;
            Generator::new(
                "conservative_oscillator",
                DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
                DMatrix::identity(2, 2),
            )?
            .with_flags(Flags {
                dissipative: true,
                conservative_part: true,
            })
        }
        ModelKind::Diagonal => {
            let list = p
                .raw("eigenvalues")
                .and_then(Value::as_array)
                .ok_or_else(|| {
                    Error::InvalidSpec("`diagonal` needs an `eigenvalues` list".into())
                })?;
            let invertible = p.bool_or("invertible", true)?;
            p.finish()?;
            let lambdas = list
                .iter()
                .map(parse_eigenvalue)
                .collect::<Result<Vec<_>>>()?;
            if lambdas.is_empty() {
                return Err(Error::InvalidSpec("`eigenvalues` must be nonempty".into()));
            }
            if invertible && lambdas.iter().any(|z| z.norm() == 0.0) {
                return Err(Error::InvalidSpec(
                    "zero eigenvalue in a model flagged `invertible`".into(),
                ));
            }
            let a = realize_diagonal(&lambdas);
            let n = a.nrows();
            let on_axis = lambdas.iter().any(|z| z.re == 0.0);
            let g = Generator::from_complex("diagonal", a, DMatrix::identity(n, n))?;
            let is_real = g.is_real;
            let mut g = g
                .with_flags(Flags {
                    dissipative: lambdas.iter().all(|z| z.re <= 0.0),
                    conservative_part: on_axis,
                })
                .with_metadata("invertible", invertible);
            g.is_real = is_real;
            g
        }
        _ => return Err(wrong_kind(spec)),
    };
    Ok(generator.with_metadata("kind", spec.kind.as_str()))
}

fn realize_diagonal(lambdas: &[Complex64]) -> CMatrix {
    let n = lambdas.len();
    let mut used = vec![false; n];
    let mut a = CMatrix::zeros(n, n);
    let mut pos = 0;
    for i in 0..n {
        if used[i] {
            continue;
        }
        used[i] = true;
        let z = lambdas[i];
        let partner = if z.im != 0.0 {
            (i + 1..n).find(|&j| !used[j] && lambdas[j] == z.conj())
        } else {
            None
        };
        match partner {
            Some(j) => {
                used[j] = true;
                let (re, im) = (z.re, z.im);
                a[(pos, pos)] = Complex64::new(re, 0.0);
                a[(pos, pos + 1)] = Complex64::new(im, 0.0);
                a[(pos + 1, pos)] = Complex64::new(-im, 0.0);
                a[(pos + 1, pos + 1)] = Complex64::new(re, 0.0);
                pos += 2;
            }
            None => {
                a[(pos, pos)] = z;
                pos += 1;
            }
        }
    }
    a
}
