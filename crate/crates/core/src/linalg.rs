//! Dense complex linear algebra used by the probes: extreme singular
//! values, scaling-and-squaring matrix exponential, and small helpers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Above this order `sigma_min` switches from a full SVD to inverse iteration.
pub const DENSE_SVD_LIMIT: usize = 2000;

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn real_vector_to_complex(v: &DVector<f64>) -> CVector {
    v.map(|x| Complex64::new(x, 0.0))
}

/// `i*s*I - m`.
pub fn shifted(m: &CMatrix, s: f64) -> CMatrix {
    let mut out = -m.clone();
    for k in 0..m.nrows() {
        out[(k, k)] += Complex64::new(0.0, s);
    }
    out
}

pub fn sigma_max(m: &CMatrix) -> f64 {
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Smallest singular value. Full SVD up to `dense_limit`, inverse iteration
/// on `m* m` through an LU factorization beyond it.
pub fn sigma_min_with_limit(m: &CMatrix, dense_limit: usize) -> f64 {
    if m.nrows() <= dense_limit {
        return m
            .clone()
            .singular_values()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
    }
    sigma_min_inverse_iteration(m, 200, 1e-13)
}

pub fn sigma_min(m: &CMatrix) -> f64 {
    sigma_min_with_limit(m, DENSE_SVD_LIMIT)
}

/// Inverse iteration for the smallest singular value: iterate
/// `x <- (m* m)^{-1} x` using one LU of `m`.
pub fn sigma_min_inverse_iteration(m: &CMatrix, max_iter: usize, tol: f64) -> f64 {
    let n = m.nrows();
    let lu = m.clone().lu();
    let adj_lu = m.adjoint().lu();
    // deterministic start with components in every direction
    let mut x = CVector::from_fn(n, |i, _| {
        Complex64::new(1.0 + (i as f64 * 0.618_033_988_7).fract(), 0.25)
    });
    x /= Complex64::new(x.norm(), 0.0);
    let mut growth = 0.0;
    for _ in 0..max_iter {
        let y = match adj_lu.solve(&x) {
            Some(y) => y,
            None => return 0.0,
        };
        let z = match lu.solve(&y) {
            Some(z) => z,
            None => return 0.0,
        };
        let nz = z.norm();
        if !nz.is_finite() || nz == 0.0 {
            return 0.0;
        }
        let next = nz;
        x = z / Complex64::new(nz, 0.0);
        if (next - growth).abs() <= tol * next {
            growth = next;
            break;
        }
        growth = next;
    }
    // growth approximates 1/sigma_min^2
    1.0 / growth.sqrt()
}

fn one_norm(m: &CMatrix) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

// Padé coefficients b_0..b_m for degrees 3, 5, 7, 9 and 13.
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Backward-error bounds on the 1-norm for each degree (double precision).
const THETA3: f64 = 1.495585217958292e-2;
const THETA5: f64 = 2.539_398_330_063_23e-1;
const THETA7: f64 = 9.504178996162932e-1;
const THETA9: f64 = 2.097847961257068e0;
const THETA13: f64 = 5.371920351148152e0;

fn scale(m: &CMatrix, c: f64) -> CMatrix {
    m * Complex64::new(c, 0.0)
}

fn add_identity(m: &mut CMatrix, c: f64) {
    for k in 0..m.nrows() {
        m[(k, k)] += Complex64::new(c, 0.0);
    }
}

/// Matrix exponential by scaling and squaring with a Padé approximant whose
/// degree is picked from the 1-norm so the backward error stays at unit
/// roundoff. Returns `None` when the result is not finite.
pub fn expm(a: &CMatrix) -> Option<CMatrix> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    if n == 0 {
        return Some(CMatrix::zeros(0, 0));
    }
    let norm = one_norm(a);
    if !norm.is_finite() {
        return None;
    }

    let low_degree = [
        (THETA3, &PADE3[..]),
        (THETA5, &PADE5[..]),
        (THETA7, &PADE7[..]),
        (THETA9, &PADE9[..]),
    ];
    for (theta, b) in low_degree {
        if norm <= theta {
            let (u, v) = pade_low(a, b);
            return pade_ratio(&u, &v).filter(|e| e.iter().all(|z| z.is_finite()));
        }
    }

    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let a_scaled = scale(a, 0.5f64.powi(squarings as i32));
    let b = &PADE13;
    let a2 = &a_scaled * &a_scaled;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let mut inner_u = scale(&a6, b[13]) + scale(&a4, b[11]) + scale(&a2, b[9]);
    inner_u = &a6 * inner_u;
    let mut u = inner_u + scale(&a6, b[7]) + scale(&a4, b[5]) + scale(&a2, b[3]);
    add_identity(&mut u, b[1]);
    let u = &a_scaled * u;

    let mut inner_v = scale(&a6, b[12]) + scale(&a4, b[10]) + scale(&a2, b[8]);
    inner_v = &a6 * inner_v;
    let mut v = inner_v + scale(&a6, b[6]) + scale(&a4, b[4]) + scale(&a2, b[2]);
    add_identity(&mut v, b[0]);

    let mut e = pade_ratio(&u, &v)?;
    for _ in 0..squarings {
        e = &e * &e;
        if !e.iter().all(|z| z.is_finite()) {
            return None;
        }
    }
    if e.iter().all(|z| z.is_finite()) {
        Some(e)
    } else {
        None
    }
}

fn pade_low(a: &CMatrix, b: &[f64]) -> (CMatrix, CMatrix) {
    let n = a.nrows();
    let m = b.len() - 1;
    let a2 = a * a;
    let mut even_pow = CMatrix::identity(n, n);
    let mut u = CMatrix::zeros(n, n);
    let mut v = CMatrix::zeros(n, n);
    let mut k = 0;
    while k <= m {
        // even_pow = A^k for even k
        v += scale(&even_pow, b[k]);
        if k < m {
            u += scale(&even_pow, b[k + 1]);
        }
        even_pow = &even_pow * &a2;
        k += 2;
    }
    (a * u, v)
}

/// Solves `(V - U) X = V + U`.
fn pade_ratio(u: &CMatrix, v: &CMatrix) -> Option<CMatrix> {
    let p = v + u;
    let q = v - u;
    q.lu().solve(&p)
}

/// Eigenvalues and eigenvectors (columns of `V`) of a diagonalizable
/// matrix, by back substitution on the complex Schur form.
pub fn eigen_decomposition(m: &CMatrix) -> (Vec<Complex64>, CMatrix) {
    let n = m.nrows();
    let (q, t) = nalgebra::Schur::new(m.clone()).unpack();
    let lambdas: Vec<Complex64> = (0..n).map(|k| t[(k, k)]).collect();
    let scale = t
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut y = CMatrix::zeros(n, n);
    for k in 0..n {
        y[(k, k)] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in i + 1..=k {
                acc += t[(i, j)] * y[(j, k)];
            }
            let mut denom = t[(i, i)] - lambdas[k];
            if denom.norm() < f64::EPSILON * scale {
                denom = Complex64::new(f64::EPSILON * scale, 0.0);
            }
            y[(i, k)] = -acc / denom;
        }
    }
    let mut v = q * y;
    for k in 0..n {
        let norm = v.column(k).norm();
        v.column_mut(k).unscale_mut(norm);
    }
    (lambdas, v)
}
