//! Poincare ball operations and the complex unit ball with its Bergman distance.
//!
//! The real side is the open ball of radius `1/sqrt(c)` with curvature `-c`,
//! equipped with Mobius addition and the origin exp/log maps. The complex side
//! is the unit ball of `n` complex coordinates (homogeneous coordinate fixed
//! to 1) scored by the Bergman distance.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Boundary margin: points are clamped to norm `(1 - BALL_EPS) / sqrt(c)`
/// (real side) or `1 - BALL_EPS` (complex side).
pub const BALL_EPS: f64 = 1e-5;

/// Norms below this are treated as the origin in exp/log maps.
pub const ORIGIN_EPS: f64 = 1e-12;

/// Lower clamp margin for the arcosh argument.
pub const ARCOSH_EPS: f64 = 1e-12;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

/// artanh with the argument clamped to `[-(1 - BALL_EPS), 1 - BALL_EPS]`.
pub(crate) fn artanh(u: f64) -> f64 {
    let u = u.clamp(-(1.0 - BALL_EPS), 1.0 - BALL_EPS);
    0.5 * ((1.0 + u) / (1.0 - u)).ln()
}

/// arcosh with the argument clamped to `>= 1 + ARCOSH_EPS`.
pub(crate) fn arcosh(u: f64) -> f64 {
    let u = u.max(1.0 + ARCOSH_EPS);
    (u + (u * u - 1.0).sqrt()).ln()
}

/// Rescale `coords` in place so its Euclidean norm is at most `max_norm`.
pub(crate) fn clamp_norm(coords: &mut [f64], max_norm: f64) {
    let n = norm(coords);
    if n > max_norm {
        let s = max_norm / n;
        for x in coords.iter_mut() {
            *x *= s;
        }
    }
}

fn check_curvature(c: f64) -> Result<()> {
    if c <= 0.0 || !c.is_finite() {
        return Err(Error::Domain(format!(
            "curvature must be a positive finite real, got {c}"
        )));
    }
    Ok(())
}

/// A point strictly inside the curvature `-c` Poincare ball.
#[derive(Debug, Clone, PartialEq)]
pub struct PoincarePoint {
    coords: Vec<f64>,
    curvature: f64,
}

impl PoincarePoint {
    /// Builds a point, clamping it into the open ball of radius `1/sqrt(c)`.
    pub fn new(mut coords: Vec<f64>, curvature: f64) -> Result<Self> {
        check_curvature(curvature)?;
        if coords.is_empty() || coords.len() % 2 != 0 {
            return Err(Error::Domain(format!(
                "Poincare point dimension must be even and positive, got {}",
                coords.len()
            )));
        }
        clamp_norm(&mut coords, (1.0 - BALL_EPS) / curvature.sqrt());
        Ok(Self { coords, curvature })
    }

    pub fn origin(dim: usize, curvature: f64) -> Result<Self> {
        Self::new(vec![0.0; dim], curvature)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn curvature(&self) -> f64 {
        self.curvature
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// A vector in the tangent space at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    coords: Vec<f64>,
}

impl TangentVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain(
                "tangent vector entries must be finite".into(),
            ));
        }
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// A point of the complex unit ball: `n` complex coordinates with
/// `sum |z_i|^2 < 1`; the homogeneous coordinate is implicitly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexBallPoint {
    coords: Vec<Complex64>,
}

impl ComplexBallPoint {
    /// Builds a point, clamping the coordinate vector to norm `1 - BALL_EPS`.
    pub fn new(mut coords: Vec<Complex64>) -> Self {
        let n = coords.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let max = 1.0 - BALL_EPS;
        if n > max {
            let s = max / n;
            for z in coords.iter_mut() {
                *z *= s;
            }
        }
        Self { coords }
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm_sq(&self) -> f64 {
        self.coords.iter().map(|z| z.norm_sqr()).sum()
    }
}

fn check_same_dim(context: &'static str, a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            context,
            left: a,
            right: b,
        });
    }
    Ok(())
}

fn check_same_ball(context: &'static str, x: &PoincarePoint, y: &PoincarePoint) -> Result<()> {
    check_same_dim(context, x.dim(), y.dim())?;
    if x.curvature != y.curvature {
        return Err(Error::Domain(format!(
            "{context}: points live in balls of different curvature ({} vs {})",
            x.curvature, y.curvature
        )));
    }
    Ok(())
}

/// Mobius addition on raw coordinates, without re-clamping the result.
pub(crate) fn mobius_add_raw(x: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let x2 = norm_sq(x);
    let y2 = norm_sq(y);
    let xy = dot(x, y);
    let coef_x = 1.0 + 2.0 * c * xy + c * y2;
    let coef_y = 1.0 - c * x2;
    let den = 1.0 + 2.0 * c * xy + c * c * x2 * y2;
    x.iter()
        .zip(y)
        .map(|(xi, yi)| (coef_x * xi + coef_y * yi) / den)
        .collect()
}

/// Mobius addition `x (+)_c y`, the gyrovector addition of the ball.
pub fn mobius_add(x: &PoincarePoint, y: &PoincarePoint) -> Result<PoincarePoint> {
    check_same_ball("mobius_add", x, y)?;
    PoincarePoint::new(mobius_add_raw(&x.coords, &y.coords, x.curvature), x.curvature)
}

pub(crate) fn poincare_distance_raw(x: &[f64], y: &[f64], c: f64) -> f64 {
    let neg_x: Vec<f64> = x.iter().map(|v| -v).collect();
    let diff = mobius_add_raw(&neg_x, y, c);
    let sc = c.sqrt();
    (2.0 / sc) * artanh(sc * norm(&diff))
}

/// Geodesic distance `(2/sqrt(c)) artanh(sqrt(c) ||(-x) (+)_c y||)`.
pub fn poincare_distance(x: &PoincarePoint, y: &PoincarePoint) -> Result<f64> {
    check_same_ball("poincare_distance", x, y)?;
    Ok(poincare_distance_raw(&x.coords, &y.coords, x.curvature))
}

pub(crate) fn exp_map_zero_raw(v: &[f64], c: f64) -> Vec<f64> {
    let r = norm(v);
    if r < ORIGIN_EPS {
        // Removable singularity: tanh(u)/u -> 1, so the map is the identity here.
        return v.to_vec();
    }
    let arg = c.sqrt() * r;
    let coef = arg.tanh() / arg;
    v.iter().map(|vi| coef * vi).collect()
}

/// Exponential map at the origin: `tanh(sqrt(c)||v||) v / (sqrt(c)||v||)`.
pub fn exp_map_zero(v: &TangentVector, c: f64) -> Result<PoincarePoint> {
    check_curvature(c)?;
    PoincarePoint::new(exp_map_zero_raw(&v.coords, c), c)
}

pub(crate) fn log_map_zero_raw(y: &[f64], c: f64) -> Vec<f64> {
    let r = norm(y);
    if r < ORIGIN_EPS {
        return y.to_vec();
    }
    let u = c.sqrt() * r;
    let coef = artanh(u) / u;
    y.iter().map(|yi| coef * yi).collect()
}

/// Logarithmic map at the origin, inverse of [`exp_map_zero`].
pub fn log_map_zero(y: &PoincarePoint) -> TangentVector {
    TangentVector {
        coords: log_map_zero_raw(&y.coords, y.curvature),
    }
}

/// The Hermitian form `sum z_i conj(w_i) - 1`; the trailing `-1` is the
/// product of the homogeneous coordinates, both fixed to 1.
pub fn hermitian_form(z: &ComplexBallPoint, w: &ComplexBallPoint) -> Result<Complex64> {
    check_same_dim("hermitian_form", z.dim(), w.dim())?;
    let s: Complex64 = z
        .coords
        .iter()
        .zip(&w.coords)
        .map(|(zi, wi)| zi * wi.conj())
        .sum();
    Ok(s - Complex64::new(1.0, 0.0))
}

/// Bergman distance `arcosh(2 <z,w><w,z> / (<z,z><w,w>) - 1)` of the unit ball.
pub fn bergman_distance(z: &ComplexBallPoint, w: &ComplexBallPoint) -> Result<f64> {
    check_same_dim("bergman_distance", z.dim(), w.dim())?;
    let zw = hermitian_form(z, w)?;
    // <z,w><w,z> = |<z,w>|^2; <z,z> and <w,w> are real and negative inside the ball.
    let num = zw.norm_sqr();
    let zz = z.norm_sq() - 1.0;
    let ww = w.norm_sq() - 1.0;
    let arg = 2.0 * num / (zz * ww) - 1.0;
    Ok(arcosh(arg))
}
