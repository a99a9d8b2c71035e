//! Constant-velocity prediction and probabilistic data association update.

use nalgebra::{Matrix2, Matrix2x4, Matrix4, SymmetricEigen, Vector2, Vector4};

use super::{Track, TrackerConfig};
use crate::error::{Error, Result};

pub fn transition(dt: f64) -> Matrix4<f64> {
    let mut f = Matrix4::identity();
    f[(0, 2)] = dt;
    f[(1, 3)] = dt;
    f
}

/// Discretized white-noise-acceleration covariance.
pub fn process_noise(dt: f64, q: f64) -> Matrix4<f64> {
    let (a, b, c) = (q * dt.powi(3) / 3.0, q * dt.powi(2) / 2.0, q * dt);
    let mut m = Matrix4::zeros();
    for (p, v) in [(0, 2), (1, 3)] {
        m[(p, p)] = a;
        m[(p, v)] = b;
        m[(v, p)] = b;
        m[(v, v)] = c;
    }
    m
}

pub fn observation() -> Matrix2x4<f64> {
    Matrix2x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0)
}

pub fn predict(track: &Track, dt: f64, cfg: &TrackerConfig) -> Track {
    let f = transition(dt);
    let mut out = track.clone();
    out.mean = f * track.mean;
    out.cov = symmetrize(f * track.cov * f.transpose() + process_noise(dt, cfg.process_noise_q));
    out.existence = cfg.survival_probability * track.existence;
    out.visibility = cfg.p_visible_to_visible * track.visibility
        + cfg.p_invisible_to_visible * (1.0 - track.visibility);
    out
}

/// Squared-Mahalanobis gate threshold for two degrees of freedom.
pub fn gate_threshold(p_gate: f64) -> f64 {
    -2.0 * (1.0 - p_gate).ln()
}

/// Innovation covariance and its inverse for a predicted track.
#[derive(Debug, Clone, Copy)]
pub struct Innovation {
    pub s: Matrix2<f64>,
    pub s_inv: Matrix2<f64>,
    pub norm: f64,
}

impl Innovation {
    pub fn new(track: &Track, cfg: &TrackerConfig) -> Result<Self> {
        let h = observation();
        let s = symmetrize2(
            h * track.cov * h.transpose() + Matrix2::identity() * cfg.measurement_std_m.powi(2),
        );
        let chol = s.cholesky().ok_or_else(|| {
            Error::Numerical(format!(
                "track {}: innovation covariance not positive definite",
                track.id
            ))
        })?;
        let det = s.determinant();
        Ok(Self {
            s,
            s_inv: chol.inverse(),
            norm: 1.0 / (2.0 * std::f64::consts::PI * det.sqrt()),
        })
    }

    pub fn mahalanobis_sq(&self, nu: &Vector2<f64>) -> f64 {
        (nu.transpose() * self.s_inv * nu)[(0, 0)]
    }

    /// Gaussian density of the innovation.
    pub fn likelihood(&self, nu: &Vector2<f64>) -> f64 {
        self.norm * (-0.5 * self.mahalanobis_sq(nu)).exp()
    }
}

pub fn innovation_of(track: &Track, z: (f64, f64)) -> Vector2<f64> {
    Vector2::new(z.0 - track.mean[0], z.1 - track.mean[1])
}

/// Indices of measurements inside the track's validation gate.
pub fn gate(track: &Track, measurements: &[(f64, f64)], cfg: &TrackerConfig) -> Result<Vec<usize>> {
    let inn = Innovation::new(track, cfg)?;
    let gamma = gate_threshold(cfg.gate_probability);
    Ok(measurements
        .iter()
        .enumerate()
        .filter(|(_, &z)| inn.mahalanobis_sq(&innovation_of(track, z)) < gamma)
        .map(|(i, _)| i)
        .collect())
}

/// Association weights: `[β_0, β_1, ..]`.
pub fn association_weights(
    track: &Track,
    likelihoods: &[f64],
    cfg: &TrackerConfig,
) -> (Vec<f64>, f64) {
    let pd = cfg.detection_probability * track.visibility;
    let sum_lr: f64 = likelihoods.iter().map(|g| g / cfg.clutter_density).sum();
    // 1 - δ in the existence recursion
    let denom = 1.0 - pd * cfg.gate_probability + pd * sum_lr;
    let mut w = Vec::with_capacity(likelihoods.len() + 1);
    w.push((1.0 - pd * cfg.gate_probability) / denom);
    w.extend(
        likelihoods
            .iter()
            .map(|g| pd * g / cfg.clutter_density / denom),
    );
    (w, denom)
}

/// Moment-matched PDA update with the Bayes updates of existence and
/// visibility. `owned` holds the measurements this track may use.
pub fn update(
    track: &Track,
    owned: &[(f64, f64)],
    cfg: &TrackerConfig,
) -> Result<(Track, Vec<f64>)> {
    let inn = Innovation::new(track, cfg)?;
    let nus: Vec<Vector2<f64>> = owned.iter().map(|&z| innovation_of(track, z)).collect();
    let g: Vec<f64> = nus.iter().map(|nu| inn.likelihood(nu)).collect();
    let (beta, denom) = association_weights(track, &g, cfg);

    let r = track.existence;
    let v = track.visibility;
    let sum_lr: f64 = g.iter().map(|g| g / cfg.clutter_density).sum();
    let vis_lr =
        1.0 - cfg.detection_probability * cfg.gate_probability + cfg.detection_probability * sum_lr;

    let mut out = track.clone();
    out.existence = clamp01(denom * r / (1.0 - r + denom * r));
    out.visibility = clamp01(v * vis_lr / denom);

    let h = observation();
    let k = track.cov * h.transpose() * inn.s_inv;
    let mut nu_c = Vector2::zeros();
    let mut spread = Matrix2::zeros();
    for (b, nu) in beta[1..].iter().zip(&nus) {
        nu_c += *b * nu;
        spread += *b * nu * nu.transpose();
    }
    spread -= nu_c * nu_c.transpose();
    let b0 = beta[0];
    let p_c = track.cov - k * inn.s * k.transpose();
    out.mean = track.mean + k * nu_c;
    out.cov = clamp_psd(
        symmetrize(b0 * track.cov + (1.0 - b0) * p_c + k * spread * k.transpose()),
        track.id,
    )?;
    Ok((out, beta))
}

fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

pub fn symmetrize(m: Matrix4<f64>) -> Matrix4<f64> {
    (m + m.transpose()) * 0.5
}

fn symmetrize2(m: Matrix2<f64>) -> Matrix2<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigenvalues down to -1e-9 are clamped to zero; anything lower is a failure.
fn clamp_psd(m: Matrix4<f64>, id: u64) -> Result<Matrix4<f64>> {
    let eig = SymmetricEigen::new(m);
    let min = eig.eigenvalues.min();
    if min >= 0.0 {
        return Ok(m);
    }
    if min < -1e-9 {
        return Err(Error::Numerical(format!(
            "track {id}: covariance eigenvalue {min}"
        )));
    }
    let vals = eig.eigenvalues.map(|e| e.max(0.0));
    Ok(symmetrize(
        eig.eigenvectors * Matrix4::from_diagonal(&vals) * eig.eigenvectors.transpose(),
    ))
}

pub fn nees(track: &Track, truth: &Vector4<f64>) -> Result<f64> {
    let e = truth - track.mean;
    let inv = track
        .cov
        .cholesky()
        .ok_or_else(|| Error::Numerical("covariance not positive definite".into()))?
        .inverse();
    Ok((e.transpose() * inv * e)[(0, 0)])
}
