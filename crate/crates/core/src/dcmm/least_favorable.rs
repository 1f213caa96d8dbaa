//! Randomized `(K+1)`-community perturbation of a base model.
//!
//! Community `K` is split by the sign of `σ_i`. With `c = P_KK`, the split
//! block of `P̌` is `[[c+ε, c-ε], [c-ε, c+ε]]`, which gives
//! `Ω̃_ij = Ω_ij + ε σ_i σ_j θ_i ζ_j Π_iK Γ_jK` (with `ζ = θ`, `Γ = Π` when
//! undirected). A final rescaling by `D = diag(1, .., 1, √(c+ε), √(c+ε))`
//! gives the last two diagonal entries of `P̃` the value 1, with the row
//! normalizers folded into the degree parameters.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{build_omega, to_rows, DcmmParams};
use crate::error::{Error, Result};
use crate::rng::{Purpose, StreamRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeastFavorableSpec {
    pub epsilon: f64,
    pub sigma: Vec<i8>,
    pub base: DcmmParams,
}

/// Independent fair signs.
pub fn rademacher(n: usize, seed: u64) -> Vec<i8> {
    let mut rng = StreamRng::for_purpose(seed, Purpose::Sigma, 0);
    (0..n).map(|_| if rng.next_f64() < 0.5 { 1 } else { -1 }).collect()
}

/// Splits the last column by sign and rescales by `D`; returns the new
/// normalized rows and the row factors `G_ii`.
fn split_memberships(rows: &[Vec<f64>], sigma: &[i8], root: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let k = rows[0].len();
    rows.iter()
        .zip(sigma)
        .map(|(r, &s)| {
            let mut out = Vec::with_capacity(k + 1);
            out.extend_from_slice(&r[..k - 1]);
            let last = root * r[k - 1];
            if s > 0 {
                out.extend([last, 0.0]);
            } else {
                out.extend([0.0, last]);
            }
            let g: f64 = out.iter().sum();
            out.iter_mut().for_each(|x| *x /= g);
            (out, g)
        })
        .unzip()
}

pub fn least_favorable(spec: &LeastFavorableSpec) -> Result<DcmmParams> {
    let base = &spec.base;
    base.validate()?;
    let (n, k, eps) = (base.n, base.k, spec.epsilon);
    if spec.sigma.len() != n {
        return Err(Error::invalid(format!("sigma has length {}, expected {n}", spec.sigma.len())));
    }
    if spec.sigma.iter().any(|s| *s != 1 && *s != -1) {
        return Err(Error::invalid("sigma entries must be +1 or -1"));
    }
    let c = base.p[k - 1][k - 1];
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::invalid(format!("epsilon must be nonnegative, got {eps}")));
    }
    if eps > c || c + eps <= 0.0 {
        return Err(Error::invalid(format!("epsilon {eps} incompatible with P_KK = {c}")));
    }

    let root = (c + eps).sqrt();
    let p = base.p_matrix();
    // P̌ with the last community duplicated, then P̃ = D⁻¹ P̌ D⁻¹.
    let src = |a: usize| a.min(k - 1);
    let d = |a: usize| if a + 1 >= k { root } else { 1.0 };
    let p_tilde = Array2::from_shape_fn((k + 1, k + 1), |(a, b)| {
        let raw = if a + 1 >= k && b + 1 >= k {
            if a == b { c + eps } else { c - eps }
        } else {
            p[[src(a), src(b)]]
        };
        raw / (d(a) * d(b))
    });

    let (pi, g) = split_memberships(&base.pi, &spec.sigma, root);
    let theta = base.theta.iter().zip(&g).map(|(t, g)| t * g).collect();
    let out = if base.directed {
        let gamma_base = base.gamma.as_ref().expect("validated");
        let zeta_base = base.zeta.as_ref().expect("validated");
        let (gamma, h) = split_memberships(gamma_base, &spec.sigma, root);
        let zeta = zeta_base.iter().zip(&h).map(|(z, h)| z * h).collect();
        DcmmParams::directed(theta, pi, to_rows(&p_tilde), zeta, gamma)?
    } else {
        DcmmParams::undirected(theta, pi, to_rows(&p_tilde))?
    };
    // Surfaces entries pushed outside [0, 1).
    build_omega(&out)?;
    Ok(out)
}
