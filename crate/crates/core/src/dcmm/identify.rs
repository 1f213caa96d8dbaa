//! Re-parametrizations that leave `Ω` unchanged but pin down `P`.

use ndarray::{Array1, Array2};

use super::{to_array, to_rows, DcmmParams};
use crate::error::{Error, Result};

const SINKHORN_MAX_ITER: usize = 10_000;
const SINKHORN_TOL: f64 = 1e-13;

/// Scales each membership row by `scale` entrywise and renormalizes; returns
/// the new rows and the per-row normalizers.
fn rescale_rows(rows: &Array2<f64>, scale: &Array1<f64>) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut out = Vec::with_capacity(rows.nrows());
    let mut sums = Vec::with_capacity(rows.nrows());
    for r in rows.outer_iter() {
        let scaled: Vec<f64> = r.iter().zip(scale).map(|(a, s)| a * s).collect();
        let s: f64 = scaled.iter().sum();
        out.push(scaled.iter().map(|x| x / s).collect());
        sums.push(s);
    }
    (out, sums)
}

fn max_sum_deviation(p: &Array2<f64>) -> f64 {
    let rows = p.rows().into_iter().map(|r| (r.sum() - 1.0).abs());
    let cols = p.columns().into_iter().map(|c| (c.sum() - 1.0).abs());
    rows.chain(cols).fold(0.0, f64::max)
}

/// Directed re-parametrization with doubly stochastic `P̃` and
/// `‖θ̃‖ = ‖ζ̃‖`.
///
/// Finds diagonal `D₁, D₂` with `D₁ P D₂` doubly stochastic, then absorbs
/// `D₁⁻¹` into `(θ, Π)` and `D₂⁻¹` into `(ζ, Γ)`. Only zero rows and
/// columns of `P` are detected up front; a `P` that is not fully
/// indecomposable surfaces as non-convergence.
pub fn sinkhorn_normalize(params: &DcmmParams) -> Result<DcmmParams> {
    params.validate()?;
    if !params.directed {
        return Err(Error::invalid("Sinkhorn normalization applies to directed models"));
    }
    let p = params.p_matrix();
    let k = params.k;
    if p.rows().into_iter().any(|r| r.sum() == 0.0) || p.columns().into_iter().any(|c| c.sum() == 0.0) {
        return Err(Error::invalid("P has a zero row or column"));
    }

    let mut d1 = Array1::<f64>::ones(k);
    let mut d2 = Array1::<f64>::ones(k);
    let mut converged = false;
    for _ in 0..SINKHORN_MAX_ITER {
        d1 = p.dot(&d2).mapv(|x| 1.0 / x);
        d2 = p.t().dot(&d1).mapv(|x| 1.0 / x);
        let scaled = Array2::from_shape_fn((k, k), |(a, b)| d1[a] * p[[a, b]] * d2[b]);
        if max_sum_deviation(&scaled) <= SINKHORN_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence { what: "Sinkhorn scaling", iterations: SINKHORN_MAX_ITER });
    }
    let p_tilde = Array2::from_shape_fn((k, k), |(a, b)| d1[a] * p[[a, b]] * d2[b]);

    let (pi, s_theta) = rescale_rows(&params.pi_matrix(), &d1.mapv(|x| 1.0 / x));
    let (gamma, s_zeta) = rescale_rows(&params.gamma_matrix(), &d2.mapv(|x| 1.0 / x));
    let mut theta: Vec<f64> = params.theta.iter().zip(&s_theta).map(|(t, s)| t * s).collect();
    let mut zeta: Vec<f64> = params.zeta_or_theta().iter().zip(&s_zeta).map(|(z, s)| z * s).collect();

    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let balance = (norm(&zeta) / norm(&theta)).sqrt();
    theta.iter_mut().for_each(|t| *t *= balance);
    zeta.iter_mut().for_each(|z| *z /= balance);

    DcmmParams::directed(theta, pi, to_rows(&p_tilde), zeta, gamma)
}

/// Undirected re-parametrization with unit diagonal:
/// `P̃_kl = P_kl / sqrt(P_kk P_ll)`.
pub fn unit_diagonal_normalize(params: &DcmmParams) -> Result<DcmmParams> {
    params.validate()?;
    if params.directed {
        return Err(Error::DirectedUnsupported);
    }
    let p = to_array(&params.p);
    let d = p.diag().to_owned();
    if d.iter().any(|x| *x <= 0.0) {
        return Err(Error::invalid("P must have a positive diagonal"));
    }
    let root = d.mapv(f64::sqrt);
    let k = params.k;
    let p_tilde = Array2::from_shape_fn((k, k), |(a, b)| {
        if a == b {
            1.0
        } else {
            p[[a, b]] / (root[a] * root[b])
        }
    });
    let (pi, s) = rescale_rows(&params.pi_matrix(), &root);
    let theta = params.theta.iter().zip(&s).map(|(t, s)| t * s).collect();
    DcmmParams::undirected(theta, pi, to_rows(&p_tilde))
}
