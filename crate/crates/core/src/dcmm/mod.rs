//! Degree-corrected mixed-membership models.
//!
//! Undirected: `Ω = Θ Π P Π' Θ`. Directed: `Ω = Θ Π P Γ' Z` with separate
//! out-side `(θ, Π)` and in-side `(ζ, Γ)` parameters.

mod cases;
mod identify;
mod least_favorable;
mod snr;

pub use cases::{draw_case, two_block_preset, make_case, case_is_directed, CaseDraw};
pub use identify::{sinkhorn_normalize, unit_diagonal_normalize};
pub use least_favorable::{least_favorable, rademacher, LeastFavorableSpec};
pub use snr::{calibrate_b, snr, snr_value, Calibration, SnrReport};

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Network;
use crate::rng::{Purpose, StreamRng};

const ROW_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcmmParams {
    pub n: usize,
    pub k: usize,
    pub directed: bool,
    pub theta: Vec<f64>,
    pub pi: Vec<Vec<f64>>,
    pub p: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<Vec<f64>>>,
}

fn check_degrees(name: &str, v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::invalid(format!("{name} has length {}, expected {n}", v.len())));
    }
    if let Some(x) = v.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(Error::invalid(format!("{name} must be strictly positive, found {x}")));
    }
    Ok(())
}

fn check_memberships(name: &str, rows: &[Vec<f64>], n: usize, k: usize) -> Result<()> {
    if rows.len() != n {
        return Err(Error::invalid(format!("{name} has {} rows, expected {n}", rows.len())));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != k {
            return Err(Error::invalid(format!("{name} row {i} has {} entries, expected {k}", r.len())));
        }
        if r.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::invalid(format!("{name} row {i} has a negative or non-finite entry")));
        }
        let s: f64 = r.iter().sum();
        if (s - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::invalid(format!("{name} row {i} sums to {s}")));
        }
    }
    Ok(())
}

pub(crate) fn to_array(rows: &[Vec<f64>]) -> Array2<f64> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    Array2::from_shape_fn((r, c), |(i, j)| rows[i][j])
}

pub(crate) fn to_rows(a: &Array2<f64>) -> Vec<Vec<f64>> {
    a.outer_iter().map(|r| r.to_vec()).collect()
}

impl DcmmParams {
    pub fn undirected(theta: Vec<f64>, pi: Vec<Vec<f64>>, p: Vec<Vec<f64>>) -> Result<Self> {
        let params = Self {
            n: theta.len(),
            k: p.len(),
            directed: false,
            theta,
            pi,
            p,
            zeta: None,
            gamma: None,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn directed(
        theta: Vec<f64>,
        pi: Vec<Vec<f64>>,
        p: Vec<Vec<f64>>,
        zeta: Vec<f64>,
        gamma: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let params = Self {
            n: theta.len(),
            k: p.len(),
            directed: true,
            theta,
            pi,
            p,
            zeta: Some(zeta),
            gamma: Some(gamma),
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let (n, k) = (self.n, self.k);
        if n == 0 || k == 0 {
            return Err(Error::invalid("n and k must be positive"));
        }
        check_degrees("theta", &self.theta, n)?;
        check_memberships("pi", &self.pi, n, k)?;
        if self.p.len() != k || self.p.iter().any(|r| r.len() != k) {
            return Err(Error::invalid(format!("P must be {k}x{k}")));
        }
        if self.p.iter().flatten().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::invalid("P entries must be finite and nonnegative"));
        }
        if self.directed {
            let (Some(zeta), Some(gamma)) = (&self.zeta, &self.gamma) else {
                return Err(Error::invalid("directed params require zeta and gamma"));
            };
            check_degrees("zeta", zeta, n)?;
            check_memberships("gamma", gamma, n, k)?;
        } else {
            if self.zeta.is_some() || self.gamma.is_some() {
                return Err(Error::invalid("undirected params must not carry zeta or gamma"));
            }
            for a in 0..k {
                for b in 0..a {
                    let (x, y) = (self.p[a][b], self.p[b][a]);
                    if (x - y).abs() > 1e-12 * x.abs().max(y.abs()).max(1.0) {
                        return Err(Error::invalid("undirected P must be symmetric"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn pi_matrix(&self) -> Array2<f64> {
        to_array(&self.pi)
    }

    pub fn p_matrix(&self) -> Array2<f64> {
        to_array(&self.p)
    }

    /// In-side membership matrix; `Π` for undirected models.
    pub fn gamma_matrix(&self) -> Array2<f64> {
        to_array(self.gamma.as_ref().unwrap_or(&self.pi))
    }

    /// In-side degree parameters; `θ` for undirected models.
    pub fn zeta_or_theta(&self) -> &[f64] {
        self.zeta.as_deref().unwrap_or(&self.theta)
    }
}

/// Dense edge-probability matrix, every entry in `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliMatrix {
    omega: Array2<f64>,
}

impl BernoulliMatrix {
    pub fn new(omega: Array2<f64>) -> Result<Self> {
        let (r, c) = omega.dim();
        if r != c {
            return Err(Error::DimensionMismatch { left: r, right: c });
        }
        for ((i, j), &v) in omega.indexed_iter() {
            if !(v.is_finite() && (0.0..1.0).contains(&v)) {
                return Err(Error::ProbabilityOutOfRange { i, j, value: v });
            }
        }
        Ok(Self { omega })
    }

    pub fn n(&self) -> usize {
        self.omega.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.omega[[i, j]]
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.omega
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.n();
        (0..n).all(|i| (0..i).all(|j| self.omega[[i, j]] == self.omega[[j, i]]))
    }
}

/// `Ω` from the model equation. The diagonal is kept; sampling ignores it.
pub fn build_omega(params: &DcmmParams) -> Result<BernoulliMatrix> {
    params.validate()?;
    let left = params.pi_matrix().dot(&params.p_matrix());
    let mut omega = left.dot(&params.gamma_matrix().t());
    let theta = Array1::from(params.theta.clone());
    let zeta = Array1::from(params.zeta_or_theta().to_vec());
    for ((i, j), v) in omega.indexed_iter_mut() {
        *v *= theta[i] * zeta[j];
    }
    if !params.directed {
        // Mirror the upper triangle so the matrix is exactly symmetric.
        let n = params.n;
        for i in 0..n {
            for j in 0..i {
                omega[[i, j]] = omega[[j, i]];
            }
        }
    }
    BernoulliMatrix::new(omega)
}

/// Bernoulli draw of every off-diagonal entry from one random stream.
/// Undirected samples the upper triangle and mirrors it.
pub fn sample_network_with<R: Rng + ?Sized>(
    omega: &BernoulliMatrix,
    directed: bool,
    rng: &mut R,
) -> Network {
    let n = omega.n();
    let mut edges = Vec::new();
    for i in 0..n {
        let start = if directed { 0 } else { i + 1 };
        for j in start..n {
            if j == i {
                continue;
            }
            let u: f64 = rng.random();
            if u < omega.get(i, j) {
                edges.push((i, j));
            }
        }
    }
    Network::from_edges(n, directed, edges).expect("sampled edges are valid by construction")
}

pub fn sample_network(omega: &BernoulliMatrix, directed: bool, seed: u64) -> Network {
    sample_network_with(omega, directed, &mut StreamRng::for_purpose(seed, Purpose::Sample, 0))
}

pub fn sample_dirichlet_with<R: Rng + ?Sized>(alpha: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    if alpha.is_empty() {
        return Err(Error::invalid("Dirichlet needs at least one component"));
    }
    let gammas = alpha
        .iter()
        .map(|&a| {
            if a.is_finite() && a > 0.0 {
                Gamma::new(a, 1.0).map_err(|e| Error::invalid(e.to_string()))
            } else {
                Err(Error::invalid(format!("Dirichlet parameter must be positive, found {a}")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    loop {
        let draw: Vec<f64> = gammas.iter().map(|g| g.sample(rng)).collect();
        let total: f64 = draw.iter().sum();
        // All-zero draws only happen through underflow at tiny shapes.
        if total > 0.0 {
            return Ok(draw.into_iter().map(|g| g / total).collect());
        }
    }
}

pub fn sample_dirichlet(alpha: &[f64], seed: u64) -> Result<Vec<f64>> {
    sample_dirichlet_with(alpha, &mut StreamRng::for_purpose(seed, Purpose::Dirichlet, 0))
}
