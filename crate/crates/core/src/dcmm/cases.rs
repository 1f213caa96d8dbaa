//! Simulation recipes pairing a null model `Ω` with an alternative `Ω̃`.
//!
//! Cases 1 to 3 are undirected and differ in degree parameters, number of
//! communities, and membership law respectively. Cases 4 to 6 are their
//! directed analogues. All draws are independent of `b`, so a [`CaseDraw`]
//! can be rebuilt at any `b` without resampling.

use serde::{Deserialize, Serialize};

use super::{sample_dirichlet_with, DcmmParams};
use crate::error::{Error, Result};
use crate::rng::{Purpose, StreamRng};

/// Whether `case_id` is one of the directed recipes.
pub fn case_is_directed(case_id: u8) -> Result<bool> {
    match case_id {
        1..=3 => Ok(false),
        4..=6 => Ok(true),
        _ => Err(Error::invalid(format!("case must be in 1..=6, got {case_id}"))),
    }
}

/// `(1 - b) I + b 11'`.
pub fn block_matrix(k: usize, b: f64) -> Vec<Vec<f64>> {
    (0..k)
        .map(|r| (0..k).map(|c| if r == c { 1.0 } else { b }).collect())
        .collect()
}

fn scaled(beta: f64, raw: Vec<f64>) -> Vec<f64> {
    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    raw.into_iter().map(|x| beta * x / norm).collect()
}

fn uniform_degrees(seed: u64, purpose: Purpose, n: usize, lo: f64, hi: f64, beta: f64) -> Vec<f64> {
    let mut rng = StreamRng::for_purpose(seed, purpose, 0);
    scaled(beta, (0..n).map(|_| lo + (hi - lo) * rng.next_f64()).collect())
}

/// `θ^u ~ 0.95 δ_1 + 0.05 δ_3`.
fn point_mass_degrees(seed: u64, purpose: Purpose, n: usize, beta: f64) -> Vec<f64> {
    let mut rng = StreamRng::for_purpose(seed, purpose, 0);
    scaled(
        beta,
        (0..n)
            .map(|_| if rng.next_f64() < 0.95 { 1.0 } else { 3.0 })
            .collect(),
    )
}

/// One Dirichlet row per node, each from its own stream.
fn memberships(seed: u64, purpose: Purpose, n: usize, alpha: &[f64]) -> Result<Vec<Vec<f64>>> {
    (0..n)
        .map(|i| {
            let mut rng = StreamRng::for_purpose(seed, purpose, i as u64);
            sample_dirichlet_with(alpha, &mut rng)
        })
        .collect()
}

/// `π_i(k) = π̃_i(2k-1) + π̃_i(2k)`.
fn merge_pairs(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| r.chunks(2).map(|c| c[0] + c[1]).collect())
        .collect()
}

/// The `b`-independent part of a case: degree parameters and memberships
/// for both models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseDraw {
    pub case_id: u8,
    pub directed: bool,
    pub k: usize,
    pub k_tilde: usize,
    pub theta: Vec<f64>,
    pub theta_tilde: Vec<f64>,
    pub pi: Vec<Vec<f64>>,
    pub pi_tilde: Vec<Vec<f64>>,
    pub zeta: Option<Vec<f64>>,
    pub zeta_tilde: Option<Vec<f64>>,
    pub gamma: Option<Vec<Vec<f64>>>,
    pub gamma_tilde: Option<Vec<Vec<f64>>>,
}

impl CaseDraw {
    /// Completes the pair with `P = (1 - b) I + b 11'` (and its `2K`
    /// analogue for the split-community cases).
    pub fn with_b(&self, b: f64) -> Result<(DcmmParams, DcmmParams)> {
        if !(b > 0.0 && b < 1.0) {
            return Err(Error::invalid(format!("b must be in (0, 1), got {b}")));
        }
        let p = block_matrix(self.k, b);
        let p_tilde = block_matrix(self.k_tilde, b);
        if self.directed {
            let null = DcmmParams::directed(
                self.theta.clone(),
                self.pi.clone(),
                p,
                self.zeta.clone().expect("directed draw"),
                self.gamma.clone().expect("directed draw"),
            )?;
            let alt = DcmmParams::directed(
                self.theta_tilde.clone(),
                self.pi_tilde.clone(),
                p_tilde,
                self.zeta_tilde.clone().expect("directed draw"),
                self.gamma_tilde.clone().expect("directed draw"),
            )?;
            Ok((null, alt))
        } else {
            let null = DcmmParams::undirected(self.theta.clone(), self.pi.clone(), p)?;
            let alt = DcmmParams::undirected(self.theta_tilde.clone(), self.pi_tilde.clone(), p_tilde)?;
            Ok((null, alt))
        }
    }
}

/// Draws every random component of a case.
pub fn draw_case(case_id: u8, n: usize, k: usize, beta: f64, seed: u64) -> Result<CaseDraw> {
    let directed = case_is_directed(case_id)?;
    if n < 2 || k == 0 {
        return Err(Error::invalid("need n >= 2 and k >= 1"));
    }
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::invalid(format!("beta must be positive, got {beta}")));
    }
    if matches!(case_id, 3 | 6) && k != 2 {
        return Err(Error::invalid(format!("case {case_id} is defined for k = 2 only")));
    }

    let theta = uniform_degrees(seed, Purpose::Theta, n, 2.0, 3.0, beta);
    let zeta = directed.then(|| uniform_degrees(seed, Purpose::Zeta, n, 2.0, 3.0, beta));
    let flat = vec![1.0; k];
    let skewed = [1.6, 0.4];
    let flat2 = vec![1.0; 2 * k];

    let draw = |purpose_a: Purpose, purpose_b: Purpose| -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        match case_id {
            1 | 4 => {
                let m = memberships(seed, purpose_a, n, &flat)?;
                Ok((m.clone(), m))
            }
            2 | 5 => {
                let fine = memberships(seed, purpose_b, n, &flat2)?;
                Ok((merge_pairs(&fine), fine))
            }
            _ => Ok((
                memberships(seed, purpose_a, n, &skewed)?,
                memberships(seed, purpose_b, n, &[1.0, 1.0])?,
            )),
        }
    };

    let (pi, pi_tilde) = draw(Purpose::Pi, Purpose::PiTilde)?;
    let (gamma, gamma_tilde) = if directed {
        let (g, gt) = draw(Purpose::Gamma, Purpose::GammaTilde)?;
        (Some(g), Some(gt))
    } else {
        (None, None)
    };

    let (theta_tilde, zeta_tilde) = if matches!(case_id, 1 | 4) {
        (
            point_mass_degrees(seed, Purpose::ThetaTilde, n, beta),
            directed.then(|| point_mass_degrees(seed, Purpose::ZetaTilde, n, beta)),
        )
    } else {
        (theta.clone(), zeta.clone())
    };

    let k_tilde = if matches!(case_id, 2 | 5) { 2 * k } else { k };
    Ok(CaseDraw {
        case_id,
        directed,
        k,
        k_tilde,
        theta,
        theta_tilde,
        pi,
        pi_tilde,
        zeta,
        zeta_tilde,
        gamma,
        gamma_tilde,
    })
}

/// Null and alternative parameters for `case_id` at `(n, k, beta, b)`.
pub fn make_case(case_id: u8, n: usize, k: usize, beta: f64, b: f64, seed: u64) -> Result<(DcmmParams, DcmmParams)> {
    draw_case(case_id, n, k, beta, seed)?.with_b(b)
}

/// Two-community pair with hard memberships: `Π` splits the nodes at `n/2`,
/// `Π̃` at `n/2 + 10`. Degrees `θ^u ~ Unif(0.9, 1.1)` are shared; `P` and
/// `P̃` use their own off-diagonal values.
pub fn two_block_preset(n: usize, beta: f64, b: f64, b_tilde: f64, seed: u64) -> Result<(DcmmParams, DcmmParams)> {
    if n < 22 {
        return Err(Error::invalid("the preset needs n >= 22"));
    }
    for v in [b, b_tilde] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::invalid(format!("off-diagonal value {v} outside [0, 1]")));
        }
    }
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::invalid(format!("beta must be positive, got {beta}")));
    }
    let theta = uniform_degrees(seed, Purpose::Theta, n, 0.9, 1.1, beta);
    let hard = |cut: usize| -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| if i < cut { vec![1.0, 0.0] } else { vec![0.0, 1.0] })
            .collect()
    };
    let null = DcmmParams::undirected(theta.clone(), hard(n / 2), block_matrix(2, b))?;
    let alt = DcmmParams::undirected(theta, hard(n / 2 + 10), block_matrix(2, b_tilde))?;
    Ok((null, alt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dcmm::build_omega;

    fn row_sums_ok(rows: &[Vec<f64>]) -> bool {
        rows.iter().all(|r| (r.iter().sum::<f64>() - 1.0).abs() < 1e-12)
    }

    #[test]
    fn case1_shares_memberships() {
        let (a, b) = make_case(1, 1000, 5, 6.0, 0.3, 1).unwrap();
        assert!(!a.directed && !b.directed);
        assert_eq!((a.k, b.k), (5, 5));
        assert_eq!(a.pi, b.pi);
        assert_eq!(a.p, b.p);
        assert_ne!(a.theta, b.theta);
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm(&a.theta) - 6.0).abs() < 1e-12);
        assert!((norm(&b.theta) - 6.0).abs() < 1e-12);
        assert!(row_sums_ok(&a.pi));
        build_omega(&a).unwrap();
        build_omega(&b).unwrap();
    }

    #[test]
    fn case2_splits_communities() {
        let (a, b) = make_case(2, 200, 2, 6.0, 0.4, 2).unwrap();
        assert_eq!((a.k, b.k), (2, 4));
        assert_eq!(a.theta, b.theta);
        for (r, rt) in a.pi.iter().zip(&b.pi) {
            assert_eq!(r[0], rt[0] + rt[1]);
            assert_eq!(r[1], rt[2] + rt[3]);
        }
        assert!(row_sums_ok(&a.pi) && row_sums_ok(&b.pi));
    }

    #[test]
    fn case3_membership_laws() {
        let (a, b) = make_case(3, 2000, 2, 6.0, 0.4, 3).unwrap();
        let mean = |rows: &[Vec<f64>]| rows.iter().map(|r| r[0]).sum::<f64>() / rows.len() as f64;
        assert!((mean(&a.pi) - 0.8).abs() < 0.03);
        assert!((mean(&b.pi) - 0.5).abs() < 0.03);
        assert!(make_case(3, 100, 3, 6.0, 0.4, 3).is_err());
    }

    #[test]
    fn directed_cases() {
        let (a, b) = make_case(4, 300, 3, 6.0, 0.4, 4).unwrap();
        assert!(a.directed && b.directed);
        assert_eq!(a.gamma, b.gamma);
        assert_ne!(a.zeta, b.zeta);

        let (a, b) = make_case(5, 300, 2, 6.0, 0.4, 5).unwrap();
        assert_eq!((a.k, b.k), (2, 4));
        assert_eq!(a.zeta, b.zeta);
        let (g, gt) = (a.gamma.unwrap(), b.gamma.unwrap());
        assert_eq!(g[7][1], gt[7][2] + gt[7][3]);

        let (a, b) = make_case(6, 300, 2, 6.0, 0.4, 6).unwrap();
        assert_eq!(a.theta, b.theta);
        assert_ne!(a.gamma, b.gamma);
    }

    #[test]
    fn case_mode_checks() {
        assert_eq!(case_is_directed(4), Ok(true));
        assert_eq!(case_is_directed(2), Ok(false));
        assert!(case_is_directed(0).is_err());
        assert!(case_is_directed(7).is_err());
        assert!(make_case(1, 100, 2, 6.0, 1.5, 1).is_err());
        assert!(make_case(1, 100, 2, -1.0, 0.5, 1).is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        assert_eq!(make_case(5, 100, 2, 6.0, 0.3, 9).unwrap(), make_case(5, 100, 2, 6.0, 0.3, 9).unwrap());
        assert_ne!(make_case(5, 100, 2, 6.0, 0.3, 9).unwrap(), make_case(5, 100, 2, 6.0, 0.3, 10).unwrap());
    }

    #[test]
    fn preset_boundaries() {
        let (a, b) = two_block_preset(100, 5.0, 0.5, 0.25, 1).unwrap();
        assert_eq!(a.pi[49], vec![1.0, 0.0]);
        assert_eq!(a.pi[50], vec![0.0, 1.0]);
        assert_eq!(b.pi[59], vec![1.0, 0.0]);
        assert_eq!(b.pi[60], vec![0.0, 1.0]);
        assert_eq!(a.p[0][1], 0.5);
        assert_eq!(b.p[0][1], 0.25);
        assert_eq!(a.theta, b.theta);
    }
}
