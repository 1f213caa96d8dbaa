//! Signal-to-noise ratio of a model pair and calibration of `b` against it.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{build_omega, draw_case, BernoulliMatrix, DcmmParams};
use crate::error::{Error, Result};
use crate::rng::StreamRng;

const POWER_TOL: f64 = 1e-8;
const POWER_MAX_ITER: usize = 100_000;
const SCAN_POINTS: usize = 32;
const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrReport {
    /// `tr(Δ²)` undirected, `tr(Δ'Δ)` directed.
    pub trace_delta: f64,
    /// `tr(Δ⁴)` undirected, `tr([ΔΔ']²)` directed.
    pub trace_delta_4: f64,
    pub trace_omega_4: f64,
    pub trace_omegatilde_4: f64,
    pub snr: f64,
    /// `δ₁² / (λ₁ + λ̃₁)` from the leading singular values.
    pub phase_ratio: f64,
}

/// `tr([XX']²) = ‖XX'‖_F²`; equals `tr(X⁴)` for symmetric `X`.
fn trace4(x: &Array2<f64>) -> f64 {
    let g = x.dot(&x.t());
    g.iter().map(|v| v * v).sum()
}

fn frobenius2(x: &Array2<f64>) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn snr_from_traces(t_delta: f64, t_omega: f64, t_tilde: f64, directed: bool) -> f64 {
    if t_delta == 0.0 {
        return 0.0;
    }
    let scale = if directed { 1.0 / (4.0 * std::f64::consts::SQRT_2) } else { 1.0 / 8.0 };
    scale * t_delta / (t_omega + t_tilde).sqrt()
}

/// Leading singular value by power iteration on `X'X`.
fn top_singular_value(x: &Array2<f64>) -> Result<f64> {
    let n = x.ncols();
    if n == 0 || x.iter().all(|v| *v == 0.0) {
        return Ok(0.0);
    }
    // Fixed pseudo-random start so structured matrices (e.g. zero row sums)
    // are not orthogonal to it.
    let mut rng = StreamRng::new(0x5eed, 0);
    let mut v = Array1::from_shape_fn(n, |_| rng.next_f64() + 0.5);
    v /= v.dot(&v).sqrt();
    let mut sigma2 = 0.0f64;
    for _ in 0..POWER_MAX_ITER {
        let w = x.t().dot(&x.dot(&v));
        let next = v.dot(&w);
        let norm = w.dot(&w).sqrt();
        if norm == 0.0 {
            return Ok(0.0);
        }
        v = w / norm;
        if (next - sigma2).abs() <= POWER_TOL * next.abs() {
            return Ok(next.max(0.0).sqrt());
        }
        sigma2 = next;
    }
    Err(Error::NonConvergence { what: "power iteration", iterations: POWER_MAX_ITER })
}

fn check_dims(omega: &BernoulliMatrix, tilde: &BernoulliMatrix) -> Result<()> {
    if omega.n() != tilde.n() {
        return Err(Error::DimensionMismatch { left: omega.n(), right: tilde.n() });
    }
    Ok(())
}

/// SNR only, skipping the power iterations.
pub fn snr_value(omega: &BernoulliMatrix, tilde: &BernoulliMatrix, directed: bool) -> Result<f64> {
    check_dims(omega, tilde)?;
    let delta = omega.as_array() - tilde.as_array();
    Ok(snr_from_traces(
        trace4(&delta),
        trace4(omega.as_array()),
        trace4(tilde.as_array()),
        directed,
    ))
}

pub fn snr(omega: &BernoulliMatrix, tilde: &BernoulliMatrix, directed: bool) -> Result<SnrReport> {
    check_dims(omega, tilde)?;
    let delta = omega.as_array() - tilde.as_array();
    let trace_delta_4 = trace4(&delta);
    let trace_omega_4 = trace4(omega.as_array());
    let trace_omegatilde_4 = trace4(tilde.as_array());
    let d1 = top_singular_value(&delta)?;
    let l1 = top_singular_value(omega.as_array())?;
    let l2 = top_singular_value(tilde.as_array())?;
    let phase_ratio = if d1 == 0.0 { 0.0 } else { d1 * d1 / (l1 + l2) };
    Ok(SnrReport {
        trace_delta: frobenius2(&delta),
        trace_delta_4,
        trace_omega_4,
        trace_omegatilde_4,
        snr: snr_from_traces(trace_delta_4, trace_omega_4, trace_omegatilde_4, directed),
        phase_ratio,
    })
}

fn pair_snr(pair: &(DcmmParams, DcmmParams)) -> Result<f64> {
    let (a, b) = pair;
    snr_value(&build_omega(a)?, &build_omega(b)?, a.directed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub b: f64,
    pub snr: f64,
    pub target_snr: f64,
    pub bisection_steps: usize,
}

/// Solves `f(x) = target` on `[lo, hi]`: a fixed scan locates a sign change,
/// then bisection narrows it until the relative error is within `tol`.
/// Points where `f` fails (e.g. an invalid model) are skipped by the scan.
pub(crate) fn solve_for_target<F>(f: F, lo: f64, hi: f64, target: f64, tol: f64) -> Result<(f64, f64, usize)>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(target.is_finite() && target > 0.0) {
        return Err(Error::invalid(format!("target SNR must be positive, got {target}")));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    let step = (hi - lo) / SCAN_POINTS as f64;
    let grid: Vec<(f64, f64)> = (0..SCAN_POINTS)
        .map(|j| lo + (j as f64 + 0.5) * step)
        .filter_map(|x| f(x).ok().map(|s| (x, s)))
        .collect();
    if grid.is_empty() {
        // Every scan point is an invalid model; report why.
        f(0.5 * (lo + hi))?;
    }
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(_, s) in &grid {
        min = min.min(s);
        max = max.max(s);
    }
    if let Some(&(x, s)) = grid.iter().find(|(_, s)| (s - target).abs() <= tol * target) {
        return Ok((x, s, 0));
    }
    let bracket = grid
        .windows(2)
        .find(|w| (w[0].1 - target).signum() != (w[1].1 - target).signum());
    let Some(w) = bracket else {
        return Err(Error::TargetUnreachable { target, min, max });
    };
    let (mut a, mut fa) = w[0];
    let mut b = w[1].0;
    for step in 1..=MAX_BISECTIONS {
        let mid = 0.5 * (a + b);
        let s = f(mid)?;
        if (s - target).abs() <= tol * target {
            return Ok((mid, s, step));
        }
        if (s - target).signum() == (fa - target).signum() {
            a = mid;
            fa = s;
        } else {
            b = mid;
        }
    }
    Err(Error::NonConvergence { what: "SNR bisection", iterations: MAX_BISECTIONS })
}

/// Finds `b` in `(0, 1)` so that the case pair drawn with `seed` has the
/// requested SNR within relative tolerance `tol`.
pub fn calibrate_b(
    case_id: u8,
    n: usize,
    k: usize,
    beta: f64,
    target_snr: f64,
    seed: u64,
    tol: f64,
) -> Result<Calibration> {
    let draw = draw_case(case_id, n, k, beta, seed)?;
    let (b, snr, steps) = solve_for_target(|b| pair_snr(&draw.with_b(b)?), 0.0, 1.0, target_snr, tol)?;
    Ok(Calibration { b, snr, target_snr, bisection_steps: steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dcmm::{two_block_preset, make_case};

    fn rank_one(theta: &[f64], scale: f64) -> BernoulliMatrix {
        let n = theta.len();
        BernoulliMatrix::new(Array2::from_shape_fn((n, n), |(i, j)| scale * theta[i] * theta[j])).unwrap()
    }

    #[test]
    fn identical_pair_has_zero_snr() {
        let (a, _) = make_case(1, 100, 3, 4.0, 0.3, 1).unwrap();
        let o = build_omega(&a).unwrap();
        let r = snr(&o, &o, false).unwrap();
        assert_eq!((r.snr, r.phase_ratio, r.trace_delta_4), (0.0, 0.0, 0.0));
    }

    #[test]
    fn halved_rank_one() {
        let theta: Vec<f64> = (0..40).map(|i| 0.1 + 0.01 * i as f64).collect();
        let o = rank_one(&theta, 1.0);
        let h = rank_one(&theta, 0.5);
        let r = snr(&o, &h, false).unwrap();
        let t4 = trace4(o.as_array());
        let norm2: f64 = theta.iter().map(|x| x * x).sum();
        // Rank one: tr(Ω⁴) = ‖θ‖⁸.
        assert!((t4 / norm2.powi(4) - 1.0).abs() < 1e-12);
        let expected = (1.0 / 8.0) * (t4 / 16.0) / ((1.0 + 1.0 / 16.0) * t4).sqrt();
        assert!((r.snr / expected - 1.0).abs() < 1e-12);
        assert!((r.trace_delta_4 / (t4 / 16.0) - 1.0).abs() < 1e-12);
        // δ₁ = ‖θ‖²/2, λ₁ = ‖θ‖², λ̃₁ = ‖θ‖²/2.
        let expected_phase = (norm2 / 2.0).powi(2) / (1.5 * norm2);
        assert!((r.phase_ratio / expected_phase - 1.0).abs() < 1e-7);
    }

    #[test]
    fn symmetric_in_arguments() {
        let (a, b) = make_case(4, 300, 2, 5.0, 0.4, 3).unwrap();
        let (oa, ob) = (build_omega(&a).unwrap(), build_omega(&b).unwrap());
        let r1 = snr(&oa, &ob, true).unwrap();
        let r2 = snr(&ob, &oa, true).unwrap();
        assert!((r1.snr - r2.snr).abs() <= 1e-12 * r1.snr);
        assert!((r1.phase_ratio - r2.phase_ratio).abs() <= 1e-6 * r1.phase_ratio);
    }

    #[test]
    fn dimension_mismatch() {
        let a = rank_one(&[0.1, 0.2], 1.0);
        let b = rank_one(&[0.1, 0.2, 0.3], 1.0);
        assert!(matches!(snr(&a, &b, false), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn calibrate_case1() {
        let c = calibrate_b(1, 400, 5, 6.0, 3.75, 1, 1e-3).unwrap();
        assert!(c.b > 0.0 && c.b < 1.0);
        assert!((c.snr / 3.75 - 1.0).abs() <= 1e-3);
        assert!(c.bisection_steps <= 40);
        let (a, b) = make_case(1, 400, 5, 6.0, c.b, 1).unwrap();
        let s = snr(&build_omega(&a).unwrap(), &build_omega(&b).unwrap(), false).unwrap();
        assert_eq!(s.snr, c.snr);
    }

    #[test]
    fn calibrate_surfaces_invalid_models() {
        // Point-mass degrees at n = 100 push entries of the alternative past 1.
        assert!(matches!(
            calibrate_b(1, 100, 3, 6.0, 1.0, 1, 1e-3),
            Err(Error::ProbabilityOutOfRange { .. })
        ));
    }

    #[test]
    fn calibrate_rejects_zero_target() {
        assert!(calibrate_b(1, 100, 3, 6.0, 0.0, 1, 1e-3).is_err());
    }

    #[test]
    fn calibrate_reports_unreachable() {
        match calibrate_b(1, 400, 3, 6.0, 1e6, 1, 1e-3) {
            Err(Error::TargetUnreachable { min, max, .. }) => assert!(min <= max && max < 1e6),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn preset_beta_round_trip() {
        // SNR scales like beta^4 at fixed memberships; solve for beta on the preset.
        let f = |beta: f64| {
            let (a, b) = two_block_preset(400, beta, 0.5, 0.27, 1)?;
            snr_value(&build_omega(&a)?, &build_omega(&b)?, false)
        };
        let (beta, s, _) = solve_for_target(f, 0.5, 18.0, 3.0, 1e-3).unwrap();
        assert!((s / 3.0 - 1.0).abs() <= 1e-3);
        let (a, b) = two_block_preset(400, beta, 0.5, 0.27, 1).unwrap();
        let r = snr(&build_omega(&a).unwrap(), &build_omega(&b).unwrap(), false).unwrap();
        assert!((r.snr / 3.0 - 1.0).abs() <= 1e-3);
    }
}
