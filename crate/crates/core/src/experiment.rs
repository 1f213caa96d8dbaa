//! Monte Carlo harness for the limiting null and power, and pairwise scans
//! over ordered network sequences.
//!
//! Replicate `r` draws its three networks from streams keyed by
//! `(seed, r)`, and results are reduced serially in replicate order, so the
//! summary does not depend on the worker count.

use std::path::{Path, PathBuf};

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dcmm::{build_omega, BernoulliMatrix, calibrate_b, case_is_directed, make_case, sample_network_with, snr};
use crate::error::{Error, Result};
use crate::graph::{EdgeList, Network};
use crate::rng::{Purpose, StreamRng};
use crate::stats::{compare, TestReport};

pub const HISTOGRAM_BINS: usize = 41;
const CALIBRATION_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub case_id: u8,
    pub n: usize,
    pub k: usize,
    pub beta: f64,
    pub b: Option<f64>,
    pub target_snr: Option<f64>,
    pub replicates: usize,
    pub alpha: f64,
    pub order: u8,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        let directed = case_is_directed(self.case_id)?;
        if self.b.is_some() == self.target_snr.is_some() {
            return Err(Error::invalid("exactly one of b and target_snr must be set"));
        }
        if self.replicates == 0 {
            return Err(Error::invalid("replicates must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!("alpha must be in (0, 1), got {}", self.alpha)));
        }
        match (self.order, directed) {
            (2, _) | (3, false) => Ok(()),
            (3, true) => Err(Error::DirectedUnsupported),
            (o, _) => Err(Error::invalid(format!("order {o} not supported (expected 2 or 3)"))),
        }
    }

    pub fn directed(&self) -> bool {
        matches!(self.case_id, 4..=6)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub null_counts: Vec<u64>,
    pub alt_counts: Vec<u64>,
}

impl Histogram {
    fn new(snr: f64) -> Self {
        let hi = if snr.is_finite() { 5.0f64.max(snr + 4.0) } else { 5.0 };
        Self {
            lo: -5.0,
            hi,
            null_counts: vec![0; HISTOGRAM_BINS],
            alt_counts: vec![0; HISTOGRAM_BINS],
        }
    }

    /// Values outside `[lo, hi)` land in the edge bins.
    fn bin(&self, x: f64) -> usize {
        let width = (self.hi - self.lo) / HISTOGRAM_BINS as f64;
        let idx = ((x - self.lo) / width).floor();
        if idx < 0.0 {
            0
        } else {
            (idx as usize).min(HISTOGRAM_BINS - 1)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub spec: ExperimentSpec,
    /// Off-diagonal value of `P` actually used (calibrated or given).
    pub b: f64,
    pub directed: bool,
    pub snr_theoretical: f64,
    /// Moments of the z-scored statistic; `None` when undefined.
    pub null_mean: Option<f64>,
    pub null_sd: Option<f64>,
    pub alt_mean: Option<f64>,
    pub alt_sd: Option<f64>,
    pub type1: Option<f64>,
    pub power: Option<f64>,
    /// `Var(Q) / (c · mean(C))` over the null replicates, `C = (q_a + q_b) / 2`.
    pub var_ratio: Option<f64>,
    /// Exact value of `var_ratio` in expectation for this model at this `n`
    /// (order 2 only). Tends to 1 as the entries of `Ω` shrink.
    pub var_ratio_expected: Option<f64>,
    pub null_degenerate: usize,
    pub alt_degenerate: usize,
    pub histogram: Histogram,
}

/// Neumaier-compensated sum.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut s = CompensatedSum::default();
    xs.iter().for_each(|&x| s.add(x));
    Some(s.value() / xs.len() as f64)
}

fn variance(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs)?;
    let mut s = CompensatedSum::default();
    xs.iter().for_each(|&x| s.add((x - m) * (x - m)));
    Some(s.value() / (xs.len() - 1) as f64)
}

fn rate(hits: usize, total: usize) -> Option<f64> {
    (total > 0).then(|| hits as f64 / total as f64)
}

struct Replicate {
    null: Option<TestReport>,
    alt: Option<TestReport>,
}

fn degenerate_as_none(r: Result<TestReport>) -> Result<Option<TestReport>> {
    match r {
        Ok(rep) => Ok(Some(rep)),
        Err(Error::DegenerateDenominator) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn run_monte_carlo(spec: &ExperimentSpec) -> Result<McSummary> {
    run_monte_carlo_with(spec, 0)
}

/// As [`run_monte_carlo`] on a pool of `workers` threads (0 picks the
/// default). The output does not depend on `workers`.
pub fn run_monte_carlo_with(spec: &ExperimentSpec, workers: usize) -> Result<McSummary> {
    spec.validate()?;
    let directed = spec.directed();
    let b = match (spec.b, spec.target_snr) {
        (Some(b), _) => b,
        (None, Some(t)) => calibrate_b(spec.case_id, spec.n, spec.k, spec.beta, t, spec.seed, CALIBRATION_TOL)?.b,
        (None, None) => unreachable!("validated"),
    };
    let (null_params, alt_params) = make_case(spec.case_id, spec.n, spec.k, spec.beta, b, spec.seed)?;
    let omega = build_omega(&null_params)?;
    let omega_tilde = build_omega(&alt_params)?;
    let snr_theoretical = snr(&omega, &omega_tilde, directed)?.snr;

    let run_one = |r: usize| -> Result<Replicate> {
        let draw = |purpose| {
            let mut rng = StreamRng::for_purpose(spec.seed, purpose, r as u64);
            let target = if purpose == Purpose::Alt { &omega_tilde } else { &omega };
            sample_network_with(target, directed, &mut rng)
        };
        let a = draw(Purpose::NullA);
        let a_null = draw(Purpose::NullB);
        let a_alt = draw(Purpose::Alt);
        Ok(Replicate {
            null: degenerate_as_none(compare(&a, &a_null, spec.order))?,
            alt: degenerate_as_none(compare(&a, &a_alt, spec.order))?,
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(e.to_string()))?;
    let reps: Vec<Replicate> = pool.install(|| {
        (0..spec.replicates)
            .into_par_iter()
            .map(run_one)
            .collect::<Result<Vec<_>>>()
    })?;

    let nulls: Vec<&TestReport> = reps.iter().filter_map(|r| r.null.as_ref()).collect();
    let alts: Vec<&TestReport> = reps.iter().filter_map(|r| r.alt.as_ref()).collect();
    let z_null: Vec<f64> = nulls.iter().map(|r| r.z_score).collect();
    let z_alt: Vec<f64> = alts.iter().map(|r| r.z_score).collect();

    let mut histogram = Histogram::new(snr_theoretical);
    for &z in &z_null {
        let i = histogram.bin(z);
        histogram.null_counts[i] += 1;
    }
    for &z in &z_alt {
        let i = histogram.bin(z);
        histogram.alt_counts[i] += 1;
    }

    let c = match (spec.order, directed) {
        (3, _) => 768.0,
        (_, true) => 64.0,
        _ => 128.0,
    };
    let q: Vec<f64> = nulls.iter().map(|r| r.q_star as f64).collect();
    let cc: Vec<f64> = nulls.iter().map(|r| (r.q_a as f64 + r.q_b as f64) / 2.0).collect();
    let var_ratio = match (variance(&q), mean(&cc)) {
        (Some(v), Some(m)) if m > 0.0 => Some(v / (c * m)),
        _ => None,
    };

    Ok(McSummary {
        spec: spec.clone(),
        b,
        directed,
        snr_theoretical,
        null_mean: mean(&z_null),
        null_sd: variance(&z_null).map(f64::sqrt),
        alt_mean: mean(&z_alt),
        alt_sd: variance(&z_alt).map(f64::sqrt),
        type1: rate(nulls.iter().filter(|r| r.p_value < spec.alpha).count(), nulls.len()),
        power: rate(alts.iter().filter(|r| r.p_value < spec.alpha).count(), alts.len()),
        var_ratio,
        var_ratio_expected: (spec.order == 2).then(|| expected_var_ratio(&omega)),
        null_degenerate: spec.replicates - nulls.len(),
        alt_degenerate: spec.replicates - alts.len(),
        histogram,
    })
}

/// Interlacing sum of a real zero-diagonal matrix,
/// `tr((WW')²) - tr(WW' o WW') - tr(W'W o W'W) + sum W_ij^4`.
fn interlacing_sum_real(w: &Array2<f64>) -> f64 {
    let m = w.dot(&w.t());
    let all: f64 = m.iter().map(|v| v * v).sum();
    let rows: f64 = m.diag().iter().map(|v| v * v).sum();
    let cols: f64 = w.columns().into_iter().map(|c| c.dot(&c).powi(2)).sum();
    let quartic: f64 = w.iter().map(|v| v.powi(4)).sum();
    all - rows - cols + quartic
}

/// `E[Var(Q)] / (c E[C])` for independent draws from `omega`.
///
/// Each off-diagonal entry of `A - A'` has variance `2 Ω(1 - Ω)`, so the
/// ratio is the interlacing sum of `Ω o (1 - Ω)` over that of `Ω`, with
/// diagonals removed. The same holds for directed draws with `c = 64`.
pub fn expected_var_ratio(omega: &BernoulliMatrix) -> f64 {
    let mut w = omega.as_array().clone();
    w.diag_mut().fill(0.0);
    let var = w.mapv(|x| x * (1.0 - x));
    interlacing_sum_real(&var) / interlacing_sum_real(&w)
}

/// Upper-triangular pairwise comparison matrices; entries below the
/// diagonal and degenerate pairs are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub t: usize,
    pub stats: Vec<Vec<Option<f64>>>,
    pub pvalues: Vec<Vec<Option<f64>>>,
}

pub fn scan_pairwise(graphs: &[Network], order: u8) -> Result<ScanResult> {
    let t = graphs.len();
    if t < 2 {
        return Err(Error::invalid("a scan needs at least two networks"));
    }
    let (n, directed) = (graphs[0].n(), graphs[0].directed());
    for g in &graphs[1..] {
        if g.n() != n {
            return Err(Error::DimensionMismatch { left: n, right: g.n() });
        }
        if g.directed() != directed {
            return Err(Error::DirectednessMismatch);
        }
    }
    if !matches!(order, 2 | 3) {
        return Err(Error::invalid(format!("order {order} not supported (expected 2 or 3)")));
    }
    if order == 3 && directed {
        return Err(Error::DirectedUnsupported);
    }
    let pairs: Vec<(usize, usize)> = (0..t).flat_map(|i| (i + 1..t).map(move |j| (i, j))).collect();
    let reports = pairs
        .par_iter()
        .map(|&(i, j)| degenerate_as_none(compare(&graphs[i], &graphs[j], order)))
        .collect::<Result<Vec<_>>>()?;

    let mut stats = vec![vec![None; t]; t];
    let mut pvalues = vec![vec![None; t]; t];
    for i in 0..t {
        stats[i][i] = Some(0.0);
        pvalues[i][i] = Some(0.5);
    }
    for (&(i, j), rep) in pairs.iter().zip(reports) {
        stats[i][j] = rep.as_ref().map(|r| r.statistic);
        pvalues[i][j] = rep.as_ref().map(|r| r.p_value);
    }
    Ok(ScanResult { t, stats, pvalues })
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

/// One row per pair `i <= j`, missing values as empty fields.
pub fn scan_to_csv(result: &ScanResult) -> String {
    let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut out = String::from("i,j,statistic,p_value\n");
    for i in 0..result.t {
        for j in i..result.t {
            out.push_str(&format!(
                "{i},{j},{},{}\n",
                fmt(result.stats[i][j]),
                fmt(result.pvalues[i][j])
            ));
        }
    }
    out
}

/// Edge-list paths listed one per line; blank lines and `#` comments are
/// skipped and relative paths resolve against the manifest's directory.
pub fn read_manifest(path: &Path) -> Result<Vec<PathBuf>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new(""));
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| base.join(l))
        .collect())
}

/// Loads zero-based edge lists on a shared node set of size
/// `1 + max index over all files`.
pub fn load_networks(paths: &[PathBuf], directed: bool) -> Result<Vec<Network>> {
    let lists = paths
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            EdgeList::parse(&text, false).map_err(|e| match e {
                Error::Parse { line, detail } => Error::Parse { line, detail: format!("{}: {detail}", p.display()) },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let n = lists.iter().filter_map(EdgeList::max_index).max().map_or(0, |m| m + 1);
    lists.into_iter().map(|l| l.into_network(n, directed)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::psi_test;

    fn spec(case_id: u8, reps: usize) -> ExperimentSpec {
        ExperimentSpec {
            case_id,
            n: 120,
            k: 2,
            beta: 3.0,
            b: Some(0.5),
            target_snr: None,
            replicates: reps,
            alpha: 0.05,
            order: 2,
            seed: 3,
        }
    }

    #[test]
    fn deterministic_across_workers() {
        let s = spec(1, 12);
        let a = run_monte_carlo_with(&s, 1).unwrap();
        let b = run_monte_carlo_with(&s, 4).unwrap();
        assert_eq!(to_json(&a), to_json(&b));
        assert_eq!(a, run_monte_carlo(&s).unwrap());
    }

    #[test]
    fn single_replicate_flags_sd() {
        let m = run_monte_carlo(&spec(4, 1)).unwrap();
        assert!(m.null_sd.is_none() && m.alt_sd.is_none() && m.var_ratio.is_none());
        assert!(m.null_mean.is_some());
        assert!(m.directed);
    }

    #[test]
    fn histogram_counts_match_valid_replicates() {
        let m = run_monte_carlo(&spec(2, 10)).unwrap();
        let n_null: u64 = m.histogram.null_counts.iter().sum();
        let n_alt: u64 = m.histogram.alt_counts.iter().sum();
        assert_eq!(n_null as usize + m.null_degenerate, 10);
        assert_eq!(n_alt as usize + m.alt_degenerate, 10);
        assert_eq!(m.histogram.null_counts.len(), HISTOGRAM_BINS);
        assert_eq!(m.histogram.lo, -5.0);
        assert_eq!(m.histogram.hi, 5.0f64.max(m.snr_theoretical + 4.0));
        for r in [m.type1.unwrap(), m.power.unwrap()] {
            assert!((0.0..=1.0).contains(&r));
        }
    }

    #[test]
    fn interlacing_sum_real_matches_kernel() {
        let mut rng = StreamRng::new(4, 0);
        for directed in [false, true] {
            let x = crate::oracle::random_signed(9, directed, 0.5, false, &mut rng);
            let dense = Array2::from_shape_fn((9, 9), |(i, j)| x.get(i, j) as f64);
            assert_eq!(interlacing_sum_real(&dense), crate::stats::q2(&x).unwrap() as f64);
        }
    }

    #[test]
    fn expected_ratio_limits() {
        let small = BernoulliMatrix::new(Array2::from_elem((30, 30), 1e-6)).unwrap();
        assert!((expected_var_ratio(&small) - 1.0).abs() < 1e-5);
        // Constant Ω: every product carries (1 - p)^4.
        let p = 0.2;
        let flat = BernoulliMatrix::new(Array2::from_elem((30, 30), p)).unwrap();
        assert!((expected_var_ratio(&flat) - (1.0f64 - p).powi(4)).abs() < 1e-12);
    }

    #[test]
    fn histogram_clamps() {
        let h = Histogram::new(0.0);
        assert_eq!(h.bin(-100.0), 0);
        assert_eq!(h.bin(100.0), HISTOGRAM_BINS - 1);
        assert_eq!(h.bin(0.0), 20);
    }

    #[test]
    fn order3_run() {
        let mut s = spec(3, 4);
        s.order = 3;
        let m = run_monte_carlo(&s).unwrap();
        assert!(m.null_mean.is_some());
    }

    #[test]
    fn spec_validation() {
        let mut s = spec(1, 5);
        s.target_snr = Some(2.0);
        assert!(run_monte_carlo(&s).is_err());
        let mut s = spec(1, 0);
        assert!(run_monte_carlo(&s).is_err());
        s.replicates = 3;
        s.alpha = 1.5;
        assert!(run_monte_carlo(&s).is_err());
        let mut s = spec(4, 3);
        s.order = 3;
        assert_eq!(run_monte_carlo(&s), Err(Error::DirectedUnsupported));
        let mut s = spec(9, 3);
        assert!(run_monte_carlo(&s).is_err());
        s.case_id = 1;
        s.order = 4;
        assert!(run_monte_carlo(&s).is_err());
    }

    #[test]
    fn summary_json_round_trip() {
        let m = run_monte_carlo(&spec(1, 3)).unwrap();
        let back: McSummary = serde_json::from_str(&to_json(&m)).unwrap();
        assert_eq!(back, m);
    }

    fn complete(n: usize) -> Network {
        Network::from_edges(n, false, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)))).unwrap()
    }

    #[test]
    fn scan_identical_graphs() {
        let g = complete(6);
        let r = scan_pairwise(&[g.clone(), g.clone(), g], 2).unwrap();
        for i in 0..3 {
            for j in i..3 {
                assert_eq!(r.stats[i][j], Some(0.0));
                assert_eq!(r.pvalues[i][j], Some(0.5));
            }
        }
        let csv = scan_to_csv(&r);
        assert_eq!(csv.lines().count(), 1 + 6);
        assert!(csv.starts_with("i,j,statistic,p_value\n0,0,0,0.5\n0,1,0,0.5\n"));
    }

    #[test]
    fn scan_two_graphs_csv_rows() {
        let g = complete(5);
        let r = scan_pairwise(&[g.clone(), g], 2).unwrap();
        let csv = scan_to_csv(&r);
        assert_eq!(csv, "i,j,statistic,p_value\n0,0,0,0.5\n0,1,0,0.5\n1,1,0,0.5\n");
    }

    #[test]
    fn scan_planted_block() {
        let n = 40;
        let mut rng = StreamRng::new(8, 0);
        let mut base = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.next_f64() < 0.1 {
                    base.push((i, j));
                }
            }
        }
        let g = Network::from_edges(n, false, base.clone()).unwrap();
        let mut planted = base;
        for i in 0..12 {
            for j in i + 1..12 {
                if !g.has_edge(i, j) {
                    planted.push((i, j));
                }
            }
        }
        let h = Network::from_edges(n, false, planted).unwrap();
        let r = scan_pairwise(&[g.clone(), h.clone()], 2).unwrap();
        let p01 = r.pvalues[0][1].unwrap();
        assert!(p01 < r.pvalues[0][0].unwrap() && p01 < r.pvalues[1][1].unwrap());
        assert_eq!(r.stats[0][1], Some(psi_test(&g, &h).unwrap().statistic));
    }

    #[test]
    fn scan_records_degenerate_pairs() {
        let path = Network::from_edges(4, false, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let r = scan_pairwise(&[path.clone(), path], 2).unwrap();
        assert_eq!(r.stats[0][1], None);
        assert!(scan_to_csv(&r).contains("\n0,1,,\n"));
    }

    #[test]
    fn scan_errors() {
        let g = complete(4);
        assert!(scan_pairwise(&[g.clone()], 2).is_err());
        assert!(matches!(scan_pairwise(&[g.clone(), complete(5)], 2), Err(Error::DimensionMismatch { .. })));
        let d = Network::empty(4, true);
        assert_eq!(scan_pairwise(&[g, d], 2), Err(Error::DirectednessMismatch));
    }

    #[test]
    fn scan_json_round_trip() {
        let g = complete(4);
        let r = scan_pairwise(&[g.clone(), g], 3).unwrap();
        let back: ScanResult = serde_json::from_str(&to_json(&r)).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn manifest_resolution() {
        let dir = std::env::temp_dir().join(format!("ibm-manifest-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("a.txt"), "0 1\n1 2\n").unwrap();
        std::fs::write(dir.join("b.txt"), "# header\n0 4\n").unwrap();
        std::fs::write(dir.join("list.txt"), "a.txt\n\n# skip\nb.txt\n").unwrap();
        let paths = read_manifest(&dir.join("list.txt")).unwrap();
        assert_eq!(paths, vec![dir.join("a.txt"), dir.join("b.txt")]);
        let nets = load_networks(&paths, false).unwrap();
        assert!(nets.iter().all(|g| g.n() == 5));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
