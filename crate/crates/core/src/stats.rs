//! Exact interlacing statistics and the standardized two-sample tests.
//!
//! `q2` is the order-2 interlacing sum
//! `sum_{i1 != i3, i2 != i4} X[i1,i2] X[i3,i2] X[i3,i4] X[i1,i4]`; on an
//! unsigned adjacency it counts interlacing quadrilaterals, on `A - Ã` it is
//! the balance measure. Two independent routes compute it:
//!
//! * dense: materialize `M = X X'` and evaluate
//!   `tr(M^2) - tr(M o M) - tr(X'X o X'X) + 1'|X|1`;
//! * sparse: for each row `i`, tally common out-neighbors `k` of every other
//!   row `j` split by the sign of `X[i,k] X[j,k]`, and add
//!   `N+(N+ - 1) + N-(N- - 1) - 2 N+ N-`.
//!
//! `q3` is the order-3 sum for symmetric inputs, evaluated through a
//! seven-term trace and Hadamard-product identity.
//!
//! All accumulation is in `i128`; results must fit in `i64`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{diff, Network, SignedAdjacency};

/// Node count up to which [`Kernel::Auto`] picks the dense kernels.
pub const DENSE_THRESHOLD: usize = 2048;

/// Normalizing constant of the order-3 statistic.
const ORDER3_VARIANCE_FACTOR: f64 = 384.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    #[default]
    Auto,
    Dense,
    Sparse,
}

impl Kernel {
    fn use_dense(self, n: usize) -> bool {
        match self {
            Kernel::Auto => n <= DENSE_THRESHOLD,
            Kernel::Dense => true,
            Kernel::Sparse => false,
        }
    }
}

fn narrow(v: i128, what: &'static str) -> Result<i64> {
    i64::try_from(v).map_err(|_| Error::Overflow(what))
}

fn column_counts<G: SignedAdjacency + ?Sized>(x: &G) -> Vec<i64> {
    let mut counts = vec![0i64; x.node_count()];
    for i in 0..x.node_count() {
        for &k in x.row(i).0 {
            counts[k as usize] += 1;
        }
    }
    counts
}

/// Transposed rows: for each column `k`, the `(i, X[i,k])` with `X[i,k] != 0`.
fn columns<G: SignedAdjacency + ?Sized>(x: &G) -> (Vec<usize>, Vec<(u32, i8)>) {
    let n = x.node_count();
    let mut offsets = vec![0usize; n + 1];
    for i in 0..n {
        for &k in x.row(i).0 {
            offsets[k as usize + 1] += 1;
        }
    }
    for k in 0..n {
        offsets[k + 1] += offsets[k];
    }
    let mut fill = offsets.clone();
    let mut entries = vec![(0u32, 0i8); offsets[n]];
    for i in 0..n {
        let (cols, vals) = x.row(i);
        for (&k, &v) in cols.iter().zip(vals) {
            entries[fill[k as usize]] = (i as u32, v);
            fill[k as usize] += 1;
        }
    }
    (offsets, entries)
}

/// Order-2 sum via the dense `X X'` product.
pub fn q2_dense<G: SignedAdjacency + ?Sized>(x: &G) -> Result<i64> {
    let n = x.node_count();
    let mut xd = vec![0i8; n * n];
    for i in 0..n {
        let (cols, vals) = x.row(i);
        for (&k, &v) in cols.iter().zip(vals) {
            xd[i * n + k as usize] = v;
        }
    }
    let mut m = vec![0i32; n * n];
    for i in 0..n {
        let (cols, vals) = x.row(i);
        for j in i..n {
            let rj = &xd[j * n..(j + 1) * n];
            let s: i32 = cols
                .iter()
                .zip(vals)
                .map(|(&k, &v)| v as i32 * rj[k as usize] as i32)
                .sum();
            m[i * n + j] = s;
            m[j * n + i] = s;
        }
    }
    let tr_m2: i128 = m.iter().map(|&v| (v as i128) * (v as i128)).sum();
    let tr_m_had: i128 = (0..n).map(|i| (m[i * n + i] as i128).pow(2)).sum();
    let tr_n_had: i128 = column_counts(x).iter().map(|&c| (c as i128).pow(2)).sum();
    let abs_sum = x.nnz() as i128;
    narrow(tr_m2 - tr_m_had - tr_n_had + abs_sum, "q2_dense")
}

/// Order-2 sum via the common-out-neighbor tally over adjacency lists.
pub fn q2_sparse<G: SignedAdjacency + ?Sized>(x: &G) -> Result<i64> {
    let n = x.node_count();
    let (col_off, col_entries) = columns(x);
    let total: i128 = (0..n)
        .into_par_iter()
        .map_init(
            || (vec![0u32; n], vec![0u32; n], Vec::<u32>::new()),
            |(plus, minus, touched), i| {
                let (cols, vals) = x.row(i);
                for (&k, &v) in cols.iter().zip(vals) {
                    let k = k as usize;
                    for &(j, w) in &col_entries[col_off[k]..col_off[k + 1]] {
                        let ju = j as usize;
                        if ju == i {
                            continue;
                        }
                        if plus[ju] == 0 && minus[ju] == 0 {
                            touched.push(j);
                        }
                        if v == w {
                            plus[ju] += 1;
                        } else {
                            minus[ju] += 1;
                        }
                    }
                }
                let mut acc: i128 = 0;
                for &j in touched.iter() {
                    let ju = j as usize;
                    let (p, q) = (plus[ju] as i128, minus[ju] as i128);
                    acc += p * (p - 1) + q * (q - 1) - 2 * p * q;
                    plus[ju] = 0;
                    minus[ju] = 0;
                }
                touched.clear();
                acc
            },
        )
        .sum();
    narrow(total, "q2_sparse")
}

pub fn q2_with<G: SignedAdjacency + ?Sized>(x: &G, kernel: Kernel) -> Result<i64> {
    if kernel.use_dense(x.node_count()) {
        q2_dense(x)
    } else {
        q2_sparse(x)
    }
}

/// Order-2 sum with automatic kernel selection.
pub fn q2<G: SignedAdjacency + ?Sized>(x: &G) -> Result<i64> {
    q2_with(x, Kernel::Auto)
}

/// Row access to `X^2` for the order-3 identity.
trait SquareRows: Sync {
    fn for_each_in_row(&self, i: usize, f: &mut dyn FnMut(usize, i64));
    fn diag(&self, i: usize) -> i64;
}

struct DenseSquare {
    n: usize,
    data: Vec<i64>,
}

impl SquareRows for DenseSquare {
    fn for_each_in_row(&self, i: usize, f: &mut dyn FnMut(usize, i64)) {
        for (j, &v) in self.data[i * self.n..(i + 1) * self.n].iter().enumerate() {
            if v != 0 {
                f(j, v);
            }
        }
    }
    fn diag(&self, i: usize) -> i64 {
        self.data[i * self.n + i]
    }
}

struct SparseSquare {
    rows: Vec<Vec<(u32, i64)>>,
    diag: Vec<i64>,
}

impl SquareRows for SparseSquare {
    fn for_each_in_row(&self, i: usize, f: &mut dyn FnMut(usize, i64)) {
        for &(j, v) in &self.rows[i] {
            f(j as usize, v);
        }
    }
    fn diag(&self, i: usize) -> i64 {
        self.diag[i]
    }
}

/// Adds `scale * row_j(X)` into the scratch row, tracking touched columns.
#[inline]
fn axpy_row<G: SignedAdjacency + ?Sized>(
    x: &G,
    j: usize,
    scale: i64,
    acc: &mut [i64],
    hit: &mut [bool],
    touched: &mut Vec<u32>,
) {
    let (cols, vals) = x.row(j);
    for (&l, &v) in cols.iter().zip(vals) {
        let lu = l as usize;
        if !hit[lu] {
            hit[lu] = true;
            touched.push(l);
        }
        acc[lu] += scale * v as i64;
    }
}

fn dense_square<G: SignedAdjacency + ?Sized>(x: &G) -> DenseSquare {
    let n = x.node_count();
    let mut data = vec![0i64; n * n];
    for i in 0..n {
        let (cols, vals) = x.row(i);
        let out = &mut data[i * n..(i + 1) * n];
        for (&k, &v) in cols.iter().zip(vals) {
            let (kc, kv) = x.row(k as usize);
            for (&l, &w) in kc.iter().zip(kv) {
                out[l as usize] += v as i64 * w as i64;
            }
        }
    }
    DenseSquare { n, data }
}

fn sparse_square<G: SignedAdjacency + ?Sized>(x: &G) -> SparseSquare {
    let n = x.node_count();
    let rows: Vec<Vec<(u32, i64)>> = (0..n)
        .into_par_iter()
        .map_init(
            || (vec![0i64; n], vec![false; n], Vec::<u32>::new()),
            |(acc, hit, touched), i| {
                let (cols, vals) = x.row(i);
                for (&k, &v) in cols.iter().zip(vals) {
                    axpy_row(x, k as usize, v as i64, acc, hit, touched);
                }
                touched.sort_unstable();
                let mut row = Vec::with_capacity(touched.len());
                for &l in touched.iter() {
                    let lu = l as usize;
                    if acc[lu] != 0 {
                        row.push((l, acc[lu]));
                    }
                    acc[lu] = 0;
                    hit[lu] = false;
                }
                touched.clear();
                row
            },
        )
        .collect();
    let diag = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            r.binary_search_by_key(&(i as u32), |e| e.0)
                .map(|p| r[p].1)
                .unwrap_or(0)
        })
        .collect();
    SparseSquare { rows, diag }
}

#[derive(Default, Clone, Copy)]
struct Order3Terms {
    tr_x6: i128,
    tr_x2_had_x4: i128,
    tr_x2_cubed: i128,
    tr_cube_x3: i128,
    tr_b2_had_x2: i128,
}

impl std::ops::Add for Order3Terms {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            tr_x6: self.tr_x6 + o.tr_x6,
            tr_x2_had_x4: self.tr_x2_had_x4 + o.tr_x2_had_x4,
            tr_x2_cubed: self.tr_x2_cubed + o.tr_x2_cubed,
            tr_cube_x3: self.tr_cube_x3 + o.tr_cube_x3,
            tr_b2_had_x2: self.tr_b2_had_x2 + o.tr_b2_had_x2,
        }
    }
}

fn q3_from_square<G: SignedAdjacency + ?Sized, S: SquareRows>(x: &G, sq: &S) -> Result<i64> {
    let n = x.node_count();
    let terms = (0..n)
        .into_par_iter()
        .map_init(
            || (vec![0i64; n], vec![false; n], Vec::<u32>::new()),
            |(acc, hit, touched), i| {
                let d2 = sq.diag(i) as i128;
                let mut x4_ii: i128 = 0;
                sq.for_each_in_row(i, &mut |j, s| {
                    x4_ii += (s as i128) * (s as i128);
                    axpy_row(x, j, s, acc, hit, touched);
                });
                // Row i of X^3 now sits in `acc`.
                let mut t = Order3Terms::default();
                for &l in touched.iter() {
                    let lu = l as usize;
                    t.tr_x6 += (acc[lu] as i128).pow(2);
                }
                let (cols, vals) = x.row(i);
                let mut b2_ii: i128 = 0;
                for (&l, &v) in cols.iter().zip(vals) {
                    let v = v as i128;
                    t.tr_cube_x3 += v * v * v * acc[l as usize] as i128;
                    b2_ii += v.pow(4);
                }
                for &l in touched.iter() {
                    acc[l as usize] = 0;
                    hit[l as usize] = false;
                }
                touched.clear();
                t.tr_x2_had_x4 = d2 * x4_ii;
                t.tr_x2_cubed = d2 * d2 * d2;
                t.tr_b2_had_x2 = b2_ii * d2;
                t
            },
        )
        .reduce(Order3Terms::default, |a, b| a + b);

    // 1'(X o X)^3 1 = u' B u with B = X o X and u = B 1.
    let b_row = |i: usize| -> (Vec<(usize, i128)>, i128) {
        let (cols, vals) = x.row(i);
        let entries: Vec<(usize, i128)> = cols
            .iter()
            .zip(vals)
            .map(|(&l, &v)| (l as usize, (v as i128).pow(2)))
            .collect();
        let s = entries.iter().map(|e| e.1).sum();
        (entries, s)
    };
    let u: Vec<i128> = (0..n).map(|i| b_row(i).1).collect();
    let mut ones_b3: i128 = 0;
    let mut six_powers: i128 = 0;
    for i in 0..n {
        let (entries, _) = b_row(i);
        let bu: i128 = entries.iter().map(|&(l, b)| b * u[l]).sum();
        ones_b3 += u[i] * bu;
        six_powers += entries.iter().map(|&(_, b)| b * b * b).sum::<i128>();
    }

    let q = terms.tr_x6 - 6 * terms.tr_x2_had_x4 + 3 * ones_b3 + 6 * terms.tr_cube_x3
        + 4 * terms.tr_x2_cubed
        - 12 * terms.tr_b2_had_x2
        + 4 * six_powers;
    narrow(q, "q3")
}

fn require_undirected<G: SignedAdjacency + ?Sized>(x: &G) -> Result<()> {
    if x.is_directed() {
        Err(Error::DirectedUnsupported)
    } else {
        Ok(())
    }
}

/// Order-3 sum with `X^2` held densely.
pub fn q3_dense<G: SignedAdjacency + ?Sized>(x: &G) -> Result<i64> {
    require_undirected(x)?;
    q3_from_square(x, &dense_square(x))
}

/// Order-3 sum with `X^2` held as sparse rows.
pub fn q3_sparse<G: SignedAdjacency + ?Sized>(x: &G) -> Result<i64> {
    require_undirected(x)?;
    q3_from_square(x, &sparse_square(x))
}

pub fn q3_with<G: SignedAdjacency + ?Sized>(x: &G, kernel: Kernel) -> Result<i64> {
    if kernel.use_dense(x.node_count()) {
        q3_dense(x)
    } else {
        q3_sparse(x)
    }
}

/// Order-3 sum for symmetric inputs with automatic kernel selection.
pub fn q3<G: SignedAdjacency + ?Sized>(x: &G) -> Result<i64> {
    q3_with(x, Kernel::Auto)
}

/// Upper-tail probability `P(N(0,1) >= z)`.
pub fn normal_sf(z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::NonFinite(z));
    }
    Ok(0.5 * libm::erfc(z / std::f64::consts::SQRT_2))
}

/// Result of one two-sample comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub n: usize,
    pub directed: bool,
    pub order: u8,
    /// Interlacing sum of `A - Ã`.
    pub q_star: i64,
    /// Interlacing cycle count of `A`.
    pub q_a: i64,
    /// Interlacing cycle count of `Ã`.
    pub q_b: i64,
    pub statistic: f64,
    pub z_score: f64,
    pub p_value: f64,
}

/// Order-2 test. `statistic = q2(A - Ã) / (8 sqrt(q2(A) + q2(Ã)))`; the
/// reference distribution is `N(0, 1)` undirected and `N(0, 1/2)` directed,
/// so the z-score carries a `sqrt(2)` factor for directed inputs.
pub fn psi_test(a: &Network, b: &Network) -> Result<TestReport> {
    psi_test_with(a, b, Kernel::Auto)
}

pub fn psi_test_with(a: &Network, b: &Network, kernel: Kernel) -> Result<TestReport> {
    let star = diff(a, b)?;
    let q_a = q2_with(a, kernel)?;
    let q_b = q2_with(b, kernel)?;
    let denom = q_a as i128 + q_b as i128;
    if denom <= 0 {
        return Err(Error::DegenerateDenominator);
    }
    let q_star = q2_with(&star, kernel)?;
    let statistic = q_star as f64 / (8.0 * (denom as f64).sqrt());
    let z_score = if a.directed() {
        std::f64::consts::SQRT_2 * statistic
    } else {
        statistic
    };
    Ok(TestReport {
        n: a.n(),
        directed: a.directed(),
        order: 2,
        q_star,
        q_a,
        q_b,
        statistic,
        z_score,
        p_value: normal_sf(z_score)?,
    })
}

/// Order-3 test for undirected networks:
/// `statistic = q3(A - Ã) / sqrt(384 (q3(A) + q3(Ã)))`.
pub fn phi_test(a: &Network, b: &Network) -> Result<TestReport> {
    phi_test_with(a, b, Kernel::Auto)
}

pub fn phi_test_with(a: &Network, b: &Network, kernel: Kernel) -> Result<TestReport> {
    if a.directed() || b.directed() {
        return Err(Error::DirectedUnsupported);
    }
    let star = diff(a, b)?;
    let q_a = q3_with(a, kernel)?;
    let q_b = q3_with(b, kernel)?;
    let denom = q_a as i128 + q_b as i128;
    if denom <= 0 {
        return Err(Error::DegenerateDenominator);
    }
    let q_star = q3_with(&star, kernel)?;
    let statistic = q_star as f64 / (ORDER3_VARIANCE_FACTOR * denom as f64).sqrt();
    Ok(TestReport {
        n: a.n(),
        directed: false,
        order: 3,
        q_star,
        q_a,
        q_b,
        statistic,
        z_score: statistic,
        p_value: normal_sf(statistic)?,
    })
}

/// Dispatches on `order` (2 or 3).
pub fn compare(a: &Network, b: &Network, order: u8) -> Result<TestReport> {
    match order {
        2 => psi_test(a, b),
        3 => phi_test(a, b),
        other => Err(Error::invalid(format!("order {other} not supported (expected 2 or 3)"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::SignedNetwork;
    use crate::oracle::{brute_u, random_signed};
    use crate::rng::StreamRng;
    use proptest::prelude::*;

    fn cycle(n: usize, directed: bool) -> Network {
        Network::from_edges(n, directed, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    fn complete(n: usize) -> Network {
        let e: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        Network::from_edges(n, false, e).unwrap()
    }

    fn path(n: usize) -> Network {
        Network::from_edges(n, false, (0..n - 1).map(|i| (i, i + 1))).unwrap()
    }

    fn shared_out() -> SignedNetwork {
        SignedNetwork::from_entries(4, true, [(0, 2, 1), (0, 3, 1), (1, 2, 1), (1, 3, 1)]).unwrap()
    }

    fn shared_out_negated_edge() -> SignedNetwork {
        SignedNetwork::from_entries(4, true, [(0, 2, 1), (0, 3, -1), (1, 2, 1), (1, 3, 1)]).unwrap()
    }

    // Expected values below were produced by `oracle::brute_u` and are
    // re-checked against it in `frozen_values_match_oracle`.
    #[test]
    fn fixed_order2_values() {
        let single = Network::from_edges(2, false, [(0, 1)]).unwrap();
        for kernel in [Kernel::Dense, Kernel::Sparse] {
            assert_eq!(q2_with(&cycle(4, false), kernel).unwrap(), 8);
            assert_eq!(q2_with(&complete(4), kernel).unwrap(), 24);
            assert_eq!(q2_with(&single, kernel).unwrap(), 0);
            assert_eq!(q2_with(&shared_out(), kernel).unwrap(), 4);
            assert_eq!(q2_with(&shared_out_negated_edge(), kernel).unwrap(), -4);
            assert_eq!(q2_with(&cycle(4, true), kernel).unwrap(), 0);
            assert_eq!(q2_with(&Network::empty(6, true), kernel).unwrap(), 0);
        }
    }

    #[test]
    fn fixed_order3_values() {
        let single = Network::from_edges(2, false, [(0, 1)]).unwrap();
        for kernel in [Kernel::Dense, Kernel::Sparse] {
            assert_eq!(q3_with(&cycle(6, false), kernel).unwrap(), 12);
            assert_eq!(q3_with(&single, kernel).unwrap(), 0);
            assert_eq!(q3_with(&complete(3), kernel).unwrap(), 6);
        }
    }

    #[test]
    fn frozen_values_match_oracle() {
        assert_eq!(brute_u(&cycle(4, false), 2).unwrap(), 8);
        assert_eq!(brute_u(&complete(4), 2).unwrap(), 24);
        assert_eq!(brute_u(&shared_out(), 2).unwrap(), 4);
        assert_eq!(brute_u(&shared_out_negated_edge(), 2).unwrap(), -4);
        assert_eq!(brute_u(&cycle(4, true), 2).unwrap(), 0);
        assert_eq!(brute_u(&cycle(6, false), 3).unwrap(), 12);
        assert_eq!(brute_u(&complete(3), 3).unwrap(), 6);
    }

    #[test]
    fn q3_rejects_directed() {
        assert_eq!(q3(&cycle(6, true)), Err(Error::DirectedUnsupported));
    }

    #[test]
    fn sparse_matches_dense_on_random_graph() {
        let mut rng = StreamRng::new(2024, 0);
        let g = random_signed(50, false, 0.1, false, &mut rng);
        assert_eq!(q2_sparse(&g).unwrap(), q2_dense(&g).unwrap());
        assert_eq!(q3_sparse(&g).unwrap(), q3_dense(&g).unwrap());
    }

    #[test]
    fn normal_sf_values() {
        assert_eq!(normal_sf(0.0).unwrap(), 0.5);
        assert!((normal_sf(1.6448536269514729).unwrap() - 0.05).abs() < 1e-10);
        let far = normal_sf(-40.0).unwrap();
        assert!(far > 1.0 - 1e-12 && far <= 1.0);
        assert!((normal_sf(1.0).unwrap() / 0.15865525393145707 - 1.0).abs() < 1e-12);
        assert!((normal_sf(5.0).unwrap() / 2.866515718791933e-7 - 1.0).abs() < 1e-12);
        assert!(matches!(normal_sf(f64::NAN), Err(Error::NonFinite(_))));
        assert!(normal_sf(f64::INFINITY).is_err());
    }

    #[test]
    fn psi_identical_networks() {
        let g = complete(5);
        let r = psi_test(&g, &g).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 0.5);
        assert_eq!(r.q_star, 0);
    }

    #[test]
    fn psi_degenerate_on_paths() {
        assert_eq!(psi_test(&path(5), &path(5)), Err(Error::DegenerateDenominator));
    }

    #[test]
    fn psi_k4_versus_k4_minus_edge() {
        let a = complete(4);
        let b = Network::from_edges(4, false, [(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let star = diff(&a, &b).unwrap();
        let (qs, qa, qb) = (
            brute_u(&star, 2).unwrap(),
            brute_u(&a, 2).unwrap(),
            brute_u(&b, 2).unwrap(),
        );
        assert_eq!((qs, qa, qb), (0, 24, 8));
        let r = psi_test(&a, &b).unwrap();
        assert_eq!((r.q_star, r.q_a, r.q_b), (qs, qa, qb));
        let expected = qs as f64 / (8.0 * ((qa + qb) as f64).sqrt());
        assert_eq!(r.statistic, expected);
        assert_eq!(r.z_score, expected);
        assert_eq!(r.p_value, normal_sf(expected).unwrap());
        assert_eq!(r.order, 2);
    }

    #[test]
    fn psi_directed_scales_z() {
        let a = Network::from_edges(4, true, [(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
        let b = Network::empty(4, true);
        let r = psi_test(&a, &b).unwrap();
        assert_eq!(r.q_star, 4);
        assert_eq!(r.statistic, 4.0 / (8.0 * 2.0));
        assert!((r.z_score - std::f64::consts::SQRT_2 * r.statistic).abs() < 1e-15);
    }

    #[test]
    fn phi_examples() {
        let c6 = cycle(6, false);
        let same = phi_test(&c6, &c6).unwrap();
        assert_eq!((same.statistic, same.p_value), (0.0, 0.5));

        let r = phi_test(&c6, &Network::empty(6, false)).unwrap();
        assert_eq!((r.q_star, r.q_a, r.q_b), (12, 12, 0));
        assert_eq!(r.statistic, 12.0 / (384.0f64 * 12.0).sqrt());
        assert_eq!(r.order, 3);

        // Triangles carry order-3 configurations, so the denominator is positive.
        let t = complete(3);
        let tri = phi_test(&t, &t).unwrap();
        assert_eq!((tri.q_a, tri.statistic), (6, 0.0));

        assert_eq!(phi_test(&path(5), &path(5)), Err(Error::DegenerateDenominator));
        assert_eq!(phi_test(&cycle(6, true), &cycle(6, true)), Err(Error::DirectedUnsupported));
    }

    #[test]
    fn report_json_keys() {
        let g = complete(4);
        let v = serde_json::to_value(psi_test(&g, &g).unwrap()).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(
            keys,
            ["directed", "n", "order", "p_value", "q_a", "q_b", "q_star", "statistic", "z_score"]
        );
    }

    fn arb_signed() -> impl Strategy<Value = SignedNetwork> {
        (4usize..9, any::<bool>(), 0.1f64..0.9, any::<u64>()).prop_map(|(n, directed, density, seed)| {
            let mut rng = StreamRng::new(seed, 1);
            random_signed(n, directed, density, true, &mut rng)
        })
    }

    fn arb_pair() -> impl Strategy<Value = (Network, Network, Vec<usize>)> {
        (5usize..10, any::<bool>(), any::<u64>()).prop_map(|(n, directed, seed)| {
            let mut rng = StreamRng::new(seed, 2);
            let mut draw = || {
                let s = random_signed(n, directed, 0.5, false, &mut rng);
                let e: Vec<_> = s
                    .entries()
                    .filter(|&(i, j, _)| directed || i < j)
                    .map(|(i, j, _)| (i, j))
                    .collect();
                Network::from_edges(n, directed, e).unwrap()
            };
            let (a, b) = (draw(), draw());
            let mut perm: Vec<usize> = (0..n).collect();
            // Deterministic Fisher-Yates from the same stream.
            for i in (1..n).rev() {
                let j = (rng.next_f64() * (i + 1) as f64) as usize;
                perm.swap(i, j);
            }
            (a, b, perm)
        })
    }

    proptest! {
        #[test]
        fn kernels_agree_with_oracle(x in arb_signed()) {
            let brute = brute_u(&x, 2).unwrap();
            prop_assert_eq!(q2_dense(&x).unwrap(), brute);
            prop_assert_eq!(q2_sparse(&x).unwrap(), brute);
        }

        #[test]
        fn order3_agrees_with_oracle(seed in any::<u64>(), n in 4usize..8, density in 0.2f64..0.9) {
            let mut rng = StreamRng::new(seed, 3);
            let x = random_signed(n, false, density, true, &mut rng);
            let brute = brute_u(&x, 3).unwrap();
            prop_assert_eq!(q3_dense(&x).unwrap(), brute);
            prop_assert_eq!(q3_sparse(&x).unwrap(), brute);
        }

        #[test]
        fn sign_flip_even(x in arb_signed()) {
            prop_assert_eq!(q2(&x.negated()).unwrap(), q2(&x).unwrap());
            if !x.directed() {
                prop_assert_eq!(q3(&x.negated()).unwrap(), q3(&x).unwrap());
            }
        }

        #[test]
        fn unsigned_counts_nonnegative((a, _b, _p) in arb_pair()) {
            prop_assert!(q2(&a).unwrap() >= 0);
            if !a.directed() {
                prop_assert!(q3(&a).unwrap() >= 0);
            }
        }

        #[test]
        fn psi_symmetric_and_relabel_invariant((a, b, perm) in arb_pair()) {
            let Ok(ab) = psi_test(&a, &b) else { return Ok(()); };
            let ba = psi_test(&b, &a).unwrap();
            prop_assert_eq!(ab.statistic.abs(), ba.statistic.abs());
            prop_assert_eq!(ab.statistic, ba.statistic);
            let pa = a.permuted(&perm).unwrap();
            let pb = b.permuted(&perm).unwrap();
            prop_assert_eq!(psi_test(&pa, &pb).unwrap(), ab);
        }
    }
}
