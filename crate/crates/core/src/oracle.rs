//! Brute-force enumeration of the interlacing tuple sums and signed cycle
//! counts. Slow and obviously correct; every fast kernel is checked against
//! these.
//!
//! All counts use the ordered-tuple convention: an undirected `m`-cycle is
//! counted `2m` times (every rotation, both directions).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Network, SignedAdjacency, SignedNetwork};
use crate::rng::{Purpose, StreamRng};

/// Largest node count the enumerators accept.
pub const ENUMERATION_LIMIT: usize = 12;

fn dense<G: SignedAdjacency + ?Sized>(x: &G) -> Result<(usize, Vec<i64>)> {
    let n = x.node_count();
    if n > ENUMERATION_LIMIT {
        return Err(Error::TooLargeForEnumeration {
            n,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut d = vec![0i64; n * n];
    for i in 0..n {
        let (cols, vals) = x.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            d[i * n + j as usize] = v as i64;
        }
    }
    Ok((n, d))
}

/// Calls `f` on every ordered `m`-tuple of pairwise distinct indices in `0..n`.
fn for_each_distinct_tuple(n: usize, m: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(n: usize, m: usize, cur: &mut Vec<usize>, used: &mut [bool], f: &mut impl FnMut(&[usize])) {
        if cur.len() == m {
            f(cur);
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                rec(n, m, cur, used, f);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut used = vec![false; n];
    rec(n, m, &mut Vec::with_capacity(m), &mut used, f);
}

/// The order-`m` interlacing sum: over odd-position indices `o_1..o_m`
/// pairwise distinct and even-position indices `e_1..e_m` pairwise distinct,
/// the product `X[o_1,e_1] X[o_2,e_1] X[o_2,e_2] X[o_3,e_2] ... X[o_1,e_m]`.
pub fn brute_u<G: SignedAdjacency + ?Sized>(x: &G, m: usize) -> Result<i64> {
    if !(2..=3).contains(&m) {
        return Err(Error::invalid(format!("order m = {m} not supported (expected 2 or 3)")));
    }
    let (n, d) = dense(x)?;
    let at = |i: usize, j: usize| d[i * n + j];
    let mut odds: Vec<Vec<usize>> = Vec::new();
    for_each_distinct_tuple(n, m, &mut |t| odds.push(t.to_vec()));
    let mut total: i64 = 0;
    for o in &odds {
        for e in &odds {
            let mut prod = 1i64;
            for t in 0..m {
                prod *= at(o[t], e[t]) * at(o[(t + 1) % m], e[t]);
                if prod == 0 {
                    break;
                }
            }
            total += prod;
        }
    }
    Ok(total)
}

/// The interlacing cycle count of an unsigned network.
pub fn brute_c(g: &Network, m: usize) -> Result<i64> {
    brute_u(g, m)
}

/// Signed `m`-cycle tallies under the ordered-tuple convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleCounts {
    /// `balanced - unbalanced`.
    pub total: i64,
    pub abs_total: u64,
    pub balanced: u64,
    pub unbalanced: u64,
}

/// Enumerates ordered closed walks `i_1 -> ... -> i_m -> i_1` over pairwise
/// distinct nodes and classifies each by the sign of its edge product.
pub fn cycle_balance_counts(x: &SignedNetwork, m: usize) -> Result<OracleCounts> {
    if x.directed() {
        return Err(Error::DirectedUnsupported);
    }
    if m < 3 {
        return Err(Error::invalid(format!("cycle length {m} must be at least 3")));
    }
    let (n, d) = dense(x)?;
    if (0..n).any(|i| (0..n).any(|j| d[i * n + j] != d[j * n + i])) {
        return Err(Error::invalid("cycle counting needs a symmetric matrix"));
    }
    let mut counts = OracleCounts {
        total: 0,
        abs_total: 0,
        balanced: 0,
        unbalanced: 0,
    };
    if m > n {
        return Ok(counts);
    }

    // Depth-first over simple paths; pruning on absent edges keeps this fast.
    fn walk(
        n: usize,
        m: usize,
        d: &[i64],
        path: &mut Vec<usize>,
        used: &mut [bool],
        sign: i64,
        counts: &mut OracleCounts,
    ) {
        let last = *path.last().unwrap();
        if path.len() == m {
            let close = d[last * n + path[0]];
            if close != 0 {
                counts.abs_total += 1;
                if sign * close > 0 {
                    counts.balanced += 1;
                } else {
                    counts.unbalanced += 1;
                }
            }
            return;
        }
        for v in 0..n {
            let w = d[last * n + v];
            if w != 0 && !used[v] {
                used[v] = true;
                path.push(v);
                walk(n, m, d, path, used, sign * w, counts);
                path.pop();
                used[v] = false;
            }
        }
    }

    let mut used = vec![false; n];
    for start in 0..n {
        used[start] = true;
        let mut path = vec![start];
        walk(n, m, &d, &mut path, &mut used, 1, &mut counts);
        used[start] = false;
    }
    counts.total = counts.balanced as i64 - counts.unbalanced as i64;
    Ok(counts)
}

/// Random zero-diagonal matrix with entries in `{-1, 0, +1}`. Each off-diagonal
/// cell (upper triangle when undirected) is nonzero with probability
/// `density`, with a fair sign when `signed`.
pub fn random_signed(n: usize, directed: bool, density: f64, signed: bool, rng: &mut StreamRng) -> SignedNetwork {
    let mut entries = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j || (!directed && j < i) {
                continue;
            }
            if rng.next_f64() < density {
                let v = if signed && rng.next_f64() < 0.5 { -1 } else { 1 };
                entries.push((i, j, v));
            }
        }
    }
    SignedNetwork::from_entries(n, directed, entries).expect("generated entries are valid")
}

/// Outcome of [`oracle_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheckReport {
    pub trials: usize,
    pub matches: usize,
    pub order2_trials: usize,
    pub order3_trials: usize,
    /// Descriptions of the first few mismatches, if any.
    pub mismatches: Vec<String>,
}

impl OracleCheckReport {
    pub fn all_match(&self) -> bool {
        self.matches == self.trials
    }
}

/// Compares the fast kernels against brute force on `trials` random signed
/// matrices with `4 <= n <= n_max`. Every third trial is a symmetric
/// instance that also checks the order-3 kernel.
pub fn oracle_check(n_max: usize, trials: usize, seed: u64) -> Result<OracleCheckReport> {
    use crate::stats::{q2_dense, q2_sparse, q3};

    if !(4..=ENUMERATION_LIMIT).contains(&n_max) {
        return Err(Error::invalid(format!(
            "n-max must lie in [4, {ENUMERATION_LIMIT}], got {n_max}"
        )));
    }
    let mut report = OracleCheckReport {
        trials,
        matches: 0,
        order2_trials: 0,
        order3_trials: 0,
        mismatches: Vec::new(),
    };
    for t in 0..trials {
        let mut rng = StreamRng::for_purpose(seed, Purpose::Oracle, t as u64);
        let n = 4 + (rng.next_f64() * (n_max - 3) as f64) as usize;
        let density = 0.2 + 0.6 * rng.next_f64();
        let order3 = t % 3 == 2;
        let directed = !order3 && rng.next_f64() < 0.5;
        let x = random_signed(n, directed, density, true, &mut rng);
        let ok = if order3 {
            report.order3_trials += 1;
            let fast = q3(&x)?;
            let slow = brute_u(&x, 3)?;
            if fast != slow && report.mismatches.len() < 10 {
                report.mismatches.push(format!("trial {t}: q3 = {fast}, brute = {slow}"));
            }
            fast == slow
        } else {
            report.order2_trials += 1;
            let dense = q2_dense(&x)?;
            let sparse = q2_sparse(&x)?;
            let slow = brute_u(&x, 2)?;
            let ok = dense == sparse && sparse == slow;
            if !ok && report.mismatches.len() < 10 {
                report.mismatches.push(format!(
                    "trial {t}: dense = {dense}, sparse = {sparse}, brute = {slow}"
                ));
            }
            ok
        };
        if ok {
            report.matches += 1;
        }
    }
    Ok(report)
}
