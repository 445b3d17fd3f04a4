//! Fixtures and brute-force oracles shared by the integration tests. The
//! oracles deliberately avoid the library's numeric helpers; only the
//! documented random-stream contract (`annotmtp::rng`) is shared.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use annotmtp::rng;
use annotmtp::{AnnotationMatrix, SampleData};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn ids(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i:03}")).collect()
}

/// Desk-scale fixture: n = 20 (10 per class), G = 60, M = 5. Genes 0..12
/// carry a mean shift in class 1; term T000 is enriched for them.
pub fn desk_fixture() -> (SampleData, AnnotationMatrix) {
    let mut r = ChaCha8Rng::seed_from_u64(20_060_511);
    let (g, n) = (60, 20);
    let labels: Vec<u8> = (0..n).map(|i| u8::from(i % 2 == 1)).collect();
    let rows: Vec<Vec<f64>> = (0..g)
        .map(|gene| {
            let shift = if gene < 12 { 1.2 + 0.1 * gene as f64 } else { 0.0 };
            let sd = 0.5 + (gene % 7) as f64 * 0.15;
            labels
                .iter()
                .map(|&l| {
                    let e: f64 = StandardNormal.sample(&mut r);
                    7.0 + sd * e + if l == 1 { shift } else { 0.0 }
                })
                .collect()
        })
        .collect();
    let data = SampleData::new(ids("G", g), ids("S", n), rows, labels, ["ctrl".into(), "case".into()]).unwrap();
    let mut sets: Vec<Vec<usize>> = vec![
        (0..10).chain(40..44).collect(),
        (0..4).chain(20..30).collect(),
        (14..32).collect(),
        (40..52).collect(),
        Vec::new(),
    ];
    let mut pool: Vec<usize> = (0..g).collect();
    for i in 0..13 {
        let j = r.random_range(i..g);
        pool.swap(i, j);
    }
    sets[4] = pool[..13].to_vec();
    sets[4].sort_unstable();
    let a = AnnotationMatrix::from_index_sets(ids("G", g), ids("T", 5), &sets).unwrap();
    (data, a)
}

pub fn columns(a: &AnnotationMatrix) -> Vec<Vec<f64>> {
    (0..a.n_terms()).map(|m| a.column(m).to_vec()).collect()
}

// Scalar oracles.

pub fn naive_mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn naive_var(x: &[f64]) -> f64 {
    let m = naive_mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64
}

pub fn oracle_pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    let sab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let saa: f64 = a.iter().map(|x| x * x).sum();
    let sbb: f64 = b.iter().map(|x| x * x).sum();
    (n * sab - sa * sb) / ((n * saa - sa * sa).sqrt() * (n * sbb - sb * sb).sqrt())
}

/// Pearson chi-square sum over the four cells, `(O - E)^2 / E`.
pub fn oracle_chisq(a: &[f64], b: &[f64]) -> Option<f64> {
    let g = a.len() as f64;
    let mut obs = [[0.0f64; 2]; 2];
    for (x, y) in a.iter().zip(b) {
        obs[*x as usize][*y as usize] += 1.0;
    }
    let rows = [obs[0][0] + obs[0][1], obs[1][0] + obs[1][1]];
    let cols = [obs[0][0] + obs[1][0], obs[0][1] + obs[1][1]];
    if rows.contains(&0.0) || cols.contains(&0.0) {
        return None;
    }
    let mut s = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let e = rows[i] * cols[j] / g;
            s += (obs[i][j] - e) * (obs[i][j] - e) / e;
        }
    }
    Some(s)
}

fn split(a: &[f64], x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut g0 = Vec::new();
    let mut g1 = Vec::new();
    for (k, v) in a.iter().zip(x) {
        if *k == 1.0 {
            g1.push(*v)
        } else {
            g0.push(*v)
        }
    }
    (g0, g1)
}

pub fn oracle_welch(a: &[f64], x: &[f64]) -> Option<f64> {
    let (g0, g1) = split(a, x);
    if g0.len() < 2 || g1.len() < 2 {
        return None;
    }
    let se2 = naive_var(&g1) / g1.len() as f64 + naive_var(&g0) / g0.len() as f64;
    if se2 <= 0.0 {
        return None;
    }
    Some((naive_mean(&g1) - naive_mean(&g0)) / se2.sqrt())
}

pub fn oracle_marginal_causal(a: &[f64], parents: &[Vec<f64>], x: &[f64]) -> Option<f64> {
    let mut strata: BTreeMap<String, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for g in 0..a.len() {
        let key: String = parents.iter().map(|p| if p[g] == 1.0 { '1' } else { '0' }).collect();
        let e = strata.entry(key).or_default();
        if a[g] == 1.0 {
            e.1.push(x[g])
        } else {
            e.0.push(x[g])
        }
    }
    let usable: Vec<_> = strata.values().filter(|(s0, s1)| !s0.is_empty() && !s1.is_empty()).collect();
    if usable.is_empty() {
        return None;
    }
    let total: usize = usable.iter().map(|(s0, s1)| s0.len() + s1.len()).sum();
    Some(
        usable
            .iter()
            .map(|(s0, s1)| (s0.len() + s1.len()) as f64 / total as f64 * (naive_mean(s1) - naive_mean(s0)))
            .sum(),
    )
}

// Gene-level oracles over (rows, labels).

pub fn class_values(row: &[f64], labels: &[u8], k: u8) -> Vec<f64> {
    row.iter().zip(labels).filter(|(_, &l)| l == k).map(|(v, _)| *v).collect()
}

pub fn oracle_lambda_d(rows: &[Vec<f64>], labels: &[u8]) -> Vec<f64> {
    rows.iter()
        .map(|r| naive_mean(&class_values(r, labels, 1)) - naive_mean(&class_values(r, labels, 0)))
        .collect()
}

pub fn oracle_lambda_t(rows: &[Vec<f64>], labels: &[u8]) -> Option<Vec<f64>> {
    rows.iter()
        .map(|r| {
            let (x0, x1) = (class_values(r, labels, 0), class_values(r, labels, 1));
            let den = (naive_var(&x1) / x1.len() as f64 + naive_var(&x0) / x0.len() as f64).sqrt();
            (den > 0.0).then(|| (naive_mean(&x1) - naive_mean(&x0)) / den)
        })
        .collect()
}

/// Top-count rule applied literally: g selected iff #{g' : s(g) >= s(g')} > G - count.
pub fn oracle_top_count(s: &[f64], count: usize) -> Vec<f64> {
    let g = s.len();
    s.iter()
        .map(|&v| {
            let dominated = s.iter().filter(|&&w| v >= w).count();
            f64::from(u8::from(dominated > g - count))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleScheme {
    Bootstrap,
    Permutation,
}

/// One resampled dataset from stream `(seed, b)`, following the documented
/// draw order; `stat` returns `None` for degenerate draws, which are redrawn
/// from the continuing stream.
pub fn replay_replicate<T>(
    rows: &[Vec<f64>],
    labels: &[u8],
    scheme: OracleScheme,
    seed: u64,
    b: u64,
    mut stat: impl FnMut(&[Vec<f64>], &[u8]) -> Option<T>,
) -> T {
    let mut stream = rng::replicate_rng(seed, b);
    let n = labels.len();
    for _ in 0..=100 {
        let (rs, ls): (Vec<Vec<f64>>, Vec<u8>) = match scheme {
            OracleScheme::Bootstrap => {
                let idx = rng::bootstrap_indices(&mut stream, n);
                let ls: Vec<u8> = idx.iter().map(|&i| labels[i]).collect();
                let n1 = ls.iter().filter(|&&l| l == 1).count();
                if n1 < 2 || n - n1 < 2 {
                    continue;
                }
                (rows.iter().map(|r| idx.iter().map(|&i| r[i]).collect()).collect(), ls)
            }
            OracleScheme::Permutation => (rows.to_vec(), rng::permute(&mut stream, labels)),
        };
        if let Some(t) = stat(&rs, &ls) {
            return t;
        }
    }
    panic!("oracle replicate {b} degenerate");
}

/// Column maxima after centering each row (and scaling by
/// sqrt(min(1, 1/var)) when `scale`), with absolute values when two-sided.
pub fn oracle_maxima(t: &[Vec<f64>], scale: bool, two_sided: bool) -> Vec<f64> {
    let (bn, m) = (t.len(), t[0].len());
    let mut z = vec![vec![0.0; m]; bn];
    for i in 0..m {
        let mean = t.iter().map(|r| r[i]).sum::<f64>() / bn as f64;
        let var = t.iter().map(|r| (r[i] - mean) * (r[i] - mean)).sum::<f64>() / bn as f64;
        let s = if scale && var > 0.0 { (1.0 / var).min(1.0).sqrt() } else { 1.0 };
        for b in 0..bn {
            z[b][i] = s * (t[b][i] - mean);
        }
    }
    z.iter()
        .map(|r| {
            r.iter()
                .map(|&v| if two_sided { v.abs() } else { v })
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

pub fn oracle_adj_p(maxima: &[f64], observed: &[f64], two_sided: bool) -> Vec<f64> {
    observed
        .iter()
        .map(|&t| {
            let f = if two_sided { t.abs() } else { t };
            maxima.iter().filter(|&&x| x >= f).count() as f64 / maxima.len() as f64
        })
        .collect()
}

/// Gene-level two-sided maxT with shift-and-scale transform.
pub fn oracle_de_adj_p(rows: &[Vec<f64>], labels: &[u8], scheme: OracleScheme, b: usize, seed: u64) -> Option<Vec<f64>> {
    let observed = oracle_lambda_t(rows, labels)?;
    let t: Vec<Vec<f64>> = (0..b as u64)
        .map(|r| replay_replicate(rows, labels, scheme, seed, r, oracle_lambda_t))
        .collect();
    Some(oracle_adj_p(&oracle_maxima(&t, true, true), &observed, true))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleScenario {
    Tt,
    Dt,
    NeqChiTop(usize),
    NeqChiAdjP { alpha: f64, b_inner: usize, scheme: OracleScheme },
}

/// (psi, T) on one dataset; `replicate` keys the inner stream.
pub fn oracle_scenario_stat(
    rows: &[Vec<f64>],
    labels: &[u8],
    a: &[Vec<f64>],
    scenario: OracleScenario,
    seed: u64,
    replicate: u64,
) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = labels.len() as f64;
    let (psi, psi0) = match scenario {
        OracleScenario::Tt | OracleScenario::Dt => {
            let lambda: Vec<f64> = match scenario {
                OracleScenario::Tt => oracle_lambda_t(rows, labels)?,
                _ => oracle_lambda_d(rows, labels),
            };
            let abs: Vec<f64> = lambda.iter().map(|v| v.abs()).collect();
            (a.iter().map(|col| oracle_welch(col, &abs)).collect::<Option<Vec<f64>>>()?, 0.0)
        }
        OracleScenario::NeqChiTop(k) => {
            let s: Vec<f64> = oracle_lambda_t(rows, labels)?.iter().map(|v| v.abs()).collect();
            let bin = oracle_top_count(&s, k);
            (a.iter().map(|col| oracle_chisq(col, &bin).unwrap_or(0.0)).collect(), 1.0)
        }
        OracleScenario::NeqChiAdjP { alpha, b_inner, scheme } => {
            let inner_seed = rng::derive_seed(seed, replicate, "inner");
            let p = oracle_de_adj_p(rows, labels, scheme, b_inner, inner_seed)?;
            let bin: Vec<f64> = p.iter().map(|&v| f64::from(u8::from(v <= alpha))).collect();
            (a.iter().map(|col| oracle_chisq(col, &bin).unwrap_or(0.0)).collect(), 1.0)
        }
    };
    let t = psi.iter().map(|v| n.sqrt() * (v - psi0)).collect();
    Some((psi, t))
}

pub struct ReplayReport {
    pub psi: Vec<f64>,
    pub stat: Vec<f64>,
    pub adj_p: Vec<f64>,
}

/// Straight-line scenario run: observed chain, B outer bootstrap replicates
/// of the whole chain, shift-only null, maxT adjusted p-values.
pub fn replay_scenario(
    data: &SampleData,
    a: &AnnotationMatrix,
    scenario: OracleScenario,
    b: usize,
    seed: u64,
) -> ReplayReport {
    let rows: Vec<Vec<f64>> = (0..data.n_genes()).map(|g| data.gene_row(g).to_vec()).collect();
    let labels = data.labels().to_vec();
    let cols = columns(a);
    let (psi, stat) = oracle_scenario_stat(&rows, &labels, &cols, scenario, seed, rng::OBSERVED_REPLICATE).unwrap();
    let t: Vec<Vec<f64>> = (0..b as u64)
        .map(|r| {
            replay_replicate(&rows, &labels, OracleScheme::Bootstrap, seed, r, |rs, ls| {
                oracle_scenario_stat(rs, ls, &cols, scenario, seed, r).map(|(_, t)| t)
            })
        })
        .collect();
    let two_sided = matches!(scenario, OracleScenario::Tt | OracleScenario::Dt);
    let adj_p = oracle_adj_p(&oracle_maxima(&t, false, two_sided), &stat, two_sided);
    ReplayReport { psi, stat, adj_p }
}

// Random DAGs: edges only point from higher to lower index, so acyclic.

pub fn random_dag<R: Rng>(r: &mut R, n: usize, density: f64) -> (Vec<String>, Vec<(usize, usize)>) {
    let names = ids("N", n);
    let mut edges = Vec::new();
    for child in 1..n {
        for parent in 0..child {
            if r.random::<f64>() < density {
                edges.push((child, parent));
            }
        }
    }
    (names, edges)
}

/// Reachability matrix, `reach[i][j]` iff j is an ancestor of i.
pub fn closure(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut reach = vec![vec![false; n]; n];
    for &(c, p) in edges {
        reach[c][p] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    reach
}

pub fn ancestors_of(reach: &[Vec<bool>], names: &[String], i: usize) -> BTreeSet<String> {
    (0..names.len()).filter(|&j| reach[i][j]).map(|j| names[j].clone()).collect()
}

pub fn offspring_of(reach: &[Vec<bool>], names: &[String], j: usize) -> BTreeSet<String> {
    (0..names.len()).filter(|&i| reach[i][j]).map(|i| names[i].clone()).collect()
}
