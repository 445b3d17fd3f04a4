mod common;

use annotmtp::mtp::{NullTransform, ReplicateContext, Scheme};
use annotmtp::rng;
use annotmtp::scenario::{compare_scenarios, scenario_profile};
use annotmtp::*;
use approx::assert_abs_diff_eq;
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 8_675_309;

fn check_replay(report: &ScenarioReport, a: &AnnotationMatrix, oracle: &ReplayReport) {
    assert_eq!(report.rows.len(), a.n_terms());
    for row in &report.rows {
        let m = a.term_index(&row.term_id).unwrap();
        assert_abs_diff_eq!(row.psi_hat, oracle.psi[m], epsilon = 1e-10);
        assert_abs_diff_eq!(row.stat, oracle.stat[m], epsilon = 1e-10);
        assert_eq!(row.adj_p, oracle.adj_p[m], "{}", row.term_id);
        assert_eq!(row.n_annotated, a.annotated_count(m));
    }
    for w in report.rows.windows(2) {
        assert!(w[0].adj_p <= w[1].adj_p);
    }
}

#[test]
fn tt_and_dt_match_replay() {
    let (data, a) = desk_fixture();
    for (kind, oracle) in [(ScenarioKind::Tt, OracleScenario::Tt), (ScenarioKind::Dt, OracleScenario::Dt)] {
        let report = run_scenario(&data, &a, &ScenarioConfig::new(kind, 200, SEED), 0).unwrap();
        check_replay(&report, &a, &replay_scenario(&data, &a, oracle, 200, SEED));
        assert_eq!(report.info.realized_de_count, None);
    }
}

#[test]
fn neq_chi_top_matches_replay() {
    let (data, a) = desk_fixture();
    let cfg = ScenarioConfig::new(ScenarioKind::NeqChi, 200, SEED)
        .with_de_estimator(DeEstimator::parse("top:12", 1000, Scheme::Permutation).unwrap());
    let report = run_scenario(&data, &a, &cfg, 0).unwrap();
    check_replay(&report, &a, &replay_scenario(&data, &a, OracleScenario::NeqChiTop(12), 200, SEED));
    assert_eq!(report.info.realized_de_count, Some(12));
}

#[test]
fn neq_chi_adjp_matches_replay() {
    let (data, a) = desk_fixture();
    let cfg = ScenarioConfig::new(ScenarioKind::NeqChi, 60, SEED)
        .with_de_estimator(DeEstimator::parse("adjp:0.05", 40, Scheme::Permutation).unwrap());
    let report = run_scenario(&data, &a, &cfg, 0).unwrap();
    let oracle = OracleScenario::NeqChiAdjP {
        alpha: 0.05,
        b_inner: 40,
        scheme: OracleScheme::Permutation,
    };
    check_replay(&report, &a, &replay_scenario(&data, &a, oracle, 60, SEED));
    assert_eq!(report.info.b_inner, Some(40));
}

#[test]
fn config_errors() {
    let (data, a) = desk_fixture();
    let top = DeEstimator::parse("top:20", 1000, Scheme::Permutation).unwrap();
    let bad = [
        ScenarioConfig::new(ScenarioKind::Tt, 200, 1).with_de_estimator(top.clone()),
        ScenarioConfig::new(ScenarioKind::NeqChi, 200, 1),
        ScenarioConfig::new(ScenarioKind::Dt, 1, 1),
        ScenarioConfig::new(ScenarioKind::NeqChi, 200, 1)
            .with_de_estimator(DeEstimator::parse("top:0", 1000, Scheme::Permutation).unwrap()),
    ];
    for cfg in &bad {
        assert!(matches!(run_scenario(&data, &a, cfg, 1), Err(Error::Config(_))), "{cfg:?}");
    }
    assert!(DeEstimator::parse("best:3", 10, Scheme::Permutation).is_err());
    assert!(DeEstimator::parse("adjp:x", 10, Scheme::Permutation).is_err());
}

#[test]
fn identical_columns_give_identical_rows() {
    let (data, _) = desk_fixture();
    let set: Vec<usize> = (0..20).collect();
    let a = AnnotationMatrix::from_index_sets(data.gene_ids().to_vec(), ids("T", 4), &vec![set; 4]).unwrap();
    let report = run_scenario(&data, &a, &ScenarioConfig::new(ScenarioKind::Tt, 50, 3), 1).unwrap();
    let first = &report.rows[0];
    assert!(report.rows.iter().all(|r| r.stat == first.stat && r.adj_p == first.adj_p));
    // ties fall back to index order
    assert_eq!(report.rows.iter().map(|r| r.term_id.as_str()).collect::<Vec<_>>(), ["T000", "T001", "T002", "T003"]);
}

#[test]
fn constant_profile_gives_zero_statistics() {
    let mut r = ChaCha8Rng::seed_from_u64(4);
    let n = 12;
    let row: Vec<f64> = (0..n).map(|_| r.random_range(0.0..5.0)).collect();
    let labels: Vec<u8> = (0..n).map(|i| u8::from(i % 2 == 0)).collect();
    let data = SampleData::new(ids("G", 10), ids("S", n), vec![row; 10], labels, ["a".into(), "b".into()]).unwrap();
    let a = AnnotationMatrix::from_index_sets(ids("G", 10), ids("T", 2), &[vec![0, 1, 2], vec![3, 4, 5, 6]]).unwrap();
    for kind in [ScenarioKind::Tt, ScenarioKind::Dt] {
        let report = run_scenario(&data, &a, &ScenarioConfig::new(kind, 20, 1), 1).unwrap();
        assert!(report.rows.iter().all(|r| r.stat == 0.0 && r.psi_hat == 0.0));
        assert_eq!(report.info.observed_flagged, 2);
    }
}

#[test]
fn estimators_coincide_when_counts_agree() {
    let (data, a) = desk_fixture();
    let (b_inner, alpha) = (200, 0.05);
    let inner_cfg = DeTestConfig {
        b: b_inner,
        alpha,
        scheme: Scheme::Permutation,
        transform: NullTransform::ShiftAndScale,
        ..Default::default()
    };
    let inner = de_test(&data, &inner_cfg, rng::derive_seed(SEED, rng::OBSERVED_REPLICATE, "inner"), 1).unwrap();
    let k = inner.mtp.rejected.len();
    assert!(k > 0);
    // no tie at the selection boundary
    let mut abs: Vec<f64> = inner.lambda_t.iter().map(|v| v.abs()).collect();
    abs.sort_by(|x, y| y.total_cmp(x));
    assert!(abs[k - 1] > abs[k]);

    let ctx = ReplicateContext::observed(SEED);
    let adjp = ScenarioConfig::new(ScenarioKind::NeqChi, 20, SEED)
        .with_de_estimator(DeEstimator::parse(&format!("adjp:{alpha}"), b_inner, Scheme::Permutation).unwrap());
    let top = ScenarioConfig::new(ScenarioKind::NeqChi, 20, SEED)
        .with_de_estimator(DeEstimator::parse(&format!("top:{k}"), b_inner, Scheme::Permutation).unwrap());
    let (p1, k1) = scenario_profile(&data, &adjp, ctx).unwrap();
    let (p2, k2) = scenario_profile(&data, &top, ctx).unwrap();
    assert_eq!(p1, p2);
    assert_eq!((k1, k2), (Some(k), Some(k)));
    let r1 = run_scenario(&data, &a, &adjp, 0).unwrap();
    let r2 = run_scenario(&data, &a, &top, 0).unwrap();
    for (x, y) in r1.rows.iter().zip(&r2.rows) {
        let y = r2.rows.iter().find(|r| r.term_id == x.term_id).unwrap_or(y);
        assert_eq!(x.psi_hat, y.psi_hat);
    }
}

#[test]
fn tt_and_dt_agree_under_equal_variances() {
    let mut r = ChaCha8Rng::seed_from_u64(6);
    let n = 16;
    let labels: Vec<u8> = (0..n).map(|i| u8::from(i >= n / 2)).collect();
    let resid: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
    let g = 30;
    let rows: Vec<Vec<f64>> = (0..g)
        .map(|_| {
            let shift = r.random_range(-2.0..2.0);
            (0..n).map(|i| resid[i] + if labels[i] == 1 { shift } else { 0.0 }).collect()
        })
        .collect();
    let data = SampleData::new(ids("G", g), ids("S", n), rows, labels, ["a".into(), "b".into()]).unwrap();
    let sets: Vec<Vec<usize>> = (0..6).map(|m| (0..g).filter(|x| (x * 7 + m * 3) % 5 < 2).collect()).collect();
    let a = AnnotationMatrix::from_index_sets(ids("G", g), ids("T", 6), &sets).unwrap();
    let tt = run_scenario(&data, &a, &ScenarioConfig::new(ScenarioKind::Tt, 100, 2), 1).unwrap();
    let dt = run_scenario(&data, &a, &ScenarioConfig::new(ScenarioKind::Dt, 100, 2), 1).unwrap();
    let order = |rep: &ScenarioReport| rep.rows.iter().map(|r| r.term_id.clone()).collect::<Vec<_>>();
    assert_eq!(order(&tt), order(&dt));
}

#[test]
fn compare_examples() {
    let (data, a) = desk_fixture();
    let tt = run_scenario(&data, &a, &ScenarioConfig::new(ScenarioKind::Tt, 100, 1), 0).unwrap();
    let dt = run_scenario(&data, &a, &ScenarioConfig::new(ScenarioKind::Dt, 100, 1), 0).unwrap();
    let own = compare_scenarios(&[&tt, &tt], 5).unwrap();
    assert_eq!(own[0].overlaps, vec![1, 2, 3, 4, 5]);
    let cross = compare_scenarios(&[&tt, &dt], 5).unwrap();
    for r in 1..=5 {
        let x: std::collections::BTreeSet<_> = tt.rows[..r].iter().map(|r| &r.term_id).collect();
        let y: std::collections::BTreeSet<_> = dt.rows[..r].iter().map(|r| &r.term_id).collect();
        assert_eq!(cross[0].overlaps[r - 1], x.intersection(&y).count());
    }
    let mut rev = tt.clone();
    rev.rows.reverse();
    if rev.rows[0].term_id != tt.rows[0].term_id {
        assert_eq!(compare_scenarios(&[&tt, &rev], 1).unwrap()[0].overlaps, vec![0]);
    }
    let fewer = run_scenario(&data, &a.select_terms(&[0, 1]), &ScenarioConfig::new(ScenarioKind::Tt, 20, 1), 0).unwrap();
    assert!(compare_scenarios(&[&tt, &fewer], 2).is_err());
}

#[test]
fn report_duality_and_worker_determinism() {
    let (data, a) = desk_fixture();
    let cfg = ScenarioConfig::new(ScenarioKind::Tt, 150, 12);
    let base = run_scenario(&data, &a, &cfg, 1).unwrap();
    for w in [0, 2, 8] {
        assert_eq!(run_scenario(&data, &a, &cfg, w).unwrap().rows, base.rows);
    }
    for alpha in [0.01, 0.05, 0.2, 0.5] {
        let mut c = cfg.clone();
        c.alpha = alpha;
        let rep = run_scenario(&data, &a, &c, 0).unwrap();
        let rejected: Vec<usize> = (0..a.n_terms()).filter(|&m| rep.mtp.adjusted_p[m] <= alpha).collect();
        assert_eq!(rep.mtp.rejected, rejected);
    }
}

#[test]
fn misaligned_genes_rejected() {
    let (data, a) = desk_fixture();
    let other = AnnotationMatrix::from_index_sets(ids("X", 60), ids("T", 1), &[vec![0, 1, 2]]).unwrap();
    assert!(matches!(
        run_scenario(&data, &other, &ScenarioConfig::new(ScenarioKind::Tt, 10, 1), 1),
        Err(Error::Alignment(_))
    ));
    let _ = a;
}
