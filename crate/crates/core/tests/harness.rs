use kslab_core::harness::sweep::sweep_csv;
use kslab_core::harness::verify::scenario;
use kslab_core::harness::{epsilon_refinement_study, sweep, SweepOutcome};

#[test]
fn one_dimensional_sweep_is_bounded() {
    let cfg = scenario("default_1d").unwrap();
    assert_eq!(cfg.sweep.mu, Some(vec![0.1, 1.0]));
    assert_eq!(cfg.sweep.chi, Some(vec![1.0, 10.0]));
    let rows = sweep(&cfg).unwrap();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert_eq!(r.outcome, SweepOutcome::Bounded, "{r:?}");
        assert_eq!(r.t_final, cfg.control.t_end);
    }
    assert_eq!(sweep_csv(&rows), sweep_csv(&sweep(&cfg).unwrap()));
}

#[test]
fn exploratory_sweep_completes() {
    let cfg = scenario("exploratory_2d").unwrap();
    let rows = sweep(&cfg).unwrap();
    let keys: Vec<(f64, f64)> = rows.iter().map(|r| (r.mu, r.chi)).collect();
    assert_eq!(keys, vec![(0.0, 1.0), (0.0, 2.0), (1.0, 1.0), (1.0, 2.0)]);
    assert!(rows.iter().all(|r| r.max_sup_u.is_finite() && r.max_sup_u > 0.0));
}

#[test]
fn default_eps_study_distances_shrink() {
    let cfg = scenario("default_1d").unwrap();
    let eps = cfg.eps_study.clone().unwrap();
    let study = epsilon_refinement_study(&cfg, &eps).unwrap();
    assert_eq!(study.rows.len(), 2);
    assert!(study.rows[0].l1_final > study.rows[1].l1_final);
    assert!(study.rows[0].l2_spacetime > study.rows[1].l2_spacetime);
}
