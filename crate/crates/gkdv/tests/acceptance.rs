//! All fourteen acceptance criteria on the default scenario, one line each.

use gkdv::config::ScenarioConfig;
use gkdv::suite::Suite;
use gkdv_core::grid::Grid1D;
use gkdv_core::profiles::build_profiles;

#[test]
fn acceptance() {
    let config = ScenarioConfig::default();
    let g = &config.grid;
    let profiles = build_profiles(Grid1D::new(g.x_min, g.x_max, g.n).unwrap()).unwrap();
    let suite = Suite::new(&config, &profiles);
    let report = suite.run(&[], |c| println!("{c}"));
    assert_eq!(report.checks.len(), 14);
    let failed: Vec<String> = report.failures().map(|c| format!("{} {}", c.id, c.name)).collect();
    println!("{} of 14 criteria passed", 14 - failed.len());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
