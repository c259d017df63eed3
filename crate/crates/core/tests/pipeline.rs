mod common;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use whr::bayesnet::{fit_cpts, topological_sort};
use whr::data_pipeline::{filter_countries, impute, read_raw, split, ColumnMap, SplitSpec};
use whr::discretizer::{discretize, paper_scheme, Level};
use whr::evaluation::{fit_linear, score};
use whr::grnn;
use whr::inference::query_sweep;
use whr::structure_search::{bootstrap_learn, consensus};
use whr::variables;

fn prepared(countries: usize, seed: u64) -> whr::data_pipeline::FeatureTable {
    let text = common::synthetic_panel_csv(countries, seed);
    let raw = read_raw(text.as_bytes(), &ColumnMap::default()).unwrap();
    impute(&filter_countries(&raw)).unwrap()
}

#[test]
fn filtering_keeps_expected_countries_and_years() {
    let ft = prepared(30, 1);
    assert_eq!(ft.len(), 30 * 4 + 2 * 3);
    assert_eq!(ft.country_count(), 32);
    assert_eq!(ft.year_range(), Some((2016, 2019)));
    assert!(ft.rows.iter().all(|r| r.country != "Burundi" && r.country != "Two Years"));
    assert!(ft.rows.iter().all(|r| r.values.iter().all(|v| v.is_finite())));
}

#[test]
fn preparation_ignores_row_order() {
    let text = common::synthetic_panel_csv(20, 2);
    let mut lines: Vec<&str> = text.lines().collect();
    let header = lines.remove(0);
    lines.shuffle(&mut ChaCha8Rng::seed_from_u64(9));
    let shuffled = format!("{header}\n{}\n", lines.join("\n"));
    let a = impute(&filter_countries(&read_raw(text.as_bytes(), &ColumnMap::default()).unwrap())).unwrap();
    let b = impute(&filter_countries(&read_raw(shuffled.as_bytes(), &ColumnMap::default()).unwrap())).unwrap();
    assert_eq!(a, b);
}

#[test]
fn feature_table_round_trips_through_csv() {
    let ft = prepared(10, 3);
    let mut buf = Vec::new();
    ft.write_csv(&mut buf, &["config_hash=abc".into()]).unwrap();
    let back = whr::data_pipeline::FeatureTable::read_csv(buf.as_slice()).unwrap();
    assert_eq!(back.variables, ft.variables);
    for (a, b) in back.rows.iter().zip(&ft.rows) {
        assert_eq!(a.country, b.country);
        assert!(a.values.iter().zip(&b.values).all(|(x, y)| (x - y).abs() <= 5e-7));
    }
}

#[test]
fn discretized_panel_uses_every_level() {
    let ft = prepared(60, 4);
    let dt = discretize(&ft, &paper_scheme()).unwrap();
    for v in variables::names() {
        let counts = dt.level_counts(&v).unwrap();
        assert!(counts.iter().all(|&c| c > 0), "{v}: {counts:?}");
    }
}

#[test]
fn grnn_beats_the_mean_on_held_out_year() {
    let ft = prepared(80, 5);
    let (train, test) = split(&ft, &SplitSpec::default()).unwrap();
    let sel = grnn::select_sigma(&train, &grnn::default_sigma_grid(), 5, 11).unwrap();
    let model = grnn::fit(&train, sel.sigma).unwrap();
    let (_, y) = test.predictors_and_target().unwrap();
    let g = score(&model.predict_table(&test).unwrap(), &y).unwrap();
    let ols = fit_linear(&train, 0.0).unwrap();
    let o = score(&ols.predict_table(&test).unwrap(), &y).unwrap();
    assert!(g.r2 > 0.5, "GRNN R² {}", g.r2);
    assert!(o.r2 > 0.3, "OLS R² {}", o.r2);
    assert_eq!(sel.cv_scores.len(), 30);
}

#[test]
fn structure_learning_to_queries() {
    let ft = prepared(60, 6);
    let data = discretize(&ft, &paper_scheme()).unwrap().to_data();
    let ast = bootstrap_learn(&data, 20, 3).unwrap();
    let dag = consensus(&ast, 0.5).unwrap();
    assert!(topological_sort(dag.n(), &dag.edges()).is_some());
    assert!(dag.edge_count() > 0);
    let net = fit_cpts(&dag, &data, 1.0).unwrap();
    let sweep = query_sweep(&net, variables::HEALTHY_LIFE, variables::GDP).unwrap();
    assert_eq!(sweep.iter().map(|(l, _)| *l).collect::<Vec<_>>(), Level::ALL.to_vec());
    for (_, p) in &sweep {
        assert!((p.distribution.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}
