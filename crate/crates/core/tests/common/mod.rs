#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use whr::bayesnet::{CategoricalCpt, CategoricalData, Dag, DiscreteBayesNet, LEVELS};
use whr::discretizer::paper_scheme;
use whr::variables;

/// Header used for each variable in the generated file: the first published
/// spelling when there is one, so alias resolution is exercised.
fn header(name: &str) -> String {
    let spec = variables::spec(name).unwrap();
    spec.headers.first().copied().unwrap_or(spec.name).to_string()
}

/// Signed loading of each variable on a latent development factor, in
/// canonical variable order (target last).
const LOADINGS: [f64; 13] = [0.9, -0.3, 0.1, 0.5, -0.5, -0.6, 0.2, 0.9, 0.8, 0.85, 0.5, 0.7, 0.0];

/// A WHR-style panel CSV: `countries` regular countries observed 2012–2019
/// with a few missing cells, two countries with exactly three window
/// years, one with two, and one country from the exclusion list.
pub fn synthetic_panel_csv(countries: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scheme = paper_scheme();
    let names = variables::names();

    let mut w = csv::Writer::from_writer(Vec::new());
    let mut head = vec!["Country name".to_string(), "year".to_string()];
    head.extend(names.iter().map(|n| header(n)));
    head.push("Standard deviation of ladder by country-year".into());
    w.write_record(&head).unwrap();

    let mut units: Vec<(String, Vec<i32>)> = (0..countries)
        .map(|i| (format!("Country {i:03}"), (2012..=2019).collect()))
        .collect();
    units.push(("Late Three A".into(), vec![2017, 2018, 2019]));
    units.push(("Late Three B".into(), vec![2016, 2017, 2019]));
    units.push(("Two Years".into(), vec![2018, 2019]));
    units.push(("Burundi".into(), (2014..=2019).collect()));

    for (country, years) in units {
        let u: f64 = rng.random();
        let freedom_shock: f64 = rng.random::<f64>() - 0.5;
        for &year in &years {
            let drift = 0.01 * (year - 2016) as f64;
            let mut values = Vec::with_capacity(13);
            let mut fractions = Vec::with_capacity(13);
            for (j, name) in names.iter().enumerate() {
                let e = scheme.edges(name).unwrap();
                let noise: f64 = rng.random::<f64>() - 0.5;
                let f = if j == 12 {
                    // Ladder: nonlinear in development plus the freedom shock.
                    0.15 + 0.65 * u * u + 0.25 * freedom_shock + 0.05 * noise + drift
                } else if j == 10 {
                    0.5 + 0.5 * LOADINGS[j] * (u - 0.5) * 2.0 + 0.6 * freedom_shock + 0.1 * noise
                } else {
                    0.5 + LOADINGS[j] * (u - 0.5) + (1.0 - LOADINGS[j].abs()) * noise + drift
                };
                let f = f.clamp(0.0, 1.0);
                fractions.push(f);
                values.push(e.low_edge + f * (e.high_edge - e.low_edge));
            }
            let mut rec = vec![country.clone(), year.to_string()];
            for (j, v) in values.iter().enumerate() {
                let missing = j != 12 && rng.random::<f64>() < 0.03;
                rec.push(if missing { String::new() } else { format!("{v:.6}") });
            }
            rec.push(format!("{:.3}", 1.0 + fractions[12]));
            w.write_record(&rec).unwrap();
        }
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

pub fn write_panel(dir: &Path, countries: usize, seed: u64) -> PathBuf {
    let path = dir.join("panel.csv");
    std::fs::write(&path, synthetic_panel_csv(countries, seed)).unwrap();
    path
}

pub fn node_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("V{i:02}")).collect()
}

/// Random DAG respecting the index order, each node with at most
/// `max_parents` parents, and CPT rows drawn away from zero.
pub fn random_net(n: usize, max_parents: usize, rng: &mut ChaCha8Rng) -> DiscreteBayesNet {
    let mut edges = Vec::new();
    for c in 1..n {
        let k = rng.random_range(0..=max_parents.min(c));
        let mut candidates: Vec<usize> = (0..c).collect();
        for _ in 0..k {
            let i = rng.random_range(0..candidates.len());
            edges.push((candidates.swap_remove(i), c));
        }
    }
    // Shuffle labels so the topological order is not the index order.
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let edges: Vec<(usize, usize)> = edges.into_iter().map(|(p, c)| (perm[p], perm[c])).collect();
    let dag = Dag::from_edges(node_names(n), &edges).unwrap();
    let cpts = (0..n)
        .map(|v| {
            let parents: Vec<usize> = dag.parents(v).iter().copied().collect();
            let q = LEVELS.pow(parents.len() as u32);
            let rows = (0..q)
                .map(|_| {
                    let raw: [f64; 3] = [0.05 + rng.random::<f64>(), 0.05 + rng.random::<f64>(), 0.05 + rng.random::<f64>()];
                    let z: f64 = raw.iter().sum();
                    raw.map(|x| x / z)
                })
                .collect();
            CategoricalCpt { child: v, parents, rows }
        })
        .collect();
    DiscreteBayesNet::new(dag, cpts).unwrap()
}

/// Forward sample of `rows` complete observations.
pub fn sample(net: &DiscreteBayesNet, rows: usize, rng: &mut ChaCha8Rng) -> CategoricalData {
    let order = net.dag().topological_order();
    let mut out = Vec::with_capacity(rows);
    for _ in 0..rows {
        let mut a = vec![0usize; net.n()];
        for &v in &order {
            let p = net.cpt(v).row_for(&a);
            let r: f64 = rng.random();
            a[v] = if r < p[0] {
                0
            } else if r < p[0] + p[1] {
                1
            } else {
                2
            };
        }
        out.push(a.iter().map(|&x| x as u8).collect());
    }
    CategoricalData::from_rows(net.dag().nodes().to_vec(), &out).unwrap()
}

/// Independent uniform levels.
pub fn independent_data(n_vars: usize, rows: usize, rng: &mut ChaCha8Rng) -> CategoricalData {
    let rows: Vec<Vec<u8>> = (0..rows)
        .map(|_| (0..n_vars).map(|_| rng.random_range(0..3u8)).collect())
        .collect();
    CategoricalData::from_rows(node_names(n_vars), &rows).unwrap()
}
