//! Three-level discretization of the continuous panel.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bayesnet::CategoricalData;
use crate::data_pipeline::{write_comments, FeatureTable};
use crate::error::{Error, Result};
use crate::variables;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Level {
    Low = 0,
    Medium = 1,
    High = 2,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Low, Level::Medium, Level::High];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Level> {
        Level::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Level::Low => "Low",
            Level::Medium => "Medium",
            Level::High => "High",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Level::ALL
            .into_iter()
            .find(|l| l.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Format(format!("unknown level `{s}` (expected Low, Medium or High)")))
    }
}

/// Low = [low_edge, cut1), Medium = [cut1, cut2), High = [cut2, high_edge].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct BinEdges {
    pub low_edge: f64,
    pub cut1: f64,
    pub cut2: f64,
    pub high_edge: f64,
}

impl BinEdges {
    pub fn new(low_edge: f64, cut1: f64, cut2: f64, high_edge: f64) -> Result<Self> {
        let ok = [low_edge, cut1, cut2, high_edge].iter().all(|v| v.is_finite())
            && low_edge < cut1
            && cut1 < cut2
            && cut2 < high_edge;
        if !ok {
            return Err(Error::Parameter(format!(
                "bin edges must be finite and strictly increasing, got ({low_edge}, {cut1}, {cut2}, {high_edge})"
            )));
        }
        Ok(BinEdges {
            low_edge,
            cut1,
            cut2,
            high_edge,
        })
    }

    /// Values outside [low_edge, high_edge] clamp to the end levels.
    pub fn level(&self, value: f64) -> Option<Level> {
        if value.is_nan() {
            None
        } else if value < self.cut1 {
            Some(Level::Low)
        } else if value < self.cut2 {
            Some(Level::Medium)
        } else {
            Some(Level::High)
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.low_edge, self.cut1, self.cut2, self.high_edge]
    }
}

impl TryFrom<[f64; 4]> for BinEdges {
    type Error = Error;

    fn try_from(e: [f64; 4]) -> Result<Self> {
        BinEdges::new(e[0], e[1], e[2], e[3])
    }
}

impl From<BinEdges> for [f64; 4] {
    fn from(b: BinEdges) -> Self {
        b.as_array()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationScheme {
    pub bins: BTreeMap<String, BinEdges>,
}

/// The hand-chosen bin edges for the thirteen panel variables.
pub fn paper_scheme() -> DiscretizationScheme {
    let edges: [(&str, [f64; 4]); 13] = [
        (variables::GDP, [6.81, 8.57, 9.94, 11.46]),
        (variables::GINI, [0.19, 0.38, 0.57, 0.85]),
        (variables::GENEROSITY, [-0.33, -0.09, 0.19, 0.66]),
        (variables::POSITIVE_AFFECT, [0.32, 0.62, 0.75, 0.92]),
        (variables::NEGATIVE_AFFECT, [0.09, 0.25, 0.36, 0.59]),
        (variables::CORRUPTION, [0.04, 0.51, 0.77, 0.97]),
        (variables::CONFIDENCE, [0.07, 0.41, 0.66, 0.99]),
        (variables::HEALTHY_LIFE, [46.59, 60.62, 69.13, 77.11]),
        (variables::DEMOCRATIC_QUALITY, [-2.38, -0.92, 0.32, 1.58]),
        (variables::DELIVERY_QUALITY, [-1.93, -0.47, 0.67, 2.10]),
        (variables::FREEDOM, [0.30, 0.66, 0.82, 0.99]),
        (variables::SOCIAL_SUPPORT, [0.41, 0.71, 0.85, 0.98]),
        (variables::TARGET, [2.37, 4.83, 6.18, 7.86]),
    ];
    DiscretizationScheme {
        bins: edges
            .into_iter()
            .map(|(name, e)| {
                (
                    name.to_string(),
                    BinEdges::try_from(e).expect("built-in edges are increasing"),
                )
            })
            .collect(),
    }
}

impl DiscretizationScheme {
    pub fn edges(&self, variable: &str) -> Result<&BinEdges> {
        self.bins
            .get(variable)
            .ok_or_else(|| Error::Schema(format!("variable `{variable}` not in discretization scheme")))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

pub fn bin_of(value: f64, variable: &str, scheme: &DiscretizationScheme) -> Result<Level> {
    scheme.edges(variable)?.level(value).ok_or(Error::InvalidValue {
        variable: variable.to_string(),
        value,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteRow {
    pub country: String,
    pub year: i32,
    pub levels: Vec<Level>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteTable {
    pub variables: Vec<String>,
    pub rows: Vec<DiscreteRow>,
}

pub fn discretize(ft: &FeatureTable, scheme: &DiscretizationScheme) -> Result<DiscreteTable> {
    let edges = ft
        .variables
        .iter()
        .map(|v| scheme.edges(v))
        .collect::<Result<Vec<_>>>()?;
    let rows = ft
        .rows
        .iter()
        .map(|row| {
            let levels = row
                .values
                .iter()
                .zip(&edges)
                .zip(&ft.variables)
                .map(|((&v, e), name)| {
                    e.level(v).ok_or(Error::InvalidValue {
                        variable: name.clone(),
                        value: v,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(DiscreteRow {
                country: row.country.clone(),
                year: row.year,
                levels,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DiscreteTable {
        variables: ft.variables.clone(),
        rows,
    })
}

impl DiscreteTable {
    /// Low/Medium/High counts for one variable.
    pub fn level_counts(&self, variable: &str) -> Result<[usize; 3]> {
        let j = self
            .variables
            .iter()
            .position(|v| v == variable)
            .ok_or_else(|| Error::Schema(format!("table has no column `{variable}`")))?;
        let mut counts = [0; 3];
        for r in &self.rows {
            counts[r.levels[j].index()] += 1;
        }
        Ok(counts)
    }

    pub fn to_data(&self) -> CategoricalData {
        let columns = (0..self.variables.len())
            .map(|j| self.rows.iter().map(|r| r.levels[j].index() as u8).collect())
            .collect();
        CategoricalData::from_columns(self.variables.clone(), columns)
            .expect("rows share the variable count")
    }

    pub fn write_csv<W: Write>(&self, writer: W, provenance: &[String]) -> Result<()> {
        let mut writer = writer;
        write_comments(&mut writer, provenance)?;
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["country".to_string(), "year".to_string()];
        header.extend(self.variables.iter().cloned());
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![row.country.clone(), row.year.to_string()];
            rec.extend(row.levels.iter().map(|l| l.name().to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() < 3
            || !headers[0].eq_ignore_ascii_case("country")
            || !headers[1].eq_ignore_ascii_case("year")
        {
            return Err(Error::Schema(
                "discrete table header must start with country,year".into(),
            ));
        }
        let variables: Vec<String> = headers.iter().skip(2).map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let year = rec[1].trim().parse().map_err(|_| Error::Parse {
                line,
                message: format!("unparseable year `{}`", &rec[1]),
            })?;
            let levels = rec
                .iter()
                .skip(2)
                .map(|cell| {
                    cell.parse::<Level>().map_err(|e| Error::Parse {
                        line,
                        message: e.to_string(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(DiscreteRow {
                country: rec[0].to_string(),
                year,
                levels,
            });
        }
        Ok(DiscreteTable { variables, rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data_pipeline::FeatureRow;
    use proptest::prelude::*;

    #[test]
    fn scheme_has_thirteen_variables_with_table_edges() {
        let s = paper_scheme();
        assert_eq!(s.bins.len(), 13);
        assert_eq!(s.edges(variables::GDP).unwrap().as_array(), [6.81, 8.57, 9.94, 11.46]);
        assert_eq!(s.edges(variables::TARGET).unwrap().as_array(), [2.37, 4.83, 6.18, 7.86]);
        assert_eq!(
            s.edges(variables::NEGATIVE_AFFECT).unwrap().as_array(),
            [0.09, 0.25, 0.36, 0.59]
        );
    }

    #[test]
    fn bin_examples() {
        let s = paper_scheme();
        assert_eq!(bin_of(9.0, variables::GDP, &s).unwrap(), Level::Medium);
        assert_eq!(bin_of(6.81, variables::GDP, &s).unwrap(), Level::Low);
        assert_eq!(bin_of(8.57, variables::GDP, &s).unwrap(), Level::Medium);
        assert_eq!(bin_of(11.46, variables::GDP, &s).unwrap(), Level::High);
        assert_eq!(bin_of(12.0, variables::GDP, &s).unwrap(), Level::High);
        assert_eq!(bin_of(1.0, variables::GDP, &s).unwrap(), Level::Low);
        assert!(matches!(
            bin_of(f64::NAN, variables::GDP, &s),
            Err(Error::InvalidValue { .. })
        ));
        assert!(matches!(bin_of(1.0, "Nope", &s), Err(Error::Schema(_))));
    }

    #[test]
    fn rejects_non_increasing_edges() {
        assert!(BinEdges::new(0.0, 1.0, 1.0, 2.0).is_err());
        assert!(DiscretizationScheme::from_toml("[bins]\nX = [3.0, 2.0, 1.0, 0.0]\n").is_err());
    }

    #[test]
    fn scheme_toml_round_trip() {
        let s = paper_scheme();
        let text = s.to_toml().unwrap();
        assert!(text.contains("\"Log GDP per Capita\" = [6.81, 8.57, 9.94, 11.46]"));
        assert_eq!(DiscretizationScheme::from_toml(&text).unwrap(), s);
    }

    fn table_at_low_edges() -> FeatureTable {
        let s = paper_scheme();
        let names = variables::names();
        let values = names.iter().map(|n| s.bins[n].low_edge).collect();
        FeatureTable {
            variables: names,
            rows: vec![FeatureRow {
                country: "A".into(),
                year: 2016,
                values,
            }],
        }
    }

    #[test]
    fn low_edges_discretize_to_low() {
        let d = discretize(&table_at_low_edges(), &paper_scheme()).unwrap();
        assert_eq!(d.rows.len(), 1);
        assert!(d.rows[0].levels.iter().all(|&l| l == Level::Low));
    }

    #[test]
    fn variable_outside_scheme_is_schema_error() {
        let mut s = paper_scheme();
        s.bins.remove(variables::GINI);
        assert!(matches!(discretize(&table_at_low_edges(), &s), Err(Error::Schema(_))));
    }

    #[test]
    fn discrete_csv_round_trip() {
        let d = discretize(&table_at_low_edges(), &paper_scheme()).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf, &[]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().nth(1).unwrap().starts_with("A,2016,Low,Low"));
        assert_eq!(DiscreteTable::read_csv(buf.as_slice()).unwrap(), d);
    }

    proptest! {
        #[test]
        fn bin_is_monotone(a in -100.0f64..100.0, b in -100.0f64..100.0) {
            let s = paper_scheme();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            for name in variables::names() {
                prop_assert!(bin_of(lo, &name, &s).unwrap() <= bin_of(hi, &name, &s).unwrap());
            }
        }
    }
}
