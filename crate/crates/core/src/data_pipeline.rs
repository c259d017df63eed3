//! Loading, country filtering, imputation and the train/test split of the
//! country-year panel.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::variables;

/// First and last survey year accepted on load.
pub const SURVEY_YEARS: (i32, i32) = (2005, 2019);
/// The analysis window.
pub const WINDOW: (i32, i32) = (2016, 2019);

/// Countries dropped because they only entered the survey in 2018 or 2019.
pub const EXCLUDED_COUNTRIES: [&str; 12] = [
    "Burundi",
    "Jamaica",
    "Somalia",
    "Maldives",
    "Trinidad and Tobago",
    "Congo (Kinshasa)",
    "Malaysia",
    "Comoros",
    "Central African Republic",
    "South Sudan",
    "Swaziland",
    "Bahrain",
];

/// Minimum number of window years a country needs to be kept.
pub const MIN_WINDOW_YEARS: usize = 3;

const COUNTRY_HEADERS: [&str; 3] = ["country", "Country name", "Country"];
const YEAR_HEADERS: [&str; 1] = ["year"];

/// Header spellings accepted for each column. Keys are `country`, `year` and
/// the canonical variable names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub country: Vec<String>,
    pub year: Vec<String>,
    pub variables: BTreeMap<String, Vec<String>>,
}

impl Default for ColumnMap {
    fn default() -> Self {
        let variables = variables::VARIABLES
            .iter()
            .map(|v| {
                let mut headers = vec![v.name.to_string()];
                headers.extend(v.headers.iter().map(|h| h.to_string()));
                (v.name.to_string(), headers)
            })
            .collect();
        ColumnMap {
            country: COUNTRY_HEADERS.iter().map(|s| s.to_string()).collect(),
            year: YEAR_HEADERS.iter().map(|s| s.to_string()).collect(),
            variables,
        }
    }
}

impl ColumnMap {
    /// Adds extra header aliases on top of the defaults. Keys must be
    /// `country`, `year` or a canonical variable name.
    pub fn with_aliases(mut self, aliases: &BTreeMap<String, Vec<String>>) -> Result<Self> {
        for (key, extra) in aliases {
            let slot = match key.as_str() {
                "country" => &mut self.country,
                "year" => &mut self.year,
                other => self.variables.get_mut(other).ok_or_else(|| {
                    Error::Config(format!(
                        "alias key `{other}` is not `country`, `year` or a known variable"
                    ))
                })?,
            };
            for header in extra {
                if !slot.iter().any(|h| h == header) {
                    slot.push(header.clone());
                }
            }
        }
        Ok(self)
    }

    fn locate(headers: &csv::StringRecord, accepted: &[String], column: &str) -> Result<usize> {
        headers
            .iter()
            .position(|h| accepted.iter().any(|a| a.trim().eq_ignore_ascii_case(h.trim())))
            .ok_or_else(|| Error::MissingColumn {
                column: column.to_string(),
                accepted: accepted.join(" | "),
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawRow {
    pub country: String,
    pub year: i32,
    pub values: Vec<Option<f64>>,
}

/// Panel rows as read, with possibly missing cells. `values` follow the
/// order of `variables`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub variables: Vec<String>,
    pub rows: Vec<RawRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub country: String,
    pub year: i32,
    pub values: Vec<f64>,
}

/// A complete panel: no missing cells.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub variables: Vec<String>,
    pub rows: Vec<FeatureRow>,
}

fn parse_cell(cell: &str) -> Option<f64> {
    let cell = cell.trim();
    if cell.is_empty() || cell.eq_ignore_ascii_case("na") {
        return None;
    }
    cell.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_year(cell: &str, line: usize) -> Result<i32> {
    let cell = cell.trim();
    let year = cell
        .parse::<i32>()
        .ok()
        .or_else(|| {
            cell.parse::<f64>()
                .ok()
                .filter(|y| y.fract() == 0.0)
                .map(|y| y as i32)
        })
        .ok_or_else(|| Error::Parse {
            line,
            message: format!("unparseable year `{cell}`"),
        })?;
    if year < SURVEY_YEARS.0 || year > SURVEY_YEARS.1 {
        return Err(Error::Parse {
            line,
            message: format!(
                "year {year} outside the survey range {}..={}",
                SURVEY_YEARS.0, SURVEY_YEARS.1
            ),
        });
    }
    Ok(year)
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(false)
        .from_reader(reader)
}

/// Reads a comma-separated panel. Columns not named in `columns` are ignored.
pub fn read_raw<R: Read>(reader: R, columns: &ColumnMap) -> Result<RawTable> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers()?.clone();
    let country_idx = ColumnMap::locate(&headers, &columns.country, "country")?;
    let year_idx = ColumnMap::locate(&headers, &columns.year, "year")?;
    let names = variables::names();
    let mut var_idx = Vec::with_capacity(names.len());
    for name in &names {
        let accepted = columns
            .variables
            .get(name)
            .cloned()
            .unwrap_or_else(|| vec![name.clone()]);
        var_idx.push(ColumnMap::locate(&headers, &accepted, name)?);
    }

    let mut seen = HashSet::new();
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(i + 2);
        let country = record.get(country_idx).unwrap_or("").trim().to_string();
        if country.is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty country name".into(),
            });
        }
        let year = parse_year(record.get(year_idx).unwrap_or(""), line)?;
        if !seen.insert((country.clone(), year)) {
            return Err(Error::DuplicateKey { country, year });
        }
        let values = var_idx
            .iter()
            .map(|&j| record.get(j).and_then(parse_cell))
            .collect();
        rows.push(RawRow {
            country,
            year,
            values,
        });
    }
    Ok(RawTable {
        variables: names,
        rows,
    })
}

pub fn load_raw(path: &Path, columns: &ColumnMap) -> Result<RawTable> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_raw(file, columns)
}

/// Rules applied by [`filter_countries_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct FilterRules {
    pub window: (i32, i32),
    pub excluded: Vec<String>,
    pub min_years: usize,
}

impl Default for FilterRules {
    fn default() -> Self {
        FilterRules {
            window: WINDOW,
            excluded: EXCLUDED_COUNTRIES.iter().map(|s| s.to_string()).collect(),
            min_years: MIN_WINDOW_YEARS,
        }
    }
}

/// Restricts to 2016–2019, drops the late-entry countries and any other
/// country with fewer than three window years.
pub fn filter_countries(raw: &RawTable) -> RawTable {
    filter_countries_with(raw, &FilterRules::default())
}

pub fn filter_countries_with(raw: &RawTable, rules: &FilterRules) -> RawTable {
    let excluded: HashSet<&str> = rules.excluded.iter().map(String::as_str).collect();
    let in_window: Vec<&RawRow> = raw
        .rows
        .iter()
        .filter(|r| r.year >= rules.window.0 && r.year <= rules.window.1)
        .filter(|r| !excluded.contains(r.country.as_str()))
        .collect();

    let mut years: BTreeMap<&str, usize> = BTreeMap::new();
    for row in &in_window {
        *years.entry(row.country.as_str()).or_default() += 1;
    }
    let rows = in_window
        .into_iter()
        .filter(|r| years[r.country.as_str()] >= rules.min_years)
        .cloned()
        .collect();
    RawTable {
        variables: raw.variables.clone(),
        rows,
    }
}

/// Which rule filled each imputed cell.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImputationReport {
    pub country_mean: usize,
    pub year_gap_country_mean: usize,
    pub global_mean: usize,
}

impl ImputationReport {
    pub fn total(&self) -> usize {
        self.country_mean + self.year_gap_country_mean + self.global_mean
    }
}

pub fn impute(raw: &RawTable) -> Result<FeatureTable> {
    impute_with_report(raw).map(|(ft, _)| ft)
}

/// Fills every missing cell. For a cell (country, year, variable) the fill
/// is the mean of that country's observed values for the variable in the
/// table, which for a variable unobserved across a whole year is the mean of
/// the country's other years. Countries with no observation at all fall back
/// to the mean over all observed cells of the variable.
///
/// Rows are returned sorted by (country, year); all sums run in that order so
/// the result does not depend on input row order.
pub fn impute_with_report(raw: &RawTable) -> Result<(FeatureTable, ImputationReport)> {
    let mut rows: Vec<&RawRow> = raw.rows.iter().collect();
    rows.sort_by(|a, b| (a.country.as_str(), a.year).cmp(&(b.country.as_str(), b.year)));
    let n_vars = raw.variables.len();

    let mut global = Vec::with_capacity(n_vars);
    for (j, name) in raw.variables.iter().enumerate() {
        let observed: Vec<f64> = rows.iter().filter_map(|r| r.values[j]).collect();
        if observed.is_empty() {
            if rows.is_empty() {
                global.push(0.0);
                continue;
            }
            return Err(Error::ImputationImpossible(name.clone()));
        }
        global.push(observed.iter().sum::<f64>() / observed.len() as f64);
    }

    // (year, variable) pairs with no observation in that year at all
    let mut year_gaps: HashSet<(i32, usize)> = HashSet::new();
    let years: BTreeSet<i32> = rows.iter().map(|r| r.year).collect();
    for &year in &years {
        for j in 0..n_vars {
            if rows
                .iter()
                .filter(|r| r.year == year)
                .all(|r| r.values[j].is_none())
            {
                year_gaps.insert((year, j));
            }
        }
    }

    let mut country_means: BTreeMap<(&str, usize), Option<f64>> = BTreeMap::new();
    for row in &rows {
        for j in 0..n_vars {
            country_means
                .entry((row.country.as_str(), j))
                .or_insert_with(|| {
                    let observed: Vec<f64> = rows
                        .iter()
                        .filter(|r| r.country == row.country)
                        .filter_map(|r| r.values[j])
                        .collect();
                    (!observed.is_empty())
                        .then(|| observed.iter().sum::<f64>() / observed.len() as f64)
                });
        }
    }

    let mut report = ImputationReport::default();
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        let mut values = Vec::with_capacity(n_vars);
        for j in 0..n_vars {
            let value = match row.values[j] {
                Some(v) => v,
                None => match country_means[&(row.country.as_str(), j)] {
                    Some(mean) => {
                        if year_gaps.contains(&(row.year, j)) {
                            report.year_gap_country_mean += 1;
                        } else {
                            report.country_mean += 1;
                        }
                        mean
                    }
                    None => {
                        report.global_mean += 1;
                        global[j]
                    }
                },
            };
            values.push(value);
        }
        out.push(FeatureRow {
            country: row.country.clone(),
            year: row.year,
            values,
        });
    }
    Ok((
        FeatureTable {
            variables: raw.variables.clone(),
            rows: out,
        },
        report,
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_years: BTreeSet<i32>,
    pub test_year: i32,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_years: [2016, 2017, 2018].into_iter().collect(),
            test_year: 2019,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if self.train_years.contains(&self.test_year) {
            return Err(Error::Parameter(format!(
                "test year {} is also a training year",
                self.test_year
            )));
        }
        if self.train_years.is_empty() {
            return Err(Error::Parameter("no training years".into()));
        }
        Ok(())
    }
}

pub fn split(ft: &FeatureTable, spec: &SplitSpec) -> Result<(FeatureTable, FeatureTable)> {
    spec.validate()?;
    let pick = |keep: &dyn Fn(i32) -> bool| FeatureTable {
        variables: ft.variables.clone(),
        rows: ft.rows.iter().filter(|r| keep(r.year)).cloned().collect(),
    };
    let train = pick(&|y| spec.train_years.contains(&y));
    let test = pick(&|y| y == spec.test_year);
    if train.rows.is_empty() {
        return Err(Error::Split("empty training partition".into()));
    }
    if test.rows.is_empty() {
        return Err(Error::Split("empty test partition".into()));
    }
    Ok((train, test))
}

impl RawTable {
    pub fn countries(&self) -> BTreeSet<&str> {
        self.rows.iter().map(|r| r.country.as_str()).collect()
    }

    pub fn missing_cells(&self) -> usize {
        self.rows
            .iter()
            .map(|r| r.values.iter().filter(|v| v.is_none()).count())
            .sum()
    }
}

impl From<&FeatureTable> for RawTable {
    fn from(ft: &FeatureTable) -> Self {
        RawTable {
            variables: ft.variables.clone(),
            rows: ft
                .rows
                .iter()
                .map(|r| RawRow {
                    country: r.country.clone(),
                    year: r.year,
                    values: r.values.iter().copied().map(Some).collect(),
                })
                .collect(),
        }
    }
}

impl FeatureTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn country_count(&self) -> usize {
        self.rows
            .iter()
            .map(|r| r.country.as_str())
            .collect::<BTreeSet<_>>()
            .len()
    }

    pub fn year_range(&self) -> Option<(i32, i32)> {
        let min = self.rows.iter().map(|r| r.year).min()?;
        let max = self.rows.iter().map(|r| r.year).max()?;
        Some((min, max))
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::Schema(format!("table has no column `{name}`")))
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let j = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| r.values[j]).collect())
    }

    /// Row-major design matrix over `names`.
    pub fn matrix(&self, names: &[String]) -> Result<Vec<Vec<f64>>> {
        let idx = names
            .iter()
            .map(|n| self.column_index(n))
            .collect::<Result<Vec<_>>>()?;
        Ok(self
            .rows
            .iter()
            .map(|r| idx.iter().map(|&j| r.values[j]).collect())
            .collect())
    }

    /// The twelve predictors (row-major) and the Life Ladder target.
    pub fn predictors_and_target(&self) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        Ok((
            self.matrix(&variables::predictor_names())?,
            self.column(variables::TARGET)?,
        ))
    }

    /// Writes the table as comma-separated text, six decimals, columns in
    /// table order. `provenance` lines are written first as `#` comments.
    pub fn write_csv<W: Write>(&self, writer: W, provenance: &[String]) -> Result<()> {
        let mut writer = writer;
        write_comments(&mut writer, provenance)?;
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["country".to_string(), "year".to_string()];
        header.extend(self.variables.iter().cloned());
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![row.country.clone(), row.year.to_string()];
            rec.extend(row.values.iter().map(|v| format!("{v:.6}")));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// Reads a table written by [`FeatureTable::write_csv`].
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let raw = read_raw(reader, &ColumnMap::default())?;
        let mut rows = Vec::with_capacity(raw.rows.len());
        for row in raw.rows {
            let values = row
                .values
                .iter()
                .zip(&raw.variables)
                .map(|(v, name)| {
                    v.ok_or_else(|| {
                        Error::Schema(format!(
                            "missing `{name}` for ({}, {}) in a complete table",
                            row.country, row.year
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(FeatureRow {
                country: row.country,
                year: row.year,
                values,
            });
        }
        Ok(FeatureTable {
            variables: raw.variables,
            rows,
        })
    }
}

pub(crate) fn write_comments<W: Write>(writer: &mut W, lines: &[String]) -> Result<()> {
    for line in lines {
        writeln!(writer, "# {line}").map_err(|e| Error::io("<output>", e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header() -> String {
        let mut h = vec!["country".to_string(), "year".to_string()];
        h.extend(variables::names());
        h.join(",")
    }

    fn row(country: &str, year: i32, fill: &str) -> String {
        let mut r = vec![country.to_string(), year.to_string()];
        r.extend(std::iter::repeat(fill.to_string()).take(13));
        r.join(",")
    }

    fn raw_with(var_values: &[(&str, i32, Option<f64>)]) -> RawTable {
        // one country-year per entry, the tested value in column 0, 1.0 elsewhere
        RawTable {
            variables: variables::names(),
            rows: var_values
                .iter()
                .map(|&(c, y, v)| {
                    let mut values = vec![Some(1.0); 13];
                    values[0] = v;
                    RawRow {
                        country: c.into(),
                        year: y,
                        values,
                    }
                })
                .collect(),
        }
    }

    #[test]
    fn header_only_file_loads_empty() {
        let t = read_raw(header().as_bytes(), &ColumnMap::default()).unwrap();
        assert!(t.rows.is_empty());
        assert_eq!(t.variables.len(), 13);
    }

    #[test]
    fn missing_life_ladder_is_schema_error() {
        let h = header().replace(",Life Ladder", "");
        let err = read_raw(h.as_bytes(), &ColumnMap::default()).unwrap_err();
        match err {
            Error::MissingColumn { column, .. } => assert_eq!(column, "Life Ladder"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_country_year_rejected() {
        let text = format!("{}\n{}\n{}\n", header(), row("Chad", 2017, "1"), row("Chad", 2017, "2"));
        let err = read_raw(text.as_bytes(), &ColumnMap::default()).unwrap_err();
        assert!(matches!(err, Error::DuplicateKey { year: 2017, .. }));
    }

    #[test]
    fn unparseable_and_sentinel_cells_are_missing() {
        let text = format!(
            "{}\n{}\n{}\n{}\n",
            header(),
            row("A", 2016, "NA"),
            row("B", 2016, ""),
            row("C", 2016, "abc")
        );
        let t = read_raw(text.as_bytes(), &ColumnMap::default()).unwrap();
        assert_eq!(t.missing_cells(), 39);
    }

    #[test]
    fn out_of_range_year_rejected() {
        let text = format!("{}\n{}\n", header(), row("A", 2004, "1"));
        assert!(matches!(
            read_raw(text.as_bytes(), &ColumnMap::default()),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn aliases_resolve_published_headers() {
        let mut h = vec!["Country name".to_string(), "year".to_string()];
        for v in variables::VARIABLES.iter() {
            h.push(v.headers.first().copied().unwrap_or(v.name).to_string());
        }
        h.push("Standard deviation of ladder by country-year".into());
        let quoted: Vec<String> = h.iter().map(|s| format!("\"{s}\"")).collect();
        let text = format!("{}\nA,2018,{}\n", quoted.join(","), vec!["0.5"; 14].join(","));
        let t = read_raw(text.as_bytes(), &ColumnMap::default()).unwrap();
        assert_eq!(t.rows[0].values, vec![Some(0.5); 13]);
    }

    #[test]
    fn config_alias_extends_defaults() {
        let mut aliases = BTreeMap::new();
        aliases.insert("Life Ladder".to_string(), vec!["Happiness".to_string()]);
        let map = ColumnMap::default().with_aliases(&aliases).unwrap();
        let h = header().replace("Life Ladder", "Happiness");
        assert!(read_raw(h.as_bytes(), &map).is_ok());
        aliases.insert("Bogus".into(), vec![]);
        assert!(ColumnMap::default().with_aliases(&aliases).is_err());
    }

    #[test]
    fn filter_drops_listed_countries_and_keeps_three_year_ones() {
        let mut entries = vec![("Burundi", 2019, Some(1.0))];
        for y in 2017..=2019 {
            entries.push(("Iceland", y, Some(1.0)));
        }
        for y in 2012..=2019 {
            entries.push(("Chad", y, Some(1.0)));
        }
        entries.push(("Tiny", 2018, Some(1.0)));
        entries.push(("Tiny", 2019, Some(1.0)));
        let out = filter_countries(&raw_with(&entries));
        assert!(out.rows.iter().all(|r| r.country != "Burundi" && r.country != "Tiny"));
        assert_eq!(out.rows.iter().filter(|r| r.country == "Iceland").count(), 3);
        assert_eq!(out.rows.iter().filter(|r| r.country == "Chad").count(), 4);
        assert!(out.rows.iter().all(|r| (2016..=2019).contains(&r.year)));
    }

    #[test]
    fn country_mean_fills_gap() {
        let t = raw_with(&[
            ("A", 2016, Some(4.0)),
            ("A", 2017, None),
            ("A", 2018, Some(5.0)),
            ("A", 2019, Some(6.0)),
            ("B", 2017, Some(9.0)),
        ]);
        let (ft, report) = impute_with_report(&t).unwrap();
        assert_eq!(ft.rows[1].values[0], 5.0);
        assert_eq!(report.country_mean, 1);
    }

    #[test]
    fn whole_year_gap_uses_earlier_years_of_the_country() {
        let mut entries = Vec::new();
        for (c, base) in [("A", 1.0), ("B", 2.0)] {
            for (k, y) in (2016..=2018).enumerate() {
                entries.push((c, y, Some(base + k as f64)));
            }
            entries.push((c, 2019, None));
        }
        let (ft, report) = impute_with_report(&raw_with(&entries)).unwrap();
        let a2019 = ft.rows.iter().find(|r| r.country == "A" && r.year == 2019).unwrap();
        let b2019 = ft.rows.iter().find(|r| r.country == "B" && r.year == 2019).unwrap();
        assert_eq!(a2019.values[0], 2.0);
        assert_eq!(b2019.values[0], 3.0);
        assert_eq!(report.year_gap_country_mean, 2);
    }

    #[test]
    fn unobserved_country_gets_global_mean() {
        // country C never observed: country mean impossible, global mean of
        // A and B's values (1,2,3 and 7,8,9) = 5.0
        let mut entries = Vec::new();
        for (k, y) in (2016..=2018).enumerate() {
            entries.push(("A", y, Some(1.0 + k as f64)));
            entries.push(("B", y, Some(7.0 + k as f64)));
            entries.push(("C", y, None));
        }
        let (ft, report) = impute_with_report(&raw_with(&entries)).unwrap();
        for r in ft.rows.iter().filter(|r| r.country == "C") {
            assert_eq!(r.values[0], 5.0);
        }
        assert_eq!(report.global_mean, 3);
        assert_eq!(report.country_mean, 0);
    }

    #[test]
    fn variable_missing_everywhere_is_error() {
        let t = raw_with(&[("A", 2016, None), ("B", 2016, None)]);
        assert!(matches!(impute(&t), Err(Error::ImputationImpossible(_))));
    }

    fn complete(countries: &[(&str, &[i32])]) -> FeatureTable {
        let mut rows = Vec::new();
        for (c, years) in countries {
            for &y in *years {
                rows.push(FeatureRow {
                    country: c.to_string(),
                    year: y,
                    values: vec![y as f64; 13],
                });
            }
        }
        FeatureTable {
            variables: variables::names(),
            rows,
        }
    }

    #[test]
    fn split_single_country() {
        let ft = complete(&[("A", &[2016, 2017, 2018, 2019])]);
        let (train, test) = split(&ft, &SplitSpec::default()).unwrap();
        assert_eq!(train.len(), 3);
        assert_eq!(test.len(), 1);
    }

    #[test]
    fn split_needs_both_partitions() {
        let ft = complete(&[("A", &[2019]), ("B", &[2019])]);
        assert!(matches!(split(&ft, &SplitSpec::default()), Err(Error::Split(_))));
        let ft = complete(&[("A", &[2016, 2017])]);
        assert!(matches!(split(&ft, &SplitSpec::default()), Err(Error::Split(_))));
    }

    #[test]
    fn overlapping_split_spec_rejected() {
        let spec = SplitSpec {
            train_years: [2018, 2019].into_iter().collect(),
            test_year: 2019,
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn csv_round_trip_at_six_decimals() {
        let mut ft = complete(&[("Congo (Brazzaville)", &[2016, 2017])]);
        ft.rows[0].values[3] = 0.123_456_7;
        let mut buf = Vec::new();
        ft.write_csv(&mut buf, &["config_hash=abc".into()]).unwrap();
        let back = FeatureTable::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.rows.len(), 2);
        assert_eq!(back.rows[0].values[3], 0.123457);
        assert_eq!(back.rows[0].country, "Congo (Brazzaville)");
    }
}
