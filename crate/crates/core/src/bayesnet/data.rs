use crate::error::{Error, Result};

/// Column-major ternary data: `columns[v][row]` is a level index in 0..3.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoricalData {
    variables: Vec<String>,
    columns: Vec<Vec<u8>>,
    rows: usize,
}

impl CategoricalData {
    pub fn from_columns(variables: Vec<String>, columns: Vec<Vec<u8>>) -> Result<Self> {
        if variables.len() != columns.len() {
            return Err(Error::Schema(format!(
                "{} variable names for {} columns",
                variables.len(),
                columns.len()
            )));
        }
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::Schema("columns differ in length".into()));
        }
        if columns.iter().flatten().any(|&v| v > 2) {
            return Err(Error::Schema("level index out of range 0..3".into()));
        }
        Ok(CategoricalData {
            variables,
            columns,
            rows,
        })
    }

    pub fn from_rows(variables: Vec<String>, rows: &[Vec<u8>]) -> Result<Self> {
        let columns = (0..variables.len())
            .map(|j| {
                rows.iter()
                    .map(|r| {
                        r.get(j)
                            .copied()
                            .ok_or_else(|| Error::Schema("row shorter than variable list".into()))
                    })
                    .collect::<Result<Vec<u8>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_columns(variables, columns)
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn column(&self, v: usize) -> &[u8] {
        &self.columns[v]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    /// A new dataset made of the given rows (repeats allowed).
    pub fn resample(&self, rows: &[usize]) -> Self {
        CategoricalData {
            variables: self.variables.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| rows.iter().map(|&r| c[r]).collect())
                .collect(),
            rows: rows.len(),
        }
    }

    /// Same data with variables reordered: new variable `i` is old `perm[i]`.
    pub fn permute_variables(&self, perm: &[usize]) -> Self {
        CategoricalData {
            variables: perm.iter().map(|&p| self.variables[p].clone()).collect(),
            columns: perm.iter().map(|&p| self.columns[p].clone()).collect(),
            rows: self.rows,
        }
    }
}
