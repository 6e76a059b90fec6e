//! Column-typed tabular data, CSV ingestion and quantile grids.
//!
//! A [`DataTable`] stores every cell as an `f64`: numeric columns hold the
//! value itself, categorical columns hold the index of the level in the
//! column's level list. That keeps the model input a single dense
//! row-major matrix regardless of column roles.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnRole {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub role: ColumnRole,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<String>,
}

impl ColumnSpec {
    pub fn numeric(name: impl Into<String>) -> Self {
        ColumnSpec {
            name: name.into(),
            role: ColumnRole::Numeric,
            levels: Vec::new(),
        }
    }

    pub fn categorical<S: Into<String>>(
        name: impl Into<String>,
        levels: impl IntoIterator<Item = S>,
    ) -> Self {
        ColumnSpec {
            name: name.into(),
            role: ColumnRole::Categorical,
            levels: levels.into_iter().map(Into::into).collect(),
        }
    }

    pub fn is_numeric(&self) -> bool {
        self.role == ColumnRole::Numeric
    }

    pub fn level_index(&self, level: &str) -> Option<usize> {
        self.levels.iter().position(|l| l == level)
    }

    /// Renders a stored cell value the way it appears in a CSV file.
    pub fn format_value(&self, value: f64) -> String {
        match self.role {
            ColumnRole::Numeric => format_f64(value),
            ColumnRole::Categorical => self
                .levels
                .get(value as usize)
                .cloned()
                .unwrap_or_else(|| format_f64(value)),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::Schema("column name must not be empty".into()));
        }
        match self.role {
            ColumnRole::Numeric if !self.levels.is_empty() => Err(Error::Schema(format!(
                "numeric column `{}` must not declare levels",
                self.name
            ))),
            ColumnRole::Categorical if self.levels.is_empty() => Err(Error::Schema(format!(
                "categorical column `{}` has no levels",
                self.name
            ))),
            ColumnRole::Categorical => {
                let mut seen = std::collections::HashSet::new();
                for level in &self.levels {
                    if !seen.insert(level.as_str()) {
                        return Err(Error::Schema(format!(
                            "categorical column `{}` repeats level `{level}`",
                            self.name
                        )));
                    }
                }
                Ok(())
            }
            ColumnRole::Numeric => Ok(()),
        }
    }
}

/// Shortest representation that parses back to the identical `f64`.
pub fn format_f64(value: f64) -> String {
    let magnitude = value.abs();
    if value == 0.0 || (1e-5..1e16).contains(&magnitude) {
        format!("{value}")
    } else {
        format!("{value:e}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Schema {
    columns: Vec<ColumnSpec>,
}

impl Schema {
    pub fn new(columns: Vec<ColumnSpec>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for column in &columns {
            column.validate()?;
            if !seen.insert(column.name.as_str()) {
                return Err(Error::Schema(format!(
                    "duplicate column name `{}`",
                    column.name
                )));
            }
        }
        Ok(Schema { columns })
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn columns(&self) -> &[ColumnSpec] {
        &self.columns
    }

    pub fn column(&self, index: usize) -> &ColumnSpec {
        &self.columns[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }

    /// Resolves column names to positions, failing on the first unknown name.
    pub fn resolve<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|name| {
                let name = name.as_ref();
                self.index_of(name)
                    .ok_or_else(|| Error::Schema(format!("unknown column `{name}`")))
            })
            .collect()
    }
}

/// Ordered, duplicate-free column positions playing the role of `x_s`.
/// The remaining columns of the schema form the complement `x_c`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureSubset(Vec<usize>);

impl FeatureSubset {
    pub fn new(indices: Vec<usize>, ncols: usize) -> Result<Self> {
        let mut seen = vec![false; ncols];
        for &j in &indices {
            if j >= ncols {
                return Err(Error::Arg(format!(
                    "column index {j} out of range for {ncols} columns"
                )));
            }
            if std::mem::replace(&mut seen[j], true) {
                return Err(Error::Arg(format!("column index {j} repeated in subset")));
            }
        }
        Ok(FeatureSubset(indices))
    }

    pub fn empty() -> Self {
        FeatureSubset(Vec::new())
    }

    pub fn single(index: usize) -> Self {
        FeatureSubset(vec![index])
    }

    pub fn full(ncols: usize) -> Self {
        FeatureSubset((0..ncols).collect())
    }

    pub fn by_names<S: AsRef<str>>(schema: &Schema, names: &[S]) -> Result<Self> {
        FeatureSubset::new(schema.resolve(names)?, schema.len())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.contains(&index)
    }

    /// Columns not in the subset, in schema order.
    pub fn complement(&self, ncols: usize) -> Vec<usize> {
        (0..ncols).filter(|j| !self.contains(*j)).collect()
    }

    pub fn is_full(&self, ncols: usize) -> bool {
        self.0.len() == ncols
    }

    pub fn with(&self, index: usize) -> FeatureSubset {
        let mut indices = self.0.clone();
        if !indices.contains(&index) {
            indices.push(index);
        }
        FeatureSubset(indices)
    }

    pub fn names<'a>(&self, schema: &'a Schema) -> Vec<&'a str> {
        self.0
            .iter()
            .map(|&j| schema.column(j).name.as_str())
            .collect()
    }

    /// Display label such as `lstat+rm`; the empty subset renders as `∅`.
    pub fn label(&self, schema: &Schema) -> String {
        if self.0.is_empty() {
            "∅".to_string()
        } else {
            self.names(schema).join("+")
        }
    }
}

/// Dense row-major matrix of model inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(nrows: usize, ncols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != nrows * ncols {
            return Err(Error::Arg(format!(
                "matrix of {nrows}x{ncols} needs {} values, got {}",
                nrows * ncols,
                data.len()
            )));
        }
        Ok(Matrix { nrows, ncols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(ncols: usize, rows: &[R]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * ncols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != ncols {
                return Err(Error::Arg(format!(
                    "row {i} has {} values, expected {ncols}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix {
            nrows: rows.len(),
            ncols,
            data,
        })
    }

    pub fn with_capacity(ncols: usize, rows: usize) -> Self {
        Matrix {
            nrows: 0,
            ncols,
            data: Vec::with_capacity(rows * ncols),
        }
    }

    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.ncols, "row width mismatch");
        self.data.extend_from_slice(row);
        self.nrows += 1;
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        (0..self.nrows).map(move |i| self.row(i))
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.ncols + col]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut out = Matrix::with_capacity(self.ncols, indices.len());
        for &i in indices {
            out.push_row(self.row(i));
        }
        out
    }
}

/// An immutable, schema-checked sample `{x_i}` of `n ≥ 1` complete rows.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    schema: Schema,
    values: Matrix,
}

impl DataTable {
    pub fn new(schema: Schema, values: Matrix) -> Result<Self> {
        if values.ncols() != schema.len() {
            return Err(Error::Schema(format!(
                "table has {} columns but schema declares {}",
                values.ncols(),
                schema.len()
            )));
        }
        if values.nrows() == 0 {
            return Err(Error::Schema("table must contain at least one row".into()));
        }
        check_conformance(&schema, &values)?;
        Ok(DataTable { schema, values })
    }

    /// Builds an all-numeric table from named columns.
    pub fn from_columns<S: Into<String>>(columns: Vec<(S, Vec<f64>)>) -> Result<Self> {
        let n = columns.first().map_or(0, |(_, v)| v.len());
        let p = columns.len();
        let mut specs = Vec::with_capacity(p);
        let mut data = vec![0.0; n * p];
        for (j, (name, values)) in columns.into_iter().enumerate() {
            let spec = ColumnSpec::numeric(name);
            if values.len() != n {
                return Err(Error::Schema(format!(
                    "column `{}` has {} values, expected {n}",
                    spec.name,
                    values.len()
                )));
            }
            for (i, v) in values.into_iter().enumerate() {
                data[i * p + j] = v;
            }
            specs.push(spec);
        }
        DataTable::new(Schema::new(specs)?, Matrix::new(n, p, data)?)
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn matrix(&self) -> &Matrix {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.schema.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.values.row(i)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.rows().map(|r| r[j]).collect()
    }

    pub fn column_by_name(&self, name: &str) -> Result<Vec<f64>> {
        let j = self
            .schema
            .index_of(name)
            .ok_or_else(|| Error::Schema(format!("unknown column `{name}`")))?;
        Ok(self.column(j))
    }

    /// Keeps the given rows, in the given order.
    pub fn take_rows(&self, indices: &[usize]) -> Result<DataTable> {
        DataTable::new(self.schema.clone(), self.values.select_rows(indices))
    }

    /// Drops one column by name.
    pub fn without(&self, name: &str) -> Result<DataTable> {
        let keep: Vec<&str> = self.schema.names().filter(|n| *n != name).collect();
        if keep.len() == self.ncols() {
            return Err(Error::Schema(format!("unknown column `{name}`")));
        }
        let indices = self.schema.resolve(&keep)?;
        self.project(&indices)
    }

    /// Keeps the columns at `indices`, in that order.
    pub fn project(&self, indices: &[usize]) -> Result<DataTable> {
        let columns = indices
            .iter()
            .map(|&j| self.schema.column(j).clone())
            .collect();
        let mut values = Matrix::with_capacity(indices.len(), self.n());
        let mut buf = vec![0.0; indices.len()];
        for row in self.values.rows() {
            for (slot, &j) in buf.iter_mut().zip(indices) {
                *slot = row[j];
            }
            values.push_row(&buf);
        }
        DataTable::new(Schema::new(columns)?, values)
    }

    /// Re-expresses this table in `target`'s column order and level coding.
    ///
    /// Columns are matched by name. Categorical cells are recoded by level
    /// label, so a table whose levels appeared in a different order still
    /// lines up with the schema a model was trained on.
    pub fn conform_to(&self, target: &Schema) -> Result<DataTable> {
        let mut plans = Vec::with_capacity(target.len());
        for spec in target.columns() {
            let j = self
                .schema
                .index_of(&spec.name)
                .ok_or_else(|| Error::Schema(format!("data has no column `{}`", spec.name)))?;
            let have = self.schema.column(j);
            if have.role != spec.role {
                return Err(Error::Schema(format!(
                    "column `{}` is {:?} in the data but {:?} in the model",
                    spec.name, have.role, spec.role
                )));
            }
            let recode = match spec.role {
                ColumnRole::Numeric => None,
                ColumnRole::Categorical => Some(
                    have.levels
                        .iter()
                        .map(|l| {
                            spec.level_index(l).map(|k| k as f64).ok_or_else(|| {
                                Error::Schema(format!(
                                    "column `{}` has level `{l}` unknown to the model",
                                    spec.name
                                ))
                            })
                        })
                        .collect::<Result<Vec<f64>>>()?,
                ),
            };
            plans.push((j, recode));
        }
        let mut values = Matrix::with_capacity(target.len(), self.n());
        let mut buf = vec![0.0; target.len()];
        for row in self.values.rows() {
            for (slot, (j, recode)) in buf.iter_mut().zip(&plans) {
                *slot = match recode {
                    None => row[*j],
                    Some(map) => map[row[*j] as usize],
                };
            }
            values.push_row(&buf);
        }
        DataTable::new(target.clone(), values)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(self.schema.names()).map_err(csv_io)?;
        let mut record = Vec::with_capacity(self.ncols());
        for row in self.values.rows() {
            record.clear();
            record.extend(
                row.iter()
                    .zip(self.schema.columns())
                    .map(|(&v, spec)| spec.format_value(v)),
            );
            out.write_record(&record).map_err(csv_io)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(File::create(path)?)
    }
}

fn check_conformance(schema: &Schema, values: &Matrix) -> Result<()> {
    for (i, row) in values.rows().enumerate() {
        for (v, spec) in row.iter().zip(schema.columns()) {
            let ok = match spec.role {
                ColumnRole::Numeric => v.is_finite(),
                ColumnRole::Categorical => {
                    v.fract() == 0.0 && *v >= 0.0 && (*v as usize) < spec.levels.len()
                }
            };
            if !ok {
                return Err(Error::Schema(format!(
                    "row {i}: value {v} does not conform to column `{}`",
                    spec.name
                )));
            }
        }
    }
    Ok(())
}

fn csv_io(err: csv::Error) -> Error {
    match err.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

#[derive(Debug, Clone, Default)]
pub struct CsvOptions {
    /// Per-column role overrides, keyed by header name.
    pub roles: HashMap<String, ColumnRole>,
    /// Drop rows with empty fields instead of failing.
    pub drop_incomplete: bool,
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub table: DataTable,
    pub dropped_rows: usize,
}

pub fn load_csv(path: impl AsRef<Path>, options: &CsvOptions) -> Result<Ingested> {
    let path = path.as_ref();
    let file = File::open(path)
        .map_err(|e| Error::ingest(None, format!("cannot open {}: {e}", path.display())))?;
    read_csv(file, options)
}

/// Parses a CSV document with a header row.
///
/// Lines starting with `#` are comments. A column is numeric when every
/// field parses as a finite decimal number, otherwise categorical with
/// levels in order of first appearance.
pub fn read_csv<R: Read>(reader: R, options: &CsvOptions) -> Result<Ingested> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(reader);

    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::ingest(Some(1), e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::ingest(None, "empty file"));
    }
    for name in options.roles.keys() {
        if !header.contains(name) {
            return Err(Error::ingest(
                Some(1),
                format!("role override names unknown column `{name}`"),
            ));
        }
    }

    let width = header.len();
    let mut cells: Vec<Vec<String>> = Vec::new();
    let mut dropped_rows = 0;
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line());
            Error::ingest(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line());
        if record.len() != width {
            return Err(Error::ingest(
                line,
                format!("expected {width} fields, found {}", record.len()),
            ));
        }
        let fields: Vec<String> = record.iter().map(|f| f.trim().to_string()).collect();
        if let Some(j) = fields.iter().position(String::is_empty) {
            if options.drop_incomplete {
                dropped_rows += 1;
                continue;
            }
            return Err(Error::ingest(
                line,
                format!("missing value in column `{}`", header[j]),
            ));
        }
        cells.push(fields);
    }
    if cells.is_empty() {
        return Err(Error::ingest(None, "no data rows"));
    }

    let n = cells.len();
    let mut specs = Vec::with_capacity(width);
    let mut data = vec![0.0; n * width];
    for (j, name) in header.iter().enumerate() {
        let parsed: Option<Vec<f64>> = cells.iter().map(|row| parse_number(&row[j])).collect();
        let role = options
            .roles
            .get(name)
            .copied()
            .unwrap_or(if parsed.is_some() {
                ColumnRole::Numeric
            } else {
                ColumnRole::Categorical
            });
        match role {
            ColumnRole::Numeric => {
                let values = parsed.ok_or_else(|| {
                    Error::ingest(None, format!("column `{name}` is not numeric"))
                })?;
                for (i, v) in values.into_iter().enumerate() {
                    data[i * width + j] = v;
                }
                specs.push(ColumnSpec::numeric(name.clone()));
            }
            ColumnRole::Categorical => {
                let mut levels: Vec<String> = Vec::new();
                let mut index: HashMap<&str, usize> = HashMap::new();
                for (i, row) in cells.iter().enumerate() {
                    let field = row[j].as_str();
                    let k = *index.entry(field).or_insert_with(|| {
                        levels.push(field.to_string());
                        levels.len() - 1
                    });
                    data[i * width + j] = k as f64;
                }
                specs.push(ColumnSpec::categorical(name.clone(), levels));
            }
        }
    }
    let schema = Schema::new(specs).map_err(|e| Error::ingest(Some(1), e.to_string()))?;
    let table = DataTable::new(schema, Matrix::new(n, width, data)?)?;
    Ok(Ingested {
        table,
        dropped_rows,
    })
}

fn parse_number(field: &str) -> Option<f64> {
    // `f64::from_str` also accepts "inf"/"nan"; those are not decimal numbers.
    let starts_ok = field
        .trim_start_matches(['+', '-'])
        .starts_with(|c: char| c.is_ascii_digit() || c == '.');
    if !starts_ok {
        return None;
    }
    field.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Evaluation grid for a numeric column: the sorted distinct values when
/// there are at most `g` of them, otherwise `g` type-7 (linear
/// interpolation) empirical quantiles at probabilities `k/(g-1)`.
pub fn quantile_grid(table: &DataTable, column: usize, g: usize) -> Result<Vec<f64>> {
    let spec = table.schema().column(column);
    if !spec.is_numeric() {
        return Err(Error::Type(format!(
            "quantile grid needs a numeric column, `{}` is categorical",
            spec.name
        )));
    }
    quantile_grid_of(&table.column(column), g)
}

pub fn quantile_grid_of(values: &[f64], g: usize) -> Result<Vec<f64>> {
    if g < 2 {
        return Err(Error::Arg(format!("grid size must be at least 2, got {g}")));
    }
    if values.is_empty() {
        return Err(Error::Arg("cannot grid an empty column".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut distinct = sorted.clone();
    distinct.dedup();
    if distinct.len() <= g {
        return Ok(distinct);
    }
    let last = (sorted.len() - 1) as f64;
    let mut grid: Vec<f64> = (0..g)
        .map(|k| {
            let h = last * k as f64 / (g - 1) as f64;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            let frac = h - lo as f64;
            if frac == 0.0 {
                sorted[lo]
            } else {
                sorted[lo] + frac * (sorted[hi] - sorted[lo])
            }
        })
        .collect();
    grid.dedup();
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnSummary {
    pub name: String,
    pub role: ColumnRole,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Population standard deviation (divisor n).
    pub sd: f64,
    pub distinct: usize,
}

pub fn summarize(table: &DataTable) -> Vec<ColumnSummary> {
    table
        .schema()
        .columns()
        .iter()
        .enumerate()
        .map(|(j, spec)| {
            let values = table.column(j);
            let mean = crate::sum::mean(&values);
            let var = crate::sum::mean(
                &values
                    .iter()
                    .map(|v| (v - mean) * (v - mean))
                    .collect::<Vec<_>>(),
            );
            let mut sorted = values.clone();
            sorted.sort_by(f64::total_cmp);
            sorted.dedup();
            ColumnSummary {
                name: spec.name.clone(),
                role: spec.role,
                min: sorted[0],
                max: sorted[sorted.len() - 1],
                mean,
                sd: var.sqrt(),
                distinct: sorted.len(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str) -> Result<Ingested> {
        read_csv(text.as_bytes(), &CsvOptions::default())
    }

    #[test]
    fn numeric_columns_inferred() {
        let t = read("x1,x2\n0,0\n1,1\n2,4\n").unwrap().table;
        assert_eq!(t.n(), 3);
        assert!(t.schema().columns().iter().all(ColumnSpec::is_numeric));
        assert_eq!(t.column(1), vec![0.0, 1.0, 4.0]);
    }

    #[test]
    fn categorical_levels_by_first_appearance() {
        let t = read("c,y\nb,1\na,2\nb,3\n").unwrap().table;
        let spec = t.schema().column(0);
        assert_eq!(spec.role, ColumnRole::Categorical);
        assert_eq!(spec.levels, vec!["b", "a"]);
        assert_eq!(t.column(0), vec![0.0, 1.0, 0.0]);

        let t = read("c\na\nb\na\n").unwrap().table;
        assert_eq!(t.schema().column(0).levels, vec!["a", "b"]);
    }

    #[test]
    fn scientific_notation_and_quotes() {
        let t = read("x,\"label, quoted\"\n1e3,\"a,b\"\n-2.5E-1,c\n")
            .unwrap()
            .table;
        assert_eq!(t.column(0), vec![1000.0, -0.25]);
        assert_eq!(t.schema().column(1).name, "label, quoted");
        assert_eq!(t.schema().column(1).levels, vec!["a,b", "c"]);
    }

    #[test]
    fn non_finite_tokens_are_categorical() {
        let t = read("x\n1\nnan\n").unwrap().table;
        assert_eq!(t.schema().column(0).role, ColumnRole::Categorical);
    }

    #[test]
    fn missing_value_rejected_with_line() {
        let err = read("x,y\n1,2\n3,\n").unwrap_err();
        match err {
            Error::Ingest { line, message } => {
                assert_eq!(line, Some(3));
                assert!(message.contains("`y`"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn drop_incomplete_counts_rows() {
        let opts = CsvOptions {
            drop_incomplete: true,
            ..Default::default()
        };
        let ing = read_csv("x,y\n1,2\n3,\n5,6\n".as_bytes(), &opts).unwrap();
        assert_eq!(ing.dropped_rows, 1);
        assert_eq!(ing.table.column(0), vec![1.0, 5.0]);
    }

    #[test]
    fn ragged_row_reports_line() {
        let err = read("x,y\n1,2\n3\n").unwrap_err();
        assert!(matches!(err, Error::Ingest { line: Some(3), .. }), "{err}");
    }

    #[test]
    fn empty_inputs_rejected() {
        assert!(matches!(read(""), Err(Error::Ingest { .. })));
        assert!(matches!(read("x,y\n"), Err(Error::Ingest { .. })));
    }

    #[test]
    fn duplicate_header_rejected() {
        assert!(matches!(read("x,x\n1,2\n"), Err(Error::Ingest { .. })));
    }

    #[test]
    fn role_override_forces_categorical() {
        let mut opts = CsvOptions::default();
        opts.roles.insert("code".into(), ColumnRole::Categorical);
        let t = read_csv("code,y\n10,1\n20,2\n10,3\n".as_bytes(), &opts)
            .unwrap()
            .table;
        assert_eq!(t.schema().column(0).levels, vec!["10", "20"]);

        let mut opts = CsvOptions::default();
        opts.roles.insert("c".into(), ColumnRole::Numeric);
        assert!(read_csv("c\na\n".as_bytes(), &opts).is_err());
    }

    #[test]
    fn comment_lines_skipped() {
        let t = read("# seed=7\nx\n1\n# trailing\n2\n").unwrap().table;
        assert_eq!(t.column(0), vec![1.0, 2.0]);
    }

    #[test]
    fn grid_small_column_returns_distinct() {
        assert_eq!(
            quantile_grid_of(&[2.0, 0.0, 1.0, 1.0], 50).unwrap(),
            vec![0.0, 1.0, 2.0]
        );
        assert_eq!(quantile_grid_of(&[7.0, 7.0, 7.0], 10).unwrap(), vec![7.0]);
    }

    #[test]
    fn grid_interpolates_order_statistics() {
        // Oracle: type-7 quantile h = (n-1)p on the sorted values 1..=100.
        let values: Vec<f64> = (1..=100).rev().map(f64::from).collect();
        let oracle = |p: f64| {
            let h = 99.0 * p;
            let lo = h.floor();
            (lo + 1.0) + (h - lo)
        };
        let expected: Vec<f64> = [0.0, 0.25, 0.5, 0.75, 1.0]
            .iter()
            .map(|&p| oracle(p))
            .collect();
        assert_eq!(expected, vec![1.0, 25.75, 50.5, 75.25, 100.0]);
        assert_eq!(quantile_grid_of(&values, 5).unwrap(), expected);
    }

    #[test]
    fn grid_rejects_categorical_and_tiny_g() {
        let t = read("c\na\nb\n").unwrap().table;
        assert!(matches!(quantile_grid(&t, 0, 5), Err(Error::Type(_))));
        assert!(matches!(quantile_grid_of(&[1.0], 1), Err(Error::Arg(_))));
    }

    #[test]
    fn conform_recodes_levels_by_label() {
        let train = read("c,x\na,1\nb,2\n").unwrap().table;
        let other = read("x,c\n5,b\n6,a\n7,b\n").unwrap().table;
        let conformed = other.conform_to(train.schema()).unwrap();
        assert_eq!(conformed.schema(), train.schema());
        assert_eq!(conformed.column(0), vec![1.0, 0.0, 1.0]);
        assert_eq!(conformed.column(1), vec![5.0, 6.0, 7.0]);

        let unknown = read("c,x\nz,1\n").unwrap().table;
        assert!(matches!(
            unknown.conform_to(train.schema()),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn without_drops_named_column() {
        let t = read("x1,y,x2\n1,2,3\n").unwrap().table;
        let f = t.without("y").unwrap();
        assert_eq!(f.schema().names().collect::<Vec<_>>(), vec!["x1", "x2"]);
        assert_eq!(f.row(0), &[1.0, 3.0]);
        assert!(t.without("nope").is_err());
    }

    #[test]
    fn schema_validation() {
        assert!(Schema::new(vec![ColumnSpec::numeric("")]).is_err());
        assert!(Schema::new(vec![ColumnSpec::categorical("c", Vec::<String>::new())]).is_err());
        assert!(Schema::new(vec![ColumnSpec::categorical("c", ["a", "a"])]).is_err());
    }

    #[test]
    fn summary_uses_population_sd() {
        let t = DataTable::from_columns(vec![("x", vec![-1.0, 1.0])]).unwrap();
        let s = &summarize(&t)[0];
        assert_eq!(
            (s.min, s.max, s.mean, s.sd, s.distinct),
            (-1.0, 1.0, 0.0, 1.0, 2)
        );
    }
}
