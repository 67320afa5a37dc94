//! CSV ingestion with line-numbered errors.

use std::path::Path;

use super::config::RunConfig;
use crate::error::{PtmError, Result};
use crate::model::{ModelData, Response};
use crate::predictor::Covariates;

/// A CSV file held as strings, with the file line of every record.
#[derive(Debug, Clone)]
pub struct Table {
    pub headers: Vec<String>,
    rows: Vec<Vec<String>>,
    lines: Vec<u64>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| PtmError::data(None, format!("{}: {e}", path.display())))?;
        Self::from_reader(file)
    }

    pub fn from_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if headers.iter().all(String::is_empty) {
            return Err(PtmError::data(Some(1), "missing header row"));
        }
        let (mut rows, mut lines) = (Vec::new(), Vec::new());
        for rec in rdr.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map(|p| p.line());
                PtmError::data(line, e.to_string())
            })?;
            lines.push(rec.position().map_or(0, |p| p.line()));
            rows.push(rec.iter().map(str::to_string).collect());
        }
        Ok(Self {
            headers,
            rows,
            lines,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn has(&self, name: &str) -> bool {
        self.headers.iter().any(|h| h == name)
    }

    fn index(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| PtmError::data(Some(1), format!("no column named '{name}'")))
    }

    /// Values of a column; empty cells become `missing` if given, else an
    /// error. NaN is never accepted.
    fn parse(&self, name: &str, missing: Option<f64>) -> Result<Vec<f64>> {
        let c = self.index(name)?;
        self.rows
            .iter()
            .zip(&self.lines)
            .map(|(row, &line)| {
                let cell = row[c].as_str();
                if cell.is_empty() {
                    return missing.ok_or_else(|| {
                        PtmError::data(Some(line), format!("empty value in column '{name}'"))
                    });
                }
                match cell.parse::<f64>() {
                    Ok(v) if !v.is_nan() => Ok(v),
                    _ => Err(PtmError::data(
                        Some(line),
                        format!("cannot parse '{cell}' in column '{name}' as a number"),
                    )),
                }
            })
            .collect()
    }

    /// Finite numeric column.
    pub fn numeric(&self, name: &str) -> Result<Vec<f64>> {
        let v = self.parse(name, None)?;
        if let Some(k) = v.iter().position(|x| !x.is_finite()) {
            return Err(PtmError::data(
                Some(self.lines[k]),
                format!("non-finite value in column '{name}'"),
            ));
        }
        Ok(v)
    }

    pub fn labels(&self, name: &str) -> Result<Vec<String>> {
        let c = self.index(name)?;
        Ok(self.rows.iter().map(|r| r[c].clone()).collect())
    }

    /// Covariate frame with the given columns; `true` marks numeric ones.
    pub fn covariates(&self, columns: &[(String, bool)]) -> Result<Covariates> {
        let mut cov = Covariates::new(self.n_rows());
        for (name, numeric) in columns {
            if *numeric {
                cov = cov.with_numeric(name.clone(), self.numeric(name)?)?;
            } else {
                cov = cov.with_labels(name.clone(), self.labels(name)?)?;
            }
        }
        Ok(cov)
    }

    fn censored(&self, lower: &str, upper: &str) -> Result<Vec<Response>> {
        let lo = self.parse(lower, Some(f64::NEG_INFINITY))?;
        let hi = self.parse(upper, Some(f64::INFINITY))?;
        lo.iter()
            .zip(&hi)
            .zip(&self.lines)
            .map(|((&l, &u), &line)| {
                let resp = match (l.is_finite(), u.is_finite()) {
                    (true, true) if l == u => Response::Exact { y: l },
                    (true, true) if l < u => Response::Interval { lower: l, upper: u },
                    (false, true) if l < 0.0 => Response::Left { upper: u },
                    (true, false) if u > 0.0 => Response::Right { lower: l },
                    _ => {
                        return Err(PtmError::data(
                            Some(line),
                            format!("invalid censoring bounds ({l}, {u})"),
                        ))
                    }
                };
                Ok(resp)
            })
            .collect()
    }
}

/// Training data described by a run configuration.
pub fn load_model_data(cfg: &RunConfig) -> Result<ModelData> {
    let table = Table::read(&cfg.data.path)?;
    let missing = |field: &str, col: &str| {
        PtmError::config(
            field,
            format!("column '{col}' not found in {}", cfg.data.path.display()),
        )
    };
    let response = match (&cfg.data.response, &cfg.data.censoring) {
        (Some(y), _) => {
            if !table.has(y) {
                return Err(missing("data.response", y));
            }
            table
                .numeric(y)?
                .into_iter()
                .map(|y| Response::Exact { y })
                .collect()
        }
        (None, Some(c)) => {
            for (field, col) in [
                ("data.censoring.lower", &c.lower),
                ("data.censoring.upper", &c.upper),
            ] {
                if !table.has(col) {
                    return Err(missing(field, col));
                }
            }
            table.censored(&c.lower, &c.upper)?
        }
        (None, None) => return Err(PtmError::config("data.response", "no response given")),
    };
    let columns = cfg.covariate_names();
    for (name, _) in &columns {
        if !table.has(name) {
            return Err(missing("data", name));
        }
    }
    Ok(ModelData {
        response,
        covariates: table.covariates(&columns)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_numbers_in_errors() {
        let t = Table::from_reader("y,x\n1,2\n3,oops\n".as_bytes()).unwrap();
        assert_eq!(t.numeric("y").unwrap(), vec![1.0, 3.0]);
        match t.numeric("x") {
            Err(PtmError::Data { line, .. }) => assert_eq!(line, Some(3)),
            other => panic!("{other:?}"),
        }
        let t = Table::from_reader("y\n1\nNaN\n".as_bytes()).unwrap();
        assert!(matches!(
            t.numeric("y"),
            Err(PtmError::Data { line: Some(3), .. })
        ));
        let t = Table::from_reader("y\n1\n\n2\n".as_bytes()).unwrap();
        assert_eq!(t.n_rows(), 2);
    }

    #[test]
    fn censoring_kinds() {
        let t = Table::from_reader("lo,hi\n1,1\n,2\n3,\n0,0.5\n-inf,1\n".as_bytes()).unwrap();
        let r = t.censored("lo", "hi").unwrap();
        assert_eq!(
            r,
            vec![
                Response::Exact { y: 1.0 },
                Response::Left { upper: 2.0 },
                Response::Right { lower: 3.0 },
                Response::Interval {
                    lower: 0.0,
                    upper: 0.5
                },
                Response::Left { upper: 1.0 },
            ]
        );
        let t = Table::from_reader("lo,hi\n2,1\n".as_bytes()).unwrap();
        assert!(matches!(
            t.censored("lo", "hi"),
            Err(PtmError::Data { line: Some(2), .. })
        ));
        let t = Table::from_reader("lo,hi\n,\n".as_bytes()).unwrap();
        assert!(t.censored("lo", "hi").is_err());
    }
}
