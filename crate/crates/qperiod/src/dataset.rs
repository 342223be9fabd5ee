//! JSON-lines datasets: one variety with its regression features per line.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use qperiod_core::varieties::{WeightMatrix, WeightVector};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub const PREFIX_LEN: usize = 100;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Variety {
    Wps(WeightVector),
    Rank2(WeightMatrix),
}

impl Variety {
    pub fn kind(&self) -> &'static str {
        match self {
            Variety::Wps(_) => "wps",
            Variety::Rank2(_) => "rank2",
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Variety::Wps(w) => w.dimension(),
            Variety::Rank2(w) => w.dimension(),
        }
    }

    /// Comma-separated weights, or the two rows separated by `;`.
    pub fn parse(s: &str) -> Result<Variety> {
        let row = |r: &str| -> Result<Vec<i64>> {
            r.split(',')
                .map(|t| t.trim().parse::<i64>().map_err(|e| Error::Invalid(format!("bad integer `{t}`: {e}"))))
                .collect()
        };
        let rows: Vec<&str> = s.split(';').collect();
        match rows.as_slice() {
            [w] => Ok(Variety::Wps(WeightVector::validate_wps(&row(w)?)?)),
            [t, b] => Ok(Variety::Rank2(WeightMatrix::validate_rank2(&row(t)?, &row(b)?)?)),
            _ => Err(Error::Invalid("expected `a1,..,aN` or `a1,..,aN;b1,..,bN`".into())),
        }
    }

    fn write_json_fields(&self, out: &mut String) {
        match self {
            Variety::Wps(w) => {
                let _ = write!(out, "\"kind\":\"wps\",\"weights\":{}", int_array(w.weights().iter().map(|&x| x as i64)));
            }
            Variety::Rank2(w) => {
                let _ = write!(
                    out,
                    "\"kind\":\"rank2\",\"weight_matrix\":[{},{}]",
                    int_array(w.top().iter().copied()),
                    int_array(w.bottom().iter().copied())
                );
            }
        }
    }
}

fn int_array(xs: impl Iterator<Item = i64>) -> String {
    let v: Vec<String> = xs.map(|x| x.to_string()).collect();
    format!("[{}]", v.join(","))
}

/// 17 significant digits, which round-trips every finite `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetRecord {
    pub variety: Variety,
    pub dim: usize,
    pub slope: f64,
    pub intercept: f64,
    pub se_slope: f64,
    pub se_int: f64,
    pub a: f64,
    pub b: f64,
    /// `log c_d` for `d = 1..=100`, zero where `c_d = 0`.
    pub log_prefix: Option<Vec<f64>>,
}

const KEYS: [&str; 11] =
    ["kind", "weights", "weight_matrix", "dim", "slope", "intercept", "se_slope", "se_int", "A", "B", "log_prefix"];

impl DatasetRecord {
    pub fn to_json_line(&self) -> String {
        let mut s = String::from("{");
        self.variety.write_json_fields(&mut s);
        let _ = write!(s, ",\"dim\":{}", self.dim);
        for (k, v) in [
            ("slope", self.slope),
            ("intercept", self.intercept),
            ("se_slope", self.se_slope),
            ("se_int", self.se_int),
            ("A", self.a),
            ("B", self.b),
        ] {
            let _ = write!(s, ",\"{k}\":{}", fmt_f64(v));
        }
        if let Some(p) = &self.log_prefix {
            let v: Vec<String> = p.iter().map(|&x| fmt_f64(x)).collect();
            let _ = write!(s, ",\"log_prefix\":[{}]", v.join(","));
        }
        s.push('}');
        s
    }

    /// Parses one line; `line` is the 1-based line number used in errors.
    pub fn from_json_line(text: &str, line: usize) -> Result<DatasetRecord> {
        let bad = |msg: String| Error::Line { line, msg };
        let obj: Map<String, Value> = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        if let Some(k) = obj.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(bad(format!("unexpected key `{k}`")));
        }
        let get = |key: &'static str| obj.get(key).ok_or(Error::MissingKey { line, key });
        let num = |key: &'static str| -> Result<f64> {
            let x = get(key)?.as_f64().ok_or_else(|| bad(format!("`{key}` is not a number")))?;
            if !x.is_finite() {
                return Err(bad(format!("`{key}` is not finite")));
            }
            Ok(x)
        };
        let ints = |v: &Value, key: &str| -> Result<Vec<i64>> {
            v.as_array()
                .ok_or_else(|| bad(format!("`{key}` is not an array")))?
                .iter()
                .map(|x| x.as_i64().ok_or_else(|| bad(format!("`{key}` holds a non-integer"))))
                .collect()
        };
        let variety = match get("kind")?.as_str() {
            Some("wps") => {
                let w = ints(get("weights")?, "weights")?;
                Variety::Wps(WeightVector::validate_wps(&w).map_err(|e| bad(e.to_string()))?)
            }
            Some("rank2") => {
                let rows = get("weight_matrix")?
                    .as_array()
                    .filter(|r| r.len() == 2)
                    .ok_or_else(|| bad("`weight_matrix` must hold two rows".into()))?;
                let top = ints(&rows[0], "weight_matrix")?;
                let bottom = ints(&rows[1], "weight_matrix")?;
                Variety::Rank2(WeightMatrix::validate_rank2(&top, &bottom).map_err(|e| bad(e.to_string()))?)
            }
            _ => return Err(bad("`kind` must be \"wps\" or \"rank2\"".into())),
        };
        let dim = get("dim")?.as_u64().ok_or_else(|| bad("`dim` is not a non-negative integer".into()))? as usize;
        if dim != variety.dimension() {
            return Err(bad(format!("`dim` is {dim} but the weights give {}", variety.dimension())));
        }
        let log_prefix = match obj.get("log_prefix") {
            None => None,
            Some(v) => {
                let arr = v.as_array().ok_or_else(|| bad("`log_prefix` is not an array".into()))?;
                if arr.len() != PREFIX_LEN {
                    return Err(bad(format!("`log_prefix` has {} entries, expected {PREFIX_LEN}", arr.len())));
                }
                let p = arr
                    .iter()
                    .map(|x| x.as_f64().filter(|x| x.is_finite()))
                    .collect::<Option<Vec<f64>>>()
                    .ok_or_else(|| bad("`log_prefix` holds a non-finite entry".into()))?;
                Some(p)
            }
        };
        Ok(DatasetRecord {
            variety,
            dim,
            slope: num("slope")?,
            intercept: num("intercept")?,
            se_slope: num("se_slope")?,
            se_int: num("se_int")?,
            a: num("A")?,
            b: num("B")?,
            log_prefix,
        })
    }

    /// `(slope, intercept)`
    pub fn features_2(&self) -> Vec<f64> {
        vec![self.slope, self.intercept]
    }

    /// `(slope, intercept, log c_1, ..., log c_100)`
    pub fn features_102(&self) -> Option<Vec<f64>> {
        let p = self.log_prefix.as_ref()?;
        let mut v = self.features_2();
        v.extend_from_slice(p);
        Some(v)
    }
}

pub fn write_records<W: Write>(mut w: W, records: &[DatasetRecord]) -> Result<()> {
    for r in records {
        writeln!(w, "{}", r.to_json_line())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: BufRead>(r: R) -> Result<Vec<DatasetRecord>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line_text = line?;
        if line_text.trim().is_empty() {
            continue;
        }
        out.push(DatasetRecord::from_json_line(&line_text, i + 1)?);
    }
    Ok(out)
}

pub fn write_dataset(path: impl AsRef<Path>, records: &[DatasetRecord]) -> Result<()> {
    write_records(BufWriter::new(File::create(path)?), records)
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Vec<DatasetRecord>> {
    read_records(BufReader::new(File::open(path)?))
}

/// Varieties without features, one `{"kind", "weights" | "weight_matrix",
/// "dim"}` object per line.
pub fn write_varieties(path: impl AsRef<Path>, vs: &[Variety]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for v in vs {
        let mut s = String::from("{");
        v.write_json_fields(&mut s);
        let _ = write!(s, ",\"dim\":{}}}", v.dimension());
        writeln!(w, "{s}")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads varieties from either a variety list or a full dataset.
pub fn read_varieties(path: impl AsRef<Path>) -> Result<Vec<Variety>> {
    let r = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let text = line?;
        if text.trim().is_empty() {
            continue;
        }
        let line = i + 1;
        let obj: Map<String, Value> =
            serde_json::from_str(&text).map_err(|e| Error::Line { line, msg: e.to_string() })?;
        let ints = |key: &'static str, v: Option<&Value>| -> Result<Vec<i64>> {
            v.and_then(Value::as_array)
                .and_then(|a| a.iter().map(Value::as_i64).collect::<Option<Vec<i64>>>())
                .ok_or(Error::MissingKey { line, key })
        };
        let v = match obj.get("kind").and_then(Value::as_str) {
            Some("wps") => Variety::Wps(WeightVector::validate_wps(&ints("weights", obj.get("weights"))?)?),
            Some("rank2") => {
                let rows = obj.get("weight_matrix").and_then(Value::as_array);
                let top = ints("weight_matrix", rows.and_then(|r| r.first()))?;
                let bottom = ints("weight_matrix", rows.and_then(|r| r.get(1)))?;
                Variety::Rank2(WeightMatrix::validate_rank2(&top, &bottom)?)
            }
            _ => return Err(Error::MissingKey { line, key: "kind" }),
        };
        out.push(v);
    }
    Ok(out)
}
