//! Run configuration: TOML or JSON files with a `seed`, an `output_dir` and
//! a list of `scenarios`. Scenario parameters stay as a loose key-value
//! table until a scenario reads them through [`Params`], which checks types,
//! fills defaults and records an echo of every value actually used.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use dcx_core::dist::MassDistribution;
use dcx_core::ordertest::OrderClass;
use dcx_core::{Topology, Window};
use serde_json::{Map, Value};

use crate::SimError;

#[derive(Clone, Debug)]
pub struct Config {
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Worker threads; `None` lets the pool pick.
    pub threads: Option<usize>,
    pub scenarios: Vec<ScenarioSpec>,
}

#[derive(Clone, Debug)]
pub struct ScenarioSpec {
    pub index: usize,
    pub id: String,
    pub table: Map<String, Value>,
}

const TOP_LEVEL_KEYS: [&str; 4] = ["seed", "output_dir", "threads", "scenarios"];

fn config_err(msg: impl Into<String>) -> SimError {
    SimError::Config(msg.into())
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if is_json {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, SimError> {
        let v: toml::Table = toml::from_str(text).map_err(|e| config_err(format!("invalid TOML: {e}")))?;
        let v = serde_json::to_value(v).map_err(|e| config_err(e.to_string()))?;
        Self::from_value(v)
    }

    pub fn from_json_str(text: &str) -> Result<Self, SimError> {
        let v: Value = serde_json::from_str(text).map_err(|e| config_err(format!("invalid JSON: {e}")))?;
        Self::from_value(v)
    }

    pub fn from_value(v: Value) -> Result<Self, SimError> {
        let Value::Object(top) = v else {
            return Err(config_err("top level must be a table"));
        };
        if let Some(k) = top.keys().find(|k| !TOP_LEVEL_KEYS.contains(&k.as_str())) {
            return Err(config_err(format!("unknown top-level key `{k}`")));
        }
        let seed = match top.get("seed") {
            None => return Err(config_err("missing key `seed`")),
            Some(v) => v.as_u64().ok_or_else(|| config_err("`seed`: expected a non-negative integer"))?,
        };
        let output_dir = match top.get("output_dir") {
            None => return Err(config_err("missing key `output_dir`")),
            Some(Value::String(s)) if !s.is_empty() => PathBuf::from(s),
            Some(_) => return Err(config_err("`output_dir`: expected a non-empty string")),
        };
        let threads = match top.get("threads") {
            None => None,
            Some(v) => match v.as_u64() {
                Some(n) if n >= 1 => Some(n as usize),
                _ => return Err(config_err("`threads`: expected a positive integer")),
            },
        };
        let list = match top.get("scenarios") {
            None => return Err(config_err("missing key `scenarios`")),
            Some(Value::Array(a)) if !a.is_empty() => a,
            Some(_) => return Err(config_err("`scenarios`: expected a non-empty list of tables")),
        };
        let mut scenarios = Vec::with_capacity(list.len());
        for (index, s) in list.iter().enumerate() {
            let Value::Object(table) = s else {
                return Err(config_err(format!("`scenarios[{index}]`: expected a table")));
            };
            let id = match table.get("id") {
                Some(Value::String(s)) => s.clone(),
                Some(_) => return Err(config_err(format!("`scenarios[{index}].id`: expected a string"))),
                None => return Err(config_err(format!("`scenarios[{index}]`: missing key `id`"))),
            };
            let mut table = table.clone();
            table.remove("id");
            scenarios.push(ScenarioSpec { index, id, table });
        }
        Ok(Self {
            seed,
            output_dir,
            threads,
            scenarios,
        })
    }
}

/// Typed, defaulted access to one scenario's parameters.
pub struct Params<'a> {
    index: usize,
    table: &'a Map<String, Value>,
    echo: BTreeMap<String, Value>,
}

impl<'a> Params<'a> {
    pub fn new(spec: &'a ScenarioSpec) -> Self {
        Self {
            index: spec.index,
            table: &spec.table,
            echo: BTreeMap::new(),
        }
    }

    fn err(&self, key: &str, what: &str) -> SimError {
        config_err(format!("`scenarios[{}].{key}`: {what}", self.index))
    }

    fn get<T>(
        &mut self,
        key: &str,
        default: T,
        parse: impl Fn(&Value) -> Option<T>,
        show: impl Fn(&T) -> Value,
        what: &str,
    ) -> Result<T, SimError> {
        let v = match self.table.get(key) {
            None => default,
            Some(raw) => parse(raw).ok_or_else(|| self.err(key, what))?,
        };
        self.echo.insert(key.to_string(), show(&v));
        Ok(v)
    }

    pub fn f64(&mut self, key: &str, default: f64) -> Result<f64, SimError> {
        self.get(key, default, |v| v.as_f64().filter(|x| x.is_finite()), |&x| x.into(), "expected a number")
    }

    pub fn positive(&mut self, key: &str, default: f64) -> Result<f64, SimError> {
        self.get(
            key,
            default,
            |v| v.as_f64().filter(|x| x.is_finite() && *x > 0.0),
            |&x| x.into(),
            "expected a positive number",
        )
    }

    pub fn probability(&mut self, key: &str, default: f64) -> Result<f64, SimError> {
        self.get(
            key,
            default,
            |v| v.as_f64().filter(|x| (0.0..=1.0).contains(x)),
            |&x| x.into(),
            "expected a number in [0, 1]",
        )
    }

    pub fn count(&mut self, key: &str, default: usize) -> Result<usize, SimError> {
        self.get(
            key,
            default,
            |v| v.as_u64().filter(|&n| n >= 1).map(|n| n as usize),
            |&n| n.into(),
            "expected a positive integer",
        )
    }

    pub fn flag(&mut self, key: &str, default: bool) -> Result<bool, SimError> {
        self.get(key, default, Value::as_bool, |&b| b.into(), "expected true or false")
    }

    pub fn string(&mut self, key: &str, default: &str, allowed: &[&str]) -> Result<String, SimError> {
        let what = format!("expected one of {}", allowed.join(", "));
        self.get(
            key,
            default.to_string(),
            |v| v.as_str().filter(|s| allowed.contains(s)).map(str::to_string),
            |s| s.as_str().into(),
            &what,
        )
    }

    /// A number or a non-empty list of numbers.
    pub fn list(&mut self, key: &str, default: &[f64]) -> Result<Vec<f64>, SimError> {
        self.get(key, default.to_vec(), number_list, |v| v.clone().into(), "expected a number or a list of numbers")
    }

    pub fn points(&mut self, key: &str, default: Vec<Vec<f64>>) -> Result<Vec<Vec<f64>>, SimError> {
        self.get(
            key,
            default,
            |v| {
                let rows = v.as_array()?;
                let out: Option<Vec<Vec<f64>>> = rows.iter().map(number_list).collect();
                out.filter(|o| !o.is_empty())
            },
            |v| v.clone().into(),
            "expected a list of coordinate lists",
        )
    }

    pub fn n_reps(&mut self, default: usize) -> Result<usize, SimError> {
        self.count("n_reps", default)
    }

    pub fn class(&mut self, default: OrderClass) -> Result<OrderClass, SimError> {
        let names: Vec<&str> = OrderClass::ALL.iter().map(|c| c.name()).collect();
        let what = format!("expected one of {}", names.join(", "));
        self.get(
            "class",
            default,
            |v| OrderClass::parse(v.as_str()?).ok(),
            |c| c.name().into(),
            &what,
        )
    }

    /// `window = {lows, highs, topology}`; `topology` is `torus` or `plain`.
    pub fn window(&mut self, default: Window) -> Result<Window, SimError> {
        let parsed = match self.table.get("window") {
            None => default,
            Some(Value::Object(w)) => {
                for k in w.keys() {
                    if !["lows", "highs", "topology"].contains(&k.as_str()) {
                        return Err(self.err(&format!("window.{k}"), "unknown key"));
                    }
                }
                let lows = w
                    .get("lows")
                    .and_then(number_list)
                    .ok_or_else(|| self.err("window.lows", "expected a list of numbers"))?;
                let highs = w
                    .get("highs")
                    .and_then(number_list)
                    .ok_or_else(|| self.err("window.highs", "expected a list of numbers"))?;
                let topology = match w.get("topology").map(|t| t.as_str()) {
                    None | Some(Some("torus")) => Topology::Torus,
                    Some(Some("plain")) => Topology::Plain,
                    Some(_) => return Err(self.err("window.topology", "expected `torus` or `plain`")),
                };
                Window::new(&lows, &highs, topology).map_err(|e| self.err("window", &e.to_string()))?
            }
            Some(_) => return Err(self.err("window", "expected a table")),
        };
        let topo = if parsed.is_torus() { "torus" } else { "plain" };
        self.echo.insert(
            "window".into(),
            serde_json::json!({"lows": parsed.lows(), "highs": parsed.highs(), "topology": topo}),
        );
        Ok(parsed)
    }

    /// `grid = {cells_per_axis}` with one entry per window axis.
    pub fn cells(&mut self, dim: usize, default: Vec<usize>) -> Result<Vec<usize>, SimError> {
        let cells = match self.table.get("grid") {
            None => default,
            Some(Value::Object(g)) => {
                if let Some(k) = g.keys().find(|k| k.as_str() != "cells_per_axis") {
                    return Err(self.err(&format!("grid.{k}"), "unknown key"));
                }
                let c: Option<Vec<usize>> = g.get("cells_per_axis").and_then(|v| {
                    v.as_array()?
                        .iter()
                        .map(|n| n.as_u64().filter(|&n| n >= 1).map(|n| n as usize))
                        .collect()
                });
                c.ok_or_else(|| self.err("grid.cells_per_axis", "expected a list of positive integers"))?
            }
            Some(_) => return Err(self.err("grid", "expected a table")),
        };
        if cells.len() != dim {
            return Err(self.err("grid.cells_per_axis", &format!("expected {dim} entries")));
        }
        self.echo.insert("grid".into(), serde_json::json!({ "cells_per_axis": cells }));
        Ok(cells)
    }

    /// Mark distribution, e.g. `{kind = "exponential", mean = 1.0}`.
    pub fn mark(&mut self, key: &str, default: MassDistribution) -> Result<MassDistribution, SimError> {
        let d = match self.table.get(key) {
            None => default,
            Some(v) => parse_mark(v).map_err(|what| self.err(key, &what))?,
        };
        d.validate().map_err(|e| self.err(key, &e.to_string()))?;
        self.echo.insert(key.to_string(), mark_to_value(&d));
        Ok(d)
    }

    /// Rejects keys no accessor asked for.
    pub fn finish(self) -> Result<Value, SimError> {
        if let Some(k) = self.table.keys().find(|k| !self.echo.contains_key(k.as_str())) {
            return Err(self.err(k, "unknown key for this scenario"));
        }
        Ok(Value::Object(self.echo.into_iter().collect()))
    }
}

fn number_list(v: &Value) -> Option<Vec<f64>> {
    match v {
        Value::Number(n) => n.as_f64().map(|x| vec![x]),
        Value::Array(a) if !a.is_empty() => a.iter().map(|x| x.as_f64().filter(|f| f.is_finite())).collect(),
        _ => None,
    }
}

fn field(t: &Map<String, Value>, k: &str) -> Result<f64, String> {
    t.get(k)
        .and_then(Value::as_f64)
        .ok_or_else(|| format!("mark needs a numeric `{k}`"))
}

fn parse_mark(v: &Value) -> Result<MassDistribution, String> {
    if let Some(x) = v.as_f64() {
        return Ok(MassDistribution::Constant(x));
    }
    let t = v.as_object().ok_or("expected a number or a mark table")?;
    let kind = t.get("kind").and_then(Value::as_str).ok_or("mark needs a string `kind`")?;
    let allowed: &[&str] = match kind {
        "constant" => &["value"],
        "exponential" => &["mean"],
        "gamma" => &["shape", "scale"],
        "sum_of_exponentials" => &["means"],
        "bernoulli" => &["p", "value"],
        "table" => &["values", "probs"],
        other => return Err(format!("unknown mark kind `{other}`")),
    };
    if let Some(k) = t.keys().find(|k| k.as_str() != "kind" && !allowed.contains(&k.as_str())) {
        return Err(format!("unknown key `{k}` for mark kind `{kind}`"));
    }
    let list = |k: &str| {
        t.get(k)
            .and_then(number_list)
            .ok_or_else(|| format!("mark needs a numeric list `{k}`"))
    };
    Ok(match kind {
        "constant" => MassDistribution::Constant(field(t, "value")?),
        "exponential" => MassDistribution::Exponential { mean: field(t, "mean")? },
        "gamma" => MassDistribution::Gamma {
            shape: field(t, "shape")?,
            scale: field(t, "scale")?,
        },
        "sum_of_exponentials" => MassDistribution::SumOfExponentials { means: list("means")? },
        "bernoulli" => MassDistribution::Bernoulli {
            p: field(t, "p")?,
            value: field(t, "value")?,
        },
        _ => MassDistribution::Table {
            values: list("values")?,
            probs: list("probs")?,
        },
    })
}

pub fn mark_to_value(d: &MassDistribution) -> Value {
    use serde_json::json;
    match d {
        MassDistribution::Constant(v) => json!({"kind": "constant", "value": v}),
        MassDistribution::Exponential { mean } => json!({"kind": "exponential", "mean": mean}),
        MassDistribution::Gamma { shape, scale } => json!({"kind": "gamma", "shape": shape, "scale": scale}),
        MassDistribution::SumOfExponentials { means } => json!({"kind": "sum_of_exponentials", "means": means}),
        MassDistribution::Bernoulli { p, value } => json!({"kind": "bernoulli", "p": p, "value": value}),
        MassDistribution::Table { values, probs } => json!({"kind": "table", "values": values, "probs": probs}),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(table: &str) -> Config {
        Config::from_toml_str(&format!("seed = 1\noutput_dir = \"out\"\n[[scenarios]]\n{table}")).unwrap()
    }

    #[test]
    fn toml_and_json_agree() {
        let t = one("id = \"palm-poisson-check\"\nlambda = 5.0\n");
        let j = Config::from_json_str(
            r#"{"seed": 1, "output_dir": "out", "scenarios": [{"id": "palm-poisson-check", "lambda": 5.0}]}"#,
        )
        .unwrap();
        assert_eq!(t.seed, j.seed);
        assert_eq!(t.scenarios[0].table, j.scenarios[0].table);
    }

    #[test]
    fn missing_and_unknown_top_level_keys() {
        let e = Config::from_toml_str("output_dir = \"o\"\n[[scenarios]]\nid = \"x\"\n").unwrap_err();
        assert!(e.to_string().contains("seed"), "{e}");
        let e = Config::from_toml_str("seed = 1\noutput_dir = \"o\"\nsed = 2\n[[scenarios]]\nid = \"x\"\n").unwrap_err();
        assert!(e.to_string().contains("sed"), "{e}");
    }

    #[test]
    fn typed_access_names_key() {
        let c = one("id = \"x\"\nn_reps = \"many\"\n");
        let mut p = Params::new(&c.scenarios[0]);
        let e = p.n_reps(10).unwrap_err();
        assert!(e.to_string().contains("scenarios[0].n_reps"), "{e}");
    }

    #[test]
    fn unused_key_is_reported() {
        let c = one("id = \"x\"\nlamda = 3.0\n");
        let mut p = Params::new(&c.scenarios[0]);
        p.f64("lambda", 1.0).unwrap();
        let e = p.finish().unwrap_err();
        assert!(e.to_string().contains("lamda"), "{e}");
    }

    #[test]
    fn defaults_are_echoed() {
        let c = one("id = \"x\"\nc = [1.5, 2]\n");
        let mut p = Params::new(&c.scenarios[0]);
        assert_eq!(p.list("c", &[1.0]).unwrap(), vec![1.5, 2.0]);
        assert_eq!(p.f64("a", 0.5).unwrap(), 0.5);
        let echo = p.finish().unwrap();
        assert_eq!(echo["a"], 0.5);
        assert_eq!(echo["c"], serde_json::json!([1.5, 2.0]));
    }

    #[test]
    fn window_and_grid() {
        let c = one("id = \"x\"\nwindow = { lows = [0, 0], highs = [2, 2], topology = \"torus\" }\ngrid = { cells_per_axis = [4, 4] }\n");
        let mut p = Params::new(&c.scenarios[0]);
        let w = p.window(Window::unit_torus(2)).unwrap();
        assert_eq!(w.highs(), &[2.0, 2.0]);
        assert_eq!(p.cells(2, vec![1, 1]).unwrap(), vec![4, 4]);
        let c = one("id = \"x\"\nwindow = { lows = [0], highs = [0] }\n");
        let e = Params::new(&c.scenarios[0]).window(Window::unit_torus(1)).unwrap_err();
        assert!(e.to_string().contains("window"), "{e}");
    }

    #[test]
    fn marks_parse() {
        let c = one("id = \"x\"\nmark = { kind = \"gamma\", shape = 2.0, scale = 0.5 }\nbad = { kind = \"gamma\", shape = 2.0 }\n");
        let mut p = Params::new(&c.scenarios[0]);
        assert_eq!(
            p.mark("mark", MassDistribution::Constant(1.0)).unwrap(),
            MassDistribution::Gamma { shape: 2.0, scale: 0.5 }
        );
        let e = p.mark("bad", MassDistribution::Constant(1.0)).unwrap_err();
        assert!(e.to_string().contains("scale"), "{e}");
    }
}
