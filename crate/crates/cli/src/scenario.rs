//! Scenario file format: JSON serialization of a connection plus mapping
//! data, family coefficients and theta selectors. Maps are emitted with
//! sorted keys and polynomial terms in canonical order, so generation is
//! byte-stable for a fixed seed. Load errors carry the path of the offending
//! field.

use serde_json::{json, Map, Value};

use agm_core::connection::{Connection, FamilyCoefficients};
use agm_core::grid::{Down, TensorGrid, Up, Variance};
use agm_core::invariants::ThetaSelector;
use agm_core::mapping::{GeneralMappingData, Pi3Kind, Pi3MappingData};
use agm_core::poly::PolyField;
use agm_core::rational::Rational;

#[derive(Debug)]
pub struct LoadError {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for LoadError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl std::error::Error for LoadError {}

fn err<T>(path: &str, message: impl Into<String>) -> Result<T, LoadError> {
    Err(LoadError {
        path: path.to_string(),
        message: message.into(),
    })
}

/// Mapping payload of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioData {
    General(GeneralMappingData),
    Pi3(Pi3MappingData),
}

/// In-memory form of a scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub dimension: usize,
    pub degree: u32,
    pub connection: Connection,
    pub data: ScenarioData,
    pub family_coefficients: FamilyCoefficients,
    pub theta_selectors: Vec<ThetaSelector>,
}

fn grid_to_json(g: &TensorGrid) -> Value {
    fn build(g: &TensorGrid, prefix: &mut Vec<usize>, depth: usize) -> Value {
        if depth == g.rank() {
            return g.get(prefix).to_json();
        }
        let items: Vec<Value> = (0..g.dim())
            .map(|i| {
                prefix.push(i);
                let v = build(g, prefix, depth + 1);
                prefix.pop();
                v
            })
            .collect();
        Value::Array(items)
    }
    build(g, &mut Vec::new(), 0)
}

fn grid_from_json(
    v: &Value,
    dim: usize,
    variance: &[Variance],
    path: &str,
) -> Result<TensorGrid, LoadError> {
    fn fill(
        v: &Value,
        g: &mut TensorGrid,
        prefix: &mut Vec<usize>,
        depth: usize,
        dim: usize,
        rank: usize,
        path: &str,
    ) -> Result<(), LoadError> {
        let here = format!(
            "{}{}",
            path,
            prefix.iter().map(|i| format!("[{i}]")).collect::<String>()
        );
        if depth == rank {
            let p = PolyField::from_json(v, dim).map_err(|e| LoadError {
                path: here,
                message: e.to_string(),
            })?;
            g.set(prefix, p);
            return Ok(());
        }
        let arr = match v.as_array() {
            Some(a) => a,
            None => return err(&here, "expected array"),
        };
        if arr.len() != dim {
            return err(
                &here,
                format!("expected {dim} entries, found {}", arr.len()),
            );
        }
        for (i, item) in arr.iter().enumerate() {
            prefix.push(i);
            fill(item, g, prefix, depth + 1, dim, rank, path)?;
            prefix.pop();
        }
        Ok(())
    }
    let mut g = TensorGrid::zero(dim, variance);
    fill(v, &mut g, &mut Vec::new(), 0, dim, variance.len(), path)?;
    Ok(g)
}

fn get<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value, LoadError> {
    match obj.get(key) {
        Some(v) => Ok(v),
        None => err(path, format!("missing field {key:?}")),
    }
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, LoadError> {
    v.as_object().ok_or_else(|| LoadError {
        path: path.into(),
        message: "expected object".into(),
    })
}

fn rational_field(obj: &Map<String, Value>, key: &str, path: &str) -> Result<Rational, LoadError> {
    let here = format!("{path}.{key}");
    let s = get(obj, key, path)?.as_str().ok_or_else(|| LoadError {
        path: here.clone(),
        message: "expected string".into(),
    })?;
    Rational::parse(s).map_err(|e| LoadError {
        path: here,
        message: e.to_string(),
    })
}

impl Scenario {
    pub fn to_json(&self) -> Value {
        let mapping = match &self.data {
            ScenarioData::General(d) => json!({
                "type": "general",
                "omega": grid_to_json(&d.omega),
                "omega_bar": grid_to_json(&d.omega_bar),
                "tau": grid_to_json(&d.tau),
                "tau_bar": grid_to_json(&d.tau_bar),
            }),
            ScenarioData::Pi3(m) => json!({
                "type": "pi3",
                "kind": m.kind.as_u8(),
                "psi": grid_to_json(&m.psi),
                "sigma": grid_to_json(&m.sigma),
                "phi": grid_to_json(&m.phi),
                "nu": grid_to_json(&m.nu),
                "mu": m.mu.to_json(),
            }),
        };
        json!({
            "dimension": self.dimension,
            "degree": self.degree,
            "connection": grid_to_json(self.connection.coefficients()),
            "mapping": mapping,
            "family_coefficients": {
                "u": self.family_coefficients.u.to_fraction_string(),
                "u_prime": self.family_coefficients.u_prime.to_fraction_string(),
                "v": self.family_coefficients.v.to_fraction_string(),
                "v_prime": self.family_coefficients.v_prime.to_fraction_string(),
                "w": self.family_coefficients.w.to_fraction_string(),
            },
            "theta_selectors": self
                .theta_selectors
                .iter()
                .map(|s| {
                    let (p1, p2, p3) = s.parts();
                    json!([p1, p2, p3])
                })
                .collect::<Vec<_>>(),
        })
    }

    pub fn to_pretty_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("serialization");
        s.push('\n');
        s
    }

    pub fn from_json(v: &Value) -> Result<Scenario, LoadError> {
        let root = as_object(v, "$")?;
        let dimension = get(root, "dimension", "$")?
            .as_u64()
            .ok_or_else(|| LoadError {
                path: "$.dimension".into(),
                message: "expected integer".into(),
            })? as usize;
        if !(2..=6).contains(&dimension) {
            return err("$.dimension", "must be between 2 and 6");
        }
        let degree = get(root, "degree", "$")?
            .as_u64()
            .ok_or_else(|| LoadError {
                path: "$.degree".into(),
                message: "expected integer".into(),
            })? as u32;
        let l = grid_from_json(
            get(root, "connection", "$")?,
            dimension,
            &[Up, Down, Down],
            "$.connection",
        )?;
        let connection = Connection::new(l).map_err(|e| LoadError {
            path: "$.connection".into(),
            message: e.to_string(),
        })?;

        let mapping = as_object(get(root, "mapping", "$")?, "$.mapping")?;
        let mtype = get(mapping, "type", "$.mapping")?
            .as_str()
            .ok_or_else(|| LoadError {
                path: "$.mapping.type".into(),
                message: "expected string".into(),
            })?;
        let data = match mtype {
            "general" => {
                let g = |key: &str| -> Result<TensorGrid, LoadError> {
                    grid_from_json(
                        get(mapping, key, "$.mapping")?,
                        dimension,
                        &[Up, Down, Down],
                        &format!("$.mapping.{key}"),
                    )
                };
                let d =
                    GeneralMappingData::new(g("omega")?, g("omega_bar")?, g("tau")?, g("tau_bar")?)
                        .map_err(|e| LoadError {
                            path: "$.mapping".into(),
                            message: e.to_string(),
                        })?;
                ScenarioData::General(d)
            }
            "pi3" => {
                let kind_num =
                    get(mapping, "kind", "$.mapping")?
                        .as_u64()
                        .ok_or_else(|| LoadError {
                            path: "$.mapping.kind".into(),
                            message: "expected integer".into(),
                        })?;
                let kind = Pi3Kind::from_u8(kind_num as u8).map_err(|e| LoadError {
                    path: "$.mapping.kind".into(),
                    message: e.to_string(),
                })?;
                let psi = grid_from_json(
                    get(mapping, "psi", "$.mapping")?,
                    dimension,
                    &[Down],
                    "$.mapping.psi",
                )?;
                let sigma = grid_from_json(
                    get(mapping, "sigma", "$.mapping")?,
                    dimension,
                    &[Down, Down],
                    "$.mapping.sigma",
                )?;
                let phi = grid_from_json(
                    get(mapping, "phi", "$.mapping")?,
                    dimension,
                    &[Up],
                    "$.mapping.phi",
                )?;
                let nu = grid_from_json(
                    get(mapping, "nu", "$.mapping")?,
                    dimension,
                    &[Down],
                    "$.mapping.nu",
                )?;
                let mu = PolyField::from_json(get(mapping, "mu", "$.mapping")?, dimension)
                    .map_err(|e| LoadError {
                        path: "$.mapping.mu".into(),
                        message: e.to_string(),
                    })?;
                let m =
                    Pi3MappingData::new(kind, psi, sigma, phi, nu, mu).map_err(|e| LoadError {
                        path: "$.mapping".into(),
                        message: e.to_string(),
                    })?;
                ScenarioData::Pi3(m)
            }
            other => {
                return err("$.mapping.type", format!("unknown mapping type {other:?}"));
            }
        };

        let fc_obj = as_object(
            get(root, "family_coefficients", "$")?,
            "$.family_coefficients",
        )?;
        let family_coefficients = FamilyCoefficients {
            u: rational_field(fc_obj, "u", "$.family_coefficients")?,
            u_prime: rational_field(fc_obj, "u_prime", "$.family_coefficients")?,
            v: rational_field(fc_obj, "v", "$.family_coefficients")?,
            v_prime: rational_field(fc_obj, "v_prime", "$.family_coefficients")?,
            w: rational_field(fc_obj, "w", "$.family_coefficients")?,
        };

        let sel_arr = get(root, "theta_selectors", "$")?
            .as_array()
            .ok_or_else(|| LoadError {
                path: "$.theta_selectors".into(),
                message: "expected array".into(),
            })?;
        let mut theta_selectors = Vec::new();
        for (k, s) in sel_arr.iter().enumerate() {
            let here = format!("$.theta_selectors[{k}]");
            let triple = s.as_array().ok_or_else(|| LoadError {
                path: here.clone(),
                message: "expected [p1,p2,p3]".into(),
            })?;
            if triple.len() != 3 {
                return err(&here, "expected three components");
            }
            let mut parts = [0u8; 3];
            for (t, v) in triple.iter().enumerate() {
                parts[t] = v.as_u64().ok_or_else(|| LoadError {
                    path: format!("{here}[{t}]"),
                    message: "expected 1 or 2".into(),
                })? as u8;
            }
            let sel = ThetaSelector::new(parts[0], parts[1], parts[2]).map_err(|e| LoadError {
                path: here,
                message: e.to_string(),
            })?;
            theta_selectors.push(sel);
        }
        if theta_selectors.is_empty() {
            return err("$.theta_selectors", "at least one selector required");
        }

        Ok(Scenario {
            dimension,
            degree,
            connection,
            data,
            family_coefficients,
            theta_selectors,
        })
    }

    pub fn parse_str(s: &str) -> Result<Scenario, LoadError> {
        let v: Value = serde_json::from_str(s).map_err(|e| LoadError {
            path: "$".into(),
            message: format!("invalid JSON: {e}"),
        })?;
        Scenario::from_json(&v)
    }
}
