use std::path::Path;

use algdyn_core::{GroupRingElement, GroupRingMatrix};
use serde::Deserialize;

/// The presentation a job runs on.
#[derive(Debug, Clone)]
pub enum Presentation {
    Poly(GroupRingElement),
    Matrix(GroupRingMatrix),
}

impl Presentation {
    pub fn matrix(&self) -> GroupRingMatrix {
        match self {
            Presentation::Poly(f) => GroupRingMatrix::scalar(f.clone()),
            Presentation::Matrix(a) => a.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Presentation::Poly(f) => f.dim(),
            Presentation::Matrix(a) => a.dim(),
        }
    }

    pub fn describe(&self) -> serde_json::Value {
        match self {
            Presentation::Poly(f) => serde_json::json!({ "poly": f.to_string() }),
            Presentation::Matrix(a) => {
                let rows: Vec<Vec<String>> =
                    (0..a.rows()).map(|i| (0..a.cols()).map(|j| a.get(i, j).to_string()).collect()).collect();
                serde_json::json!({ "matrix": rows })
            }
        }
    }
}

/// `poly` and `matrix` as they appear in config files. A matrix may be
/// given inline or as a path to a JSON file.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct InputSpec {
    pub poly: Option<String>,
    pub matrix: Option<serde_json::Value>,
}

impl InputSpec {
    pub fn resolve(&self) -> Result<Option<Presentation>, String> {
        match (&self.poly, &self.matrix) {
            (Some(_), Some(_)) => Err("give either a polynomial or a matrix, not both".into()),
            (Some(p), None) => Ok(Some(parse_poly(p)?)),
            (None, Some(serde_json::Value::String(s))) => Ok(Some(parse_matrix_arg(s)?)),
            (None, Some(v)) => Ok(Some(Presentation::Matrix(
                serde_json::from_value(v.clone()).map_err(|e| format!("matrix: {e}"))?,
            ))),
            (None, None) => Ok(None),
        }
    }
}

pub fn parse_poly(s: &str) -> Result<Presentation, String> {
    s.parse::<GroupRingElement>().map(Presentation::Poly).map_err(|e| format!("polynomial \"{s}\": {e}"))
}

/// Inline JSON when the argument starts with `[` or `{`, otherwise a path.
pub fn parse_matrix_arg(arg: &str) -> Result<Presentation, String> {
    let text = if arg.trim_start().starts_with(['[', '{']) {
        arg.to_string()
    } else {
        read_file(Path::new(arg))?
    };
    serde_json::from_str::<GroupRingMatrix>(&text).map(Presentation::Matrix).map_err(|e| format!("matrix: {e}"))
}

pub fn read_file(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}
