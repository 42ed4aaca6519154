//! JSON forms.
//!
//! An element serializes as `{"d":2,"terms":[{"exp":[0,0],"coef":4},...]}`
//! with terms in lexicographic exponent order; coefficients outside the
//! `i64` range are written as decimal strings. On input an element may also
//! be given as an expression string such as `"3 - u1 - u1^-1"`.
//!
//! A matrix is a nested array of entries (`[[e11, e12], [e21, e22]]`), each
//! entry an element object or expression string; the object form
//! `{"d": 2, "rows": [[...]]}` fixes the dimension explicitly.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::parse::{inferred_dim, parse_with_dim};
use super::{GroupRingElement, GroupRingMatrix};

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Coef {
    Small(i64),
    Big(String),
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    exp: Vec<i64>,
    coef: Coef,
}

#[derive(Serialize, Deserialize)]
struct ElementJson {
    d: usize,
    terms: Vec<TermJson>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ElementInput {
    Expr(String),
    Object(ElementJson),
}

impl ElementJson {
    fn into_element<E: serde::de::Error>(self) -> Result<GroupRingElement, E> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in self.terms {
            let c = match t.coef {
                Coef::Small(c) => BigInt::from(c),
                Coef::Big(s) => s.trim().parse::<BigInt>().map_err(E::custom)?,
            };
            terms.push((t.exp, c));
        }
        GroupRingElement::from_terms(self.d, terms).map_err(E::custom)
    }
}

impl Serialize for GroupRingElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let terms = self
            .terms()
            .map(|(e, c)| TermJson {
                exp: e.clone(),
                coef: match c.to_i64() {
                    Some(v) => Coef::Small(v),
                    None => Coef::Big(c.to_string()),
                },
            })
            .collect();
        ElementJson { d: self.dim(), terms }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GroupRingElement {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match ElementInput::deserialize(deserializer)? {
            ElementInput::Expr(s) => s.parse().map_err(D::Error::custom),
            ElementInput::Object(o) => o.into_element(),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum EntryInput {
    Expr(String),
    Int(i64),
    Object(ElementJson),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixInput {
    Rows(Vec<Vec<EntryInput>>),
    Object { d: Option<usize>, rows: Vec<Vec<EntryInput>> },
}

impl MatrixInput {
    fn into_matrix<E: serde::de::Error>(self) -> Result<GroupRingMatrix, E> {
        let (d_fixed, rows) = match self {
            MatrixInput::Rows(r) => (None, r),
            MatrixInput::Object { d, rows } => (d, rows),
        };
        let mut d = d_fixed.unwrap_or(1);
        if d_fixed.is_none() {
            for entry in rows.iter().flatten() {
                d = d.max(match entry {
                    EntryInput::Expr(s) => inferred_dim(s).map_err(E::custom)?,
                    EntryInput::Int(_) => 1,
                    EntryInput::Object(o) => o.d,
                });
            }
        }
        let mut out = Vec::with_capacity(rows.len());
        for row in rows {
            let mut r = Vec::with_capacity(row.len());
            for entry in row {
                r.push(match entry {
                    EntryInput::Expr(s) => parse_with_dim(&s, d).map_err(E::custom)?,
                    EntryInput::Int(c) => GroupRingElement::constant(d, c),
                    EntryInput::Object(o) => {
                        if o.d != d {
                            return Err(E::custom(format!(
                                "entry dimension {} differs from matrix dimension {d}",
                                o.d
                            )));
                        }
                        o.into_element()?
                    }
                });
            }
            out.push(r);
        }
        GroupRingMatrix::from_rows(out).map_err(E::custom)
    }
}

impl Serialize for GroupRingMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<&GroupRingElement>> =
            (0..self.rows()).map(|i| (0..self.cols()).map(|j| self.get(i, j)).collect()).collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GroupRingMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        MatrixInput::deserialize(deserializer)?.into_matrix()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn element_json_shape() {
        let f: GroupRingElement = "4 - u1 - u1^-1 - u2 - u2^-1".parse().unwrap();
        let v = serde_json::to_value(&f).unwrap();
        assert_eq!(v["d"], 2);
        assert_eq!(v["terms"].as_array().unwrap().len(), 5);
        assert_eq!(v["terms"][0]["exp"], serde_json::json!([-1, 0]));
        let back: GroupRingElement = serde_json::from_value(v).unwrap();
        assert_eq!(back, f);
        let from_str: GroupRingElement = serde_json::from_str("\"3 - u1 - u1^-1\"").unwrap();
        assert_eq!(from_str, "3 - u1 - u1^-1".parse().unwrap());
    }

    #[test]
    fn big_coefficients_use_strings() {
        let big: BigInt = "123456789012345678901234567890".parse().unwrap();
        let f = GroupRingElement::constant(1, big.clone());
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains("\"123456789012345678901234567890\""));
        let back: GroupRingElement = serde_json::from_str(&s).unwrap();
        assert_eq!(back.coefficient(&[0]), big);
    }

    #[test]
    fn matrix_json_forms() {
        let m: GroupRingMatrix = serde_json::from_str(r#"[["3 - u1", 1], [0, "3 - u1^-1"]]"#).unwrap();
        assert_eq!((m.rows(), m.cols(), m.dim()), (2, 2, 1));
        let m2: GroupRingMatrix = serde_json::from_str(r#"[["u1", "u2^2"]]"#).unwrap();
        assert_eq!((m2.rows(), m2.cols(), m2.dim()), (1, 2, 2));
        let m3: GroupRingMatrix = serde_json::from_str(r#"{"d": 3, "rows": [["u1"]]}"#).unwrap();
        assert_eq!(m3.dim(), 3);
        let round: GroupRingMatrix = serde_json::from_value(serde_json::to_value(&m).unwrap()).unwrap();
        assert_eq!(round, m);
        assert!(serde_json::from_str::<GroupRingMatrix>(r#"[["u1"], ["u1", "2"]]"#).is_err());
    }
}
