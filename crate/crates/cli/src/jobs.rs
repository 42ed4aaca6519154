//! One struct per subcommand. The same structs are the stage entries of a
//! pipeline config, so a stage and the equivalent command line produce
//! the same report.

use algdyn_core::entropy::{duality_check, mahler_measure, packing_lower_bound, peters_entropy, CompanionModule};
use algdyn_core::expansive::{has_finite_entropy, Finiteness, is_expansive_principal, is_expansive_square, ExpansiveVerdict, PresentedAction};
use algdyn_core::freegroup::verify_annihilator;
use algdyn_core::homoclinic::{
    default_radius_cap, delta1_membership, pairing_symmetry_check, standard_generators,
    HomoclinicGroup, DEFAULT_TOL,
};
use algdyn_core::independence::{homoclinic_specification_check, independence_witnesses, shadow, Block, ShadowRequest};
use algdyn_core::torus::default_grid;
use algdyn_core::window::Window;
use algdyn_core::{Exec, GroupRingElement};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::input::Presentation;

/// Exit status of a finished job: 0 for a definite answer, 2 for Unknown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Definite = 0,
    Unknown = 2,
}

pub struct Outcome {
    pub parameters: Value,
    pub report: Value,
    pub status: Status,
}

type JobResult = Result<Outcome, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("reports serialize")
}

fn need(input: Option<&Presentation>) -> Result<&Presentation, String> {
    input.ok_or_else(|| "this command needs --poly or --matrix".to_string())
}

fn parse_window(s: &str, d: usize) -> Result<Window, String> {
    let w: Window = s.parse().map_err(err)?;
    if w.dim() != d {
        return Err(format!("window {s} has dimension {}, expected {d}", w.dim()));
    }
    Ok(w)
}

/// `m` components (one expression per coordinate); defaults to `e_1`.
fn parse_row(m: &[String], k: usize, d: usize) -> Result<Vec<GroupRingElement>, String> {
    if m.is_empty() {
        return Ok((0..k).map(|j| if j == 0 { GroupRingElement::one(d) } else { GroupRingElement::zero(d) }).collect());
    }
    if m.len() != k {
        return Err(format!("expected {k} components for m, got {}", m.len()));
    }
    m.iter().map(|s| algdyn_core::groupring::parse_with_dim(s, d).map_err(err)).collect()
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpansiveJob {
    pub grid: Option<usize>,
}

impl ExpansiveJob {
    pub fn run(&self, input: Option<&Presentation>, exec: Exec) -> JobResult {
        let input = need(input)?;
        let fin = has_finite_entropy(&PresentedAction::new(input.matrix()));
        let mut report = match input {
            Presentation::Poly(f) => to_value(&is_expansive_principal(f, self.grid, exec)),
            Presentation::Matrix(a) if a.is_square() => {
                to_value(&is_expansive_square(&PresentedAction::new(a.clone()), self.grid, exec).map_err(err)?)
            }
            // expansive actions have finite entropy
            Presentation::Matrix(_) if fin.verdict == Finiteness::Infinite => {
                json!({ "verdict": ExpansiveVerdict::NotExpansive, "note": "infinite entropy" })
            }
            Presentation::Matrix(_) => json!({ "verdict": ExpansiveVerdict::Unknown, "note": "non-square presentation" }),
        };
        report["finite_entropy"] = to_value(&fin);
        let unknown = report["verdict"] == json!(ExpansiveVerdict::Unknown);
        Ok(Outcome {
            parameters: json!({ "grid": self.grid.unwrap_or_else(|| default_grid(input.dim())) }),
            report,
            status: if unknown { Status::Unknown } else { Status::Definite },
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EntropyMethodArg {
    #[default]
    Mahler,
    Peters,
    Packing,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyJob {
    #[serde(default)]
    pub method: EntropyMethodArg,
    pub grid: Option<usize>,
    pub n_max: Option<usize>,
    /// Seed set `E` for Peters counting, as integer vectors.
    pub seed_set: Option<Vec<Vec<i64>>>,
    /// Integer matrix for rational-vector counting.
    pub companion_matrix: Option<Vec<Vec<i64>>>,
    pub window: Option<String>,
    pub eps: Option<f64>,
    pub levels: Option<usize>,
}

impl EntropyJob {
    pub fn run(&self, input: Option<&Presentation>, exec: Exec) -> JobResult {
        let (parameters, est) = match self.method {
            EntropyMethodArg::Mahler => {
                let input = need(input)?;
                let f = match input {
                    Presentation::Poly(f) => f.clone(),
                    Presentation::Matrix(a) => a.determinant().map_err(err)?,
                };
                let grid = self.grid.unwrap_or_else(|| default_grid(f.dim()));
                (json!({ "method": "mahler", "grid": grid }), mahler_measure(&f, grid, exec).map_err(err)?)
            }
            EntropyMethodArg::Peters => {
                let cm = match (&self.companion_matrix, input) {
                    (Some(m), None) => CompanionModule::rational(m.clone()).map_err(err)?,
                    (None, Some(Presentation::Poly(f))) => CompanionModule::new(f).map_err(err)?,
                    (Some(_), Some(_)) => return Err("give either a polynomial or a companion matrix".into()),
                    _ => return Err("peters counting needs --poly or --companion-matrix".into()),
                };
                let n_max = self.n_max.unwrap_or(30);
                let est = peters_entropy(&cm, self.seed_set.as_deref(), n_max).map_err(err)?;
                (json!({ "method": "peters", "n_max": n_max, "seed_set": self.seed_set }), est)
            }
            EntropyMethodArg::Packing => {
                let input = need(input)?;
                let d = input.dim();
                let window = match &self.window {
                    Some(w) => parse_window(w, d)?,
                    None => Window::cube(d, if d == 1 { 20 } else { 4 }),
                };
                let levels = self.levels.unwrap_or(2);
                let est = packing_lower_bound(&input.matrix(), &window, self.eps, levels, exec).map_err(err)?;
                (json!({ "method": "packing", "window": window.to_string(), "eps": self.eps, "levels": levels }), est)
            }
        };
        Ok(Outcome { parameters, report: to_value(&est), status: Status::Definite })
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomoclinicJob {
    pub tol: Option<f64>,
    pub window: Option<String>,
    /// Components of the row vector `m`; the point is `P(m (A*)^{-1})`.
    #[serde(default)]
    pub m: Vec<String>,
    #[serde(default)]
    pub pairing: bool,
    /// Runs the specification check at this `eps`, with `F1` the support
    /// window of `m`.
    pub spec_eps: Option<f64>,
}

impl HomoclinicJob {
    pub fn run(&self, input: Option<&Presentation>, exec: Exec) -> JobResult {
        let input = need(input)?;
        let a = input.matrix();
        let (d, k) = (a.dim(), a.cols());
        let tol = self.tol.unwrap_or(DEFAULT_TOL);
        let window = match &self.window {
            Some(w) => parse_window(w, d)?,
            None => Window::ball(d, if d == 1 { 10 } else { 3 }),
        };
        let group = HomoclinicGroup::new(&a, tol, default_radius_cap(d), exec).map_err(err)?;
        let m = parse_row(&self.m, k, d)?;
        let x = group.element(&m).map_err(err)?;
        let inv = group.inverse();
        let values: Vec<Value> = window
            .points()
            .into_iter()
            .map(|t| {
                let v: Vec<f64> = (0..k).map(|j| x.value(j, &t)).collect();
                json!({ "t": t, "x": v })
            })
            .collect();
        let mut report = json!({
            "inverse": {
                "determinant": inv.determinant,
                "residual": inv.residual,
                "tail_bound": inv.tail_bound,
                "radius": inv.radius(),
                "l1_norm": inv.l1_norm(),
            },
            "point": {
                "m": m.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "tail_bound": x.tail_bound,
                "support_size": x.support().len(),
                "membership_defect": x.membership_defect(),
                "membership_tol": group.membership_tol(),
                "relation_defect": x.relation_defect(),
                "values": values,
            },
            "delta1": delta1_membership(&x, &standard_generators(k, d)),
        });
        if self.pairing {
            let rep = pairing_symmetry_check(&a, &m, &m, &window, tol, exec).map_err(err)?;
            report["pairing"] = to_value(&rep);
        }
        if let Some(eps) = self.spec_eps {
            let f1 = support_window(&m, d);
            let rep = homoclinic_specification_check(&group, eps, &f1, &x, exec).map_err(err)?;
            report["specification"] = to_value(&rep);
        }
        Ok(Outcome {
            parameters: json!({ "tol": tol, "window": window.to_string(), "pairing": self.pairing, "spec_eps": self.spec_eps }),
            report,
            status: Status::Definite,
        })
    }
}

fn support_window(m: &[GroupRingElement], d: usize) -> Window {
    let mut lo = vec![i64::MAX; d];
    let mut hi = vec![i64::MIN; d];
    for (e, _) in m.iter().flat_map(|c| c.terms()) {
        for i in 0..d {
            lo[i] = lo[i].min(e[i]);
            hi[i] = hi[i].max(e[i]);
        }
    }
    Window::new(lo, hi).unwrap_or_else(|_| Window::ball(d, 0))
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IeJob {
    pub eps: Option<f64>,
    pub window: Option<String>,
    pub cap: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    #[serde(default)]
    pub m: Vec<String>,
}

impl IeJob {
    pub fn run(&self, input: Option<&Presentation>, exec: Exec) -> JobResult {
        let input = need(input)?;
        let a = input.matrix();
        let (d, k) = (a.dim(), a.cols());
        let tol = self.tol.unwrap_or(DEFAULT_TOL);
        let eps = self.eps.unwrap_or(0.1);
        let seed = self.seed.unwrap_or(0);
        let window = match &self.window {
            Some(w) => parse_window(w, d)?,
            None => Window::cube(d, if d == 1 { 50 } else { 8 }),
        };
        let group = HomoclinicGroup::new(&a, tol, default_radius_cap(d), exec).map_err(err)?;
        let x = group.element(&parse_row(&self.m, k, d)?).map_err(err)?;
        let rep = independence_witnesses(&x, eps, &window, self.cap, seed, exec).map_err(err)?;
        Ok(Outcome {
            parameters: json!({ "eps": eps, "window": window.to_string(), "cap": self.cap, "seed": seed, "tol": tol }),
            report: to_value(&rep),
            status: Status::Definite,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpec {
    pub window: String,
    /// Row vector `m` of the block's point `P(m (A*)^{-1})`.
    pub m: Vec<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ShadowJob {
    pub eps: Option<f64>,
    #[serde(default)]
    pub blocks: Vec<BlockSpec>,
    pub periodic: Option<Vec<Vec<i64>>>,
    pub tol: Option<f64>,
}

impl ShadowJob {
    pub fn run(&self, input: Option<&Presentation>, exec: Exec) -> JobResult {
        let input = need(input)?;
        let a = input.matrix();
        let (d, k) = (a.dim(), a.cols());
        let tol = self.tol.unwrap_or(DEFAULT_TOL);
        let eps = self.eps.unwrap_or(0.05);
        let group = HomoclinicGroup::new(&a, tol, default_radius_cap(d), exec).map_err(err)?;
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            let window = parse_window(&b.window, d)?;
            let point = group.element(&parse_row(&b.m, k, d)?).map_err(err)?;
            blocks.push(Block { window, point });
        }
        let req = ShadowRequest { blocks, eps, periodic: self.periodic.clone() };
        let res = shadow(&group, &req, exec).map_err(err)?;
        Ok(Outcome {
            parameters: json!({ "eps": eps, "tol": tol, "blocks": self.blocks, "periodic": self.periodic }),
            report: to_value(&res),
            status: Status::Definite,
        })
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualityJob {
    pub grid: Option<usize>,
}

impl DualityJob {
    pub fn run(&self, input: Option<&Presentation>, exec: Exec) -> JobResult {
        let a = need(input)?.matrix();
        let grid = self.grid.unwrap_or_else(|| default_grid(a.dim()));
        let rep = duality_check(&a, grid, exec).map_err(err)?;
        Ok(Outcome { parameters: json!({ "grid": grid }), report: to_value(&rep), status: Status::Definite })
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreegroupJob {
    pub rank: Option<usize>,
    pub order: Option<usize>,
    pub radius: Option<usize>,
}

impl FreegroupJob {
    pub fn run(&self, exec: Exec) -> JobResult {
        let rank = self.rank.unwrap_or(2);
        let order = self.order.unwrap_or(5);
        let radius = self.radius.unwrap_or((2 * order).saturating_sub(2));
        let rep = verify_annihilator(rank, order, radius, exec).map_err(err)?;
        Ok(Outcome {
            parameters: json!({ "rank": rank, "order": order, "radius": radius }),
            report: to_value(&rep),
            status: Status::Definite,
        })
    }
}

/// A pipeline stage: `{"stage": "entropy", "method": "mahler", ...}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "stage", rename_all = "kebab-case")]
pub enum Stage {
    Expansive(ExpansiveJob),
    Entropy(EntropyJob),
    Homoclinic(HomoclinicJob),
    Ie(IeJob),
    Shadow(ShadowJob),
    Duality(DualityJob),
    FreegroupCheck(FreegroupJob),
}

impl Stage {
    pub fn name(&self) -> &'static str {
        match self {
            Stage::Expansive(_) => "expansive",
            Stage::Entropy(_) => "entropy",
            Stage::Homoclinic(_) => "homoclinic",
            Stage::Ie(_) => "ie",
            Stage::Shadow(_) => "shadow",
            Stage::Duality(_) => "duality",
            Stage::FreegroupCheck(_) => "freegroup-check",
        }
    }

    pub fn run(&self, input: Option<&Presentation>, exec: Exec) -> JobResult {
        match self {
            Stage::Expansive(j) => j.run(input, exec),
            Stage::Entropy(j) => j.run(input, exec),
            Stage::Homoclinic(j) => j.run(input, exec),
            Stage::Ie(j) => j.run(input, exec),
            Stage::Shadow(j) => j.run(input, exec),
            Stage::Duality(j) => j.run(input, exec),
            Stage::FreegroupCheck(j) => j.run(exec),
        }
    }
}
