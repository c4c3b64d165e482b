//! Bindings behind the static page in `www/`.
//!
//! Every export builds one single-macrocell deployment from
//! `(pbs, users, seed)` and returns JSON for the page to draw. The plain
//! `*_json` functions carry the logic so they can be tested natively; the
//! `#[wasm_bindgen]` wrappers only turn errors into JS exceptions.

use hetnet::association::{solve, Trace};
use hetnet::channel::mix64;
use hetnet::metrics::summarize;
use hetnet::{
    build_link_table, generate_topology, DeploymentConfig, LinkTable, MetricsReport, RadioParams,
    SolverConfig, Strategy, Topology,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Hard ceilings so a slider cannot lock up the tab.
const MAX_PBS: u32 = 30;
const MAX_USERS: u32 = 200;

#[derive(Serialize)]
struct Metrics {
    avg_rate: f64,
    avg_effective_rate: f64,
    avg_user_ee: f64,
    whole_ee: f64,
    jain_index: f64,
    supported_ratio: f64,
}

impl From<MetricsReport> for Metrics {
    fn from(r: MetricsReport) -> Self {
        Self {
            avg_rate: r.avg_rate,
            avg_effective_rate: r.avg_effective_rate,
            avg_user_ee: r.avg_user_ee,
            whole_ee: r.whole_ee,
            jain_index: r.jain_index,
            supported_ratio: r.supported_ratio,
        }
    }
}

#[derive(Serialize)]
struct Layout {
    strategy: String,
    circumradius: f64,
    mbs: Vec<[f64; 2]>,
    pbs: Vec<[f64; 2]>,
    users: Vec<[f64; 2]>,
    /// Serving BS per user, MBSs first then PBSs.
    serving: Vec<usize>,
    loads: Vec<usize>,
    metrics: Metrics,
}

#[derive(Serialize)]
struct Row {
    strategy: String,
    metrics: Metrics,
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum TraceView {
    Dinkelbach { gamma: Vec<f64>, f_values: Vec<f64> },
    Dual { max_residual: Vec<f64>, primal: Vec<f64>, dual: Vec<f64> },
}

struct Instance {
    topology: Topology,
    links: LinkTable,
    p_c: f64,
}

fn instance(pbs: u32, users: u32, seed: u32) -> Result<Instance, String> {
    if pbs > MAX_PBS || users == 0 || users > MAX_USERS {
        return Err(format!(
            "need 0..={MAX_PBS} PBSs and 1..={MAX_USERS} users, got {pbs} and {users}"
        ));
    }
    let topology = generate_topology(&DeploymentConfig {
        pbs_per_macrocell: pbs as usize,
        users_per_macrocell: users as usize,
        seed: seed as u64,
        ..Default::default()
    })
    .map_err(|e| e.to_string())?;
    let radio = RadioParams::default();
    let links = build_link_table(&topology, &radio, mix64(seed as u64)).map_err(|e| e.to_string())?;
    Ok(Instance {
        topology,
        links,
        p_c: radio.circuit_power_mw,
    })
}

fn xy(points: &[hetnet::topology::Point]) -> Vec<[f64; 2]> {
    points.iter().map(|p| [p.x, p.y]).collect()
}

fn strategy(name: &str) -> Result<Strategy, String> {
    name.parse::<Strategy>().map_err(|e| e.to_string())
}

pub fn layout_json(pbs: u32, users: u32, seed: u32, strategy_name: &str) -> Result<String, String> {
    let s = strategy(strategy_name)?;
    let inst = instance(pbs, users, seed)?;
    let sol = solve(s, &inst.links, inst.p_c, &SolverConfig::default()).map_err(|e| e.to_string())?;
    let report = summarize(&sol.association, &inst.links, inst.p_c, 1.0).map_err(|e| e.to_string())?;
    let t = &inst.topology;
    let view = Layout {
        strategy: s.to_string(),
        circumradius: t.inter_site_distance / 3f64.sqrt(),
        mbs: xy(&t.mbs_positions),
        pbs: xy(&t.pbs_positions),
        users: xy(&t.user_positions),
        serving: sol.association.serving_bs.clone(),
        loads: sol.association.loads.clone(),
        metrics: report.into(),
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

pub fn compare_json(pbs: u32, users: u32, seed: u32) -> Result<String, String> {
    let inst = instance(pbs, users, seed)?;
    let cfg = SolverConfig::default();
    let rows = Strategy::ALL
        .iter()
        .map(|&s| {
            let sol = solve(s, &inst.links, inst.p_c, &cfg).map_err(|e| e.to_string())?;
            let r = summarize(&sol.association, &inst.links, inst.p_c, 1.0).map_err(|e| e.to_string())?;
            Ok(Row {
                strategy: s.to_string(),
                metrics: r.into(),
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    serde_json::to_string(&rows).map_err(|e| e.to_string())
}

pub fn trace_json(pbs: u32, users: u32, seed: u32, strategy_name: &str) -> Result<String, String> {
    let s = strategy(strategy_name)?;
    let inst = instance(pbs, users, seed)?;
    let sol = solve(s, &inst.links, inst.p_c, &SolverConfig::default()).map_err(|e| e.to_string())?;
    let view = match sol.trace {
        Some(Trace::Dinkelbach(t)) => TraceView::Dinkelbach {
            gamma: t.gamma_sequence,
            f_values: t.f_values,
        },
        Some(Trace::Dual(t)) => TraceView::Dual {
            max_residual: (0..t.residuals.len()).map(|i| t.max_residual(i)).collect(),
            primal: t.primal_values,
            dual: t.dual_values,
        },
        None => return Err(format!("{s} has no iterations to trace")),
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

/// Layout and association for one strategy.
#[wasm_bindgen]
pub fn layout(pbs: u32, users: u32, seed: u32, strategy: &str) -> Result<String, JsError> {
    layout_json(pbs, users, seed, strategy).map_err(|e| JsError::new(&e))
}

/// Metrics of all five strategies on the same deployment.
#[wasm_bindgen]
pub fn compare(pbs: u32, users: u32, seed: u32) -> Result<String, JsError> {
    compare_json(pbs, users, seed).map_err(|e| JsError::new(&e))
}

/// Convergence trace of AMWEE, EEAUF or AUF.
#[wasm_bindgen]
pub fn trace(pbs: u32, users: u32, seed: u32, strategy: &str) -> Result<String, JsError> {
    trace_json(pbs, users, seed, strategy).map_err(|e| JsError::new(&e))
}
