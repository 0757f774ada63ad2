//! JSON run report: parameters, per-stage trace, final certificate, and the
//! resolved configuration for provenance.

use std::collections::BTreeMap;

use serde::Serialize;
use stiffen_core::optimize::{ContinuationReport, ContinuationSchedule};

#[derive(Serialize)]
pub struct Report {
    pub params: Params,
    pub stages: Vec<Stage>,
    #[serde(rename = "final")]
    pub final_: Final,
    pub fields: BTreeMap<String, String>,
    pub config: BTreeMap<String, String>,
}

#[derive(Serialize)]
pub struct Params {
    pub m: f64,
    #[serde(rename = "L")]
    pub mass_l: f64,
    pub schedule: Schedule,
}

#[derive(Serialize)]
pub struct Schedule {
    pub p_values: Vec<f64>,
    pub inner_tol: f64,
    pub inner_max_iter: usize,
    pub damping: f64,
}

#[derive(Serialize)]
pub struct Stage {
    pub p: f64,
    pub iters: usize,
    pub lambda1: f64,
    pub lp_mass: f64,
    pub theta_delta: f64,
    pub converged: bool,
}

#[derive(Serialize)]
pub struct Final {
    pub lambda1: f64,
    pub upper_bound: f64,
    pub gap: f64,
    pub converged: bool,
}

impl Report {
    pub fn new(
        m: f64,
        mass_l: f64,
        schedule: &ContinuationSchedule,
        run: &ContinuationReport,
        fields: BTreeMap<String, String>,
        config: BTreeMap<String, String>,
    ) -> Self {
        Report {
            params: Params {
                m,
                mass_l,
                schedule: Schedule {
                    p_values: schedule.p_values.clone(),
                    inner_tol: schedule.inner_tol,
                    inner_max_iter: schedule.inner_max_iter,
                    damping: schedule.damping,
                },
            },
            stages: run
                .stages
                .iter()
                .map(|s| Stage {
                    p: s.p,
                    iters: s.iterations,
                    lambda1: s.lambda1,
                    lp_mass: s.lp_mass,
                    theta_delta: s.theta_delta,
                    converged: s.converged,
                })
                .collect(),
            final_: Final {
                lambda1: run.lambda1,
                upper_bound: run.upper_bound,
                gap: run.duality_gap,
                converged: run.converged,
            },
            fields,
            config,
        }
    }
}
