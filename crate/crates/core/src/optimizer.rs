//! Adam over the trainable logits with a fixed step count.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{DensityField, DEFAULT_THETA_SAT};
use crate::masks::DomainMasks;
use crate::objective::{grad_total, LossBreakdown, ObjectiveParams, DEFAULT_LAMBDA_MASS, DEFAULT_SHARPNESS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimConfig {
    pub steps: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub lambda_mass: f64,
    /// Basal layer thickness in cells.
    pub epsilon: usize,
    /// Recorded with every run. Initialization is deterministic, so the
    /// optimizer draws no random numbers.
    pub seed: u64,
    pub theta_sat: f64,
    pub sharpness: f64,
    pub smoothing: bool,
    pub log_interval: usize,
}

impl Default for OptimConfig {
    fn default() -> Self {
        Self {
            steps: 2000,
            learning_rate: 1e-2,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            lambda_mass: DEFAULT_LAMBDA_MASS,
            epsilon: 2,
            seed: 42,
            theta_sat: DEFAULT_THETA_SAT,
            sharpness: DEFAULT_SHARPNESS,
            smoothing: true,
            log_interval: 100,
        }
    }
}

impl OptimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.steps < 1 {
            return bad("steps must be >= 1".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return bad(format!("{name} must lie in [0, 1), got {b}"));
            }
        }
        if !(self.adam_eps > 0.0) {
            return bad("adam_eps must be positive".into());
        }
        if self.epsilon < 1 {
            return bad("epsilon must be >= 1".into());
        }
        if !(self.theta_sat > 0.0 && self.theta_sat.is_finite()) {
            return bad("theta_sat must be positive".into());
        }
        if self.log_interval < 1 {
            return bad("log_interval must be >= 1".into());
        }
        self.objective().validate()
    }

    pub fn objective(&self) -> ObjectiveParams {
        ObjectiveParams {
            lambda_mass: self.lambda_mass,
            sharpness: self.sharpness,
            smoothing: self.smoothing,
        }
    }

    pub fn adam(&self) -> AdamParams {
        AdamParams {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.adam_eps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

/// One bias-corrected Adam update. `t` is the 1-based step number.
pub fn adam_step(theta: &mut [f64], grad: &[f64], m: &mut [f64], v: &mut [f64], t: u32, p: &AdamParams) {
    assert!(t >= 1, "adam step counter starts at 1");
    assert!(theta.len() == grad.len() && m.len() == grad.len() && v.len() == grad.len());
    let bc1 = 1.0 - p.beta1.powi(t as i32);
    let bc2 = 1.0 - p.beta2.powi(t as i32);
    for i in 0..theta.len() {
        let g = grad[i];
        m[i] = p.beta1 * m[i] + (1.0 - p.beta1) * g;
        v[i] = p.beta2 * v[i] + (1.0 - p.beta2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        theta[i] -= p.learning_rate * m_hat / (v_hat.sqrt() + p.eps);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: usize,
    pub l_center: f64,
    pub l_region: f64,
    pub l_z: f64,
    pub l_mass: f64,
    pub l_total: f64,
    pub c: [f64; 3],
}

impl TraceRecord {
    fn new(step: usize, b: &LossBreakdown) -> Self {
        Self {
            step,
            l_center: b.l_center,
            l_region: b.l_region,
            l_z: b.l_z,
            l_mass: b.l_mass,
            l_total: b.l_total,
            c: b.c,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunTrace {
    pub records: Vec<TraceRecord>,
    pub wall_time_secs: f64,
}

impl RunTrace {
    pub fn first(&self) -> Option<&TraceRecord> {
        self.records.first()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r)?);
            out.push('\n');
        }
        Ok(out)
    }
}

/// Runs `config.steps` Adam iterations on the optimization domain.
///
/// The trace holds the loss at step 0, every `log_interval` steps, and at the
/// final step.
pub fn optimize(field: &DensityField, masks: &DomainMasks, config: &OptimConfig) -> Result<(DensityField, RunTrace)> {
    config.validate()?;
    if field.spec() != masks.spec() {
        return Err(Error::InvalidConfig("field and masks use different grids".into()));
    }
    let started = Instant::now();
    let params = config.objective();
    let adam = config.adam();
    let trainable = masks.trainable_indices();

    let mut out = field.clone();
    let mut compact: Vec<f64> = trainable.iter().map(|&i| field.theta()[i]).collect();
    let mut m = vec![0.0; trainable.len()];
    let mut v = vec![0.0; trainable.len()];
    let mut g = vec![0.0; trainable.len()];
    let mut trace = RunTrace::default();

    for step in 0..=config.steps {
        let result = grad_total(out.theta(), masks, &params)?;
        if !result.breakdown.is_finite() {
            return Err(Error::NonFinite { step });
        }
        if step % config.log_interval == 0 || step == config.steps {
            trace.records.push(TraceRecord::new(step, &result.breakdown));
        }
        if step == config.steps {
            break;
        }
        for (k, &idx) in trainable.iter().enumerate() {
            g[k] = result.grad[idx];
        }
        adam_step(&mut compact, &g, &mut m, &mut v, (step + 1) as u32, &adam);
        if compact.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite { step: step + 1 });
        }
        let theta = out.theta_mut();
        for (k, &idx) in trainable.iter().enumerate() {
            theta[idx] = compact[k];
        }
    }
    trace.wall_time_secs = started.elapsed().as_secs_f64();
    log::info!(
        "optimized {} trainable cells for {} steps in {:.2}s",
        trainable.len(),
        config.steps,
        trace.wall_time_secs
    );
    Ok((out, trace))
}
