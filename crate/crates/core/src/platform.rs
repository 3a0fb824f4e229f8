//! VM catalog and the closed-form energy and reliability kernel.
//!
//! Frequencies are normalized to `(0, 1]`. A VM type with compute power
//! `cp` (MIPS at `f = 1`) running at frequency `f` executes `wc` MI in
//! `wc / (cp * f)` seconds and draws `alpha + beta * f^3` watts.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlatformError {
    #[error("catalog has no VM types")]
    Empty,
    #[error("duplicate VM type name `{0}`")]
    DuplicateName(String),
    #[error("VM type `{name}`: {reason}")]
    Invalid { name: String, reason: String },
    #[error("cannot parse catalog: {0}")]
    Parse(String),
    #[error("cannot read catalog: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VmType {
    pub name: String,
    /// Compute power in MIPS at normalized frequency 1.
    pub cp: f64,
    /// Static power (W).
    pub alpha: f64,
    /// Dynamic power coefficient (W).
    pub beta: f64,
    /// Normalized frequency levels, strictly ascending, each in (0, 1].
    pub freqs: Vec<f64>,
    /// Failure rate per second at the maximum frequency.
    pub r0: f64,
    /// Hardware reliability coefficient.
    pub psi: f64,
}

impl VmType {
    fn validate(&self) -> Result<(), PlatformError> {
        let bad = |reason: &str| PlatformError::Invalid { name: self.name.clone(), reason: reason.into() };
        if !(self.cp > 0.0) {
            return Err(bad("cp must be positive"));
        }
        if !(self.alpha >= 0.0) {
            return Err(bad("alpha must be non-negative"));
        }
        if !(self.beta > 0.0) {
            return Err(bad("beta must be positive"));
        }
        if !(self.r0 > 0.0) {
            return Err(bad("r0 must be positive"));
        }
        if !(self.psi > 0.0) {
            return Err(bad("psi must be positive"));
        }
        if self.freqs.is_empty() {
            return Err(bad("at least one frequency level is required"));
        }
        if self.freqs.iter().any(|&f| !(f > 0.0 && f <= 1.0)) {
            return Err(bad("frequencies must lie in (0, 1]"));
        }
        if self.freqs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(bad("frequencies must be strictly ascending"));
        }
        Ok(())
    }

    pub fn f_max(&self) -> f64 {
        *self.freqs.last().expect("validated non-empty")
    }

    pub fn f_min(&self) -> f64 {
        self.freqs[0]
    }

    pub fn levels(&self) -> usize {
        self.freqs.len()
    }

    pub fn power(&self, f: f64) -> f64 {
        self.alpha + self.beta * f * f * f
    }

    /// `r0 * 10^(psi * (f_max - f) / (f_max - f_min))`; a single-level VM
    /// always fails at `r0`.
    pub fn failure_rate(&self, f: f64) -> f64 {
        let span = self.f_max() - self.f_min();
        if self.levels() < 2 || span <= 0.0 {
            return self.r0;
        }
        self.r0 * 10f64.powf(self.psi * (self.f_max() - f) / span)
    }

    /// Energy per MI at frequency `f`.
    pub fn energy_per_mi(&self, f: f64) -> f64 {
        self.power(f) / (self.cp * f)
    }
}

/// `(alpha / (2 beta))^(1/3)`, not clamped to the VM's frequency set.
pub fn critical_frequency(vm: &VmType) -> f64 {
    (vm.alpha / (2.0 * vm.beta)).cbrt()
}

/// A VM type and one of its frequency levels, by index into a [`Platform`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExecContext {
    pub vm: usize,
    pub level: usize,
}

impl ExecContext {
    pub fn new(vm: usize, level: usize) -> Self {
        Self { vm, level }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Platform {
    pub vm_types: Vec<VmType>,
}

impl Platform {
    pub fn new(vm_types: Vec<VmType>) -> Result<Self, PlatformError> {
        if vm_types.is_empty() {
            return Err(PlatformError::Empty);
        }
        for (i, vm) in vm_types.iter().enumerate() {
            vm.validate()?;
            if vm_types[..i].iter().any(|o| o.name == vm.name) {
                return Err(PlatformError::DuplicateName(vm.name.clone()));
            }
        }
        Ok(Self { vm_types })
    }

    pub fn from_json(text: &str) -> Result<Self, PlatformError> {
        let p: Platform = serde_json::from_str(text).map_err(|e| PlatformError::Parse(e.to_string()))?;
        Self::new(p.vm_types)
    }

    pub fn from_toml(text: &str) -> Result<Self, PlatformError> {
        let p: Platform = toml::from_str(text).map_err(|e| PlatformError::Parse(e.to_string()))?;
        Self::new(p.vm_types)
    }

    /// Loads a catalog; `.toml` files are read as TOML, everything else as JSON.
    pub fn load(path: &Path) -> Result<Self, PlatformError> {
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => Self::from_toml(&text),
            _ => Self::from_json(&text),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("catalog serializes")
    }

    pub fn len(&self) -> usize {
        self.vm_types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vm_types.is_empty()
    }

    pub fn vm(&self, ctx: ExecContext) -> &VmType {
        &self.vm_types[ctx.vm]
    }

    pub fn freq(&self, ctx: ExecContext) -> f64 {
        self.vm_types[ctx.vm].freqs[ctx.level]
    }

    pub fn is_valid(&self, ctx: ExecContext) -> bool {
        ctx.vm < self.len() && ctx.level < self.vm_types[ctx.vm].levels()
    }

    /// Compute power times frequency.
    pub fn speed(&self, ctx: ExecContext) -> f64 {
        self.vm(ctx).cp * self.freq(ctx)
    }

    /// The fastest context: the VM with the largest `cp * f_max`, at `f_max`.
    /// Ties go to the lower index.
    pub fn best_context(&self) -> ExecContext {
        let mut best = ExecContext::new(0, self.vm_types[0].levels() - 1);
        for (l, vm) in self.vm_types.iter().enumerate().skip(1) {
            let ctx = ExecContext::new(l, vm.levels() - 1);
            if self.speed(ctx) > self.speed(best) {
                best = ctx;
            }
        }
        best
    }

    pub fn best_speed(&self) -> f64 {
        self.speed(self.best_context())
    }

    pub fn slowest_speed(&self) -> f64 {
        self.contexts().map(|c| self.speed(c)).fold(f64::INFINITY, f64::min)
    }

    /// Every (VM, level) pair in index order.
    pub fn contexts(&self) -> impl Iterator<Item = ExecContext> + '_ {
        self.vm_types
            .iter()
            .enumerate()
            .flat_map(|(l, vm)| (0..vm.levels()).map(move |k| ExecContext::new(l, k)))
    }
}

pub fn power_draw(p: &Platform, ctx: ExecContext) -> f64 {
    p.vm(ctx).power(p.freq(ctx))
}

pub fn execution_time(p: &Platform, wc: f64, ctx: ExecContext) -> f64 {
    wc / p.speed(ctx)
}

pub fn task_energy(p: &Platform, wc: f64, ctx: ExecContext) -> f64 {
    power_draw(p, ctx) * execution_time(p, wc, ctx)
}

pub fn failure_rate(p: &Platform, ctx: ExecContext) -> f64 {
    p.vm(ctx).failure_rate(p.freq(ctx))
}

/// `exp(-r(f) * tau)`, or `1 - (1 - R)^2` with a same-frequency replica.
pub fn task_reliability(p: &Platform, wc: f64, ctx: ExecContext, replicated: bool) -> f64 {
    let r = (-failure_rate(p, ctx) * execution_time(p, wc, ctx)).exp();
    if replicated {
        replicate(r)
    } else {
        r
    }
}

pub fn replicate(r: f64) -> f64 {
    let q = 1.0 - r;
    1.0 - q * q
}

/// Natural log of [`task_reliability`], computed without underflow for
/// the unreplicated case.
pub fn task_log_reliability(p: &Platform, wc: f64, ctx: ExecContext, replicated: bool) -> f64 {
    let hazard = failure_rate(p, ctx) * execution_time(p, wc, ctx);
    if replicated {
        // 1 - (1 - e^-h)^2 = e^-h (2 - e^-h)
        let e = (-hazard).exp();
        -hazard + (2.0 - e).ln()
    } else {
        -hazard
    }
}

/// Product of per-task effective reliabilities, accumulated in log space.
pub fn workflow_reliability<I: IntoIterator<Item = f64>>(per_task: I) -> f64 {
    per_task.into_iter().map(f64::ln).sum::<f64>().exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vm(alpha: f64, beta: f64, cp: f64, freqs: &[f64]) -> VmType {
        VmType { name: "vm".into(), cp, alpha, beta, freqs: freqs.to_vec(), r0: 1e-4, psi: 3.0 }
    }

    fn single(v: VmType) -> Platform {
        Platform::new(vec![v]).unwrap()
    }

    #[test]
    fn power_examples() {
        assert_eq!(vm(25.0, 100.0, 5.0, &[0.5, 1.0]).power(0.5), 37.5);
        assert_eq!(vm(50.0, 128.0, 8.0, &[0.5, 1.0]).power(1.0), 178.0);
        assert_eq!(vm(50.0, 128.0, 8.0, &[0.5, 1.0]).power(0.0), 50.0);
    }

    #[test]
    fn execution_time_examples() {
        let p = single(vm(50.0, 128.0, 8.0, &[0.5, 1.0]));
        assert_eq!(execution_time(&p, 8.0, ExecContext::new(0, 1)), 1.0);
        assert_eq!(execution_time(&p, 24.0, ExecContext::new(0, 0)), 6.0);
        // cp = 5, f = 0.5 runs 20 MI in 8 s under the cp*f rule
        let p = single(vm(25.0, 100.0, 5.0, &[0.5, 1.0]));
        assert_eq!(execution_time(&p, 20.0, ExecContext::new(0, 0)), 8.0);
    }

    #[test]
    fn energy_examples() {
        let p = single(vm(50.0, 128.0, 8.0, &[0.5, 1.0]));
        assert_eq!(task_energy(&p, 24.0, ExecContext::new(0, 0)), 396.0);
        assert_eq!(task_energy(&p, 8.0, ExecContext::new(0, 1)), 178.0);
        assert!(task_energy(&p, 1e-12, ExecContext::new(0, 1)) < 1e-9);
        // worked illustration with the stated run times of 4 and 2 units
        let v = vm(25.0, 100.0, 5.0, &[0.5, 1.0]);
        assert_eq!(4.0 * v.power(0.5), 150.0);
        assert_eq!(2.0 * v.power(1.0), 250.0);
    }

    #[test]
    fn failure_rate_examples() {
        let mut v = vm(1.0, 1.0, 1.0, &[0.2, 0.6, 1.0]);
        v.r0 = 1e-5;
        v.psi = 4.0;
        assert_eq!(v.failure_rate(1.0), 1e-5);
        let oracle = 1e-5 * 10f64.powf(4.0 * (1.0 - 0.6) / (1.0 - 0.2));
        assert!((v.failure_rate(0.6) - oracle).abs() < 1e-18);
        assert!((v.failure_rate(0.6) - 1e-3).abs() < 1e-15);
        v.psi = 3.0;
        assert!((v.failure_rate(0.2) - 1e-2).abs() < 1e-15);

        let single_level = vm(1.0, 1.0, 1.0, &[0.7]);
        assert_eq!(single_level.failure_rate(0.7), single_level.r0);
    }

    #[test]
    fn reliability_examples() {
        let mut v = vm(50.0, 128.0, 8.0, &[0.5, 1.0]);
        v.r0 = 1e-4;
        let p = single(v);
        let r = task_reliability(&p, 8.0, ExecContext::new(0, 1), false);
        assert!((r - (-1e-4f64).exp()).abs() < 1e-15);
        assert!((r - 0.99990).abs() < 1e-5);
        assert!((replicate(0.99) - 0.9999).abs() < 1e-12);
        let lr = task_log_reliability(&p, 8.0, ExecContext::new(0, 0), true);
        let direct = task_reliability(&p, 8.0, ExecContext::new(0, 0), true).ln();
        assert!((lr - direct).abs() < 1e-12);
    }

    #[test]
    fn workflow_reliability_examples() {
        assert_eq!(workflow_reliability(std::iter::empty()), 1.0);
        assert!((workflow_reliability([0.99, 0.98]) - 0.9702).abs() < 1e-12);
        let oracle: f64 = (0..100).fold(1.0, |acc, _| acc * 0.9999);
        assert!((workflow_reliability(std::iter::repeat_n(0.9999, 100)) - oracle).abs() < 1e-9);
        assert!((oracle - 0.99005).abs() < 1e-5);
    }

    #[test]
    fn critical_frequencies() {
        assert_eq!(critical_frequency(&vm(25.0, 100.0, 1.0, &[1.0])), 0.5);
        assert!((critical_frequency(&vm(50.0, 128.0, 1.0, &[1.0])) - 0.580).abs() <= 0.002);
        assert!((critical_frequency(&vm(40.0, 64.0, 1.0, &[1.0])) - 0.679).abs() <= 0.002);
    }

    #[test]
    fn catalog_validation() {
        assert!(matches!(Platform::new(vec![]), Err(PlatformError::Empty)));
        let a = vm(1.0, 1.0, 1.0, &[0.5, 1.0]);
        assert!(matches!(Platform::new(vec![a.clone(), a.clone()]), Err(PlatformError::DuplicateName(_))));
        let mut b = a.clone();
        b.freqs = vec![1.0, 0.5];
        assert!(matches!(Platform::new(vec![b]), Err(PlatformError::Invalid { .. })));
        let mut c = a.clone();
        c.freqs = vec![0.0, 1.0];
        assert!(Platform::new(vec![c]).is_err());
        let mut d = a;
        d.beta = 0.0;
        assert!(Platform::new(vec![d]).is_err());
    }

    #[test]
    fn catalog_formats_agree() {
        let json = r#"{"vm_types":[{"name":"a","cp":8,"alpha":50,"beta":128,"freqs":[0.5,1.0],"r0":1e-6,"psi":3}]}"#;
        let toml = "[[vm_types]]\nname = \"a\"\ncp = 8.0\nalpha = 50.0\nbeta = 128.0\nfreqs = [0.5, 1.0]\nr0 = 1e-6\npsi = 3.0\n";
        assert_eq!(Platform::from_json(json).unwrap(), Platform::from_toml(toml).unwrap());
    }

    #[test]
    fn best_context_prefers_fastest() {
        let p = Platform::new(vec![
            VmType { name: "slow".into(), ..vm(1.0, 1.0, 2.0, &[0.5, 1.0]) },
            VmType { name: "fast".into(), ..vm(1.0, 1.0, 8.0, &[0.5, 1.0]) },
        ])
        .unwrap();
        assert_eq!(p.best_context(), ExecContext::new(1, 1));
        assert_eq!(p.best_speed(), 8.0);
        assert_eq!(p.slowest_speed(), 1.0);
        assert_eq!(p.contexts().count(), 4);
    }
}
