//! Closed-loop orchestrator: steps reference -> controller -> attack
//! channel -> plant -> feedback each sample, runs the parallel reference
//! model for residuals, and sequences secure phase -> detection ->
//! identification -> compensation.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::attack::{AttackChannel, AttackModel};
use crate::compensate::{
    char_poly, pid_tf, select_gains, stability_region, GainPolicy, GridSpec, PidGains,
    StabilityRegion,
};
use crate::error::{Error, Result};
use crate::ident::{regressor_row, theta_to_tf, ArxOrders, ArxTheta, RlsState};
use crate::ids::{fit_secure_stats, Detector, DetectorConfig};
use crate::lti::{is_stable, LtiSimState, TransferFunction};

/// Output magnitude beyond which a run is declared diverged; larger values
/// are recorded and fed back as this sentinel so the run terminates cleanly
/// instead of overflowing.
pub const DIVERGENCE_CLAMP: f64 = 1e9;

/// Reference signal: a step of `amplitude` starting at `start` seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSpec {
    pub amplitude: f64,
    pub start: f64,
}

impl Default for ReferenceSpec {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            start: 0.0,
        }
    }
}

/// Optional additive zero-mean Gaussian measurement noise on the plant
/// output, with a fixed seed for reproducibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub std_dev: f64,
    pub seed: u64,
}

/// Estimator configuration: ARX orders plus the recursive solver knobs and
/// the convergence declaration (|prediction error| < epsilon for `window`
/// consecutive samples).
#[derive(Debug, Clone, PartialEq)]
pub struct ArxConfig {
    pub orders: ArxOrders,
    pub lambda: f64,
    pub p0: f64,
    pub epsilon: f64,
    pub window: u32,
}

impl Default for ArxConfig {
    fn default() -> Self {
        Self {
            orders: ArxOrders { l: 2, m: 2 },
            lambda: 1.0,
            p0: 1e8,
            epsilon: 1e-8,
            window: 20,
        }
    }
}

/// Compensator synthesis configuration: the sweep grid and the selection
/// policy applied once identification completes.
#[derive(Debug, Clone, PartialEq)]
pub struct CompensatorConfig {
    pub grid: GridSpec,
    pub policy: GainPolicy,
}

impl Default for CompensatorConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            policy: GainPolicy::MinMaxRoot,
        }
    }
}

/// The loop controller: either PID gains or an explicit transfer function.
#[derive(Debug, Clone, PartialEq)]
pub enum ControllerSpec {
    Pid(PidGains),
    Tf(TransferFunction),
}

impl ControllerSpec {
    pub fn to_tf(&self) -> Result<TransferFunction> {
        match self {
            ControllerSpec::Pid(g) => pid_tf(g),
            ControllerSpec::Tf(tf) => Ok(tf.clone()),
        }
    }
}

/// Complete description of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub plant: TransferFunction,
    pub controller: ControllerSpec,
    pub attack: AttackModel,
    pub ts: f64,
    pub duration: f64,
    pub secure_until: f64,
    pub reference: ReferenceSpec,
    pub detector: DetectorConfig,
    pub arx: ArxConfig,
    pub compensator: CompensatorConfig,
    pub noise: Option<NoiseSpec>,
    /// 0: the controller sees the current output sample (ideal sampled
    /// loop, matches the closed-loop algebra of the characteristic
    /// polynomial); 1: the controller sees the previous output sample.
    pub feedback_latency: u8,
    pub ids_enabled: bool,
    pub compensation_enabled: bool,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.ts > 0.0) {
            return Err(Error::Scenario(format!(
                "ts must be positive, got {}",
                self.ts
            )));
        }
        if self.plant.ts() != self.ts {
            return Err(Error::Scenario(format!(
                "plant sample time {} differs from scenario ts {}",
                self.plant.ts(),
                self.ts
            )));
        }
        if !self.plant.is_strictly_proper() {
            return Err(Error::Scenario(
                "plant must be strictly proper (the loop has no algebraic path)".into(),
            ));
        }
        let ctrl = self.controller.to_tf()?;
        if ctrl.ts() != self.ts {
            return Err(Error::Scenario(format!(
                "controller sample time {} differs from scenario ts {}",
                ctrl.ts(),
                self.ts
            )));
        }
        if !(self.duration > 0.0) {
            return Err(Error::Scenario("duration must be positive".into()));
        }
        if self.secure_until < 2.0 * self.ts {
            return Err(Error::Scenario(
                "secure phase must cover at least two samples".into(),
            ));
        }
        if self.secure_until >= self.duration {
            return Err(Error::Scenario(
                "secure phase must end before the run does".into(),
            ));
        }
        if !self.attack.is_none() {
            // the attack must not fall inside the secure learning window
            if self.attack.onset < self.secure_until {
                return Err(Error::Scenario(format!(
                    "attack onset {} falls inside the secure phase (until {})",
                    self.attack.onset, self.secure_until
                )));
            }
            if self.attack.onset > self.duration {
                return Err(Error::Scenario(format!(
                    "attack onset {} is past the end of the run ({})",
                    self.attack.onset, self.duration
                )));
            }
        }
        if self.feedback_latency > 1 {
            return Err(Error::Scenario(format!(
                "feedback latency must be 0 or 1, got {}",
                self.feedback_latency
            )));
        }
        if !(self.arx.lambda > 0.0 && self.arx.lambda <= 1.0) {
            return Err(Error::Scenario(format!(
                "arx.lambda must lie in (0, 1], got {}",
                self.arx.lambda
            )));
        }
        if !(self.arx.p0 > 0.0) || !(self.arx.epsilon > 0.0) || self.arx.window < 1 {
            return Err(Error::Scenario(
                "arx.p0 and arx.epsilon must be positive, arx.window >= 1".into(),
            ));
        }
        if let Some(n) = &self.noise {
            if n.std_dev < 0.0 {
                return Err(Error::Scenario("noise.std_dev must be >= 0".into()));
            }
        }
        self.detector.validate()?;
        self.compensator.grid.validate()?;
        Ok(())
    }

    pub fn sample_count(&self) -> usize {
        (self.duration / self.ts).round() as usize
    }
}

/// One per-sample record.
#[derive(Debug, Clone, Serialize)]
pub struct SimRecord {
    pub t: f64,
    pub r: f64,
    pub e: f64,
    pub u: f64,
    pub u_attacked: f64,
    pub y: f64,
    pub y_model: f64,
    pub residual: f64,
    pub ids_flag: bool,
    pub controller_id: u8,
    /// Estimate snapshot [a..., b...] on samples where the estimator ran.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
}

/// Pipeline milestones of one run.
#[derive(Debug, Clone, Default)]
pub struct SimEvents {
    pub thresholds: Option<(f64, f64)>,
    pub detection_time: Option<f64>,
    pub identification_complete_time: Option<f64>,
    pub identification_failed: bool,
    pub final_prediction_error: Option<f64>,
    pub identified_tf: Option<TransferFunction>,
    pub identified_theta: Option<ArxTheta>,
    pub selected_gains: Option<PidGains>,
    /// Whether the selected gains passed the stability check against the
    /// identified model. Explicitly configured gains are applied either
    /// way; this records the verdict.
    pub compensator_verified: Option<bool>,
    pub compensation_error: Option<String>,
    pub swap_time: Option<f64>,
    pub diverged: bool,
}

/// Full run output: per-sample records, events, and the stability region
/// computed from the identified model when compensation ran.
#[derive(Debug, Clone)]
pub struct SimLog {
    pub ts: f64,
    pub attack_onset: Option<f64>,
    pub reference_amplitude: f64,
    pub records: Vec<SimRecord>,
    pub events: SimEvents,
    pub region: Option<StabilityRegion>,
}

/// Recursive estimator driven by post-detection samples only. The buffers
/// start at the detection instant: regressor rows never reach back into
/// data produced before the detector fired.
struct Estimator {
    rls: RlsState,
    orders: ArxOrders,
    epsilon: f64,
    window: u32,
    u: Vec<f64>,
    y: Vec<f64>,
    consecutive: u32,
    last_error: Option<f64>,
    done: bool,
}

impl Estimator {
    fn new(cfg: &ArxConfig) -> Result<Self> {
        Ok(Self {
            rls: RlsState::new(cfg.orders, cfg.lambda, cfg.p0)?,
            orders: cfg.orders,
            epsilon: cfg.epsilon,
            window: cfg.window,
            u: Vec::new(),
            y: Vec::new(),
            consecutive: 0,
            last_error: None,
            done: false,
        })
    }

    /// Feed one sample; runs an RLS update once enough lags are buffered.
    /// Returns the current estimate when an update happened.
    fn push(&mut self, u: f64, y: f64) -> Option<DVector<f64>> {
        if self.done {
            return None;
        }
        self.u.push(u);
        self.y.push(y);
        let k = self.u.len() - 1;
        if k < self.orders.max_lag() {
            return None;
        }
        let phi = regressor_row(&self.u, &self.y, k, self.orders);
        let err = self.rls.update(&phi, y);
        self.last_error = Some(err);
        if err.abs() < self.epsilon {
            self.consecutive += 1;
            if self.consecutive >= self.window {
                self.done = true;
            }
        } else {
            self.consecutive = 0;
        }
        let theta = self.rls.theta();
        Some(DVector::from_iterator(
            self.orders.param_count(),
            theta.a().iter().chain(theta.b()).copied(),
        ))
    }
}

/// Execute a scenario. Deterministic: identical scenarios (and noise seed)
/// give identical logs.
pub fn run_scenario(s: &Scenario) -> Result<SimLog> {
    s.validate()?;
    let n = s.sample_count();
    let secure_idx = (s.secure_until / s.ts).round() as usize;
    let ref_idx = (s.reference.start / s.ts).round() as usize;

    let mut plant = LtiSimState::new(&s.plant);
    let mut model = LtiSimState::new(&s.plant);
    let mut controller = LtiSimState::new(&s.controller.to_tf()?);
    let mut substitute: Option<LtiSimState> = None;
    let mut channel = AttackChannel::new(&s.attack, s.ts)?;
    let mut detector = Detector::new(s.detector.clone())?;
    let mut noise = s
        .noise
        .filter(|n| n.std_dev > 0.0)
        .map(|n| -> Result<_> {
            let dist =
                Normal::new(0.0, n.std_dev).map_err(|e| Error::Scenario(format!("noise: {e}")))?;
            Ok((ChaCha8Rng::seed_from_u64(n.seed), dist))
        })
        .transpose()?;

    let mut secure_buf: Vec<f64> = Vec::with_capacity(secure_idx);
    let mut estimator: Option<Estimator> = None;
    let mut events = SimEvents::default();
    let mut region: Option<StabilityRegion> = None;
    let mut records: Vec<SimRecord> = Vec::with_capacity(n + 1);
    let mut active: u8 = 0;
    let mut swap_at: Option<usize> = None;
    let mut y_prev = 0.0;

    for k in 0..=n {
        let t = k as f64 * s.ts;
        if swap_at == Some(k) {
            active = 1;
        }
        let r = if k >= ref_idx {
            s.reference.amplitude
        } else {
            0.0
        };

        // plant and model outputs for this instant; both are strictly
        // proper, so neither depends on the current input
        let mut y = plant.history_response();
        if let Some((rng, dist)) = noise.as_mut() {
            y += dist.sample(rng);
        }
        if y.abs() > DIVERGENCE_CLAMP {
            events.diverged = true;
            y = DIVERGENCE_CLAMP.copysign(y);
        }
        let y_model = model.history_response();
        let residual = y - y_model;

        let feedback = if s.feedback_latency == 0 { y } else { y_prev };
        let e = r - feedback;
        let u = match active {
            0 => controller.step(e),
            _ => substitute.as_mut().expect("substitute installed").step(e),
        };
        let u_attacked = channel.apply(u, k);
        plant.push(u_attacked, y);
        model.push(u, y_model);

        // detection
        if s.ids_enabled {
            if k < secure_idx {
                secure_buf.push(residual);
            } else {
                if !detector.is_armed() {
                    let stats = fit_secure_stats(&secure_buf)?;
                    detector.arm(stats);
                    events.thresholds = detector.band();
                }
                let was_flagged = detector.is_flagged();
                detector.step(residual, t)?;
                if !was_flagged && detector.is_flagged() {
                    events.detection_time = detector.detection_time();
                    if s.compensation_enabled {
                        estimator = Some(Estimator::new(&s.arx)?);
                    }
                }
            }
        }

        // identification and, on convergence, compensator synthesis
        let mut theta_snapshot = None;
        if let Some(est) = estimator.as_mut() {
            if !est.done {
                if let Some(theta) = est.push(u, y) {
                    theta_snapshot = Some(theta.as_slice().to_vec());
                }
                if est.done {
                    events.identification_complete_time = Some(t);
                    events.final_prediction_error = est.last_error.map(f64::abs);
                    let theta = est.rls.theta();
                    let g_hat = theta_to_tf(&theta, s.ts)?;
                    events.identified_theta = Some(theta);
                    events.identified_tf = Some(g_hat.clone());
                    match synthesize(&g_hat, &s.compensator) {
                        Ok((gains, verified, reg)) => {
                            events.selected_gains = Some(gains);
                            events.compensator_verified = Some(verified);
                            region = Some(reg);
                            substitute = Some(LtiSimState::new(&pid_tf(&gains)?));
                            swap_at = Some(k + 1);
                            events.swap_time = Some((k + 1) as f64 * s.ts);
                        }
                        Err(err) => {
                            events.compensation_error = Some(err.to_string());
                        }
                    }
                }
            }
        }

        records.push(SimRecord {
            t,
            r,
            e,
            u,
            u_attacked,
            y,
            y_model,
            residual,
            ids_flag: detector.is_flagged(),
            controller_id: active,
            theta: theta_snapshot,
        });
        y_prev = y;
    }

    if estimator.as_ref().is_some_and(|e| !e.done) {
        events.identification_failed = true;
        events.final_prediction_error = estimator.as_ref().and_then(|e| e.last_error).map(f64::abs);
    }

    Ok(SimLog {
        ts: s.ts,
        attack_onset: (!s.attack.is_none()).then_some(s.attack.onset),
        reference_amplitude: s.reference.amplitude,
        records,
        events,
        region,
    })
}

/// Region sweep plus gain selection against the identified model.
///
/// Explicitly configured gains are authoritative (they reproduce a known
/// working configuration) and are applied even when the stability check
/// against the identified model fails; the verdict is recorded. The
/// autonomous min-max-root policy only ever returns verified gains.
fn synthesize(
    g_hat: &TransferFunction,
    cfg: &CompensatorConfig,
) -> Result<(PidGains, bool, StabilityRegion)> {
    let region = stability_region(g_hat, &cfg.grid)?;
    match &cfg.policy {
        GainPolicy::Explicit { kp, ki } => {
            let gains = PidGains::pi(*kp, *ki, g_hat.ts());
            let verified = pid_tf(&gains)
                .and_then(|c| char_poly(g_hat, &c))
                .and_then(|p| is_stable(&p))
                .unwrap_or(false);
            Ok((gains, verified, region))
        }
        GainPolicy::MinMaxRoot => {
            let gains = select_gains(&region, g_hat, &GainPolicy::MinMaxRoot)?;
            Ok((gains, true, region))
        }
    }
}

/// Condensed post-run report.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryReport {
    pub detection_time: Option<f64>,
    /// detection_time minus attack onset, when both exist.
    pub detection_latency: Option<f64>,
    pub identification_complete_time: Option<f64>,
    pub identification_failed: bool,
    pub final_prediction_error: Option<f64>,
    pub identified_num: Option<Vec<f64>>,
    pub identified_den: Option<Vec<f64>>,
    pub selected_kp: Option<f64>,
    pub selected_ki: Option<f64>,
    pub compensator_verified: Option<bool>,
    pub compensation_error: Option<String>,
    pub swap_time: Option<f64>,
    pub peak_output: f64,
    /// Mean |r - y| over the final 5% of samples.
    pub steady_state_error: f64,
    pub diverged: bool,
}

/// Reduce a log to its summary.
pub fn summarize(log: &SimLog) -> SummaryReport {
    let records = &log.records;
    let peak = records.iter().map(|r| r.y.abs()).fold(0.0, f64::max);
    let tail = ((records.len() as f64) * 0.05) as usize;
    let tail = tail.max(1);
    let sse = records[records.len() - tail..]
        .iter()
        .map(|rec| (rec.r - rec.y).abs())
        .sum::<f64>()
        / tail as f64;
    let ev = &log.events;
    SummaryReport {
        detection_time: ev.detection_time,
        detection_latency: match (ev.detection_time, log.attack_onset) {
            (Some(d), Some(o)) => Some(d - o),
            _ => None,
        },
        identification_complete_time: ev.identification_complete_time,
        identification_failed: ev.identification_failed,
        final_prediction_error: ev.final_prediction_error,
        identified_num: ev
            .identified_tf
            .as_ref()
            .map(|tf| tf.num().coeffs().to_vec()),
        identified_den: ev
            .identified_tf
            .as_ref()
            .map(|tf| tf.den().coeffs().to_vec()),
        selected_kp: ev.selected_gains.map(|g| g.kp),
        selected_ki: ev.selected_gains.map(|g| g.ki),
        compensator_verified: ev.compensator_verified,
        compensation_error: ev.compensation_error.clone(),
        swap_time: ev.swap_time,
        peak_output: peak,
        steady_state_error: sse,
        diverged: ev.diverged,
    }
}

impl SimLog {
    /// `|r - y|` at the sample nearest to time `t`.
    pub fn error_at(&self, t: f64) -> Option<f64> {
        let idx = (t / self.ts).round() as usize;
        self.records.get(idx).map(|r| (r.r - r.y).abs())
    }

    /// Largest |y| over samples with t >= `from`.
    pub fn peak_after(&self, from: f64) -> f64 {
        let idx = (from / self.ts).round() as usize;
        self.records[idx.min(self.records.len() - 1)..]
            .iter()
            .map(|r| r.y.abs())
            .fold(0.0, f64::max)
    }

    /// Write the per-sample CSV. Floats use the shortest round-trip
    /// representation, so re-running the same scenario reproduces the file
    /// byte for byte.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "t,r,e,u,u_attacked,y,y_model,residual,ids_flag,controller_id"
        )?;
        for rec in &self.records {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                rec.t,
                rec.r,
                rec.e,
                rec.u,
                rec.u_attacked,
                rec.y,
                rec.y_model,
                rec.residual,
                u8::from(rec.ids_flag),
                rec.controller_id
            )?;
        }
        Ok(())
    }
}
