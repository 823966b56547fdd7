//! Scenario files: a flat key/value format with dotted sections, parsed as
//! TOML. Every key is optional except the plant and controller; omitted
//! sections fall back to defaults.
//!
//! ```text
//! ts = 0.001
//! duration = 15.0
//! secure_until = 5.0
//!
//! plant.num = [9.96e-7, 9.92e-7]
//! plant.den = [1.0, -1.988, 0.9881]
//!
//! controller.kp = 30.2
//! controller.ki = 230.0
//!
//! attack.kind = "gain"
//! attack.gain = 160.0
//! attack.onset = 5.0
//! ```

use serde::Deserialize;

use crate::attack::AttackModel;
use crate::compensate::{GainPolicy, GridSpec, PidGains};
use crate::error::{Error, Result};
use crate::ident::ArxOrders;
use crate::ids::DetectorConfig;
use crate::lti::TransferFunction;
use crate::sim::{
    ArxConfig, CompensatorConfig, ControllerSpec, NoiseSpec, ReferenceSpec, Scenario,
};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    ts: Option<f64>,
    duration: Option<f64>,
    secure_until: Option<f64>,
    feedback_latency: Option<u8>,
    plant: RawTf,
    controller: RawController,
    reference: Option<RawReference>,
    attack: Option<RawAttack>,
    detector: Option<RawDetector>,
    arx: Option<RawArx>,
    compensator: Option<RawCompensator>,
    noise: Option<RawNoise>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTf {
    num: Vec<f64>,
    den: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawController {
    kp: Option<f64>,
    ki: Option<f64>,
    kd: Option<f64>,
    filter_n: Option<f64>,
    num: Option<Vec<f64>>,
    den: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReference {
    amplitude: Option<f64>,
    start: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAttack {
    kind: String,
    onset: Option<f64>,
    gain: Option<f64>,
    num: Option<Vec<f64>>,
    den: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDetector {
    eta: Option<f64>,
    sigma_floor: Option<f64>,
    persistence: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArx {
    output_order: Option<usize>,
    input_order: Option<usize>,
    forgetting: Option<f64>,
    p0: Option<f64>,
    epsilon: Option<f64>,
    window: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCompensator {
    kp_min: Option<f64>,
    kp_max: Option<f64>,
    ki_min: Option<f64>,
    ki_max: Option<f64>,
    steps: Option<usize>,
    policy: Option<String>,
    kp: Option<f64>,
    ki: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    std_dev: f64,
    seed: Option<u64>,
}

/// Parse a scenario from the dotted key/value text format.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let ts = raw.ts.unwrap_or(0.001);
    let plant = TransferFunction::from_coeffs(&raw.plant.num, &raw.plant.den, ts)
        .map_err(|e| Error::Config(format!("plant: {e}")))?;
    let controller = build_controller(&raw.controller, ts)?;
    let attack = build_attack(raw.attack.as_ref(), ts)?;
    let detector = raw
        .detector
        .map(|d| {
            let def = DetectorConfig::default();
            DetectorConfig {
                eta: d.eta.unwrap_or(def.eta),
                sigma_floor: d.sigma_floor.unwrap_or(def.sigma_floor),
                persistence: d.persistence.unwrap_or(def.persistence),
            }
        })
        .unwrap_or_default();
    let arx = build_arx(raw.arx.as_ref())?;
    let compensator = build_compensator(raw.compensator.as_ref())?;
    let reference = raw
        .reference
        .map(|r| ReferenceSpec {
            amplitude: r.amplitude.unwrap_or(1.0),
            start: r.start.unwrap_or(0.0),
        })
        .unwrap_or_default();
    let noise = raw.noise.map(|n| NoiseSpec {
        std_dev: n.std_dev,
        seed: n.seed.unwrap_or(0),
    });

    let scenario = Scenario {
        plant,
        controller,
        attack,
        ts,
        duration: raw.duration.unwrap_or(15.0),
        secure_until: raw.secure_until.unwrap_or(5.0),
        reference,
        detector,
        arx,
        compensator,
        noise,
        feedback_latency: raw.feedback_latency.unwrap_or(0),
        ids_enabled: true,
        compensation_enabled: true,
    };
    scenario
        .validate()
        .map_err(|e| Error::Config(e.to_string()))?;
    Ok(scenario)
}

/// Load a scenario file from disk.
pub fn load_scenario(path: &std::path::Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_scenario(&text)
}

fn build_controller(raw: &RawController, ts: f64) -> Result<ControllerSpec> {
    match (&raw.num, &raw.den, raw.kp) {
        (Some(num), Some(den), None) => {
            let tf = TransferFunction::from_coeffs(num, den, ts)
                .map_err(|e| Error::Config(format!("controller: {e}")))?;
            if raw.ki.is_some() || raw.kd.is_some() {
                return Err(Error::Config(
                    "controller: give either num/den or gains, not both".into(),
                ));
            }
            Ok(ControllerSpec::Tf(tf))
        }
        (None, None, Some(kp)) => {
            let kd = raw.kd.unwrap_or(0.0);
            // the derivative filter only matters with a derivative term
            let filter_default = if kd == 0.0 { 0.0 } else { 100.0 };
            Ok(ControllerSpec::Pid(PidGains {
                kp,
                ki: raw.ki.unwrap_or(0.0),
                kd,
                filter_n: raw.filter_n.unwrap_or(filter_default),
                ts,
            }))
        }
        _ => Err(Error::Config(
            "controller: set either controller.kp (+ki/kd) or controller.num and controller.den"
                .into(),
        )),
    }
}

fn build_attack(raw: Option<&RawAttack>, ts: f64) -> Result<AttackModel> {
    let Some(raw) = raw else {
        return Ok(AttackModel::none());
    };
    match raw.kind.as_str() {
        "none" => Ok(AttackModel::none()),
        "gain" => {
            let g = raw
                .gain
                .ok_or_else(|| Error::Config("attack.gain is required for kind \"gain\"".into()))?;
            let onset = raw
                .onset
                .ok_or_else(|| Error::Config("attack.onset is required".into()))?;
            Ok(AttackModel::gain(g, onset))
        }
        "lti" => {
            let num = raw
                .num
                .as_ref()
                .ok_or_else(|| Error::Config("attack.num is required for kind \"lti\"".into()))?;
            let den = raw
                .den
                .as_ref()
                .ok_or_else(|| Error::Config("attack.den is required for kind \"lti\"".into()))?;
            let onset = raw
                .onset
                .ok_or_else(|| Error::Config("attack.onset is required".into()))?;
            let tf = TransferFunction::from_coeffs(num, den, ts)
                .map_err(|e| Error::Config(format!("attack: {e}")))?;
            Ok(AttackModel::lti(tf, onset))
        }
        other => Err(Error::Config(format!(
            "attack.kind must be \"none\", \"gain\", or \"lti\", got {other:?}"
        ))),
    }
}

fn build_arx(raw: Option<&RawArx>) -> Result<ArxConfig> {
    let def = ArxConfig::default();
    let Some(raw) = raw else { return Ok(def) };
    let orders = ArxOrders::new(
        raw.output_order.unwrap_or(def.orders.l),
        raw.input_order.unwrap_or(def.orders.m),
    )
    .map_err(|e| Error::Config(format!("arx: {e}")))?;
    Ok(ArxConfig {
        orders,
        lambda: raw.forgetting.unwrap_or(def.lambda),
        p0: raw.p0.unwrap_or(def.p0),
        epsilon: raw.epsilon.unwrap_or(def.epsilon),
        window: raw.window.unwrap_or(def.window),
    })
}

fn build_compensator(raw: Option<&RawCompensator>) -> Result<CompensatorConfig> {
    let def = CompensatorConfig::default();
    let Some(raw) = raw else { return Ok(def) };
    let grid_def = GridSpec::default();
    let grid = GridSpec {
        kp_min: raw.kp_min.unwrap_or(grid_def.kp_min),
        kp_max: raw.kp_max.unwrap_or(grid_def.kp_max),
        ki_min: raw.ki_min.unwrap_or(grid_def.ki_min),
        ki_max: raw.ki_max.unwrap_or(grid_def.ki_max),
        steps: raw.steps.unwrap_or(grid_def.steps),
    };
    let policy = match raw.policy.as_deref() {
        None | Some("min-max-root") => GainPolicy::MinMaxRoot,
        Some("explicit") => {
            let kp = raw.kp.ok_or_else(|| {
                Error::Config("compensator.kp is required for the explicit policy".into())
            })?;
            let ki = raw.ki.ok_or_else(|| {
                Error::Config("compensator.ki is required for the explicit policy".into())
            })?;
            GainPolicy::Explicit { kp, ki }
        }
        Some(other) => {
            return Err(Error::Config(format!(
                "compensator.policy must be \"explicit\" or \"min-max-root\", got {other:?}"
            )))
        }
    };
    Ok(CompensatorConfig { grid, policy })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
plant.num = [9.96e-7, 9.92e-7]
plant.den = [1.0, -1.988, 0.9881]
controller.kp = 30.2
controller.ki = 230.0
"#;

    #[test]
    fn minimal_scenario_defaults() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.ts, 0.001);
        assert_eq!(s.duration, 15.0);
        assert_eq!(s.secure_until, 5.0);
        assert!(s.attack.is_none());
        assert_eq!(s.feedback_latency, 0);
        assert_eq!(s.detector.eta, 3.0);
    }

    #[test]
    fn gain_attack_fields_parse() {
        let text =
            format!("{MINIMAL}\nattack.kind = \"gain\"\nattack.gain = 160.0\nattack.onset = 5.0\n");
        let s = parse_scenario(&text).unwrap();
        assert_eq!(s.attack, AttackModel::gain(160.0, 5.0));
    }

    #[test]
    fn lti_attack_requires_num_den() {
        let text = format!("{MINIMAL}\nattack.kind = \"lti\"\nattack.onset = 5.0\n");
        let err = parse_scenario(&text).unwrap_err();
        assert!(err.to_string().contains("attack.num"));
    }

    #[test]
    fn unknown_keys_are_named() {
        let text = format!("{MINIMAL}\ndetector.bogus_key = 1.0\n");
        let err = parse_scenario(&text).unwrap_err();
        assert!(err.to_string().contains("bogus_key"), "{err}");
    }

    #[test]
    fn explicit_policy_needs_gains() {
        let text = format!("{MINIMAL}\ncompensator.policy = \"explicit\"\n");
        let err = parse_scenario(&text).unwrap_err();
        assert!(err.to_string().contains("compensator.kp"));
    }

    #[test]
    fn controller_tf_form() {
        let text = r#"
plant.num = [9.96e-7, 9.92e-7]
plant.den = [1.0, -1.988, 0.9881]
controller.num = [30.2, -29.97]
controller.den = [1.0, -1.0]
"#;
        let s = parse_scenario(text).unwrap();
        match s.controller {
            ControllerSpec::Tf(tf) => assert_eq!(tf.num().coeffs(), &[30.2, -29.97]),
            other => panic!("expected explicit TF, got {other:?}"),
        }
    }

    #[test]
    fn controller_both_forms_rejected() {
        let text = r#"
plant.num = [1.0]
plant.den = [1.0, -0.5]
controller.kp = 1.0
controller.num = [1.0]
controller.den = [1.0, -1.0]
"#;
        assert!(parse_scenario(text).is_err());
    }

    #[test]
    fn invalid_scenario_rejected_at_parse() {
        // attack during the secure phase
        let text =
            format!("{MINIMAL}\nattack.kind = \"gain\"\nattack.gain = 2.0\nattack.onset = 1.0\n");
        let err = parse_scenario(&text).unwrap_err();
        assert!(err.to_string().contains("secure"));
    }
}
