//! Discrete PI/PID construction, closed-loop characteristic polynomials,
//! stability-region sweeps over (kp, ki), and gain selection.

use std::io::Write;

use crate::error::{Error, Result};
use crate::lti::{is_stable, max_root_modulus, Polynomial, TransferFunction};

/// PID gains for the discrete controller
/// C(z) = kp + ki·Ts/(z-1) + kd·N/(1 + N·Ts/(z-1)).
///
/// With kd = 0 this reduces to the PI form
/// C(z) = (kp·z + (ki·Ts - kp))/(z - 1) and `filter_n` is irrelevant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Derivative filter coefficient; only meaningful when kd != 0.
    pub filter_n: f64,
    pub ts: f64,
}

impl PidGains {
    pub fn pi(kp: f64, ki: f64, ts: f64) -> Self {
        Self {
            kp,
            ki,
            kd: 0.0,
            filter_n: 0.0,
            ts,
        }
    }

    pub fn pid(kp: f64, ki: f64, kd: f64, filter_n: f64, ts: f64) -> Self {
        Self {
            kp,
            ki,
            kd,
            filter_n,
            ts,
        }
    }
}

/// Controller transfer function for the given gains.
///
/// No pole-zero cancellation is attempted; a pure-proportional controller
/// still carries the (z-1)/(z-1) pair and evaluates to kp everywhere else.
pub fn pid_tf(gains: &PidGains) -> Result<TransferFunction> {
    if !(gains.ts > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "controller sample time must be positive, got {}",
            gains.ts
        )));
    }
    let z_minus_1 = Polynomial::new(vec![1.0, -1.0]);
    if gains.kd == 0.0 {
        let num = Polynomial::new(vec![gains.kp, gains.ki * gains.ts - gains.kp]);
        return TransferFunction::new(num, z_minus_1, gains.ts);
    }
    // filtered derivative: kd·N·(z-1)/(z - 1 + N·Ts); combine the three terms
    // over den = (z-1)(z - 1 + N·Ts)
    let deriv_den = Polynomial::new(vec![1.0, gains.filter_n * gains.ts - 1.0]);
    let den = &z_minus_1 * &deriv_den;
    let p_term = (&z_minus_1 * &deriv_den).scale(gains.kp);
    let i_term = deriv_den.scale(gains.ki * gains.ts);
    let d_term = (&z_minus_1 * &z_minus_1).scale(gains.kd * gains.filter_n);
    let num = &(&p_term + &i_term) + &d_term;
    TransferFunction::new(num, den, gains.ts)
}

/// Closed-loop characteristic polynomial den_G·den_C + num_G·num_C,
/// normalized monic. A degree-0 result (static loop) is flagged as
/// degenerate rather than returned.
pub fn char_poly(g: &TransferFunction, c: &TransferFunction) -> Result<Polynomial> {
    if g.ts() != c.ts() {
        return Err(Error::SampleTimeMismatch(g.ts(), c.ts()));
    }
    let p = &(g.den() * c.den()) + &(g.num() * c.num());
    if p.is_zero() || p.degree() == 0 {
        return Err(Error::DegeneratePolynomial(format!(
            "characteristic polynomial has no dynamics: {:?}",
            p.coeffs()
        )));
    }
    Ok(p.monic())
}

/// Uniform (kp, ki) grid for a stability sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub kp_min: f64,
    pub kp_max: f64,
    pub ki_min: f64,
    pub ki_max: f64,
    /// Grid points per axis.
    pub steps: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            kp_min: 0.0,
            kp_max: 5000.0,
            ki_min: 0.0,
            ki_max: 5000.0,
            steps: 200,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 2 steps per axis, got {}",
                self.steps
            )));
        }
        if !(self.kp_max > self.kp_min) || !(self.ki_max > self.ki_min) {
            return Err(Error::InvalidParameter(
                "grid ranges must have positive extent".into(),
            ));
        }
        Ok(())
    }

    fn axis(min: f64, max: f64, steps: usize) -> Vec<f64> {
        let h = (max - min) / (steps - 1) as f64;
        (0..steps).map(|i| min + h * i as f64).collect()
    }
}

/// Boolean stability mask over a gain grid, with optional per-cell
/// max-root-modulus margins.
#[derive(Debug, Clone)]
pub struct StabilityRegion {
    kp_axis: Vec<f64>,
    ki_axis: Vec<f64>,
    /// Row-major over (kp index, ki index).
    mask: Vec<bool>,
    margin: Option<Vec<f64>>,
}

impl StabilityRegion {
    pub fn kp_axis(&self) -> &[f64] {
        &self.kp_axis
    }

    pub fn ki_axis(&self) -> &[f64] {
        &self.ki_axis
    }

    pub fn is_stable_cell(&self, kp_idx: usize, ki_idx: usize) -> bool {
        self.mask[kp_idx * self.ki_axis.len() + ki_idx]
    }

    pub fn margin_at(&self, kp_idx: usize, ki_idx: usize) -> Option<f64> {
        self.margin
            .as_ref()
            .map(|m| m[kp_idx * self.ki_axis.len() + ki_idx])
    }

    pub fn stable_count(&self) -> usize {
        self.mask.iter().filter(|&&s| s).count()
    }

    pub fn cell_count(&self) -> usize {
        self.mask.len()
    }

    /// Index of the grid cell nearest to the given gains.
    pub fn nearest_cell(&self, kp: f64, ki: f64) -> (usize, usize) {
        let nearest = |axis: &[f64], v: f64| {
            axis.iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| (*a - v).abs().partial_cmp(&(*b - v).abs()).unwrap())
                .map(|(i, _)| i)
                .unwrap()
        };
        (nearest(&self.kp_axis, kp), nearest(&self.ki_axis, ki))
    }

    /// Write `kp,ki,stable` rows, kp-major, one per cell.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "kp,ki,stable")?;
        for (i, kp) in self.kp_axis.iter().enumerate() {
            for (j, ki) in self.ki_axis.iter().enumerate() {
                writeln!(w, "{},{},{}", kp, ki, u8::from(self.is_stable_cell(i, j)))?;
            }
        }
        Ok(())
    }
}

fn sweep(g: &TransferFunction, grid: &GridSpec, with_margin: bool) -> Result<StabilityRegion> {
    grid.validate()?;
    let kp_axis = GridSpec::axis(grid.kp_min, grid.kp_max, grid.steps);
    let ki_axis = GridSpec::axis(grid.ki_min, grid.ki_max, grid.steps);
    let mut mask = Vec::with_capacity(grid.steps * grid.steps);
    let mut margin = with_margin.then(|| Vec::with_capacity(grid.steps * grid.steps));
    for &kp in &kp_axis {
        for &ki in &ki_axis {
            let stable = cell_char_poly(g, kp, ki)
                .and_then(|p| {
                    if let Some(m) = margin.as_mut() {
                        m.push(max_root_modulus(&p)?);
                    }
                    is_stable(&p)
                })
                .unwrap_or_else(|_| {
                    if let Some(m) = margin.as_mut() {
                        m.push(f64::INFINITY);
                    }
                    false
                });
            mask.push(stable);
        }
    }
    Ok(StabilityRegion {
        kp_axis,
        ki_axis,
        mask,
        margin,
    })
}

fn cell_char_poly(g: &TransferFunction, kp: f64, ki: f64) -> Result<Polynomial> {
    let c = pid_tf(&PidGains::pi(kp, ki, g.ts()))?;
    char_poly(g, &c)
}

/// Evaluate the PI stability mask of `g` over the grid. Cells whose
/// characteristic polynomial is degenerate count as unstable.
pub fn stability_region(g: &TransferFunction, grid: &GridSpec) -> Result<StabilityRegion> {
    sweep(g, grid, false)
}

/// Same sweep, additionally recording each cell's maximum root modulus from
/// the root-finding route.
pub fn stability_region_with_margin(
    g: &TransferFunction,
    grid: &GridSpec,
) -> Result<StabilityRegion> {
    sweep(g, grid, true)
}

/// How to pick gains out of a region.
#[derive(Debug, Clone, PartialEq)]
pub enum GainPolicy {
    /// Use these gains, after verifying they stabilize the loop.
    Explicit { kp: f64, ki: f64 },
    /// Pick the stable grid cell minimizing the maximum root modulus of the
    /// characteristic polynomial; ties break toward smaller kp, then ki.
    MinMaxRoot,
}

/// Select compensator gains for plant `g` from a computed region.
pub fn select_gains(
    region: &StabilityRegion,
    g: &TransferFunction,
    policy: &GainPolicy,
) -> Result<PidGains> {
    if region.stable_count() == 0 {
        return Err(Error::EmptyStableRegion);
    }
    match policy {
        GainPolicy::Explicit { kp, ki } => {
            let stable = cell_char_poly(g, *kp, *ki)
                .and_then(|p| is_stable(&p))
                .unwrap_or(false);
            if !stable {
                return Err(Error::UnstableGains { kp: *kp, ki: *ki });
            }
            Ok(PidGains::pi(*kp, *ki, g.ts()))
        }
        GainPolicy::MinMaxRoot => {
            let mut best: Option<(f64, f64, f64)> = None;
            for (i, &kp) in region.kp_axis().iter().enumerate() {
                for (j, &ki) in region.ki_axis().iter().enumerate() {
                    if !region.is_stable_cell(i, j) {
                        continue;
                    }
                    let modulus = match region.margin_at(i, j) {
                        Some(m) => m,
                        None => max_root_modulus(&cell_char_poly(g, kp, ki)?)?,
                    };
                    let better = match best {
                        None => true,
                        Some((bm, bkp, bki)) => {
                            modulus < bm || (modulus == bm && (kp < bkp || (kp == bkp && ki < bki)))
                        }
                    };
                    if better {
                        best = Some((modulus, kp, ki));
                    }
                }
            }
            let (_, kp, ki) = best.ok_or(Error::EmptyStableRegion)?;
            Ok(PidGains::pi(kp, ki, g.ts()))
        }
    }
}
