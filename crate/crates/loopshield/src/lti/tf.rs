//! Discrete transfer functions and their difference-equation simulation.

use super::poly::Polynomial;
use crate::error::{Error, Result};

/// Proper rational function num/den in z with a fixed sample time.
///
/// The denominator is kept monic; the numerator is rescaled to match.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction {
    num: Polynomial,
    den: Polynomial,
    ts: f64,
}

impl TransferFunction {
    pub fn new(num: Polynomial, den: Polynomial, ts: f64) -> Result<Self> {
        if !(ts > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sample time must be positive, got {ts}"
            )));
        }
        if den.is_zero() {
            return Err(Error::DegeneratePolynomial("zero denominator".into()));
        }
        if num.degree() > den.degree() && !num.is_zero() {
            return Err(Error::Improper {
                num_deg: num.degree(),
                den_deg: den.degree(),
            });
        }
        let lead = den.leading();
        Ok(Self {
            num: num.scale(1.0 / lead),
            den: den.scale(1.0 / lead),
            ts,
        })
    }

    /// Shorthand for coefficient slices.
    pub fn from_coeffs(num: &[f64], den: &[f64], ts: f64) -> Result<Self> {
        Self::new(
            Polynomial::new(num.to_vec()),
            Polynomial::new(den.to_vec()),
            ts,
        )
    }

    /// Static gain k (num = k, den = 1).
    pub fn constant(k: f64, ts: f64) -> Result<Self> {
        Self::new(Polynomial::constant(k), Polynomial::one(), ts)
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn ts(&self) -> f64 {
        self.ts
    }

    /// deg(num) < deg(den): no direct feedthrough.
    pub fn is_strictly_proper(&self) -> bool {
        self.num.is_zero() || self.num.degree() < self.den.degree()
    }

    /// Steady-state gain num(1)/den(1).
    pub fn dc_gain(&self) -> f64 {
        self.num.eval(1.0) / self.den.eval(1.0)
    }

    fn check_ts(&self, other: &Self) -> Result<()> {
        if self.ts != other.ts {
            return Err(Error::SampleTimeMismatch(self.ts, other.ts));
        }
        Ok(())
    }

    /// Series composition self·other. Full-order product: no pole-zero
    /// cancellation is attempted, so near-cancelling pairs survive intact.
    pub fn series(&self, other: &Self) -> Result<Self> {
        self.check_ts(other)?;
        Self::new(&self.num * &other.num, &self.den * &other.den, self.ts)
    }

    /// Closed loop G·C/(1 + G·C) for `self` = G in the forward path with
    /// controller `c` under unity negative feedback.
    pub fn feedback(&self, c: &Self) -> Result<Self> {
        self.check_ts(c)?;
        let num = &self.num * &c.num;
        let den = &(&self.den * &c.den) + &num;
        Self::new(num, den, self.ts)
    }
}

/// Direct Form I simulation state for one transfer function.
///
/// Histories hold the last deg(den) inputs and outputs, zero-initialized.
/// Buffer lengths never change after construction.
#[derive(Debug, Clone)]
pub struct LtiSimState {
    /// Numerator padded to denominator length; b[0] is the direct feedthrough.
    b: Vec<f64>,
    /// Denominator coefficients past the leading 1.
    a: Vec<f64>,
    u_hist: Vec<f64>,
    y_hist: Vec<f64>,
}

impl LtiSimState {
    pub fn new(tf: &TransferFunction) -> Self {
        let n = tf.den().degree();
        let num = tf.num().coeffs();
        let mut b = vec![0.0; n + 1];
        b[n + 1 - num.len()..].copy_from_slice(num);
        if tf.num().is_zero() {
            b.fill(0.0);
        }
        Self {
            b,
            a: tf.den().coeffs()[1..].to_vec(),
            u_hist: vec![0.0; n],
            y_hist: vec![0.0; n],
        }
    }

    /// The leading numerator tap `b0`: nonzero only for biproper systems.
    pub fn direct_feedthrough(&self) -> f64 {
        self.b[0]
    }

    /// Contribution of stored history to the next output; for strictly
    /// proper systems this *is* the next output. Together with
    /// [`LtiSimState::push`] this splits [`LtiSimState::step`] in two, which
    /// lets a caller read the output of a strictly proper block before
    /// deciding its next input (no algebraic loop).
    pub fn history_response(&self) -> f64 {
        let mut y = 0.0;
        for (bi, ui) in self.b[1..].iter().zip(&self.u_hist) {
            y += bi * ui;
        }
        for (ai, yi) in self.a.iter().zip(&self.y_hist) {
            y -= ai * yi;
        }
        y
    }

    /// Record one (input, output) pair into the histories without computing
    /// anything. Used when the output was formed externally, e.g. after
    /// divergence clamping.
    pub fn push(&mut self, u: f64, y: f64) {
        if !self.u_hist.is_empty() {
            self.u_hist.rotate_right(1);
            self.u_hist[0] = u;
            self.y_hist.rotate_right(1);
            self.y_hist[0] = y;
        }
    }

    /// Advance one sample: y(k) from the difference equation, histories
    /// updated. For strictly proper systems y(k) does not depend on u(k).
    pub fn step(&mut self, u: f64) -> f64 {
        let y = self.b[0] * u + self.history_response();
        self.push(u, y);
        y
    }

    pub fn reset(&mut self) {
        self.u_hist.fill(0.0);
        self.y_hist.fill(0.0);
    }
}
