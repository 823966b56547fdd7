//! ARX identification: regressor construction, batch least squares, and
//! recursive least squares with exponential forgetting.
//!
//! The model is y(k) = -a1 y(k-1) - ... - al y(k-l)
//!                    + b1 u(k-1) + ... + bm u(k-m),
//! with the parameter vector stacked a-block first: [a1..al, b1..bm].

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lti::{Polynomial, TransferFunction};

/// Condition-number ceiling above which the batch solve refuses to return
/// an estimate.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Output order l (coefficients of A past the leading 1) and input order m.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArxOrders {
    pub l: usize,
    pub m: usize,
}

impl ArxOrders {
    pub fn new(l: usize, m: usize) -> Result<Self> {
        if l < 1 || m < 1 {
            return Err(Error::InvalidParameter(format!(
                "ARX orders must be >= 1, got l={l}, m={m}"
            )));
        }
        Ok(Self { l, m })
    }

    pub fn param_count(&self) -> usize {
        self.l + self.m
    }

    pub fn max_lag(&self) -> usize {
        self.l.max(self.m)
    }
}

/// Estimated parameters split into the a- and b-blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct ArxTheta {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl ArxTheta {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::InvalidParameter(
                "ARX parameter blocks must be non-empty".into(),
            ));
        }
        Ok(Self { a, b })
    }

    fn from_vector(v: &DVector<f64>, orders: ArxOrders) -> Self {
        Self {
            a: v.as_slice()[..orders.l].to_vec(),
            b: v.as_slice()[orders.l..].to_vec(),
        }
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn orders(&self) -> ArxOrders {
        ArxOrders {
            l: self.a.len(),
            m: self.b.len(),
        }
    }
}

/// Regressor row for target sample `k`:
/// [-y(k-1) .. -y(k-l), u(k-1) .. u(k-m)].
///
/// Panics if `k < orders.max_lag()` or `k >= len`; callers guarantee range.
pub fn regressor_row(u: &[f64], y: &[f64], k: usize, orders: ArxOrders) -> DVector<f64> {
    let mut phi = DVector::zeros(orders.param_count());
    for j in 1..=orders.l {
        phi[j - 1] = -y[k - j];
    }
    for j in 1..=orders.m {
        phi[orders.l + j - 1] = u[k - j];
    }
    phi
}

/// Stack all full regressor rows of a record: X has `len - max(l, m)` rows
/// and l+m columns; the target vector holds the matching y(k).
pub fn build_regressor(
    u: &[f64],
    y: &[f64],
    orders: ArxOrders,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    if u.len() != y.len() {
        return Err(Error::InvalidParameter(format!(
            "input/output lengths differ: {} vs {}",
            u.len(),
            y.len()
        )));
    }
    let lag = orders.max_lag();
    if u.len() <= lag {
        return Err(Error::InsufficientSamples {
            got: u.len(),
            required: lag,
        });
    }
    let rows = u.len() - lag;
    let mut x = DMatrix::zeros(rows, orders.param_count());
    let mut target = DVector::zeros(rows);
    for (i, k) in (lag..u.len()).enumerate() {
        x.set_row(i, &regressor_row(u, y, k, orders).transpose());
        target[i] = y[k];
    }
    Ok((x, target))
}

/// Least-squares estimate of theta from X theta = y, solved through the SVD
/// of X itself. Rejects systems whose condition estimate exceeds
/// [`CONDITION_LIMIT`] instead of returning a garbage estimate.
pub fn batch_ls(x: &DMatrix<f64>, target: &DVector<f64>, orders: ArxOrders) -> Result<ArxTheta> {
    if x.ncols() != orders.param_count() {
        return Err(Error::InvalidParameter(format!(
            "regressor has {} columns, orders require {}",
            x.ncols(),
            orders.param_count()
        )));
    }
    if x.nrows() < x.ncols() {
        return Err(Error::InsufficientSamples {
            got: x.nrows(),
            required: x.ncols(),
        });
    }
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let cond = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    if !cond.is_finite() || cond > CONDITION_LIMIT {
        return Err(Error::IllConditioned {
            cond,
            limit: CONDITION_LIMIT,
        });
    }
    let theta = svd
        .solve(target, 0.0)
        .map_err(|e| Error::InvalidParameter(format!("SVD solve failed: {e}")))?;
    Ok(ArxTheta::from_vector(&theta, orders))
}

/// Exponentially-weighted recursive least squares.
#[derive(Debug, Clone)]
pub struct RlsState {
    theta: DVector<f64>,
    p: DMatrix<f64>,
    lambda: f64,
    orders: ArxOrders,
    samples: usize,
}

impl RlsState {
    /// theta = 0, P = p0 * I.
    pub fn new(orders: ArxOrders, lambda: f64, p0: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "forgetting factor must lie in (0, 1], got {lambda}"
            )));
        }
        if !(p0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "initial covariance scale must be positive, got {p0}"
            )));
        }
        let n = orders.param_count();
        Ok(Self {
            theta: DVector::zeros(n),
            p: DMatrix::identity(n, n) * p0,
            lambda,
            orders,
            samples: 0,
        })
    }

    /// One update with regressor row `phi` and measurement `y`. Returns the
    /// a-priori prediction error y - phi' theta.
    ///
    /// K = P phi / (lambda + phi' P phi), theta += K e,
    /// P <- (P - K phi' P)/lambda, resymmetrized.
    pub fn update(&mut self, phi: &DVector<f64>, y: f64) -> f64 {
        let p_phi = &self.p * phi;
        let denom = self.lambda + phi.dot(&p_phi);
        let gain = &p_phi / denom;
        let err = y - phi.dot(&self.theta);
        self.theta += &gain * err;
        self.p -= &gain * p_phi.transpose();
        self.p /= self.lambda;
        // keep P symmetric against accumulation of rounding
        let pt = self.p.transpose();
        self.p = (&self.p + pt) * 0.5;
        self.samples += 1;
        err
    }

    pub fn theta(&self) -> ArxTheta {
        ArxTheta::from_vector(&self.theta, self.orders)
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn orders(&self) -> ArxOrders {
        self.orders
    }
}

/// Transfer function whose difference equation is exactly the ARX relation:
/// num = b1 z^(max-1) + ... + bm z^(max-m),
/// den = z^max + a1 z^(max-1) + ... + al z^(max-l), max = max(l, m).
pub fn theta_to_tf(theta: &ArxTheta, ts: f64) -> Result<TransferFunction> {
    let orders = theta.orders();
    let max = orders.max_lag();
    let mut num = vec![0.0; max + 1];
    for (j, &bj) in theta.b().iter().enumerate() {
        num[j + 1] = bj;
    }
    let mut den = vec![0.0; max + 1];
    den[0] = 1.0;
    for (j, &aj) in theta.a().iter().enumerate() {
        den[j + 1] = aj;
    }
    TransferFunction::new(Polynomial::new(num), Polynomial::new(den), ts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::LtiSimState;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn orders(l: usize, m: usize) -> ArxOrders {
        ArxOrders::new(l, m).unwrap()
    }

    #[test]
    fn regressor_hand_example() {
        let u = [1.0, 2.0, 3.0];
        let y = [4.0, 5.0, 6.0];
        let (x, t) = build_regressor(&u, &y, orders(1, 1)).unwrap();
        assert_eq!(x.nrows(), 2);
        assert_eq!(
            x.row(0).iter().copied().collect::<Vec<_>>(),
            vec![-4.0, 1.0]
        );
        assert_eq!(
            x.row(1).iter().copied().collect::<Vec<_>>(),
            vec![-5.0, 2.0]
        );
        assert_eq!(t.as_slice(), &[5.0, 6.0]);
    }

    #[test]
    fn regressor_all_zero() {
        let u = [0.0; 6];
        let y = [0.0; 6];
        let (x, t) = build_regressor(&u, &y, orders(2, 2)).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
        assert!(t.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn regressor_too_short() {
        let u = [1.0, 2.0];
        let y = [1.0, 2.0];
        assert!(matches!(
            build_regressor(&u, &y, orders(2, 2)),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    fn simulate(tf: &TransferFunction, u: &[f64]) -> Vec<f64> {
        let mut s = LtiSimState::new(tf);
        u.iter().map(|&ui| s.step(ui)).collect()
    }

    fn white_input(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn batch_recovers_plant_parameters() {
        let h = TransferFunction::from_coeffs(&[9.96e-7, 9.92e-7], &[1.0, -1.988, 0.9881], 0.001)
            .unwrap();
        let u = white_input(2000, 7);
        let y = simulate(&h, &u);
        let (x, t) = build_regressor(&u, &y, orders(2, 2)).unwrap();
        let theta = batch_ls(&x, &t, orders(2, 2)).unwrap();
        assert_relative_eq!(theta.a()[0], -1.988, epsilon = 1e-8);
        assert_relative_eq!(theta.a()[1], 0.9881, epsilon = 1e-8);
        assert_relative_eq!(theta.b()[0], 9.96e-7, epsilon = 1e-8);
        assert_relative_eq!(theta.b()[1], 9.92e-7, epsilon = 1e-8);
    }

    #[test]
    fn batch_recovers_gain_attacked_plant() {
        let g = TransferFunction::constant(160.0, 0.001)
            .unwrap()
            .series(
                &TransferFunction::from_coeffs(&[9.96e-7, 9.92e-7], &[1.0, -1.988, 0.9881], 0.001)
                    .unwrap(),
            )
            .unwrap();
        let u = white_input(2000, 11);
        let y = simulate(&g, &u);
        let (x, t) = build_regressor(&u, &y, orders(2, 2)).unwrap();
        let theta = batch_ls(&x, &t, orders(2, 2)).unwrap();
        assert_relative_eq!(theta.b()[0], 1.59359996e-4, max_relative = 1e-2);
        assert_relative_eq!(theta.b()[1], 1.5872e-4, max_relative = 1e-2);
        assert_relative_eq!(theta.a()[0], -1.988, max_relative = 1e-3);
        assert_relative_eq!(theta.a()[1], 0.9881, max_relative = 1e-3);
    }

    #[test]
    fn batch_exact_single_column() {
        let x = DMatrix::from_column_slice(3, 2, &[1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
        // second column zero -> rank deficient -> refused
        let t = DVector::from_vec(vec![2.0, 2.0, 2.0]);
        assert!(matches!(
            batch_ls(&x, &t, orders(1, 1)),
            Err(Error::IllConditioned { .. })
        ));
    }

    #[test]
    fn rls_init_shapes() {
        let s = RlsState::new(orders(2, 2), 1.0, 1e6).unwrap();
        assert_eq!(s.theta().a(), &[0.0, 0.0]);
        assert_eq!(s.covariance()[(0, 0)], 1e6);
        assert_eq!(s.covariance()[(0, 1)], 0.0);
        assert!(RlsState::new(orders(2, 2), 0.0, 1e6).is_err());
        assert!(RlsState::new(orders(2, 2), 1.1, 1e6).is_err());
        assert!(RlsState::new(orders(2, 2), 0.98, 0.0).is_err());
        assert!(RlsState::new(orders(2, 2), 0.98, 1e3).is_ok());
    }

    #[test]
    fn rls_zero_regressor_leaves_theta() {
        let mut s = RlsState::new(orders(1, 1), 1.0, 1e8).unwrap();
        let phi = DVector::zeros(2);
        let e = s.update(&phi, 3.0);
        assert_eq!(e, 3.0);
        assert_eq!(s.theta().a(), &[0.0]);
        assert_eq!(s.theta().b(), &[0.0]);
    }

    #[test]
    fn rls_matches_batch_on_same_rows() {
        let h = TransferFunction::from_coeffs(&[0.5, 0.1], &[1.0, -0.9, 0.2], 0.001).unwrap();
        let u = white_input(500, 3);
        let y = simulate(&h, &u);
        let o = orders(2, 2);
        let (x, t) = build_regressor(&u, &y, o).unwrap();
        let batch = batch_ls(&x, &t, o).unwrap();
        let mut rls = RlsState::new(o, 1.0, 1e8).unwrap();
        for i in 0..x.nrows() {
            rls.update(&x.row(i).transpose(), t[i]);
        }
        let rt = rls.theta();
        for (r, b) in rt.a().iter().zip(batch.a()) {
            assert_relative_eq!(r, b, epsilon = 1e-6);
        }
        for (r, b) in rt.b().iter().zip(batch.b()) {
            assert_relative_eq!(r, b, epsilon = 1e-6);
        }
    }

    #[test]
    fn theta_to_tf_plant() {
        let theta = ArxTheta::new(vec![-1.988, 0.9881], vec![9.96e-7, 9.92e-7]).unwrap();
        let tf = theta_to_tf(&theta, 0.001).unwrap();
        assert_eq!(tf.den().coeffs(), &[1.0, -1.988, 0.9881]);
        assert_eq!(tf.num().coeffs(), &[9.96e-7, 9.92e-7]);
    }

    #[test]
    fn theta_to_tf_unit_delay() {
        let theta = ArxTheta::new(vec![0.0], vec![1.0]).unwrap();
        let tf = theta_to_tf(&theta, 0.001).unwrap();
        assert_eq!(tf.num().coeffs(), &[1.0]);
        assert_eq!(tf.den().coeffs(), &[1.0, 0.0]);
    }

    #[test]
    fn theta_to_tf_third_order_composition() {
        let m = TransferFunction::from_coeffs(&[0.7, -0.7], &[1.0, -1.0001], 0.001).unwrap();
        let h = TransferFunction::from_coeffs(&[9.96e-7, 9.92e-7], &[1.0, -1.988, 0.9881], 0.001)
            .unwrap();
        let g = m.series(&h).unwrap();
        let theta =
            ArxTheta::new(g.den().coeffs()[1..].to_vec(), g.num().coeffs().to_vec()).unwrap();
        let rebuilt = theta_to_tf(&theta, 0.001).unwrap();
        assert_eq!(rebuilt.den().coeffs(), g.den().coeffs());
        assert_eq!(rebuilt.num().coeffs(), g.num().coeffs());
    }

    #[test]
    fn prediction_error_of_true_theta_is_machine_level() {
        let h = TransferFunction::from_coeffs(&[0.3, -0.2], &[1.0, -1.1, 0.3], 0.001).unwrap();
        let u = white_input(800, 5);
        let y = simulate(&h, &u);
        let o = orders(2, 2);
        let theta = DVector::from_vec(vec![-1.1, 0.3, 0.3, -0.2]);
        for k in o.max_lag()..u.len() {
            let phi = regressor_row(&u, &y, k, o);
            let e = y[k] - phi.dot(&theta);
            assert!(e.abs() <= 1e-12, "sample {k}: residual {e}");
        }
    }
}
