//! Real polynomials in the forward shift operator z, stored in descending
//! powers: `coeffs[0]·z^d + … + coeffs[d]`.

use num_complex::Complex64;

/// Coefficients with magnitude below this are treated as zero when stripping
/// leading terms after arithmetic.
pub const COEFF_ZERO_TOL: f64 = 1e-15;

/// Real polynomial, descending powers of z, always normalized: the leading
/// coefficient is nonzero except for the zero polynomial `[0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Build from descending-power coefficients, stripping leading
    /// coefficients smaller than [`COEFF_ZERO_TOL`] in magnitude.
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Self {
        let mut coeffs = coeffs.into();
        let first = coeffs
            .iter()
            .position(|c| c.abs() > COEFF_ZERO_TOL)
            .unwrap_or(coeffs.len());
        coeffs.drain(..first);
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![0.0] }
    }

    pub fn one() -> Self {
        Self { coeffs: vec![1.0] }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// Monic polynomial with the given real roots.
    pub fn from_roots(roots: &[f64]) -> Self {
        let mut p = Self::one();
        for &r in roots {
            p = &p * &Self::new(vec![1.0, -r]);
        }
        p
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    /// Horner evaluation at a real point.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Horner evaluation at a complex point.
    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Multiply every coefficient by `k`.
    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect::<Vec<_>>())
    }

    /// Same polynomial scaled so the leading coefficient is one.
    pub fn monic(&self) -> Self {
        self.scale(1.0 / self.leading())
    }
}

impl std::ops::Mul for &Polynomial {
    type Output = Polynomial;

    /// Coefficient convolution; degree adds unless a factor is zero.
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl std::ops::Add for &Polynomial {
    type Output = Polynomial;

    /// Aligned-by-degree coefficient sum, renormalized.
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = vec![0.0; n];
        for (i, &a) in self.coeffs.iter().enumerate() {
            out[n - self.coeffs.len() + i] += a;
        }
        for (i, &b) in rhs.coeffs.iter().enumerate() {
            out[n - rhs.coeffs.len() + i] += b;
        }
        Polynomial::new(out)
    }
}
