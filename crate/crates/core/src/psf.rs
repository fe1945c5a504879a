//! Point-spread functions and source geometry.

use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsfKind {
    Gaussian,
    UserDefined,
}

/// Real amplitude profile ψ(x) of a shift-invariant imaging system.
#[derive(Debug, Clone)]
pub struct PointSpreadFunction<T> {
    sigma: T,
    scale: T,
    shape: Shape<T>,
}

#[derive(Debug, Clone)]
enum Shape<T> {
    Gaussian,
    Sampled(SampledProfile<T>),
}

/// Uniformly sampled profile with nodal slopes, interpolated by cubic Hermite segments.
#[derive(Debug, Clone)]
struct SampledProfile<T> {
    start: T,
    step: T,
    values: Vec<T>,
    slopes: Vec<T>,
}

impl<T: Real> PointSpreadFunction<T> {
    /// ψ(x) = (2πσ²)^(-1/4) exp(-x²/4σ²).
    pub fn gaussian(sigma: T) -> Result<Self> {
        if !(sigma > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        Ok(Self {
            sigma,
            scale: T::one(),
            shape: Shape::Gaussian,
        })
    }

    /// Builds a user-defined PSF from samples on a uniform grid.
    ///
    /// When `slopes` is `None` the nodal derivatives are estimated with fourth-order
    /// central differences. The profile is taken to vanish outside the sampled range.
    pub fn from_samples(sigma: T, xs: &[T], values: &[T], slopes: Option<&[T]>) -> Result<Self> {
        if !(sigma > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        let n = xs.len();
        if n < 5 || values.len() != n || slopes.is_some_and(|s| s.len() != n) {
            return Err(Error::InvalidInput(
                "need at least 5 samples with matching column lengths".into(),
            ));
        }
        let step = (xs[n - 1] - xs[0]) / T::from_usize_lossy(n - 1);
        if !(step > T::zero()) {
            return Err(Error::InvalidInput("x must be strictly increasing".into()));
        }
        for (i, w) in xs.windows(2).enumerate() {
            let d = w[1] - w[0];
            if !(d > T::zero()) {
                return Err(Error::PsfFile {
                    line: i + 2,
                    message: "x must be strictly increasing".into(),
                });
            }
            if (d - step).abs() > step * T::lit(1e-6) {
                return Err(Error::PsfFile {
                    line: i + 2,
                    message: "x must lie on a uniform grid".into(),
                });
            }
        }
        let slopes = match slopes {
            Some(s) => s.to_vec(),
            None => central_differences(values, step),
        };
        Ok(Self {
            sigma,
            scale: T::one(),
            shape: Shape::Sampled(SampledProfile {
                start: xs[0],
                step,
                values: values.to_vec(),
                slopes,
            }),
        })
    }

    /// Parses the two-column (optionally three-column: x, ψ, ψ') whitespace-separated table.
    pub fn parse_table(sigma: T, text: &str) -> Result<Self> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut ds = Vec::new();
        let mut columns = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let expected = *columns.get_or_insert(fields.len());
            if !(2..=3).contains(&fields.len()) || fields.len() != expected {
                return Err(Error::PsfFile {
                    line: idx + 1,
                    message: format!(
                        "expected {expected} columns (2 or 3), found {}",
                        fields.len()
                    ),
                });
            }
            let mut parsed = [T::zero(); 3];
            for (k, f) in fields.iter().enumerate() {
                let v: f64 = f.parse().map_err(|_| Error::PsfFile {
                    line: idx + 1,
                    message: format!("cannot parse {f:?} as a number"),
                })?;
                if !v.is_finite() {
                    return Err(Error::PsfFile {
                        line: idx + 1,
                        message: "non-finite value".into(),
                    });
                }
                parsed[k] = T::lit(v);
            }
            if let Some(&last) = xs.last() {
                if !(parsed[0] > last) {
                    return Err(Error::PsfFile {
                        line: idx + 1,
                        message: "x must be strictly increasing".into(),
                    });
                }
            }
            xs.push(parsed[0]);
            ys.push(parsed[1]);
            ds.push(parsed[2]);
        }
        let slopes = (columns == Some(3)).then_some(ds.as_slice());
        Self::from_samples(sigma, &xs, &ys, slopes)
    }

    pub fn from_file(sigma: T, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::PsfFile {
            line: 0,
            message: format!("{}: {e}", path.display()),
        })?;
        Self::parse_table(sigma, &text)
    }

    /// Same profile with its amplitude multiplied by `factor`.
    pub fn scaled(mut self, factor: T) -> Self {
        self.scale *= factor;
        self
    }

    pub fn kind(&self) -> PsfKind {
        match self.shape {
            Shape::Gaussian => PsfKind::Gaussian,
            Shape::Sampled(_) => PsfKind::UserDefined,
        }
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn is_gaussian(&self) -> bool {
        self.kind() == PsfKind::Gaussian
    }

    /// ψ(x).
    pub fn eval(&self, x: T) -> T {
        match &self.shape {
            Shape::Gaussian => self.scale * gaussian_amplitude(self.sigma, x),
            Shape::Sampled(p) => self.scale * p.eval(x).0,
        }
    }

    /// ψ'(x).
    pub fn derivative(&self, x: T) -> T {
        self.eval_with_derivative(x).1
    }

    /// (ψ(x), ψ'(x)) in one pass.
    pub fn eval_with_derivative(&self, x: T) -> (T, T) {
        match &self.shape {
            Shape::Gaussian => {
                let v = self.scale * gaussian_amplitude(self.sigma, x);
                let d = -x / (T::lit(2.0) * self.sigma * self.sigma) * v;
                (v, d)
            }
            Shape::Sampled(p) => {
                let (v, d) = p.eval(x);
                (self.scale * v, self.scale * d)
            }
        }
    }

    /// Positions where the profile is only C¹; quadrature panels should break there.
    pub fn knots(&self) -> Vec<T> {
        match &self.shape {
            Shape::Gaussian => Vec::new(),
            Shape::Sampled(p) => (0..p.values.len())
                .map(|i| p.start + p.step * T::from_usize_lossy(i))
                .collect(),
        }
    }
}

fn gaussian_amplitude<T: Real>(sigma: T, x: T) -> T {
    let two_pi_s2 = T::two_pi() * sigma * sigma;
    two_pi_s2.powf(T::lit(-0.25)) * (-(x * x) / (T::lit(4.0) * sigma * sigma)).exp()
}

impl<T: Real> SampledProfile<T> {
    fn eval(&self, x: T) -> (T, T) {
        let n = self.values.len();
        let u = (x - self.start) / self.step;
        if u < T::zero() || u > T::from_usize_lossy(n - 1) {
            return (T::zero(), T::zero());
        }
        let i = (u.floor().as_f64() as usize).min(n - 2);
        let t = u - T::from_usize_lossy(i);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * self.step, self.slopes[i + 1] * self.step);
        let (two, three) = (T::lit(2.0), T::lit(3.0));
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = two * t3 - three * t2 + T::one();
        let h10 = t3 - two * t2 + t;
        let h01 = -two * t3 + three * t2;
        let h11 = t3 - t2;
        let value = h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1;
        let six = T::lit(6.0);
        let d00 = six * t2 - six * t;
        let d10 = three * t2 - T::lit(4.0) * t + T::one();
        let d11 = three * t2 - two * t;
        let slope = (d00 * (y0 - y1) + d10 * m0 + d11 * m1) / self.step;
        (value, slope)
    }
}

/// Fourth-order central differences in the interior, lower order near the ends.
fn central_differences<T: Real>(f: &[T], h: T) -> Vec<T> {
    let n = f.len();
    let two = T::lit(2.0);
    (0..n)
        .map(|i| {
            if i >= 2 && i + 2 < n {
                (f[i - 2] - T::lit(8.0) * f[i - 1] + T::lit(8.0) * f[i + 1] - f[i + 2])
                    / (T::lit(12.0) * h)
            } else if i >= 1 && i + 1 < n {
                (f[i + 1] - f[i - 1]) / (two * h)
            } else if i == 0 {
                (-T::lit(3.0) * f[0] + T::lit(4.0) * f[1] - f[2]) / (two * h)
            } else {
                (T::lit(3.0) * f[n - 1] - T::lit(4.0) * f[n - 2] + f[n - 3]) / (two * h)
            }
        })
        .collect()
}

/// Positions of the two sources, parameterized by centroid and separation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceGeometry<T> {
    pub theta1: T,
    pub theta2: T,
}

impl<T: Real> SourceGeometry<T> {
    pub fn new(theta1: T, theta2: T) -> Result<Self> {
        if !(theta2 > T::zero()) || !theta1.is_finite() || !theta2.is_finite() {
            return Err(Error::InvalidInput(format!(
                "separation must be positive and finite, got theta2 = {theta2}"
            )));
        }
        Ok(Self { theta1, theta2 })
    }

    /// X₁ = θ₁ - θ₂/2.
    pub fn x1(&self) -> T {
        self.theta1 - self.theta2 * T::lit(0.5)
    }

    /// X₂ = θ₁ + θ₂/2.
    pub fn x2(&self) -> T {
        self.theta1 + self.theta2 * T::lit(0.5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gaussian_peak_values() {
        let p = PointSpreadFunction::gaussian(1.0).unwrap();
        assert_relative_eq!(
            p.eval(0.0),
            (2.0 * std::f64::consts::PI).powf(-0.25),
            epsilon = 1e-15
        );
        assert_relative_eq!(p.eval(0.0), 0.6316187, epsilon = 1e-7);
        assert!(p.eval(60.0) < 1e-300);
        assert!(p.eval(-60.0) < 1e-300);
        let p2 = PointSpreadFunction::gaussian(2.0).unwrap();
        assert_relative_eq!(
            p2.eval(0.0),
            (8.0 * std::f64::consts::PI).powf(-0.25),
            epsilon = 1e-15
        );
    }

    #[test]
    fn gaussian_derivative_closed_form() {
        let p = PointSpreadFunction::gaussian(1.0).unwrap();
        assert_eq!(p.derivative(0.0), 0.0);
        assert_relative_eq!(p.derivative(1.0), -0.5 * p.eval(1.0), epsilon = 1e-16);
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let h = 1e-5;
        for sigma in [0.5, 1.0, 3.0] {
            let p = PointSpreadFunction::gaussian(sigma).unwrap();
            for i in -40..=40 {
                let x = i as f64 * 0.1 * sigma;
                let fd = (p.eval(x + h * sigma) - p.eval(x - h * sigma)) / (2.0 * h * sigma);
                assert!((fd - p.derivative(x)).abs() < 1e-9 / sigma, "x = {x}");
            }
        }
    }

    #[test]
    fn sampled_profile_reproduces_gaussian() {
        let g = PointSpreadFunction::gaussian(1.0).unwrap();
        let xs: Vec<f64> = (0..=1600).map(|i| -8.0 + i as f64 * 0.01).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| g.eval(x)).collect();
        let s = PointSpreadFunction::from_samples(1.0, &xs, &ys, None).unwrap();
        assert_eq!(s.kind(), PsfKind::UserDefined);
        for x in [-3.3333, -0.005, 0.0, 0.777, 2.5] {
            assert!((s.eval(x) - g.eval(x)).abs() < 1e-9);
            assert!((s.derivative(x) - g.derivative(x)).abs() < 1e-7);
        }
        assert_eq!(s.eval(9.0), 0.0);
    }

    #[test]
    fn sampled_derivative_is_consistent_with_amplitude() {
        let g = PointSpreadFunction::gaussian(1.0).unwrap();
        let xs: Vec<f64> = (0..=400).map(|i| -8.0 + i as f64 * 0.04).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| g.eval(x)).collect();
        let s = PointSpreadFunction::from_samples(1.0, &xs, &ys, None).unwrap();
        let h = 1e-5;
        for x in [-1.013, 0.3, 2.02] {
            let fd = (s.eval(x + h) - s.eval(x - h)) / (2.0 * h);
            assert!((fd - s.derivative(x)).abs() < 1e-8);
        }
    }

    #[test]
    fn parses_table_with_comments() {
        let text = "# x psi\n0 0\n1 1\n\n2 4\n# mid\n3 9\n4 16\n";
        let p = PointSpreadFunction::<f64>::parse_table(1.0, text).unwrap();
        assert_relative_eq!(p.eval(2.0), 4.0);
        assert_eq!(p.knots().len(), 5);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad_order = "0 1\n1 2\n1 3\n2 1\n3 1\n";
        match PointSpreadFunction::<f64>::parse_table(1.0, bad_order) {
            Err(Error::PsfFile { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let bad_num = "0 1\n1 x\n";
        match PointSpreadFunction::<f64>::parse_table(1.0, bad_num) {
            Err(Error::PsfFile { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let non_uniform = "0 1\n1 1\n2 1\n3.5 1\n4 1\n5 1\n";
        assert!(PointSpreadFunction::<f64>::parse_table(1.0, non_uniform).is_err());
    }

    #[test]
    fn geometry_rejects_zero_separation() {
        assert!(SourceGeometry::new(0.0, 0.0).is_err());
        assert!(SourceGeometry::new(0.0, -1.0).is_err());
        let g = SourceGeometry::new(0.3, 1.7).unwrap();
        assert_relative_eq!(g.x2() - g.x1(), 1.7, epsilon = 1e-15);
    }
}
