//! Closed-form solutions of `−Δu = f` with traces in the sine mode space.
//!
//! Every solution here is a finite sum `Σ c_k y sin(kπx)`, so the Laplacian
//! only sees the `x` factor and `f = Σ c_k k²π² y sin(kπx)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::field::{ExactField, ScalarField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolutionId {
    /// `y sin(πx)`
    Simple,
    /// `y sin(πx) + y sin(2πx) / 100`
    Perturbed,
    /// `y sin(Nπx)`
    Mode(usize),
}

impl fmt::Display for SolutionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolutionId::Simple => write!(f, "simple"),
            SolutionId::Perturbed => write!(f, "perturbed"),
            SolutionId::Mode(n) => write!(f, "mode{n}"),
        }
    }
}

impl FromStr for SolutionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "simple" => Ok(SolutionId::Simple),
            "perturbed" => Ok(SolutionId::Perturbed),
            _ => s
                .strip_prefix("mode")
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|&k| k >= 1)
                .map(SolutionId::Mode)
                .ok_or_else(|| Error::invalid(format!("unknown solution id '{s}'"))),
        }
    }
}

/// `Σ c_k y sin(kπx)` with its derivatives and source term.
#[derive(Clone, Debug, PartialEq)]
pub struct SineSeries {
    /// `(frequency k, coefficient c_k)`
    pub terms: Vec<(usize, f64)>,
}

impl SineSeries {
    pub fn from_id(id: SolutionId) -> Self {
        let terms = match id {
            SolutionId::Simple => vec![(1, 1.0)],
            SolutionId::Perturbed => vec![(1, 1.0), (2, 0.01)],
            SolutionId::Mode(n) => vec![(n, 1.0)],
        };
        Self { terms }
    }

    /// `f = −Δu`
    pub fn source(&self) -> impl ScalarField + '_ {
        move |x: f64, y: f64| {
            self.terms
                .iter()
                .map(|&(k, c)| {
                    let kpi = k as f64 * PI;
                    c * kpi * kpi * y * (kpi * x).sin()
                })
                .sum::<f64>()
        }
    }

    /// Coefficients of the boundary trace in the `√2 sin(kπx)` basis, as
    /// `(k, coefficient)`. The trace vanishes on the other three sides.
    pub fn trace_coefficients(&self) -> Vec<(usize, f64)> {
        self.terms
            .iter()
            .map(|&(k, c)| (k, c / std::f64::consts::SQRT_2))
            .collect()
    }

    /// Smallest mode count whose trace space contains the trace.
    pub fn trace_dimension(&self) -> usize {
        self.terms.iter().map(|&(k, _)| k).max().unwrap_or(0)
    }
}

impl ScalarField for SineSeries {
    fn value(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(k, c)| c * y * (k as f64 * PI * x).sin())
            .sum()
    }
}

impl ExactField for SineSeries {
    fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        self.terms.iter().fold([0.0; 2], |g, &(k, c)| {
            let kpi = k as f64 * PI;
            [
                g[0] + c * kpi * y * (kpi * x).cos(),
                g[1] + c * (kpi * x).sin(),
            ]
        })
    }

    fn hessian(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
        self.terms.iter().fold([[0.0; 2]; 2], |hs, &(k, c)| {
            let kpi = k as f64 * PI;
            let xy = c * kpi * (kpi * x).cos();
            [
                [hs[0][0] - c * kpi * kpi * y * (kpi * x).sin(), hs[0][1] + xy],
                [hs[1][0] + xy, hs[1][1]],
            ]
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in [SolutionId::Simple, SolutionId::Perturbed, SolutionId::Mode(3)] {
            assert_eq!(id.to_string().parse::<SolutionId>().unwrap(), id);
        }
        assert!("mode0".parse::<SolutionId>().is_err());
        assert!("wave".parse::<SolutionId>().is_err());
    }

    /// Central differences of the closed-form gradient / Hessian.
    #[test]
    fn derivatives_match_finite_differences() {
        let eps = 1e-5;
        for id in [SolutionId::Simple, SolutionId::Perturbed, SolutionId::Mode(4)] {
            let u = SineSeries::from_id(id);
            for &(x, y) in &[(0.3, 0.7), (0.81, 0.12), (0.5, 0.5)] {
                let gx = (u.value(x + eps, y) - u.value(x - eps, y)) / (2.0 * eps);
                let gy = (u.value(x, y + eps) - u.value(x, y - eps)) / (2.0 * eps);
                let g = u.gradient(x, y);
                assert!((g[0] - gx).abs() < 1e-7 && (g[1] - gy).abs() < 1e-7);
                let hxx = (u.gradient(x + eps, y)[0] - u.gradient(x - eps, y)[0]) / (2.0 * eps);
                let hxy = (u.gradient(x, y + eps)[0] - u.gradient(x, y - eps)[0]) / (2.0 * eps);
                let hyy = (u.gradient(x, y + eps)[1] - u.gradient(x, y - eps)[1]) / (2.0 * eps);
                let hs = u.hessian(x, y);
                assert!((hs[0][0] - hxx).abs() < 1e-5);
                assert!((hs[0][1] - hxy).abs() < 1e-5 && (hs[1][0] - hxy).abs() < 1e-5);
                assert!((hs[1][1] - hyy).abs() < 1e-5);
                let f = u.source().value(x, y);
                assert!((f + hs[0][0] + hs[1][1]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sources_in_closed_form() {
        let pi2 = PI * PI;
        let (x, y) = (0.37, 0.61);
        let simple = SineSeries::from_id(SolutionId::Simple);
        assert!((simple.source().value(x, y) - pi2 * y * (PI * x).sin()).abs() < 1e-13);
        let pert = SineSeries::from_id(SolutionId::Perturbed);
        let expected = pi2 * y * (PI * x).sin() + 4.0 * pi2 / 100.0 * y * (2.0 * PI * x).sin();
        assert!((pert.source().value(x, y) - expected).abs() < 1e-13);
        let m3 = SineSeries::from_id(SolutionId::Mode(3));
        assert!((m3.source().value(x, y) - 9.0 * pi2 * y * (3.0 * PI * x).sin()).abs() < 1e-12);
    }

    #[test]
    fn traces_lie_in_the_mode_space() {
        for n in 1..=6 {
            let u = SineSeries::from_id(SolutionId::Mode(n));
            assert_eq!(u.trace_dimension(), n);
            for s in [0.0, 0.13, 0.5, 0.77, 1.0] {
                // left, right, bottom
                assert!(u.value(0.0, s).abs() < 1e-14);
                assert!(u.value(1.0, s).abs() < 1e-13);
                assert_eq!(u.value(s, 0.0), 0.0);
            }
        }
        let simple = SineSeries::from_id(SolutionId::Simple);
        let coeffs = simple.trace_coefficients();
        assert_eq!(coeffs.len(), 1);
        assert!((coeffs[0].1 - 1.0 / 2f64.sqrt()).abs() < 1e-16);
        assert_eq!(SineSeries::from_id(SolutionId::Perturbed).trace_dimension(), 2);
    }
}
