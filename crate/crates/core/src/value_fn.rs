use serde::{Deserialize, Serialize};

/// Closed-form value of staying matched on a continuation interval
/// `(x_low, 1]`:
///
/// ```text
/// v(π) = p0 + p1 π + γ ((1-π)/(1-x_low))^(1+ρ) (π/x_low)^(-ρ)
/// ```
///
/// The affine part is a particular solution of the matched-state Bellman
/// equation and the last term is its decaying homogeneous solution. Only
/// evaluate on `(x_low, 1]`; callers route `π <= x_low` to the stopping
/// branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueFn {
    pub p0: f64,
    pub p1: f64,
    pub gamma: f64,
    pub x_low: f64,
    pub rho: f64,
}

impl ValueFn {
    /// Particular solution for a project with success rate `rate`, with
    /// `gamma` left at zero.
    pub fn particular(r: f64, c: f64, rate: f64, w1: f64, x_low: f64) -> Self {
        ValueFn {
            p0: -c / r,
            p1: rate / (r + rate) * (1.0 + w1 + c / r),
            gamma: 0.0,
            x_low,
            rho: r / rate,
        }
    }

    pub fn affine(&self, pi: f64) -> f64 {
        self.p0 + self.p1 * pi
    }

    fn homogeneous(&self, pi: f64) -> f64 {
        if pi >= 1.0 {
            return 0.0;
        }
        let u = (1.0 - pi) / (1.0 - self.x_low);
        u.powf(1.0 + self.rho) * (pi / self.x_low).powf(-self.rho)
    }

    fn homogeneous_derivative(&self, pi: f64) -> f64 {
        if pi >= 1.0 {
            return 0.0;
        }
        let u = (1.0 - pi) / (1.0 - self.x_low);
        let s = (pi / self.x_low).powf(-self.rho);
        -(1.0 + self.rho) / (1.0 - self.x_low) * u.powf(self.rho) * s
            - self.rho / pi * u.powf(1.0 + self.rho) * s
    }

    /// `ρ(1+ρ) A (1-π)^(ρ-1) π^(-ρ-2)`; unbounded at `π = 1` when `ρ < 1`.
    fn homogeneous_second_derivative(&self, pi: f64) -> f64 {
        let a = (1.0 - self.x_low).powf(-1.0 - self.rho) * self.x_low.powf(self.rho);
        self.rho * (1.0 + self.rho) * a * (1.0 - pi).powf(self.rho - 1.0) * pi.powf(-self.rho - 2.0)
    }

    pub fn eval(&self, pi: f64) -> f64 {
        self.affine(pi) + self.gamma * self.homogeneous(pi)
    }

    pub fn derivative(&self, pi: f64) -> f64 {
        self.p1 + self.gamma * self.homogeneous_derivative(pi)
    }

    pub fn second_derivative(&self, pi: f64) -> f64 {
        self.gamma * self.homogeneous_second_derivative(pi)
    }

    /// Value at `π = 1`, where the homogeneous term vanishes.
    pub fn at_one(&self) -> f64 {
        self.p0 + self.p1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ValueFn {
        ValueFn {
            p0: -1.3,
            p1: 1.9,
            gamma: 0.4,
            x_low: 0.3,
            rho: 0.45,
        }
    }

    #[test]
    fn homogeneous_term_is_one_at_lower_boundary() {
        let v = sample();
        assert!((v.eval(0.3) - (v.affine(0.3) + 0.4)).abs() < 1e-15);
        assert_eq!(v.eval(1.0), v.at_one());
        assert_eq!(v.derivative(1.0), v.p1);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let v = sample();
        let h = 1e-6;
        for pi in [0.31, 0.4, 0.55, 0.8, 0.95] {
            let fd = (v.eval(pi + h) - v.eval(pi - h)) / (2.0 * h);
            assert!((fd - v.derivative(pi)).abs() < 1e-7, "pi = {pi}");
            let fd2 = (v.derivative(pi + h) - v.derivative(pi - h)) / (2.0 * h);
            assert!((fd2 - v.second_derivative(pi)).abs() < 1e-5, "pi = {pi}");
        }
    }

    #[test]
    fn homogeneous_part_solves_the_ode() {
        // With the affine part removed, (r + λπ) h + λπ(1-π) h' = 0.
        let (r, rate) = (0.9, 2.0);
        let v = ValueFn {
            p0: 0.0,
            p1: 0.0,
            gamma: 1.0,
            x_low: 0.25,
            rho: r / rate,
        };
        for pi in [0.3, 0.5, 0.9] {
            let lhs = (r + rate * pi) * v.eval(pi) + rate * pi * (1.0 - pi) * v.derivative(pi);
            assert!(lhs.abs() < 1e-14);
        }
    }
}
