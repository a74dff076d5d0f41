//! Second-order forward-mode dual numbers.

use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A value together with its first and second derivative in `t`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Dual2 {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Dual2 {
    pub const fn new(value: f64, d1: f64, d2: f64) -> Self {
        Dual2 { value, d1, d2 }
    }

    pub const fn constant(value: f64) -> Self {
        Dual2::new(value, 0.0, 0.0)
    }

    /// The independent variable at `t`.
    pub const fn var(t: f64) -> Self {
        Dual2::new(t, 1.0, 0.0)
    }

    /// Applies a scalar function given its value and first two derivatives at `self.value`.
    pub fn chain(self, f: f64, df: f64, d2f: f64) -> Self {
        Dual2::new(f, df * self.d1, d2f * self.d1 * self.d1 + df * self.d2)
    }

    pub fn recip(self) -> Self {
        let v = 1.0 / self.value;
        self.chain(v, -v * v, 2.0 * v * v * v)
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn ln(self) -> Self {
        let x = self.value;
        self.chain(x.ln(), 1.0 / x, -1.0 / (x * x))
    }

    pub fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.value))
    }

    pub fn powi(self, n: i32) -> Self {
        let x = self.value;
        match n {
            0 => Dual2::constant(1.0),
            1 => self,
            _ => {
                let nf = f64::from(n);
                self.chain(
                    x.powi(n),
                    nf * x.powi(n - 1),
                    nf * (nf - 1.0) * x.powi(n - 2),
                )
            }
        }
    }

    pub fn powf(self, p: f64) -> Self {
        if p.fract() == 0.0 && p.abs() < f64::from(i32::MAX) {
            return self.powi(p as i32);
        }
        let x = self.value;
        self.chain(
            x.powf(p),
            p * x.powf(p - 1.0),
            p * (p - 1.0) * x.powf(p - 2.0),
        )
    }

    pub fn scale(self, k: f64) -> Self {
        Dual2::new(k * self.value, k * self.d1, k * self.d2)
    }
}

impl From<f64> for Dual2 {
    fn from(v: f64) -> Self {
        Dual2::constant(v)
    }
}

impl Add for Dual2 {
    type Output = Dual2;
    fn add(self, o: Dual2) -> Dual2 {
        Dual2::new(self.value + o.value, self.d1 + o.d1, self.d2 + o.d2)
    }
}

impl Sub for Dual2 {
    type Output = Dual2;
    fn sub(self, o: Dual2) -> Dual2 {
        Dual2::new(self.value - o.value, self.d1 - o.d1, self.d2 - o.d2)
    }
}

impl Mul for Dual2 {
    type Output = Dual2;
    fn mul(self, o: Dual2) -> Dual2 {
        Dual2::new(
            self.value * o.value,
            self.d1 * o.value + self.value * o.d1,
            self.d2 * o.value + 2.0 * self.d1 * o.d1 + self.value * o.d2,
        )
    }
}

impl Div for Dual2 {
    type Output = Dual2;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Dual2) -> Dual2 {
        self * o.recip()
    }
}

impl Neg for Dual2 {
    type Output = Dual2;
    fn neg(self) -> Dual2 {
        Dual2::new(-self.value, -self.d1, -self.d2)
    }
}

impl Add<f64> for Dual2 {
    type Output = Dual2;
    fn add(self, o: f64) -> Dual2 {
        Dual2::new(self.value + o, self.d1, self.d2)
    }
}

impl Sub<f64> for Dual2 {
    type Output = Dual2;
    fn sub(self, o: f64) -> Dual2 {
        Dual2::new(self.value - o, self.d1, self.d2)
    }
}

impl Mul<f64> for Dual2 {
    type Output = Dual2;
    fn mul(self, o: f64) -> Dual2 {
        self.scale(o)
    }
}

impl Div<f64> for Dual2 {
    type Output = Dual2;
    fn div(self, o: f64) -> Dual2 {
        self.scale(1.0 / o)
    }
}

impl Mul<Dual2> for f64 {
    type Output = Dual2;
    fn mul(self, o: Dual2) -> Dual2 {
        o.scale(self)
    }
}

impl Sub<Dual2> for f64 {
    type Output = Dual2;
    fn sub(self, o: Dual2) -> Dual2 {
        -o + self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quotient_rule_matches_hand_derivatives() {
        // 1/(1-t) at t = 0.5: (2, 4, 16)
        let t = Dual2::var(0.5);
        let f = (1.0 - t).recip();
        assert!((f.value - 2.0).abs() < 1e-15);
        assert!((f.d1 - 4.0).abs() < 1e-14);
        assert!((f.d2 - 16.0).abs() < 1e-13);
    }

    #[test]
    fn fractional_power() {
        // t^1.5 at 4: 8, 1.5*2 = 3, 0.75/2 = 0.375
        let f = Dual2::var(4.0).powf(1.5);
        assert!((f.value - 8.0).abs() < 1e-14);
        assert!((f.d1 - 3.0).abs() < 1e-14);
        assert!((f.d2 - 0.375).abs() < 1e-14);
    }
}
