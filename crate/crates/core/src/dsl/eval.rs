//! Forward-mode evaluation: every node yields a `(value, d/dx value)` pair.

use std::ops::{Add, Div, Mul, Neg, Sub};

use thiserror::Error;

use super::ast::{BinOp, Expr, Func};

/// Value together with its first derivative with respect to `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub re: f64,
    pub du: f64,
}

impl Dual {
    pub const fn constant(re: f64) -> Self {
        Self { re, du: 0.0 }
    }

    pub const fn variable(re: f64) -> Self {
        Self { re, du: 1.0 }
    }

    fn chain(self, value: f64, slope: f64) -> Self {
        Self {
            re: value,
            du: slope * self.du,
        }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual {
            re: self.re + o.re,
            du: self.du + o.du,
        }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual {
            re: self.re - o.re,
            du: self.du - o.du,
        }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual {
            re: self.re * o.re,
            du: self.du * o.re + self.re * o.du,
        }
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        Dual {
            re: self.re / o.re,
            du: (self.du * o.re - self.re * o.du) / (o.re * o.re),
        }
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual {
            re: -self.re,
            du: -self.du,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("evaluation error at x = {x}: {reason} in `{subexpr}`")]
pub struct EvalError {
    pub x: f64,
    pub subexpr: String,
    pub reason: &'static str,
}

/// Evaluates `e` and its exact first derivative at `x`.
pub fn eval_d(e: &Expr, x: f64) -> Result<(f64, f64), EvalError> {
    let d = eval_dual(e, x)?;
    Ok((d.re, d.du))
}

/// Value only.
pub fn eval(e: &Expr, x: f64) -> Result<f64, EvalError> {
    eval_dual(e, x).map(|d| d.re)
}

pub fn eval_dual(e: &Expr, x: f64) -> Result<Dual, EvalError> {
    let fault = |reason: &'static str| EvalError {
        x,
        subexpr: e.to_string(),
        reason,
    };
    let out = match e {
        Expr::Var => Dual::variable(x),
        Expr::Num(v) => Dual::constant(*v),
        Expr::Neg(a) => -eval_dual(a, x)?,
        Expr::Bin(op, l, r) => {
            let a = eval_dual(l, x)?;
            let b = eval_dual(r, x)?;
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b.re == 0.0 {
                        return Err(fault("division by zero"));
                    }
                    a / b
                }
                BinOp::Pow => pow(a, b).ok_or_else(|| fault("power of non-positive base"))?,
            }
        }
        Expr::Call(f, arg) => {
            let a = eval_dual(arg, x)?;
            match f {
                Func::Exp => {
                    let v = a.re.exp();
                    a.chain(v, v)
                }
                Func::Ln => {
                    if a.re <= 0.0 {
                        return Err(fault("logarithm of non-positive value"));
                    }
                    a.chain(a.re.ln(), 1.0 / a.re)
                }
                Func::Sqrt => {
                    if a.re < 0.0 {
                        return Err(fault("square root of negative value"));
                    }
                    let v = a.re.sqrt();
                    if v == 0.0 {
                        if a.du != 0.0 {
                            return Err(fault("square root is not differentiable at 0"));
                        }
                        Dual::constant(0.0)
                    } else {
                        a.chain(v, 0.5 / v)
                    }
                }
                Func::Sin => a.chain(a.re.sin(), a.re.cos()),
                Func::Cos => a.chain(a.re.cos(), -a.re.sin()),
                Func::Tanh => {
                    let t = a.re.tanh();
                    a.chain(t, 1.0 - t * t)
                }
                // d|u| = sign(u) du, with 0 at u = 0.
                Func::Abs => {
                    let s = if a.re > 0.0 {
                        1.0
                    } else if a.re < 0.0 {
                        -1.0
                    } else {
                        0.0
                    };
                    a.chain(a.re.abs(), s)
                }
            }
        }
    };
    if !out.re.is_finite() || !out.du.is_finite() {
        return Err(fault("non-finite result"));
    }
    Ok(out)
}

/// `a^b`. Constant integer exponents accept any base; everything else
/// needs `a > 0`.
fn pow(a: Dual, b: Dual) -> Option<Dual> {
    if b.du == 0.0 && b.re.fract() == 0.0 && b.re.abs() <= i32::MAX as f64 {
        let n = b.re as i32;
        if n == 0 {
            return Some(Dual::constant(1.0));
        }
        if a.re == 0.0 && n < 0 {
            return None;
        }
        let v = a.re.powi(n);
        let slope = n as f64 * a.re.powi(n - 1);
        return Some(a.chain(v, slope));
    }
    if a.re <= 0.0 {
        return None;
    }
    let v = a.re.powf(b.re);
    Some(Dual {
        re: v,
        du: v * (b.du * a.re.ln() + b.re * a.du / a.re),
    })
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn ed(s: &str, x: f64) -> (f64, f64) {
        eval_d(&parse(s).unwrap(), x).unwrap()
    }

    #[test]
    fn basic_derivatives() {
        assert_eq!(ed("x^2", 3.0), (9.0, 6.0));
        assert_eq!(ed("exp(x)", 0.0), (1.0, 1.0));
        assert_eq!(ed("1 + 2*x^3", 1.0), (3.0, 6.0));
        let (v, d) = ed("ln(x)", 2.0);
        assert_relative_eq!(v, 2f64.ln());
        assert_relative_eq!(d, 0.5);
        let (v, d) = ed("sqrt(x)", 4.0);
        assert_eq!((v, d), (2.0, 0.25));
        let (_, d) = ed("tanh(x)", 0.0);
        assert_eq!(d, 1.0);
        let (_, d) = ed("2^x", 1.0);
        assert_relative_eq!(d, 2.0 * 2f64.ln());
        let (_, d) = ed("x^x", 1.0);
        assert_relative_eq!(d, 1.0);
        let (v, d) = ed("(1+x^8)^0.125", 0.0);
        assert_eq!((v, d), (1.0, 0.0));
    }

    #[test]
    fn pythagorean_identity() {
        for &x in &[-3.0, -0.7, 0.0, 0.3, 1.0, 2.5, 10.0] {
            let (v, d) = ed("sin(x)*sin(x)+cos(x)*cos(x)", x);
            assert!((v - 1.0).abs() <= 1e-14);
            assert!(d.abs() <= 1e-14);
        }
    }

    #[test]
    fn abs_derivative_convention() {
        assert_eq!(ed("abs(x)", -2.0), (2.0, -1.0));
        assert_eq!(ed("abs(x)", 2.0), (2.0, 1.0));
        assert_eq!(ed("abs(x)", 0.0), (0.0, 0.0));
    }

    #[test]
    fn integer_powers_of_negative_base() {
        assert_eq!(ed("x^3", -2.0), (-8.0, 12.0));
        assert_eq!(ed("x^-1", -2.0), (-0.5, -0.25));
    }

    #[test]
    fn domain_faults() {
        let e = parse("ln(x - 1)").unwrap();
        let err = eval_d(&e, 0.5).unwrap_err();
        assert_eq!(err.x, 0.5);
        assert_eq!(err.subexpr, "ln((x - 1))");
        assert!(eval_d(&parse("sqrt(x)").unwrap(), -1.0).is_err());
        assert!(eval_d(&parse("1/x").unwrap(), 0.0).is_err());
        assert!(eval_d(&parse("x^0.5").unwrap(), -1.0).is_err());
        assert!(eval_d(&parse("x^-2").unwrap(), 0.0).is_err());
        assert!(eval_d(&parse("exp(exp(x))").unwrap(), 10.0).is_err());
    }

    fn poly(coeffs: &[f64]) -> String {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| format!("({c})*x^{k}"))
            .collect::<Vec<_>>()
            .join(" + ")
    }

    proptest! {
        // Hand-expanded derivative of sum c_k x^k is sum k c_k x^(k-1).
        #[test]
        fn polynomial_derivatives_match_symbolic(
            coeffs in proptest::collection::vec(-5.0f64..5.0, 1..=6),
            xs in proptest::collection::vec(-2.0f64..2.0, 100),
        ) {
            let e = parse(&poly(&coeffs)).unwrap();
            for x in xs {
                let (_, d) = eval_d(&e, x).unwrap();
                let mut want = 0.0;
                let mut scale = 0.0;
                for (k, c) in coeffs.iter().enumerate().skip(1) {
                    let term = k as f64 * c * x.powi(k as i32 - 1);
                    want += term;
                    scale += term.abs();
                }
                prop_assert!((d - want).abs() <= 1e-12 * scale.max(1e-300) + 1e-300,
                    "x={x} d={d} want={want}");
            }
        }
    }
}
