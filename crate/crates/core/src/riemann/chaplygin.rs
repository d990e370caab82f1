//! Chaplygin gas (`gamma = -1`): `R2` is frozen and `R1` obeys the
//! constant-coefficient Riccati equation `dR1/dt = -R1^2 + b R2^2` with
//! `b = 1 + K`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChaplyginOutcome {
    pub b: f64,
    pub blows_up: bool,
    pub blowup_time: Option<f64>,
}

/// Closed-form solution of the frozen-`R2` Riccati equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChaplyginSolution {
    pub r1_0: f64,
    pub r2_0: f64,
    pub b: f64,
}

impl ChaplyginSolution {
    pub fn new(r1_0: f64, r2_0: f64, k0: f64) -> Self {
        Self {
            r1_0,
            r2_0,
            b: 1.0 + k0,
        }
    }

    /// `q = b R2^2`, the constant source term.
    fn q(&self) -> f64 {
        self.b * self.r2_0 * self.r2_0
    }

    /// `R1(t)`, valid for `t` before any blow-up.
    pub fn r1_at(&self, t: f64) -> f64 {
        let q = self.q();
        let r0 = self.r1_0;
        if q > 0.0 {
            let a = q.sqrt();
            let th = (a * t).tanh();
            a * (r0 + a * th) / (a + r0 * th)
        } else if q < 0.0 {
            let w = (-q).sqrt();
            w * ((r0 / w).atan() - w * t).tan()
        } else {
            r0 / (1.0 + r0 * t)
        }
    }

    pub fn outcome(&self) -> ChaplyginOutcome {
        let q = self.q();
        let r0 = self.r1_0;
        let t = if q > 0.0 {
            let a = q.sqrt();
            // Blow-up iff R1 starts strictly below the stable equilibrium -a.
            (r0 < -a).then(|| (a / r0.abs()).atanh() / a)
        } else if q < 0.0 {
            // No real equilibria: every solution reaches -infinity.
            let w = (-q).sqrt();
            Some((std::f64::consts::FRAC_PI_2 + (r0 / w).atan()) / w)
        } else {
            (r0 < 0.0).then(|| 1.0 / r0.abs())
        };
        ChaplyginOutcome {
            b: self.b,
            blows_up: t.is_some(),
            blowup_time: t,
        }
    }
}

pub fn chaplygin_solve(r1_0: f64, r2_0: f64, k0: f64) -> ChaplyginOutcome {
    ChaplyginSolution::new(r1_0, r2_0, k0).outcome()
}
