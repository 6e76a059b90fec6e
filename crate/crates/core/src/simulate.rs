//! Synthetic data from `Y = a·X1 + b·X2 + ε` with independent standard
//! normal `X1`, `X2` and `ε ~ N(0, noise_sd²)`.

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::seed;
use crate::tabular::DataTable;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSimulation {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub noise_sd: f64,
    pub seed: u64,
}

impl Default for LinearSimulation {
    fn default() -> Self {
        LinearSimulation {
            n: 1000,
            a: 5.0,
            b: 3.0,
            noise_sd: 1.0,
            seed: 0,
        }
    }
}

impl LinearSimulation {
    /// Columns `x1`, `x2`, `y`; identical output for identical parameters.
    pub fn generate(&self) -> Result<DataTable> {
        if self.n == 0 {
            return Err(Error::Arg("simulation needs n ≥ 1".into()));
        }
        if !self.noise_sd.is_finite() || self.noise_sd < 0.0 {
            return Err(Error::Arg(format!(
                "noise_sd must be ≥ 0, got {}",
                self.noise_sd
            )));
        }
        let mut rng = seed::rng(self.seed, seed::stream::SIMULATION);
        let mut x1 = Vec::with_capacity(self.n);
        let mut x2 = Vec::with_capacity(self.n);
        let mut y = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            let u: f64 = StandardNormal.sample(&mut rng);
            let v: f64 = StandardNormal.sample(&mut rng);
            let e: f64 = StandardNormal.sample(&mut rng);
            let signal = self.a * u + self.b * v;
            x1.push(u);
            x2.push(v);
            y.push(if self.noise_sd == 0.0 {
                signal
            } else {
                signal + self.noise_sd * e
            });
        }
        DataTable::from_columns(vec![("x1", x1), ("x2", x2), ("y", y)])
    }
}
