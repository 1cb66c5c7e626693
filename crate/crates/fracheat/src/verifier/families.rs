//! Seeded smooth test functions with values in `[0, 1]` and analytic gradients.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Value below which a test function counts as zero when sizing quadrature boxes.
pub const NEGLIGIBLE: f64 = 1e-9;
const WAVES: usize = 3;

/// One cosine mode `coef * cos(k . (z - c) + phase)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wave {
    pub k: Vec<f64>,
    pub phase: f64,
    pub coef: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TestFunction {
    /// `exp(-sum rate_i (z_i - c_i)^2)`.
    Gaussian { center: Vec<f64>, rates: Vec<f64> },
    /// `exp(1 - 1 / (1 - rho^2))` with `rho = |z - c| / radius`, zero outside.
    Bump { center: Vec<f64>, radius: f64 },
    /// `exp(-rate |z - c|^2) (1 + sum waves) / (1 + sum |coef|)`, positive since `sum |coef| < 1`.
    Trig { center: Vec<f64>, rate: f64, waves: Vec<Wave> },
}

impl TestFunction {
    /// Family `index % 3` in `dim` variables, centered inside `[-spread, spread]^dim`.
    pub fn draw(rng: &mut ChaCha8Rng, index: usize, dim: usize, spread: f64) -> Self {
        let center: Vec<f64> = (0..dim).map(|_| rng.random_range(-spread..=spread)).collect();
        match index % 3 {
            0 => Self::Gaussian { center, rates: (0..dim).map(|_| rng.random_range(0.5..3.0)).collect() },
            1 => Self::Bump { center, radius: rng.random_range(0.8..2.5) },
            _ => {
                let rate = rng.random_range(0.5..2.0);
                let mut waves: Vec<Wave> = (0..WAVES)
                    .map(|_| Wave {
                        k: (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect(),
                        phase: rng.random_range(0.0..std::f64::consts::TAU),
                        coef: rng.random_range(0.0..1.0),
                    })
                    .collect();
                let total: f64 = waves.iter().map(|w| w.coef).sum();
                let scale = 0.9 / total.max(0.9);
                waves.iter_mut().for_each(|w| w.coef *= scale);
                Self::Trig { center, rate, waves }
            }
        }
    }

    /// Smooth compact bump only.
    pub fn draw_bump(rng: &mut ChaCha8Rng, dim: usize, spread: f64) -> Self {
        let center = (0..dim).map(|_| rng.random_range(-spread..=spread)).collect();
        Self::Bump { center, radius: rng.random_range(0.8..2.5) }
    }

    pub fn center(&self) -> &[f64] {
        match self {
            Self::Gaussian { center, .. } | Self::Bump { center, .. } | Self::Trig { center, .. } => center,
        }
    }

    pub fn dim(&self) -> usize {
        self.center().len()
    }

    /// Radius around the center beyond which the value is below [`NEGLIGIBLE`].
    pub fn reach(&self) -> f64 {
        let floor = -NEGLIGIBLE.ln();
        match self {
            Self::Gaussian { rates, .. } => (floor / rates.iter().cloned().fold(f64::INFINITY, f64::min)).sqrt(),
            Self::Bump { radius, .. } => *radius,
            Self::Trig { rate, .. } => (floor / rate).sqrt(),
        }
    }

    pub fn value(&self, z: &[f64]) -> f64 {
        match self {
            Self::Gaussian { center, rates } => {
                let q: f64 = z.iter().zip(center).zip(rates).map(|((a, c), r)| r * (a - c) * (a - c)).sum();
                (-q).exp()
            }
            Self::Bump { center, radius } => {
                let rho2 = dist2(z, center) / (radius * radius);
                if rho2 >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - rho2)).exp()
                }
            }
            Self::Trig { center, rate, waves } => {
                let env = (-rate * dist2(z, center)).exp();
                let norm = 1.0 + waves.iter().map(|w| w.coef).sum::<f64>();
                let sum: f64 = waves.iter().map(|w| w.coef * (phase_of(w, z, center)).cos()).sum();
                env * (1.0 + sum) / norm
            }
        }
    }

    /// Value at a space-time point, with `t` the last coordinate.
    pub fn value_at(&self, x: &[f64], t: f64) -> f64 {
        let mut z = [0.0; 9];
        z[..x.len()].copy_from_slice(x);
        z[x.len()] = t;
        self.value(&z[..x.len() + 1])
    }

    pub fn gradient(&self, z: &[f64], out: &mut [f64]) {
        match self {
            Self::Gaussian { center, rates } => {
                let v = self.value(z);
                for i in 0..z.len() {
                    out[i] = -2.0 * rates[i] * (z[i] - center[i]) * v;
                }
            }
            Self::Bump { center, radius } => {
                let r2 = radius * radius;
                let rho2 = dist2(z, center) / r2;
                if rho2 >= 1.0 {
                    out.iter_mut().for_each(|g| *g = 0.0);
                    return;
                }
                let v = (1.0 - 1.0 / (1.0 - rho2)).exp();
                // d/dz exp(1 - 1/(1-rho2)) = -v (1-rho2)^{-2} d rho2/dz
                let factor = -v / ((1.0 - rho2) * (1.0 - rho2)) * 2.0 / r2;
                for i in 0..z.len() {
                    out[i] = factor * (z[i] - center[i]);
                }
            }
            Self::Trig { center, rate, waves } => {
                let env = (-rate * dist2(z, center)).exp();
                let norm = 1.0 + waves.iter().map(|w| w.coef).sum::<f64>();
                let sum: f64 = waves.iter().map(|w| w.coef * phase_of(w, z, center).cos()).sum();
                for i in 0..z.len() {
                    let d_env = -2.0 * rate * (z[i] - center[i]) * env;
                    let d_sum: f64 = waves.iter().map(|w| -w.coef * w.k[i] * phase_of(w, z, center).sin()).sum();
                    out[i] = (d_env * (1.0 + sum) + env * d_sum) / norm;
                }
            }
        }
    }
}

fn dist2(z: &[f64], c: &[f64]) -> f64 {
    z.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn phase_of(w: &Wave, z: &[f64], c: &[f64]) -> f64 {
    w.k.iter().zip(z).zip(c).map(|((k, a), b)| k * (a - b)).sum::<f64>() + w.phase
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn functions() -> Vec<TestFunction> {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        (0..9).map(|i| TestFunction::draw(&mut rng, i, 3, 1.0)).collect()
    }

    #[test]
    fn values_lie_in_the_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for f in functions() {
            for _ in 0..500 {
                let z: Vec<f64> = (0..3).map(|_| rng.random_range(-4.0..4.0)).collect();
                let v = f.value(&z);
                assert!((0.0..=1.0).contains(&v), "{v} for {f:?}");
            }
        }
    }

    #[test]
    fn gradients_match_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let h = 1e-6;
        for f in functions() {
            for _ in 0..50 {
                let c = f.center().to_vec();
                let z: Vec<f64> = c.iter().map(|v| v + rng.random_range(-0.7..0.7)).collect();
                let mut g = vec![0.0; 3];
                f.gradient(&z, &mut g);
                for i in 0..3 {
                    let (mut a, mut b) = (z.clone(), z.clone());
                    a[i] += h;
                    b[i] -= h;
                    let fd = (f.value(&a) - f.value(&b)) / (2.0 * h);
                    assert!((fd - g[i]).abs() <= 1e-6, "{f:?}: {fd} vs {}", g[i]);
                }
            }
        }
    }

    #[test]
    fn negligible_beyond_reach() {
        for f in functions() {
            let mut z = f.center().to_vec();
            z[0] += f.reach() * 1.001;
            assert!(f.value(&z) <= NEGLIGIBLE);
        }
    }

    #[test]
    fn draws_are_seeded() {
        let mut a = ChaCha8Rng::seed_from_u64(5);
        let mut b = ChaCha8Rng::seed_from_u64(5);
        for i in 0..6 {
            assert_eq!(TestFunction::draw(&mut a, i, 2, 1.0), TestFunction::draw(&mut b, i, 2, 1.0));
        }
    }
}
