//! Gaussian latent codes: sampling and the KL term against N(0, I).

use crate::tape::{Tape, Var};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentCode {
    pub mu: Vec<f64>,
    pub logvar: Vec<f64>,
    pub z: Option<Vec<f64>>,
}

impl LatentCode {
    pub fn new(mu: Vec<f64>, logvar: Vec<f64>) -> Self {
        assert_eq!(mu.len(), logvar.len());
        Self { mu, logvar, z: None }
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> &[f64] {
        self.z = Some(reparameterize(&self.mu, &self.logvar, rng));
        self.z.as_deref().expect("just set")
    }
}

pub fn standard_normal<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

/// `mu + exp(logvar / 2) * eps` with `eps ~ N(0, I)` drawn from `rng`.
pub fn reparameterize<R: Rng + ?Sized>(mu: &[f64], logvar: &[f64], rng: &mut R) -> Vec<f64> {
    assert_eq!(mu.len(), logvar.len());
    let eps = standard_normal(mu.len(), rng);
    mu.iter()
        .zip(logvar)
        .zip(&eps)
        .map(|((m, l), e)| m + (0.5 * l).exp() * e)
        .collect()
}

/// Differentiable reparameterization with a fixed noise vector.
pub fn reparameterize_on(tape: &mut Tape<'_>, mu: Var, logvar: Var, eps: &[f64]) -> Var {
    let half = tape.scale(logvar, 0.5);
    let std = tape.exp(half);
    let e = tape.constant(eps.to_vec());
    let noise = tape.mul(std, e);
    tape.add(mu, noise)
}

pub fn kld(mu: &[f64], logvar: &[f64]) -> f64 {
    crate::tape::kld_value(mu, logvar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn vanishing_variance_returns_the_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mu = vec![0.3, -1.2, 4.0];
        let z = reparameterize(&mu, &[-40.0; 3], &mut rng);
        for (a, b) in z.iter().zip(&mu) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn same_seed_same_sample() {
        let draw = |s| reparameterize(&[0.0; 4], &[0.0; 4], &mut ChaCha8Rng::seed_from_u64(s));
        assert_eq!(draw(9), draw(9));
        assert_ne!(draw(9), draw(10));
    }

    #[test]
    fn sample_mean_converges() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mu = [0.7, -0.2];
        let logvar = [0.5f64, -1.0];
        let n = 100_000;
        let mut sum = [0.0; 2];
        for _ in 0..n {
            let z = reparameterize(&mu, &logvar, &mut rng);
            sum[0] += z[0];
            sum[1] += z[1];
        }
        for k in 0..2 {
            let sigma = (0.5 * logvar[k]).exp();
            let mean = sum[k] / n as f64;
            assert!((mean - mu[k]).abs() < 3.0 * sigma / (n as f64).sqrt(), "{k}: {mean}");
        }
    }

    #[test]
    fn kld_closed_forms() {
        assert_eq!(kld(&[0.0], &[0.0]), 0.0);
        assert!((kld(&[1.0, 0.0], &[0.0, 0.0]) - 0.5).abs() < 1e-15);
        assert!((kld(&[1.0, 1.0], &[0.0, 0.0]) - 1.0).abs() < 1e-15);
        let mut last = -1.0;
        for m in [0.0, 0.5, 1.0, 2.0] {
            let k = kld(&[m, m], &[0.3, -0.3]);
            assert!(k >= 0.0 && k > last);
            last = k;
        }
    }
}
