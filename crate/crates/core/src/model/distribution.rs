use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Law of a single finite-domain variable over values `0..domain`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Distribution {
    Uniform { domain: u64 },
    Weights(Vec<f64>),
}

impl Distribution {
    pub fn uniform(domain: u64) -> Self {
        Distribution::Uniform { domain }
    }

    /// Uniform over `0..domain`; a single value becomes a point mass on a
    /// two-value domain.
    pub fn uniform_padded(domain: u64) -> Self {
        if domain == 1 {
            Distribution::Weights(vec![1.0, 0.0])
        } else {
            Self::uniform(domain)
        }
    }

    pub fn bits() -> Self {
        Self::uniform(2)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Distribution::Uniform { domain } if *domain < 2 => Err(Error::param(format!(
                "domain must have at least 2 values, got {domain}"
            ))),
            Distribution::Uniform { .. } => Ok(()),
            Distribution::Weights(w) => {
                if w.len() < 2 {
                    return Err(Error::param("domain must have at least 2 values"));
                }
                if w.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                    return Err(Error::param("weights must be finite and nonnegative"));
                }
                let s: f64 = w.iter().sum();
                if (s - 1.0).abs() > 1e-12 {
                    return Err(Error::param(format!("weights sum to {s}, not 1")));
                }
                Ok(())
            }
        }
    }

    pub fn domain(&self) -> u64 {
        match self {
            Distribution::Uniform { domain } => *domain,
            Distribution::Weights(w) => w.len() as u64,
        }
    }

    #[inline]
    pub fn prob(&self, x: u64) -> f64 {
        match self {
            Distribution::Uniform { domain } => {
                if x < *domain {
                    1.0 / *domain as f64
                } else {
                    0.0
                }
            }
            Distribution::Weights(w) => w.get(x as usize).copied().unwrap_or(0.0),
        }
    }

    /// Values with positive probability, ascending.
    pub fn support(&self) -> Box<dyn Iterator<Item = u64> + '_> {
        match self {
            Distribution::Uniform { domain } => Box::new(0..*domain),
            Distribution::Weights(w) => Box::new(
                w.iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(i, _)| i as u64),
            ),
        }
    }

    pub fn support_len(&self) -> u64 {
        match self {
            Distribution::Uniform { domain } => *domain,
            Distribution::Weights(w) => w.iter().filter(|&&p| p > 0.0).count() as u64,
        }
    }

    pub fn in_support(&self, x: u64) -> bool {
        self.prob(x) > 0.0
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, Distribution::Uniform { .. })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self {
            Distribution::Uniform { domain } => rng.gen_range(0..*domain),
            Distribution::Weights(w) => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut last = 0;
                for (i, &p) in w.iter().enumerate() {
                    if p > 0.0 {
                        acc += p;
                        last = i;
                        if u < acc {
                            return i as u64;
                        }
                    }
                }
                last as u64
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn validation() {
        assert!(Distribution::uniform(1).validate().is_err());
        assert!(Distribution::Weights(vec![0.5, 0.5]).validate().is_ok());
        assert!(Distribution::Weights(vec![0.5, 0.6]).validate().is_err());
        assert!(Distribution::Weights(vec![-0.5, 1.5]).validate().is_err());
    }

    #[test]
    fn support_and_sampling() {
        let d = Distribution::Weights(vec![0.0, 0.25, 0.75]);
        assert_eq!(d.support().collect::<Vec<_>>(), vec![1, 2]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let mut counts = [0; 3];
        for _ in 0..4000 {
            counts[d.sample(&mut rng) as usize] += 1;
        }
        assert_eq!(counts[0], 0);
        assert!((800..1200).contains(&counts[1]));
    }
}
