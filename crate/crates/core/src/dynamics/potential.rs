use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pairwise power-law potential `V_a = (1/a) Σ r_ij^a` for unit masses.
///
/// `a = −1` is the Newtonian `−Σ 1/r_ij`. The pair function
/// `f(r) = r^a / a` has `f'(r) = r^(a−1) > 0` for every admissible exponent,
/// so the interaction is always attractive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PotentialSpec {
    exponent: f64,
}

impl PotentialSpec {
    pub fn new(exponent: f64) -> Result<Self> {
        if !exponent.is_finite() || exponent == 0.0 {
            return Err(Error::InvalidExponent(exponent));
        }
        Ok(Self { exponent })
    }

    pub fn newtonian() -> Self {
        Self { exponent: -1.0 }
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// `a = −2` makes the action scale-invariant, so periodic orbits of a
    /// fixed period are not isolated.
    pub fn is_scaling_degenerate(&self) -> bool {
        (self.exponent + 2.0).abs() < 1e-12
    }

    pub fn ensure_solvable(&self) -> Result<()> {
        if self.is_scaling_degenerate() {
            Err(Error::ScalingDegenerate)
        } else {
            Ok(())
        }
    }

    pub fn pair_energy(&self, r: f64) -> f64 {
        r.powf(self.exponent) / self.exponent
    }

    /// `f'(r) / r = r^(a−2)`: body i accelerates by `(q_j − q_i) · factor`.
    pub fn force_factor(&self, r: f64) -> f64 {
        if self.exponent == -1.0 {
            1.0 / (r * r * r)
        } else {
            r.powf(self.exponent - 2.0)
        }
    }
}

impl Default for PotentialSpec {
    fn default() -> Self {
        Self::newtonian()
    }
}

impl TryFrom<f64> for PotentialSpec {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<PotentialSpec> for f64 {
    fn from(p: PotentialSpec) -> f64 {
        p.exponent
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_and_nonfinite() {
        assert!(PotentialSpec::new(0.0).is_err());
        assert!(PotentialSpec::new(f64::NAN).is_err());
        assert!(PotentialSpec::new(f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn minus_two_is_flagged() {
        let p = PotentialSpec::new(-2.0).unwrap();
        assert!(p.is_scaling_degenerate());
        assert!(matches!(p.ensure_solvable(), Err(Error::ScalingDegenerate)));
        assert!(PotentialSpec::new(-2.5).unwrap().ensure_solvable().is_ok());
    }

    #[test]
    fn newtonian_convention() {
        let p = PotentialSpec::newtonian();
        assert_eq!(p.pair_energy(2.0), -0.5);
        assert_eq!(p.force_factor(2.0), 0.125);
        let q = PotentialSpec::new(-2.5).unwrap();
        assert!((q.force_factor(1.7) - 1.7f64.powf(-4.5)).abs() < 1e-15);
    }
}
