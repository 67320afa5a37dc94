//! Reference distribution for the transformed response.
//!
//! Only the standard normal ships, but the transformation code talks to it
//! through [`Reference`] so another location-scale reference can be slotted in.

use libm::erfc;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc_inv;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
#[inline]
pub fn pdf(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
}

#[inline]
pub fn ln_pdf(z: f64) -> f64 {
    -0.5 * z * z - LN_SQRT_2PI
}

/// Standard normal CDF via the complementary error function.
#[inline]
pub fn cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// log Φ(z), accurate deep into the lower tail.
pub fn ln_cdf(z: f64) -> f64 {
    if z > -30.0 {
        if z > 0.0 {
            (-cdf(-z)).ln_1p()
        } else {
            cdf(z).ln()
        }
    } else {
        // asymptotic Mills-ratio expansion
        let z2 = z * z;
        ln_pdf(z) - (-z).ln() + (-1.0 / z2 + 3.0 / (z2 * z2)).ln_1p()
    }
}

/// φ(z)/Φ(z), the derivative of log Φ.
pub fn mills_lower(z: f64) -> f64 {
    if z > -30.0 {
        (ln_pdf(z) - ln_cdf(z)).exp()
    } else {
        let z2 = z * z;
        -z / (1.0 - 1.0 / z2 + 3.0 / (z2 * z2))
    }
}

/// Inverse CDF: erfc-based rational approximation plus one Newton polish.
pub fn quantile(u: f64) -> f64 {
    if u <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if u >= 1.0 {
        return f64::INFINITY;
    }
    let z = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * u);
    let dens = pdf(z);
    if dens > 1e-300 {
        z - (cdf(z) - u) / dens
    } else {
        z
    }
}

/// Reference distribution F_Z of the transformed variable.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    #[default]
    StandardNormal,
}

impl Reference {
    #[inline]
    pub fn cdf(&self, z: f64) -> f64 {
        match self {
            Reference::StandardNormal => cdf(z),
        }
    }

    #[inline]
    pub fn pdf(&self, z: f64) -> f64 {
        match self {
            Reference::StandardNormal => pdf(z),
        }
    }

    #[inline]
    pub fn ln_pdf(&self, z: f64) -> f64 {
        match self {
            Reference::StandardNormal => ln_pdf(z),
        }
    }

    /// d/dz log f_Z(z).
    #[inline]
    pub fn d_ln_pdf(&self, z: f64) -> f64 {
        match self {
            Reference::StandardNormal => -z,
        }
    }

    #[inline]
    pub fn ln_cdf(&self, z: f64) -> f64 {
        match self {
            Reference::StandardNormal => ln_cdf(z),
        }
    }

    /// log(1 - F_Z(z)).
    #[inline]
    pub fn ln_sf(&self, z: f64) -> f64 {
        match self {
            Reference::StandardNormal => ln_cdf(-z),
        }
    }

    /// d/dz log F_Z(z).
    #[inline]
    pub fn d_ln_cdf(&self, z: f64) -> f64 {
        match self {
            Reference::StandardNormal => mills_lower(z),
        }
    }

    /// d/dz log(1 - F_Z(z)).
    #[inline]
    pub fn d_ln_sf(&self, z: f64) -> f64 {
        match self {
            Reference::StandardNormal => -mills_lower(-z),
        }
    }

    #[inline]
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            Reference::StandardNormal => quantile(u),
        }
    }

    /// log(F_Z(hi) - F_Z(lo)) for lo < hi, computed on the side that avoids cancellation.
    pub fn ln_interval(&self, lo: f64, hi: f64) -> f64 {
        if lo >= hi {
            return f64::NEG_INFINITY;
        }
        if lo > 0.0 {
            // both in the upper tail: use survival functions
            let a = self.ln_sf(lo);
            let b = self.ln_sf(hi);
            a + (-(b - a).exp()).ln_1p()
        } else {
            let a = self.ln_cdf(hi);
            let b = self.ln_cdf(lo);
            a + (-(b - a).exp()).ln_1p()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_reference_values() {
        assert!((cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-14);
        assert!((cdf(-3.0) - 0.001_349_898_031_630_094_6).abs() < 1e-17);
    }

    #[test]
    fn quantile_roundtrip() {
        for &u in &[1e-12, 1e-6, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0 - 1e-9] {
            let z = quantile(u);
            assert!((cdf(z) - u).abs() <= 1e-14 * u.max(1e-3), "u={u}");
        }
    }

    #[test]
    fn ln_cdf_tail_matches_direct() {
        for &z in &[-5.0, -20.0, -29.0] {
            assert!((ln_cdf(z) - cdf(z).ln()).abs() < 1e-10);
        }
        // continuity across the asymptotic switch
        assert!((ln_cdf(-30.0 - 1e-9) - ln_cdf(-30.0 + 1e-9)).abs() < 1e-6);
        assert!(ln_cdf(-200.0).is_finite());
    }

    #[test]
    fn interval_mass() {
        let r = Reference::StandardNormal;
        let v = r.ln_interval(-1.0, 1.0).exp();
        assert!((v - 0.682_689_492_137_085_9).abs() < 1e-14);
        let v = r.ln_interval(8.0, 9.0).exp();
        assert!((v - (cdf(-8.0) - cdf(-9.0))).abs() < 1e-25);
    }

    proptest::proptest! {
        #[test]
        fn quantile_inverts_cdf(u in 1e-12f64..(1.0 - 1e-12)) {
            let z = quantile(u);
            proptest::prop_assert!((cdf(z) - u).abs() <= 1e-13 * u.min(1.0 - u).max(1e-3));
        }
    }
}
