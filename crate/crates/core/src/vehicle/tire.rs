use alloc::format;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Magic-formula coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacejkaCoeffs {
    /// Stiffness factor (1/rad).
    pub b: f64,
    /// Shape factor.
    pub c: f64,
    /// Peak force (N).
    pub d: f64,
    /// Curvature factor.
    pub e: f64,
}

impl PacejkaCoeffs {
    pub(crate) fn validate(&self, name: &str) -> Result<()> {
        let ok = self.b > 0.0 && self.c > 1.0 && self.d > 0.0 && self.e.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("{name} requires B > 0, C > 1, D > 0, finite E; got {self:?}")))
        }
    }

    /// Small-slip cornering stiffness B·C·D.
    pub fn cornering_stiffness(&self) -> f64 {
        self.b * self.c * self.d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TireModel {
    #[default]
    Linear,
    Pacejka,
}

/// Lateral force of a linear tire; opposes the slip angle.
pub fn linear_tire_lateral_force(slip_angle: f64, stiffness: f64) -> f64 {
    -stiffness * slip_angle
}

/// Lateral force of the magic-formula tire, signed to oppose the slip angle.
pub fn pacejka_lateral_force(slip_angle: f64, coeffs: &PacejkaCoeffs) -> f64 {
    let PacejkaCoeffs { b, c, d, e } = *coeffs;
    let ba = b * slip_angle;
    let force = d * libm::sin(c * libm::atan(ba - e * (ba - libm::atan(ba))));
    -force
}

#[cfg(test)]
mod tests {
    use super::*;

    const REF: PacejkaCoeffs = PacejkaCoeffs { b: 10.0, c: 1.9, d: 1.0, e: 0.97 };

    #[test]
    fn linear_examples() {
        assert_eq!(linear_tire_lateral_force(0.0, 80_000.0), 0.0);
        assert!((linear_tire_lateral_force(0.01, 80_000.0) + 800.0).abs() < 1e-9);
        assert!(linear_tire_lateral_force(0.02, 80_000.0) < linear_tire_lateral_force(0.01, 80_000.0));
    }

    #[test]
    fn pacejka_zero_and_reference_point() {
        assert_eq!(pacejka_lateral_force(0.0, &REF), 0.0);
        // Multiprecision evaluation: 0.735619337570726882...
        let f = pacejka_lateral_force(0.05, &REF);
        assert!((f.abs() - 0.735_619_337_570_727).abs() < 1e-12, "{f}");
        assert!(f < 0.0);
    }

    #[test]
    fn pacejka_small_slip_slope() {
        let a = 1e-7;
        let slope = -pacejka_lateral_force(a, &REF) / a;
        assert!((slope - REF.cornering_stiffness()).abs() / REF.cornering_stiffness() < 1e-6);
    }

    #[test]
    fn invalid_coeffs_rejected() {
        let bad = PacejkaCoeffs { c: 0.9, ..REF };
        assert!(bad.validate("front").is_err());
    }
}
