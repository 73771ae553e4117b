//! Conversions between lab units (MHz, μs) and the internal rad/s, s convention.

use std::f64::consts::TAU;

/// Ordinary frequency in MHz to angular frequency in rad/s.
pub fn mhz_to_rad_s(f_mhz: f64) -> f64 {
    f_mhz * TAU * 1e6
}

/// Angular frequency in rad/s to ordinary frequency in MHz.
pub fn rad_s_to_mhz(w: f64) -> f64 {
    w / (TAU * 1e6)
}

pub fn us_to_s(t_us: f64) -> f64 {
    t_us / 1e6
}

pub fn s_to_us(t: f64) -> f64 {
    t * 1e6
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_mhz_is_two_pi_megarad() {
        assert_eq!(mhz_to_rad_s(1.0), 2.0 * std::f64::consts::PI * 1e6);
        assert!((rad_s_to_mhz(mhz_to_rad_s(0.8)) - 0.8).abs() < 1e-15);
        assert_eq!(us_to_s(20.0), 2e-5);
    }
}
