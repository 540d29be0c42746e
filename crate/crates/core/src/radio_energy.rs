//! First-order radio model: transmit, receive and aggregation costs.
//!
//! All quantities are SI: joules, meters, bits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radio coefficients of the first-order model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioParams {
    /// Electronics energy, J/bit.
    pub e_elec: f64,
    /// Free-space amplifier, J/bit/m².
    pub e_fs: f64,
    /// Multipath amplifier, J/bit/m⁴.
    pub e_mp: f64,
    /// Data aggregation, J/bit.
    pub e_da: f64,
    /// Packet length in bits.
    pub packet_bits: u64,
}

/// Joules per nanojoule, as a divisor.
pub const NANO: f64 = 1e9;
/// Joules per picojoule, as a divisor.
pub const PICO: f64 = 1e12;

impl Default for RadioParams {
    fn default() -> Self {
        Self::reference()
    }
}

impl RadioParams {
    /// E_elec = 50 nJ/bit, E_fs = 10 pJ/bit/m², E_mp = 0.0013 pJ/bit/m⁴,
    /// E_DA = 5 nJ/bit, l = 4000 bits.
    pub fn reference() -> Self {
        Self {
            e_elec: 50.0 / NANO,
            e_fs: 10.0 / PICO,
            e_mp: 0.0013 / PICO,
            e_da: 5.0 / NANO,
            packet_bits: 4000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let coeffs = [
            ("e_elec", self.e_elec),
            ("e_fs", self.e_fs),
            ("e_mp", self.e_mp),
            ("e_da", self.e_da),
        ];
        for (name, v) in coeffs {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "radio coefficient {name} must be finite and > 0, got {v}"
                )));
            }
        }
        if self.packet_bits == 0 {
            return Err(Error::InvalidParameter("packet_bits must be > 0".into()));
        }
        let dth = self.distance_threshold();
        if !(dth.is_finite() && dth > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "distance threshold sqrt(e_fs/e_mp) is not finite and positive: {dth}"
            )));
        }
        Ok(())
    }

    /// Crossover distance between the free-space and multipath branches.
    pub fn distance_threshold(&self) -> f64 {
        (self.e_fs / self.e_mp).sqrt()
    }

    /// Cost of sending `bits` over `d` meters. The free-space branch is used
    /// up to and including `d_th`.
    pub fn tx_energy(&self, bits: u64, d: f64) -> Result<f64> {
        if !(d >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "transmit distance must be >= 0, got {d}"
            )));
        }
        let bits = bits as f64;
        let amp = if d <= self.distance_threshold() {
            self.e_fs * d * d
        } else {
            self.e_mp * d.powi(4)
        };
        Ok(bits * self.e_elec + bits * amp)
    }

    pub fn rx_energy(&self, bits: u64) -> f64 {
        bits as f64 * self.e_elec
    }

    /// Cost of fusing `n_packets` packets of `bits` each.
    pub fn aggregation_energy(&self, bits: u64, n_packets: u64) -> f64 {
        n_packets as f64 * bits as f64 * self.e_da
    }
}

/// Free function form of [`RadioParams::distance_threshold`].
pub fn distance_threshold(params: &RadioParams) -> f64 {
    params.distance_threshold()
}

pub fn tx_energy(params: &RadioParams, bits: u64, d: f64) -> Result<f64> {
    params.tx_energy(bits, d)
}

pub fn rx_energy(params: &RadioParams, bits: u64) -> f64 {
    params.rx_energy(bits)
}

pub fn aggregation_energy(params: &RadioParams, bits: u64, n_packets: u64) -> f64 {
    params.aggregation_energy(bits, n_packets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn threshold_reference() {
        let p = RadioParams::reference();
        // sqrt(10 / 0.0013)
        assert!((p.distance_threshold() - 87.705_801_930_702_92).abs() < 1e-9);
    }

    #[test]
    fn threshold_trivial_ratios() {
        let mut p = RadioParams::reference();
        p.e_fs = p.e_mp;
        assert!((p.distance_threshold() - 1.0).abs() < 1e-15);
        p.e_fs = 4.0 * p.e_mp;
        assert!((p.distance_threshold() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn tx_examples() {
        let p = RadioParams::reference();
        assert!(close(p.tx_energy(4000, 50.0).unwrap(), 3.0e-4, 1e-12));
        assert!(close(p.tx_energy(4000, 0.0).unwrap(), 2.0e-4, 1e-12));
        assert!(close(p.tx_energy(4000, 100.0).unwrap(), 7.2e-4, 1e-12));
    }

    #[test]
    fn tx_rejects_negative_distance() {
        let p = RadioParams::reference();
        assert!(p.tx_energy(4000, -1.0).is_err());
        assert!(p.tx_energy(4000, f64::NAN).is_err());
    }

    #[test]
    fn rx_and_aggregation_examples() {
        let p = RadioParams::reference();
        assert!(close(p.rx_energy(4000), 2.0e-4, 1e-12));
        assert_eq!(p.rx_energy(0), 0.0);
        assert!(close(p.rx_energy(1), 5.0e-8, 1e-12));
        assert!(close(p.aggregation_energy(4000, 10), 2.0e-4, 1e-12));
        assert_eq!(p.aggregation_energy(4000, 0), 0.0);
        assert!(close(p.aggregation_energy(4000, 1), 2.0e-5, 1e-12));
    }

    #[test]
    fn branches_agree_at_threshold() {
        let p = RadioParams::reference();
        let dth = p.distance_threshold();
        let fs = p.e_fs * dth * dth;
        let mp = p.e_mp * dth.powi(4);
        assert!(close(fs, mp, 1e-12));
        let below = p.tx_energy(4000, dth - 1e-9).unwrap();
        let above = p.tx_energy(4000, dth + 1e-9).unwrap();
        assert!((below - above).abs() < 1e-12);
    }

    #[test]
    fn validate_rejects_bad_params() {
        let mut p = RadioParams::reference();
        assert!(p.validate().is_ok());
        p.e_mp = 0.0;
        assert!(p.validate().is_err());
        let mut p = RadioParams::reference();
        p.packet_bits = 0;
        assert!(p.validate().is_err());
    }

    proptest! {
        #[test]
        fn tx_monotone_in_distance(a in 0.0f64..400.0, b in 0.0f64..400.0) {
            let p = RadioParams::reference();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-6);
            prop_assert!(p.tx_energy(4000, lo).unwrap() < p.tx_energy(4000, hi).unwrap());
        }

        #[test]
        fn tx_linear_in_bits(bits in 1u64..100_000, d in 0.0f64..300.0) {
            let p = RadioParams::reference();
            let one = p.tx_energy(1, d).unwrap();
            let many = p.tx_energy(bits, d).unwrap();
            prop_assert!(close(many, one * bits as f64, 1e-12));
            prop_assert!(p.tx_energy(bits + 1, d).unwrap() > many);
        }
    }
}
