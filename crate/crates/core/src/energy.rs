//! First-order radio model and per-node energy bookkeeping.

use serde::Serialize;

use crate::error::{invalid, Result};

/// Electronics energy per bit, J.
pub const E_ELEC: f64 = 50e-9;
/// Amplifier energy per bit per m², J.
pub const EPS_AMP: f64 = 100e-12;

pub fn tx_energy(bits: u64, distance: f64) -> Result<f64> {
    if !(distance >= 0.0 && distance.is_finite()) {
        return Err(invalid("distance", format!("must be >= 0, got {distance}")));
    }
    let b = bits as f64;
    Ok(E_ELEC * b + EPS_AMP * b * distance * distance)
}

pub fn rx_energy(bits: u64) -> f64 {
    E_ELEC * bits as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyLedger {
    pub tx: Vec<f64>,
    pub rx: Vec<f64>,
    /// Bits sent by transmissions originating at each level; index 0 holds
    /// leaf-to-head traffic, index `i` traffic sent by level-`i` heads.
    pub bits_per_level: Vec<u64>,
}

impl EnergyLedger {
    pub fn new(node_count: usize, depth: usize) -> Self {
        Self {
            tx: vec![0.0; node_count],
            rx: vec![0.0; node_count],
            bits_per_level: vec![0; depth + 1],
        }
    }

    /// Debits the sender's transmit cost and the receiver's receive cost.
    pub fn charge(
        &mut self,
        sender: usize,
        receiver: usize,
        bits: u64,
        distance: f64,
        level: usize,
    ) -> Result<()> {
        let n = self.tx.len();
        if sender >= n || receiver >= n {
            return Err(invalid(
                "node",
                format!("sender {sender} / receiver {receiver} outside {n} nodes"),
            ));
        }
        if level >= self.bits_per_level.len() {
            return Err(invalid("level", format!("{level} beyond ledger depth")));
        }
        self.tx[sender] += tx_energy(bits, distance)?;
        self.rx[receiver] += rx_energy(bits);
        self.bits_per_level[level] += bits;
        Ok(())
    }

    pub fn total_tx(&self) -> f64 {
        self.tx.iter().sum()
    }

    pub fn total_rx(&self) -> f64 {
        self.rx.iter().sum()
    }

    pub fn total(&self) -> f64 {
        self.total_tx() + self.total_rx()
    }

    pub fn total_bits(&self) -> u64 {
        self.bits_per_level.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radio_model_values() {
        assert_eq!(tx_energy(0, 123.0).unwrap(), 0.0);
        assert!((tx_energy(1000, 0.0).unwrap() - 5.0e-5).abs() < 1e-18);
        assert!((tx_energy(1000, 100.0).unwrap() - 1.05e-3).abs() < 1e-15);
        assert_eq!(rx_energy(0), 0.0);
        assert!((rx_energy(1000) - 5.0e-5).abs() < 1e-18);
        assert!(tx_energy(10, -1.0).is_err());
    }

    #[test]
    fn charge_is_linear_at_zero_distance() {
        let mut twice = EnergyLedger::new(3, 2);
        twice.charge(0, 1, 500, 0.0, 1).unwrap();
        twice.charge(0, 1, 500, 0.0, 1).unwrap();
        let mut once = EnergyLedger::new(3, 2);
        once.charge(0, 1, 1000, 0.0, 1).unwrap();
        assert!((twice.total() - once.total()).abs() < 1e-18);
        assert_eq!(twice.total_bits(), once.total_bits());
    }

    #[test]
    fn unknown_nodes_rejected() {
        let mut l = EnergyLedger::new(2, 2);
        assert!(l.charge(0, 5, 10, 1.0, 1).is_err());
        assert!(l.charge(7, 0, 10, 1.0, 1).is_err());
    }
}
