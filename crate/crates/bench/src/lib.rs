//! Fixtures shared by the kernel benchmarks in `benches/`.

use alrh::spectrum::{DiscreteSpectrum, Pole};
use alrh::{LatticeState, C64};

/// `A e^{-(n/w)²}` on `|n| ≤ half_window`.
pub fn pulse(amplitude: f64, width: f64, half_window: i64) -> LatticeState {
    LatticeState::from_fn(-half_window, half_window, 0.0, |n| C64::new(amplitude * (-(n as f64 / width).powi(2)).exp(), 0.0))
        .expect("finite pulse")
}

/// Two simple poles off the axes.
pub fn two_poles() -> DiscreteSpectrum {
    DiscreteSpectrum::new(vec![
        Pole::simple(C64::new(0.3, 1.4), C64::new(0.8, -0.3)),
        Pole::simple(C64::new(-0.9, 1.2), C64::new(0.5, 0.2)),
    ])
    .expect("valid spectrum")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_valid() {
        assert_eq!(pulse(0.1, 4.0, 32).len(), 65);
        assert_eq!(two_poles().total_order(), 2);
    }
}
