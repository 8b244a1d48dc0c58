//! Lumped-parameter compression-driver model and the ideal outlet target.

use crate::error::{Error, Result};
use num_complex::Complex;
use num_traits::Float;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LumpedParams<T = f64> {
    /// Chamber depth (chamber volume over diaphragm area).
    pub d: T,
    /// Compression ratio: diaphragm area over outlet area.
    pub kappa: T,
    pub rho0: T,
    pub c0: T,
    /// Diaphragm acceleration amplitude.
    pub a_d: T,
    /// Diaphragm-to-outlet distance used for the propagation phase.
    pub l: T,
}

impl<T: Float> LumpedParams<T> {
    pub fn wavenumber(&self, f_hz: T) -> T {
        let two_pi = T::from(std::f64::consts::TAU).unwrap();
        two_pi * f_hz / self.c0
    }
}

fn check_k<T: Float>(k: T) -> Result<()> {
    if k > T::zero() && k.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("wavenumber must be positive, got {}", k.to_f64().unwrap_or(f64::NAN))))
    }
}

/// Complex chamber pressure `rho0 a_d / (k (-d k + i / kappa))`.
pub fn lumped_pressure<T: Float>(params: &LumpedParams<T>, k: T) -> Result<Complex<T>> {
    check_k(k)?;
    let denom = Complex::new(-params.d * k * k, k / params.kappa);
    Ok(Complex::new(params.rho0 * params.a_d, T::zero()) / denom)
}

/// Pressure amplitude `rho0 a_d / (k sqrt(d^2 k^2 + 1 / kappa^2))`.
pub fn pressure_amplitude<T: Float>(params: &LumpedParams<T>, k: T) -> Result<T> {
    check_k(k)?;
    let dk = params.d * k;
    Ok(params.rho0 * params.a_d.abs() / (k * (dk * dk + (params.kappa * params.kappa).recip()).sqrt()))
}

/// Lumped pressure carried over the distance `l` by a plane wave.
pub fn ideal_outlet_target<T: Float>(params: &LumpedParams<T>, k: T) -> Result<Complex<T>> {
    let p = lumped_pressure(params, k)?;
    Ok(p * Complex::new(T::zero(), -k * params.l).exp())
}

/// `(f, |p|)` rows for the given frequencies.
pub fn response_table<T: Float>(params: &LumpedParams<T>, frequencies: &[T]) -> Result<Vec<(T, T)>> {
    frequencies
        .iter()
        .map(|&f| {
            if !(f > T::zero()) {
                return Err(Error::InvalidInput("frequencies must be positive".into()));
            }
            Ok((f, pressure_amplitude(params, params.wavenumber(f))?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> LumpedParams {
        LumpedParams { d: 0.5e-3, kappa: 12.0, rho0: 1.2044, c0: 343.2, a_d: 1.0, l: 0.0 }
    }

    #[test]
    fn zero_depth_is_pure_imaginary() {
        let p = LumpedParams { d: 0.0, ..params() };
        let v = lumped_pressure(&p, 50.0).unwrap();
        assert_relative_eq!(v.re, 0.0, epsilon = 1e-18);
        assert_relative_eq!(v.im, -1.2044 * 12.0 / 50.0, max_relative = 1e-15);
    }

    #[test]
    fn half_wavelength_negates() {
        let k = 100.0;
        let p = LumpedParams { l: std::f64::consts::PI / k, ..params() };
        let a = lumped_pressure(&p, k).unwrap();
        let b = ideal_outlet_target(&p, k).unwrap();
        assert_relative_eq!((a + b).norm(), 0.0, epsilon = 1e-15 * a.norm());
    }

    #[test]
    fn nonpositive_wavenumber_rejected() {
        assert!(lumped_pressure(&params(), 0.0).is_err());
        assert!(lumped_pressure(&params(), -1.0).is_err());
    }

    #[test]
    fn single_precision_matches() {
        let p32 = LumpedParams { d: 0.5e-3f32, kappa: 12.0, rho0: 1.2044, c0: 343.2, a_d: 1.0, l: 0.0 };
        let a = pressure_amplitude(&p32, 183.08f32).unwrap();
        let b = pressure_amplitude(&params(), 183.08).unwrap();
        assert_relative_eq!(f64::from(a), b, max_relative = 1e-5);
    }
}
