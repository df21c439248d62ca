//! Stage performance metrics from mass-averaged station quantities.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Mass flow (kg/s), stagnation pressure (N/m²) and stagnation temperature (K).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Station<T> {
    pub mass_flow: T,
    pub pressure: T,
    pub temperature: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationState<T> {
    pub inlet: Station<T>,
    pub bypass: Station<T>,
    pub core: Station<T>,
    /// Ratio of specific heats.
    pub gamma: T,
}

pub const DEFAULT_HEAT_RATIO: f64 = 1.4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerformanceMetrics<T> {
    pub pressure_ratio: T,
    pub temperature_ratio: T,
    pub efficiency_percent: T,
    pub capacity_core: T,
    pub capacity_bypass: T,
}

/// Isentropic efficiency in percent from pressure and temperature ratios.
pub fn isentropic_efficiency<T: Real>(pressure_ratio: T, temperature_ratio: T, gamma: T) -> Result<T> {
    let denom = temperature_ratio - T::one();
    if denom == T::zero() {
        return Err(Error::DivisionGuard("temperature ratio of 1 leaves efficiency undefined".into()));
    }
    let exponent = (gamma - T::one()) / gamma;
    Ok((pressure_ratio.powf(exponent) - T::one()) / denom * T::lit(100.0))
}

/// Flow capacity `ṁ √T / P`.
pub fn capacity<T: Real>(s: &Station<T>) -> T {
    s.mass_flow * s.temperature.sqrt() / s.pressure
}

pub fn perf_metrics<T: Real>(state: &StationState<T>) -> Result<PerformanceMetrics<T>> {
    let all = [state.inlet, state.bypass, state.core];
    let positive = all
        .iter()
        .flat_map(|s| [s.mass_flow, s.pressure, s.temperature])
        .chain(std::iter::once(state.gamma))
        .all(|v| v.is_finite() && v > T::zero());
    if !positive {
        return Err(Error::InvalidArgument("station quantities and gamma must be finite and positive".into()));
    }
    let (inl, byp, core) = (state.inlet, state.bypass, state.core);
    let pressure_ratio = (byp.mass_flow * byp.pressure + core.mass_flow * core.pressure) / (inl.mass_flow * inl.pressure);
    let temperature_ratio =
        (byp.mass_flow * byp.temperature + core.mass_flow * core.temperature) / (inl.mass_flow * inl.temperature);
    Ok(PerformanceMetrics {
        efficiency_percent: isentropic_efficiency(pressure_ratio, temperature_ratio, state.gamma)?,
        pressure_ratio,
        temperature_ratio,
        capacity_core: capacity(&core),
        capacity_bypass: capacity(&byp),
    })
}
