//! Physical constants, SI.

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// Peak intensity `eps0 c E^2` in W/m^2 for a field peak `E` in V/m.
pub fn peak_intensity(field_peak: f64) -> f64 {
    EPSILON_0 * SPEED_OF_LIGHT * field_peak * field_peak
}
