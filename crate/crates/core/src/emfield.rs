//! Fields on and scattered by the RIS, TM polarization (E along z).
//!
//! Positions passed to the near-surface field functions are in the RIS frame:
//! origin at the RIS center, surface on the plane x = 0. The scattered field
//! is evaluated in the far zone at distance `rho` from the RIS center with
//! cylindrical (2-D) spreading.

use crate::phasing::{PhaseProfile, ProfileMode};
use crate::scene::{PlaneWave, Point2, RisGeometry};
use crate::{Complex, Error, Result, Scalar};

/// Free-space wave impedance (Ω).
pub const ETA0: f64 = 376.730313;

/// Reflection coefficient of the flat surface for perpendicular polarization.
pub const GAMMA: f64 = -1.0;

/// Scattered far field sampled on a grid of observation angles.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldPattern<T> {
    pub angles_deg: Vec<T>,
    pub field: Vec<Complex<T>>,
    pub rho_m: T,
    pub excitation: PlaneWave<T>,
    pub profile_mode: ProfileMode,
}

impl<T: Scalar> FarFieldPattern<T> {
    pub fn len(&self) -> usize {
        self.angles_deg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles_deg.is_empty()
    }

    pub fn magnitudes(&self) -> Vec<T> {
        self.field.iter().map(|e| e.norm()).collect()
    }

    pub fn peak_magnitude(&self) -> T {
        self.field.iter().map(|e| e.norm()).fold(T::zero(), T::max)
    }

    /// Peak-normalized power `20·log10(|E|/max|E|)`; zero maps to the −300 dB
    /// sentinel.
    pub fn power_db(&self) -> Vec<T> {
        let peak = self.peak_magnitude();
        self.field
            .iter()
            .map(|e| amplitude_ratio_db(e.norm(), peak))
            .collect()
    }

    /// `phi_s_deg,re_v_per_m,im_v_per_m,power_db`
    pub fn to_csv(&self) -> String {
        use crate::io::fmt_g9;
        let mut out = String::from("phi_s_deg,re_v_per_m,im_v_per_m,power_db\n");
        for ((a, e), p) in self.angles_deg.iter().zip(&self.field).zip(self.power_db()) {
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt_g9(*a),
                fmt_g9(e.re),
                fmt_g9(e.im),
                fmt_g9(p)
            ));
        }
        out
    }
}

/// Lowest reported level (dB) in place of −∞.
pub const DB_SENTINEL: f64 = -300.0;

pub(crate) fn amplitude_ratio_db<T: Scalar>(value: T, reference: T) -> T {
    if value > T::zero() && reference > T::zero() {
        (T::lit(20.0) * (value / reference).log10()).max(T::lit(DB_SENTINEL))
    } else {
        T::lit(DB_SENTINEL)
    }
}

fn expj<T: Scalar>(phase: T) -> Complex<T> {
    let (s, c) = phase.sin_cos();
    Complex::new(c, s)
}

/// `E_i = E0·exp(−j k_i·r)` (V/m, z-directed).
pub fn incident_field<T: Scalar>(wave: &PlaneWave<T>, position: Point2<T>, k0: T) -> Complex<T> {
    let (s, c) = wave.angle_deg.to_radians().sin_cos();
    // k_i = −k0·[cos φi, sin φi]
    let k_dot_r = -k0 * (c * position.x + s * position.y);
    expj(-k_dot_r) * wave.amplitude
}

/// Specularly reflected field `E_r = Γ·E0·exp(−j k_r·r)`, `k_r = k0·[cos φi, −sin φi]`.
pub fn reflected_field<T: Scalar>(wave: &PlaneWave<T>, position: Point2<T>, k0: T) -> Complex<T> {
    let (s, c) = wave.angle_deg.to_radians().sin_cos();
    let k_dot_r = k0 * (c * position.x - s * position.y);
    expj(-k_dot_r) * (T::lit(GAMMA) * wave.amplitude)
}

/// Incident magnetic field `(E0/η0)(−x̂ sin φi + ŷ cos φi)·exp(−j k_i·r)`, as `[H_x, H_y]`.
pub fn incident_h_field<T: Scalar>(
    wave: &PlaneWave<T>,
    position: Point2<T>,
    k0: T,
    eta0: T,
) -> [Complex<T>; 2] {
    let (s, c) = wave.angle_deg.to_radians().sin_cos();
    let phasor = incident_field(wave, position, k0) / eta0;
    [phasor * (-s), phasor * c]
}

/// Reflected magnetic field `(Γ E0/η0)(−x̂ sin φi − ŷ cos φi)·exp(−j k_r·r)`, as `[H_x, H_y]`.
pub fn reflected_h_field<T: Scalar>(
    wave: &PlaneWave<T>,
    position: Point2<T>,
    k0: T,
    eta0: T,
) -> [Complex<T>; 2] {
    let (s, c) = wave.angle_deg.to_radians().sin_cos();
    let phasor = reflected_field(wave, position, k0) / eta0;
    [phasor * (-s), phasor * (-c)]
}

/// Surface current density `J = x̂ × (H_r + H_i)` on the RIS plane (A/m, z-directed).
pub fn surface_current<T: Scalar>(
    wave: &PlaneWave<T>,
    position: Point2<T>,
    k0: T,
    eta0: T,
) -> Result<Complex<T>> {
    if position.x != T::zero() {
        return Err(Error::InvalidArgument(format!(
            "position x = {} is off the RIS plane x = 0",
            position.x
        )));
    }
    let hi = incident_h_field(wave, position, k0, eta0);
    let hr = reflected_h_field(wave, position, k0, eta0);
    // x̂ × (H_x x̂ + H_y ŷ) = H_y ẑ
    Ok(hi[1] + hr[1])
}

/// Far-field scattered field of the whole RIS at observation angle `phi_s_deg`:
///
/// `E_s = j k0 E0 cos φi / (π√ρ) · Σ_n exp(−j(k0 y_n (sin φs − sin φi) − ζ_n)) Δy`
///
/// with `y_n` measured from the RIS center. The incident phase across the
/// aperture is included so an all-zero profile reflects specularly.
pub fn scattered_field<T: Scalar>(
    profile: &PhaseProfile<T>,
    wave: &PlaneWave<T>,
    phi_s_deg: T,
    rho_m: T,
    geometry: &RisGeometry<T>,
    k0: T,
) -> Result<Complex<T>> {
    if !(rho_m > T::zero()) {
        return Err(Error::NonpositiveDistance(
            rho_m.to_f64().unwrap_or(f64::NAN),
        ));
    }
    if !(phi_s_deg.abs() <= T::lit(90.0)) {
        return Err(Error::AngleOutOfHalfSpace(
            phi_s_deg.to_f64().unwrap_or(f64::NAN),
        ));
    }
    if profile.len() != geometry.element_count {
        return Err(Error::LengthMismatch {
            left: profile.len(),
            right: geometry.element_count,
        });
    }
    let spatial = k0 * (phi_s_deg.to_radians().sin() - wave.angle_deg.to_radians().sin());
    let mut sum = Complex::new(T::zero(), T::zero());
    for (i, zeta) in profile.phases_deg.iter().enumerate() {
        let psi = spatial * geometry.local_offset(i) - zeta.to_radians();
        sum = sum + expj(-psi);
    }
    let scale = k0 * wave.amplitude * wave.angle_deg.to_radians().cos() * geometry.spacing_m
        / (T::PI() * rho_m.sqrt());
    Ok(Complex::new(T::zero(), scale) * sum)
}

/// Upper bound `N k0 E0 Δy |cos φi| / (π√ρ)` reached by a fully coherent sum.
pub fn coherent_bound<T: Scalar>(
    wave: &PlaneWave<T>,
    rho_m: T,
    geometry: &RisGeometry<T>,
    k0: T,
) -> T {
    T::lit(geometry.element_count as f64)
        * k0
        * wave.amplitude
        * geometry.spacing_m
        * wave.angle_deg.to_radians().cos().abs()
        / (T::PI() * rho_m.sqrt())
}

/// Default observation grid step (degrees).
pub const DEFAULT_GRID_STEP_DEG: f64 = 0.1;

/// Uniform angle grid over [−90°, 90°], both ends included. The step must
/// divide 180° into a whole number of intervals.
pub fn observation_grid<T: Scalar>(grid_step_deg: T) -> Result<Vec<T>> {
    if !(grid_step_deg > T::zero() && grid_step_deg <= T::one()) {
        return Err(Error::InvalidArgument(format!(
            "grid step must lie in (0, 1] deg (got {grid_step_deg})"
        )));
    }
    let intervals = (T::lit(180.0) / grid_step_deg).round();
    if (intervals * grid_step_deg - T::lit(180.0)).abs() > T::lit(1e-6) * grid_step_deg {
        return Err(Error::InvalidArgument(format!(
            "grid step {grid_step_deg} deg does not divide 180 deg"
        )));
    }
    let n = intervals.to_usize().unwrap_or(0);
    Ok((0..=n)
        .map(|i| T::lit(180.0 * i as f64 / n as f64 - 90.0))
        .collect())
}

/// Evaluates the scattered field over the full observation half-space.
pub fn pattern_scan<T: Scalar>(
    profile: &PhaseProfile<T>,
    wave: &PlaneWave<T>,
    rho_m: T,
    geometry: &RisGeometry<T>,
    k0: T,
    grid_step_deg: T,
) -> Result<FarFieldPattern<T>> {
    let angles_deg = observation_grid(grid_step_deg)?;
    let field = angles_deg
        .iter()
        .map(|&phi| scattered_field(profile, wave, phi, rho_m, geometry, k0))
        .collect::<Result<Vec<_>>>()?;
    Ok(FarFieldPattern {
        angles_deg,
        field,
        rho_m,
        excitation: *wave,
        profile_mode: profile.mode,
    })
}
