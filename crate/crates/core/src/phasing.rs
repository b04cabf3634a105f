//! Per-element phase profiles: metal plate, analog one-beam steering from the
//! generalized Snell's law, and its 1-bit quantization into a dual beam.

use std::fmt;
use std::str::FromStr;

use crate::scene::check_half_space;
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProfileMode {
    Metal,
    OneBeam,
    DualBeamOneBit,
}

impl ProfileMode {
    pub const ALL: [ProfileMode; 3] = [
        ProfileMode::Metal,
        ProfileMode::OneBeam,
        ProfileMode::DualBeamOneBit,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ProfileMode::Metal => "metal",
            ProfileMode::OneBeam => "one",
            ProfileMode::DualBeamOneBit => "dual",
        }
    }
}

impl fmt::Display for ProfileMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProfileMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "metal" => Ok(ProfileMode::Metal),
            "one" => Ok(ProfileMode::OneBeam),
            "dual" => Ok(ProfileMode::DualBeamOneBit),
            other => Err(Error::InvalidArgument(format!(
                "unknown mode {other:?} (expected metal, one or dual)"
            ))),
        }
    }
}

/// Incidence angle and desired reflection angle (degrees).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteeringCommand<T> {
    pub incidence_deg: T,
    pub desired_deg: T,
}

impl<T: Scalar> SteeringCommand<T> {
    pub fn new(incidence_deg: T, desired_deg: T) -> Result<Self> {
        check_half_space(incidence_deg)?;
        if !(desired_deg.abs() <= T::lit(90.0)) {
            return Err(Error::AngleOutOfHalfSpace(
                desired_deg.to_f64().unwrap_or(f64::NAN),
            ));
        }
        Ok(Self {
            incidence_deg,
            desired_deg,
        })
    }
}

/// Element phase shifts in degrees, element 1 (smallest y) first.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseProfile<T> {
    pub mode: ProfileMode,
    pub phases_deg: Vec<T>,
    pub command: Option<SteeringCommand<T>>,
}

impl<T: Scalar> PhaseProfile<T> {
    pub fn len(&self) -> usize {
        self.phases_deg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases_deg.is_empty()
    }
}

pub fn metal_profile<T: Scalar>(n_elements: usize) -> PhaseProfile<T> {
    PhaseProfile {
        mode: ProfileMode::Metal,
        phases_deg: vec![T::zero(); n_elements],
        command: None,
    }
}

/// Analog steering profile `ζ_n = k0·(n−1)·Δy·(sin φd − sin φi)`, in degrees
/// and left unwrapped. Element 1 is the phase reference.
pub fn snell_profile<T: Scalar>(
    cmd: SteeringCommand<T>,
    k0: T,
    spacing_m: T,
    n_elements: usize,
) -> PhaseProfile<T> {
    let slope = snell_slope_rad(&cmd, k0, spacing_m);
    let phases_deg = (0..n_elements)
        .map(|i| (T::lit(i as f64) * slope).to_degrees())
        .collect();
    PhaseProfile {
        mode: ProfileMode::OneBeam,
        phases_deg,
        command: Some(cmd),
    }
}

/// Phase increment between adjacent elements of the analog profile (rad).
pub fn snell_slope_rad<T: Scalar>(cmd: &SteeringCommand<T>, k0: T, spacing_m: T) -> T {
    k0 * spacing_m * (cmd.desired_deg.to_radians().sin() - cmd.incidence_deg.to_radians().sin())
}

/// Wraps a phase into [0°, 360°).
pub fn wrap_deg<T: Scalar>(phase_deg: T) -> T {
    let full = T::lit(360.0);
    let w = phase_deg - full * (phase_deg / full).floor();
    if w >= full || w < T::zero() {
        T::zero()
    } else {
        w
    }
}

/// 1-bit quantizer: 180° when the wrapped phase lies in [90°, 270°), else 0°.
pub fn quantize_phase<T: Scalar>(phase_deg: T) -> T {
    let w = wrap_deg(phase_deg);
    if w >= T::lit(90.0) && w < T::lit(270.0) {
        T::lit(180.0)
    } else {
        T::zero()
    }
}

pub fn quantize_one_bit<T: Scalar>(profile: &PhaseProfile<T>) -> PhaseProfile<T> {
    PhaseProfile {
        mode: ProfileMode::DualBeamOneBit,
        phases_deg: profile
            .phases_deg
            .iter()
            .map(|&z| quantize_phase(z))
            .collect(),
        command: profile.command,
    }
}

/// Shortest distance between two phases on the circle, in [0°, 180°].
pub fn circular_distance_deg<T: Scalar>(a: T, b: T) -> T {
    let d = wrap_deg(a - b);
    d.min(T::lit(360.0) - d)
}

/// Sum of squared circular distances between two profiles (deg²).
pub fn quantization_error<T: Scalar>(
    ideal: &PhaseProfile<T>,
    quantized: &PhaseProfile<T>,
) -> Result<T> {
    if ideal.len() != quantized.len() {
        return Err(Error::LengthMismatch {
            left: ideal.len(),
            right: quantized.len(),
        });
    }
    Ok(ideal
        .phases_deg
        .iter()
        .zip(&quantized.phases_deg)
        .map(|(&a, &b)| circular_distance_deg(a, b).powi(2))
        .sum())
}

/// Synthesizes the profile of `mode` for a steering command.
pub fn synthesize<T: Scalar>(
    mode: ProfileMode,
    cmd: SteeringCommand<T>,
    k0: T,
    spacing_m: T,
    n_elements: usize,
) -> PhaseProfile<T> {
    match mode {
        ProfileMode::Metal => metal_profile(n_elements),
        ProfileMode::OneBeam => snell_profile(cmd, k0, spacing_m, n_elements),
        ProfileMode::DualBeamOneBit => {
            quantize_one_bit(&snell_profile(cmd, k0, spacing_m, n_elements))
        }
    }
}

/// Profile export: `n,zeta_ideal_deg,zeta_quantized_deg`, one row per element.
pub fn profile_csv<T: Scalar>(
    ideal: &PhaseProfile<T>,
    quantized: &PhaseProfile<T>,
) -> Result<String> {
    if ideal.len() != quantized.len() {
        return Err(Error::LengthMismatch {
            left: ideal.len(),
            right: quantized.len(),
        });
    }
    let mut out = String::from("n,zeta_ideal_deg,zeta_quantized_deg\n");
    for (i, (a, b)) in ideal
        .phases_deg
        .iter()
        .zip(&quantized.phases_deg)
        .enumerate()
    {
        out.push_str(&format!(
            "{},{},{}\n",
            i + 1,
            crate::io::fmt_g9(*a),
            crate::io::fmt_g9(*b)
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const K0: f64 = 115.271_476_207_342_5;
    const DY: f64 = 0.016;

    fn cmd(i: f64, d: f64) -> SteeringCommand<f64> {
        SteeringCommand::new(i, d).unwrap()
    }

    #[test]
    fn metal_examples() {
        let p = metal_profile::<f64>(16);
        assert_eq!(p.phases_deg, vec![0.0; 16]);
        assert_eq!(p.mode, ProfileMode::Metal);
        assert_eq!(metal_profile::<f64>(1).phases_deg, vec![0.0]);
        let q = quantize_one_bit(&p);
        assert_eq!(q.phases_deg, p.phases_deg);
    }

    #[test]
    fn snell_examples() {
        let p = snell_profile(cmd(20.0, 20.0), K0, DY, 8);
        assert!(p.phases_deg.iter().all(|&z| z == 0.0));

        // k0·Δy = 1.844344 rad; sin 30° = 1/2 → 52.83655° per element.
        let p = snell_profile(cmd(0.0, 30.0), K0, DY, 16);
        assert_eq!(p.phases_deg[0], 0.0);
        for (i, z) in p.phases_deg.iter().enumerate() {
            assert_relative_eq!(*z, i as f64 * 52.836_553, epsilon = 1e-5 * (1.0 + i as f64));
        }

        let pos = snell_profile(cmd(0.0, 30.0), K0, DY, 16);
        let neg = snell_profile(cmd(0.0, -30.0), K0, DY, 16);
        for (a, b) in pos.phases_deg.iter().zip(&neg.phases_deg) {
            assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn quantizer_boundaries() {
        assert_eq!(quantize_phase(89.99_f64), 0.0);
        assert_eq!(quantize_phase(90.0_f64), 180.0);
        assert_eq!(quantize_phase(269.99_f64), 180.0);
        assert_eq!(quantize_phase(270.0_f64), 0.0);
        assert_eq!(quantize_phase(-30.0_f64), 0.0);
        assert_eq!(quantize_phase(-180.0_f64), 180.0);
        assert_eq!(quantize_phase(450.0_f64), 180.0);
        assert_eq!(quantize_phase(-1e-300_f64), 0.0);
    }

    #[test]
    fn quantized_thirty_degree_profile() {
        // Oracle: wrap (n−1)·52.8366° by hand. n=13 gives 634.04° → 274.04°,
        // outside [90°, 270°), so it maps to 0°.
        let oracle: Vec<f64> = (0..16)
            .map(|i| {
                let w = (i as f64 * 52.836_553) % 360.0;
                if (90.0..270.0).contains(&w) {
                    180.0
                } else {
                    0.0
                }
            })
            .collect();
        let expected = [
            0.0, 0.0, 180.0, 180.0, 180.0, 180.0, 0.0, 0.0, 0.0, 180.0, 180.0, 180.0, 0.0, 0.0,
            0.0, 0.0,
        ];
        assert_eq!(oracle, expected);
        let q = quantize_one_bit(&snell_profile(cmd(0.0, 30.0), K0, DY, 16));
        assert_eq!(q.phases_deg, expected);
        assert_eq!(q.mode, ProfileMode::DualBeamOneBit);
    }

    #[test]
    fn quantization_error_examples() {
        let p = snell_profile(cmd(0.0, 30.0), K0, DY, 16);
        assert_eq!(quantization_error(&p, &p).unwrap(), 0.0);

        let one = |z: f64| PhaseProfile {
            mode: ProfileMode::OneBeam,
            phases_deg: vec![z],
            command: None,
        };
        assert_relative_eq!(quantization_error(&one(90.0), &one(180.0)).unwrap(), 8100.0);
        assert_relative_eq!(
            quantization_error(&one(350.0), &one(0.0)).unwrap(),
            100.0,
            epsilon = 1e-9
        );

        let m = metal_profile::<f64>(16);
        assert_eq!(quantization_error(&m, &quantize_one_bit(&m)).unwrap(), 0.0);

        assert!(matches!(
            quantization_error(&m, &metal_profile(3)),
            Err(Error::LengthMismatch { left: 16, right: 3 })
        ));
    }

    #[test]
    fn steering_command_bounds() {
        assert!(SteeringCommand::new(0.0_f64, 90.0).is_ok());
        assert!(SteeringCommand::new(90.0_f64, 0.0).is_err());
        assert!(SteeringCommand::new(0.0_f64, 90.5).is_err());
    }

    #[test]
    fn mode_names_round_trip() {
        for mode in ProfileMode::ALL {
            assert_eq!(mode.as_str().parse::<ProfileMode>().unwrap(), mode);
        }
        assert!("two".parse::<ProfileMode>().is_err());
    }

    #[test]
    fn profile_csv_layout() {
        let ideal = snell_profile(cmd(0.0, 30.0), K0, DY, 3);
        let q = quantize_one_bit(&ideal);
        let csv = profile_csv(&ideal, &q).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,zeta_ideal_deg,zeta_quantized_deg");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("1,0,0"));
        assert!(lines[3].ends_with(",180"));
    }

    proptest! {
        #[test]
        fn quantizer_is_idempotent(phi_i in -89.0..89.0_f64, phi_d in -90.0..90.0_f64, n in 1usize..64) {
            let once = quantize_one_bit(&snell_profile(cmd(phi_i, phi_d), K0, DY, n));
            let twice = quantize_one_bit(&once);
            prop_assert_eq!(&once.phases_deg, &twice.phases_deg);
            prop_assert!(once.phases_deg.iter().all(|&z| z == 0.0 || z == 180.0));
        }

        #[test]
        fn quantization_error_bounded(phi_i in -89.0..89.0_f64, phi_d in -90.0..90.0_f64, n in 1usize..64) {
            let ideal = snell_profile(cmd(phi_i, phi_d), K0, DY, n);
            let err = quantization_error(&ideal, &quantize_one_bit(&ideal)).unwrap();
            prop_assert!(err <= n as f64 * 8100.0 + 1e-6);
        }

        #[test]
        fn snell_slope_is_constant(phi_i in -89.0..89.0_f64, phi_d in -90.0..90.0_f64) {
            let c = cmd(phi_i, phi_d);
            let p = snell_profile(c, K0, DY, 16);
            let slope = snell_slope_rad(&c, K0, DY).to_degrees();
            for w in p.phases_deg.windows(2) {
                prop_assert!((w[1] - w[0] - slope).abs() <= 1e-9 * (1.0 + slope.abs() * 16.0));
            }
        }
    }
}
