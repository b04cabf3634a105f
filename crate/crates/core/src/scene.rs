//! Scenario description: carrier, RIS geometry, radar node and the
//! `key = value` configuration format.
//!
//! Angles are signed degrees measured from the RIS normal (+x). Incidence and
//! observation angles share one sign convention in which the specular
//! direction of an incidence angle `phi` is the observation angle `phi`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::{Add, Sub};
use std::path::Path;

use crate::dynamics::TargetTrajectory;
use crate::{Error, Result, Scalar};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn norm(&self) -> T {
        self.x.hypot(self.y)
    }

    pub fn distance(&self, other: &Self) -> T {
        (*self - *other).norm()
    }
}

impl<T: Scalar> Add for Point2<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<T: Scalar> Sub for Point2<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

/// Carrier frequency with its derived wavelength and propagation constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarrierConfig<T> {
    frequency_hz: T,
    wavelength_m: T,
    k0: T,
}

impl<T: Scalar> CarrierConfig<T> {
    pub fn new(frequency_hz: T) -> Result<Self> {
        if !(frequency_hz > T::zero()) || !frequency_hz.is_finite() {
            return Err(Error::Config(format!(
                "frequency_hz must be > 0 (got {frequency_hz})"
            )));
        }
        let wavelength_m = T::lit(SPEED_OF_LIGHT) / frequency_hz;
        let k0 = T::TAU() / wavelength_m;
        Ok(Self {
            frequency_hz,
            wavelength_m,
            k0,
        })
    }

    pub fn frequency_hz(&self) -> T {
        self.frequency_hz
    }

    pub fn wavelength_m(&self) -> T {
        self.wavelength_m
    }

    /// Free-space propagation constant (rad/m).
    pub fn k0(&self) -> T {
        self.k0
    }
}

/// Linear RIS laid out along the y-axis, normal along +x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RisGeometry<T> {
    pub center: Point2<T>,
    pub element_count: usize,
    pub spacing_m: T,
}

impl<T: Scalar> RisGeometry<T> {
    pub fn new(center: Point2<T>, element_count: usize, spacing_m: T) -> Result<Self> {
        let geometry = Self {
            center,
            element_count,
            spacing_m,
        };
        geometry.validate()?;
        Ok(geometry)
    }

    pub fn validate(&self) -> Result<()> {
        if self.element_count < 1 {
            return Err(Error::Config(format!(
                "element_count must be ≥ 1 (got {})",
                self.element_count
            )));
        }
        if !(self.spacing_m > T::zero()) || !self.spacing_m.is_finite() {
            return Err(Error::Config(format!(
                "ris.dy_m must be > 0 (got {})",
                self.spacing_m
            )));
        }
        Ok(())
    }

    /// Offset of element `index` (0-based, smallest y first) from the center
    /// along y.
    pub fn local_offset(&self, index: usize) -> T {
        let half_span = T::lit((self.element_count as f64 - 1.0) / 2.0);
        (T::lit(index as f64) - half_span) * self.spacing_m
    }

    /// Physical aperture N·Δy.
    pub fn aperture_m(&self) -> T {
        T::lit(self.element_count as f64) * self.spacing_m
    }
}

/// Element positions, smallest y first, centered on `ris.center`.
pub fn element_positions<T: Scalar>(ris: &RisGeometry<T>) -> Vec<Point2<T>> {
    (0..ris.element_count)
        .map(|i| Point2::new(ris.center.x, ris.center.y + ris.local_offset(i)))
        .collect()
}

/// Plane wave incident on the RIS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave<T> {
    /// Incidence angle from the RIS normal (degrees).
    pub angle_deg: T,
    /// Field amplitude E0 (V/m).
    pub amplitude: T,
}

impl<T: Scalar> PlaneWave<T> {
    pub fn new(angle_deg: T, amplitude: T) -> Result<Self> {
        check_half_space(angle_deg)?;
        if !(amplitude > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "plane-wave amplitude must be > 0 (got {amplitude})"
            )));
        }
        Ok(Self {
            angle_deg,
            amplitude,
        })
    }

    /// Unit-amplitude wave.
    pub fn unit(angle_deg: T) -> Result<Self> {
        Self::new(angle_deg, T::one())
    }
}

pub(crate) fn check_half_space<T: Scalar>(angle_deg: T) -> Result<()> {
    if angle_deg.abs() < T::lit(90.0) {
        Ok(())
    } else {
        Err(Error::AngleOutOfHalfSpace(
            angle_deg.to_f64().unwrap_or(f64::NAN),
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveDirection {
    Incident,
    Scattered,
}

/// Wave vector for a propagation angle: incident waves travel towards the
/// surface, `k0·[−cos φ, −sin φ, 0]`; scattered waves away, `k0·[cos φ, sin φ, 0]`.
pub fn wave_vector<T: Scalar>(angle_deg: T, k0: T, direction: WaveDirection) -> Result<[T; 3]> {
    check_half_space(angle_deg)?;
    let (s, c) = angle_deg.to_radians().sin_cos();
    let sign = match direction {
        WaveDirection::Incident => -T::one(),
        WaveDirection::Scattered => T::one(),
    };
    Ok([sign * k0 * c, sign * k0 * s, T::zero()])
}

/// Monostatic radar node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadarNode<T> {
    pub position: Point2<T>,
    pub tx_power_w: T,
    pub tx_gain: T,
    pub rx_gain: T,
}

/// Complete scene: carrier, RIS, radar and targets, plus the slow-time dwell.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig<T> {
    pub carrier: CarrierConfig<T>,
    pub ris: RisGeometry<T>,
    pub radar: RadarNode<T>,
    pub targets: Vec<TargetTrajectory<T>>,
    pub prf_hz: T,
    pub duration_s: T,
}

impl<T: Scalar> ScenarioConfig<T> {
    /// The two-target scene: 5.5 GHz carrier, 16-element RIS with 16 mm
    /// pitch centered at (−3, 2.7) m, radar at (−2.5, 4.3) m, two targets
    /// circling at 1 and 2 rev/s.
    pub fn reference() -> Self {
        let p = |x: f64, y: f64| Point2::new(T::lit(x), T::lit(y));
        let target = |cx: f64, cy: f64, omega: f64| TargetTrajectory {
            center: p(cx, cy),
            radius_m: T::lit(0.2),
            omega_rad_s: T::lit(omega),
            rcs_sqm: T::one(),
        };
        Self {
            carrier: CarrierConfig::new(T::lit(5.5e9)).expect("positive carrier"),
            ris: RisGeometry {
                center: p(-3.0, 2.7),
                element_count: 16,
                spacing_m: T::lit(0.016),
            },
            radar: RadarNode {
                position: p(-2.5, 4.3),
                tx_power_w: T::lit(2e-3),
                tx_gain: T::one(),
                rx_gain: T::one(),
            },
            targets: vec![
                target(-1.0, 2.1, 2.0 * std::f64::consts::PI),
                target(-1.0, 3.2, 4.0 * std::f64::consts::PI),
            ],
            prf_hz: T::lit(1000.0),
            duration_s: T::lit(1.5),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.ris.validate()?;
        let positive = |name: &str, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be > 0 (got {v})")))
            }
        };
        positive("radar.ptx_w", self.radar.tx_power_w)?;
        positive("radar.gtx", self.radar.tx_gain)?;
        positive("radar.grx", self.radar.rx_gain)?;
        positive("prf_hz", self.prf_hz)?;
        positive("duration_s", self.duration_s)?;
        for (i, target) in self.targets.iter().enumerate() {
            target
                .validate()
                .map_err(|e| Error::Config(format!("target.{}: {}", i + 1, strip_prefix(e))))?;
        }
        let doppler = self.max_doppler_hz();
        if !(self.prf_hz > T::lit(2.0) * doppler) {
            return Err(Error::Config(format!(
                "prf_hz must exceed twice the maximum Doppler {doppler} Hz (got {})",
                self.prf_hz
            )));
        }
        Ok(())
    }

    /// Largest Doppler magnitude any target can produce, `2rω/λ`.
    pub fn max_doppler_hz(&self) -> T {
        let wavelength = self.carrier.wavelength_m();
        self.targets
            .iter()
            .map(|t| t.max_doppler_hz(wavelength))
            .fold(T::zero(), T::max)
    }

    /// Number of slow-time samples in the dwell, `floor(duration · prf)`.
    pub fn sample_count(&self) -> usize {
        (self.duration_s * self.prf_hz)
            .floor()
            .to_usize()
            .unwrap_or(0)
    }

    /// Serializes to the `key = value` config format. Numbers use the
    /// shortest representation that parses back to the same value.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("frequency_hz", self.carrier.frequency_hz().to_string());
        kv("ris.center_x_m", self.ris.center.x.to_string());
        kv("ris.center_y_m", self.ris.center.y.to_string());
        kv("ris.n", self.ris.element_count.to_string());
        kv("ris.dy_m", self.ris.spacing_m.to_string());
        kv("radar.x_m", self.radar.position.x.to_string());
        kv("radar.y_m", self.radar.position.y.to_string());
        kv("radar.ptx_w", self.radar.tx_power_w.to_string());
        kv("radar.gtx", self.radar.tx_gain.to_string());
        kv("radar.grx", self.radar.rx_gain.to_string());
        kv("prf_hz", self.prf_hz.to_string());
        kv("duration_s", self.duration_s.to_string());
        for (i, t) in self.targets.iter().enumerate() {
            let i = i + 1;
            kv(&format!("target.{i}.center_x_m"), t.center.x.to_string());
            kv(&format!("target.{i}.center_y_m"), t.center.y.to_string());
            kv(&format!("target.{i}.radius_m"), t.radius_m.to_string());
            kv(
                &format!("target.{i}.omega_rad_s"),
                t.omega_rad_s.to_string(),
            );
            kv(&format!("target.{i}.rcs_sqm"), t.rcs_sqm.to_string());
        }
        out
    }

    /// Parses and validates the `key = value` config format.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut entries = parse_pairs(text)?;
        let frequency = take_real::<T>(&mut entries, "frequency_hz")?;
        let carrier = CarrierConfig::new(frequency)?;
        let ris = RisGeometry {
            center: Point2::new(
                take_real(&mut entries, "ris.center_x_m")?,
                take_real(&mut entries, "ris.center_y_m")?,
            ),
            element_count: take_count(&mut entries, "ris.n")?,
            spacing_m: take_real(&mut entries, "ris.dy_m")?,
        };
        let radar = RadarNode {
            position: Point2::new(
                take_real(&mut entries, "radar.x_m")?,
                take_real(&mut entries, "radar.y_m")?,
            ),
            tx_power_w: take_real(&mut entries, "radar.ptx_w")?,
            tx_gain: take_real(&mut entries, "radar.gtx")?,
            rx_gain: take_real(&mut entries, "radar.grx")?,
        };
        let prf_hz = take_real(&mut entries, "prf_hz")?;
        let duration_s = take_real(&mut entries, "duration_s")?;

        let mut indices: Vec<usize> = Vec::new();
        for key in entries.keys() {
            let Some(rest) = key.strip_prefix("target.") else {
                return Err(Error::Config(format!("unknown key {key}")));
            };
            let (index, field) = rest
                .split_once('.')
                .ok_or_else(|| Error::Config(format!("unknown key {key}")))?;
            let index: usize = index
                .parse()
                .map_err(|_| Error::Config(format!("unknown key {key}")))?;
            if !TARGET_FIELDS.contains(&field) {
                return Err(Error::Config(format!("unknown key {key}")));
            }
            if !indices.contains(&index) {
                indices.push(index);
            }
        }
        indices.sort_unstable();
        let mut targets = Vec::with_capacity(indices.len());
        for (expected, &index) in (1..).zip(indices.iter()) {
            if index != expected {
                return Err(Error::Config(format!(
                    "missing target.{expected}.center_x_m"
                )));
            }
            let mut field =
                |name: &str| take_real::<T>(&mut entries, &format!("target.{index}.{name}"));
            targets.push(TargetTrajectory {
                center: Point2::new(field("center_x_m")?, field("center_y_m")?),
                radius_m: field("radius_m")?,
                omega_rad_s: field("omega_rad_s")?,
                rcs_sqm: field("rcs_sqm")?,
            });
        }
        debug_assert!(entries.is_empty());

        let scenario = Self {
            carrier,
            ris,
            radar,
            targets,
            prf_hz,
            duration_s,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

const TARGET_FIELDS: [&str; 5] = [
    "center_x_m",
    "center_y_m",
    "radius_m",
    "omega_rad_s",
    "rcs_sqm",
];

/// Reads and validates a scenario config file.
pub fn load_scenario<T: Scalar>(path: impl AsRef<Path>) -> Result<ScenarioConfig<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ScenarioConfig::from_config_str(&text)
}

fn strip_prefix(e: Error) -> String {
    match e {
        Error::Config(msg) => msg,
        other => other.to_string(),
    }
}

fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut entries = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
        }
        if entries.insert(key.to_string(), value.to_string()).is_some() {
            return Err(Error::Config(format!("duplicate key {key}")));
        }
    }
    Ok(entries)
}

fn take_raw(entries: &mut BTreeMap<String, String>, key: &str) -> Result<String> {
    entries
        .remove(key)
        .ok_or_else(|| Error::Config(format!("missing {key}")))
}

fn take_real<T: Scalar>(entries: &mut BTreeMap<String, String>, key: &str) -> Result<T> {
    let raw = take_raw(entries, key)?;
    let looks_decimal = !raw.is_empty()
        && raw
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | 'e' | 'E'));
    let value = if looks_decimal {
        raw.parse::<T>().ok()
    } else {
        None
    };
    match value {
        Some(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Config(format!("invalid number for {key}: {raw:?}"))),
    }
}

fn take_count(entries: &mut BTreeMap<String, String>, key: &str) -> Result<usize> {
    let raw = take_raw(entries, key)?;
    let n: usize = raw
        .parse()
        .map_err(|_| Error::Config(format!("invalid integer for {key}: {raw:?}")))?;
    if n < 1 {
        return Err(Error::Config(format!(
            "element_count must be ≥ 1 (got {n})"
        )));
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const REFERENCE_CFG: &str = include_str!("../configs/default.cfg");

    #[test]
    fn carrier_derivations() {
        let carrier = CarrierConfig::new(5.5e9_f64).unwrap();
        // 2π·f/c with c = 299 792 458 m/s
        assert_relative_eq!(carrier.k0(), 115.271_476_207, max_relative = 1e-10);
        assert_relative_eq!(carrier.wavelength_m(), 0.0545077, max_relative = 1e-6);
        assert_relative_eq!(
            carrier.k0() * carrier.wavelength_m(),
            std::f64::consts::TAU,
            max_relative = 1e-12
        );
        assert!(CarrierConfig::new(0.0_f64).is_err());
        assert!(CarrierConfig::new(-1.0_f64).is_err());
    }

    #[test]
    fn shipped_config_is_reference_scene() {
        let parsed = ScenarioConfig::<f64>::from_config_str(REFERENCE_CFG).unwrap();
        assert_eq!(parsed, ScenarioConfig::reference());
        assert_relative_eq!(parsed.carrier.k0(), 115.271_476_207, max_relative = 1e-10);
    }

    #[test]
    fn zero_elements_rejected() {
        let text = REFERENCE_CFG.replace("ris.n = 16", "ris.n = 0");
        let err = ScenarioConfig::<f64>::from_config_str(&text).unwrap_err();
        assert!(
            err.to_string().contains("element_count must be ≥ 1"),
            "{err}"
        );
    }

    #[test]
    fn missing_and_unknown_keys() {
        let text = REFERENCE_CFG.replace("prf_hz = 1000", "");
        let err = ScenarioConfig::<f64>::from_config_str(&text).unwrap_err();
        assert_eq!(err.to_string(), "config error: missing prf_hz");

        let text = format!("{REFERENCE_CFG}\nris.tilt_deg = 3\n");
        let err = ScenarioConfig::<f64>::from_config_str(&text).unwrap_err();
        assert_eq!(err.to_string(), "config error: unknown key ris.tilt_deg");

        let text = format!("{REFERENCE_CFG}\ntarget.1.color = 3\n");
        assert!(ScenarioConfig::<f64>::from_config_str(&text).is_err());
    }

    #[test]
    fn incomplete_or_gapped_targets() {
        let text = REFERENCE_CFG.replace("target.2.rcs_sqm = 1", "");
        let err = ScenarioConfig::<f64>::from_config_str(&text).unwrap_err();
        assert_eq!(err.to_string(), "config error: missing target.2.rcs_sqm");

        let text = REFERENCE_CFG.replace("target.2.", "target.3.");
        let err = ScenarioConfig::<f64>::from_config_str(&text).unwrap_err();
        assert!(err.to_string().contains("missing target.2"), "{err}");
    }

    #[test]
    fn rejects_locale_and_nonfinite_numbers() {
        for bad in ["5,5e9", "inf", "NaN", "0x10"] {
            let text = REFERENCE_CFG.replace(
                "frequency_hz = 5500000000",
                &format!("frequency_hz = {bad}"),
            );
            let err = ScenarioConfig::<f64>::from_config_str(&text).unwrap_err();
            assert!(err.to_string().starts_with("config error"), "{bad}: {err}");
        }
    }

    #[test]
    fn nyquist_invariant_enforced() {
        let text = REFERENCE_CFG.replace("prf_hz = 1000", "prf_hz = 150");
        let err = ScenarioConfig::<f64>::from_config_str(&text).unwrap_err();
        assert!(err.to_string().contains("maximum Doppler"), "{err}");
    }

    #[test]
    fn wave_vector_examples() {
        let k0 = 115.2656_f64;
        let v = wave_vector(0.0, k0, WaveDirection::Incident).unwrap();
        assert_eq!(v, [-k0, 0.0, 0.0]);

        let v = wave_vector(30.0, k0, WaveDirection::Incident).unwrap();
        assert_relative_eq!(v[0], -99.823, epsilon = 1e-3);
        assert_relative_eq!(v[1], -57.633, epsilon = 1e-3);
        assert_eq!(v[2], 0.0);

        let v = wave_vector(89.999, k0, WaveDirection::Scattered).unwrap();
        assert_relative_eq!(v[0].hypot(v[1]), k0, max_relative = 1e-12);

        assert!(matches!(
            wave_vector(90.0, k0, WaveDirection::Incident),
            Err(Error::AngleOutOfHalfSpace(_))
        ));
        assert!(wave_vector(-95.0, k0, WaveDirection::Scattered).is_err());
    }

    #[test]
    fn element_position_examples() {
        let one = RisGeometry::new(Point2::new(1.5, -2.0), 1, 0.016).unwrap();
        assert_eq!(element_positions(&one), vec![Point2::new(1.5, -2.0)]);

        let two = RisGeometry::new(Point2::new(0.0, 0.0), 2, 0.016).unwrap();
        assert_eq!(
            element_positions(&two),
            vec![Point2::new(0.0, -0.008), Point2::new(0.0, 0.008)]
        );

        let ris = ScenarioConfig::<f64>::reference().ris;
        let pos = element_positions(&ris);
        assert_eq!(pos.len(), 16);
        assert_relative_eq!(pos[15].y - pos[0].y, 0.240, epsilon = 1e-12);
        let mean_y = pos.iter().map(|p| p.y).sum::<f64>() / 16.0;
        assert_relative_eq!(mean_y, ris.center.y, epsilon = 1e-12);
        for w in pos.windows(2) {
            assert!(w[1].y > w[0].y);
            assert_relative_eq!(w[1].y - w[0].y, 0.016, epsilon = 1e-12);
            assert_eq!(w[0].x, ris.center.x);
        }
    }

    #[test]
    fn plane_wave_invariants() {
        assert!(PlaneWave::new(89.9_f64, 1.0).is_ok());
        assert!(PlaneWave::new(90.0_f64, 1.0).is_err());
        assert!(PlaneWave::new(10.0_f64, 0.0).is_err());
    }

    #[test]
    fn single_precision_scene() {
        let s = ScenarioConfig::<f32>::from_config_str(REFERENCE_CFG).unwrap();
        assert!((s.carrier.k0() - 115.2715).abs() < 1e-3);
        assert_eq!(s.sample_count(), 1500);
    }
}
