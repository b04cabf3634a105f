//! Target motion, the two-way RIS link budget and slow-time return synthesis.
//!
//! Only the radar → RIS → target → RIS → radar path is modeled; the direct
//! path is blocked.

use crate::analysis::rcs_linear;
use crate::emfield::{observation_grid, scattered_field, DEFAULT_GRID_STEP_DEG};
use crate::io::fmt_g9;
use crate::phasing::{synthesize, PhaseProfile, ProfileMode, SteeringCommand};
use crate::scene::{PlaneWave, Point2, ScenarioConfig};
use crate::{Complex, Error, Result, Scalar};

/// Target moving on a circle: `center + r·(cos ωt, sin ωt)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetTrajectory<T> {
    pub center: Point2<T>,
    pub radius_m: T,
    pub omega_rad_s: T,
    /// Target RCS σt (m²).
    pub rcs_sqm: T,
}

impl<T: Scalar> TargetTrajectory<T> {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.center.x,
            self.center.y,
            self.radius_m,
            self.omega_rad_s,
            self.rcs_sqm,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config("non-finite trajectory parameter".into()));
        }
        if self.radius_m < T::zero() {
            return Err(Error::Config(format!(
                "radius_m must be ≥ 0 (got {})",
                self.radius_m
            )));
        }
        if !(self.rcs_sqm > T::zero()) {
            return Err(Error::Config(format!(
                "rcs_sqm must be > 0 (got {})",
                self.rcs_sqm
            )));
        }
        Ok(())
    }

    /// Peak Doppler magnitude `2rω/λ` (Hz).
    pub fn max_doppler_hz(&self, wavelength_m: T) -> T {
        T::lit(2.0) * self.radius_m * self.omega_rad_s.abs() / wavelength_m
    }
}

pub fn target_position<T: Scalar>(traj: &TargetTrajectory<T>, t_s: T) -> Point2<T> {
    let (s, c) = (traj.omega_rad_s * t_s).sin_cos();
    Point2::new(
        traj.center.x + traj.radius_m * c,
        traj.center.y + traj.radius_m * s,
    )
}

/// Bearing of the target seen from the RIS center, from the normal (+x)
/// towards +y (degrees).
pub fn target_angle_from_ris<T: Scalar>(
    scenario: &ScenarioConfig<T>,
    traj: &TargetTrajectory<T>,
    t_s: T,
) -> Result<T> {
    bearing_from_ris(scenario, target_position(traj, t_s))
}

fn bearing_from_ris<T: Scalar>(scenario: &ScenarioConfig<T>, point: Point2<T>) -> Result<T> {
    let d = point - scenario.ris.center;
    if d.x == T::zero() && d.y == T::zero() {
        return Err(Error::CoincidentPoint);
    }
    Ok(d.y.atan2(d.x).to_degrees())
}

/// Observation angle under which a bearing is seen. Observation angles are
/// mirrored about the normal so that specular reflection of incidence `φ`
/// lands at `φ`; a receiver at bearing `θ` therefore sits at `−θ`.
pub fn observation_angle<T: Scalar>(bearing_deg: T) -> T {
    -bearing_deg
}

/// Terms of the two-way radar range equation through the RIS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget<T> {
    pub tx_power_w: T,
    pub tx_gain: T,
    pub rx_gain: T,
    /// Forward RIS scattering ratio σf (linear).
    pub sigma_f: T,
    /// Reverse RIS scattering ratio σr (linear).
    pub sigma_r: T,
    /// Target RCS σt (m²).
    pub sigma_t: T,
    pub wavelength_m: T,
    /// Radar to RIS distance.
    pub r1_m: T,
    /// RIS to target distance.
    pub r2_m: T,
}

impl<T: Scalar> LinkBudget<T> {
    /// `P_rx = P_tx G_tx G_rx σf σr σt λ² / ((4π)⁵ r1⁴ r2⁴)`
    pub fn received_power(&self) -> Result<T> {
        for d in [self.r1_m, self.r2_m] {
            if !(d > T::zero()) {
                return Err(Error::NonpositiveDistance(d.to_f64().unwrap_or(f64::NAN)));
            }
        }
        let four_pi = T::lit(4.0) * T::PI();
        Ok(self.tx_power_w
            * self.tx_gain
            * self.rx_gain
            * self.sigma_f
            * self.sigma_r
            * self.sigma_t
            * self.wavelength_m.powi(2)
            / (four_pi.powi(5) * self.r1_m.powi(4) * self.r2_m.powi(4)))
    }
}

/// Complex slow-time return, one sample per pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct SlowTimeSignal<T> {
    pub prf_hz: T,
    /// Amplitude √W carrying the two-way carrier phase.
    pub samples: Vec<Complex<T>>,
}

impl<T: Scalar> SlowTimeSignal<T> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time_s(&self, index: usize) -> T {
        T::lit(index as f64) / self.prf_hz
    }

    /// `t_s,re,im`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_s,re,im\n");
        for (k, s) in self.samples.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{}\n",
                fmt_g9(self.time_s(k)),
                fmt_g9(s.re),
                fmt_g9(s.im)
            ));
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(Self {
            prf_hz: self.prf_hz,
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }
}

/// A scattering ratio tabulated on an angle grid, interpolated linearly in sin φ.
#[derive(Debug, Clone)]
pub struct GainTable<T> {
    sines: Vec<T>,
    values: Vec<T>,
}

impl<T: Scalar> GainTable<T> {
    pub fn new(angles_deg: &[T], values: Vec<T>) -> Result<Self> {
        if angles_deg.is_empty() || angles_deg.len() != values.len() {
            return Err(Error::LengthMismatch {
                left: angles_deg.len(),
                right: values.len(),
            });
        }
        Ok(Self {
            sines: angles_deg.iter().map(|a| a.to_radians().sin()).collect(),
            values,
        })
    }

    pub fn at(&self, angle_deg: T) -> T {
        let s = angle_deg.to_radians().sin();
        let last = self.sines.len() - 1;
        if s <= self.sines[0] {
            return self.values[0];
        }
        if s >= self.sines[last] {
            return self.values[last];
        }
        let hi = self.sines.partition_point(|&x| x < s);
        let lo = hi - 1;
        let w = (s - self.sines[lo]) / (self.sines[hi] - self.sines[lo]);
        self.values[lo] + w * (self.values[hi] - self.values[lo])
    }
}

/// Forward (`σf` vs observation angle, incidence `φi`) and reverse (`σr` vs
/// incidence angle, observed at `φi`) scattering tables of one profile.
#[derive(Debug, Clone)]
pub struct RisResponse<T> {
    pub forward: GainTable<T>,
    pub reverse: GainTable<T>,
}

impl<T: Scalar> RisResponse<T> {
    pub fn tabulate(
        profile: &PhaseProfile<T>,
        incidence_deg: T,
        scenario: &ScenarioConfig<T>,
    ) -> Result<Self> {
        let k0 = scenario.carrier.k0();
        let ris = &scenario.ris;
        let rho = T::one();
        let grid = observation_grid(T::lit(DEFAULT_GRID_STEP_DEG))?;

        let wave = PlaneWave::unit(incidence_deg)?;
        let forward = grid
            .iter()
            .map(|&phi| {
                rcs_linear(
                    scattered_field(profile, &wave, phi, rho, ris, k0)?,
                    &wave,
                    rho,
                )
            })
            .collect::<Result<Vec<_>>>()?;

        let open: Vec<T> = grid
            .iter()
            .copied()
            .filter(|a| a.abs() < T::lit(90.0))
            .collect();
        let reverse = open
            .iter()
            .map(|&phi| {
                let w = PlaneWave::unit(phi)?;
                rcs_linear(
                    scattered_field(profile, &w, incidence_deg, rho, ris, k0)?,
                    &w,
                    rho,
                )
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(Self {
            forward: GainTable::new(&grid, forward)?,
            reverse: GainTable::new(&open, reverse)?,
        })
    }
}

/// Slow-time return of each target separately, in target order.
pub fn synthesize_per_target<T: Scalar>(
    scenario: &ScenarioConfig<T>,
    mode: ProfileMode,
    cmd: SteeringCommand<T>,
) -> Result<Vec<SlowTimeSignal<T>>> {
    scenario.validate()?;
    let k0 = scenario.carrier.k0();
    let profile = synthesize(
        mode,
        cmd,
        k0,
        scenario.ris.spacing_m,
        scenario.ris.element_count,
    );
    let response = RisResponse::tabulate(&profile, cmd.incidence_deg, scenario)?;
    let r1 = scenario.radar.position.distance(&scenario.ris.center);
    let n = scenario.sample_count();

    scenario
        .targets
        .iter()
        .map(|traj| {
            let samples = (0..n)
                .map(|k| {
                    let t = T::lit(k as f64) / scenario.prf_hz;
                    let pos = target_position(traj, t);
                    let r2 = pos.distance(&scenario.ris.center);
                    let phi = observation_angle(bearing_from_ris(scenario, pos)?);
                    let power = LinkBudget {
                        tx_power_w: scenario.radar.tx_power_w,
                        tx_gain: scenario.radar.tx_gain,
                        rx_gain: scenario.radar.rx_gain,
                        sigma_f: response.forward.at(phi),
                        sigma_r: response.reverse.at(phi),
                        sigma_t: traj.rcs_sqm,
                        wavelength_m: scenario.carrier.wavelength_m(),
                        r1_m: r1,
                        r2_m: r2,
                    }
                    .received_power()?;
                    let phase = -T::lit(2.0) * k0 * (r1 + r2);
                    Ok(Complex::from_polar(power.sqrt(), phase))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(SlowTimeSignal {
                prf_hz: scenario.prf_hz,
                samples,
            })
        })
        .collect()
}

/// `s(t_k) = Σ_targets √P_rx(t_k)·exp(−j2k0(r1 + r2(t_k)))` over the dwell,
/// with the RIS profile fixed by `cmd`.
pub fn synthesize_slow_time<T: Scalar>(
    scenario: &ScenarioConfig<T>,
    mode: ProfileMode,
    cmd: SteeringCommand<T>,
) -> Result<SlowTimeSignal<T>> {
    let mut total = SlowTimeSignal {
        prf_hz: scenario.prf_hz,
        samples: vec![Complex::new(T::zero(), T::zero()); scenario.sample_count()],
    };
    for signal in synthesize_per_target(scenario, mode, cmd)? {
        total = total.add(&signal)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn traj(cx: f64, cy: f64, r: f64, omega: f64) -> TargetTrajectory<f64> {
        TargetTrajectory {
            center: Point2::new(cx, cy),
            radius_m: r,
            omega_rad_s: omega,
            rcs_sqm: 1.0,
        }
    }

    fn cmd(i: f64, d: f64) -> SteeringCommand<f64> {
        SteeringCommand::new(i, d).unwrap()
    }

    #[test]
    fn position_examples() {
        let t = traj(1.0, -2.0, 0.5, 2.0 * PI);
        assert_eq!(target_position(&t, 0.0), Point2::new(1.5, -2.0));
        let q = target_position(&t, 0.25);
        assert_relative_eq!(q.x, 1.0, epsilon = 1e-15);
        assert_relative_eq!(q.y, -1.5, epsilon = 1e-15);

        let s = ScenarioConfig::<f64>::reference();
        let p = target_position(&s.targets[0], 0.0);
        assert_relative_eq!(p.x, -0.8, epsilon = 1e-15);
        assert_relative_eq!(p.y, 2.1, epsilon = 1e-15);
    }

    #[test]
    fn bearing_examples() {
        let s = ScenarioConfig::<f64>::reference();
        let c = s.ris.center;
        let on_normal = traj(c.x + 2.0, c.y, 0.0, 0.0);
        assert_eq!(target_angle_from_ris(&s, &on_normal, 0.3).unwrap(), 0.0);
        let diag = traj(c.x + 0.7, c.y + 0.7, 0.0, 0.0);
        assert_relative_eq!(
            target_angle_from_ris(&s, &diag, 0.0).unwrap(),
            45.0,
            epsilon = 1e-12
        );
        let t1 = TargetTrajectory {
            radius_m: 0.0,
            ..s.targets[0]
        };
        assert_relative_eq!(
            target_angle_from_ris(&s, &t1, 0.0).unwrap(),
            (-0.6_f64).atan2(2.0).to_degrees(),
            epsilon = 1e-12
        );
        assert_relative_eq!(
            target_angle_from_ris(&s, &t1, 0.0).unwrap(),
            -16.699,
            epsilon = 1e-3
        );
        let on_ris = traj(c.x, c.y, 0.0, 0.0);
        assert!(matches!(
            target_angle_from_ris(&s, &on_ris, 0.0),
            Err(Error::CoincidentPoint)
        ));
    }

    fn unit_link() -> LinkBudget<f64> {
        LinkBudget {
            tx_power_w: 1.0,
            tx_gain: 1.0,
            rx_gain: 1.0,
            sigma_f: 1.0,
            sigma_r: 1.0,
            sigma_t: 1.0,
            wavelength_m: 1.0,
            r1_m: 1.0,
            r2_m: 1.0,
        }
    }

    #[test]
    fn range_equation_examples() {
        let base = unit_link().received_power().unwrap();
        assert_relative_eq!(base, (4.0 * PI).powi(-5), max_relative = 1e-15);
        assert_relative_eq!(base, 3.191e-6, max_relative = 1e-3);
        let far = LinkBudget {
            r1_m: 2.0,
            ..unit_link()
        }
        .received_power()
        .unwrap();
        assert_relative_eq!(far, base / 16.0, max_relative = 1e-15);
        let big = LinkBudget {
            sigma_t: 2.0,
            ..unit_link()
        }
        .received_power()
        .unwrap();
        assert_relative_eq!(big, 2.0 * base, max_relative = 1e-15);
        assert!(LinkBudget {
            r2_m: 0.0,
            ..unit_link()
        }
        .received_power()
        .is_err());
    }

    proptest! {
        #[test]
        fn range_equation_scales_with_sigmas(a in 1e-3..1e3_f64, b in 1e-3..1e3_f64, c in 1e-3..1e3_f64) {
            let base = unit_link().received_power().unwrap();
            let scaled = LinkBudget { sigma_f: a, sigma_r: b, sigma_t: c, ..unit_link() }.received_power().unwrap();
            prop_assert!((scaled / base - a * b * c).abs() <= 1e-12 * a * b * c);
        }

        #[test]
        fn radius_is_exact(r in 0.0..5.0_f64, omega in -20.0..20.0_f64, t in 0.0..10.0_f64) {
            let tr = traj(-1.0, 3.2, r, omega);
            let p = target_position(&tr, t);
            prop_assert!(((p - tr.center).norm() - r).abs() <= 1e-15 * (1.0 + r));
        }
    }

    #[test]
    fn gain_table_interpolates_in_sine() {
        let table = GainTable::new(&[-30.0, 0.0, 30.0_f64], vec![1.0, 3.0, 5.0]).unwrap();
        assert_eq!(table.at(-60.0), 1.0);
        assert_eq!(table.at(0.0), 3.0);
        assert_eq!(table.at(80.0), 5.0);
        let phi = (0.25_f64).asin().to_degrees();
        assert_relative_eq!(table.at(phi), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn static_target_gives_constant_signal() {
        let mut s = ScenarioConfig::<f64>::reference();
        s.targets = vec![traj(-1.0, 2.1, 0.0, 2.0 * PI)];
        let sig = synthesize_slow_time(&s, ProfileMode::OneBeam, cmd(-45.0, 30.0)).unwrap();
        assert_eq!(sig.len(), 1500);
        assert!(sig.samples.iter().all(|v| *v == sig.samples[0]));
        assert!(sig.samples[0].norm() > 0.0);
    }

    #[test]
    fn two_targets_superpose() {
        let s = ScenarioConfig::<f64>::reference();
        let parts =
            synthesize_per_target(&s, ProfileMode::DualBeamOneBit, cmd(-45.0, 30.0)).unwrap();
        let total =
            synthesize_slow_time(&s, ProfileMode::DualBeamOneBit, cmd(-45.0, 30.0)).unwrap();
        for (k, v) in total.samples.iter().enumerate() {
            assert_eq!(*v, parts[0].samples[k] + parts[1].samples[k]);
            assert_eq!(
                v.norm_sqr(),
                (parts[0].samples[k] + parts[1].samples[k]).norm_sqr()
            );
        }
    }

    #[test]
    fn doppler_bound_holds() {
        let mut s = ScenarioConfig::<f64>::reference();
        s.prf_hz = 10_000.0;
        for (i, target) in s.targets.clone().into_iter().enumerate() {
            let mut single = s.clone();
            single.targets = vec![target];
            let sig = synthesize_slow_time(&single, ProfileMode::DualBeamOneBit, cmd(-45.0, 30.0))
                .unwrap();
            let bound = 2.0 * PI * target.max_doppler_hz(s.carrier.wavelength_m());
            if i == 0 {
                assert_relative_eq!(
                    target.max_doppler_hz(s.carrier.wavelength_m()),
                    46.1,
                    epsilon = 0.05
                );
            }
            let peak_rate = sig
                .samples
                .windows(2)
                .map(|w| (w[1] * w[0].conj()).arg().abs() * s.prf_hz)
                .fold(0.0, f64::max);
            assert!(
                peak_rate <= bound * (1.0 + 1e-3),
                "target {i}: {peak_rate} > {bound}"
            );
            assert!(peak_rate >= 0.5 * bound);
        }
    }

    #[test]
    fn slow_time_csv() {
        let sig = SlowTimeSignal {
            prf_hz: 1000.0,
            samples: vec![Complex::new(1.0, -0.5), Complex::new(0.0, 2.0)],
        };
        assert_eq!(sig.to_csv(), "t_s,re,im\n0,1,-0.5\n0.001,0,2\n");
    }

    #[test]
    fn rejects_invalid_scenario() {
        let mut s = ScenarioConfig::<f64>::reference();
        s.prf_hz = 100.0;
        assert!(synthesize_slow_time(&s, ProfileMode::Metal, cmd(0.0, 0.0)).is_err());
    }
}
