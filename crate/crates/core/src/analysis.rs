//! Lobe extraction, beam squint, radar cross-section and the batch analyses
//! built on them (steering sweeps and forward/reverse RCS tables).

use rayon::prelude::*;

use crate::emfield::{
    amplitude_ratio_db, pattern_scan, scattered_field, FarFieldPattern, DB_SENTINEL,
};
use crate::io::fmt_g9;
use crate::phasing::{synthesize, ProfileMode, SteeringCommand};
use crate::scene::{PlaneWave, ScenarioConfig};
use crate::{Complex, Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lobe<T> {
    pub angle_deg: T,
    /// Level relative to the strongest lobe (dB, ≤ 0).
    pub power_db: T,
    /// 0 for the strongest lobe.
    pub rank: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcsEntry<T> {
    pub mode: ProfileMode,
    pub phi_i_deg: T,
    pub phi_d_deg: T,
    pub sigma_f_db: T,
    pub sigma_r_db: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<T> {
    pub phi_d_cmd_deg: T,
    pub lobes: Vec<Lobe<T>>,
}

/// Knobs shared by the pattern-based analyses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisConfig<T> {
    /// Far-field reference distance (m). RCS does not depend on it.
    pub rho_m: T,
    pub grid_step_deg: T,
    /// Lobe detection floor relative to the pattern peak (dB, < 0).
    pub floor_db: T,
    /// Lobes kept per sweep row.
    pub max_lobes: usize,
    /// Constant added to every reported RCS value (dB).
    pub calibration_offset_db: T,
}

impl<T: Scalar> Default for AnalysisConfig<T> {
    fn default() -> Self {
        Self {
            rho_m: T::lit(10.0),
            grid_step_deg: T::lit(crate::emfield::DEFAULT_GRID_STEP_DEG),
            floor_db: T::lit(-10.0),
            max_lobes: 4,
            calibration_offset_db: T::zero(),
        }
    }
}

/// Local maxima of `|E|` within `floor_db` of the pattern peak, refined by a
/// three-point parabola in (sin φ, dB). Flat runs of equal samples count as
/// one lobe located at the member closest to broadside. Ties in power go to
/// the smaller `|angle|`.
pub fn find_lobes<T: Scalar>(pattern: &FarFieldPattern<T>, floor_db: T) -> Result<Vec<Lobe<T>>> {
    if pattern.is_empty() {
        return Err(Error::EmptyPattern);
    }
    if !(floor_db < T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "lobe floor must be < 0 dB (got {floor_db})"
        )));
    }
    let mags = pattern.magnitudes();
    let peak = mags.iter().copied().fold(T::zero(), T::max);
    if peak == T::zero() {
        return Err(Error::InvalidArgument("pattern is identically zero".into()));
    }
    let db: Vec<T> = mags.iter().map(|&m| amplitude_ratio_db(m, peak)).collect();
    let angles = &pattern.angles_deg;
    let last = mags.len() - 1;

    let mut raw: Vec<(T, T)> = Vec::new();
    let mut start = 0;
    while start <= last {
        let mut end = start;
        while end < last && mags[end + 1] == mags[start] {
            end += 1;
        }
        let rises = start == 0 || mags[start - 1] < mags[start];
        let falls = end == last || mags[end + 1] < mags[end];
        if rises && falls && db[start] >= floor_db {
            if start == end && start > 0 && end < last {
                raw.push(refine(angles, &db, start));
            } else {
                let best = (start..=end)
                    .min_by(|&a, &b| {
                        angles[a]
                            .abs()
                            .partial_cmp(&angles[b].abs())
                            .expect("finite angles")
                    })
                    .expect("non-empty run");
                raw.push((angles[best], db[best]));
            }
        }
        start = end + 1;
    }

    let top = raw.iter().map(|l| l.1).fold(T::neg_infinity(), T::max);
    let key = |l: &(T, T)| {
        let nano = |v: T| (v * T::lit(1e9)).round().to_i64().unwrap_or(i64::MIN);
        (
            std::cmp::Reverse(nano(l.1 - top)),
            nano(l.0.abs()),
            nano(l.0),
        )
    };
    raw.sort_by_key(key);
    Ok(raw
        .into_iter()
        .enumerate()
        .map(|(rank, (angle_deg, p))| Lobe {
            angle_deg,
            power_db: (p - top).min(T::zero()),
            rank,
        })
        .collect())
}

/// Vertex of the parabola through samples `i−1, i, i+1` in (sin φ, dB).
fn refine<T: Scalar>(angles: &[T], db: &[T], i: usize) -> (T, T) {
    let u = |k: usize| angles[k].to_radians().sin();
    let (x0, x2) = (u(i - 1) - u(i), u(i + 1) - u(i));
    let (p0, p1, p2) = (db[i - 1] - db[i], T::zero(), db[i + 1] - db[i]);
    let det = x0 * x2 * (x0 - x2);
    if det == T::zero() || p0 <= T::lit(DB_SENTINEL) || p2 <= T::lit(DB_SENTINEL) {
        return (angles[i], db[i]);
    }
    let a = (p0 * x2 - p2 * x0) / det;
    let b = (p2 * x0 * x0 - p0 * x2 * x2) / det;
    if !(a < T::zero()) {
        return (angles[i], db[i]);
    }
    let x = (-b / (T::lit(2.0) * a)).max(x0).min(x2);
    let peak = db[i] + p1 + b * x + a * x * x;
    let s = (u(i) + x).max(-T::one()).min(T::one());
    (s.asin().to_degrees(), peak)
}

/// Absolute error between the commanded angle and the nearest lobe (deg).
pub fn squint_error<T: Scalar>(lobes: &[Lobe<T>], phi_d_deg: T) -> Result<T> {
    lobes
        .iter()
        .map(|l| (l.angle_deg - phi_d_deg).abs())
        .fold(None, |best: Option<T>, d| {
            Some(best.map_or(d, |b| b.min(d)))
        })
        .ok_or_else(|| Error::InvalidArgument("no lobes to compare against".into()))
}

/// Scattering ratio `2πρ|E_s|²/E0²` (linear).
pub fn rcs_linear<T: Scalar>(field: Complex<T>, wave: &PlaneWave<T>, rho_m: T) -> Result<T> {
    if wave.amplitude == T::zero() {
        return Err(Error::ZeroAmplitude);
    }
    if !(rho_m > T::zero()) {
        return Err(Error::NonpositiveDistance(
            rho_m.to_f64().unwrap_or(f64::NAN),
        ));
    }
    Ok(T::TAU() * rho_m * field.norm_sqr() / (wave.amplitude * wave.amplitude))
}

/// `10·log10` of [`rcs_linear`], −300 dB for a null.
pub fn rcs<T: Scalar>(field: Complex<T>, wave: &PlaneWave<T>, rho_m: T) -> Result<T> {
    Ok(power_db(rcs_linear(field, wave, rho_m)?))
}

pub(crate) fn power_db<T: Scalar>(linear: T) -> T {
    if linear > T::zero() {
        (T::lit(10.0) * linear.log10()).max(T::lit(DB_SENTINEL))
    } else {
        T::lit(DB_SENTINEL)
    }
}

/// Forward `σ_f(φi → φd)` and reverse `σ_r(φd → φi)` RCS of one profile,
/// synthesized once from `cmd` and reused for both legs.
pub fn reciprocity_report<T: Scalar>(
    mode: ProfileMode,
    cmd: SteeringCommand<T>,
    scenario: &ScenarioConfig<T>,
    cfg: &AnalysisConfig<T>,
) -> Result<RcsEntry<T>> {
    let k0 = scenario.carrier.k0();
    let ris = &scenario.ris;
    let profile = synthesize(mode, cmd, k0, ris.spacing_m, ris.element_count);

    let forward = PlaneWave::unit(cmd.incidence_deg)?;
    let e_f = scattered_field(&profile, &forward, cmd.desired_deg, cfg.rho_m, ris, k0)?;
    let reverse = PlaneWave::unit(cmd.desired_deg)?;
    let e_r = scattered_field(&profile, &reverse, cmd.incidence_deg, cfg.rho_m, ris, k0)?;

    Ok(RcsEntry {
        mode,
        phi_i_deg: cmd.incidence_deg,
        phi_d_deg: cmd.desired_deg,
        sigma_f_db: rcs(e_f, &forward, cfg.rho_m)? + cfg.calibration_offset_db,
        sigma_r_db: rcs(e_r, &reverse, cfg.rho_m)? + cfg.calibration_offset_db,
    })
}

/// Commanded-angle grid over [−90°, 90°] with the given step.
pub fn command_grid<T: Scalar>(step_deg: T) -> Result<Vec<T>> {
    if !(step_deg > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "sweep step must be > 0 (got {step_deg})"
        )));
    }
    let n = (T::lit(180.0) / step_deg).floor().to_usize().unwrap_or(0);
    Ok((0..=n)
        .map(|i| T::lit(-90.0) + T::lit(i as f64) * step_deg)
        .collect())
}

/// One pattern per commanded direction, reduced to its strongest lobes.
pub fn steering_sweep<T: Scalar>(
    mode: ProfileMode,
    phi_i_deg: T,
    phi_d_grid: &[T],
    scenario: &ScenarioConfig<T>,
    cfg: &AnalysisConfig<T>,
) -> Result<Vec<SweepRow<T>>> {
    let k0 = scenario.carrier.k0();
    let ris = &scenario.ris;
    let wave = PlaneWave::unit(phi_i_deg)?;
    phi_d_grid
        .par_iter()
        .map(|&phi_d| {
            let cmd = SteeringCommand::new(phi_i_deg, phi_d)?;
            let profile = synthesize(mode, cmd, k0, ris.spacing_m, ris.element_count);
            let pattern = pattern_scan(&profile, &wave, cfg.rho_m, ris, k0, cfg.grid_step_deg)?;
            let mut lobes = find_lobes(&pattern, cfg.floor_db)?;
            lobes.truncate(cfg.max_lobes);
            Ok(SweepRow {
                phi_d_cmd_deg: phi_d,
                lobes,
            })
        })
        .collect()
}

/// Incidence/desired angle pairs of the reference RCS table.
pub fn reference_angle_cases<T: Scalar>() -> Vec<(T, T)> {
    [(-30.0, 30.0), (0.0, 30.0), (0.0, 45.0)]
        .into_iter()
        .map(|(i, d)| (T::lit(i), T::lit(d)))
        .collect()
}

/// Every mode for every angle pair, angle-pair major.
pub fn cases_for_all_modes<T: Scalar>(angles: &[(T, T)]) -> Vec<(ProfileMode, T, T)> {
    angles
        .iter()
        .flat_map(|&(i, d)| ProfileMode::ALL.into_iter().map(move |m| (m, i, d)))
        .collect()
}

pub fn rcs_table<T: Scalar>(
    scenario: &ScenarioConfig<T>,
    cases: &[(ProfileMode, T, T)],
    cfg: &AnalysisConfig<T>,
) -> Result<Vec<RcsEntry<T>>> {
    cases
        .par_iter()
        .map(|&(mode, phi_i, phi_d)| {
            reciprocity_report(mode, SteeringCommand::new(phi_i, phi_d)?, scenario, cfg)
        })
        .collect()
}

pub fn lobes_csv<T: Scalar>(lobes: &[Lobe<T>]) -> String {
    let mut out = String::from("rank,angle_deg,power_db\n");
    for l in lobes {
        out.push_str(&format!(
            "{},{},{}\n",
            l.rank,
            fmt_g9(l.angle_deg),
            fmt_g9(l.power_db)
        ));
    }
    out
}

pub fn sweep_csv<T: Scalar>(rows: &[SweepRow<T>]) -> String {
    let mut out = String::from("phi_d_cmd_deg,rank,lobe_angle_deg,lobe_power_db\n");
    for row in rows {
        for l in &row.lobes {
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt_g9(row.phi_d_cmd_deg),
                l.rank,
                fmt_g9(l.angle_deg),
                fmt_g9(l.power_db)
            ));
        }
    }
    out
}

pub fn rcs_table_csv<T: Scalar>(entries: &[RcsEntry<T>]) -> String {
    let mut out = String::from("mode,phi_i_deg,phi_d_deg,sigma_f_db,sigma_r_db\n");
    for e in entries {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            e.mode,
            fmt_g9(e.phi_i_deg),
            fmt_g9(e.phi_d_deg),
            fmt_g9(e.sigma_f_db),
            fmt_g9(e.sigma_r_db)
        ));
    }
    out
}
