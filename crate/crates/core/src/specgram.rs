//! Short-time Fourier transform of the slow-time return.
//!
//! Frame `k` covers samples `[k·hop, k·hop + W)`. Each frame is multiplied by
//! the window and transformed with an unnormalized DFT,
//! `X[m] = Σ_n x[n] w[n] e^{−j2πmn/W}`, so `Σ|X|² = W·Σ|x·w|²`. Bins are
//! reordered so zero Doppler sits in the middle and the axis spans
//! `[−prf/2, prf/2)`.

use std::path::Path;

use rayon::prelude::*;
use rustfft::{FftNum, FftPlanner};

use crate::dynamics::SlowTimeSignal;
use crate::io::{fmt_g9, write_atomic};
use crate::{Complex, Error, Result, Scalar};

/// Lowest level kept in `mags_db` (dB below the global maximum).
pub const DB_FLOOR: f64 = -80.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowShape {
    Hann,
    Rect,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSpec<T> {
    pub duration_s: T,
    pub hop_s: T,
    pub shape: WindowShape,
}

impl<T: Scalar> Default for WindowSpec<T> {
    /// 0.1 s Hann window, 10 ms hop.
    fn default() -> Self {
        Self {
            duration_s: T::lit(0.1),
            hop_s: T::lit(0.01),
            shape: WindowShape::Hann,
        }
    }
}

impl<T: Scalar> WindowSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.hop_s > T::zero() && self.hop_s <= self.duration_s {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "window needs 0 < hop ({}) ≤ duration ({})",
                self.hop_s, self.duration_s
            )))
        }
    }

    pub fn samples(&self, prf_hz: T) -> usize {
        (self.duration_s * prf_hz)
            .round()
            .to_usize()
            .unwrap_or(0)
            .max(1)
    }

    pub fn hop_samples(&self, prf_hz: T) -> usize {
        (self.hop_s * prf_hz).round().to_usize().unwrap_or(0).max(1)
    }

    pub fn coefficients(&self, len: usize) -> Vec<T> {
        match self.shape {
            WindowShape::Rect => vec![T::one(); len],
            WindowShape::Hann => (0..len)
                .map(|n| {
                    let x = T::TAU() * T::lit(n as f64) / T::lit(len as f64);
                    T::lit(0.5) - T::lit(0.5) * x.cos()
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram<T> {
    /// Frame center times (s).
    pub times_s: Vec<T>,
    /// Doppler bin centers (Hz), ascending.
    pub freqs_hz: Vec<T>,
    /// Linear `|X|²`, frames × bins.
    pub power: Vec<Vec<T>>,
    /// `10·log10(power / max power)`, clamped at [`DB_FLOOR`].
    pub mags_db: Vec<Vec<T>>,
}

/// Frequency of shifted bin `k` for a `len`-point transform.
pub fn bin_frequency<T: Scalar>(k: usize, len: usize, prf_hz: T) -> T {
    T::lit(k as f64 - (len / 2) as f64) * prf_hz / T::lit(len as f64)
}

/// Windowed, transformed and center-shifted frames.
pub fn stft_frames<T: Scalar + FftNum>(
    signal: &SlowTimeSignal<T>,
    window: &WindowSpec<T>,
) -> Result<Vec<Vec<Complex<T>>>> {
    window.validate()?;
    let len = window.samples(signal.prf_hz);
    let hop = window.hop_samples(signal.prf_hz);
    if signal.len() < len {
        return Err(Error::SignalTooShort {
            samples: signal.len(),
            window: len,
        });
    }
    let frames = (signal.len() - len) / hop + 1;
    let coeffs = window.coefficients(len);
    let fft = FftPlanner::<T>::new().plan_fft_forward(len);
    let half = len / 2;

    Ok((0..frames)
        .into_par_iter()
        .map(|f| {
            let start = f * hop;
            let mut buf: Vec<Complex<T>> = signal.samples[start..start + len]
                .iter()
                .zip(&coeffs)
                .map(|(s, &w)| *s * w)
                .collect();
            fft.process(&mut buf);
            (0..len).map(|k| buf[(k + len - half) % len]).collect()
        })
        .collect())
}

pub fn stft<T: Scalar + FftNum>(
    signal: &SlowTimeSignal<T>,
    window: &WindowSpec<T>,
) -> Result<Spectrogram<T>> {
    let frames = stft_frames(signal, window)?;
    let len = window.samples(signal.prf_hz);
    let hop = window.hop_samples(signal.prf_hz);
    let prf = signal.prf_hz;
    let times_s = (0..frames.len())
        .map(|f| T::lit((f * hop) as f64 + len as f64 / 2.0) / prf)
        .collect();
    let freqs_hz = (0..len).map(|k| bin_frequency(k, len, prf)).collect();
    let power: Vec<Vec<T>> = frames
        .iter()
        .map(|row| row.iter().map(|x| x.norm_sqr()).collect())
        .collect();
    let mags_db = to_db(&power);
    Ok(Spectrogram {
        times_s,
        freqs_hz,
        power,
        mags_db,
    })
}

fn to_db<T: Scalar>(power: &[Vec<T>]) -> Vec<Vec<T>> {
    let peak = power.iter().flatten().copied().fold(T::zero(), T::max);
    let floor = T::lit(DB_FLOOR);
    power
        .iter()
        .map(|row| {
            row.iter()
                .map(|&p| {
                    if p > T::zero() && peak > T::zero() {
                        (T::lit(10.0) * (p / peak).log10()).max(floor)
                    } else {
                        floor
                    }
                })
                .collect()
        })
        .collect()
}

impl<T: Scalar> Spectrogram<T> {
    /// Long-format `t_s,f_hz,mag_db`, time-major.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_s,f_hz,mag_db\n");
        for (t, row) in self.times_s.iter().zip(&self.mags_db) {
            for (f, m) in self.freqs_hz.iter().zip(row) {
                out.push_str(&format!("{},{},{}\n", fmt_g9(*t), fmt_g9(*f), fmt_g9(*m)));
            }
        }
        out
    }

    /// Frequency of the strongest bin in every frame.
    pub fn peak_track(&self) -> Vec<T> {
        self.power
            .iter()
            .map(|row| {
                let (k, _) = row
                    .iter()
                    .enumerate()
                    .fold(
                        (0, T::neg_infinity()),
                        |acc, (k, &p)| if p > acc.1 { (k, p) } else { acc },
                    );
                self.freqs_hz[k]
            })
            .collect()
    }

    /// Total linear power over all frames and bins.
    pub fn total_energy(&self) -> T {
        self.power.iter().flatten().copied().sum()
    }

    /// Bin spacing (Hz); zero for fewer than two bins.
    pub fn bin_width_hz(&self) -> T {
        match self.freqs_hz.as_slice() {
            [a, b, ..] => *b - *a,
            _ => T::zero(),
        }
    }
}

pub fn spectrogram_to_csv<T: Scalar>(spec: &Spectrogram<T>, path: &Path) -> Result<()> {
    write_atomic(path, spec.to_csv().as_bytes())
}

/// `(times, freqs, mags_db)` as read back from CSV.
pub type SpectrogramGrid<T> = (Vec<T>, Vec<T>, Vec<Vec<T>>);

/// Parses the long-format CSV back into its axes and dB grid.
pub fn parse_spectrogram_csv<T: Scalar>(text: &str) -> Result<SpectrogramGrid<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Csv(e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["t_s", "f_hz", "mag_db"] {
        return Err(Error::Csv(format!("unexpected header {headers:?}")));
    }
    let mut times: Vec<T> = Vec::new();
    let mut freqs: Vec<T> = Vec::new();
    let mut mags: Vec<Vec<T>> = Vec::new();
    let parse = |s: &str| {
        s.parse::<T>()
            .map_err(|_| Error::Csv(format!("bad number {s:?}")))
    };
    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        let (t, f, m) = (parse(&record[0])?, parse(&record[1])?, parse(&record[2])?);
        if times.last() != Some(&t) {
            times.push(t);
            mags.push(Vec::new());
        }
        let row = mags.last_mut().expect("row exists");
        if times.len() == 1 {
            freqs.push(f);
        } else if freqs.get(row.len()) != Some(&f) {
            return Err(Error::Csv(format!("frequency axis mismatch at t = {t}")));
        }
        row.push(m);
    }
    if mags.iter().any(|r| r.len() != freqs.len()) {
        return Err(Error::Csv("ragged spectrogram rows".into()));
    }
    Ok((times, freqs, mags))
}

/// Period (in frames) of a frame-indexed track: the first autocorrelation
/// peak at or above `min_correlation` after the correlation has gone
/// negative. Lags need at least `min_overlap` overlapping frames.
pub fn track_period<T: Scalar>(
    track: &[T],
    min_overlap: usize,
    min_correlation: T,
) -> Option<usize> {
    let n = track.len();
    let corr = |lag: usize| -> T {
        let a = &track[..n - lag];
        let b = &track[lag..];
        let len = T::lit(a.len() as f64);
        let (ma, mb) = (
            a.iter().copied().sum::<T>() / len,
            b.iter().copied().sum::<T>() / len,
        );
        let (mut sab, mut saa, mut sbb) = (T::zero(), T::zero(), T::zero());
        for (&x, &y) in a.iter().zip(b) {
            sab = sab + (x - ma) * (y - mb);
            saa = saa + (x - ma) * (x - ma);
            sbb = sbb + (y - mb) * (y - mb);
        }
        if saa == T::zero() || sbb == T::zero() {
            T::zero()
        } else {
            sab / (saa * sbb).sqrt()
        }
    };
    if n < min_overlap + 2 {
        return None;
    }
    let max_lag = n - min_overlap;
    let r: Vec<T> = (0..=max_lag).map(corr).collect();
    let first_negative = r.iter().position(|&v| v < T::zero())?;
    (first_negative.max(1)..max_lag)
        .find(|&lag| r[lag] >= min_correlation && r[lag] > r[lag - 1] && r[lag] >= r[lag + 1])
}
