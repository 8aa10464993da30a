use std::collections::BTreeMap;
use std::f64::consts::PI;

use chrono::{Datelike, Months, NaiveDate};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::LoadSeries;
use crate::calendar::{classify_days, is_weekend, Category, HolidayCalendar, SeasonalGrid};
use crate::error::{Error, Result};
use crate::rng;

/// Additive ARMA(1,1) disturbance in MW.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub ar: f64,
    pub ma: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub start: NaiveDate,
    /// Whole calendar years generated from `start`.
    pub years: u32,
    pub periods_per_day: usize,
    pub base_level: f64,
    pub trend_per_year: f64,
    /// Amplitude of the annual cosine, highest in mid-January.
    pub intrayear_amplitude: f64,
    /// Level multipliers Monday..Sunday.
    pub day_levels: Vec<f64>,
    /// Intraday shapes (mean 1 recommended); generated when absent.
    pub weekday_profile: Option<Vec<f64>>,
    pub weekend_profile: Option<Vec<f64>>,
    /// Range of the peak depression drawn for each holiday.
    pub holiday_depression: [f64; 2],
    /// Explicit multiplicative factors per holiday, overriding the draw.
    pub holiday_profiles: BTreeMap<String, Vec<f64>>,
    /// Standard deviation of the yearly random-walk change of each depth.
    pub holiday_drift: f64,
    /// Depth multiplier for holidays falling on a weekend.
    pub weekend_holiday_scale: f64,
    pub bridging_attenuation: f64,
    pub non_bridging_attenuation: f64,
    /// Slowly varying disturbance.
    pub noise: NoiseConfig,
    /// Short-memory disturbance added on top of `noise`.
    pub fast_noise: NoiseConfig,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            start: NaiveDate::from_ymd_opt(2001, 1, 1).expect("valid date"),
            years: 4,
            periods_per_day: 48,
            base_level: 50_000.0,
            trend_per_year: 600.0,
            intrayear_amplitude: 9_000.0,
            day_levels: vec![0.98, 1.0, 1.0, 1.0, 0.98, 0.86, 0.80],
            weekday_profile: None,
            weekend_profile: None,
            holiday_depression: [0.2, 0.4],
            holiday_profiles: BTreeMap::new(),
            holiday_drift: 0.01,
            weekend_holiday_scale: 0.6,
            bridging_attenuation: 0.6,
            non_bridging_attenuation: 0.3,
            noise: NoiseConfig {
                ar: 0.998,
                ma: 0.2,
                sd: 300.0,
            },
            fast_noise: NoiseConfig {
                ar: 0.99,
                ma: 0.2,
                sd: 600.0,
            },
        }
    }
}

impl SynthConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn end(&self) -> NaiveDate {
        self.start
            .checked_add_months(Months::new(12 * self.years))
            .and_then(|d| d.pred_opt())
            .expect("date in range")
    }

    pub fn validate(&self) -> Result<()> {
        let m1 = self.periods_per_day;
        let bad = |field: &str, msg: String| Err(Error::Config(format!("{field}: {msg}")));
        if m1 == 0 {
            return bad("periods_per_day", "must be positive".into());
        }
        if self.years == 0 {
            return bad("years", "must be positive".into());
        }
        if self.day_levels.len() != 7 || self.day_levels.iter().any(|v| *v <= 0.0) {
            return bad("day_levels", "needs 7 positive values".into());
        }
        for (field, p) in [("weekday_profile", &self.weekday_profile), ("weekend_profile", &self.weekend_profile)] {
            if let Some(p) = p {
                if p.len() != m1 || p.iter().any(|v| *v <= 0.0) {
                    return bad(field, format!("needs {m1} positive values"));
                }
            }
        }
        let [lo, hi] = self.holiday_depression;
        if !(0.0..1.0).contains(&lo) || !(lo..1.0).contains(&hi) {
            return bad("holiday_depression", format!("needs 0 <= min <= max < 1, got [{lo}, {hi}]"));
        }
        for (name, f) in &self.holiday_profiles {
            if f.len() != m1 || f.iter().any(|v| !(*v > 0.0 && *v <= 1.0)) {
                return bad("holiday_profiles", format!("`{name}` needs {m1} factors in (0, 1]"));
            }
        }
        for (field, n) in [("noise", &self.noise), ("fast_noise", &self.fast_noise)] {
            if n.sd < 0.0 || n.ar.abs() >= 1.0 {
                return bad(field, "needs sd >= 0 and |ar| < 1".into());
            }
        }
        Ok(())
    }
}

fn gaussian_bump(x: f64, center: f64, width: f64) -> f64 {
    (-((x - center) / width).powi(2)).exp()
}

fn normalized(v: Vec<f64>) -> Vec<f64> {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.into_iter().map(|x| x / mean).collect()
}

fn hour(slot: usize, m1: usize) -> f64 {
    (slot as f64 + 0.5) * 24.0 / m1 as f64
}

fn default_weekday_profile(m1: usize) -> Vec<f64> {
    normalized(
        (0..m1)
            .map(|s| {
                let h = hour(s, m1);
                0.72 + 0.22 * gaussian_bump(h, 11.5, 4.0) + 0.28 * gaussian_bump(h, 19.5, 2.2)
                    - 0.08 * gaussian_bump(h, 4.0, 2.0)
            })
            .collect(),
    )
}

fn default_weekend_profile(m1: usize) -> Vec<f64> {
    normalized(
        (0..m1)
            .map(|s| {
                let h = hour(s, m1);
                0.78 + 0.15 * gaussian_bump(h, 13.0, 3.5) + 0.22 * gaussian_bump(h, 19.5, 2.2)
                    - 0.08 * gaussian_bump(h, 5.0, 2.0)
            })
            .collect(),
    )
}

/// Depth and slot shape of one holiday's depression.
struct Depression {
    /// Depth per year offset from the series start.
    depths: Vec<f64>,
    /// Shape in (0, 1], peaking at 1.
    shape: Vec<f64>,
}

impl Depression {
    fn factor(&self, year: usize, slot: usize, scale: f64) -> f64 {
        1.0 - scale * self.depths[year] * self.shape[slot]
    }
}

fn draw_depression(cfg: &SynthConfig, name: &str, n_years: usize) -> Depression {
    let m1 = cfg.periods_per_day;
    let mut r = rng::stream(rng::derive_seed(cfg.seed, name), 0, 0);
    let [lo, hi] = cfg.holiday_depression;
    let depth = if hi > lo { r.random_range(lo..hi) } else { lo };
    let center = r.random_range(10.0..15.0);
    let width = r.random_range(3.0..6.0);
    let floor = r.random_range(0.2..0.4);
    let shape = (0..m1)
        .map(|s| floor + (1.0 - floor) * gaussian_bump(hour(s, m1), center, width))
        .collect();
    let step = Normal::new(0.0, cfg.holiday_drift.max(0.0)).expect("finite drift");
    let mut d = depth;
    let depths = (0..n_years)
        .map(|_| {
            let now = d;
            d = (d + step.sample(&mut r)).clamp(0.02, 0.9);
            now
        })
        .collect();
    Depression { depths, shape }
}

/// ARMA(1,1) started from its stationary distribution.
struct NoiseProcess {
    cfg: NoiseConfig,
    rng: rand_chacha::ChaCha8Rng,
    innov: Normal<f64>,
    prev: f64,
    prev_innov: f64,
}

impl NoiseProcess {
    fn new(cfg: &NoiseConfig, seed: u64) -> Result<Self> {
        let mut rng = rng::stream(seed, 0, 0);
        let innov = Normal::new(0.0, cfg.sd).map_err(|e| Error::Config(format!("noise: {e}")))?;
        let stationary_sd = cfg.sd * ((1.0 + 2.0 * cfg.ar * cfg.ma + cfg.ma.powi(2)) / (1.0 - cfg.ar.powi(2))).sqrt();
        let prev = stationary_sd * Normal::new(0.0, 1.0).expect("unit normal").sample(&mut rng);
        Ok(Self {
            cfg: *cfg,
            rng,
            innov,
            prev,
            prev_innov: 0.0,
        })
    }

    fn next(&mut self) -> f64 {
        let a = self.innov.sample(&mut self.rng);
        let n = self.cfg.ar * self.prev + a + self.cfg.ma * self.prev_innov;
        self.prev = n;
        self.prev_innov = a;
        n
    }
}

/// Deterministic synthetic load for `cfg` over the calendar's special days.
pub fn generate_synthetic(cfg: &SynthConfig, calendar: &HolidayCalendar) -> Result<LoadSeries> {
    cfg.validate()?;
    let m1 = cfg.periods_per_day;
    let end = cfg.end();
    let span = classify_days(calendar, cfg.start, end)?;
    let weekday = cfg.weekday_profile.clone().unwrap_or_else(|| default_weekday_profile(m1));
    let weekend = cfg.weekend_profile.clone().unwrap_or_else(|| default_weekend_profile(m1));
    let n_years = (end.year() - cfg.start.year() + 1) as usize;

    let mut depressions: BTreeMap<String, Depression> = BTreeMap::new();
    for day in span.special_days() {
        let name = day.holiday().expect("special day has a holiday");
        if !depressions.contains_key(name) {
            let d = match cfg.holiday_profiles.get(name) {
                Some(f) => Depression {
                    depths: vec![1.0; n_years],
                    shape: f.iter().map(|x| 1.0 - x).collect(),
                },
                None => draw_depression(cfg, name, n_years),
            };
            depressions.insert(name.to_string(), d);
        }
    }

    let mut slow = NoiseProcess::new(&cfg.noise, rng::derive_seed(cfg.seed, "synthetic-noise"))?;
    let mut fast = NoiseProcess::new(&cfg.fast_noise, rng::derive_seed(cfg.seed, "synthetic-fast-noise"))?;

    let floor = 0.05 * cfg.base_level;
    let mut values = Vec::with_capacity(span.len() * m1);
    for (d, day) in span.iter().enumerate() {
        let date = day.date;
        let years_in = d as f64 / 365.25;
        let doy = date.ordinal0() as f64;
        let level = cfg.base_level + cfg.trend_per_year * years_in + cfg.intrayear_amplitude * (2.0 * PI * (doy - 14.0) / 365.25).cos();
        let w = date.weekday().num_days_from_monday() as usize;
        let profile = if is_weekend(date) { &weekend } else { &weekday };
        let depression = day.holiday().map(|name| {
            let scale = match day.category().expect("special day has a category") {
                Category::A => 1.0,
                Category::B => cfg.weekend_holiday_scale,
                Category::C | Category::D => cfg.bridging_attenuation,
                Category::E | Category::F => cfg.non_bridging_attenuation,
                Category::G => cfg.non_bridging_attenuation * cfg.weekend_holiday_scale,
            };
            (&depressions[name], scale)
        });
        let year = (date.year() - cfg.start.year()) as usize;
        for s in 0..m1 {
            let mut v = level * cfg.day_levels[w] * profile[s];
            if let Some((dep, scale)) = depression {
                v *= dep.factor(year, s, scale);
            }
            values.push((v + slow.next() + fast.next()).max(floor));
        }
    }
    LoadSeries::new(SeasonalGrid::new(m1, cfg.start)?, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn calendar(cfg: &SynthConfig) -> HolidayCalendar {
        HolidayCalendar::french(cfg.start.year(), cfg.end().year() + 1).unwrap()
    }

    fn quiet() -> SynthConfig {
        SynthConfig {
            years: 2,
            trend_per_year: 0.0,
            intrayear_amplitude: 0.0,
            noise: NoiseConfig { ar: 0.0, ma: 0.0, sd: 0.0 },
            fast_noise: NoiseConfig { ar: 0.0, ma: 0.0, sd: 0.0 },
            ..Default::default()
        }
    }

    #[test]
    fn deterministic_and_sized() {
        let cfg = SynthConfig {
            years: 2,
            ..Default::default()
        };
        let a = generate_synthetic(&cfg, &calendar(&cfg)).unwrap();
        let b = generate_synthetic(&cfg, &calendar(&cfg)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 35_040);
        let other = SynthConfig { seed: 2, ..cfg.clone() };
        assert_ne!(generate_synthetic(&other, &calendar(&other)).unwrap(), a);
    }

    #[test]
    fn noise_free_normal_days_recover_the_profiles() {
        let cfg = quiet();
        let s = generate_synthetic(&cfg, &calendar(&cfg)).unwrap();
        let wd = default_weekday_profile(48);
        let we = default_weekend_profile(48);
        // 2001-01-08 Monday, 2001-01-13 Saturday: both normal
        let mon = s.day_of(NaiveDate::from_ymd_opt(2001, 1, 8).unwrap()).unwrap();
        let sat = s.day_of(NaiveDate::from_ymd_opt(2001, 1, 13).unwrap()).unwrap();
        for h in 0..48 {
            assert_eq!(mon[h], 50_000.0 * 0.98 * wd[h]);
            assert_eq!(sat[h], 50_000.0 * 0.86 * we[h]);
        }
    }

    #[test]
    fn holidays_are_depressed_and_bridging_is_deeper() {
        let cfg = quiet();
        let cal = calendar(&cfg);
        let s = generate_synthetic(&cfg, &cal).unwrap();
        let span = classify_days(&cal, cfg.start, cfg.end()).unwrap();
        let mean = |d: NaiveDate| s.day_of(d).unwrap().iter().sum::<f64>() / 48.0;
        for day in span.special_days().filter(|d| d.category() == Some(Category::A)) {
            let neighbour = [day.date - chrono::Days::new(7), day.date + chrono::Days::new(7)]
                .into_iter()
                .find(|n| span.get(*n).is_some_and(|c| c.is_normal()));
            if let Some(n) = neighbour {
                assert!(mean(day.date) < mean(n), "{}", day.date);
            }
        }
        // Ascension Thursday 2002 and the bridging Friday after it
        let depth = |d: NaiveDate, normal: NaiveDate| 1.0 - mean(d) / mean(normal);
        let ymd = |m, d| NaiveDate::from_ymd_opt(2002, m, d).unwrap();
        let holiday = depth(ymd(5, 9), ymd(5, 16));
        let bridging = depth(ymd(5, 10), ymd(5, 17));
        assert!((bridging / holiday - 0.6).abs() < 1e-9, "{bridging} {holiday}");
    }

    #[test]
    fn weekend_level_ratio() {
        let cfg = SynthConfig {
            years: 1,
            day_levels: vec![1.0, 1.0, 1.0, 1.0, 1.0, 0.8, 0.8],
            weekend_profile: Some(default_weekday_profile(48)),
            ..quiet()
        };
        let s = generate_synthetic(&cfg, &calendar(&cfg)).unwrap();
        let p = super::super::weekday_profiles(&s, Some(&classify_days(&calendar(&cfg), cfg.start, cfg.end()).unwrap())).unwrap();
        for h in 0..48 {
            assert!((p[5][h] / p[2][h] - 0.8).abs() < 1e-9);
        }
    }

    #[test]
    fn config_round_trip_and_errors() {
        let cfg = SynthConfig::default();
        let text = cfg.to_toml().unwrap();
        assert_eq!(SynthConfig::from_toml(&text).unwrap(), cfg);
        assert!(SynthConfig::from_toml("years = 0").is_err());
        let err = SynthConfig::from_toml("day_levels = [1.0]").unwrap_err().to_string();
        assert!(err.contains("day_levels"));
        assert!(SynthConfig::from_toml("unknown_field = 3").is_err());
    }
}
