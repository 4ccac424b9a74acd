//! Vorticity profiles `G` for the Grad-Shafranov relation `Δψ = G(ψ)`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Read;

/// Monotone cubic (Fritsch-Carlson) interpolant of tabulated `(u, G(u))`
/// pairs, extended linearly outside the table.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "TableData", into = "TableData")]
pub struct MonotoneTable {
    u: Vec<f64>,
    g: Vec<f64>,
    slopes: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct TableData {
    u: Vec<f64>,
    g: Vec<f64>,
}

impl TryFrom<TableData> for MonotoneTable {
    type Error = Error;
    fn try_from(t: TableData) -> Result<Self> {
        MonotoneTable::new(t.u, t.g)
    }
}

impl From<MonotoneTable> for TableData {
    fn from(t: MonotoneTable) -> Self {
        TableData { u: t.u, g: t.g }
    }
}

impl MonotoneTable {
    pub fn new(u: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        if u.len() != g.len() || u.len() < 2 {
            return Err(Error::InvalidInput(
                "profile table needs at least two (u, G) pairs".into(),
            ));
        }
        if u.iter().chain(&g).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("profile table has non-finite entries".into()));
        }
        for k in 1..u.len() {
            if u[k] <= u[k - 1] {
                return Err(Error::InvalidInput(format!(
                    "profile abscissae must be strictly increasing (row {k})"
                )));
            }
            if g[k] < g[k - 1] {
                return Err(Error::NonMonotone(u[k]));
            }
        }
        let n = u.len();
        let delta: Vec<f64> = (0..n - 1)
            .map(|k| (g[k + 1] - g[k]) / (u[k + 1] - u[k]))
            .collect();
        let mut m = vec![0.0; n];
        m[0] = delta[0];
        m[n - 1] = delta[n - 2];
        for k in 1..n - 1 {
            m[k] = if delta[k - 1] * delta[k] <= 0.0 {
                0.0
            } else {
                0.5 * (delta[k - 1] + delta[k])
            };
        }
        for k in 0..n - 1 {
            if delta[k] == 0.0 {
                m[k] = 0.0;
                m[k + 1] = 0.0;
                continue;
            }
            let a = m[k] / delta[k];
            let b = m[k + 1] / delta[k];
            let s = a * a + b * b;
            if s > 9.0 {
                let t = 3.0 / s.sqrt();
                m[k] = t * a * delta[k];
                m[k + 1] = t * b * delta[k];
            }
        }
        Ok(Self { u, g, slopes: m })
    }

    pub fn knots(&self) -> (&[f64], &[f64]) {
        (&self.u, &self.g)
    }

    /// Value and first three derivatives at `x`.
    fn eval_all(&self, x: f64) -> [f64; 4] {
        let n = self.u.len();
        if x <= self.u[0] {
            return [self.g[0] + self.slopes[0] * (x - self.u[0]), self.slopes[0], 0.0, 0.0];
        }
        if x >= self.u[n - 1] {
            return [
                self.g[n - 1] + self.slopes[n - 1] * (x - self.u[n - 1]),
                self.slopes[n - 1],
                0.0,
                0.0,
            ];
        }
        let k = self.u.partition_point(|&v| v <= x) - 1;
        let h = self.u[k + 1] - self.u[k];
        let t = (x - self.u[k]) / h;
        let (y0, y1) = (self.g[k], self.g[k + 1]);
        let (m0, m1) = (self.slopes[k] * h, self.slopes[k + 1] * h);
        // Cubic in t: y0 + m0 t + c2 t^2 + c3 t^3.
        let c2 = 3.0 * (y1 - y0) - 2.0 * m0 - m1;
        let c3 = 2.0 * (y0 - y1) + m0 + m1;
        let v = y0 + t * (m0 + t * (c2 + t * c3));
        let d1 = (m0 + t * (2.0 * c2 + 3.0 * t * c3)) / h;
        let d2 = (2.0 * c2 + 6.0 * t * c3) / (h * h);
        let d3 = 6.0 * c3 / (h * h * h);
        [v, d1, d2, d3]
    }
}

/// The shape of `G`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileKind {
    /// `G(u) = value`.
    Constant { value: f64 },
    /// `G(u) = offset + slope * u`.
    Linear { offset: f64, slope: f64 },
    /// `G(u) = offset + amplitude * exp(rate * u)`.
    Exponential { offset: f64, amplitude: f64, rate: f64 },
    /// Monotone cubic through tabulated values.
    Table(MonotoneTable),
}

/// A non-decreasing vorticity function with derivatives up to third order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VorticityProfile {
    pub kind: ProfileKind,
    pub monotone_certified: bool,
}

impl VorticityProfile {
    fn certified(kind: ProfileKind) -> Self {
        Self { kind, monotone_certified: true }
    }

    /// Rigid rotation with angular speed `omega0`: `G ≡ -2 Ω₀`.
    pub fn rigid_preset(omega0: f64) -> Result<Self> {
        if !(omega0 > 0.0) || !omega0.is_finite() {
            return Err(Error::InvalidInput(format!(
                "rigid preset needs omega0 > 0, got {omega0}"
            )));
        }
        Ok(Self::certified(ProfileKind::Constant { value: -2.0 * omega0 }))
    }

    pub fn constant(value: f64) -> Self {
        Self::certified(ProfileKind::Constant { value })
    }

    pub fn linear(offset: f64, slope: f64) -> Result<Self> {
        if slope < 0.0 {
            return Err(Error::NonMonotone(0.0));
        }
        Ok(Self::certified(ProfileKind::Linear { offset, slope }))
    }

    pub fn exponential(offset: f64, amplitude: f64, rate: f64) -> Result<Self> {
        if amplitude * rate < 0.0 {
            return Err(Error::NonMonotone(0.0));
        }
        Ok(Self::certified(ProfileKind::Exponential { offset, amplitude, rate }))
    }

    pub fn from_table(u: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        let t = MonotoneTable::new(u, g)?;
        let lo = t.u[0];
        let hi = *t.u.last().unwrap();
        let p = Self::certified(ProfileKind::Table(t));
        p.check_monotone(lo, hi)?;
        Ok(p)
    }

    /// Reads a two-column `u,G` CSV. A non-numeric first row is treated as a header.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut u = Vec::new();
        let mut g = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            if rec.len() != 2 {
                return Err(Error::Parse(format!(
                    "row {}: expected 2 columns, found {}",
                    row + 1,
                    rec.len()
                )));
            }
            let parsed = (rec[0].parse::<f64>(), rec[1].parse::<f64>());
            match parsed {
                (Ok(a), Ok(b)) => {
                    u.push(a);
                    g.push(b);
                }
                _ if row == 0 => continue,
                _ => return Err(Error::Parse(format!("row {}: not a number", row + 1))),
            }
        }
        Self::from_table(u, g)
    }

    pub fn from_csv_path(path: &std::path::Path) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    /// `[G, G', G'', G''']` at `u`.
    pub fn eval_all(&self, u: f64) -> [f64; 4] {
        match &self.kind {
            ProfileKind::Constant { value } => [*value, 0.0, 0.0, 0.0],
            ProfileKind::Linear { offset, slope } => [offset + slope * u, *slope, 0.0, 0.0],
            ProfileKind::Exponential { offset, amplitude, rate } => {
                let e = amplitude * (rate * u).exp();
                [offset + e, rate * e, rate * rate * e, rate * rate * rate * e]
            }
            ProfileKind::Table(t) => t.eval_all(u),
        }
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.eval_all(u)[0]
    }

    pub fn d1(&self, u: f64) -> f64 {
        self.eval_all(u)[1]
    }

    pub fn d2(&self, u: f64) -> f64 {
        self.eval_all(u)[2]
    }

    pub fn d3(&self, u: f64) -> f64 {
        self.eval_all(u)[3]
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, ProfileKind::Constant { .. })
            || matches!(self.kind, ProfileKind::Linear { slope, .. } if slope == 0.0)
            || matches!(self.kind, ProfileKind::Exponential { amplitude, rate, .. } if amplitude == 0.0 || rate == 0.0)
    }

    /// Checks `G` non-decreasing and `G' >= 0` on a 1000-point grid over [lo, hi].
    pub fn check_monotone(&self, lo: f64, hi: f64) -> Result<()> {
        const SAMPLES: usize = 1000;
        let mut prev = f64::NEG_INFINITY;
        for k in 0..SAMPLES {
            let u = lo + (hi - lo) * k as f64 / (SAMPLES - 1) as f64;
            let [g, d1, _, _] = self.eval_all(u);
            let tol = 1e-12 * (1.0 + g.abs());
            if g < prev - tol || d1 < -tol {
                return Err(Error::NonMonotone(u));
            }
            prev = g;
        }
        Ok(())
    }

    /// Sup of `|G|` sampled on [lo, hi].
    pub fn sup_abs(&self, lo: f64, hi: f64) -> f64 {
        (0..=64)
            .map(|k| self.eval(lo + (hi - lo) * k as f64 / 64.0).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rigid_preset_values() {
        let p = VorticityProfile::rigid_preset(1.0).unwrap();
        assert_eq!(p.eval(0.37), -2.0);
        assert_eq!(p.d1(5.0), 0.0);
        assert_eq!(VorticityProfile::rigid_preset(0.5).unwrap().eval(-1.0), -1.0);
        assert!(p.monotone_certified);
        assert!(VorticityProfile::rigid_preset(0.0).is_err());
        assert!(VorticityProfile::rigid_preset(-1.0).is_err());
    }

    #[test]
    fn rejects_decreasing_profiles() {
        assert!(VorticityProfile::linear(0.0, -1.0).is_err());
        assert!(VorticityProfile::exponential(0.0, 1.0, -1.0).is_err());
        assert!(matches!(
            VorticityProfile::from_table(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.5]),
            Err(Error::NonMonotone(_))
        ));
    }

    #[test]
    fn table_preserves_monotonicity_and_nodes() {
        let u = vec![-1.0, 0.0, 0.2, 1.0, 3.0];
        let g = vec![-3.0, -1.0, -1.0, 2.0, 2.5];
        let p = VorticityProfile::from_table(u.clone(), g.clone()).unwrap();
        for (a, b) in u.iter().zip(&g) {
            assert!((p.eval(*a) - b).abs() < 1e-14);
        }
        p.check_monotone(-5.0, 5.0).unwrap();
        assert!((p.d1(10.0) - p.d1(3.0)).abs() < 1e-14);
    }

    #[test]
    fn csv_ingestion() {
        let text = "u,G\n0,1\n1,2\n2,4\n";
        let p = VorticityProfile::from_csv_reader(text.as_bytes()).unwrap();
        assert!((p.eval(1.0) - 2.0).abs() < 1e-14);
        let bad = "0,1\n1,0\n";
        assert!(VorticityProfile::from_csv_reader(bad.as_bytes()).is_err());
        let junk = "0,1\nx,2\n";
        assert!(matches!(
            VorticityProfile::from_csv_reader(junk.as_bytes()),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let p = VorticityProfile::from_table(vec![0.0, 1.0, 2.0], vec![0.0, 0.5, 2.0]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        let q: VorticityProfile = serde_json::from_str(&s).unwrap();
        assert_eq!(p.eval(0.7), q.eval(0.7));
    }

    fn profiles() -> Vec<VorticityProfile> {
        vec![
            VorticityProfile::rigid_preset(0.8).unwrap(),
            VorticityProfile::linear(-1.0, 1.0).unwrap(),
            VorticityProfile::exponential(-2.0, 0.5, 1.3).unwrap(),
            VorticityProfile::from_table(
                vec![-2.0, -0.5, 0.0, 0.4, 1.5],
                vec![-4.0, -2.5, -2.0, -1.0, 0.0],
            )
            .unwrap(),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn finite_differences_match_derivatives(u in -1.8f64..1.3, which in 0usize..4) {
            let p = &profiles()[which];
            // Second-order central differences with two step sizes; the error
            // must drop by about four when the step halves.
            for k in 0..3 {
                let f = |x: f64| p.eval_all(x)[k];
                let exact = p.eval_all(u)[k + 1];
                let e1 = ((f(u + 1e-3) - f(u - 1e-3)) / 2e-3 - exact).abs();
                let e2 = ((f(u + 5e-4) - f(u - 5e-4)) / 1e-3 - exact).abs();
                if let ProfileKind::Table(_) = p.kind {
                    // Piecewise cubic: only check away from the knots.
                    let (knots, _) = match &p.kind { ProfileKind::Table(t) => t.knots(), _ => unreachable!() };
                    if knots.iter().any(|x| (x - u).abs() < 2e-3) { continue; }
                }
                prop_assert!(e2 <= 0.3 * e1 + 1e-7, "k={} e1={} e2={}", k, e1, e2);
            }
        }
    }
}
