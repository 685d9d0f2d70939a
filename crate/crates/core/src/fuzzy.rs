//! Mamdani fuzzy inference and the two fuzzy controllers.
//!
//! * Fuzzy-PID: Table-driven corrections `(Δkp, Δki, Δkd)` on top of a
//!   positional PID that regulates the stability factor.
//! * Variable-universe fuzzy controller (VUFC): a basis controller maps the
//!   normalized ZMP error and error change to a slider set-point; a second
//!   one-input controller contracts or expands the universes with the
//!   stability level.
//!
//! Inference uses evenly spaced triangular sets that form a partition of
//! unity, min for AND, max aggregation and centroid defuzzification. The
//! outermost output sets are full triangles (extending past the universe) so
//! that a single rule at full strength defuzzifies to its own centre. The
//! centroid of the clipped piecewise-linear membership is integrated exactly.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Seven-term linguistic scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    NB = 0,
    NM = 1,
    NS = 2,
    /// Also written `ZO`.
    ZE = 3,
    PS = 4,
    PM = 5,
    PB = 6,
}

impl Label {
    pub const ALL: [Label; 7] = [
        Label::NB,
        Label::NM,
        Label::NS,
        Label::ZE,
        Label::PS,
        Label::PM,
        Label::PB,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Label> {
        Self::ALL.get(i).copied()
    }

    /// Mirror image about zero.
    pub fn negate(self) -> Label {
        Self::ALL[6 - self.index()]
    }
}

impl FromStr for Label {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "NB" => Label::NB,
            "NM" => Label::NM,
            "NS" => Label::NS,
            "ZE" | "ZO" => Label::ZE,
            "PS" => Label::PS,
            "PM" => Label::PM,
            "PB" => Label::PB,
            other => return Err(Error::RuleTable(format!("unknown label `{other}`"))),
        })
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = ["NB", "NM", "NS", "ZE", "PS", "PM", "PB"][self.index()];
        f.write_str(s)
    }
}

/// Five-term scale of the scaling-factor controller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Size {
    VS = 0,
    S = 1,
    M = 2,
    B = 3,
    VB = 4,
}

impl Size {
    pub const ALL: [Size; 5] = [Size::VS, Size::S, Size::M, Size::B, Size::VB];
    pub fn index(self) -> usize {
        self as usize
    }
}

impl FromStr for Size {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "VS" => Size::VS,
            "S" => Size::S,
            "M" => Size::M,
            "B" => Size::B,
            "VB" => Size::VB,
            other => return Err(Error::RuleTable(format!("unknown size label `{other}`"))),
        })
    }
}

impl fmt::Display for Size {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(["VS", "S", "M", "B", "VB"][self.index()])
    }
}

/// `n` evenly spaced triangles on `[lo, hi]`, adjacent ones crossing at 0.5.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzyPartition {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl FuzzyPartition {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo < hi) || n < 2 {
            return Err(Error::param(
                "partition",
                "need lo < hi and at least two sets",
            ));
        }
        Ok(Self { lo, hi, n })
    }

    /// Symmetric seven-set partition on `[-span, span]`.
    pub fn symmetric(span: f64) -> Self {
        Self {
            lo: -span,
            hi: span,
            n: 7,
        }
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.hi
        } else {
            self.lo + i as f64 * self.step()
        }
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }

    /// The (at most two) nonzero memberships of the clamped input, as
    /// `(set index, degree)` pairs.
    pub fn fire(&self, x: f64) -> [(usize, f64); 2] {
        let x = self.clamp(x);
        let t = (x - self.lo) / self.step();
        let i = (t.floor() as usize).min(self.n - 2);
        let f = (t - i as f64).clamp(0.0, 1.0);
        [(i, 1.0 - f), (i + 1, f)]
    }

    /// Membership degrees of every set.
    pub fn memberships(&self, x: f64) -> Vec<f64> {
        let mut m = vec![0.0; self.n];
        for (i, d) in self.fire(x) {
            m[i] += d;
        }
        m
    }

    /// Centroid of the clipped, max-aggregated output sets. `alpha[j]` is the
    /// firing strength of set `j`.
    pub fn centroid(&self, alpha: &[f64]) -> f64 {
        debug_assert_eq!(alpha.len(), self.n);
        let step = self.step();
        let mut area = 0.0;
        let mut moment = 0.0;
        let mut seg = |x0: f64, y0: f64, x1: f64, y1: f64| {
            let w = x1 - x0;
            area += w * (y0 + y1) / 2.0;
            moment += w * (x0 * (2.0 * y0 + y1) + x1 * (y0 + 2.0 * y1)) / 6.0;
        };
        let mut integrate = |x0: f64, f: &dyn Fn(f64) -> f64, breaks: &mut Vec<f64>| {
            breaks.retain(|p| (0.0..=1.0).contains(p));
            breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
            breaks.dedup();
            for w in breaks.windows(2) {
                seg(x0 + w[0] * step, f(w[0]), x0 + w[1] * step, f(w[1]));
            }
        };
        let first = alpha[0];
        if first > 0.0 {
            integrate(
                self.lo - step,
                &|t| first.min(t),
                &mut vec![0.0, first, 1.0],
            );
        }
        let last = alpha[self.n - 1];
        if last > 0.0 {
            integrate(
                self.hi,
                &|t| last.min(1.0 - t),
                &mut vec![0.0, 1.0 - last, 1.0],
            );
        }
        for j in 0..self.n - 1 {
            let (a, b) = (alpha[j], alpha[j + 1]);
            if a <= 0.0 && b <= 0.0 {
                continue;
            }
            integrate(
                self.center(j),
                &|t| a.min(1.0 - t).max(b.min(t)),
                &mut vec![0.0, 1.0, 1.0 - a, b, a, 1.0 - b, 0.5],
            );
        }
        if area > 0.0 {
            moment / area
        } else {
            0.5 * (self.lo + self.hi)
        }
    }
}

/// Complete two-input rule grid: `cells[row][col]` is the index of the output
/// set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleTable {
    pub rows: usize,
    pub cols: usize,
    cells: Vec<usize>,
}

impl RuleTable {
    pub fn new(rows: usize, cols: usize, cells: Vec<usize>) -> Result<Self> {
        if cells.len() != rows * cols {
            return Err(Error::RuleTable(format!(
                "expected {} cells, got {}",
                rows * cols,
                cells.len()
            )));
        }
        Ok(Self { rows, cols, cells })
    }

    pub fn get(&self, row: usize, col: usize) -> usize {
        self.cells[row * self.cols + col]
    }

    /// Parses a whitespace-separated grid of labels (one row per line).
    pub fn parse_labels(text: &str) -> Result<Self> {
        let rows: Vec<Vec<usize>> = text
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
            .map(|l| {
                l.split_whitespace()
                    .map(|w| w.parse::<Label>().map(Label::index))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Self::from_rows(rows)
    }

    fn from_rows(rows: Vec<Vec<usize>>) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if n == 0 || rows.iter().any(|r| r.len() != m) {
            return Err(Error::RuleTable(
                "grid must be rectangular and non-empty".into(),
            ));
        }
        Self::new(n, m, rows.into_iter().flatten().collect())
    }

    /// Mamdani min–max inference; returns per-output-set firing strengths.
    pub fn fire(
        &self,
        row_in: &FuzzyPartition,
        x_row: f64,
        col_in: &FuzzyPartition,
        x_col: f64,
        n_out: usize,
    ) -> Vec<f64> {
        let mut alpha = vec![0.0f64; n_out];
        for (i, mi) in row_in.fire(x_row) {
            if mi <= 0.0 {
                continue;
            }
            for (j, mj) in col_in.fire(x_col) {
                if mj <= 0.0 {
                    continue;
                }
                let k = self.get(i, j);
                alpha[k] = alpha[k].max(mi.min(mj));
            }
        }
        alpha
    }
}

/// Two-input Mamdani inference with centroid defuzzification.
pub fn infer(
    table: &RuleTable,
    row_in: &FuzzyPartition,
    x_row: f64,
    col_in: &FuzzyPartition,
    x_col: f64,
    out: &FuzzyPartition,
) -> f64 {
    out.centroid(&table.fire(row_in, x_row, col_in, x_col, out.n))
}

/// Δkp/Δki/Δkd rules. Rows: Kec NB..PB; columns: Ke NB..PB.
pub const PID_RULES: &str = "\
PB/NB/PS PB/NB/NS PM/NM/NS PM/NM/NS PS/NS/NM PS/ZE/NM ZE/ZE/PM
PB/NB/PS PB/NB/NS PM/NM/NS PM/NM/NM PS/NS/NM ZE/ZE/NS ZE/ZE/ZE
PM/NB/ZE PM/NM/NS PS/NS/NM PS/NS/NM ZE/ZE/NM NS/PM/NS NS/PS/ZE
PM/NM/ZE PM/NM/NB PS/NS/NS ZE/ZE/NS NS/PS/PS NM/PM/NS NM/PS/ZE
PS/NM/ZE PS/NS/ZE ZE/ZE/ZE NS/PS/ZE NS/ZE/PS NM/PM/ZE NM/PB/PM
PS/ZE/PB ZE/ZE/PS NS/PS/PS NM/PS/PS NM/PM/PS NM/PB/PS NB/PS/PB
ZE/ZE/PB ZE/ZE/PM NS/PS/PM NM/PM/PM NM/PM/PS NB/PB/PS NB/PS/PB
";

/// Basis controller rules. Rows: ZMPe NB..PB; columns: ZMPec NB..PB.
pub const BASIS_RULES: &str = "\
PB PB PB PM PM PS PS
PB PB PM PM PS PS PS
PM PM PS PS PS PS PS
PM PS PS ZO NS NS NM
NS NS NM NM NM NM NB
NS NM NM NB NB NB NB
NS NM NB NB NB NB NB
";

/// Scaling-factor rules: one row per factor (ζ, ξ, γ), columns L1..L5.
pub const SCALING_RULES: &str = "\
VS S M B VB
VS S M B VB
VS S M B VB
";

/// The three Δ-gain grids of the Fuzzy-PID controller.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PidRuleTables {
    pub dkp: RuleTable,
    pub dki: RuleTable,
    pub dkd: RuleTable,
}

impl PidRuleTables {
    /// Parses a grid of `Δkp/Δki/Δkd` triples.
    pub fn parse(text: &str) -> Result<Self> {
        let mut grids: [Vec<Vec<usize>>; 3] = Default::default();
        for line in text
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        {
            let mut rows: [Vec<usize>; 3] = Default::default();
            for cell in line.split_whitespace() {
                let parts: Vec<&str> = cell.split('/').collect();
                if parts.len() != 3 {
                    return Err(Error::RuleTable(format!(
                        "cell `{cell}` is not a Δkp/Δki/Δkd triple"
                    )));
                }
                for (row, part) in rows.iter_mut().zip(parts) {
                    row.push(part.parse::<Label>()?.index());
                }
            }
            for (g, r) in grids.iter_mut().zip(rows) {
                g.push(r);
            }
        }
        let [a, b, c] = grids;
        Ok(Self {
            dkp: RuleTable::from_rows(a)?,
            dki: RuleTable::from_rows(b)?,
            dkd: RuleTable::from_rows(c)?,
        })
    }

    pub fn builtin() -> Self {
        Self::parse(PID_RULES).expect("built-in table is well formed")
    }
}

pub fn basis_rules() -> RuleTable {
    RuleTable::parse_labels(BASIS_RULES).expect("built-in table is well formed")
}

/// Scaling-factor table: `[factor][level] → size index`.
pub fn scaling_rules() -> Result<[[usize; 5]; 3]> {
    parse_scaling(SCALING_RULES)
}

pub fn parse_scaling(text: &str) -> Result<[[usize; 5]; 3]> {
    let mut out = [[0usize; 5]; 3];
    let lines: Vec<&str> = text
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .collect();
    if lines.len() != 3 {
        return Err(Error::RuleTable(format!(
            "scaling table needs 3 rows, got {}",
            lines.len()
        )));
    }
    for (row, line) in out.iter_mut().zip(lines) {
        let cells: Vec<&str> = line.split_whitespace().collect();
        if cells.len() != 5 {
            return Err(Error::RuleTable("scaling rows need 5 entries".into()));
        }
        for (slot, c) in row.iter_mut().zip(cells) {
            *slot = c.parse::<Size>()?.index();
        }
    }
    Ok(out)
}

/// Fuzzy-PID constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzyPidConfig {
    pub kp0: f64,
    pub ki0: f64,
    pub kd0: f64,
    /// Universe half-widths of Ke and Kec.
    pub ke_span: f64,
    pub kec_span: f64,
    /// Universe half-widths of Δkp, Δki, Δkd.
    pub dkp_span: f64,
    pub dki_span: f64,
    pub dkd_span: f64,
    /// Quantization factors mapping the PID error and error rate onto the
    /// fuzzy input universes.
    pub ke_quant: f64,
    pub kec_quant: f64,
    /// Output voltage limit (V).
    pub voltage_limit: f64,
}

impl Default for FuzzyPidConfig {
    fn default() -> Self {
        Self {
            kp0: 15.0,
            ki0: 0.8,
            kd0: 9.0,
            ke_span: 0.1,
            kec_span: 0.05,
            dkp_span: 15.0,
            dki_span: 1.0,
            dkd_span: 15.0,
            ke_quant: 1.0,
            kec_quant: 1.0,
            voltage_limit: 24.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PidMode {
    /// Table-driven gain corrections.
    Fuzzy,
    /// Corrections forced to zero (plain PID with the base gains).
    Fixed,
}

/// Positional PID with fuzzy gain scheduling and clamping anti-windup.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyPidState {
    pub config: FuzzyPidConfig,
    pub mode: PidMode,
    pub integral: f64,
    /// Gains used on the last step `(kp, ki, kd)`.
    pub last_gains: (f64, f64, f64),
    tables: PidRuleTables,
}

impl FuzzyPidState {
    pub fn new(config: FuzzyPidConfig, mode: PidMode) -> Self {
        Self::with_tables(config, mode, PidRuleTables::builtin())
    }

    pub fn with_tables(config: FuzzyPidConfig, mode: PidMode, tables: PidRuleTables) -> Self {
        Self {
            config,
            mode,
            integral: 0.0,
            last_gains: (config.kp0, config.ki0, config.kd0),
            tables,
        }
    }

    pub fn tables(&self) -> &PidRuleTables {
        &self.tables
    }

    /// `(Δkp, Δki, Δkd)` for the given inputs (clamped to their universes).
    pub fn gain_corrections(&self, ke: f64, kec: f64) -> (f64, f64, f64) {
        if self.mode == PidMode::Fixed {
            return (0.0, 0.0, 0.0);
        }
        let c = &self.config;
        let ke_p = FuzzyPartition::symmetric(c.ke_span);
        let kec_p = FuzzyPartition::symmetric(c.kec_span);
        let t = &self.tables;
        let (ke, kec) = (ke * c.ke_quant, kec * c.kec_quant);
        (
            infer(
                &t.dkp,
                &kec_p,
                kec,
                &ke_p,
                ke,
                &FuzzyPartition::symmetric(c.dkp_span),
            ),
            infer(
                &t.dki,
                &kec_p,
                kec,
                &ke_p,
                ke,
                &FuzzyPartition::symmetric(c.dki_span),
            ),
            infer(
                &t.dkd,
                &kec_p,
                kec,
                &ke_p,
                ke,
                &FuzzyPartition::symmetric(c.dkd_span),
            ),
        )
    }

    /// One control period: `u = kp·Ke + ki·∫Ke + kd·Kec`, saturated, with the
    /// integrator frozen whenever integrating would deepen saturation.
    pub fn step(&mut self, ke: f64, kec: f64, dt: f64) -> f64 {
        let (dkp, dki, dkd) = self.gain_corrections(ke, kec);
        let c = self.config;
        let (kp, ki, kd) = (c.kp0 + dkp, c.ki0 + dki, c.kd0 + dkd);
        self.last_gains = (kp, ki, kd);
        let candidate = self.integral + ke * dt;
        let raw = kp * ke + ki * candidate + kd * kec;
        let lim = c.voltage_limit;
        if raw.abs() <= lim {
            self.integral = candidate;
            return raw;
        }
        let held = kp * ke + ki * self.integral + kd * kec;
        // Integrate only when it pulls the output back toward the range.
        if held.abs() > raw.abs() {
            self.integral = candidate;
        }
        raw.clamp(-lim, lim)
    }

    pub fn reset(&mut self) {
        self.integral = 0.0;
        self.last_gains = (self.config.kp0, self.config.ki0, self.config.kd0);
    }
}

/// Lower and upper bound of every scaling factor.
pub const SCALE_RANGE: (f64, f64) = (0.5, 1.5);

/// Variable-universe fuzzy controller state for one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct VufcState {
    /// Base ZMP error span (m).
    pub e0: f64,
    /// Base ZMP error-change span (m per grading interval).
    pub ec0: f64,
    /// Base output span (m), the slider travel.
    pub y0: f64,
    pub zeta: f64,
    pub xi: f64,
    pub gamma: f64,
    basis: RuleTable,
    scaling: [[usize; 5]; 3],
}

impl VufcState {
    pub fn new(e0: f64, ec0: f64, y0: f64) -> Result<Self> {
        Self::with_tables(e0, ec0, y0, basis_rules(), scaling_rules()?)
    }

    pub fn with_tables(
        e0: f64,
        ec0: f64,
        y0: f64,
        basis: RuleTable,
        scaling: [[usize; 5]; 3],
    ) -> Result<Self> {
        if !(e0 > 0.0 && ec0 > 0.0 && y0 > 0.0) {
            return Err(Error::param("vufc", "base spans must be positive"));
        }
        if basis.rows != 7 || basis.cols != 7 {
            return Err(Error::RuleTable("basis table must be 7×7".into()));
        }
        Ok(Self {
            e0,
            ec0,
            y0,
            zeta: 1.0,
            xi: 1.0,
            gamma: 1.0,
            basis,
            scaling,
        })
    }

    pub fn basis(&self) -> &RuleTable {
        &self.basis
    }

    pub fn scaling(&self) -> &[[usize; 5]; 3] {
        &self.scaling
    }

    /// Maps a stability level (1..=5) to `(ζ, ξ, γ)` and stores them.
    pub fn scale_universes(&mut self, level: u8) -> (f64, f64, f64) {
        let f = scale_factors(level, &self.scaling);
        (self.zeta, self.xi, self.gamma) = f;
        f
    }

    /// Desired slider displacement for the current factors.
    pub fn output(&self, e: f64, ec: f64) -> f64 {
        let unit = FuzzyPartition::symmetric(1.0);
        let en = e / (self.zeta * self.e0);
        let ecn = ec / (self.xi * self.ec0);
        self.gamma * self.y0 * infer(&self.basis, &unit, en, &unit, ecn, &unit)
    }

    /// Rescales the universes for `level`, then evaluates the basis rules.
    pub fn step(&mut self, e: f64, ec: f64, level: u8) -> f64 {
        self.scale_universes(level);
        self.output(e, ec)
    }
}

/// One-input inference from the level (placed on `[0, 1]` as `(L − 1)/4`)
/// to the three scaling factors on `[0.5, 1.5]`.
pub fn scale_factors(level: u8, rules: &[[usize; 5]; 3]) -> (f64, f64, f64) {
    let level = level.clamp(1, 5);
    let input = FuzzyPartition {
        lo: 0.0,
        hi: 1.0,
        n: 5,
    };
    let out = FuzzyPartition {
        lo: SCALE_RANGE.0,
        hi: SCALE_RANGE.1,
        n: 5,
    };
    let x = (level - 1) as f64 / 4.0;
    let fired = input.fire(x);
    let mut res = [0.0; 3];
    for (r, row) in res.iter_mut().zip(rules) {
        let mut alpha = [0.0; 5];
        for (i, m) in fired {
            alpha[row[i]] = f64::max(alpha[row[i]], m);
        }
        *r = out.centroid(&alpha);
    }
    (res[0], res[1], res[2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Numeric centroid on a fine grid over the extended domain.
    fn centroid_numeric(p: &FuzzyPartition, alpha: &[f64]) -> f64 {
        let step = p.step();
        let (a, b) = (p.lo - step, p.hi + step);
        let n = 200_000;
        let (mut num, mut den) = (0.0, 0.0);
        for k in 0..=n {
            let x = a + (b - a) * k as f64 / n as f64;
            let mut mu: f64 = 0.0;
            for (j, &al) in alpha.iter().enumerate() {
                let tri = (1.0 - (x - p.center(j)).abs() / step).max(0.0);
                mu = mu.max(al.min(tri));
            }
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            num += w * mu * x;
            den += w * mu;
        }
        num / den
    }

    #[test]
    fn exact_centroid_matches_quadrature() {
        let p = FuzzyPartition::symmetric(15.0);
        let cases: [[f64; 7]; 4] = [
            [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.3, 0.7, 0.0, 0.0, 0.0, 0.2, 0.0],
            [0.0, 0.0, 0.5, 0.5, 0.0, 0.0, 0.9],
            [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7],
        ];
        for alpha in cases {
            let exact = p.centroid(&alpha);
            let numeric = centroid_numeric(&p, &alpha);
            assert!(
                (exact - numeric).abs() < 1e-4,
                "{alpha:?}: {exact} vs {numeric}"
            );
        }
    }

    #[test]
    fn single_rule_gives_its_centre() {
        let p = FuzzyPartition::symmetric(15.0);
        for j in 0..7 {
            let mut alpha = [0.0; 7];
            alpha[j] = 1.0;
            assert!((p.centroid(&alpha) - p.center(j)).abs() < 1e-12);
        }
    }

    #[test]
    fn label_parsing_and_alias() {
        assert_eq!("ZO".parse::<Label>().unwrap(), Label::ZE);
        assert_eq!("ZE".parse::<Label>().unwrap(), Label::ZE);
        assert!("XX".parse::<Label>().is_err());
        assert_eq!(Label::NM.negate(), Label::PM);
        assert_eq!(Label::ZE.to_string(), "ZE");
    }

    #[test]
    fn zero_inputs_give_zero_basis_output() {
        let unit = FuzzyPartition::symmetric(1.0);
        assert!(infer(&basis_rules(), &unit, 0.0, &unit, 0.0, &unit).abs() < 1e-15);
    }

    #[test]
    fn corner_pid_cell() {
        let s = FuzzyPidState::new(FuzzyPidConfig::default(), PidMode::Fuzzy);
        let (dkp, dki, dkd) = s.gain_corrections(-0.1, -0.05);
        assert!((dkp - 15.0).abs() < 1e-12);
        assert!((dki + 1.0).abs() < 1e-12);
        assert!((dkd - 5.0).abs() < 1e-12);
    }

    #[test]
    fn fixed_mode_is_plain_pid() {
        let cfg = FuzzyPidConfig::default();
        let mut f = FuzzyPidState::new(cfg, PidMode::Fixed);
        let mut integral = 0.0;
        for k in 0..200 {
            let ke = 0.05 * (k as f64 * 0.1).sin();
            let kec = 0.02 * (k as f64 * 0.1).cos();
            integral += ke * 0.001;
            let u = f.step(ke, kec, 0.001);
            assert_eq!(u, 15.0 * ke + 0.8 * integral + 9.0 * kec);
        }
    }

    #[test]
    fn pid_zero_and_sign() {
        let mut f = FuzzyPidState::new(FuzzyPidConfig::default(), PidMode::Fuzzy);
        assert_eq!(f.step(0.0, 0.0, 0.001), 0.0);
        let mut f = FuzzyPidState::new(FuzzyPidConfig::default(), PidMode::Fuzzy);
        assert!(f.step(0.05, 0.0, 0.001) > 0.0);
        let mut f = FuzzyPidState::new(FuzzyPidConfig::default(), PidMode::Fuzzy);
        assert!(f.step(-0.05, 0.0, 0.001) < 0.0);
    }

    #[test]
    fn anti_windup_holds_integral() {
        let mut f = FuzzyPidState::new(FuzzyPidConfig::default(), PidMode::Fixed);
        for _ in 0..1000 {
            assert_eq!(f.step(10.0, 0.0, 0.01), 24.0);
        }
        assert_eq!(f.integral, 0.0);
    }

    #[test]
    fn scaling_levels() {
        let rules = scaling_rules().unwrap();
        let expect = [0.5, 0.75, 1.0, 1.25, 1.5];
        for (level, e) in (1..=5).zip(expect) {
            let (z, x, g) = scale_factors(level, &rules);
            for f in [z, x, g] {
                assert!((f - e).abs() < 1e-12, "level {level}: {f}");
            }
        }
    }

    #[test]
    fn vufc_corner_and_origin() {
        let mut v = VufcState::new(0.12, 0.06, 0.35).unwrap();
        for level in 1..=5 {
            assert!(v.step(0.0, 0.0, level).abs() < 1e-15);
        }
        // NB/NB → PB at the top of the scaled output universe.
        for level in 1..=5 {
            let y = v.step(-10.0, -10.0, level);
            assert!((y - v.gamma * 0.35).abs() < 1e-12);
        }
    }

    #[test]
    fn output_scale_grows_with_level() {
        // Inputs scaled with the universes land in the same normalized cells,
        // so the output grows with γ.
        let mut v = VufcState::new(0.12, 0.06, 0.35).unwrap();
        for &(en, ecn) in &[(0.3, -0.2), (-0.7, 0.1), (0.05, 0.9)] {
            let mut prev = 0.0;
            for level in 1..=5u8 {
                let (z, x, _) = scale_factors(level, v.scaling());
                let y = v.step(en * z * 0.12, ecn * x * 0.06, level).abs();
                assert!(y >= prev - 1e-12);
                prev = y;
            }
        }
    }

    #[test]
    fn parse_rejects_bad_grids() {
        assert!(RuleTable::parse_labels("NB PB\nNB").is_err());
        assert!(PidRuleTables::parse("PB/NB").is_err());
        assert!(parse_scaling("VS S M B VB").is_err());
    }

    /// Hand-built odd-symmetric table: cell (i, j) = clamp(3 − (i − 3) − (j − 3)).
    fn odd_table() -> RuleTable {
        let mut cells = Vec::new();
        for i in 0..7i64 {
            for j in 0..7i64 {
                cells.push((3 - (i - 3) - (j - 3)).clamp(0, 6) as usize);
            }
        }
        RuleTable::new(7, 7, cells).unwrap()
    }

    proptest! {
        #[test]
        fn partition_of_unity(x in -0.1f64..0.1) {
            let p = FuzzyPartition::symmetric(0.1);
            let s: f64 = p.memberships(x).iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
        }

        #[test]
        fn odd_table_gives_odd_output(x in -1.2f64..1.2, y in -1.2f64..1.2) {
            let unit = FuzzyPartition::symmetric(1.0);
            let t = odd_table();
            let a = infer(&t, &unit, x, &unit, y, &unit);
            let b = infer(&t, &unit, -x, &unit, -y, &unit);
            prop_assert!((a + b).abs() < 1e-12);
        }

        #[test]
        fn inference_is_bounded_and_continuous(x in -1.0f64..1.0, y in -1.0f64..1.0) {
            let unit = FuzzyPartition::symmetric(1.0);
            let t = basis_rules();
            let a = infer(&t, &unit, x, &unit, y, &unit);
            let b = infer(&t, &unit, x + 1e-7, &unit, y - 1e-7, &unit);
            prop_assert!(a.is_finite() && a.abs() <= 1.0 + 1e-12);
            prop_assert!((a - b).abs() < 1e-4);
        }

        #[test]
        fn scaling_monotone(l in 1u8..5) {
            let rules = scaling_rules().unwrap();
            let a = scale_factors(l, &rules);
            let b = scale_factors(l + 1, &rules);
            prop_assert!(b.0 >= a.0 && b.1 >= a.1 && b.2 >= a.2);
        }

        #[test]
        fn pid_output_within_limits(ke in -5.0f64..5.0, kec in -5.0f64..5.0) {
            let mut f = FuzzyPidState::new(FuzzyPidConfig::default(), PidMode::Fuzzy);
            for _ in 0..10 {
                let u = f.step(ke, kec, 0.01);
                prop_assert!(u.abs() <= 24.0);
            }
        }
    }
}
