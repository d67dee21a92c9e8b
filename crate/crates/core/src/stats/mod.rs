//! Displacement contingency tables and 2x2 independence tests.
//!
//! For a set of edge pixels, every ordered pair of distinct pixels is
//! classified by whether `|dx|` and `|dy|` stay within a displacement limit
//! `k`. The resulting 2x2 table is tested for independence: Fisher's exact
//! test when any cell is sparse, Pearson's chi-square otherwise. Rejecting
//! independence means the coordinates vary regularly, as along a curve.

pub mod special;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Pixel;
use special::{chi_square_sf, ln_choose};

/// Cells of the displacement table.
///
/// |              | `dy <= k` | `dy > k` |
/// |--------------|-----------|----------|
/// | `dx <= k`    | `a`       | `b`      |
/// | `dx > k`     | `c`       | `d`      |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl ContingencyTable {
    pub const fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        Self { a, b, c, d }
    }

    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }

    pub fn row_sums(&self) -> (u64, u64) {
        (self.a + self.b, self.c + self.d)
    }

    pub fn col_sums(&self) -> (u64, u64) {
        (self.a + self.c, self.b + self.d)
    }

    pub fn cells(&self) -> [u64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn min_cell(&self) -> u64 {
        self.a.min(self.b).min(self.c).min(self.d)
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.a, self.c, self.b, self.d)
    }

    pub fn swap_rows(&self) -> Self {
        Self::new(self.c, self.d, self.a, self.b)
    }

    pub fn swap_cols(&self) -> Self {
        Self::new(self.b, self.a, self.d, self.c)
    }

    fn has_zero_margin(&self) -> bool {
        let (r1, r2) = self.row_sums();
        let (c1, c2) = self.col_sums();
        r1 == 0 || r2 == 0 || c1 == 0 || c2 == 0
    }
}

/// Classifies every ordered pair of distinct points by their displacement.
pub fn build_table(points: &[Pixel], k: usize) -> Result<ContingencyTable> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints(points.len()));
    }
    let mut t = ContingencyTable::default();
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            let (dx, dy) = p.displacement(*q);
            let (near_x, near_y) = (dx <= k, dy <= k);
            // each unordered pair contributes both orientations
            match (near_x, near_y) {
                (true, true) => t.a += 2,
                (true, false) => t.b += 2,
                (false, true) => t.c += 2,
                (false, false) => t.d += 2,
            }
        }
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestMethod {
    ChiSquare,
    Fisher,
}

impl std::fmt::Display for TestMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TestMethod::ChiSquare => "chi-square",
            TestMethod::Fisher => "fisher",
        })
    }
}

/// How the Fisher branch turns table probabilities into a p-value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum FisherMode {
    /// Probability of the observed table alone.
    #[default]
    Point,
    /// Sum over all tables with the observed margins whose probability does
    /// not exceed the observed one.
    TwoSided,
}

impl std::str::FromStr for FisherMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "point" => Ok(Self::Point),
            "two-sided" => Ok(Self::TwoSided),
            other => Err(Error::invalid("fisher-mode", format!("expected point or two-sided, got `{other}`"))),
        }
    }
}

impl std::fmt::Display for FisherMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FisherMode::Point => "point",
            FisherMode::TwoSided => "two-sided",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub p: f64,
    /// Chi-square statistic, or the point probability for Fisher.
    pub statistic: f64,
    pub method: TestMethod,
    /// `p < alpha`: the coordinates are not independent.
    pub dependent: bool,
}

/// Pearson statistic over the four cells, expected counts from the margins.
pub fn chi_square_statistic(t: &ContingencyTable) -> Result<f64> {
    if t.has_zero_margin() {
        return Err(Error::DegenerateTable(t.cells()));
    }
    let n = t.total() as f64;
    let (r1, r2) = t.row_sums();
    let (c1, c2) = t.col_sums();
    let cells = [
        (t.a, r1, c1),
        (t.b, r1, c2),
        (t.c, r2, c1),
        (t.d, r2, c2),
    ];
    Ok(cells
        .iter()
        .map(|&(o, r, c)| {
            let e = r as f64 * c as f64 / n;
            let diff = o as f64 - e;
            diff * diff / e
        })
        .sum())
}

/// Pearson chi-square test with one degree of freedom, no continuity
/// correction.
pub fn chi_square_test(t: &ContingencyTable, alpha: f64) -> Result<TestResult> {
    let statistic = chi_square_statistic(t)?;
    let p = chi_square_sf(statistic, 1.0);
    Ok(TestResult {
        p,
        statistic,
        method: TestMethod::ChiSquare,
        dependent: p < alpha,
    })
}

/// Hypergeometric probability of the table given its margins,
/// `C(a+b, a) C(c+d, c) / C(n, a+c)`, evaluated in log space.
pub fn fisher_point_probability(t: &ContingencyTable) -> f64 {
    let (r1, r2) = t.row_sums();
    let (c1, _) = t.col_sums();
    let ln_p = ln_choose(r1, t.a) + ln_choose(r2, t.c) - ln_choose(t.total(), c1);
    ln_p.exp().min(1.0)
}

fn fisher_two_sided(t: &ContingencyTable, observed: f64) -> f64 {
    let (r1, r2) = t.row_sums();
    let (c1, _) = t.col_sums();
    let n = t.total();
    let lo = c1.saturating_sub(r2);
    let hi = r1.min(c1);
    // relative slack so tables tied with the observed one are included
    let cutoff = observed * (1.0 + 1e-7);
    let sum: f64 = (lo..=hi)
        .map(|a| {
            let cand = ContingencyTable::new(a, r1 - a, c1 - a, r2 - (c1 - a));
            debug_assert_eq!(cand.total(), n);
            fisher_point_probability(&cand)
        })
        .filter(|&p| p <= cutoff)
        .sum();
    sum.min(1.0)
}

pub fn fisher_test(t: &ContingencyTable, mode: FisherMode, alpha: f64) -> Result<TestResult> {
    if t.total() == 0 {
        return Err(Error::DegenerateTable(t.cells()));
    }
    let point = fisher_point_probability(t);
    let p = match mode {
        FisherMode::Point => point,
        FisherMode::TwoSided => fisher_two_sided(t, point),
    };
    Ok(TestResult {
        p,
        statistic: point,
        method: TestMethod::Fisher,
        dependent: p < alpha,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub alpha: f64,
    pub fisher_mode: FisherMode,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            fisher_mode: FisherMode::Point,
        }
    }
}

/// Fisher when any cell is below 5, chi-square otherwise (cells equal to 5
/// take the chi-square branch).
pub fn independence_test(t: &ContingencyTable, cfg: &TestConfig) -> Result<TestResult> {
    if t.min_cell() < 5 {
        fisher_test(t, cfg.fisher_mode, cfg.alpha)
    } else {
        chi_square_test(t, cfg.alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn px(v: &[(usize, usize)]) -> Vec<Pixel> {
        v.iter().map(|&(x, y)| Pixel::new(x, y)).collect()
    }

    #[test]
    fn worked_displacement_example() {
        let t = build_table(&px(&[(2, 3), (1, 1)]), 1).unwrap();
        // |dx| = 1 <= 1, |dy| = 2 > 1 in both orientations
        assert_eq!(t, ContingencyTable::new(0, 2, 0, 0));
    }

    #[test]
    fn vertical_pair() {
        let t = build_table(&px(&[(4, 0), (4, 10)]), 3).unwrap();
        assert_eq!(t, ContingencyTable::new(0, 2, 0, 0));
        assert_eq!(t.total(), 2);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(build_table(&px(&[(0, 0)]), 3), Err(Error::TooFewPoints(1))));
    }

    #[test]
    fn perfect_independence() {
        let r = chi_square_test(&ContingencyTable::new(10, 10, 10, 10), 0.05).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p, 1.0);
        assert!(!r.dependent);
    }

    #[test]
    fn chi_square_worked_example() {
        let r = chi_square_test(&ContingencyTable::new(21, 24, 21, 15), 0.05).unwrap();
        assert!((r.statistic - 1.090_384_615_384_615).abs() < 1e-12);
        assert!((r.p - 0.296_386_006_255_330_7).abs() < 1e-9);
        assert!(!r.dependent);
        let doubled = chi_square_test(&ContingencyTable::new(42, 48, 42, 30), 0.05).unwrap();
        assert!((doubled.statistic - 2.0 * r.statistic).abs() < 1e-12);
        assert!(doubled.p < r.p);
    }

    #[test]
    fn chi_square_rejects_zero_margin() {
        assert!(matches!(
            chi_square_test(&ContingencyTable::new(10, 0, 7, 0), 0.05),
            Err(Error::DegenerateTable(_))
        ));
    }

    #[test]
    fn fisher_small_tables() {
        assert!((fisher_point_probability(&ContingencyTable::new(1, 0, 0, 1)) - 0.5).abs() < 1e-14);
        assert!((fisher_point_probability(&ContingencyTable::new(0, 5, 5, 0)) - 1.0 / 252.0).abs() < 1e-14);
    }

    #[test]
    fn fisher_worked_example() {
        let t = ContingencyTable::new(83, 0, 89, 10);
        let point = fisher_test(&t, FisherMode::Point, 0.05).unwrap();
        assert!((point.p - 0.001_823_457_051_242_677_8).abs() < 1e-12);
        assert!(point.dependent);
        let two = fisher_test(&t, FisherMode::TwoSided, 0.05).unwrap();
        assert!((two.p - 0.002_108_146_328_364_621).abs() < 1e-12);
    }

    #[test]
    fn fisher_degenerate_margin_is_certain() {
        // one coordinate never leaves the limit: a single table is possible
        let r = fisher_test(&ContingencyTable::new(30, 0, 12, 0), FisherMode::Point, 0.05).unwrap();
        assert_eq!(r.p, 1.0);
        assert!(!r.dependent);
    }

    #[test]
    fn dispatch() {
        let cfg = TestConfig::default();
        assert_eq!(independence_test(&ContingencyTable::new(83, 0, 89, 10), &cfg).unwrap().method, TestMethod::Fisher);
        assert_eq!(independence_test(&ContingencyTable::new(21, 24, 21, 15), &cfg).unwrap().method, TestMethod::ChiSquare);
        let five = independence_test(&ContingencyTable::new(5, 5, 5, 5), &cfg).unwrap();
        assert_eq!(five.method, TestMethod::ChiSquare);
        assert_eq!(five.p, 1.0);
        assert_eq!(independence_test(&ContingencyTable::new(4, 9, 9, 9), &cfg).unwrap().method, TestMethod::Fisher);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("two-sided".parse::<FisherMode>().unwrap(), FisherMode::TwoSided);
        assert!("left".parse::<FisherMode>().is_err());
    }

    fn arb_points() -> impl Strategy<Value = Vec<Pixel>> {
        proptest::collection::btree_set((0usize..20, 0usize..20), 2..30)
            .prop_map(|s| s.into_iter().map(|(x, y)| Pixel::new(x, y)).collect())
    }

    fn arb_table() -> impl Strategy<Value = ContingencyTable> {
        (0u64..60, 0u64..60, 0u64..60, 0u64..60).prop_map(|(a, b, c, d)| ContingencyTable::new(a, b, c, d))
    }

    proptest! {
        #[test]
        fn table_total_is_ordered_pair_count(pts in arb_points(), k in 0usize..6) {
            let m = pts.len() as u64;
            prop_assert_eq!(build_table(&pts, k).unwrap().total(), m * (m - 1));
        }

        #[test]
        fn table_translation_and_transpose(pts in arb_points(), k in 0usize..6, sx in 0usize..50, sy in 0usize..50) {
            let t = build_table(&pts, k).unwrap();
            let moved: Vec<Pixel> = pts.iter().map(|p| Pixel::new(p.x + sx, p.y + sy)).collect();
            prop_assert_eq!(build_table(&moved, k).unwrap(), t);
            let swapped: Vec<Pixel> = pts.iter().map(|p| Pixel::new(p.y, p.x)).collect();
            prop_assert_eq!(build_table(&swapped, k).unwrap(), t.transpose());
        }

        #[test]
        fn fisher_row_and_column_symmetry(t in arb_table()) {
            prop_assume!(t.total() > 0);
            let p = fisher_point_probability(&t);
            prop_assert!((p - fisher_point_probability(&t.swap_rows())).abs() < 1e-12);
            prop_assert!((p - fisher_point_probability(&t.swap_cols())).abs() < 1e-12);
        }

        #[test]
        fn chi_square_transpose_invariant(t in arb_table()) {
            prop_assume!(!t.has_zero_margin());
            let a = chi_square_test(&t, 0.05).unwrap();
            let b = chi_square_test(&t.transpose(), 0.05).unwrap();
            prop_assert!((a.p - b.p).abs() < 1e-12);
        }

        #[test]
        fn p_values_are_probabilities(t in arb_table(), two in any::<bool>()) {
            prop_assume!(t.total() > 0);
            let cfg = TestConfig { alpha: 0.05, fisher_mode: if two { FisherMode::TwoSided } else { FisherMode::Point } };
            if let Ok(r) = independence_test(&t, &cfg) {
                prop_assert!((0.0..=1.0).contains(&r.p));
                prop_assert_eq!(r.dependent, r.p < 0.05);
            }
        }
    }
}
