//! Delay exponents: numerical extraction from erasure curves, the analytical
//! exponent and threshold, and a numerical audit of the inductive decay
//! bound at a density evolution fixed point.

use std::fmt;

use rayon::prelude::*;

use crate::code_model::{BilayerConfig, DerivedExponents};
use crate::de_engine::{aposteriori_all, DeState, ErasureCurve};
use crate::error::{Error, Result};

/// Analytical delay exponent `λ₁d_{v₁} + λ₂d_{v₂}`.
pub fn theoretical_exponent(cfg: &BilayerConfig) -> f64 {
    cfg.derived_exponents().alpha
}

/// Log-linear fit `pe[d] ≈ β̂·e^{-α̂d}` over a delay window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentFit {
    pub alpha_hat: f64,
    pub beta_hat: f64,
    /// Inclusive delay range the fit used.
    pub window: (usize, usize),
    /// Points inside the window that entered the regression.
    pub points: usize,
    /// Max absolute deviation between `ln pe[d]` and the fitted line.
    pub residual: f64,
}

const TRANSIENT_CUTOFF: f64 = 0.1;
const MIN_AUTO_POINTS: usize = 10;

/// Least-squares line through `(d, ln pe[d])`.
///
/// Without explicit bounds the window covers the delays whose value lies in
/// `[10·pe_floor, 0.1]`; when that leaves fewer than ten points the window is
/// widened backwards into the transient. Points at or below the floor are
/// never used.
pub fn fit_exponent(
    curve: &ErasureCurve,
    d_lo: Option<usize>,
    d_hi: Option<usize>,
) -> Result<ExponentFit> {
    let pe = curve.pe();
    let floor = curve.pe_floor();
    let usable = |d: usize| pe[d] > floor && pe[d] > 0.0;
    if pe.is_empty() {
        return Err(Error::WindowTooSmall { usable: 0 });
    }
    let last = pe.len() - 1;

    let (lo, hi) = match (d_lo, d_hi) {
        (Some(lo), Some(hi)) => (lo, hi.min(last)),
        _ => {
            let in_band = |d: usize| pe[d] <= TRANSIENT_CUTOFF && pe[d] >= 10.0 * floor;
            let auto_lo = (0..=last).find(|&d| in_band(d));
            let auto_hi = (0..=last).rev().find(|&d| in_band(d));
            let (mut lo, hi) = match (auto_lo, auto_hi) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    // Nothing in the band: fall back to all usable points.
                    let b = (0..=last).rev().find(|&d| usable(d)).unwrap_or(0);
                    (0, b)
                }
            };
            let mut hi = hi;
            if let Some(h) = d_hi {
                hi = hi.min(h);
            }
            if let Some(l) = d_lo {
                lo = l;
            } else {
                while lo > 0 && (lo..=hi).filter(|&d| usable(d)).count() < MIN_AUTO_POINTS {
                    lo -= 1;
                }
            }
            (lo, hi)
        }
    };
    if lo > hi || lo > last {
        return Err(Error::WindowTooSmall { usable: 0 });
    }

    let points: Vec<(f64, f64)> = (lo..=hi)
        .filter(|&d| usable(d))
        .map(|d| (d as f64, pe[d].ln()))
        .collect();
    if points.len() < 3 {
        return Err(Error::WindowTooSmall {
            usable: points.len(),
        });
    }

    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (sxy, sxx) = points.iter().fold((0.0, 0.0), |(sxy, sxx), (x, y)| {
        let dx = x - mean_x;
        (sxy + dx * (y - mean_y), sxx + dx * dx)
    });
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let residual = points
        .iter()
        .map(|(x, y)| (y - (intercept + slope * x)).abs())
        .fold(0.0, f64::max);

    Ok(ExponentFit {
        alpha_hat: -slope,
        beta_hat: intercept.exp(),
        window: (lo, hi),
        points: points.len(),
        residual,
    })
}

/// One layer's share of the induction constant: the `K′` expression with
/// `(λ, α, d_c)` of that layer.
fn induction_constant(d: usize, beta: f64, lambda: f64, alpha: f64, dc: usize) -> Result<f64> {
    let norm = -(-lambda).exp_m1();
    let den_sum = -(-lambda - alpha).exp_m1(); // 1 - e^{-λ-α}
    let den_diff = -(alpha - lambda).exp_m1(); // 1 - e^{-λ+α}
    let den_double = -(-2.0 * lambda).exp_m1(); // 1 - e^{-2λ}
    const EPS: f64 = 1e-14;
    if den_sum.abs() < EPS {
        return Err(Error::DegenerateDenominator {
            which: "1 - e^{-lambda-alpha}",
        });
    }
    if den_diff.abs() < EPS {
        return Err(Error::DegenerateDenominator {
            which: "1 - e^{-lambda+alpha}",
        });
    }
    if den_double.abs() < EPS {
        return Err(Error::DegenerateDenominator {
            which: "1 - e^{-2 lambda}",
        });
    }
    let d1 = d as f64 + 1.0;
    let d2 = d as f64 + 2.0;
    let a = norm / den_sum;
    let growth = -((alpha - lambda) * d2).exp_m1() / den_diff;
    let settle = -(-2.0 * lambda * d2).exp_m1() / den_double;
    let bracket = a * growth + (alpha.exp() - a) * settle;
    Ok(((lambda - alpha) * d1).exp() * (dc as f64 - 1.0) * beta * norm * bracket)
}

/// Layer-1 induction constant `K′(d, β)`.
pub fn k_prime(d: usize, beta: f64, cfg: &BilayerConfig) -> Result<f64> {
    if beta.is_nan() || beta <= 0.0 {
        return Err(Error::invalid("beta", "must be positive"));
    }
    let e = cfg.derived_exponents();
    induction_constant(d, beta, cfg.layer1.lambda(), e.alpha1, cfg.layer1.dc())
}

/// Layer-2 induction constant `K″(d, β)`.
pub fn k_double_prime(d: usize, beta: f64, cfg: &BilayerConfig) -> Result<f64> {
    if beta.is_nan() || beta <= 0.0 {
        return Err(Error::invalid("beta", "must be positive"));
    }
    let e = cfg.derived_exponents();
    induction_constant(d, beta, cfg.layer2.lambda(), e.alpha2, cfg.layer2.dc())
}

/// Exponents `(q₁, q₂)` applied to the two layer factors of the threshold
/// objective.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExponentPair {
    pub q1: usize,
    pub q2: usize,
}

impl fmt::Display for ExponentPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.q1, self.q2)
    }
}

/// Grid for the `max_β min_d` threshold search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchSettings {
    pub beta_min: f64,
    pub beta_max: f64,
    /// Number of log-spaced β values, endpoints included.
    pub beta_points: usize,
    /// `d` ranges over `0..=d_max`.
    pub d_max: usize,
    /// Also evaluate `(d_{v₁}-1, d_{v₂})` and `(d_{v₁}, d_{v₂}-1)`.
    pub strict: bool,
}

impl Default for SearchSettings {
    fn default() -> Self {
        SearchSettings {
            beta_min: 1e-3,
            beta_max: 1e3,
            beta_points: 60,
            d_max: 200,
            strict: false,
        }
    }
}

impl SearchSettings {
    pub fn betas(&self) -> Vec<f64> {
        if self.beta_points == 1 {
            return vec![self.beta_min];
        }
        let (a, b) = (self.beta_min.log10(), self.beta_max.log10());
        let step = (b - a) / (self.beta_points - 1) as f64;
        (0..self.beta_points)
            .map(|k| 10f64.powf(a + step * k as f64))
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.beta_points == 0 {
            return Err(Error::invalid("beta_points", "must be at least 1"));
        }
        if !(self.beta_min > 0.0 && self.beta_max >= self.beta_min) {
            return Err(Error::invalid(
                "beta range",
                "need 0 < beta_min <= beta_max",
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdResult {
    /// The max-min objective, clipped to `[0, 1]`.
    pub eps_bar: f64,
    /// Unclipped objective value.
    pub objective: f64,
    pub beta_star: f64,
    pub d_star: usize,
    pub variant: ExponentPair,
    /// The maximizing β is an endpoint of a multi-point grid.
    pub beta_at_boundary: bool,
    /// The minimizing `d` is `d_max`.
    pub d_at_boundary: bool,
}

impl ThresholdResult {
    pub fn at_boundary(&self) -> bool {
        self.beta_at_boundary || self.d_at_boundary
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdReport {
    /// `(q₁, q₂) = (d_{v₁}, d_{v₂})`, as in the closed-form statement.
    pub nominal: ThresholdResult,
    /// Every evaluated pair; only the nominal pair unless strict.
    pub variants: Vec<ThresholdResult>,
    /// Smallest threshold over all pairs, when strict.
    pub strict: Option<ThresholdResult>,
}

/// `β·(e^{-λ₁}+K′)^{-q₁}·(e^{-λ₂}+K″)^{-q₂}`.
fn threshold_objective(
    cfg: &BilayerConfig,
    pair: ExponentPair,
    beta: f64,
    d: usize,
) -> Result<f64> {
    let mut value =
        beta * ((-cfg.layer1.lambda()).exp() + k_prime(d, beta, cfg)?).powi(-(pair.q1 as i32));
    if pair.q2 > 0 {
        value *=
            ((-cfg.layer2.lambda()).exp() + k_double_prime(d, beta, cfg)?).powi(-(pair.q2 as i32));
    }
    Ok(value)
}

fn threshold_for(
    cfg: &BilayerConfig,
    pair: ExponentPair,
    search: &SearchSettings,
) -> Result<ThresholdResult> {
    let betas = search.betas();
    let inner: Vec<(f64, usize)> = betas
        .par_iter()
        .map(|&beta| {
            let mut best = (f64::INFINITY, 0);
            for d in 0..=search.d_max {
                let v = threshold_objective(cfg, pair, beta, d)?;
                if v < best.0 {
                    best = (v, d);
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    let mut star = 0;
    for (k, v) in inner.iter().enumerate() {
        if v.0 > inner[star].0 {
            star = k;
        }
    }
    let (objective, d_star) = inner[star];
    Ok(ThresholdResult {
        eps_bar: objective.clamp(0.0, 1.0),
        objective,
        beta_star: betas[star],
        d_star,
        variant: pair,
        beta_at_boundary: betas.len() > 1 && (star == 0 || star == betas.len() - 1),
        d_at_boundary: d_star == search.d_max,
    })
}

/// Grid evaluation of `max_{β>0} min_{d≥0}` of the threshold objective.
pub fn threshold(cfg: &BilayerConfig, search: &SearchSettings) -> Result<ThresholdReport> {
    search.validate()?;
    let dv1 = cfg.layer1.dv();
    let dv2 = cfg.layer2.dv();
    let nominal = threshold_for(cfg, ExponentPair { q1: dv1, q2: dv2 }, search)?;
    if !search.strict {
        return Ok(ThresholdReport {
            nominal,
            variants: vec![nominal],
            strict: None,
        });
    }
    let mut variants = vec![nominal];
    variants.push(threshold_for(
        cfg,
        ExponentPair {
            q1: dv1 - 1,
            q2: dv2,
        },
        search,
    )?);
    if dv2 > 0 {
        variants.push(threshold_for(
            cfg,
            ExponentPair {
                q1: dv1,
                q2: dv2 - 1,
            },
            search,
        )?);
    }
    let strict = variants
        .iter()
        .copied()
        .reduce(|a, b| if b.objective < a.objective { b } else { a });
    Ok(ThresholdReport {
        nominal,
        variants,
        strict,
    })
}

/// Outcome of checking `pe[d] ≤ β·e^{-αd}` along a curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundReport {
    pub pass: bool,
    /// Smallest `ln(β·e^{-αd}) - ln pe[d]`; `+∞` when every value is zero.
    pub worst_margin: f64,
    pub worst_delay: Option<usize>,
}

/// Log-domain slack under which a bound still counts as met.
pub const BOUND_SLACK: f64 = 1e-12;

pub fn verify_anytime_bound(curve: &ErasureCurve, alpha: f64, beta: f64) -> BoundReport {
    let mut worst = f64::INFINITY;
    let mut worst_delay = None;
    for (d, pe) in curve.iter() {
        if pe <= 0.0 {
            continue;
        }
        let margin = beta.ln() - alpha * d as f64 - pe.ln();
        if margin < worst {
            worst = margin;
            worst_delay = Some(d);
        }
    }
    BoundReport {
        pass: worst >= -BOUND_SLACK,
        worst_margin: worst,
        worst_delay,
    }
}

/// Which message family an inequality bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// Layer-1 messages, exponent `α₁`.
    Layer1,
    /// Layer-2 messages, exponent `α₂`.
    Layer2,
    /// A-posteriori erasure probability, exponent `α`.
    Aposteriori,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Basis,
    Step,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InductionRow {
    pub stage: Stage,
    pub family: Family,
    /// Delay `i` of position `t - i`.
    pub delay: usize,
    pub value: f64,
    pub bound: f64,
}

impl InductionRow {
    pub fn slack(&self) -> f64 {
        self.bound - self.value
    }

    pub fn holds(&self) -> bool {
        self.value <= self.bound
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InductionReport {
    pub rows: Vec<InductionRow>,
    pub exponents: DerivedExponents,
    pub beta: f64,
}

impl InductionReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(InductionRow::holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &InductionRow> {
        self.rows.iter().filter(|r| !r.holds())
    }

    /// Row with the smallest relative slack `bound/value`.
    pub fn tightest(&self) -> Option<&InductionRow> {
        let ratio = |r: &InductionRow| {
            if r.value > 0.0 {
                r.bound / r.value
            } else {
                f64::INFINITY
            }
        };
        self.rows
            .iter()
            .min_by(|a, b| ratio(a).total_cmp(&ratio(b)))
    }
}

/// Checks, at the fixed point `state`, the basis inequalities
/// `x₁(t-i) ≤ βe^{-α₁i}`, `x₂(t-i) ≤ βe^{-α₂i}`, `P_e(t-i) ≤ βe^{-αi}` for
/// `0 < i ≤ d_basis`, and the same three at `i = d_basis + 1` as the step.
///
/// Positions at or below zero follow the lattice boundary convention (known,
/// value 0). The layer-2 family is skipped for single-layer codes.
pub fn induction_check(
    cfg: &BilayerConfig,
    state: &DeState,
    beta: f64,
    d_basis: usize,
) -> InductionReport {
    let exponents = cfg.derived_exponents();
    let pe = aposteriori_all(cfg, state);
    let t = state.t() as i64;
    let pe_at = |pos: i64| if pos >= 1 { pe[pos as usize - 1] } else { 0.0 };
    let mut rows = Vec::with_capacity(3 * (d_basis + 1));
    for i in 1..=d_basis + 1 {
        let stage = if i <= d_basis {
            Stage::Basis
        } else {
            Stage::Step
        };
        let pos = t - i as i64;
        let di = i as f64;
        rows.push(InductionRow {
            stage,
            family: Family::Layer1,
            delay: i,
            value: state.x1(pos),
            bound: beta * (-exponents.alpha1 * di).exp(),
        });
        if cfg.layer2.is_active() {
            rows.push(InductionRow {
                stage,
                family: Family::Layer2,
                delay: i,
                value: state.x2(pos),
                bound: beta * (-exponents.alpha2 * di).exp(),
            });
        }
        rows.push(InductionRow {
            stage,
            family: Family::Aposteriori,
            delay: i,
            value: pe_at(pos),
            bound: beta * (-exponents.alpha * di).exp(),
        });
    }
    InductionReport {
        rows,
        exponents,
        beta,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code_model::LayerParams;

    fn synthetic(alpha: f64, beta: f64, n: usize) -> ErasureCurve {
        let pe = (0..n).map(|d| beta * (-alpha * d as f64).exp()).collect();
        ErasureCurve::from_values(1, pe, 1e-14).unwrap()
    }

    #[test]
    fn theoretical_values() {
        let example = BilayerConfig::running_example();
        assert!((theoretical_exponent(&example) - 0.5).abs() < 1e-15);
        let l1 = LayerParams::new(4, 6, 0.1).unwrap();
        let l2 = LayerParams::new(2, 8, 0.1).unwrap();
        let iv = BilayerConfig::new(l1, l2, 0.3).unwrap();
        assert!((theoretical_exponent(&iv) - 0.6).abs() < 1e-15);
        let single = BilayerConfig::single_layer(l1, 0.3).unwrap();
        assert!((theoretical_exponent(&single) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn exact_fit() {
        let fit = fit_exponent(&synthetic(0.5, 0.3, 60), None, None).unwrap();
        assert!((fit.alpha_hat - 0.5).abs() < 1e-10);
        assert!((fit.beta_hat - 0.3).abs() < 1e-10);
        assert!(fit.residual < 1e-10);
        assert!(fit.window.0 < fit.window.1);
    }

    #[test]
    fn explicit_window() {
        let fit = fit_exponent(&synthetic(0.2, 100.0, 50), Some(0), Some(40)).unwrap();
        assert_eq!(fit.window, (0, 40));
        assert_eq!(fit.points, 41);
        assert!((fit.alpha_hat / 0.2 - 1.0).abs() < 1e-10);
        assert!((fit.beta_hat / 100.0 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn auto_window_widens_short_tail() {
        // only a handful of points below 0.1 before hitting the floor
        let fit = fit_exponent(&synthetic(3.0, 1.0, 12), None, None).unwrap();
        assert!(fit.points >= 10);
        assert!((fit.alpha_hat - 3.0).abs() < 1e-10);
    }

    #[test]
    fn fit_rejects_empty_curves() {
        let zero = ErasureCurve::from_values(1, vec![0.0; 30], 1e-14).unwrap();
        assert!(matches!(
            fit_exponent(&zero, None, None),
            Err(Error::WindowTooSmall { .. })
        ));
        let two = ErasureCurve::from_values(1, vec![0.5, 0.05, 0.0, 0.0], 1e-14).unwrap();
        assert!(matches!(
            fit_exponent(&two, None, None),
            Err(Error::WindowTooSmall { usable: 2 })
        ));
    }

    #[test]
    fn k_constants_vanish_with_beta() {
        let cfg = BilayerConfig::running_example();
        for d in [0, 5, 50] {
            assert!(k_prime(d, 1e-300, &cfg).unwrap().abs() < 1e-295);
            assert!(k_double_prime(d, 1e-300, &cfg).unwrap().abs() < 1e-295);
        }
        assert!(k_prime(0, 0.0, &cfg).is_err());
    }

    #[test]
    fn k_constants_oracle() {
        // 30-digit evaluation of the closed-form constants
        let cfg = BilayerConfig::running_example();
        let kp = k_prime(0, 1.0, &cfg).unwrap();
        let kpp = k_double_prime(0, 1.0, &cfg).unwrap();
        assert!((kp - 1.001_667_500_198_440_3).abs() < 1e-13, "{kp}");
        assert!((kpp - 1.402_334_500_277_816_4).abs() < 1e-13, "{kpp}");
        let table = [
            1.001_667_500_198_440_3,
            1.075_928_238_335_061_2,
            1.044_852_072_081_673_2,
            0.969_614_133_731_713_7,
            0.882_205_803_324_086,
            0.798_242_872_113_332_1,
            0.724_390_605_309_17,
            0.662_612_813_221_170_9,
        ];
        for (d, want) in table.iter().enumerate() {
            let got = k_prime(d, 1.0, &cfg).unwrap();
            assert!((got - want).abs() < 1e-13, "d={d}: {got} vs {want}");
        }
    }

    #[test]
    fn k_symmetric_layers() {
        let l = LayerParams::new(3, 6, 0.1).unwrap();
        let cfg = BilayerConfig::new(l, l, 0.5).unwrap();
        for d in 0..20 {
            for beta in [0.01, 1.0, 30.0] {
                let a = k_prime(d, beta, &cfg).unwrap();
                let b = k_double_prime(d, beta, &cfg).unwrap();
                assert!((a - b).abs() < 1e-14 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn k_degenerate_denominator() {
        // alpha1 = lambda1 when dv1 = 2 and layer 2 is inactive
        let l = LayerParams::new(2, 6, 0.1).unwrap();
        let cfg = BilayerConfig::single_layer(l, 0.5).unwrap();
        assert!(matches!(
            k_prime(3, 1.0, &cfg),
            Err(Error::DegenerateDenominator { which }) if which.contains("+alpha")
        ));
    }

    #[test]
    fn threshold_single_beta() {
        let cfg = BilayerConfig::running_example();
        let search = SearchSettings {
            beta_min: 0.2,
            beta_max: 0.2,
            beta_points: 1,
            d_max: 50,
            strict: false,
        };
        let r = threshold(&cfg, &search).unwrap();
        let pair = r.nominal.variant;
        let direct = (0..=50)
            .map(|d| threshold_objective(&cfg, pair, 0.2, d).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(r.nominal.objective, direct);
        assert!(!r.nominal.beta_at_boundary);
    }

    #[test]
    fn threshold_boundary_flag() {
        let cfg = BilayerConfig::running_example();
        let search = SearchSettings {
            beta_min: 1e-3,
            beta_max: 1e-2,
            beta_points: 5,
            ..Default::default()
        };
        let r = threshold(&cfg, &search).unwrap();
        assert!(r.nominal.beta_at_boundary);
        assert!(r.nominal.at_boundary());
    }

    #[test]
    fn verify_bound_cases() {
        let zero = ErasureCurve::from_values(1, vec![0.0; 10], 1e-14).unwrap();
        let r = verify_anytime_bound(&zero, 0.5, 1.0);
        assert!(r.pass);
        assert_eq!(r.worst_margin, f64::INFINITY);

        let exact = synthetic(0.5, 1.0, 40);
        let r = verify_anytime_bound(&exact, 0.5, 1.0);
        assert!(r.pass);
        assert!(r.worst_margin.abs() < 1e-12);

        let r = verify_anytime_bound(&exact, 0.6, 1.0);
        assert!(!r.pass);
        assert_eq!(r.worst_delay, Some(39));
    }

    #[test]
    fn fit_bound_with_residual_always_holds() {
        let pe: Vec<f64> = (0..50)
            .map(|d| {
                0.4 * (-0.3 * d as f64).exp() * (1.0 + 0.2 * ((d * 37 % 7) as f64 / 7.0 - 0.5))
            })
            .collect();
        let curve = ErasureCurve::from_values(1, pe.clone(), 1e-14).unwrap();
        let fit = fit_exponent(&curve, None, None).unwrap();
        let (lo, hi) = fit.window;
        let window = ErasureCurve::from_values(1, pe[..=hi].to_vec(), 1e-14).unwrap();
        let report =
            verify_anytime_bound(&window, fit.alpha_hat, fit.beta_hat * fit.residual.exp());
        // delays before the window are outside the guarantee
        if lo == 0 {
            assert!(report.pass);
        }
        let inside: Vec<f64> = (0..=hi).map(|d| if d < lo { 0.0 } else { pe[d] }).collect();
        let inside = ErasureCurve::from_values(1, inside, 1e-14).unwrap();
        assert!(
            verify_anytime_bound(&inside, fit.alpha_hat, fit.beta_hat * fit.residual.exp()).pass
        );
    }
}
