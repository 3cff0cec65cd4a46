//! Density evolution for anytime SC-LDPC codes on the binary erasure channel.
//!
//! The lattice holds, for a decoding time `t`, the erasure probability of the
//! message a variable node at position `i ∈ [1, t]` sends into each layer.
//! Positions `i ≤ 0` are already known (value 0) and positions `i > t` have
//! not been received (value 1); neither is stored.
//!
//! All updates use the flooding schedule: every message of iteration `l` is
//! computed from the messages of iteration `l - 1`.

use rayon::prelude::*;

use crate::code_model::{BilayerConfig, GeometricProfile, LayerParams};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeSettings {
    /// Stop once the max-norm change of one iteration drops below this.
    pub tol: f64,
    pub max_iters: usize,
    /// Start time `t + 1` from the fixed point at time `t`.
    pub warm_start: bool,
    /// Curve values below this are reported as 0.
    pub pe_floor: f64,
}

impl Default for DeSettings {
    fn default() -> Self {
        DeSettings {
            tol: 1e-12,
            max_iters: 20_000,
            warm_start: true,
            pe_floor: 1e-14,
        }
    }
}

impl DeSettings {
    pub fn validate(&self) -> Result<()> {
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::invalid("tol", "must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters", "must be at least 1"));
        }
        if !(self.pe_floor >= 0.0 && self.pe_floor < self.tol) {
            return Err(Error::invalid(
                "pe_floor",
                "must satisfy 0 <= pe_floor < tol",
            ));
        }
        Ok(())
    }
}

/// Message erasure probabilities at one decoding time.
#[derive(Clone, Debug, PartialEq)]
pub struct DeState {
    t: usize,
    x1: Vec<f64>,
    x2: Vec<f64>,
    iterations: usize,
    converged: bool,
}

fn lattice_value(x: &[f64], pos: i64) -> f64 {
    if pos <= 0 {
        0.0
    } else if pos as usize > x.len() {
        1.0
    } else {
        x[pos as usize - 1]
    }
}

impl DeState {
    pub fn t(&self) -> usize {
        self.t
    }

    /// Layer-1 message erasure probability at `pos`, with the boundary
    /// convention applied outside `[1, t]`.
    pub fn x1(&self, pos: i64) -> f64 {
        lattice_value(&self.x1, pos)
    }

    /// Layer-2 counterpart of [`DeState::x1`]. Identically zero on `[1, t]`
    /// when the second layer is inactive.
    pub fn x2(&self, pos: i64) -> f64 {
        lattice_value(&self.x2, pos)
    }

    /// Stored layer-1 values; index `p` is position `p + 1`.
    pub fn layer1(&self) -> &[f64] {
        &self.x1
    }

    pub fn layer2(&self) -> &[f64] {
        &self.x2
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn converged(&self) -> bool {
        self.converged
    }
}

/// Check-to-variable factor `(1 - Σ_k P(k)·x(i+j-k))^{d_c-1}` for the check
/// node at position `i + j`, evaluated term by term. The sum stops at
/// `k = i + j - 1` because positions `≤ 0` contribute nothing.
///
/// `x` holds the layer's values on positions `1..=t`.
pub fn cn_to_vn(profile: &GeometricProfile, x: &[f64], i: usize, j: usize, dc: usize) -> f64 {
    let c = i + j;
    assert!(i >= 1 && c <= x.len(), "check position must lie in [1, t]");
    let s: f64 = (0..c)
        .map(|k| profile.pmf(k as u64) * lattice_value(x, (c - k) as i64))
        .sum();
    (1.0 - s).powi(dc as i32 - 1)
}

/// Computes, for every position `i ∈ [1, t]`, the variable-node bracket
/// `1 - Σ_{j=0}^{t-i} P(j)·(1 - Σ_k P(k)·x(i+j-k))^{d_c-1}`.
///
/// Both sums are geometric convolutions, evaluated with the recurrences
/// `s(c) = K·x(c) + e^{-λ}·s(c-1)` and `w(i) = K·ȳ(i) + e^{-λ}·w(i+1)`. The
/// bracket is assembled as `e^{-λ(t-i+1)} + w(i)` from the complements
/// `ȳ = 1 - y`, so no step subtracts two numbers close to one.
fn layer_brackets(profile: &GeometricProfile, dc: usize, x: &[f64], out: &mut [f64]) {
    let t = x.len();
    debug_assert_eq!(out.len(), t);
    let k0 = profile.norm();
    let r = profile.decay();
    let power = (dc - 1) as f64;

    // out[c-1] <- ȳ(c)
    let mut s = 0.0;
    for (c, slot) in out.iter_mut().enumerate() {
        s = k0 * x[c] + r * s;
        *slot = if s >= 1.0 {
            1.0
        } else {
            -(power * (-s).ln_1p()).exp_m1()
        };
    }
    let mut w = 0.0;
    for i in (0..t).rev() {
        w = k0 * out[i] + r * w;
        let missing = profile.tail((t - 1 - i) as u64);
        out[i] = (missing + w).min(1.0);
    }
}

fn max_change(old: &[f64], new: &[f64]) -> f64 {
    old.iter()
        .zip(new)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
}

/// Stepwise bilayer density evolution at a fixed decoding time.
///
/// [`de_bilayer`] drives this to a fixed point; the stepwise form is exposed
/// so callers can observe individual iterations.
#[derive(Clone, Debug)]
pub struct BilayerDe {
    cfg: BilayerConfig,
    p1: GeometricProfile,
    p2: GeometricProfile,
    x1: Vec<f64>,
    x2: Vec<f64>,
    b1: Vec<f64>,
    b2: Vec<f64>,
    iterations: usize,
}

impl BilayerDe {
    /// Cold start: every received position begins at `ε_sd`.
    pub fn new(cfg: &BilayerConfig, t: usize) -> Self {
        assert!(t >= 1, "decoding time must be at least 1");
        let x1 = vec![cfg.eps_sd; t];
        let x2 = if cfg.layer2.is_active() {
            vec![cfg.eps_sd; t]
        } else {
            vec![0.0; t]
        };
        Self::from_parts(cfg, x1, x2)
    }

    /// Warm start at time `prev.t() + 1` from the fixed point `prev`; the new
    /// position begins at `ε_sd`.
    pub fn extend(cfg: &BilayerConfig, prev: &DeState) -> Self {
        let mut x1 = prev.x1.clone();
        let mut x2 = prev.x2.clone();
        x1.push(cfg.eps_sd);
        x2.push(if cfg.layer2.is_active() {
            cfg.eps_sd
        } else {
            0.0
        });
        Self::from_parts(cfg, x1, x2)
    }

    fn from_parts(cfg: &BilayerConfig, x1: Vec<f64>, x2: Vec<f64>) -> Self {
        let t = x1.len();
        BilayerDe {
            cfg: *cfg,
            p1: cfg.layer1.profile(),
            p2: cfg.layer2.profile(),
            x1,
            x2,
            b1: vec![0.0; t],
            b2: vec![1.0; t],
            iterations: 0,
        }
    }

    fn compute_brackets(&mut self) {
        layer_brackets(&self.p1, self.cfg.layer1.dc(), &self.x1, &mut self.b1);
        if self.cfg.layer2.is_active() {
            layer_brackets(&self.p2, self.cfg.layer2.dc(), &self.x2, &mut self.b2);
        }
    }

    /// One flooding iteration. Returns the max-norm change.
    pub fn sweep(&mut self) -> f64 {
        self.compute_brackets();
        let eps = self.cfg.eps_sd;
        let dv1 = self.cfg.layer1.dv() as i32;
        let dv2 = self.cfg.layer2.dv() as i32;
        let mut change = 0.0f64;
        for p in 0..self.x1.len() {
            let (b1, b2) = (self.b1[p], self.b2[p]);
            let n1 = eps * b1.powi(dv1 - 1) * b2.powi(dv2);
            change = change.max((n1 - self.x1[p]).abs());
            self.x1[p] = n1;
            if dv2 > 0 {
                let n2 = eps * b1.powi(dv1) * b2.powi(dv2 - 1);
                change = change.max((n2 - self.x2[p]).abs());
                self.x2[p] = n2;
            }
        }
        self.iterations += 1;
        change
    }

    pub fn layer1(&self) -> &[f64] {
        &self.x1
    }

    pub fn layer2(&self) -> &[f64] {
        &self.x2
    }

    /// Iterates until the change drops below `settings.tol` or the iteration
    /// budget is spent.
    pub fn run(mut self, settings: &DeSettings) -> DeState {
        let mut converged = false;
        while self.iterations < settings.max_iters {
            if self.sweep() < settings.tol {
                converged = true;
                break;
            }
        }
        DeState {
            t: self.x1.len(),
            x1: self.x1,
            x2: self.x2,
            iterations: self.iterations,
            converged,
        }
    }
}

/// Fixed point of the single-layer recursion
/// `x(i) = ε·(1 - Σ_j P(j)·(1 - Σ_k P(k)·x(i+j-k))^{d_c-1})^{d_v-1}`
/// over positions `1..=t`.
pub fn de_single_layer(
    layer: &LayerParams,
    eps: f64,
    t: usize,
    settings: &DeSettings,
) -> Result<DeState> {
    if !layer.is_active() {
        return Err(Error::invalid(
            "d_v",
            "single-layer density evolution needs d_v >= 1",
        ));
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::invalid(
            "eps",
            format!("must lie in [0, 1], got {eps}"),
        ));
    }
    if t == 0 {
        return Err(Error::invalid("t", "must be at least 1"));
    }
    let profile = layer.profile();
    let exponent = layer.dv() as i32 - 1;
    let mut x = vec![eps; t];
    let mut next = vec![0.0; t];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < settings.max_iters {
        layer_brackets(&profile, layer.dc(), &x, &mut next);
        for b in next.iter_mut() {
            *b = eps * b.powi(exponent);
        }
        let change = max_change(&x, &next);
        std::mem::swap(&mut x, &mut next);
        iterations += 1;
        if change < settings.tol {
            converged = true;
            break;
        }
    }
    Ok(DeState {
        t,
        x1: x,
        x2: vec![0.0; t],
        iterations,
        converged,
    })
}

/// Joint fixed point of the two coupled layer recursions at decoding time
/// `t`, from the cold-start initialization.
pub fn de_bilayer(cfg: &BilayerConfig, t: usize, settings: &DeSettings) -> DeState {
    BilayerDe::new(cfg, t).run(settings)
}

/// A-posteriori erasure probability of every position `1..=t`:
/// `ε_sd·B₁(i)^{d_{v₁}}·B₂(i)^{d_{v₂}}`.
pub fn aposteriori_all(cfg: &BilayerConfig, state: &DeState) -> Vec<f64> {
    let t = state.t;
    let mut b1 = vec![0.0; t];
    layer_brackets(&cfg.layer1.profile(), cfg.layer1.dc(), &state.x1, &mut b1);
    let dv1 = cfg.layer1.dv() as i32;
    if cfg.layer2.is_active() {
        let mut b2 = vec![0.0; t];
        layer_brackets(&cfg.layer2.profile(), cfg.layer2.dc(), &state.x2, &mut b2);
        let dv2 = cfg.layer2.dv() as i32;
        b1.iter()
            .zip(&b2)
            .map(|(a, b)| cfg.eps_sd * a.powi(dv1) * b.powi(dv2))
            .collect()
    } else {
        b1.iter().map(|a| cfg.eps_sd * a.powi(dv1)).collect()
    }
}

/// A-posteriori erasure probability of message `i` given the fixed point
/// `state`.
pub fn aposteriori_pe(cfg: &BilayerConfig, state: &DeState, i: usize) -> f64 {
    assert!(i >= 1 && i <= state.t, "message index must lie in [1, t]");
    aposteriori_all(cfg, state)[i - 1]
}

/// Erasure probability of one message as a function of decoding delay.
#[derive(Clone, Debug, PartialEq)]
pub struct ErasureCurve {
    message_index: usize,
    pe: Vec<f64>,
    converged: Vec<bool>,
    pe_floor: f64,
}

impl ErasureCurve {
    /// Wraps precomputed values; `pe[d]` is the erasure probability at delay
    /// `d`. All entries must be finite and non-negative.
    pub fn from_values(message_index: usize, pe: Vec<f64>, pe_floor: f64) -> Result<Self> {
        if pe.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid(
                "pe",
                "values must be finite and non-negative",
            ));
        }
        let converged = vec![true; pe.len()];
        Ok(ErasureCurve {
            message_index,
            pe,
            converged,
            pe_floor,
        })
    }

    pub fn message_index(&self) -> usize {
        self.message_index
    }

    pub fn pe(&self) -> &[f64] {
        &self.pe
    }

    pub fn pe_floor(&self) -> f64 {
        self.pe_floor
    }

    pub fn converged(&self) -> &[bool] {
        &self.converged
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|c| *c)
    }

    pub fn d_max(&self) -> usize {
        self.pe.len().saturating_sub(1)
    }

    pub fn decoding_time(&self, delay: usize) -> usize {
        self.message_index + delay
    }

    /// `(delay, pe)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.pe.iter().copied().enumerate()
    }
}

/// `P_e(i, i + d)` for `d = 0..=d_max`, one density evolution run per
/// decoding time.
pub fn erasure_curve(
    cfg: &BilayerConfig,
    i: usize,
    d_max: usize,
    settings: &DeSettings,
) -> ErasureCurve {
    assert!(i >= 1, "message index must be at least 1");
    let evaluate = |state: &DeState| aposteriori_pe(cfg, state, i);
    let raw: Vec<(f64, bool)> = if settings.warm_start {
        let mut out = Vec::with_capacity(d_max + 1);
        let mut state = de_bilayer(cfg, i, settings);
        out.push((evaluate(&state), state.converged));
        for _ in 0..d_max {
            state = BilayerDe::extend(cfg, &state).run(settings);
            out.push((evaluate(&state), state.converged));
        }
        out
    } else {
        (0..=d_max)
            .into_par_iter()
            .map(|d| {
                let state = de_bilayer(cfg, i + d, settings);
                (evaluate(&state), state.converged)
            })
            .collect()
    };
    let floor = settings.pe_floor;
    ErasureCurve {
        message_index: i,
        pe: raw
            .iter()
            .map(|(p, _)| if *p < floor { 0.0 } else { *p })
            .collect(),
        converged: raw.iter().map(|(_, c)| *c).collect(),
        pe_floor: floor,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> BilayerConfig {
        BilayerConfig::running_example()
    }

    // Term-by-term bracket, independent of the recurrences.
    fn direct_bracket(profile: &GeometricProfile, dc: usize, x: &[f64], i: usize) -> f64 {
        let t = x.len();
        let s: f64 = (0..=t - i)
            .map(|j| profile.pmf(j as u64) * cn_to_vn(profile, x, i, j, dc))
            .sum();
        1.0 - s
    }

    #[test]
    fn cn_to_vn_perfect_messages() {
        let p = GeometricProfile::new(0.1);
        assert_eq!(cn_to_vn(&p, &[0.0; 5], 2, 1, 6), 1.0);
    }

    #[test]
    fn cn_to_vn_all_erased() {
        let p = GeometricProfile::new(0.1);
        let t = 3;
        let v = cn_to_vn(&p, &vec![1.0; t], 1, t - 1, 6);
        assert!((v - (-0.5 * t as f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn cn_to_vn_single_step() {
        let p = GeometricProfile::new(0.1);
        let v = cn_to_vn(&p, &[0.7], 1, 0, 6);
        assert!((v - 0.708_446_176_715_620_3).abs() < 1e-15);
    }

    #[test]
    fn brackets_match_direct_sums() {
        let p = GeometricProfile::new(0.13);
        let x: Vec<f64> = (0..17)
            .map(|k| 0.9 * (0.3 + 0.7 * ((k * 7) % 11) as f64 / 11.0))
            .collect();
        let mut out = vec![0.0; x.len()];
        layer_brackets(&p, 6, &x, &mut out);
        for i in 1..=x.len() {
            let d = direct_bracket(&p, 6, &x, i);
            assert!(
                (out[i - 1] - d).abs() < 1e-14,
                "i={i}: {} vs {d}",
                out[i - 1]
            );
        }
    }

    #[test]
    fn single_layer_eps_zero() {
        let l = LayerParams::new(3, 6, 0.1).unwrap();
        let s = de_single_layer(&l, 0.0, 10, &DeSettings::default()).unwrap();
        assert!(s.layer1().iter().all(|v| *v == 0.0));
        assert_eq!(s.iterations(), 1);
        assert!(s.converged());
    }

    #[test]
    fn single_layer_first_sweep() {
        let l = LayerParams::new(3, 6, 0.1).unwrap();
        let settings = DeSettings {
            max_iters: 1,
            ..Default::default()
        };
        let s = de_single_layer(&l, 0.7, 1, &settings).unwrap();
        // naive evaluation of the single-layer recursion
        assert!((s.x1(1) - 0.608_796_995_569_67).abs() < 1e-12);
        assert!(!s.converged());
    }

    #[test]
    fn single_layer_above_its_threshold_stalls() {
        // (3,6,0.1) alone does not decode at eps = 0.7.
        let l = LayerParams::new(3, 6, 0.1).unwrap();
        let s = de_single_layer(&l, 0.7, 60, &DeSettings::default()).unwrap();
        assert!(s.converged());
        assert!((s.x1(1) - 0.335_587_34).abs() < 1e-6, "{}", s.x1(1));
        assert!((s.x1(3) - 0.445_471_02).abs() < 1e-6);
    }

    #[test]
    fn single_layer_below_threshold_decays() {
        let l = LayerParams::new(3, 6, 0.1).unwrap();
        let s = de_single_layer(&l, 0.3, 60, &DeSettings::default()).unwrap();
        // naive oracle, tol 1e-14
        assert!(
            (s.x1(1) / 8.709_530_309_822_908e-6 - 1.0).abs() < 1e-8,
            "{}",
            s.x1(1)
        );
        assert!((s.x1(2) / 1.063_628_720_346_867_9e-5 - 1.0).abs() < 1e-8);
        assert!((s.x1(30) / 2.631_686_303_172_114e-3 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn bilayer_first_sweep_t2() {
        let settings = DeSettings {
            max_iters: 1,
            ..Default::default()
        };
        let s = de_bilayer(&example(), 2, &settings);
        assert!((s.x1(1) - 0.455_961_929_526_042_86).abs() < 1e-13);
        assert!((s.x1(2) - 0.588_215_437_560_172_9).abs() < 1e-13);
        assert!((s.x2(1) - 0.446_386_859_526_591_9).abs() < 1e-13);
        assert!((s.x2(2) - 0.581_206_944_530_194_6).abs() < 1e-13);
    }

    #[test]
    fn bilayer_fixed_point_t2() {
        let s = de_bilayer(&example(), 2, &DeSettings::default());
        assert!(s.converged());
        assert!((s.x1(1) - 0.410_331_323_719_801_85).abs() < 1e-11);
        assert!((s.x2(2) - 0.552_409_955_428_072_3).abs() < 1e-11);
        let pe = aposteriori_pe(&example(), &s, 1);
        assert!((pe - 0.356_096_638_999_293_84).abs() < 1e-11);
    }

    #[test]
    fn bilayer_pe_at_delay_39() {
        let cfg = example();
        let s = de_bilayer(&cfg, 40, &DeSettings::default());
        let pe = aposteriori_pe(&cfg, &s, 1);
        // naive oracle with tol 1e-13
        assert!((pe / 6.908_715_185_231_742e-8 - 1.0).abs() < 1e-6, "{pe}");
    }

    #[test]
    fn boundary_convention() {
        let s = de_bilayer(&example(), 3, &DeSettings::default());
        assert_eq!(s.x1(0), 0.0);
        assert_eq!(s.x1(-4), 0.0);
        assert_eq!(s.x1(4), 1.0);
        assert_eq!(s.x2(17), 1.0);
    }

    #[test]
    fn bilayer_eps_zero() {
        let cfg = example().with_eps_sd(0.0).unwrap();
        let s = de_bilayer(&cfg, 12, &DeSettings::default());
        assert!(s.layer1().iter().chain(s.layer2()).all(|v| *v == 0.0));
        assert_eq!(aposteriori_pe(&cfg, &s, 3), 0.0);
    }

    #[test]
    fn aposteriori_below_messages() {
        let cfg = example();
        let s = de_bilayer(&cfg, 30, &DeSettings::default());
        let pe = aposteriori_all(&cfg, &s);
        for ((p, x1), x2) in pe.iter().zip(s.layer1()).zip(s.layer2()) {
            assert!(*p <= x1.min(*x2));
        }
    }

    #[test]
    fn non_convergence_is_flagged() {
        let settings = DeSettings {
            max_iters: 2,
            ..Default::default()
        };
        let curve = erasure_curve(&example(), 5, 3, &settings);
        assert!(!curve.all_converged());
    }

    #[test]
    fn fresh_message_is_mostly_erased() {
        let curve = erasure_curve(&example(), 20, 0, &DeSettings::default());
        assert_eq!(curve.pe().len(), 1);
        assert!(
            curve.pe()[0] > 0.4 && curve.pe()[0] < 0.7,
            "{}",
            curve.pe()[0]
        );
    }

    #[test]
    fn settings_validation() {
        assert!(DeSettings::default().validate().is_ok());
        let bad = DeSettings {
            pe_floor: 1e-11,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = DeSettings {
            max_iters: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
