//! Code and channel parameters shared by the analysis and the simulator.

use std::fmt;

use crate::error::{Error, Result};

/// The geometric coupling profile: an edge leaving a variable node at
/// position `i` lands on a check node at position `i + k` with probability
/// `e^{-kλ}(1 - e^{-λ})`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeometricProfile {
    lambda: f64,
    decay: f64,
    norm: f64,
}

impl GeometricProfile {
    pub fn new(lambda: f64) -> Self {
        GeometricProfile {
            lambda,
            decay: (-lambda).exp(),
            norm: -(-lambda).exp_m1(),
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `e^{-λ}`, the ratio between consecutive masses.
    pub fn decay(&self) -> f64 {
        self.decay
    }

    /// `K = 1 - e^{-λ}`, the mass at offset zero.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Probability of offset `k`.
    pub fn pmf(&self, k: u64) -> f64 {
        (-(k as f64) * self.lambda).exp() * self.norm
    }

    /// `Σ_{j=0}^{n} pmf(j) = 1 - e^{-λ(n+1)}`.
    pub fn cdf(&self, n: u64) -> f64 {
        -(-(n as f64 + 1.0) * self.lambda).exp_m1()
    }

    /// Mass beyond offset `n`, `e^{-λ(n+1)}`. This is the share of check
    /// nodes a variable node connects to that have not been received yet when
    /// only offsets `0..=n` are available.
    pub fn tail(&self, n: u64) -> f64 {
        (-(n as f64 + 1.0) * self.lambda).exp()
    }
}

/// One coupled LDPC layer, `(d_v, d_c, λ)`.
///
/// A layer with `d_v = 0` is *inactive*; it is only accepted as the second
/// layer of a [`BilayerConfig`] and turns the bilayer code into a plain
/// anytime SC-LDPC code.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LayerParams {
    dv: usize,
    dc: usize,
    lambda: f64,
}

impl LayerParams {
    pub fn new(dv: usize, dc: usize, lambda: f64) -> Result<Self> {
        if dv == 0 {
            return Err(Error::invalid("d_v", "must be at least 1"));
        }
        Self::checked(dv, dc, lambda)
    }

    /// A layer without variable-node edges.
    pub fn inactive(dc: usize, lambda: f64) -> Result<Self> {
        Self::checked(0, dc, lambda)
    }

    fn checked(dv: usize, dc: usize, lambda: f64) -> Result<Self> {
        if dc < 2 {
            return Err(Error::invalid(
                "d_c",
                format!("must be at least 2, got {dc}"),
            ));
        }
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::invalid(
                "lambda",
                format!("must lie in (0, 1), got {lambda}"),
            ));
        }
        Ok(LayerParams { dv, dc, lambda })
    }

    pub fn dv(&self) -> usize {
        self.dv
    }

    pub fn dc(&self) -> usize {
        self.dc
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn is_active(&self) -> bool {
        self.dv > 0
    }

    /// `1 - d_v/d_c`.
    pub fn design_rate(&self) -> f64 {
        1.0 - self.dv as f64 / self.dc as f64
    }

    pub fn profile(&self) -> GeometricProfile {
        GeometricProfile::new(self.lambda)
    }

    /// Number of check nodes per position for `m` variable nodes per
    /// position, when `d_v·m/d_c` is an integer.
    pub fn checks_per_position(&self, m: usize) -> Option<usize> {
        let sockets = self.dv * m;
        sockets.is_multiple_of(self.dc).then(|| sockets / self.dc)
    }
}

impl fmt::Display for LayerParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.dv, self.dc, self.lambda)
    }
}

/// Delay exponents of the two message types and of the a-posteriori
/// erasure probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivedExponents {
    /// `λ₁(d_{v₁}-1) + λ₂d_{v₂}`, governing layer-1 messages.
    pub alpha1: f64,
    /// `λ₁d_{v₁} + λ₂(d_{v₂}-1)`, governing layer-2 messages.
    pub alpha2: f64,
    /// `λ₁d_{v₁} + λ₂d_{v₂}`.
    pub alpha: f64,
}

/// A `(d_{v₁}, d_{c₁}, λ₁, d_{v₂}, d_{c₂}, λ₂)` bilayer code together with the
/// erasure probabilities of the three relay links.
///
/// Only `eps_sd` enters the analysis. The source-relay link is assumed
/// decodable and the relay-destination link error-free, so `eps_sr` and
/// `eps_rd` are carried along for the record.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BilayerConfig {
    pub layer1: LayerParams,
    pub layer2: LayerParams,
    pub eps_sd: f64,
    pub eps_sr: f64,
    pub eps_rd: f64,
}

fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must lie in [0, 1], got {p}")))
    }
}

impl BilayerConfig {
    pub fn new(layer1: LayerParams, layer2: LayerParams, eps_sd: f64) -> Result<Self> {
        Self::with_relay_links(layer1, layer2, eps_sd, 0.0, 0.0)
    }

    pub fn with_relay_links(
        layer1: LayerParams,
        layer2: LayerParams,
        eps_sd: f64,
        eps_sr: f64,
        eps_rd: f64,
    ) -> Result<Self> {
        if !layer1.is_active() {
            return Err(Error::invalid("dv1", "layer 1 must have d_v >= 1"));
        }
        check_probability("eps_sd", eps_sd)?;
        check_probability("eps_sr", eps_sr)?;
        check_probability("eps_rd", eps_rd)?;
        Ok(BilayerConfig {
            layer1,
            layer2,
            eps_sd,
            eps_sr,
            eps_rd,
        })
    }

    /// The running example `(3,6,0.1,2,8,0.1)` at `ε_sd = 0.7`.
    pub fn running_example() -> Self {
        BilayerConfig {
            layer1: LayerParams {
                dv: 3,
                dc: 6,
                lambda: 0.1,
            },
            layer2: LayerParams {
                dv: 2,
                dc: 8,
                lambda: 0.1,
            },
            eps_sd: 0.7,
            eps_sr: 0.0,
            eps_rd: 0.0,
        }
    }

    /// Single-layer code: layer 2 is inactive.
    pub fn single_layer(layer: LayerParams, eps: f64) -> Result<Self> {
        let absent = LayerParams::inactive(layer.dc, layer.lambda)?;
        Self::new(layer, absent, eps)
    }

    pub fn with_eps_sd(mut self, eps_sd: f64) -> Result<Self> {
        check_probability("eps_sd", eps_sd)?;
        self.eps_sd = eps_sd;
        Ok(self)
    }

    pub fn is_single_layer(&self) -> bool {
        !self.layer2.is_active()
    }

    pub fn derived_exponents(&self) -> DerivedExponents {
        let a1 = self.layer1.lambda * self.layer1.dv as f64;
        let a2 = self.layer2.lambda * self.layer2.dv as f64;
        DerivedExponents {
            alpha1: a1 - self.layer1.lambda + a2,
            alpha2: a1 + a2 - self.layer2.lambda,
            alpha: a1 + a2,
        }
    }
}

impl fmt::Display for BilayerConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{},{},{},{}) eps_sd={}",
            self.layer1.dv,
            self.layer1.dc,
            self.layer1.lambda,
            self.layer2.dv,
            self.layer2.dc,
            self.layer2.lambda,
            self.eps_sd
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pmf_at_zero() {
        // 1 - e^{-0.1}
        let p = GeometricProfile::new(0.1);
        assert!((p.pmf(0) - 0.095_162_581_964_040_43).abs() < 1e-16);
    }

    #[test]
    fn partial_sum_closed_form() {
        let p = GeometricProfile::new(0.1);
        let direct: f64 = (0..=4).map(|j| p.pmf(j)).sum();
        assert!((direct - 0.393_469_340_287_366_6).abs() < 1e-15);
        assert!((p.cdf(4) - 0.393_469_340_287_366_6).abs() < 1e-15);
    }

    #[test]
    fn total_mass_is_one() {
        let p = GeometricProfile::new(0.1);
        let head: f64 = (0..2000).map(|k| p.pmf(k)).sum();
        assert!((head - 1.0).abs() < 1e-14);
    }

    #[test]
    fn running_example_exponents() {
        let e = BilayerConfig::running_example().derived_exponents();
        assert!((e.alpha - 0.5).abs() < 1e-15);
        assert!((e.alpha1 - 0.4).abs() < 1e-15);
        assert!((e.alpha2 - 0.4).abs() < 1e-15);
    }

    #[test]
    fn single_layer_exponent() {
        let layer = LayerParams::new(3, 6, 0.1).unwrap();
        let cfg = BilayerConfig::single_layer(layer, 0.5).unwrap();
        assert!(cfg.is_single_layer());
        assert!((cfg.derived_exponents().alpha - 0.3).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_layers() {
        assert!(LayerParams::new(0, 6, 0.1).is_err());
        assert!(LayerParams::new(3, 1, 0.1).is_err());
        assert!(LayerParams::new(3, 6, 0.0).is_err());
        assert!(LayerParams::new(3, 6, 1.0).is_err());
        assert!(LayerParams::new(3, 6, f64::NAN).is_err());
        let inactive = LayerParams::inactive(6, 0.1).unwrap();
        assert!(BilayerConfig::new(inactive, inactive, 0.5).is_err());
        let l = LayerParams::new(3, 6, 0.1).unwrap();
        assert!(BilayerConfig::new(l, l, 1.5).is_err());
        assert!(BilayerConfig::with_relay_links(l, l, 0.5, -0.1, 0.0).is_err());
    }

    #[test]
    fn checks_per_position() {
        let l = LayerParams::new(3, 6, 0.1).unwrap();
        assert_eq!(l.checks_per_position(400), Some(200));
        assert_eq!(l.checks_per_position(401), None);
        let l2 = LayerParams::new(2, 8, 0.1).unwrap();
        assert_eq!(l2.checks_per_position(400), Some(100));
        assert!((l.design_rate() - 0.5).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn tail_plus_partial_sum_is_one(lambda in 1e-3f64..0.999, n in 0u64..500) {
            let p = GeometricProfile::new(lambda);
            let partial: f64 = (0..=n).map(|j| p.pmf(j)).sum();
            prop_assert!((partial + p.tail(n) - 1.0).abs() < 1e-14);
        }

        #[test]
        fn pmf_ratio_is_decay(lambda in 1e-3f64..0.999, k in 0u64..30) {
            let p = GeometricProfile::new(lambda);
            prop_assert!(p.pmf(k + 1) < p.pmf(k));
            prop_assert!((p.pmf(k + 1) / p.pmf(k) - (-lambda).exp()).abs() < 1e-14);
        }

        #[test]
        fn exponent_identities(
            dv1 in 1usize..8, l1 in 0.01f64..0.99,
            dv2 in 0usize..8, l2 in 0.01f64..0.99,
        ) {
            let layer1 = LayerParams::new(dv1, 8, l1).unwrap();
            let layer2 = LayerParams::checked(dv2, 8, l2).unwrap();
            let e = BilayerConfig::new(layer1, layer2, 0.5).unwrap().derived_exponents();
            let tol = 1e-15 * e.alpha.max(1.0);
            prop_assert!((e.alpha - (e.alpha1 + l1)).abs() <= tol);
            prop_assert!((e.alpha - (e.alpha2 + l2)).abs() <= tol);
        }
    }
}
