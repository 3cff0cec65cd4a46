//! Finite-length validation of the density evolution results.
//!
//! A trial builds one explicit bilayer Tanner graph, erases every source bit
//! independently with probability `ε_sd`, and peels the graph as positions
//! arrive. Relay parities (layer-2 check values) are known at the
//! destination from the check's position onward, which models an error-free
//! source-relay link and a capacity-achieving relay-destination code.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use crate::code_model::{BilayerConfig, LayerParams};
use crate::error::{Error, Result};

/// One edge. Positions are 1-based, node indices 0-based within a position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub vpos: u32,
    pub vidx: u32,
    /// 1 for the source code, 2 for the relay code.
    pub layer: u8,
    pub cpos: u32,
    pub cidx: u32,
}

/// Finite bilayer anytime SC-LDPC graph with `positions` positions of `m`
/// variable nodes each.
#[derive(Clone, Debug, PartialEq)]
pub struct TannerGraph {
    m: usize,
    positions: usize,
    layer1: LayerParams,
    layer2: LayerParams,
    seed: u64,
    checks1: usize,
    checks2: usize,
    edges: Vec<Edge>,
}

fn checks_for(layer: &LayerParams, m: usize, name: &'static str) -> Result<usize> {
    layer.checks_per_position(m).ok_or(Error::Divisibility {
        count_name: name,
        numerator: layer.dv(),
        denominator: layer.dc(),
        m,
    })
}

impl TannerGraph {
    /// Assembles a graph from an explicit edge list. Checks index ranges and
    /// causality (`cpos ≥ vpos`); degree regularity is not required.
    /// Repeated edges are kept; they cancel in pairs when decoding.
    pub fn from_edges(
        m: usize,
        positions: usize,
        layer1: LayerParams,
        layer2: LayerParams,
        seed: u64,
        edges: Vec<Edge>,
    ) -> Result<Self> {
        if m == 0 || positions == 0 {
            return Err(Error::invalid(
                "M/T",
                "need at least one variable and one position",
            ));
        }
        let checks1 = checks_for(&layer1, m, "layer-1 checks per position")?;
        let checks2 = checks_for(&layer2, m, "layer-2 checks per position")?;
        for e in &edges {
            let checks = match e.layer {
                1 => checks1,
                2 => checks2,
                _ => {
                    return Err(Error::invalid(
                        "layer",
                        format!("edge layer {} is not 1 or 2", e.layer),
                    ))
                }
            };
            if e.vpos == 0
                || e.vpos as usize > positions
                || e.cpos == 0
                || e.cpos as usize > positions
            {
                return Err(Error::invalid(
                    "edge",
                    format!("position out of range in {e:?}"),
                ));
            }
            if e.vidx as usize >= m || e.cidx as usize >= checks {
                return Err(Error::invalid(
                    "edge",
                    format!("node index out of range in {e:?}"),
                ));
            }
            if e.cpos < e.vpos {
                return Err(Error::invalid("edge", format!("acausal edge {e:?}")));
            }
        }
        Ok(TannerGraph {
            m,
            positions,
            layer1,
            layer2,
            seed,
            checks1,
            checks2,
            edges,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn positions(&self) -> usize {
        self.positions
    }

    pub fn layer1(&self) -> &LayerParams {
        &self.layer1
    }

    pub fn layer2(&self) -> &LayerParams {
        &self.layer2
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Check nodes per position in `layer` (1 or 2).
    pub fn checks_per_position(&self, layer: u8) -> usize {
        if layer == 1 {
            self.checks1
        } else {
            self.checks2
        }
    }

    pub fn num_variables(&self) -> usize {
        self.m * self.positions
    }

    pub fn num_checks(&self) -> usize {
        (self.checks1 + self.checks2) * self.positions
    }

    pub fn variable_id(&self, pos: usize, idx: usize) -> usize {
        (pos - 1) * self.m + idx
    }

    pub fn variable_position(&self, id: usize) -> usize {
        id / self.m + 1
    }

    /// Layer-1 checks come first, then layer-2 checks, each ordered by
    /// position.
    pub fn check_id(&self, layer: u8, pos: usize, idx: usize) -> usize {
        if layer == 1 {
            (pos - 1) * self.checks1 + idx
        } else {
            self.checks1 * self.positions + (pos - 1) * self.checks2 + idx
        }
    }

    pub fn check_position(&self, id: usize) -> usize {
        let n1 = self.checks1 * self.positions;
        if id < n1 {
            id / self.checks1 + 1
        } else {
            (id - n1) / self.checks2 + 1
        }
    }

    /// `(layer-1 degree, layer-2 degree)` of every variable node.
    pub fn variable_degrees(&self) -> Vec<(usize, usize)> {
        let mut deg = vec![(0, 0); self.num_variables()];
        for e in &self.edges {
            let v = self.variable_id(e.vpos as usize, e.vidx as usize);
            if e.layer == 1 {
                deg[v].0 += 1;
            } else {
                deg[v].1 += 1;
            }
        }
        deg
    }

    /// Line-oriented text form: a header `M T dv1 dc1 lambda1 dv2 dc2 lambda2
    /// seed` followed by one `vpos vidx layer cpos cidx` line per edge.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(16 * self.edges.len() + 64);
        let _ = writeln!(
            s,
            "{} {} {} {} {} {} {} {} {}",
            self.m,
            self.positions,
            self.layer1.dv(),
            self.layer1.dc(),
            self.layer1.lambda(),
            self.layer2.dv(),
            self.layer2.dc(),
            self.layer2.lambda(),
            self.seed
        );
        for e in &self.edges {
            let _ = writeln!(s, "{} {} {} {} {}", e.vpos, e.vidx, e.layer, e.cpos, e.cidx);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
            tok.and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Parse {
                    line,
                    message: format!("missing or malformed {what}"),
                })
        }
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (n, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "empty graph file".into(),
        })?;
        let mut h = header.split_whitespace();
        let line = n + 1;
        let m: usize = field(h.next(), line, "M")?;
        let positions: usize = field(h.next(), line, "T")?;
        let dv1: usize = field(h.next(), line, "dv1")?;
        let dc1: usize = field(h.next(), line, "dc1")?;
        let lambda1: f64 = field(h.next(), line, "lambda1")?;
        let dv2: usize = field(h.next(), line, "dv2")?;
        let dc2: usize = field(h.next(), line, "dc2")?;
        let lambda2: f64 = field(h.next(), line, "lambda2")?;
        let seed: u64 = field(h.next(), line, "seed")?;
        let layer1 = LayerParams::new(dv1, dc1, lambda1)?;
        let layer2 = if dv2 == 0 {
            LayerParams::inactive(dc2, lambda2)?
        } else {
            LayerParams::new(dv2, dc2, lambda2)?
        };
        let mut edges = Vec::new();
        for (n, l) in lines {
            let mut it = l.split_whitespace();
            let line = n + 1;
            edges.push(Edge {
                vpos: field(it.next(), line, "vpos")?,
                vidx: field(it.next(), line, "vidx")?,
                layer: field(it.next(), line, "layer")?,
                cpos: field(it.next(), line, "cpos")?,
                cidx: field(it.next(), line, "cidx")?,
            });
        }
        Self::from_edges(m, positions, layer1, layer2, seed, edges)
    }

    /// Compressed adjacency in both directions. A (variable, check) pair
    /// that occurs an even number of times contributes nothing to the parity
    /// and is dropped; an odd count leaves a single edge.
    pub fn adjacency(&self) -> Adjacency {
        let nv = self.num_variables();
        let nc = self.num_checks();
        let mut v_off = vec![0u32; nv + 1];
        for e in &self.edges {
            v_off[self.variable_id(e.vpos as usize, e.vidx as usize) + 1] += 1;
        }
        for k in 0..nv {
            v_off[k + 1] += v_off[k];
        }
        let mut v_fill = v_off.clone();
        let mut raw = vec![0u32; self.edges.len()];
        for e in &self.edges {
            let v = self.variable_id(e.vpos as usize, e.vidx as usize);
            raw[v_fill[v] as usize] =
                self.check_id(e.layer, e.cpos as usize, e.cidx as usize) as u32;
            v_fill[v] += 1;
        }
        // sort each variable's short list and drop pairs
        let mut v_checks = Vec::with_capacity(raw.len());
        let mut c_off = vec![0u32; nc + 1];
        let mut start = 0;
        for v in 0..nv {
            let list = &mut raw[v_off[v] as usize..v_off[v + 1] as usize];
            list.sort_unstable();
            v_off[v] = start;
            for run in list.chunk_by(|a, b| a == b) {
                if run.len() % 2 == 1 {
                    v_checks.push(run[0]);
                    c_off[run[0] as usize + 1] += 1;
                }
            }
            start = v_checks.len() as u32;
        }
        v_off[nv] = start;
        for k in 0..nc {
            c_off[k + 1] += c_off[k];
        }
        let mut c_fill = c_off.clone();
        let mut c_vars = vec![0u32; v_checks.len()];
        for v in 0..nv {
            for &c in &v_checks[v_off[v] as usize..v_off[v + 1] as usize] {
                c_vars[c_fill[c as usize] as usize] = v as u32;
                c_fill[c as usize] += 1;
            }
        }
        let check_pos = (0..nc).map(|c| self.check_position(c) as u32).collect();
        Adjacency {
            m: self.m,
            v_off,
            v_checks,
            c_off,
            c_vars,
            check_pos,
        }
    }
}

/// Variable/check incidence in compressed sparse form.
#[derive(Clone, Debug)]
pub struct Adjacency {
    m: usize,
    v_off: Vec<u32>,
    v_checks: Vec<u32>,
    c_off: Vec<u32>,
    c_vars: Vec<u32>,
    check_pos: Vec<u32>,
}

impl Adjacency {
    pub fn checks_of(&self, v: usize) -> &[u32] {
        &self.v_checks[self.v_off[v] as usize..self.v_off[v + 1] as usize]
    }

    pub fn vars_of(&self, c: usize) -> &[u32] {
        &self.c_vars[self.c_off[c] as usize..self.c_off[c + 1] as usize]
    }

    pub fn num_checks(&self) -> usize {
        self.check_pos.len()
    }

    pub fn num_variables(&self) -> usize {
        self.v_off.len() - 1
    }

    fn check_position(&self, c: usize) -> usize {
        self.check_pos[c] as usize
    }

    fn variable_position(&self, v: usize) -> usize {
        v / self.m + 1
    }
}

/// How layer edges are spread over the check nodes of their target position.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CheckAssignment {
    /// Each edge picks one of the position's check nodes uniformly; check
    /// degrees are random with mean `d_c`.
    Uniform,
    /// The edges landing on a position are shuffled and dealt round-robin,
    /// so check degrees at a position differ by at most one.
    #[default]
    Balanced,
}

/// Attempts at avoiding a repeated (variable, check) pair before accepting
/// it. Only tiny graphs ever run out.
const MAX_REDRAWS: usize = 256;

/// Draws the edges of one layer. For each variable node in position order,
/// each edge gets an offset from the geometric profile, redrawn while it
/// would land past the last position. Check indices are then assigned per
/// `assignment`, avoiding repeated (variable, check) pairs where the
/// position has room for that.
#[allow(clippy::too_many_arguments)]
fn draw_layer(
    rng: &mut ChaCha8Rng,
    layer: &LayerParams,
    layer_id: u8,
    m: usize,
    positions: usize,
    checks: usize,
    assignment: CheckAssignment,
    edges: &mut Vec<Edge>,
) {
    if !layer.is_active() {
        return;
    }
    let dv = layer.dv();
    // ⌊Exp(λ)⌋ has P(k ≥ n) = e^{-λn}, the coupling profile
    let offsets = Exp::new(layer.lambda()).expect("positive rate");
    let start = edges.len();
    for vpos in 1..=positions {
        let room = (positions - vpos) as u64;
        for vidx in 0..m {
            for _ in 0..dv {
                let k = loop {
                    let k = offsets.sample(rng).floor() as u64;
                    if k <= room {
                        break k;
                    }
                };
                edges.push(Edge {
                    vpos: vpos as u32,
                    vidx: vidx as u32,
                    layer: layer_id,
                    cpos: (vpos as u64 + k) as u32,
                    cidx: 0,
                });
            }
        }
    }
    let layer_edges = &mut edges[start..];
    // edges of one variable are the `dv` consecutive entries of its block
    let clashes = |edges: &[Edge], e: usize, cidx: u32| {
        let block = e / dv * dv;
        (block..block + dv)
            .any(|f| f != e && edges[f].cpos == edges[e].cpos && edges[f].cidx == cidx)
    };
    match assignment {
        CheckAssignment::Uniform => {
            for e in 0..layer_edges.len() {
                layer_edges[e].cidx = u32::MAX;
                let mut c = rng.random_range(0..checks) as u32;
                for _ in 0..MAX_REDRAWS {
                    if !clashes(layer_edges, e, c) {
                        break;
                    }
                    c = rng.random_range(0..checks) as u32;
                }
                layer_edges[e].cidx = c;
            }
        }
        CheckAssignment::Balanced => {
            let mut by_position: Vec<Vec<u32>> = vec![Vec::new(); positions + 1];
            for (e, edge) in layer_edges.iter().enumerate() {
                by_position[edge.cpos as usize].push(e as u32);
            }
            for group in by_position.iter_mut() {
                group.shuffle(rng);
                for (k, &e) in group.iter().enumerate() {
                    layer_edges[e as usize].cidx = (k % checks) as u32;
                }
                // Repeated (variable, check) pairs: swap with another edge of
                // the same position until neither side clashes.
                for a in 0..group.len() {
                    let e = group[a] as usize;
                    if !clashes(layer_edges, e, layer_edges[e].cidx) {
                        continue;
                    }
                    for _ in 0..MAX_REDRAWS {
                        let f = group[rng.random_range(0..group.len())] as usize;
                        let (ce, cf) = (layer_edges[e].cidx, layer_edges[f].cidx);
                        if ce != cf && !clashes(layer_edges, e, cf) && !clashes(layer_edges, f, ce)
                        {
                            layer_edges[e].cidx = cf;
                            layer_edges[f].cidx = ce;
                            break;
                        }
                    }
                }
            }
        }
    }
}

fn check_size(m: usize, positions: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::invalid("M", "must be at least 1"));
    }
    if positions == 0 {
        return Err(Error::invalid("T", "must be at least 1"));
    }
    if m.checked_mul(positions)
        .is_none_or(|n| n > u32::MAX as usize / 2)
    {
        return Err(Error::invalid("M*T", "graph too large"));
    }
    Ok(())
}

/// Single-layer anytime SC-LDPC graph.
pub fn build_anytime_graph(
    layer: &LayerParams,
    m: usize,
    positions: usize,
    seed: u64,
) -> Result<TannerGraph> {
    let cfg = BilayerConfig::single_layer(*layer, 0.0)?;
    build_bilayer_graph(&cfg, m, positions, seed)
}

/// Bilayer graph: all layer-1 edges are drawn first, then the layer-2 edges,
/// from one RNG seeded with `seed`. With an inactive layer 2 the result is
/// the single-layer graph for the same seed.
pub fn build_bilayer_graph(
    cfg: &BilayerConfig,
    m: usize,
    positions: usize,
    seed: u64,
) -> Result<TannerGraph> {
    build_bilayer_graph_with(cfg, m, positions, seed, CheckAssignment::default())
}

pub fn build_bilayer_graph_with(
    cfg: &BilayerConfig,
    m: usize,
    positions: usize,
    seed: u64,
    assignment: CheckAssignment,
) -> Result<TannerGraph> {
    check_size(m, positions)?;
    let checks1 = checks_for(&cfg.layer1, m, "layer-1 checks per position")?;
    let checks2 = checks_for(&cfg.layer2, m, "layer-2 checks per position")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(m * positions * (cfg.layer1.dv() + cfg.layer2.dv()));
    draw_layer(
        &mut rng,
        &cfg.layer1,
        1,
        m,
        positions,
        checks1,
        assignment,
        &mut edges,
    );
    draw_layer(
        &mut rng,
        &cfg.layer2,
        2,
        m,
        positions,
        checks2,
        assignment,
        &mut edges,
    );
    Ok(TannerGraph {
        m,
        positions,
        layer1: cfg.layer1,
        layer2: cfg.layer2,
        seed,
        checks1,
        checks2,
        edges,
    })
}

/// Peels the graph as seen at decoding time `t`: variables and checks at
/// positions `≤ t` only. Returns the ids of variables that stay erased, in
/// increasing order.
///
/// Repeated passes over all received checks; each pass resolves every
/// variable that is the single unknown neighbor of some check.
pub fn peel_decode(graph: &TannerGraph, erasures: &[bool], t: usize) -> Vec<usize> {
    assert_eq!(erasures.len(), graph.num_variables());
    let adj = graph.adjacency();
    let t = t.min(graph.positions());
    let received_vars = t * graph.m();
    let mut unknown: Vec<bool> = erasures[..received_vars].to_vec();
    let active: Vec<usize> = (0..adj.num_checks())
        .filter(|&c| adj.check_position(c) <= t)
        .collect();
    loop {
        let mut progress = false;
        for &c in &active {
            let mut missing = None;
            let mut count = 0;
            for &v in adj.vars_of(c) {
                if unknown[v as usize] {
                    count += 1;
                    missing = Some(v as usize);
                }
            }
            if count == 1 {
                unknown[missing.unwrap()] = false;
                progress = true;
            }
        }
        if !progress {
            break;
        }
    }
    unknown
        .iter()
        .enumerate()
        .filter_map(|(v, u)| u.then_some(v))
        .collect()
}

/// Peeling decoder that advances with the decoding time, reusing all work
/// from earlier times.
///
/// Every check keeps the number of unknown neighbors and the XOR of their
/// ids, so a check with one unknown neighbor names it directly.
pub struct IncrementalPeeler<'a> {
    adj: &'a Adjacency,
    unknown: Vec<bool>,
    count: Vec<u32>,
    xor: Vec<u32>,
    per_position: Vec<u32>,
    checks_by_position: Vec<Vec<u32>>,
    queue: Vec<u32>,
    t: usize,
}

impl<'a> IncrementalPeeler<'a> {
    pub fn new(adj: &'a Adjacency, positions: usize, erasures: &[bool]) -> Self {
        assert_eq!(erasures.len(), adj.num_variables());
        let nc = adj.num_checks();
        let mut count = vec![0u32; nc];
        let mut xor = vec![0u32; nc];
        let mut per_position = vec![0u32; positions + 1];
        for (v, &erased) in erasures.iter().enumerate() {
            if erased {
                per_position[adj.variable_position(v)] += 1;
                for &c in adj.checks_of(v) {
                    count[c as usize] += 1;
                    xor[c as usize] ^= v as u32;
                }
            }
        }
        let mut checks_by_position = vec![Vec::new(); positions + 1];
        for c in 0..nc {
            checks_by_position[adj.check_position(c)].push(c as u32);
        }
        IncrementalPeeler {
            adj,
            unknown: erasures.to_vec(),
            count,
            xor,
            per_position,
            checks_by_position,
            queue: Vec::new(),
            t: 0,
        }
    }

    /// Receives positions up to `t` and peels to exhaustion.
    pub fn advance_to(&mut self, t: usize) {
        let t = t.min(self.checks_by_position.len() - 1);
        while self.t < t {
            self.t += 1;
            for &c in &self.checks_by_position[self.t] {
                if self.count[c as usize] == 1 {
                    self.queue.push(c);
                }
            }
        }
        while let Some(c) = self.queue.pop() {
            let c = c as usize;
            if self.count[c] != 1 {
                continue;
            }
            let v = self.xor[c] as usize;
            self.unknown[v] = false;
            self.per_position[self.adj.variable_position(v)] -= 1;
            for &d in self.adj.checks_of(v) {
                let d = d as usize;
                self.count[d] -= 1;
                self.xor[d] ^= v as u32;
                if self.count[d] == 1 && self.adj.check_position(d) <= self.t {
                    self.queue.push(d as u32);
                }
            }
        }
    }

    pub fn time(&self) -> usize {
        self.t
    }

    /// Variables at `pos` that are still erased.
    pub fn residual_at(&self, pos: usize) -> usize {
        self.per_position[pos] as usize
    }

    /// Ids of erased variables at positions `≤ t`, in increasing order.
    pub fn residual_set(&self) -> Vec<usize> {
        self.unknown
            .iter()
            .enumerate()
            .take_while(|(v, _)| self.adj.variable_position(*v) <= self.t)
            .filter_map(|(v, u)| u.then_some(v))
            .collect()
    }
}

/// Draws i.i.d. erasures with probability `eps` for every variable of the
/// graph, in id order.
pub fn draw_erasures<R: Rng + ?Sized>(rng: &mut R, n: usize, eps: f64) -> Vec<bool> {
    (0..n).map(|_| rng.random_bool(eps)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimSettings {
    /// Variable nodes per position.
    pub m: usize,
    /// Stream length in positions; `None` picks [`default_positions`].
    pub positions: Option<usize>,
    /// Erasure-free positions placed before the stream, so the first
    /// messages see checks of full degree whose early neighbors are already
    /// known. `None` picks [`default_known_prefix`]; `Some(0)` starts the
    /// graph cold.
    pub known_prefix: Option<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Message indices to track.
    pub messages: Vec<usize>,
    pub d_max: usize,
    pub assignment: CheckAssignment,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            m: 1000,
            positions: None,
            known_prefix: None,
            trials: 200,
            seed: 7,
            messages: vec![20],
            d_max: 10,
            assignment: CheckAssignment::default(),
        }
    }
}

/// Smallest decay rate among the active layers.
fn slowest_lambda(cfg: &BilayerConfig) -> f64 {
    if cfg.layer2.is_active() {
        cfg.layer1.lambda().min(cfg.layer2.lambda())
    } else {
        cfg.layer1.lambda()
    }
}

/// Prefix long enough that less than `e^{-8}` of a check's edge mass reaches
/// past it.
pub fn default_known_prefix(cfg: &BilayerConfig) -> usize {
    (8.0 / slowest_lambda(cfg)).ceil() as usize
}

/// Last decoding time needed plus enough positions that truncating the
/// offset profile at the horizon moves less than `e^{-8}` of any tracked
/// variable's edge mass.
pub fn default_positions(cfg: &BilayerConfig, last_time: usize) -> usize {
    last_time + (8.0 / slowest_lambda(cfg)).ceil() as usize
}

const Z_95: f64 = 1.959_963_984_540_054;

/// Empirical `P_e(i, i + d)` over `trials` independent graphs and channel
/// realizations.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalCurve {
    pub message_index: usize,
    pub trials: usize,
    /// Variables per trial at the message position.
    pub m: usize,
    /// Erased variables summed over trials, per delay.
    pub errors: Vec<u64>,
    /// `errors / (trials·m)`.
    pub pe_hat: Vec<f64>,
    /// 95% normal-approximation half-width of `pe_hat`.
    pub ci_halfwidth: Vec<f64>,
}

impl EmpiricalCurve {
    pub fn d_max(&self) -> usize {
        self.pe_hat.len().saturating_sub(1)
    }
}

/// Runs `settings.trials` independent streams. Trial `k` draws from the
/// ChaCha stream `k` of `settings.seed`: first a graph seed, then the
/// erasure pattern. Results do not depend on the thread count.
///
/// The half-width treats per-trial erased fractions as the i.i.d. samples,
/// since erasures within one graph are correlated. With a single trial it
/// falls back to the binomial variance over the `m` variables.
pub fn simulate_relay_stream(
    cfg: &BilayerConfig,
    settings: &SimSettings,
) -> Result<Vec<EmpiricalCurve>> {
    if settings.trials == 0 {
        return Err(Error::invalid("trials", "must be at least 1"));
    }
    if settings.messages.is_empty() || settings.messages.contains(&0) {
        return Err(Error::invalid(
            "messages",
            "need at least one message index >= 1",
        ));
    }
    let last_time = settings.messages.iter().max().unwrap() + settings.d_max;
    let positions = settings
        .positions
        .unwrap_or_else(|| default_positions(cfg, last_time));
    if positions < last_time {
        return Err(Error::invalid(
            "T",
            format!("{positions} positions cannot reach decoding time {last_time}"),
        ));
    }
    let prefix = settings
        .known_prefix
        .unwrap_or_else(|| default_known_prefix(cfg));
    check_size(settings.m, prefix + positions)?;
    checks_for(&cfg.layer1, settings.m, "layer-1 checks per position")?;
    checks_for(&cfg.layer2, settings.m, "layer-2 checks per position")?;

    let per_trial: Vec<Vec<Vec<u32>>> = (0..settings.trials)
        .into_par_iter()
        .map(|trial| run_trial(cfg, settings, prefix, positions, trial as u64))
        .collect::<Result<_>>()?;

    let n = settings.trials as f64;
    let m = settings.m as f64;
    Ok(settings
        .messages
        .iter()
        .enumerate()
        .map(|(mi, &message_index)| {
            let mut errors = vec![0u64; settings.d_max + 1];
            let mut pe_hat = Vec::with_capacity(settings.d_max + 1);
            let mut ci_halfwidth = Vec::with_capacity(settings.d_max + 1);
            for d in 0..=settings.d_max {
                let total: u64 = per_trial.iter().map(|t| t[mi][d] as u64).sum();
                errors[d] = total;
                let mean = total as f64 / (n * m);
                let var = if settings.trials > 1 {
                    per_trial
                        .iter()
                        .map(|t| (t[mi][d] as f64 / m - mean).powi(2))
                        .sum::<f64>()
                        / (n - 1.0)
                } else {
                    mean * (1.0 - mean) / m
                };
                pe_hat.push(mean);
                ci_halfwidth.push(Z_95 * (var / n).sqrt());
            }
            EmpiricalCurve {
                message_index,
                trials: settings.trials,
                m: settings.m,
                errors,
                pe_hat,
                ci_halfwidth,
            }
        })
        .collect())
}

/// Residual erasure counts `[message][delay]` for one trial. Stream
/// position `p` is graph position `prefix + p`.
fn run_trial(
    cfg: &BilayerConfig,
    settings: &SimSettings,
    prefix: usize,
    positions: usize,
    trial: u64,
) -> Result<Vec<Vec<u32>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    rng.set_stream(trial);
    let graph_seed = rng.next_u64();
    let total = prefix + positions;
    let graph = build_bilayer_graph_with(cfg, settings.m, total, graph_seed, settings.assignment)?;
    let adj = graph.adjacency();
    let mut erasures = vec![false; prefix * settings.m];
    erasures.extend(draw_erasures(&mut rng, positions * settings.m, cfg.eps_sd));
    let mut peeler = IncrementalPeeler::new(&adj, total, &erasures);

    let mut counts = vec![vec![0u32; settings.d_max + 1]; settings.messages.len()];
    let first = *settings.messages.iter().min().unwrap();
    let last = settings.messages.iter().max().unwrap() + settings.d_max;
    for t in first..=last {
        peeler.advance_to(prefix + t);
        for (mi, &i) in settings.messages.iter().enumerate() {
            if t >= i && t - i <= settings.d_max {
                counts[mi][t - i] = peeler.residual_at(prefix + i) as u32;
            }
        }
    }
    Ok(counts)
}
