//! Model orders, coefficients, stationarity and the VAR representation.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{GnarError, Result};
use crate::network::Topology;
use crate::partition::CommunityPartition;

/// Coefficient-sharing regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// One `α_k`, `β_kr` set shared by all nodes.
    Global,
    /// One set per community, neighbourhoods restricted to the community.
    Community,
    /// Node-specific `α_{i,k}`, stage coefficients `β_kr` shared by all nodes.
    Local,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Global => "global",
            Variant::Community => "community",
            Variant::Local => "local",
        }
    }
}

impl FromStr for Variant {
    type Err = GnarError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "global" => Ok(Variant::Global),
            "community" => Ok(Variant::Community),
            "local" => Ok(Variant::Local),
            other => Err(GnarError::InvalidOrder(format!("unknown variant {other:?}"))),
        }
    }
}

/// Lag and stage orders. Each group holds `[s_1, .., s_p]`; its length is the
/// group's maximum lag. Global and local orders have exactly one group.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GnarOrder {
    variant: Variant,
    stages: Vec<Vec<usize>>,
}

impl GnarOrder {
    pub fn global(stages: Vec<usize>) -> Result<Self> {
        Self::build(Variant::Global, vec![stages])
    }

    pub fn local(stages: Vec<usize>) -> Result<Self> {
        Self::build(Variant::Local, vec![stages])
    }

    /// `[s_k(c)]` for each community `c` in partition order.
    pub fn community(stages: Vec<Vec<usize>>) -> Result<Self> {
        Self::build(Variant::Community, stages)
    }

    fn build(variant: Variant, stages: Vec<Vec<usize>>) -> Result<Self> {
        if stages.is_empty() {
            return Err(GnarError::InvalidOrder("at least one community required".into()));
        }
        if let Some(g) = stages.iter().position(Vec::is_empty) {
            return Err(GnarError::InvalidOrder(format!(
                "group {} has maximum lag 0; every lag order must be at least 1",
                g + 1
            )));
        }
        Ok(Self { variant, stages })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn group_count(&self) -> usize {
        self.stages.len()
    }

    /// `p_c` (or `p` for single-group orders).
    pub fn lags(&self, group: usize) -> usize {
        self.stages[group].len()
    }

    pub fn stage_orders(&self, group: usize) -> &[usize] {
        &self.stages[group]
    }

    /// Global maximum lag `p = max(p_c)`.
    pub fn max_lag(&self) -> usize {
        self.stages.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `r*`, the deepest stage used at any lag.
    pub fn max_stage(&self) -> usize {
        self.stages.iter().flatten().copied().max().unwrap_or(0)
    }

    /// Stage order at `lag` (1-based) for `group`, zero past the group's lag order.
    pub fn stage_at(&self, group: usize, lag: usize) -> usize {
        self.stages[group].get(lag - 1).copied().unwrap_or(0)
    }

    pub fn check_stages(&self, topo: &Topology) -> Result<()> {
        topo.check_stage(self.max_stage())
    }

    /// Checks that a partition is compatible with this order on `nodes` nodes.
    pub fn check_partition(&self, part: &CommunityPartition, nodes: usize) -> Result<()> {
        if part.node_count() != nodes {
            return Err(GnarError::DimensionMismatch(format!(
                "partition covers {} nodes, network has {}",
                part.node_count(),
                nodes
            )));
        }
        if self.variant == Variant::Community && part.count() != self.group_count() {
            return Err(GnarError::DimensionMismatch(format!(
                "order has {} communities, partition has {}",
                self.group_count(),
                part.count()
            )));
        }
        Ok(())
    }

    /// Parameters in `θ` order. `nodes` only matters for the local variant.
    pub fn terms(&self, nodes: usize) -> Vec<Term> {
        let mut terms = Vec::new();
        match self.variant {
            Variant::Global | Variant::Community => {
                for (g, stages) in self.stages.iter().enumerate() {
                    let scope = if self.variant == Variant::Global {
                        Scope::Global
                    } else {
                        Scope::Community(g)
                    };
                    for (k, &s) in stages.iter().enumerate() {
                        terms.push(Term::alpha(scope, k + 1));
                        terms.extend((1..=s).map(|r| Term::beta(scope, k + 1, r)));
                    }
                }
            }
            Variant::Local => {
                for (k, &s) in self.stages[0].iter().enumerate() {
                    terms.extend((0..nodes).map(|i| Term::alpha(Scope::Node(i), k + 1)));
                    terms.extend((1..=s).map(|r| Term::beta(Scope::Global, k + 1, r)));
                }
            }
        }
        terms
    }

    pub fn parameter_count(&self, nodes: usize) -> usize {
        let betas: usize = self.stages.iter().flatten().sum();
        let alphas = match self.variant {
            Variant::Local => nodes * self.stages[0].len(),
            _ => self.stages.iter().map(Vec::len).sum(),
        };
        alphas + betas
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, values: &[usize]) -> fmt::Result {
    write!(f, "[")?;
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{v}")?;
    }
    write!(f, "]")
}

impl fmt::Display for GnarOrder {
    /// `global:p;[s..]`, `community:[p_1,..];{[s..],..}` or `local:p;[s..]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.variant.as_str())?;
        match self.variant {
            Variant::Global | Variant::Local => {
                write!(f, "{};", self.stages[0].len())?;
                write_list(f, &self.stages[0])
            }
            Variant::Community => {
                let lags: Vec<usize> = self.stages.iter().map(Vec::len).collect();
                write_list(f, &lags)?;
                write!(f, ";{{")?;
                for (i, s) in self.stages.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write_list(f, s)?;
                }
                write!(f, "}}")
            }
        }
    }
}

fn parse_list(s: &str) -> Result<Vec<usize>> {
    let inner = s
        .trim()
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| GnarError::InvalidOrder(format!("expected a bracketed list, got {s:?}")))?;
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| GnarError::InvalidOrder(format!("{v:?} is not a nonnegative integer")))
        })
        .collect()
}

/// Splits `[a],[b,c]` at top-level commas.
fn split_lists(s: &str) -> Result<Vec<&str>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
        if depth < 0 || depth > 1 {
            return Err(GnarError::InvalidOrder(format!("unbalanced brackets in {s:?}")));
        }
    }
    if depth != 0 {
        return Err(GnarError::InvalidOrder(format!("unbalanced brackets in {s:?}")));
    }
    out.push(&s[start..]);
    Ok(out)
}

impl FromStr for GnarOrder {
    type Err = GnarError;

    /// A single stage list in a community order is shared by every community
    /// when all lag orders equal its length, so `community:[2,2,2];{[1,0]}`
    /// is accepted.
    fn from_str(s: &str) -> Result<Self> {
        let (variant, rest) = s
            .split_once(':')
            .ok_or_else(|| GnarError::InvalidOrder(format!("missing variant prefix in {s:?}")))?;
        let variant: Variant = variant.parse()?;
        let (lags, stages) = rest
            .split_once(';')
            .ok_or_else(|| GnarError::InvalidOrder(format!("missing ';' in {s:?}")))?;
        match variant {
            Variant::Global | Variant::Local => {
                let p: usize = lags
                    .trim()
                    .parse()
                    .map_err(|_| GnarError::InvalidOrder(format!("bad lag order {lags:?}")))?;
                let stages = parse_list(stages)?;
                if stages.len() != p {
                    return Err(GnarError::InvalidOrder(format!(
                        "lag order {p} but {} stage entries",
                        stages.len()
                    )));
                }
                Self::build(variant, vec![stages])
            }
            Variant::Community => {
                let lags = parse_list(lags)?;
                let body = stages
                    .trim()
                    .strip_prefix('{')
                    .and_then(|r| r.strip_suffix('}'))
                    .ok_or_else(|| {
                        GnarError::InvalidOrder(format!("expected {{...}} stage block, got {stages:?}"))
                    })?;
                let lists = split_lists(body)?
                    .into_iter()
                    .map(parse_list)
                    .collect::<Result<Vec<_>>>()?;
                let lists = if lists.len() == 1 && lags.len() > 1 {
                    vec![lists[0].clone(); lags.len()]
                } else {
                    lists
                };
                if lists.len() != lags.len() {
                    return Err(GnarError::InvalidOrder(format!(
                        "{} lag orders but {} stage lists",
                        lags.len(),
                        lists.len()
                    )));
                }
                for (c, (p, s)) in lags.iter().zip(&lists).enumerate() {
                    if *p != s.len() {
                        return Err(GnarError::InvalidOrder(format!(
                            "community {} has lag order {p} but {} stage entries",
                            c + 1,
                            s.len()
                        )));
                    }
                }
                Self::build(variant, lists)
            }
        }
    }
}

/// Which nodes a coefficient applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scope {
    Global,
    Community(usize),
    Node(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TermKind {
    Alpha,
    /// Neighbourhood term at the given stage.
    Beta(usize),
}

/// One column of the design matrix / one entry of `θ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Term {
    pub scope: Scope,
    pub lag: usize,
    pub kind: TermKind,
}

impl Term {
    pub fn alpha(scope: Scope, lag: usize) -> Self {
        Self {
            scope,
            lag,
            kind: TermKind::Alpha,
        }
    }

    pub fn beta(scope: Scope, lag: usize, stage: usize) -> Self {
        Self {
            scope,
            lag,
            kind: TermKind::Beta(stage),
        }
    }

    /// `alpha_k_c`, `beta_k_r_c`, `alpha_k`, `beta_k_r`, or `alpha_node<i>_lag<k>`.
    pub fn name(&self) -> String {
        match (self.scope, self.kind) {
            (Scope::Global, TermKind::Alpha) => format!("alpha_{}", self.lag),
            (Scope::Global, TermKind::Beta(r)) => format!("beta_{}_{}", self.lag, r),
            (Scope::Community(c), TermKind::Alpha) => format!("alpha_{}_{}", self.lag, c + 1),
            (Scope::Community(c), TermKind::Beta(r)) => {
                format!("beta_{}_{}_{}", self.lag, r, c + 1)
            }
            (Scope::Node(i), TermKind::Alpha) => format!("alpha_node{}_lag{}", i + 1, self.lag),
            (Scope::Node(i), TermKind::Beta(r)) => {
                format!("beta_node{}_lag{}_{}", i + 1, self.lag, r)
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// `α_k` and `β_{k,r}` for one group; `alpha[k-1]`, `beta[k-1][r-1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagCoefficients {
    pub alpha: Vec<f64>,
    pub beta: Vec<Vec<f64>>,
}

impl LagCoefficients {
    pub fn zeros(stages: &[usize]) -> Self {
        Self {
            alpha: vec![0.0; stages.len()],
            beta: stages.iter().map(|&s| vec![0.0; s]).collect(),
        }
    }

    fn abs_sum(&self) -> f64 {
        self.alpha.iter().map(|a| a.abs()).sum::<f64>()
            + self.beta.iter().flatten().map(|b| b.abs()).sum::<f64>()
    }

    fn matches(&self, stages: &[usize]) -> bool {
        self.alpha.len() == stages.len()
            && self.beta.len() == stages.len()
            && self.beta.iter().zip(stages).all(|(b, &s)| b.len() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Coefficients {
    Global(LagCoefficients),
    Community(Vec<LagCoefficients>),
    /// `alpha[i][k-1]` per node, `beta[k-1][r-1]` shared.
    Local {
        alpha: Vec<Vec<f64>>,
        beta: Vec<Vec<f64>>,
    },
}

/// Per-group absolute coefficient sums and the resulting verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct StationarityReport {
    /// One entry per community (global: one; local: one per node).
    pub sums: Vec<f64>,
    pub stationary: bool,
    /// `1 - max(sums)`.
    pub margin: f64,
}

impl StationarityReport {
    fn from_sums(sums: Vec<f64>) -> Self {
        let max = sums.iter().copied().fold(0.0, f64::max);
        Self {
            stationary: sums.iter().all(|&s| s < 1.0),
            margin: 1.0 - max,
            sums,
        }
    }
}

/// `Φ_1 .. Φ_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct VarCoefficients(pub Vec<DMatrix<f64>>);

impl VarCoefficients {
    pub fn order(&self) -> usize {
        self.0.len()
    }

    /// `Σ_k Φ_k X_{t-k}`; `history[0]` is `X_{t-1}`, `history[1]` is `X_{t-2}`, ...
    pub fn predict(&self, history: &[&DVector<f64>]) -> DVector<f64> {
        let d = self.0.first().map_or(0, |m| m.nrows());
        let mut out = DVector::zeros(d);
        for (phi, x) in self.0.iter().zip(history) {
            out.gemv(1.0, phi, x, 1.0);
        }
        out
    }

    /// Spectral radius of the companion matrix, as the Gelfand limit
    /// `‖C^k‖^{1/k}` at `k = 2^48` by repeated normalised squaring. Never below
    /// the true radius.
    pub fn companion_spectral_radius(&self) -> f64 {
        let p = self.0.len();
        if p == 0 {
            return 0.0;
        }
        let d = self.0[0].nrows();
        let mut comp = DMatrix::zeros(d * p, d * p);
        for (k, phi) in self.0.iter().enumerate() {
            comp.view_mut((0, k * d), (d, d)).copy_from(phi);
        }
        for i in d..d * p {
            comp[(i, i - d)] = 1.0;
        }
        let inf_norm = |m: &DMatrix<f64>| m.row_iter().map(|r| r.abs().sum()).fold(0.0, f64::max);
        // log ‖C^{2^m}‖ / 2^m = Σ_{j<=m} 2^{-j} log s_j
        let mut log_rho = 0.0;
        let mut weight = 1.0;
        for _ in 0..=48 {
            let s = inf_norm(&comp);
            if s == 0.0 {
                return 0.0;
            }
            log_rho += weight * s.ln();
            comp /= s;
            comp = &comp * &comp;
            weight /= 2.0;
        }
        log_rho.exp()
    }
}

/// A fully specified GNAR model.
#[derive(Debug, Clone, PartialEq)]
pub struct GnarModel {
    order: GnarOrder,
    coefficients: Coefficients,
    noise_sd: f64,
}

impl GnarModel {
    pub fn new(order: GnarOrder, coefficients: Coefficients, noise_sd: f64) -> Result<Self> {
        if !(noise_sd.is_finite() && noise_sd > 0.0) {
            return Err(GnarError::InvalidNoiseSd(noise_sd));
        }
        let ok = match (&coefficients, order.variant()) {
            (Coefficients::Global(c), Variant::Global) => c.matches(order.stage_orders(0)),
            (Coefficients::Community(cs), Variant::Community) => {
                cs.len() == order.group_count()
                    && cs.iter().enumerate().all(|(g, c)| c.matches(order.stage_orders(g)))
            }
            (Coefficients::Local { alpha, beta }, Variant::Local) => {
                let stages = order.stage_orders(0);
                !alpha.is_empty()
                    && alpha.iter().all(|a| a.len() == stages.len())
                    && beta.len() == stages.len()
                    && beta.iter().zip(stages).all(|(b, &s)| b.len() == s)
            }
            _ => false,
        };
        if !ok {
            return Err(GnarError::CoefficientMismatch(format!(
                "coefficient layout does not match order {order}"
            )));
        }
        Ok(Self {
            order,
            coefficients,
            noise_sd,
        })
    }

    /// Builds a model from `θ` in [`GnarOrder::terms`] order.
    pub fn from_parameters(
        order: GnarOrder,
        theta: &[f64],
        nodes: usize,
        noise_sd: f64,
    ) -> Result<Self> {
        let terms = order.terms(nodes);
        if terms.len() != theta.len() {
            return Err(GnarError::CoefficientMismatch(format!(
                "order {order} has {} parameters, got {}",
                terms.len(),
                theta.len()
            )));
        }
        let coefficients = match order.variant() {
            Variant::Global | Variant::Community => {
                let mut groups: Vec<LagCoefficients> = (0..order.group_count())
                    .map(|g| LagCoefficients::zeros(order.stage_orders(g)))
                    .collect();
                for (term, &v) in terms.iter().zip(theta) {
                    let g = match term.scope {
                        Scope::Community(c) => c,
                        _ => 0,
                    };
                    match term.kind {
                        TermKind::Alpha => groups[g].alpha[term.lag - 1] = v,
                        TermKind::Beta(r) => groups[g].beta[term.lag - 1][r - 1] = v,
                    }
                }
                if order.variant() == Variant::Global {
                    Coefficients::Global(groups.remove(0))
                } else {
                    Coefficients::Community(groups)
                }
            }
            Variant::Local => {
                let stages = order.stage_orders(0);
                let mut alpha = vec![vec![0.0; stages.len()]; nodes];
                let mut beta: Vec<Vec<f64>> = stages.iter().map(|&s| vec![0.0; s]).collect();
                for (term, &v) in terms.iter().zip(theta) {
                    match (term.scope, term.kind) {
                        (Scope::Node(i), TermKind::Alpha) => alpha[i][term.lag - 1] = v,
                        (_, TermKind::Beta(r)) => beta[term.lag - 1][r - 1] = v,
                        _ => unreachable!("local terms are node alphas or shared betas"),
                    }
                }
                Coefficients::Local { alpha, beta }
            }
        };
        Self::new(order, coefficients, noise_sd)
    }

    /// `θ` in [`GnarOrder::terms`] order.
    pub fn parameters(&self) -> Vec<f64> {
        match &self.coefficients {
            Coefficients::Global(c) => flatten_lags(c),
            Coefficients::Community(cs) => cs.iter().flat_map(flatten_lags).collect(),
            Coefficients::Local { alpha, beta } => {
                let mut out = Vec::new();
                for (k, b) in beta.iter().enumerate() {
                    out.extend(alpha.iter().map(|a| a[k]));
                    out.extend(b);
                }
                out
            }
        }
    }

    pub fn order(&self) -> &GnarOrder {
        &self.order
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coefficients
    }

    pub fn noise_sd(&self) -> f64 {
        self.noise_sd
    }

    pub fn with_noise_sd(&self, noise_sd: f64) -> Result<Self> {
        Self::new(self.order.clone(), self.coefficients.clone(), noise_sd)
    }

    /// Node count implied by the coefficients, if any (local models only).
    pub fn local_node_count(&self) -> Option<usize> {
        match &self.coefficients {
            Coefficients::Local { alpha, .. } => Some(alpha.len()),
            _ => None,
        }
    }

    /// Sufficient condition: every group's `Σ_k (|α_k| + Σ_r |β_kr|)` is below 1.
    pub fn stationarity(&self) -> StationarityReport {
        let sums = match &self.coefficients {
            Coefficients::Global(c) => vec![c.abs_sum()],
            Coefficients::Community(cs) => cs.iter().map(LagCoefficients::abs_sum).collect(),
            Coefficients::Local { alpha, beta } => {
                let shared: f64 = beta.iter().flatten().map(|b| b.abs()).sum();
                alpha
                    .iter()
                    .map(|a| a.iter().map(|x| x.abs()).sum::<f64>() + shared)
                    .collect()
            }
        };
        StationarityReport::from_sums(sums)
    }

    /// `Φ_k = Σ_c [diag(α_{k,c} ξ_c) + Σ_r β_{k,r,c} (W_c ⊙ S_r)]`, zero-padded to `p = max(p_c)`.
    pub fn to_var(&self, topo: &Topology, part: &CommunityPartition) -> Result<VarCoefficients> {
        let d = topo.node_count();
        self.order.check_stages(topo)?;
        self.order.check_partition(part, d)?;
        let p = self.order.max_lag();
        let mut phis = vec![DMatrix::zeros(d, d); p];
        match &self.coefficients {
            Coefficients::Global(c) => {
                for (k, phi) in phis.iter_mut().enumerate() {
                    phi.fill_diagonal(c.alpha[k]);
                    for (r, &b) in c.beta[k].iter().enumerate() {
                        *phi += topo.weighted_stage(r + 1)? * b;
                    }
                }
            }
            Coefficients::Community(cs) => {
                for (g, c) in cs.iter().enumerate() {
                    for (k, phi) in phis.iter_mut().enumerate().take(c.alpha.len()) {
                        for &i in part.members(g) {
                            phi[(i, i)] += c.alpha[k];
                        }
                        for (r, &b) in c.beta[k].iter().enumerate() {
                            *phi += topo.community_stage(r + 1, part, g)? * b;
                        }
                    }
                }
            }
            Coefficients::Local { alpha, beta } => {
                if alpha.len() != d {
                    return Err(GnarError::DimensionMismatch(format!(
                        "local model has {} nodes, network has {d}",
                        alpha.len()
                    )));
                }
                for (k, phi) in phis.iter_mut().enumerate() {
                    for (i, a) in alpha.iter().enumerate() {
                        phi[(i, i)] = a[k];
                    }
                    for (r, &b) in beta[k].iter().enumerate() {
                        *phi += topo.weighted_stage(r + 1)? * b;
                    }
                }
            }
        }
        Ok(VarCoefficients(phis))
    }

    /// Node-wise form of a community model: `α_{i,k} = α_{k,c} I(i ∈ K_c)` and
    /// `β_{i,k,r} = β_{k,r,c} I(i ∈ K_c)`, zero-padded to `p = max(p_c)` and
    /// `s_k = max_c s_k(c)`.
    pub fn to_local_alpha(&self, part: &CommunityPartition) -> Result<NodewiseCoefficients> {
        let Coefficients::Community(cs) = &self.coefficients else {
            return Err(GnarError::CoefficientMismatch(
                "node-wise mapping needs a community model".into(),
            ));
        };
        self.order.check_partition(part, part.node_count())?;
        let p = self.order.max_lag();
        let stage_orders: Vec<usize> = (1..=p)
            .map(|k| {
                (0..cs.len())
                    .map(|g| self.order.stage_at(g, k))
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let d = part.node_count();
        let mut alpha = vec![vec![0.0; p]; d];
        let mut beta: Vec<Vec<Vec<f64>>> = (0..d)
            .map(|_| stage_orders.iter().map(|&s| vec![0.0; s]).collect())
            .collect();
        for i in 0..d {
            let c = &cs[part.community_of(i)];
            for k in 0..c.alpha.len() {
                alpha[i][k] = c.alpha[k];
                for (r, &b) in c.beta[k].iter().enumerate() {
                    beta[i][k][r] = b;
                }
            }
        }
        Ok(NodewiseCoefficients {
            alpha,
            beta,
            stage_orders,
        })
    }
}

fn flatten_lags(c: &LagCoefficients) -> Vec<f64> {
    let mut out = Vec::new();
    for (a, b) in c.alpha.iter().zip(&c.beta) {
        out.push(*a);
        out.extend(b);
    }
    out
}

/// Node-wise coefficients `α_{i,k}`, `β_{i,k,r}` with neighbourhood regressions
/// restricted to each node's community.
#[derive(Debug, Clone, PartialEq)]
pub struct NodewiseCoefficients {
    pub alpha: Vec<Vec<f64>>,
    pub beta: Vec<Vec<Vec<f64>>>,
    pub stage_orders: Vec<usize>,
}

impl NodewiseCoefficients {
    pub fn stationarity(&self) -> StationarityReport {
        let sums = self
            .alpha
            .iter()
            .zip(&self.beta)
            .map(|(a, b)| {
                a.iter().map(|x| x.abs()).sum::<f64>()
                    + b.iter().flatten().map(|x| x.abs()).sum::<f64>()
            })
            .collect();
        StationarityReport::from_sums(sums)
    }

    pub fn to_var(&self, topo: &Topology, part: &CommunityPartition) -> Result<VarCoefficients> {
        let d = topo.node_count();
        if self.alpha.len() != d || part.node_count() != d {
            return Err(GnarError::DimensionMismatch(format!(
                "node-wise model has {} nodes, network has {d}",
                self.alpha.len()
            )));
        }
        let p = self.stage_orders.len();
        let mut phis = vec![DMatrix::zeros(d, d); p];
        for (k, phi) in phis.iter_mut().enumerate() {
            for i in 0..d {
                phi[(i, i)] = self.alpha[i][k];
                let c = part.community_of(i);
                for (r, &b) in self.beta[i][k].iter().enumerate() {
                    if b == 0.0 {
                        continue;
                    }
                    let stage = topo.weighted_stage(r + 1)?;
                    for j in 0..d {
                        if part.community_of(j) == c {
                            phi[(i, j)] += b * stage[(i, j)];
                        }
                    }
                }
            }
        }
        Ok(VarCoefficients(phis))
    }
}
