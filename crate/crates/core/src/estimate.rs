//! Conditional least-squares estimation of GNAR models.
//!
//! The design matrix stacks one row per (time step, node). Columns follow
//! [`GnarOrder::terms`]: ascending community, lag-major within a community,
//! so the parameter vector reads `(α_{1,c}, β_{1,1,c}, .., α_{2,c}, ..)` per `c`.
//!
//! For community models rows of nodes outside `K_c` are zero in every column
//! of community `c`, which makes `RᵀR` block diagonal across communities.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{GnarError, Result};
use crate::linalg::{spd_cholesky, PivotedQr};
use crate::model::{GnarModel, GnarOrder, Scope, StationarityReport, Term, TermKind, Variant};
use crate::network::Topology;
use crate::panel::TimeSeriesPanel;
use crate::partition::CommunityPartition;

/// The linear system `y = Rθ + u`.
#[derive(Debug, Clone)]
pub struct DesignSystem {
    matrix: DMatrix<f64>,
    response: DVector<f64>,
    terms: Vec<Term>,
    /// `(node, time)` of every row, 0-based, time-major.
    rows: Vec<(usize, usize)>,
    nodes: Vec<usize>,
    first_time: usize,
    order: GnarOrder,
    total_nodes: usize,
}

impl DesignSystem {
    /// Joint design over every node and `t = p+1..T` with `p = max(p_c)`.
    pub fn build(
        panel: &TimeSeriesPanel,
        order: &GnarOrder,
        topo: &Topology,
        part: &CommunityPartition,
    ) -> Result<Self> {
        validate(panel, order, topo, part)?;
        let p = order.max_lag();
        let d = topo.node_count();
        let nodes: Vec<usize> = (0..d).collect();
        let terms = order.terms(d);
        assemble(panel, order, topo, part, terms, nodes, p)
    }

    /// Block for community `c` alone: its own rows, its own columns and its
    /// own usable range `t = p_c+1..T`.
    pub fn build_community(
        panel: &TimeSeriesPanel,
        order: &GnarOrder,
        topo: &Topology,
        part: &CommunityPartition,
        community: usize,
    ) -> Result<Self> {
        if order.variant() != Variant::Community {
            return Err(GnarError::InvalidOrder(
                "per-community blocks need a community order".into(),
            ));
        }
        validate(panel, order, topo, part)?;
        if community >= part.count() {
            return Err(GnarError::UnknownCommunity(community + 1));
        }
        let p_c = order.lags(community);
        let terms = order
            .terms(topo.node_count())
            .into_iter()
            .filter(|t| t.scope == Scope::Community(community))
            .collect();
        let nodes = part.members(community).to_vec();
        assemble(panel, order, topo, part, terms, nodes, p_c)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn response(&self) -> &DVector<f64> {
        &self.response
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn rows(&self) -> &[(usize, usize)] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn column_count(&self) -> usize {
        self.matrix.ncols()
    }

    /// Nodes present in each time step, in row order.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    /// First usable time index (0-based), i.e. the lag order used.
    pub fn first_time(&self) -> usize {
        self.first_time
    }

    pub fn time_steps(&self) -> usize {
        self.rows.len() / self.nodes.len().max(1)
    }

    pub fn order(&self) -> &GnarOrder {
        &self.order
    }
}

fn validate(
    panel: &TimeSeriesPanel,
    order: &GnarOrder,
    topo: &Topology,
    part: &CommunityPartition,
) -> Result<()> {
    let d = topo.node_count();
    if panel.node_count() != d {
        return Err(GnarError::DimensionMismatch(format!(
            "panel has {} nodes, network has {d}",
            panel.node_count()
        )));
    }
    order.check_stages(topo)?;
    order.check_partition(part, d)?;
    let p = order.max_lag();
    if panel.len() <= p {
        return Err(GnarError::SeriesTooShort {
            required: p,
            actual: panel.len(),
        });
    }
    Ok(())
}

fn assemble(
    panel: &TimeSeriesPanel,
    order: &GnarOrder,
    topo: &Topology,
    part: &CommunityPartition,
    terms: Vec<Term>,
    nodes: Vec<usize>,
    first_time: usize,
) -> Result<DesignSystem> {
    let x = panel.values();
    let t_len = panel.len();
    if t_len <= first_time {
        return Err(GnarError::SeriesTooShort {
            required: first_time,
            actual: t_len,
        });
    }
    // neighbourhood regressions for every (scope, stage) used, over all times
    let mut regressions: BTreeMap<(Option<usize>, usize), DMatrix<f64>> = BTreeMap::new();
    for term in &terms {
        if let TermKind::Beta(r) = term.kind {
            let key = match term.scope {
                Scope::Community(c) => (Some(c), r),
                _ => (None, r),
            };
            if !regressions.contains_key(&key) {
                let z = match key.0 {
                    Some(c) => topo.community_stage(r, part, c)? * x,
                    None => topo.weighted_stage(r)? * x,
                };
                regressions.insert(key, z);
            }
        }
    }
    let steps = t_len - first_time;
    let n = steps * nodes.len();
    let mut matrix = DMatrix::zeros(n, terms.len());
    let mut response = DVector::zeros(n);
    let mut rows = Vec::with_capacity(n);
    for (s, t) in (first_time..t_len).enumerate() {
        for (m, &i) in nodes.iter().enumerate() {
            let row = s * nodes.len() + m;
            rows.push((i, t));
            response[row] = x[(i, t)];
            for (col, term) in terms.iter().enumerate() {
                let lagged = t - term.lag;
                let in_scope = match term.scope {
                    Scope::Global => true,
                    Scope::Community(c) => part.community_of(i) == c,
                    Scope::Node(j) => i == j,
                };
                if !in_scope {
                    continue;
                }
                matrix[(row, col)] = match term.kind {
                    TermKind::Alpha => x[(i, lagged)],
                    TermKind::Beta(r) => {
                        let key = match term.scope {
                            Scope::Community(c) => (Some(c), r),
                            _ => (None, r),
                        };
                        regressions[&key][(i, lagged)]
                    }
                };
            }
        }
    }
    Ok(DesignSystem {
        matrix,
        response,
        terms,
        rows,
        nodes,
        first_time,
        order: order.clone(),
        total_nodes: topo.node_count(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Ols,
    Gls,
}

/// Estimates with uncertainty and residuals.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub method: Method,
    pub terms: Vec<Term>,
    pub estimates: DVector<f64>,
    /// `σ̂²(RᵀR)⁻¹` for OLS, `(RᵀΣ⁻¹R)⁻¹` for GLS.
    pub covariance: DMatrix<f64>,
    pub std_errors: DVector<f64>,
    /// RSS / (n - q); for GLS the whitened residuals are used.
    pub sigma2: f64,
    pub residuals: DVector<f64>,
    pub rows: Vec<(usize, usize)>,
    pub degrees_of_freedom: usize,
    /// Advisory: estimation never fails on a non-stationary fit.
    pub stationarity: StationarityReport,
    order: GnarOrder,
    nodes: Vec<usize>,
    total_nodes: usize,
    full_model: bool,
}

impl FitResult {
    pub fn estimate(&self, name: &str) -> Option<f64> {
        self.terms
            .iter()
            .position(|t| t.name() == name)
            .map(|i| self.estimates[i])
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        self.terms
            .iter()
            .position(|t| t.name() == name)
            .map(|i| self.std_errors[i])
    }

    pub fn order(&self) -> &GnarOrder {
        &self.order
    }

    /// Fitted model with `σ_u = σ̂`. Only available for joint fits.
    pub fn model(&self) -> Result<GnarModel> {
        if !self.full_model {
            return Err(GnarError::CoefficientMismatch(
                "a single community block does not determine the full model".into(),
            ));
        }
        GnarModel::from_parameters(
            self.order.clone(),
            self.estimates.as_slice(),
            self.total_nodes,
            self.sigma2.sqrt(),
        )
    }

    /// Residuals as a panel over the fitted nodes and time steps.
    pub fn residual_panel(&self, panel: &TimeSeriesPanel) -> Result<TimeSeriesPanel> {
        let m = self.nodes.len();
        let steps = self.rows.len() / m;
        let first = self.rows.first().map_or(0, |r| r.1);
        let values = DMatrix::from_fn(m, steps, |i, s| self.residuals[s * m + i]);
        let labels = self
            .nodes
            .iter()
            .map(|&i| panel.node_labels()[i].clone())
            .collect();
        let times = panel.time_labels()[first..first + steps].to_vec();
        TimeSeriesPanel::new(values, labels, times)
    }

    /// `name,estimate,std_error` rows in parameter order.
    pub fn coefficient_table(&self) -> String {
        let mut out = String::from("name,estimate,std_error\n");
        for (i, term) in self.terms.iter().enumerate() {
            out.push_str(&format!(
                "{},{:?},{:?}\n",
                term.name(),
                self.estimates[i],
                self.std_errors[i]
            ));
        }
        out
    }
}

fn stationarity_of(terms: &[Term], theta: &DVector<f64>) -> StationarityReport {
    // local models: node-specific alphas plus stage coefficients shared by every node
    let local = terms.iter().any(|t| matches!(t.scope, Scope::Node(_)));
    let mut groups: BTreeMap<Scope, f64> = BTreeMap::new();
    let mut shared = 0.0;
    for (term, v) in terms.iter().zip(theta.iter()) {
        if local && term.scope == Scope::Global {
            shared += v.abs();
        } else {
            *groups.entry(term.scope).or_default() += v.abs();
        }
    }
    let sums: Vec<f64> = groups.values().map(|s| s + shared).collect();
    let max = sums.iter().copied().fold(0.0, f64::max);
    StationarityReport {
        stationary: sums.iter().all(|&s| s < 1.0),
        margin: 1.0 - max,
        sums,
    }
}

fn factorise(ds: &DesignSystem, matrix: &DMatrix<f64>) -> Result<PivotedQr> {
    let qr = PivotedQr::new(matrix);
    if !qr.is_full_rank() {
        let mut names: Vec<String> = qr
            .dependent_columns()
            .iter()
            .map(|&c| ds.terms[c].name())
            .collect();
        names.sort();
        return Err(GnarError::RankDeficient(names));
    }
    if matrix.nrows() <= matrix.ncols() {
        return Err(GnarError::NoDegreesOfFreedom {
            rows: matrix.nrows(),
            columns: matrix.ncols(),
        });
    }
    Ok(qr)
}

/// `θ̂ = argmin ‖y − Rθ‖²` via pivoted QR.
pub fn fit_ols(ds: &DesignSystem) -> Result<FitResult> {
    let qr = factorise(ds, &ds.matrix)?;
    let theta = qr.solve(&ds.response);
    let residuals = &ds.response - &ds.matrix * &theta;
    let df = ds.row_count() - ds.column_count();
    let sigma2 = residuals.norm_squared() / df as f64;
    let covariance = qr.inverse_gram() * sigma2;
    Ok(finish(ds, Method::Ols, theta, covariance, sigma2, residuals, df))
}

/// Error covariance for generalised least squares.
#[derive(Debug, Clone)]
pub enum NoiseCovariance {
    /// Full `n x n` covariance of the stacked errors.
    Dense(DMatrix<f64>),
    /// `I ⊗ Σ_u`: the same `Σ_u` at every time step, independent across time.
    /// `Σ_u` is indexed by the design's nodes in row order.
    PerStep(DMatrix<f64>),
}

/// `θ̂ = (RᵀΣ⁻¹R)⁻¹RᵀΣ⁻¹y`, computed by whitening with the Cholesky factor of `Σ`.
pub fn fit_gls(ds: &DesignSystem, cov: &NoiseCovariance) -> Result<FitResult> {
    let n = ds.row_count();
    let (wr, wy) = match cov {
        NoiseCovariance::Dense(sigma) => {
            if sigma.shape() != (n, n) {
                return Err(GnarError::DimensionMismatch(format!(
                    "covariance is {}x{}, design has {n} rows",
                    sigma.nrows(),
                    sigma.ncols()
                )));
            }
            let chol = spd_cholesky(sigma)?;
            let l = chol.l();
            (
                l.solve_lower_triangular(&ds.matrix).expect("nonsingular factor"),
                l.solve_lower_triangular(&ds.response).expect("nonsingular factor"),
            )
        }
        NoiseCovariance::PerStep(sigma_u) => {
            let m = ds.nodes.len();
            if sigma_u.shape() != (m, m) {
                return Err(GnarError::DimensionMismatch(format!(
                    "per-step covariance is {}x{}, design has {m} nodes per step",
                    sigma_u.nrows(),
                    sigma_u.ncols()
                )));
            }
            let l = spd_cholesky(sigma_u)?.l();
            let mut wr = ds.matrix.clone();
            let mut wy = ds.response.clone();
            for s in 0..ds.time_steps() {
                let block = ds.matrix.rows(s * m, m).into_owned();
                wr.rows_mut(s * m, m)
                    .copy_from(&l.solve_lower_triangular(&block).expect("nonsingular factor"));
                let yb = ds.response.rows(s * m, m).into_owned();
                wy.rows_mut(s * m, m)
                    .copy_from(&l.solve_lower_triangular(&yb).expect("nonsingular factor"));
            }
            (wr, wy)
        }
    };
    let qr = factorise(ds, &wr)?;
    let theta = qr.solve(&wy);
    let whitened = &wy - &wr * &theta;
    let df = n - ds.column_count();
    let sigma2 = whitened.norm_squared() / df as f64;
    let covariance = qr.inverse_gram();
    let residuals = &ds.response - &ds.matrix * &theta;
    Ok(finish(ds, Method::Gls, theta, covariance, sigma2, residuals, df))
}

fn finish(
    ds: &DesignSystem,
    method: Method,
    theta: DVector<f64>,
    covariance: DMatrix<f64>,
    sigma2: f64,
    residuals: DVector<f64>,
    df: usize,
) -> FitResult {
    let covariance = (&covariance + covariance.transpose()) * 0.5;
    let std_errors = covariance.diagonal().map(|v| v.max(0.0).sqrt());
    let full_model = ds.terms == ds.order.terms(ds.total_nodes);
    FitResult {
        method,
        stationarity: stationarity_of(&ds.terms, &theta),
        terms: ds.terms.clone(),
        estimates: theta,
        covariance,
        std_errors,
        sigma2,
        residuals,
        rows: ds.rows.clone(),
        degrees_of_freedom: df,
        order: ds.order.clone(),
        nodes: ds.nodes.clone(),
        total_nodes: ds.total_nodes,
        full_model,
    }
}

/// Fits each community separately on its own rows and usable range.
pub fn fit_per_community(
    panel: &TimeSeriesPanel,
    order: &GnarOrder,
    topo: &Topology,
    part: &CommunityPartition,
) -> Result<Vec<FitResult>> {
    (0..part.count())
        .map(|c| fit_ols(&DesignSystem::build_community(panel, order, topo, part, c)?))
        .collect()
}

/// Convenience: joint design + OLS.
pub fn fit(
    panel: &TimeSeriesPanel,
    order: &GnarOrder,
    topo: &Topology,
    part: &CommunityPartition,
) -> Result<FitResult> {
    fit_ols(&DesignSystem::build(panel, order, topo, part)?)
}
