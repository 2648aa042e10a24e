//! Network autocorrelation (NACF) and partial network autocorrelation (PNACF).
//!
//! With per-node centred observations `e_t`, `B_r = W ⊙ S_r` (restricted to a
//! community's nodes and masked to `W_c` for community versions),
//! `A_r = I + B_r` and `λ_r = 1 + σ_max(B_r)`:
//!
//! ```text
//! nacf(h, r)  = Σ_{t=1}^{T-h} e_{t+h}ᵀ A_r e_t / (λ_r Σ_t ‖e_t‖²)
//! pnacf(h, r) = Σ_t f_{t+h}ᵀ A_r g_t / (λ_r √(Σ‖f_t‖² Σ‖g_t‖²))
//! ```
//!
//! where `f` and `g` are the forward and backward residuals of a regression
//! on lags `1..h-1` with neighbourhood stages `1..r`, and `pnacf(1, r) = nacf(1, r)`.
//! `‖A_r‖ <= λ_r` and Cauchy–Schwarz over `t` keep both in `[-1, 1]`.
//!
//! Stage 0 uses `B_0 = 0`, giving the pooled cross-sectional ACF.

use nalgebra::{DMatrix, DVector};

use crate::error::{GnarError, Result};
use crate::linalg::PivotedQr;
use crate::network::Topology;
use crate::panel::TimeSeriesPanel;
use crate::partition::CommunityPartition;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationKind {
    Nacf,
    Pnacf,
}

impl CorrelationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CorrelationKind::Nacf => "nacf",
            CorrelationKind::Pnacf => "pnacf",
        }
    }
}

impl std::str::FromStr for CorrelationKind {
    type Err = GnarError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nacf" => Ok(CorrelationKind::Nacf),
            "pnacf" => Ok(CorrelationKind::Pnacf),
            other => Err(GnarError::InvalidOrder(format!(
                "unknown correlation kind {other:?} (expected nacf or pnacf)"
            ))),
        }
    }
}

/// One cell value. Degenerate cells carry value 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub value: f64,
    pub degenerate: bool,
}

impl Correlation {
    const DEGENERATE: Correlation = Correlation {
        value: 0.0,
        degenerate: true,
    };

    fn of(value: f64) -> Self {
        Self {
            value,
            degenerate: false,
        }
    }
}

/// Ratio below which a sum of squares counts as zero.
const NEGLIGIBLE: f64 = 1e-24;

/// Centred panel restricted to a node subset, with restricted stage matrices.
struct NetworkView {
    e: DMatrix<f64>,
    raw_ss: f64,
    stages: Vec<DMatrix<f64>>,
    /// Community versions flag stages with no within-community pairs.
    community: bool,
}

impl NetworkView {
    fn new(
        panel: &TimeSeriesPanel,
        topo: &Topology,
        subset: Option<(&CommunityPartition, usize)>,
        max_stage: usize,
    ) -> Result<Self> {
        let d = topo.node_count();
        if panel.node_count() != d {
            return Err(GnarError::DimensionMismatch(format!(
                "panel has {} nodes, network has {d}",
                panel.node_count()
            )));
        }
        topo.check_stage(max_stage)?;
        let nodes: Vec<usize> = match subset {
            Some((part, c)) => {
                if part.node_count() != d {
                    return Err(GnarError::DimensionMismatch(format!(
                        "partition covers {} nodes, network has {d}",
                        part.node_count()
                    )));
                }
                if c >= part.count() {
                    return Err(GnarError::UnknownCommunity(c + 1));
                }
                part.members(c).to_vec()
            }
            None => (0..d).collect(),
        };
        let x = panel.values();
        let t_len = panel.len();
        let e = DMatrix::from_fn(nodes.len(), t_len, |m, t| x[(nodes[m], t)]);
        let raw_ss = e.norm_squared();
        let means = e.column_mean();
        let mut e = e;
        for mut col in e.column_iter_mut() {
            col -= &means;
        }
        let mut stages = Vec::with_capacity(max_stage);
        for r in 1..=max_stage {
            let full = match subset {
                Some((part, c)) => topo.community_stage(r, part, c)?,
                None => topo.weighted_stage(r)?.clone(),
            };
            stages.push(DMatrix::from_fn(nodes.len(), nodes.len(), |a, b| {
                full[(nodes[a], nodes[b])]
            }));
        }
        Ok(Self {
            e,
            raw_ss,
            stages,
            community: subset.is_some(),
        })
    }

    fn len(&self) -> usize {
        self.e.ncols()
    }

    fn stage(&self, r: usize) -> Option<&DMatrix<f64>> {
        r.checked_sub(1).map(|idx| &self.stages[idx])
    }

    fn empty_stage(&self, r: usize) -> bool {
        self.stage(r).is_some_and(|b| b.iter().all(|&v| v == 0.0))
    }

    fn lambda(&self, r: usize) -> f64 {
        match self.stage(r) {
            Some(b) => 1.0 + b.clone().singular_values().max(),
            None => 1.0,
        }
    }

    /// `Σ_t u_{t+h}ᵀ (I + B_r) v_t` over `t = 0..T-h`, where `u`/`v` are given
    /// as functions of absolute time.
    fn cross(&self, r: usize, h: usize, u: &DMatrix<f64>, u_off: usize, v: &DMatrix<f64>, v_off: usize) -> f64 {
        let mut total = 0.0;
        for t in 0..self.len() - h {
            let ut = u.column(t + h - u_off);
            let vt = v.column(t - v_off);
            total += ut.dot(&vt);
            if let Some(b) = self.stage(r) {
                total += ut.dot(&(b * vt));
            }
        }
        total
    }

    fn check_lag(&self, h: usize) -> Result<()> {
        if h == 0 || h >= self.len() {
            return Err(GnarError::InvalidLag { lag: h, len: self.len() });
        }
        Ok(())
    }

    fn nacf(&self, h: usize, r: usize) -> Result<Correlation> {
        self.check_lag(h)?;
        let ss = self.e.norm_squared();
        if ss <= NEGLIGIBLE * self.raw_ss || ss == 0.0 {
            return Ok(Correlation::DEGENERATE);
        }
        if self.community && r > 0 && self.empty_stage(r) {
            return Ok(Correlation::DEGENERATE);
        }
        let num = self.cross(r, h, &self.e, 0, &self.e, 0);
        Ok(Correlation::of(num / (self.lambda(r) * ss)))
    }

    /// Residuals of `e_t` regressed on `e_{t∓k}` and `B_s e_{t∓k}` for
    /// `k = 1..h-1`, `s = 1..r`; columns of the result are times
    /// `offset..offset+len`.
    fn residuals(&self, h: usize, r: usize, forward: bool) -> Option<(DMatrix<f64>, usize)> {
        let m = self.e.nrows();
        let t_len = self.len();
        let lags = h - 1;
        let steps = t_len - lags;
        let offset = if forward { lags } else { 0 };
        let stages: Vec<&DMatrix<f64>> = (1..=r)
            .filter_map(|s| self.stage(s))
            .filter(|b| b.iter().any(|&v| v != 0.0))
            .collect();
        let cols = lags * (1 + stages.len());
        let rows = steps * m;
        if rows <= cols {
            return None;
        }
        let mut design = DMatrix::zeros(rows, cols);
        let mut y = DVector::zeros(rows);
        for s in 0..steps {
            let t = offset + s;
            y.rows_mut(s * m, m).copy_from(&self.e.column(t));
            for k in 1..=lags {
                let src = if forward { t - k } else { t + k };
                let col0 = (k - 1) * (1 + stages.len());
                let x = self.e.column(src);
                design.view_mut((s * m, col0), (m, 1)).copy_from(&x);
                for (j, b) in stages.iter().enumerate() {
                    design
                        .view_mut((s * m, col0 + 1 + j), (m, 1))
                        .copy_from(&(*b * x));
                }
            }
        }
        let qr = PivotedQr::new(&design);
        if !qr.is_full_rank() {
            return None;
        }
        let resid = &y - &design * qr.solve(&y);
        Some((DMatrix::from_column_slice(m, steps, resid.as_slice()), offset))
    }

    fn pnacf(&self, h: usize, r: usize) -> Result<Correlation> {
        self.check_lag(h)?;
        if h == 1 {
            return self.nacf(1, r);
        }
        let ss = self.e.norm_squared();
        if ss <= NEGLIGIBLE * self.raw_ss || ss == 0.0 {
            return Ok(Correlation::DEGENERATE);
        }
        if self.community && r > 0 && self.empty_stage(r) {
            return Ok(Correlation::DEGENERATE);
        }
        let (Some((f, f_off)), Some((g, g_off))) =
            (self.residuals(h, r, true), self.residuals(h, r, false))
        else {
            return Ok(Correlation::DEGENERATE);
        };
        let ff = f.norm_squared();
        let gg = g.norm_squared();
        if ff <= NEGLIGIBLE * ss || gg <= NEGLIGIBLE * ss {
            return Ok(Correlation::DEGENERATE);
        }
        let num = self.cross(r, h, &f, f_off, &g, g_off);
        Ok(Correlation::of(num / (self.lambda(r) * (ff * gg).sqrt())))
    }

    fn value(&self, kind: CorrelationKind, h: usize, r: usize) -> Result<Correlation> {
        match kind {
            CorrelationKind::Nacf => self.nacf(h, r),
            CorrelationKind::Pnacf => self.pnacf(h, r),
        }
    }
}

/// `nacf(h, r)`; `subset` selects community `c` of a partition.
pub fn nacf(
    panel: &TimeSeriesPanel,
    topo: &Topology,
    h: usize,
    r: usize,
    subset: Option<(&CommunityPartition, usize)>,
) -> Result<Correlation> {
    NetworkView::new(panel, topo, subset, r)?.nacf(h, r)
}

/// `pnacf(h, r)`; `subset` selects community `c` of a partition.
pub fn pnacf(
    panel: &TimeSeriesPanel,
    topo: &Topology,
    h: usize,
    r: usize,
    subset: Option<(&CommunityPartition, usize)>,
) -> Result<Correlation> {
    NetworkView::new(panel, topo, subset, r)?.pnacf(h, r)
}

/// Lag × stage grid of (P)NACF values, optionally one layer per community
/// plus the across-community mean.
#[derive(Debug, Clone, PartialEq)]
pub struct CorbitGrid {
    pub kind: CorrelationKind,
    pub max_lag: usize,
    pub max_stage: usize,
    /// Community labels when the grid has a community dimension.
    pub communities: Option<Vec<String>>,
    /// `layers[layer][(h-1) * max_stage + (r-1)]`; one layer without communities.
    layers: Vec<Vec<Correlation>>,
    mean: Option<Vec<Correlation>>,
}

impl CorbitGrid {
    /// Builds a grid from cell values laid out lag-major (`(h-1) * R + (r-1)`).
    /// With community labels, `layers` holds one layer per community and the
    /// mean layer is derived; otherwise exactly one layer.
    pub fn from_layers(
        kind: CorrelationKind,
        max_lag: usize,
        max_stage: usize,
        communities: Option<Vec<String>>,
        layers: Vec<Vec<Correlation>>,
    ) -> Result<Self> {
        let cells = max_lag * max_stage;
        let expected_layers = communities.as_ref().map_or(1, Vec::len);
        if cells == 0 || expected_layers == 0 || layers.len() != expected_layers {
            return Err(GnarError::DimensionMismatch(format!(
                "{} layers for {expected_layers} expected",
                layers.len()
            )));
        }
        if let Some(bad) = layers.iter().find(|l| l.len() != cells) {
            return Err(GnarError::DimensionMismatch(format!(
                "layer has {} cells, grid has {cells}",
                bad.len()
            )));
        }
        let mean = communities.as_ref().map(|_| {
            let count = layers.len() as f64;
            (0..cells)
                .map(|idx| {
                    let degenerate = layers.iter().all(|l| l[idx].degenerate);
                    let value = layers.iter().map(|l| l[idx].value).sum::<f64>() / count;
                    Correlation {
                        value: if degenerate { 0.0 } else { value },
                        degenerate,
                    }
                })
                .collect()
        });
        Ok(Self {
            kind,
            max_lag,
            max_stage,
            communities,
            layers,
            mean,
        })
    }

    fn index(&self, h: usize, r: usize) -> usize {
        assert!((1..=self.max_lag).contains(&h) && (1..=self.max_stage).contains(&r));
        (h - 1) * self.max_stage + (r - 1)
    }

    pub fn community_count(&self) -> usize {
        self.communities.as_ref().map_or(0, Vec::len)
    }

    /// Overall value, or community `c`'s value for community grids.
    pub fn get(&self, community: Option<usize>, h: usize, r: usize) -> Correlation {
        let idx = self.index(h, r);
        self.layers[community.unwrap_or(0)][idx]
    }

    pub fn mean(&self, h: usize, r: usize) -> Option<Correlation> {
        let idx = self.index(h, r);
        self.mean.as_ref().map(|m| m[idx])
    }

    pub fn cell_count(&self) -> usize {
        self.max_lag * self.max_stage
    }

    /// `kind,community,lag,stage,value,degenerate`; community is `all`, a label, or `mean`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,community,lag,stage,value,degenerate\n");
        let kind = self.kind.as_str();
        let mut push = |label: &str, cells: &[Correlation]| {
            for h in 1..=self.max_lag {
                for r in 1..=self.max_stage {
                    let c = cells[(h - 1) * self.max_stage + (r - 1)];
                    out.push_str(&format!(
                        "{kind},{label},{h},{r},{:?},{}\n",
                        c.value, c.degenerate
                    ));
                }
            }
        };
        match &self.communities {
            None => push("all", &self.layers[0]),
            Some(labels) => {
                for (label, layer) in labels.iter().zip(&self.layers) {
                    push(label, layer);
                }
                if let Some(mean) = &self.mean {
                    push("mean", mean);
                }
            }
        }
        out
    }
}

/// Full grid for lags `1..=max_lag` and stages `1..=max_stage`. Cell-level
/// failures become degenerate cells.
pub fn corbit_grid(
    panel: &TimeSeriesPanel,
    topo: &Topology,
    max_lag: usize,
    max_stage: usize,
    kind: CorrelationKind,
    part: Option<&CommunityPartition>,
) -> Result<CorbitGrid> {
    if max_lag == 0 || max_lag >= panel.len() {
        return Err(GnarError::InvalidLag {
            lag: max_lag,
            len: panel.len(),
        });
    }
    if max_stage == 0 {
        return Err(GnarError::StageOutOfRange {
            stage: 0,
            r_max: topo.r_max(),
        });
    }
    topo.check_stage(max_stage)?;
    let layer = |view: &NetworkView| -> Vec<Correlation> {
        let mut cells = Vec::with_capacity(max_lag * max_stage);
        for h in 1..=max_lag {
            for r in 1..=max_stage {
                cells.push(view.value(kind, h, r).unwrap_or(Correlation::DEGENERATE));
            }
        }
        cells
    };
    match part {
        None => {
            let view = NetworkView::new(panel, topo, None, max_stage)?;
            CorbitGrid::from_layers(kind, max_lag, max_stage, None, vec![layer(&view)])
        }
        Some(part) => {
            let layers = (0..part.count())
                .map(|c| NetworkView::new(panel, topo, Some((part, c)), max_stage).map(|v| layer(&v)))
                .collect::<Result<Vec<_>>>()?;
            CorbitGrid::from_layers(kind, max_lag, max_stage, Some(part.labels().to_vec()), layers)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Network;

    fn path_topology(d: usize) -> Topology {
        let edges: Vec<(usize, usize)> = (1..d).map(|i| (i, i + 1)).collect();
        Topology::new(Network::new(d, &edges).unwrap())
    }

    fn panel(d: usize, t: usize) -> TimeSeriesPanel {
        TimeSeriesPanel::from_values(DMatrix::from_fn(d, t, |i, s| {
            ((i * 13 + s * 7) as f64 * 0.91).sin() + 0.3 * (s as f64 * 0.4).cos()
        }))
        .unwrap()
    }

    /// Pooled ACF of the per-node centred panel, written out longhand.
    fn pooled_acf(p: &TimeSeriesPanel, nodes: &[usize], h: usize) -> f64 {
        let t_len = p.len();
        let centred: Vec<Vec<f64>> = nodes
            .iter()
            .map(|&i| {
                let mean = (0..t_len).map(|t| p.get(i, t)).sum::<f64>() / t_len as f64;
                (0..t_len).map(|t| p.get(i, t) - mean).collect()
            })
            .collect();
        let num: f64 = centred
            .iter()
            .map(|s| (0..t_len - h).map(|t| s[t + h] * s[t]).sum::<f64>())
            .sum();
        let den: f64 = centred.iter().flatten().map(|v| v * v).sum();
        num / den
    }

    #[test]
    fn stage_zero_is_pooled_acf() {
        let topo = path_topology(4);
        let p = panel(4, 30);
        for h in 1..5 {
            let v = nacf(&p, &topo, h, 0, None).unwrap();
            assert!((v.value - pooled_acf(&p, &[0, 1, 2, 3], h)).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_weights_reduce_to_pooled_acf() {
        let net = Network::new(3, &[(1, 2), (2, 3)]).unwrap();
        let zero = crate::network::WeightMatrix::from_matrix(DMatrix::zeros(3, 3)).unwrap();
        let topo = Topology::with_weights(net, zero).unwrap();
        let p = panel(3, 25);
        let v = nacf(&p, &topo, 2, 1, None).unwrap();
        assert!(!v.degenerate);
        assert!((v.value - pooled_acf(&p, &[0, 1, 2], 2)).abs() < 1e-12);
    }

    #[test]
    fn constant_panel_is_degenerate() {
        let topo = path_topology(3);
        let p = TimeSeriesPanel::from_values(DMatrix::from_element(3, 10, 0.1)).unwrap();
        for kind in [CorrelationKind::Nacf, CorrelationKind::Pnacf] {
            let grid = corbit_grid(&p, &topo, 3, 2, kind, None).unwrap();
            assert!(grid.get(None, 2, 1).degenerate);
            assert_eq!(grid.get(None, 2, 1).value, 0.0);
        }
    }

    #[test]
    fn lag_must_be_shorter_than_series() {
        let topo = path_topology(3);
        let p = panel(3, 5);
        assert!(nacf(&p, &topo, 5, 1, None).is_err());
        assert!(nacf(&p, &topo, 0, 1, None).is_err());
        assert!(pnacf(&p, &topo, 5, 1, None).is_err());
        assert!(corbit_grid(&p, &topo, 5, 1, CorrelationKind::Nacf, None).is_err());
        assert!(corbit_grid(&p, &topo, 2, 3, CorrelationKind::Nacf, None).is_err());
    }

    #[test]
    fn first_partial_equals_nacf() {
        let topo = path_topology(5);
        let p = panel(5, 40);
        for r in 0..=3 {
            assert_eq!(
                pnacf(&p, &topo, 1, r, None).unwrap(),
                nacf(&p, &topo, 1, r, None).unwrap()
            );
        }
    }

    #[test]
    fn singleton_communities_without_weights() {
        let net = Network::new(3, &[(1, 2), (2, 3)]).unwrap();
        let zero = crate::network::WeightMatrix::from_matrix(DMatrix::zeros(3, 3)).unwrap();
        let topo = Topology::with_weights(net, zero).unwrap();
        let part = CommunityPartition::from_assignment(vec![0, 1, 2]).unwrap();
        let p = panel(3, 30);
        for c in 0..3 {
            assert!(nacf(&p, &topo, 1, 1, Some((&part, c))).unwrap().degenerate);
            let own = nacf(&p, &topo, 2, 0, Some((&part, c))).unwrap();
            assert!((own.value - pooled_acf(&p, &[c], 2)).abs() < 1e-12);
        }
    }

    #[test]
    fn single_community_layer_matches_overall_grid() {
        let topo = path_topology(5);
        let p = panel(5, 40);
        let part = CommunityPartition::single(5);
        for kind in [CorrelationKind::Nacf, CorrelationKind::Pnacf] {
            let overall = corbit_grid(&p, &topo, 4, 3, kind, None).unwrap();
            let grouped = corbit_grid(&p, &topo, 4, 3, kind, Some(&part)).unwrap();
            for h in 1..=4 {
                for r in 1..=3 {
                    assert_eq!(overall.get(None, h, r), grouped.get(Some(0), h, r));
                    assert_eq!(grouped.mean(h, r), Some(grouped.get(Some(0), h, r)));
                }
            }
        }
    }

    #[test]
    fn csv_export_has_one_row_per_cell() {
        let topo = path_topology(5);
        let p = panel(5, 40);
        let part = CommunityPartition::from_assignment(vec![0, 0, 1, 1, 1]).unwrap();
        let grid = corbit_grid(&p, &topo, 8, 3, CorrelationKind::Pnacf, Some(&part)).unwrap();
        let csv = grid.to_csv();
        assert_eq!(csv.lines().count(), 1 + 3 * 24);
        assert!(csv.lines().nth(1).unwrap().starts_with("pnacf,1,1,1,"));
        assert!(csv.lines().last().unwrap().starts_with("pnacf,mean,8,3,"));
    }
}
