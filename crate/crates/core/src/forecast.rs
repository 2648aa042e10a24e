//! Iterated forecasts, rMSPE scoring and the hold-out comparison harness.

use nalgebra::{DMatrix, DVector};

use crate::error::{GnarError, Result};
use crate::estimate::fit;
use crate::model::{GnarModel, GnarOrder};
use crate::network::Topology;
use crate::panel::TimeSeriesPanel;
use crate::partition::CommunityPartition;

/// Forecasts `X_{T+1..T+horizon}` from the end of `panel`, feeding
/// predictions back as history. Columns of the result are steps ahead.
pub fn forecast(
    model: &GnarModel,
    topo: &Topology,
    part: &CommunityPartition,
    panel: &TimeSeriesPanel,
    horizon: usize,
) -> Result<DMatrix<f64>> {
    if horizon == 0 {
        return Err(GnarError::DimensionMismatch("forecast horizon must be at least 1".into()));
    }
    if panel.node_count() != topo.node_count() {
        return Err(GnarError::DimensionMismatch(format!(
            "panel has {} nodes, network has {}",
            panel.node_count(),
            topo.node_count()
        )));
    }
    let var = model.to_var(topo, part)?;
    let p = var.order();
    let t_len = panel.len();
    if t_len < p {
        return Err(GnarError::SeriesTooShort { required: p, actual: t_len });
    }
    // most recent first
    let mut history: Vec<DVector<f64>> = (0..p).map(|k| panel.at(t_len - 1 - k)).collect();
    let mut out = DMatrix::zeros(topo.node_count(), horizon);
    for step in 0..horizon {
        let refs: Vec<&DVector<f64>> = history.iter().collect();
        let x = var.predict(&refs);
        out.set_column(step, &x);
        if p > 0 {
            history.rotate_right(1);
            history[0] = x;
        }
    }
    Ok(out)
}

/// Previous observation.
pub fn naive_forecast(panel: &TimeSeriesPanel) -> DVector<f64> {
    panel.at(panel.len() - 1)
}

/// `{Σ_i (x_i - x̂_i)² / d}^{1/2}`.
pub fn rmspe(actual: &DVector<f64>, predicted: &DVector<f64>) -> Result<f64> {
    if actual.len() != predicted.len() || actual.is_empty() {
        return Err(GnarError::DimensionMismatch(format!(
            "actual has {} entries, prediction has {}",
            actual.len(),
            predicted.len()
        )));
    }
    Ok(((actual - predicted).norm_squared() / actual.len() as f64).sqrt())
}

/// A model fitted by the harness.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    pub order: GnarOrder,
}

/// Forecast produced elsewhere. `centred` is the prediction on the
/// training-mean-centred scale, when available.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalForecast {
    pub name: String,
    pub raw: DVector<f64>,
    pub centred: Option<DVector<f64>>,
}

impl ExternalForecast {
    /// Reads a panel file whose time columns are `raw` and optionally `centred`.
    /// A single unlabelled column is taken as raw.
    pub fn from_panel(name: impl Into<String>, panel: &TimeSeriesPanel) -> Result<Self> {
        let labels = panel.time_labels();
        let find = |key: &str| labels.iter().position(|l| l == key);
        let raw = match (find("raw"), panel.len()) {
            (Some(i), _) => panel.at(i),
            (None, 1) => panel.at(0),
            _ => {
                return Err(GnarError::DimensionMismatch(
                    "external forecast needs a 'raw' column".into(),
                ))
            }
        };
        Ok(Self {
            name: name.into(),
            raw,
            centred: find("centred").map(|i| panel.at(i)),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportEntry {
    pub name: String,
    pub prediction: DVector<f64>,
    pub rmspe: f64,
    pub rmspe_centred: Option<f64>,
    pub parameters: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastReport {
    /// Index of the scored time step.
    pub holdout: usize,
    pub actual: DVector<f64>,
    pub entries: Vec<ReportEntry>,
}

impl ForecastReport {
    pub fn entry(&self, name: &str) -> Option<&ReportEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// One column per model; rows `rMSPE`, `rMSPE*`, `parameters`. Missing values are `NA`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric");
        for e in &self.entries {
            out.push(',');
            out.push_str(&e.name);
        }
        out.push('\n');
        let na = || "NA".to_string();
        let rows: [(&str, Box<dyn Fn(&ReportEntry) -> String>); 3] = [
            ("rMSPE", Box::new(|e| format!("{:.4}", e.rmspe))),
            ("rMSPE*", Box::new(move |e| e.rmspe_centred.map_or_else(na, |v| format!("{v:.4}")))),
            ("parameters", Box::new(move |e| e.parameters.map_or_else(na, |v| v.to_string()))),
        ];
        for (label, cell) in rows {
            out.push_str(label);
            for e in &self.entries {
                out.push(',');
                out.push_str(&cell(e));
            }
            out.push('\n');
        }
        out
    }
}

/// Fits every spec on `t < holdout` and scores the one-step forecast of
/// `t = holdout`. rMSPE uses the raw panel; rMSPE* refits on data centred by
/// the training means and scores against the centred actual. A naive entry
/// is always appended.
pub fn compare(
    panel: &TimeSeriesPanel,
    topo: &Topology,
    part: &CommunityPartition,
    specs: &[ModelSpec],
    externals: &[ExternalForecast],
    holdout: usize,
) -> Result<ForecastReport> {
    if holdout == 0 || holdout >= panel.len() {
        return Err(GnarError::InvalidLag { lag: holdout, len: panel.len() });
    }
    let d = panel.node_count();
    let train = panel.slice_time(0..holdout)?;
    let means = train.node_means();
    let train_centred = train.centred_by(&means)?;
    let actual = panel.at(holdout);
    let actual_centred = &actual - &means;

    let mut entries = Vec::new();
    for spec in specs {
        let raw_model = fit(&train, &spec.order, topo, part)?.model()?;
        let prediction = forecast(&raw_model, topo, part, &train, 1)?.column(0).into_owned();
        let centred_model = fit(&train_centred, &spec.order, topo, part)?.model()?;
        let centred = forecast(&centred_model, topo, part, &train_centred, 1)?.column(0).into_owned();
        entries.push(ReportEntry {
            name: spec.name.clone(),
            rmspe: rmspe(&actual, &prediction)?,
            rmspe_centred: Some(rmspe(&actual_centred, &centred)?),
            parameters: Some(spec.order.parameter_count(d)),
            prediction,
        });
    }
    for ext in externals {
        if ext.raw.len() != d || ext.centred.as_ref().is_some_and(|c| c.len() != d) {
            return Err(GnarError::DimensionMismatch(format!(
                "external forecast {} does not have {d} nodes",
                ext.name
            )));
        }
        entries.push(ReportEntry {
            name: ext.name.clone(),
            rmspe: rmspe(&actual, &ext.raw)?,
            rmspe_centred: ext.centred.as_ref().map(|c| rmspe(&actual_centred, c)).transpose()?,
            parameters: None,
            prediction: ext.raw.clone(),
        });
    }
    let prediction = naive_forecast(&train);
    entries.push(ReportEntry {
        name: "naive".into(),
        rmspe: rmspe(&actual, &prediction)?,
        rmspe_centred: Some(rmspe(&actual_centred, &(&prediction - &means))?),
        parameters: None,
        prediction,
    });
    Ok(ForecastReport { holdout, actual, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Network;

    #[test]
    fn rmspe_arithmetic() {
        let a = DVector::from_vec(vec![1.0, 2.0]);
        assert!((rmspe(&a, &DVector::zeros(2)).unwrap() - 2.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(rmspe(&a, &a).unwrap(), 0.0);
        assert!(rmspe(&a, &DVector::zeros(3)).is_err());
    }

    #[test]
    fn zero_model_forecasts_zero() {
        let topo = Topology::new(Network::new(3, &[(1, 2), (2, 3)]).unwrap());
        let order: GnarOrder = "global:2;[1,0]".parse().unwrap();
        let m = GnarModel::from_parameters(order, &[0.0; 3], 3, 1.0).unwrap();
        let panel = TimeSeriesPanel::from_values(DMatrix::from_element(3, 4, 5.0)).unwrap();
        let f = forecast(&m, &topo, &CommunityPartition::single(3), &panel, 3).unwrap();
        assert_eq!(f, DMatrix::zeros(3, 3));
    }

    #[test]
    fn short_panel_is_rejected() {
        let topo = Topology::new(Network::new(3, &[(1, 2), (2, 3)]).unwrap());
        let order: GnarOrder = "global:2;[1,0]".parse().unwrap();
        let m = GnarModel::from_parameters(order, &[0.1, 0.1, 0.1], 3, 1.0).unwrap();
        let panel = TimeSeriesPanel::from_values(DMatrix::from_element(3, 1, 5.0)).unwrap();
        let part = CommunityPartition::single(3);
        assert!(matches!(
            forecast(&m, &topo, &part, &panel, 1),
            Err(GnarError::SeriesTooShort { .. })
        ));
        let panel = TimeSeriesPanel::from_values(DMatrix::from_element(3, 2, 5.0)).unwrap();
        assert!(forecast(&m, &topo, &part, &panel, 0).is_err());
    }

    #[test]
    fn naive_scores_agree_on_both_scales() {
        let topo = Topology::new(Network::new(3, &[(1, 2), (2, 3)]).unwrap());
        let values = DMatrix::from_fn(3, 9, |i, t| ((i + 2 * t) as f64).sin() * 10.0 + 40.0);
        let panel = TimeSeriesPanel::from_values(values).unwrap();
        let report = compare(&panel, &topo, &CommunityPartition::single(3), &[], &[], 8).unwrap();
        let naive = report.entry("naive").unwrap();
        assert!((naive.rmspe - naive.rmspe_centred.unwrap()).abs() < 1e-12);
        assert_eq!(report.to_csv().lines().next(), Some("metric,naive"));
    }

    #[test]
    fn external_forecast_columns() {
        let panel = TimeSeriesPanel::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 2.0, 1.5]),
            vec!["a".into(), "b".into()],
            vec!["raw".into(), "centred".into()],
        )
        .unwrap();
        let ext = ExternalForecast::from_panel("ext", &panel).unwrap();
        assert_eq!(ext.raw.as_slice(), &[1.0, 2.0]);
        assert_eq!(ext.centred.unwrap().as_slice(), &[0.5, 1.5]);
    }
}
