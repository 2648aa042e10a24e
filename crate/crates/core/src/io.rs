//! Text formats shared by the library and the command line.
//!
//! * edge lists: `from,to` with 1-based ids, optional `# nodes = d` line
//! * weight overrides: `from,to,w`
//! * partitions: `node,community[,label]`
//! * panels: `time,<node labels..>`, one row per time step, `# key = value` metadata lines
//! * models: `key = value` lines, see [`write_model`]
//!
//! Floating point values are written in Rust's shortest round-trip form, so
//! every writer/reader pair here is bit-exact.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{parse_err, GnarError, Result};
use crate::model::{GnarModel, GnarOrder, Variant};
use crate::network::Network;
use crate::panel::TimeSeriesPanel;
use crate::partition::CommunityPartition;

/// Leading `# key = value` (or `# key: value`) lines.
fn metadata_lines(text: &str) -> Vec<(String, String)> {
    text.lines()
        .map(str::trim)
        .take_while(|l| l.starts_with('#') || l.is_empty())
        .filter_map(|l| {
            let body = l.trim_start_matches('#').trim();
            let (k, v) = body.split_once('=').or_else(|| body.split_once(':'))?;
            Some((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes())
}

fn record_line(rec: &csv::StringRecord) -> usize {
    rec.position().map_or(0, |p| p.line() as usize)
}

fn csv_err(e: csv::Error) -> GnarError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    parse_err(line, e.to_string())
}

fn expect_header(rdr: &mut csv::Reader<&[u8]>, expected: &[&str], optional: usize) -> Result<usize> {
    let header = rdr.headers().map_err(csv_err)?.clone();
    let got: Vec<&str> = header.iter().collect();
    let min = expected.len() - optional;
    if got.len() < min || got.len() > expected.len() || got[..] != expected[..got.len()] {
        return Err(parse_err(
            1,
            format!("expected header {:?}, got {:?}", expected.join(","), got.join(",")),
        ));
    }
    Ok(got.len())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, idx: usize, what: &str) -> Result<T> {
    let line = record_line(rec);
    let raw = rec
        .get(idx)
        .ok_or_else(|| parse_err(line, format!("missing {what} column")))?;
    raw.parse()
        .map_err(|_| parse_err(line, format!("invalid {what} {raw:?}")))
}

fn check_width(rec: &csv::StringRecord, width: usize) -> Result<()> {
    if rec.len() != width {
        return Err(parse_err(
            record_line(rec),
            format!("expected {width} fields, found {}", rec.len()),
        ));
    }
    Ok(())
}

/// Parses an edge list. The node count comes from `nodes` when given, else
/// from a `# nodes = d` line.
pub fn parse_edge_list(text: &str, nodes: Option<usize>) -> Result<Network> {
    let declared = metadata_lines(text)
        .into_iter()
        .find(|(k, _)| k == "nodes")
        .map(|(_, v)| {
            v.parse::<usize>()
                .map_err(|_| parse_err(1, format!("invalid node count {v:?}")))
        })
        .transpose()?;
    let nodes = nodes
        .or(declared)
        .ok_or_else(|| parse_err(1, "node count not declared (`# nodes = d`)"))?;
    let mut rdr = reader(text);
    expect_header(&mut rdr, &["from", "to"], 0)?;
    let mut edges = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        check_width(&rec, 2)?;
        edges.push((field(&rec, 0, "node id")?, field(&rec, 1, "node id")?));
    }
    Network::new(nodes, &edges)
}

pub fn write_edge_list(net: &Network) -> String {
    let mut out = format!("# nodes = {}\nfrom,to\n", net.node_count());
    for &(a, b) in net.edges() {
        out.push_str(&format!("{},{}\n", a + 1, b + 1));
    }
    out
}

/// `from,to,w` triples, 1-based.
pub fn parse_weight_overrides(text: &str) -> Result<Vec<(usize, usize, f64)>> {
    let mut rdr = reader(text);
    expect_header(&mut rdr, &["from", "to", "w"], 0)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        check_width(&rec, 3)?;
        out.push((
            field(&rec, 0, "node id")?,
            field(&rec, 1, "node id")?,
            field(&rec, 2, "weight")?,
        ));
    }
    Ok(out)
}

/// `node,community[,label]`, both ids 1-based, every node listed once.
pub fn parse_partition(text: &str, nodes: usize) -> Result<CommunityPartition> {
    let mut rdr = reader(text);
    let width = expect_header(&mut rdr, &["node", "community", "label"], 1)?;
    let mut assignment = vec![None; nodes];
    let mut labels: BTreeMap<usize, String> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        check_width(&rec, width)?;
        let line = record_line(&rec);
        let node: usize = field(&rec, 0, "node id")?;
        let community: usize = field(&rec, 1, "community id")?;
        if node == 0 || node > nodes {
            return Err(parse_err(line, format!("node {node} outside 1..={nodes}")));
        }
        if community == 0 || community > nodes {
            return Err(parse_err(line, format!("community {community} outside 1..={nodes}")));
        }
        if assignment[node - 1].replace(community - 1).is_some() {
            return Err(parse_err(line, format!("node {node} assigned twice")));
        }
        let label = rec
            .get(2)
            .map(str::to_string)
            .unwrap_or_else(|| community.to_string());
        if let Some(prev) = labels.insert(community, label.clone()) {
            if prev != label {
                return Err(parse_err(
                    line,
                    format!("community {community} labelled both {prev:?} and {label:?}"),
                ));
            }
        }
    }
    let assignment = assignment
        .into_iter()
        .enumerate()
        .map(|(i, c)| c.ok_or_else(|| GnarError::InvalidPartition(format!("node {} unassigned", i + 1))))
        .collect::<Result<Vec<_>>>()?;
    let count = labels.keys().max().copied().unwrap_or(0);
    let labels = (1..=count)
        .map(|c| {
            labels
                .get(&c)
                .cloned()
                .ok_or_else(|| GnarError::InvalidPartition(format!("community {c} has no members")))
        })
        .collect::<Result<Vec<_>>>()?;
    CommunityPartition::with_labels(assignment, labels)
}

pub fn write_partition(part: &CommunityPartition) -> String {
    let mut out = String::from("node,community,label\n");
    for (i, &c) in part.assignment().iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", i + 1, c + 1, part.label(c)));
    }
    out
}

/// Reads a panel: header `time,<node labels>`, one row per time step.
pub fn parse_panel(text: &str) -> Result<TimeSeriesPanel> {
    let metadata = metadata_lines(text);
    let mut rdr = reader(text);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.len() < 2 {
        return Err(parse_err(1, "panel header needs a time column and at least one node"));
    }
    let node_labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let d = node_labels.len();
    let mut times = Vec::new();
    let mut data = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        check_width(&rec, d + 1)?;
        times.push(rec[0].to_string());
        for j in 0..d {
            let v: f64 = field(&rec, j + 1, "value")?;
            if !v.is_finite() {
                return Err(parse_err(record_line(&rec), format!("non-finite value {v}")));
            }
            data.push(v);
        }
    }
    if times.is_empty() {
        return Err(parse_err(2, "panel has no time steps"));
    }
    // rows of the file are time steps; the panel stores nodes as rows
    let values = DMatrix::from_row_slice(times.len(), d, &data).transpose();
    let mut panel = TimeSeriesPanel::new(values, node_labels, times)?;
    for (k, v) in metadata {
        panel = panel.with_metadata(k, v);
    }
    Ok(panel)
}

pub fn write_panel(panel: &TimeSeriesPanel) -> String {
    let mut out = String::new();
    for (k, v) in panel.metadata() {
        out.push_str(&format!("# {k} = {v}\n"));
    }
    out.push_str("time");
    for label in panel.node_labels() {
        out.push(',');
        out.push_str(label);
    }
    out.push('\n');
    for (t, label) in panel.time_labels().iter().enumerate() {
        out.push_str(label);
        for i in 0..panel.node_count() {
            out.push_str(&format!(",{:?}", panel.get(i, t)));
        }
        out.push('\n');
    }
    out
}

/// Model file:
///
/// ```text
/// variant = community
/// order = community:[1,2];{[1],[1,1]}
/// noise_sd = 1.0
/// alpha_1_1 = 0.27
/// ...
/// ```
///
/// Local models also carry `nodes = d`.
pub fn write_model(model: &GnarModel) -> String {
    let order = model.order();
    let nodes = model.local_node_count().unwrap_or(0);
    let mut out = String::from("# gnar model\n");
    out.push_str(&format!("variant = {}\n", order.variant().as_str()));
    out.push_str(&format!("order = {order}\n"));
    if let Some(d) = model.local_node_count() {
        out.push_str(&format!("nodes = {d}\n"));
    }
    out.push_str(&format!("noise_sd = {:?}\n", model.noise_sd()));
    for (term, value) in order.terms(nodes).iter().zip(model.parameters()) {
        out.push_str(&format!("{} = {:?}\n", term.name(), value));
    }
    out
}

pub fn parse_model(text: &str) -> Result<GnarModel> {
    let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| parse_err(idx + 1, format!("expected `key = value`, got {line:?}")))?;
        let key = k.trim().to_string();
        if entries.insert(key.clone(), (idx + 1, v.trim().to_string())).is_some() {
            return Err(parse_err(idx + 1, format!("duplicate key {key:?}")));
        }
    }
    let mut take = |key: &str| entries.remove(key);
    let (order_line, order_text) = take("order").ok_or_else(|| parse_err(0, "missing `order`"))?;
    let order: GnarOrder = order_text
        .parse()
        .map_err(|e: GnarError| parse_err(order_line, e.to_string()))?;
    if let Some((line, v)) = take("variant") {
        let variant: Variant = v.parse().map_err(|e: GnarError| parse_err(line, e.to_string()))?;
        if variant != order.variant() {
            return Err(parse_err(line, "variant disagrees with order"));
        }
    }
    let nodes = match take("nodes") {
        Some((line, v)) => v
            .parse::<usize>()
            .map_err(|_| parse_err(line, format!("invalid node count {v:?}")))?,
        None if order.variant() == Variant::Local => {
            return Err(parse_err(0, "local models need `nodes`"))
        }
        None => 0,
    };
    if order.variant() == Variant::Local && nodes == 0 {
        return Err(parse_err(0, "local models need at least one node"));
    }
    let parse_f64 = |line: usize, v: &str| -> Result<f64> {
        v.parse::<f64>()
            .map_err(|_| parse_err(line, format!("invalid number {v:?}")))
    };
    let (sd_line, sd_text) = take("noise_sd").ok_or_else(|| parse_err(0, "missing `noise_sd`"))?;
    let noise_sd = parse_f64(sd_line, &sd_text)?;
    let mut theta = Vec::new();
    for term in order.terms(nodes) {
        let name = term.name();
        let (line, v) = take(&name).ok_or_else(|| parse_err(0, format!("missing coefficient `{name}`")))?;
        theta.push(parse_f64(line, &v)?);
    }
    if let Some((key, (line, _))) = entries.into_iter().next() {
        return Err(parse_err(line, format!("unexpected key {key:?}")));
    }
    GnarModel::from_parameters(order, &theta, nodes, noise_sd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn edge_list_with_declared_nodes() {
        let net = parse_edge_list("# nodes = 3\nfrom,to\n1,2\n2,3\n", None).unwrap();
        assert_eq!(net.node_count(), 3);
        assert_eq!(net.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(parse_edge_list(&write_edge_list(&net), None).unwrap(), net);
        let isolated = parse_edge_list("from,to\n", Some(4)).unwrap();
        assert_eq!(isolated.node_count(), 4);
    }

    #[test]
    fn edge_list_errors() {
        assert!(parse_edge_list("from,to\n1,2\n", None).is_err());
        assert!(parse_edge_list("a,b\n1,2\n", Some(2)).is_err());
        assert!(parse_edge_list("from,to\n1,x\n", Some(2)).is_err());
        assert!(parse_edge_list("from,to\n1,2,3\n", Some(3)).is_err());
        assert!(parse_edge_list("from,to\n1,1\n", Some(2)).is_err());
    }

    #[test]
    fn partition_file() {
        let text = "node,community,label\n1,2,orange\n2,1,blue\n3,1,blue\n";
        let p = parse_partition(text, 3).unwrap();
        assert_eq!(p.assignment(), &[1, 0, 0]);
        assert_eq!(p.labels(), &["blue".to_string(), "orange".to_string()]);
        assert_eq!(parse_partition(&write_partition(&p), 3).unwrap(), p);
        let plain = parse_partition("node,community\n1,1\n2,1\n", 2).unwrap();
        assert_eq!(plain.labels(), &["1".to_string()]);
        assert!(parse_partition("node,community\n1,1\n", 2).is_err());
        assert!(parse_partition("node,community\n1,1\n1,1\n2,1\n", 2).is_err());
        assert!(parse_partition("node,community\n1,1\n2,3\n", 3).is_err());
        assert!(parse_partition("node,community,label\n1,1,a\n2,1,b\n", 2).is_err());
    }

    #[test]
    fn panel_round_trip_keeps_metadata() {
        let text = "# seed = 7\ntime,a,b\n1,0.1,2\n2,-3.5,1e-30\n";
        let p = parse_panel(text).unwrap();
        assert_eq!(p.node_count(), 2);
        assert_eq!(p.len(), 2);
        assert_eq!(p.get(1, 1), 1e-30);
        assert_eq!(p.metadata_value("seed"), Some("7"));
        let again = parse_panel(&write_panel(&p)).unwrap();
        assert_eq!(again, p);
        assert_eq!(write_panel(&again), write_panel(&p));
    }

    #[test]
    fn panel_errors() {
        assert!(parse_panel("").is_err());
        assert!(parse_panel("time\n1\n").is_err());
        assert!(parse_panel("time,a\n").is_err());
        assert!(parse_panel("time,a\n1,x\n").is_err());
        assert!(parse_panel("time,a\n1,inf\n").is_err());
        assert!(parse_panel("time,a,b\n1,2\n").is_err());
    }

    #[test]
    fn model_file_round_trip() {
        let order: GnarOrder = "community:[1,2];{[1],[1,1]}".parse().unwrap();
        let m = GnarModel::from_parameters(order, &[0.27, 0.18, 0.25, 0.3, 0.12, 0.2], 5, 1.0).unwrap();
        let text = write_model(&m);
        assert!(text.contains("beta_2_1_2 = 0.2\n"));
        assert_eq!(parse_model(&text).unwrap(), m);

        let local: GnarOrder = "local:1;[1]".parse().unwrap();
        let lm = GnarModel::from_parameters(local, &[0.1, 0.2, 0.3], 2, 0.5).unwrap();
        assert_eq!(parse_model(&write_model(&lm)).unwrap(), lm);
    }

    #[test]
    fn model_file_errors() {
        let base = "order = global:1;[1]\nnoise_sd = 1\nalpha_1 = 0.1\nbeta_1_1 = 0.2\n";
        assert!(parse_model(base).is_ok());
        assert!(parse_model(&base.replace("alpha_1 = 0.1\n", "")).is_err());
        assert!(parse_model(&format!("{base}extra = 1\n")).is_err());
        assert!(parse_model(&format!("{base}alpha_1 = 0.1\n")).is_err());
        assert!(parse_model(&format!("variant = local\n{base}")).is_err());
        assert!(parse_model(&base.replace("noise_sd = 1", "noise_sd = -1")).is_err());
        assert!(parse_model("order = local:1;[0]\nnoise_sd = 1\n").is_err());
        assert!(parse_model("garbage").is_err());
    }

    proptest! {
        #[test]
        fn panel_text_is_bit_exact(values in proptest::collection::vec(-1e12f64..1e12, 6)) {
            let p = TimeSeriesPanel::from_values(DMatrix::from_vec(2, 3, values)).unwrap();
            let back = parse_panel(&write_panel(&p)).unwrap();
            prop_assert_eq!(back.values(), p.values());
        }

        #[test]
        fn model_text_is_bit_exact(theta in proptest::collection::vec(-10f64..10.0, 6), sd in 1e-6f64..1e3) {
            let order: GnarOrder = "community:[1,2];{[1],[1,1]}".parse().unwrap();
            let m = GnarModel::from_parameters(order, &theta, 5, sd).unwrap();
            prop_assert_eq!(parse_model(&write_model(&m)).unwrap(), m);
        }
    }
}
