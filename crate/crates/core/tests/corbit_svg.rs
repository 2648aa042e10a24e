mod common;

use common::*;
use gnar::{corbit_grid, render_corbit, render_rcorbit, CorbitGrid, Correlation, CorrelationKind, RenderOptions};

fn has_class(node: &roxmltree::Node, class: &str) -> bool {
    node.attribute("class").is_some_and(|c| c.split_whitespace().any(|x| x == class))
}

fn count(doc: &roxmltree::Document, class: &str) -> usize {
    doc.descendants().filter(|n| has_class(n, class)).count()
}

fn canvas(doc: &roxmltree::Document) -> (f64, f64) {
    let root = doc.root_element();
    (
        root.attribute("width").unwrap().parse().unwrap(),
        root.attribute("height").unwrap().parse().unwrap(),
    )
}

fn assert_inside(doc: &roxmltree::Document) {
    let (w, h) = canvas(doc);
    for n in doc.descendants().filter(|n| n.has_tag_name("circle")) {
        let f = |a| n.attribute(a).unwrap().parse::<f64>().unwrap();
        let (cx, cy, r) = (f("cx"), f("cy"), f("r"));
        assert!(cx - r >= 0.0 && cy - r >= 0.0 && cx + r <= w && cy + r <= h, "circle at ({cx}, {cy}) r {r}");
    }
    for n in doc.descendants().filter(|n| n.has_tag_name("text")) {
        let f = |a| n.attribute(a).unwrap().parse::<f64>().unwrap();
        assert!((0.0..=w).contains(&f("x")) && (0.0..=h).contains(&f("y")));
    }
}

fn fivenet_grids() -> (CorbitGrid, CorbitGrid) {
    let topo = five_net();
    let part = five_partition();
    let mut rng = rng(21);
    let panel = gaussian_panel(&mut rng, 5, 100);
    (
        corbit_grid(&panel, &topo, 8, 3, CorrelationKind::Pnacf, None).unwrap(),
        corbit_grid(&panel, &topo, 8, 3, CorrelationKind::Pnacf, Some(&part)).unwrap(),
    )
}

#[test]
fn corbit_counts_and_round_trip() {
    let (grid, _) = fivenet_grids();
    let svg = render_corbit(&grid, &RenderOptions::default()).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    assert_eq!(count(&doc, "point"), 24);
    assert_eq!(count(&doc, "ring"), 3);
    assert_eq!(count(&doc, "lag-label"), 8);
    assert_eq!(count(&doc, "zero-marker"), 1);
    let mut seen = std::collections::BTreeSet::new();
    for n in doc.descendants().filter(|n| has_class(n, "point")) {
        let h: usize = n.attribute("data-lag").unwrap().parse().unwrap();
        let r: usize = n.attribute("data-stage").unwrap().parse().unwrap();
        let v: f64 = n.attribute("data-value").unwrap().parse().unwrap();
        assert_eq!(v, grid.get(None, h, r).value);
        assert!(seen.insert((h, r)));
    }
    assert_eq!(seen.len(), 24);
    let labels: Vec<&str> = doc
        .descendants()
        .filter(|n| has_class(n, "lag-label"))
        .map(|n| n.text().unwrap())
        .collect();
    assert_eq!(labels, ["1", "2", "3", "4", "5", "6", "7", "8"]);
    assert_inside(&doc);
}

#[test]
fn lag_one_is_at_twelve_and_lags_run_clockwise() {
    let (grid, _) = fivenet_grids();
    let svg = render_corbit(&grid, &RenderOptions::default()).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let pos = |h: &str| {
        let n = doc
            .descendants()
            .find(|n| has_class(n, "lag-label") && n.attribute("data-lag") == Some(h))
            .unwrap();
        let f = |a| n.attribute(a).unwrap().parse::<f64>().unwrap();
        (f("x"), f("y"))
    };
    let (w, _) = canvas(&doc);
    let (x1, y1) = pos("1");
    let (x3, y3) = pos("3");
    assert!((x1 - w / 2.0).abs() < 1e-3 && y1 < w / 2.0);
    // a quarter turn clockwise from twelve is three o'clock
    assert!(x3 > w / 2.0 && (y3 - w / 2.0).abs() < 1e-3);
}

#[test]
fn rcorbit_counts_legend_and_means() {
    let (_, grid) = fivenet_grids();
    let svg = render_rcorbit(&grid, &RenderOptions::default()).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(count(&doc, "point"), 48);
    assert_eq!(count(&doc, "mean"), 24);
    assert_eq!(count(&doc, "ring"), 3);
    assert_eq!(count(&doc, "lag-label"), 8);
    let legend: Vec<&str> = doc
        .descendants()
        .filter(|n| has_class(n, "legend-entry"))
        .map(|n| n.text().unwrap())
        .collect();
    assert_eq!(legend, ["K1", "K2"]);
    for n in doc.descendants().filter(|n| has_class(n, "mean")) {
        let h: usize = n.attribute("data-lag").unwrap().parse().unwrap();
        let r: usize = n.attribute("data-stage").unwrap().parse().unwrap();
        let v: f64 = n.attribute("data-value").unwrap().parse().unwrap();
        assert_eq!(v, grid.mean(h, r).unwrap().value);
    }
    assert_inside(&doc);
}

#[test]
fn rendering_is_byte_deterministic() {
    let (plain, grouped) = fivenet_grids();
    let o = RenderOptions::default();
    assert_eq!(render_corbit(&plain, &o).unwrap(), render_corbit(&plain, &o).unwrap());
    assert_eq!(render_rcorbit(&grouped, &o).unwrap(), render_rcorbit(&grouped, &o).unwrap());
}

#[test]
fn zero_grid_is_neutral_and_minimal() {
    let zero = Correlation { value: 0.0, degenerate: false };
    let grid = CorbitGrid::from_layers(CorrelationKind::Nacf, 8, 3, None, vec![vec![zero; 24]]).unwrap();
    let o = RenderOptions::default();
    let svg = render_corbit(&grid, &o).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    for n in doc.descendants().filter(|n| has_class(n, "point")) {
        assert_eq!(n.attribute("fill"), Some("#f7f7f7"));
        assert_eq!(n.attribute("r").unwrap().parse::<f64>().unwrap(), o.min_point_radius);
    }
}

#[test]
fn equal_communities_match_their_mean() {
    let cell = Correlation { value: -0.4, degenerate: false };
    let grid = CorbitGrid::from_layers(
        CorrelationKind::Pnacf,
        8,
        3,
        Some(vec!["a".into(), "b".into(), "c".into()]),
        vec![vec![cell; 24]; 3],
    )
    .unwrap();
    let svg = render_rcorbit(&grid, &RenderOptions::default()).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let mean_fill = doc.descendants().find(|n| has_class(n, "mean")).unwrap().attribute("fill").unwrap();
    for n in doc.descendants().filter(|n| has_class(n, "point")) {
        assert_eq!(n.attribute("fill"), Some(mean_fill));
    }
}

#[test]
fn degenerate_cells_are_hollow() {
    let cells = vec![Correlation { value: 0.0, degenerate: true }; 6];
    let grid = CorbitGrid::from_layers(CorrelationKind::Nacf, 3, 2, None, vec![cells]).unwrap();
    let svg = render_corbit(&grid, &RenderOptions::default()).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(count(&doc, "degenerate"), 6);
    for n in doc.descendants().filter(|n| has_class(n, "point")) {
        assert_eq!(n.attribute("fill"), Some("none"));
    }
}

#[test]
fn large_grids_stay_on_the_canvas() {
    let cell = Correlation { value: 1.0, degenerate: false };
    let grid = CorbitGrid::from_layers(
        CorrelationKind::Nacf,
        20,
        9,
        Some(vec!["x".into(), "y".into()]),
        vec![vec![cell; 180]; 2],
    )
    .unwrap();
    let svg = render_rcorbit(&grid, &RenderOptions::default()).unwrap();
    assert_inside(&roxmltree::Document::parse(&svg).unwrap());
}
