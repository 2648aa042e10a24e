#![allow(dead_code)]

use std::path::PathBuf;

use gnar::io::{parse_edge_list, parse_model, parse_partition};
use gnar::model::{Scope, TermKind};
use gnar::{fit_ols, CommunityPartition, DesignSystem, GnarError, GnarModel, GnarOrder, Network, TimeSeriesPanel, Topology};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

pub fn five_net() -> Topology {
    Topology::new(parse_edge_list(&read_fixture("fivenet_edges.csv"), None).unwrap())
}

pub fn five_partition() -> CommunityPartition {
    parse_partition(&read_fixture("fivenet_partition.csv"), 5).unwrap()
}

pub fn table1_model() -> GnarModel {
    parse_model(&read_fixture("table1_model.txt")).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Erdős–Rényi graph on `d` nodes with edge probability `p`.
pub fn random_network(rng: &mut ChaCha8Rng, d: usize, p: f64) -> Network {
    let mut edges = Vec::new();
    for a in 1..=d {
        for b in a + 1..=d {
            if rng.random_bool(p) {
                edges.push((a, b));
            }
        }
    }
    Network::new(d, &edges).unwrap()
}

/// Connected random graph: a random spanning path plus extra edges.
pub fn random_connected(rng: &mut ChaCha8Rng, d: usize, extra: f64) -> Network {
    let mut perm: Vec<usize> = (1..=d).collect();
    for i in (1..d).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let mut edges: Vec<(usize, usize)> = perm.windows(2).map(|w| (w[0].min(w[1]), w[0].max(w[1]))).collect();
    for a in 1..=d {
        for b in a + 1..=d {
            if !edges.contains(&(a, b)) && rng.random_bool(extra) {
                edges.push((a, b));
            }
        }
    }
    Network::new(d, &edges).unwrap()
}

pub fn gaussian_panel(rng: &mut ChaCha8Rng, d: usize, t: usize) -> TimeSeriesPanel {
    TimeSeriesPanel::from_values(DMatrix::from_fn(d, t, |_, _| rng.sample(StandardNormal))).unwrap()
}

/// Random assignment of `d` nodes to `c` nonempty communities.
pub fn random_partition(rng: &mut ChaCha8Rng, d: usize, c: usize) -> CommunityPartition {
    let mut assignment: Vec<usize> = (0..d).map(|i| if i < c { i } else { rng.random_range(0..c) }).collect();
    for i in (1..d).rev() {
        assignment.swap(i, rng.random_range(0..=i));
    }
    CommunityPartition::from_assignment(assignment).unwrap()
}

pub fn random_permutation(rng: &mut ChaCha8Rng, d: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..d).collect();
    for i in (1..d).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    perm
}

/// All-pairs hop counts by Floyd–Warshall on the adjacency matrix.
pub fn floyd_warshall(net: &Network) -> Vec<Vec<Option<usize>>> {
    let d = net.node_count();
    let adj = net.adjacency_matrix();
    let mut dist = vec![vec![None; d]; d];
    for i in 0..d {
        dist[i][i] = Some(0);
        for j in 0..d {
            if adj[(i, j)] != 0.0 {
                dist[i][j] = Some(1);
            }
        }
    }
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                if let (Some(a), Some(b)) = (dist[i][k], dist[k][j]) {
                    if dist[i][j].is_none_or(|cur| a + b < cur) {
                        dist[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    dist
}

/// `X_{i,t}` from the structural form, using hop counts and `1/|N_r(i)|`
/// weights computed here from scratch.
pub fn structural_step(model: &GnarModel, net: &Network, part: &CommunityPartition, history: &[DVector<f64>]) -> DVector<f64> {
    let d = net.node_count();
    let dist = floyd_warshall(net);
    let order = model.order();
    let theta = model.parameters();
    let terms = order.terms(d);
    let mut out = DVector::zeros(d);
    for i in 0..d {
        let c = part.community_of(i);
        let mut x = 0.0;
        for (term, &v) in terms.iter().zip(&theta) {
            if term.scope != Scope::Community(c) {
                continue;
            }
            let prev = &history[term.lag - 1];
            match term.kind {
                TermKind::Alpha => x += v * prev[i],
                TermKind::Beta(r) => {
                    let ring: Vec<usize> = (0..d).filter(|&j| dist[i][j] == Some(r)).collect();
                    let inside: Vec<usize> = ring.iter().copied().filter(|&j| part.community_of(j) == c).collect();
                    let z: f64 = inside.iter().map(|&j| prev[j] / ring.len() as f64).sum();
                    x += v * z;
                }
            }
        }
        out[i] = x;
    }
    out
}


pub struct Case {
    pub topo: Topology,
    pub part: CommunityPartition,
    pub order: GnarOrder,
    pub panel: TimeSeriesPanel,
}

pub fn random_order(rng: &mut ChaCha8Rng, communities: usize, r_max: usize, equal_lags: bool) -> GnarOrder {
    let shared_p = rng.random_range(1..=3);
    let stages = (0..communities)
        .map(|_| {
            let p = if equal_lags { shared_p } else { rng.random_range(1..=3) };
            (0..p).map(|_| rng.random_range(0..=r_max.min(2))).collect()
        })
        .collect();
    GnarOrder::community(stages).unwrap()
}

pub fn random_case(rng: &mut ChaCha8Rng, equal_lags: bool) -> Case {
    let d = rng.random_range(4..=10);
    let net = random_connected(rng, d, 0.25);
    let topo = Topology::new(net);
    let c = rng.random_range(1..=3.min(d));
    let part = random_partition(rng, d, c);
    let order = random_order(rng, c, topo.r_max(), equal_lags);
    let t = rng.random_range(20..=60);
    let panel = gaussian_panel(rng, d, t);
    Case { topo, part, order, panel }
}

/// Draws cases until `count` of them have full-rank designs.
pub fn full_rank_cases(seed: u64, count: usize, equal_lags: bool) -> Vec<(Case, DesignSystem)> {
    full_rank_cases_up_to(seed, count, equal_lags, usize::MAX)
}

/// As [`full_rank_cases`], skipping designs with more than `max_rows` rows.
pub fn full_rank_cases_up_to(seed: u64, count: usize, equal_lags: bool, max_rows: usize) -> Vec<(Case, DesignSystem)> {
    let mut rng = rng(seed);
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        assert!(attempts < 50 * count, "too many rejected draws");
        let case = random_case(&mut rng, equal_lags);
        let ds = DesignSystem::build(&case.panel, &case.order, &case.topo, &case.part).unwrap();
        if ds.row_count() > max_rows {
            continue;
        }
        match fit_ols(&ds) {
            Ok(_) => out.push((case, ds)),
            Err(GnarError::RankDeficient(_)) => continue,
            Err(e) => panic!("unexpected error {e}"),
        }
    }
    out
}

