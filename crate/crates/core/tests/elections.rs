mod common;

use std::collections::BTreeMap;

use common::*;
use gnar::elections::{classify, difference, parse_returns, standardize, state_index, us_border_network, BLUE, RED, STATES, SWING};
use gnar::GnarError;

/// `(year, postal) -> (republican votes, democratic votes, total)` read with
/// plain string splitting.
fn recount(text: &str) -> BTreeMap<(String, String), (f64, f64, f64)> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let (year, po, votes, total, party) =
        (col("year"), col("state_po"), col("candidatevotes"), col("totalvotes"), col("party_simplified"));
    let mut out: BTreeMap<(String, String), (f64, f64, f64)> = BTreeMap::new();
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let e = out.entry((f[year].to_string(), f[po].to_string())).or_default();
        let v: f64 = f[votes].parse().unwrap();
        e.2 = f[total].parse().unwrap();
        match f[party] {
            "REPUBLICAN" => e.0 += v,
            "DEMOCRAT" => e.1 += v,
            _ => {}
        }
    }
    out
}

#[test]
fn sample_panel_matches_recount() {
    let text = read_fixture("election_sample.csv");
    let returns = parse_returns(text.as_bytes()).unwrap();
    let rep = &returns.republican_share;
    assert_eq!(rep.node_count(), 51);
    assert_eq!(rep.len(), 12);
    assert_eq!(rep.time_labels().first().map(String::as_str), Some("1976"));
    assert_eq!(rep.time_labels().last().map(String::as_str), Some("2020"));
    assert_eq!(rep.node_labels()[0], "AL");
    assert_eq!(rep.node_labels()[8], "DC");
    assert!(rep.values().iter().all(|v| (0.0..=100.0).contains(v)));

    let oracle = recount(&text);
    let mut wins_r = vec![0; 51];
    let mut wins_d = vec![0; 51];
    for ((year, po), (r, d, total)) in &oracle {
        let i = state_index(po).unwrap();
        let t = rep.time_labels().iter().position(|y| y == year).unwrap();
        assert!((rep.get(i, t) - 100.0 * r / total).abs() < 1e-12);
        assert!((returns.democratic_share.get(i, t) - 100.0 * d / total).abs() < 1e-12);
        if r > d {
            wins_r[i] += 1;
        } else if d > r {
            wins_d[i] += 1;
        }
    }
    let class = classify(&returns);
    assert_eq!(class.wins_republican, wins_r);
    assert_eq!(class.wins_democratic, wins_d);
    for i in 0..51 {
        let expected = if wins_r[i] >= 9 {
            RED
        } else if wins_d[i] >= 9 {
            BLUE
        } else {
            SWING
        };
        assert_eq!(class.community_of[i], expected, "{}", STATES[i].1);
    }
    let part = class.partition().unwrap();
    assert_eq!(part.labels(), ["Red", "Blue", "Swing"]);
    let csv = class.to_csv();
    assert_eq!(csv.lines().next(), Some("state,wins_R,wins_D,community"));
    assert_eq!(csv.lines().count(), 52);
}

#[test]
fn fusion_rows_are_summed() {
    let text = "year,state,state_po,candidatevotes,totalvotes,party_detailed,party_simplified\n\
                2000,NEW YORK,NY,500,1000,REPUBLICAN,REPUBLICAN\n\
                2000,NEW YORK,NY,100,1000,CONSERVATIVE,REPUBLICAN\n\
                2000,NEW YORK,NY,350,1000,DEMOCRAT,DEMOCRAT\n";
    // only one state present, so the panel cannot be completed
    match parse_returns(text.as_bytes()) {
        Err(GnarError::Election(msg)) => assert!(msg.contains("Alabama"), "{msg}"),
        other => panic!("expected a missing-cell error, got {other:?}"),
    }
    let mut full = String::from("year,state_po,candidatevotes,totalvotes,party_simplified\n");
    for (_, po) in STATES {
        full.push_str(&format!("2000,{po},500,1000,REPUBLICAN\n2000,{po},100,1000,REPUBLICAN\n2000,{po},350,1000,DEMOCRAT\n"));
    }
    let returns = parse_returns(full.as_bytes()).unwrap();
    assert!((returns.republican_share.get(32, 0) - 60.0).abs() < 1e-12);
}

#[test]
fn malformed_returns_are_rejected() {
    assert!(parse_returns(b"year,state_po,candidatevotes,totalvotes\n").is_err());
    let unknown = "year,state_po,candidatevotes,totalvotes,party_simplified\n2000,PR,1,2,REPUBLICAN\n";
    assert!(matches!(parse_returns(unknown.as_bytes()), Err(GnarError::Parse { .. })));
    let mut zero = String::from("year,state_po,candidatevotes,totalvotes,party_simplified\n");
    for (_, po) in STATES {
        zero.push_str(&format!("2000,{po},0,0,REPUBLICAN\n"));
    }
    assert!(parse_returns(zero.as_bytes()).is_err());
}

#[test]
fn border_network_is_simple_and_undirected() {
    let net = us_border_network();
    assert_eq!(net.node_count(), 51);
    let adj = net.adjacency_matrix();
    assert_eq!(adj.clone(), adj.transpose());
    assert!((0..51).all(|i| adj[(i, i)] == 0.0));
    // the contiguous 48 plus DC form a single component
    let dist = net.distances();
    let al = state_index("AL").unwrap();
    for (i, (_, po)) in STATES.iter().enumerate() {
        let reachable = dist.get(al, i).is_some();
        assert_eq!(reachable, *po != "AK" && *po != "HI", "{po}");
    }
}

#[test]
fn transforms_on_the_sample() {
    let returns = parse_returns(read_fixture("election_sample.csv").as_bytes()).unwrap();
    let panel = &returns.republican_share;
    let s = standardize(panel).unwrap();
    for row in s.values().row_iter() {
        assert!(row.sum().abs() < 1e-12);
        assert!((row.norm_squared() - 1.0).abs() < 1e-12);
    }
    let diff = difference(panel).unwrap();
    assert_eq!(diff.len(), 11);
    assert_eq!(diff.time_labels()[0], "1980");
    // permuting nodes commutes with both transforms
    let mut rng = rng(31);
    let perm = random_permutation(&mut rng, 51);
    assert_eq!(standardize(&panel.permuted(&perm)).unwrap().values(), s.permuted(&perm).values());
    assert_eq!(difference(&panel.permuted(&perm)).unwrap().values(), diff.permuted(&perm).values());
}
