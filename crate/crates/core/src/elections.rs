//! US presidential returns: ingestion, the state border network, Red/Blue/Swing
//! classification and the standardised / differenced panels.
//!
//! Input is the MIT Election Lab per-candidate file. Required columns are
//! `year`, `state_po` (or `state`), `candidatevotes`, `totalvotes` and
//! `party_simplified` (falling back to `party_detailed`).

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;

use crate::error::{GnarError, Result};
use crate::network::Network;
use crate::panel::TimeSeriesPanel;
use crate::partition::CommunityPartition;

/// `(name, postal code)` in alphabetical order of name.
pub const STATES: [(&str, &str); 51] = [
    ("Alabama", "AL"),
    ("Alaska", "AK"),
    ("Arizona", "AZ"),
    ("Arkansas", "AR"),
    ("California", "CA"),
    ("Colorado", "CO"),
    ("Connecticut", "CT"),
    ("Delaware", "DE"),
    ("District of Columbia", "DC"),
    ("Florida", "FL"),
    ("Georgia", "GA"),
    ("Hawaii", "HI"),
    ("Idaho", "ID"),
    ("Illinois", "IL"),
    ("Indiana", "IN"),
    ("Iowa", "IA"),
    ("Kansas", "KS"),
    ("Kentucky", "KY"),
    ("Louisiana", "LA"),
    ("Maine", "ME"),
    ("Maryland", "MD"),
    ("Massachusetts", "MA"),
    ("Michigan", "MI"),
    ("Minnesota", "MN"),
    ("Mississippi", "MS"),
    ("Missouri", "MO"),
    ("Montana", "MT"),
    ("Nebraska", "NE"),
    ("Nevada", "NV"),
    ("New Hampshire", "NH"),
    ("New Jersey", "NJ"),
    ("New Mexico", "NM"),
    ("New York", "NY"),
    ("North Carolina", "NC"),
    ("North Dakota", "ND"),
    ("Ohio", "OH"),
    ("Oklahoma", "OK"),
    ("Oregon", "OR"),
    ("Pennsylvania", "PA"),
    ("Rhode Island", "RI"),
    ("South Carolina", "SC"),
    ("South Dakota", "SD"),
    ("Tennessee", "TN"),
    ("Texas", "TX"),
    ("Utah", "UT"),
    ("Vermont", "VT"),
    ("Virginia", "VA"),
    ("Washington", "WA"),
    ("West Virginia", "WV"),
    ("Wisconsin", "WI"),
    ("Wyoming", "WY"),
];

/// Land borders; corner contacts (AZ–CO, NM–UT) are not borders.
const BORDERS: [(&str, &str); 51] = [
    ("AL", "FL GA MS TN"),
    ("AK", ""),
    ("AZ", "CA NV UT NM"),
    ("AR", "LA MS MO OK TN TX"),
    ("CA", "AZ NV OR"),
    ("CO", "KS NE NM OK UT WY"),
    ("CT", "MA NY RI"),
    ("DE", "MD NJ PA"),
    ("DC", "MD VA"),
    ("FL", "AL GA"),
    ("GA", "AL FL NC SC TN"),
    ("HI", ""),
    ("ID", "MT NV OR UT WA WY"),
    ("IL", "IN IA KY MO WI"),
    ("IN", "IL KY MI OH"),
    ("IA", "IL MN MO NE SD WI"),
    ("KS", "CO MO NE OK"),
    ("KY", "IL IN MO OH TN VA WV"),
    ("LA", "AR MS TX"),
    ("ME", "NH"),
    ("MD", "DE PA VA WV DC"),
    ("MA", "CT NH NY RI VT"),
    ("MI", "IN OH WI"),
    ("MN", "IA ND SD WI"),
    ("MS", "AL AR LA TN"),
    ("MO", "AR IL IA KS KY NE OK TN"),
    ("MT", "ID ND SD WY"),
    ("NE", "CO IA KS MO SD WY"),
    ("NV", "AZ CA ID OR UT"),
    ("NH", "ME MA VT"),
    ("NJ", "DE NY PA"),
    ("NM", "AZ CO OK TX"),
    ("NY", "CT MA NJ PA VT"),
    ("NC", "GA SC TN VA"),
    ("ND", "MN MT SD"),
    ("OH", "IN KY MI PA WV"),
    ("OK", "AR CO KS MO NM TX"),
    ("OR", "CA ID NV WA"),
    ("PA", "DE MD NJ NY OH WV"),
    ("RI", "CT MA"),
    ("SC", "GA NC"),
    ("SD", "IA MN MT NE ND WY"),
    ("TN", "AL AR GA KY MS MO NC VA"),
    ("TX", "AR LA NM OK"),
    ("UT", "AZ CO ID NV WY"),
    ("VT", "MA NH NY"),
    ("VA", "KY MD NC TN WV DC"),
    ("WA", "ID OR"),
    ("WV", "KY MD OH PA VA"),
    ("WI", "IL IA MI MN"),
    ("WY", "CO ID MT NE SD UT"),
];

/// 0-based node index of a postal code or (case-insensitive) state name.
pub fn state_index(key: &str) -> Option<usize> {
    let key = key.trim();
    STATES.iter().position(|(name, po)| {
        po.eq_ignore_ascii_case(key) || name.eq_ignore_ascii_case(key)
    })
}

fn postal_codes() -> Vec<String> {
    STATES.iter().map(|(_, po)| po.to_string()).collect()
}

/// 51-node land border network in [`STATES`] order.
pub fn us_border_network() -> Network {
    let mut edges = BTreeSet::new();
    for (po, list) in BORDERS {
        let a = state_index(po).expect("fixture codes are known") + 1;
        for other in list.split_whitespace() {
            let b = state_index(other).expect("fixture codes are known") + 1;
            edges.insert((a.min(b), a.max(b)));
        }
    }
    let edges: Vec<_> = edges.into_iter().collect();
    Network::new(STATES.len(), &edges).expect("border fixture is a simple graph")
}

/// Republican and Democratic percentages of total votes, 51 states × years.
#[derive(Debug, Clone, PartialEq)]
pub struct ElectionReturns {
    pub republican_share: TimeSeriesPanel,
    pub democratic_share: TimeSeriesPanel,
}

impl ElectionReturns {
    pub fn years(&self) -> &[String] {
        self.republican_share.time_labels()
    }
}

#[derive(Default, Clone, Copy)]
struct Cell {
    republican: f64,
    democratic: f64,
    total: f64,
}

fn column(headers: &csv::StringRecord, names: &[&str]) -> Option<usize> {
    names
        .iter()
        .find_map(|n| headers.iter().position(|h| h.trim().eq_ignore_ascii_case(n)))
}

fn bad(line: u64, message: impl Into<String>) -> GnarError {
    GnarError::Parse {
        line: line as usize,
        message: message.into(),
    }
}

/// Parses the per-candidate returns file into percentage panels.
///
/// Party votes are summed per state-year; the denominator is the largest
/// `totalvotes` seen for that state-year. Every state must appear in every
/// year present in the file.
pub fn parse_returns(bytes: &[u8]) -> Result<ElectionReturns> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(bytes);
    let headers = rdr
        .headers()
        .map_err(|e| bad(1, e.to_string()))?
        .clone();
    let need = |names: &[&str]| {
        column(&headers, names).ok_or_else(|| bad(1, format!("missing column {}", names[0])))
    };
    let year_col = need(&["year"])?;
    let state_col = need(&["state_po", "state"])?;
    let votes_col = need(&["candidatevotes"])?;
    let total_col = need(&["totalvotes"])?;
    let party_col = need(&["party_simplified", "party_detailed"])?;

    let mut cells: BTreeMap<(u32, usize), Cell> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| bad(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let get = |i: usize, what: &str| {
            rec.get(i)
                .ok_or_else(|| bad(line, format!("missing {what}")))
        };
        let year: u32 = get(year_col, "year")?
            .parse()
            .map_err(|_| bad(line, "invalid year"))?;
        let state_raw = get(state_col, "state")?;
        let state = state_index(state_raw)
            .ok_or_else(|| bad(line, format!("unknown state {state_raw:?}")))?;
        let number = |i: usize, what: &str| -> Result<f64> {
            let raw = get(i, what)?;
            let v: f64 = if raw.is_empty() || raw.eq_ignore_ascii_case("NA") {
                0.0
            } else {
                raw.parse().map_err(|_| bad(line, format!("invalid {what} {raw:?}")))?
            };
            if !(v.is_finite() && v >= 0.0) {
                return Err(bad(line, format!("invalid {what} {raw:?}")));
            }
            Ok(v)
        };
        let votes = number(votes_col, "candidatevotes")?;
        let total = number(total_col, "totalvotes")?;
        let party = get(party_col, "party")?.to_ascii_uppercase();
        let cell = cells.entry((year, state)).or_default();
        cell.total = cell.total.max(total);
        match party.as_str() {
            "REPUBLICAN" => cell.republican += votes,
            "DEMOCRAT" | "DEMOCRATIC" => cell.democratic += votes,
            _ => {}
        }
    }
    let years: Vec<u32> = cells.keys().map(|k| k.0).collect::<BTreeSet<_>>().into_iter().collect();
    if years.is_empty() {
        return Err(GnarError::Election("returns file has no rows".into()));
    }
    let d = STATES.len();
    let mut rep = DMatrix::zeros(d, years.len());
    let mut dem = DMatrix::zeros(d, years.len());
    for (t, &year) in years.iter().enumerate() {
        for (i, (name, _)) in STATES.iter().enumerate() {
            let cell = cells
                .get(&(year, i))
                .ok_or_else(|| GnarError::Election(format!("no returns for {name} in {year}")))?;
            if cell.total <= 0.0 {
                return Err(GnarError::Election(format!("total votes for {name} in {year} is zero")));
            }
            if cell.republican + cell.democratic > cell.total {
                return Err(GnarError::Election(format!(
                    "party votes exceed the total for {name} in {year}"
                )));
            }
            rep[(i, t)] = 100.0 * cell.republican / cell.total;
            dem[(i, t)] = 100.0 * cell.democratic / cell.total;
        }
    }
    let labels = postal_codes();
    let times: Vec<String> = years.iter().map(u32::to_string).collect();
    Ok(ElectionReturns {
        republican_share: TimeSeriesPanel::new(rep, labels.clone(), times.clone())?,
        democratic_share: TimeSeriesPanel::new(dem, labels, times)?,
    })
}

pub fn load_returns(path: &std::path::Path) -> Result<ElectionReturns> {
    let bytes = std::fs::read(path)
        .map_err(|e| GnarError::Election(format!("cannot read {}: {e}", path.display())))?;
    parse_returns(&bytes)
}

pub const RED: usize = 0;
pub const BLUE: usize = 1;
pub const SWING: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct StateClassification {
    pub wins_republican: Vec<usize>,
    pub wins_democratic: Vec<usize>,
    /// Wins needed for Red or Blue: `ceil(3T/4)`.
    pub threshold: usize,
    /// `community_of[i]` is `RED`, `BLUE` or `SWING`.
    pub community_of: Vec<usize>,
}

impl StateClassification {
    /// Partition labelled `Red`, `Blue`, `Swing`; fails when a class is empty.
    pub fn partition(&self) -> Result<CommunityPartition> {
        CommunityPartition::with_labels(
            self.community_of.clone(),
            vec!["Red".into(), "Blue".into(), "Swing".into()],
        )
    }

    /// `state,wins_R,wins_D,community` with 1-based communities.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("state,wins_R,wins_D,community\n");
        for (i, (_, po)) in STATES.iter().enumerate() {
            out.push_str(&format!(
                "{po},{},{},{}\n",
                self.wins_republican[i],
                self.wins_democratic[i],
                self.community_of[i] + 1
            ));
        }
        out
    }
}

/// Counts plurality wins between the two major parties (ties count for
/// neither) and applies the at-least-75% rule.
pub fn classify(returns: &ElectionReturns) -> StateClassification {
    let rep = returns.republican_share.values();
    let dem = returns.democratic_share.values();
    let (d, t_len) = rep.shape();
    let threshold = (3 * t_len).div_ceil(4);
    let mut wins_republican = vec![0; d];
    let mut wins_democratic = vec![0; d];
    for i in 0..d {
        for t in 0..t_len {
            if rep[(i, t)] > dem[(i, t)] {
                wins_republican[i] += 1;
            } else if dem[(i, t)] > rep[(i, t)] {
                wins_democratic[i] += 1;
            }
        }
    }
    let community_of = (0..d)
        .map(|i| {
            if wins_republican[i] >= threshold {
                RED
            } else if wins_democratic[i] >= threshold {
                BLUE
            } else {
                SWING
            }
        })
        .collect();
    StateClassification {
        wins_republican,
        wins_democratic,
        threshold,
        community_of,
    }
}

/// Per node, `(x - x̄) / {Σ_t (x - x̄)²}^{1/2}`.
pub fn standardize(panel: &TimeSeriesPanel) -> Result<TimeSeriesPanel> {
    let means = panel.node_means();
    let centred = panel.centred_by(&means)?;
    let mut values = centred.values().clone();
    for (i, mut row) in values.row_iter_mut().enumerate() {
        let ss = row.norm_squared();
        let scale = panel.values().row(i).amax().max(1.0);
        if ss <= (f64::EPSILON * scale).powi(2) * panel.len() as f64 {
            return Err(GnarError::ConstantSeries(panel.node_labels()[i].clone()));
        }
        row /= ss.sqrt();
    }
    Ok(centred.with_values(values)?.with_metadata("transform", "standardised"))
}

/// `X_t - X_{t-1}`, labelled by the later time.
pub fn difference(panel: &TimeSeriesPanel) -> Result<TimeSeriesPanel> {
    let t_len = panel.len();
    if t_len < 2 {
        return Err(GnarError::SeriesTooShort { required: 2, actual: t_len });
    }
    let x = panel.values();
    let values = DMatrix::from_fn(panel.node_count(), t_len - 1, |i, t| x[(i, t + 1)] - x[(i, t)]);
    TimeSeriesPanel::new(
        values,
        panel.node_labels().to_vec(),
        panel.time_labels()[1..].to_vec(),
    )
}
