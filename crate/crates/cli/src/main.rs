use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gnar::elections::{classify, difference, load_returns, standardize, us_border_network};
use gnar::io::{parse_edge_list, parse_model, parse_panel, parse_partition, parse_weight_overrides, write_model, write_panel};
use gnar::network::WeightMatrix;
use gnar::{
    compare, corbit_grid, fit, fit_per_community, forecast, render_corbit, render_rcorbit, simulate,
    CommunityPartition, CorbitGrid, CorrelationKind, ExternalForecast, FitResult, GnarOrder, ModelSpec,
    RenderOptions, SimulationConfig, TimeSeriesPanel, Topology,
};

#[derive(Parser)]
#[command(name = "gnar", version, about = "Community-alpha GNAR models on network time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a panel from a model file.
    Simulate(SimulateArgs),
    /// Fit a GNAR order to a panel by least squares.
    Fit(FitArgs),
    /// Tabulate NACF or PNACF values over lags and stages.
    Nacf(GridArgs),
    /// Render a Corbit (or, with a partition, R-Corbit) plot plus its grid.
    Corbit(GridArgs),
    /// Forecast ahead from the end of a panel with a fitted model.
    Forecast(ForecastArgs),
    /// Score one-step hold-out forecasts of several orders.
    Compare(CompareArgs),
    /// Run the presidential election study end to end.
    Elections(ElectionArgs),
}

#[derive(Args)]
struct NetworkArgs {
    /// Edge list `from,to` with 1-based node ids.
    #[arg(long)]
    network: PathBuf,
    /// Node count, when the edge list has no `# nodes = d` line.
    #[arg(long)]
    nodes: Option<usize>,
    /// Weight overrides `from,to,w`.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Community partition `node,community[,label]`; a single community when absent.
    #[arg(long, visible_alias = "communities")]
    partition: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    net: NetworkArgs,
    /// Model file with order, noise_sd and coefficients.
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    length: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = gnar::simulate::DEFAULT_BURN_IN)]
    burn_in: usize,
    /// Simulate even when the stationarity condition fails.
    #[arg(long)]
    allow_nonstationary: bool,
    /// Output panel file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    net: NetworkArgs,
    #[arg(long)]
    panel: PathBuf,
    /// Order such as `community:[1,2];{[1],[1,1]}`, `global:2;[1,0]` or `local:2;[1,0]`.
    #[arg(long)]
    order: GnarOrder,
    /// Fit each community on its own rows and usable range.
    #[arg(long)]
    per_community: bool,
    /// Directory for coefficients.csv, residuals.csv and model.txt.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Nacf,
    Pnacf,
}

impl From<Kind> for CorrelationKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Nacf => CorrelationKind::Nacf,
            Kind::Pnacf => CorrelationKind::Pnacf,
        }
    }
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    net: NetworkArgs,
    #[arg(long)]
    panel: PathBuf,
    #[arg(long, value_enum, default_value = "pnacf")]
    kind: Kind,
    #[arg(long, default_value_t = 8)]
    max_lag: usize,
    #[arg(long, default_value_t = 3)]
    max_stage: usize,
    /// Directory for grid.csv (and corbit.svg).
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ForecastArgs {
    #[command(flatten)]
    net: NetworkArgs,
    #[arg(long)]
    panel: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 1)]
    horizon: usize,
    /// Output panel file, one column per step ahead.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    net: NetworkArgs,
    #[arg(long)]
    panel: PathBuf,
    /// `name=order`, repeatable.
    #[arg(long = "order", value_parser = parse_named_order, required = true)]
    orders: Vec<ModelSpec>,
    /// `name=panel file` holding a forecast made elsewhere, repeatable.
    #[arg(long = "external", value_parser = parse_named_path)]
    externals: Vec<(String, PathBuf)>,
    /// Index (0-based) of the scored time step; the last one when absent.
    #[arg(long)]
    holdout: Option<usize>,
    /// Output report CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ElectionArgs {
    /// Returns CSV in the MIT Election Lab layout.
    #[arg(long)]
    returns: PathBuf,
    #[arg(long, default_value_t = 8)]
    max_lag: usize,
    #[arg(long, default_value_t = 3)]
    max_stage: usize,
    /// `name=panel file` holding a forecast of the final election, repeatable.
    #[arg(long = "external", value_parser = parse_named_path)]
    externals: Vec<(String, PathBuf)>,
    #[arg(long)]
    out_dir: PathBuf,
}

fn parse_named_order(s: &str) -> std::result::Result<ModelSpec, String> {
    let (name, order) = s.split_once('=').ok_or("expected name=order")?;
    let order = order.parse::<GnarOrder>().map_err(|e| e.to_string())?;
    Ok(ModelSpec { name: name.trim().to_string(), order })
}

fn parse_named_path(s: &str) -> std::result::Result<(String, PathBuf), String> {
    let (name, path) = s.split_once('=').ok_or("expected name=path")?;
    Ok((name.trim().to_string(), PathBuf::from(path)))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Write-then-rename so readers never see a partial file.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = path.file_name().context("output path has no file name")?.to_string_lossy();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.with_context(|| format!("writing {}", path.display()))
}

fn load_panel(path: &Path) -> Result<TimeSeriesPanel> {
    parse_panel(&read(path)?).with_context(|| format!("parsing panel {}", path.display()))
}

impl NetworkArgs {
    fn load(&self) -> Result<(Topology, CommunityPartition)> {
        let net = parse_edge_list(&read(&self.network)?, self.nodes)
            .with_context(|| format!("parsing network {}", self.network.display()))?;
        let topo = match &self.weights {
            None => Topology::new(net),
            Some(path) => {
                let overrides = parse_weight_overrides(&read(path)?)
                    .with_context(|| format!("parsing weights {}", path.display()))?;
                let weights = WeightMatrix::default_for(&net.distances()).with_overrides(&overrides)?;
                Topology::with_weights(net, weights)?
            }
        };
        let d = topo.node_count();
        let part = match &self.partition {
            None => CommunityPartition::single(d),
            Some(path) => parse_partition(&read(path)?, d)
                .with_context(|| format!("parsing partition {}", path.display()))?,
        };
        Ok((topo, part))
    }
}

fn check_panel(panel: &TimeSeriesPanel, topo: &Topology) -> Result<()> {
    if panel.node_count() != topo.node_count() {
        bail!("panel has {} nodes but the network has {}", panel.node_count(), topo.node_count());
    }
    Ok(())
}

fn report_stationarity(fit: &FitResult) {
    let s = &fit.stationarity;
    let sums: Vec<String> = s.sums.iter().map(|v| format!("{v:.3}")).collect();
    eprintln!(
        "stationarity: sums [{}], margin {:.3}, {}",
        sums.join(", "),
        s.margin,
        if s.stationary { "stationary" } else { "not stationary" }
    );
}

fn run_simulate(a: &SimulateArgs) -> Result<()> {
    let (topo, part) = a.net.load()?;
    let model = parse_model(&read(&a.model)?).with_context(|| format!("parsing model {}", a.model.display()))?;
    let cfg = SimulationConfig {
        length: a.length,
        burn_in: a.burn_in,
        seed: a.seed,
        allow_nonstationary: a.allow_nonstationary,
    };
    let panel = simulate(&model, &topo, &part, &cfg)?;
    write_atomic(&a.out, &write_panel(&panel))
}

fn coefficient_tables(fits: &[FitResult]) -> String {
    let mut out = String::new();
    for (i, f) in fits.iter().enumerate() {
        let table = f.coefficient_table();
        let body = if i == 0 { &table[..] } else { table.split_once('\n').map_or("", |x| x.1) };
        out.push_str(body);
    }
    out
}

fn run_fit(a: &FitArgs) -> Result<()> {
    let (topo, part) = a.net.load()?;
    let panel = load_panel(&a.panel)?;
    check_panel(&panel, &topo)?;
    if a.per_community {
        let fits = fit_per_community(&panel, &a.order, &topo, &part)?;
        let table = coefficient_tables(&fits);
        write_atomic(&a.out_dir.join("coefficients.csv"), &table)?;
        print!("{table}");
        return Ok(());
    }
    let result = fit(&panel, &a.order, &topo, &part)?;
    write_fit(&result, &panel, &a.out_dir, "")?;
    print!("{}", result.coefficient_table());
    report_stationarity(&result);
    Ok(())
}

fn write_fit(result: &FitResult, panel: &TimeSeriesPanel, dir: &Path, prefix: &str) -> Result<()> {
    write_atomic(&dir.join(format!("{prefix}coefficients.csv")), &result.coefficient_table())?;
    write_atomic(&dir.join(format!("{prefix}residuals.csv")), &write_panel(&result.residual_panel(panel)?))?;
    write_atomic(&dir.join(format!("{prefix}model.txt")), &write_model(&result.model()?))
}

fn render(grid: &CorbitGrid) -> Result<String> {
    let opts = RenderOptions::default();
    Ok(if grid.communities.is_some() { render_rcorbit(grid, &opts)? } else { render_corbit(grid, &opts)? })
}

fn run_grid(a: &GridArgs, svg: bool) -> Result<()> {
    let (topo, part) = a.net.load()?;
    let panel = load_panel(&a.panel)?;
    check_panel(&panel, &topo)?;
    let grouped = a.net.partition.as_ref().map(|_| &part);
    let grid = corbit_grid(&panel, &topo, a.max_lag, a.max_stage, a.kind.into(), grouped)?;
    // a one-community R-Corbit has nothing to compare, fall back to the plain plot
    let grid = match grid.communities {
        Some(_) if grid.community_count() < 2 => {
            corbit_grid(&panel, &topo, a.max_lag, a.max_stage, a.kind.into(), None)?
        }
        _ => grid,
    };
    write_atomic(&a.out_dir.join("grid.csv"), &grid.to_csv())?;
    if svg {
        write_atomic(&a.out_dir.join("corbit.svg"), &render(&grid)?)?;
    }
    Ok(())
}

fn run_forecast(a: &ForecastArgs) -> Result<()> {
    let (topo, part) = a.net.load()?;
    let panel = load_panel(&a.panel)?;
    check_panel(&panel, &topo)?;
    let model = parse_model(&read(&a.model)?).with_context(|| format!("parsing model {}", a.model.display()))?;
    let values = forecast(&model, &topo, &part, &panel, a.horizon)?;
    let times = (1..=a.horizon).map(|h| format!("h{h}")).collect();
    let out = TimeSeriesPanel::new(values, panel.node_labels().to_vec(), times)?;
    write_atomic(&a.out, &write_panel(&out))
}

fn load_externals(list: &[(String, PathBuf)]) -> Result<Vec<ExternalForecast>> {
    list.iter()
        .map(|(name, path)| Ok(ExternalForecast::from_panel(name.clone(), &load_panel(path)?)?))
        .collect()
}

fn run_compare(a: &CompareArgs) -> Result<()> {
    let (topo, part) = a.net.load()?;
    let panel = load_panel(&a.panel)?;
    check_panel(&panel, &topo)?;
    let holdout = a.holdout.unwrap_or(panel.len().saturating_sub(1));
    let report = compare(&panel, &topo, &part, &a.orders, &load_externals(&a.externals)?, holdout)?;
    let csv = report.to_csv();
    write_atomic(&a.out, &csv)?;
    print!("{csv}");
    Ok(())
}

fn run_elections(a: &ElectionArgs) -> Result<()> {
    let returns = load_returns(&a.returns).with_context(|| format!("loading {}", a.returns.display()))?;
    let dir = &a.out_dir;
    let panel = &returns.republican_share;
    let topo = Topology::new(us_border_network());
    let class = classify(&returns);
    let part = class.partition()?;
    write_atomic(&dir.join("panel.csv"), &write_panel(panel))?;
    write_atomic(&dir.join("classification.csv"), &class.to_csv())?;

    let levels = standardize(panel)?;
    let diffed = standardize(&difference(panel)?)?;
    write_atomic(&dir.join("standardised.csv"), &write_panel(&levels))?;
    write_atomic(&dir.join("differenced.csv"), &write_panel(&diffed))?;

    for (prefix, data) in [("levels", &levels), ("differenced", &diffed)] {
        let h = a.max_lag.min(data.len().saturating_sub(1));
        let grid = corbit_grid(data, &topo, h, a.max_stage, CorrelationKind::Pnacf, Some(&part))?;
        write_atomic(&dir.join(format!("{prefix}_pnacf.csv")), &grid.to_csv())?;
        write_atomic(&dir.join(format!("{prefix}_rcorbit.svg")), &render(&grid)?)?;
    }

    let level_order: GnarOrder = "community:[2,2,2];{[1,0]}".parse()?;
    let diff_order: GnarOrder = "community:[3,3,3];{[0,0,0]}".parse()?;
    let level_fit = fit(&levels, &level_order, &topo, &part)?;
    write_fit(&level_fit, &levels, dir, "levels_")?;
    report_stationarity(&level_fit);
    let diff_fit = fit(&diffed, &diff_order, &topo, &part)?;
    write_fit(&diff_fit, &diffed, dir, "differenced_")?;
    report_stationarity(&diff_fit);

    let specs = [
        ModelSpec { name: "community".into(), order: level_order },
        ModelSpec { name: "global".into(), order: "global:2;[1,0]".parse()? },
        ModelSpec { name: "local".into(), order: "local:2;[1,0]".parse()? },
    ];
    let report = compare(panel, &topo, &part, &specs, &load_externals(&a.externals)?, panel.len() - 1)?;
    let csv = report.to_csv();
    write_atomic(&dir.join("comparison.csv"), &csv)?;
    print!("{csv}");
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate(a) => run_simulate(a),
        Command::Fit(a) => run_fit(a),
        Command::Nacf(a) => run_grid(a, false),
        Command::Corbit(a) => run_grid(a, true),
        Command::Forecast(a) => run_forecast(a),
        Command::Compare(a) => run_compare(a),
        Command::Elections(a) => run_elections(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
