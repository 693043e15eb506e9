use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use askline::harness::{
    compute_penalty, emit_reports, run_b2b_frame, run_b2b_sweep, run_link_frame, run_link_sweep, summarize,
    theory_ber, theory_q2, tx_waveform, LinkConfig, MetricsTable, SweepKind, TableMetadata, CSV_SCHEMA_VERSION,
    SD_FEC_Q2_DB,
};
use askline::signal::estimate_psd;
use askline::txdsp::ModFormat;
use askline::{Error, Result};

#[derive(Parser)]
#[command(name = "askline", version, about = "DP bipolar m-ASK coherent link simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    #[value(name = "2ask")]
    Ask2,
    #[value(name = "4ask")]
    Ask4,
    #[value(name = "8ask")]
    Ask8,
}

impl Format {
    fn fmt(self) -> ModFormat {
        let m = match self {
            Format::Ask2 => 2,
            Format::Ask4 => 4,
            Format::Ask8 => 8,
        };
        ModFormat::new(m).expect("supported format")
    }
}

#[derive(Args)]
struct Common {
    /// TOML file with any subset of LinkConfig fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Replaces the configured seed list with a single seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Disable all hardware impairments.
    #[arg(long)]
    ideal: bool,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Also write a constellation and spectrum for the last sweep point.
    #[arg(long)]
    constellations: bool,
}

impl Common {
    fn load(&self) -> Result<LinkConfig> {
        let mut cfg = match &self.config {
            Some(p) => LinkConfig::from_file(p)?,
            None => LinkConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.monte_carlo.seeds = vec![s];
        }
        if let Some(f) = self.format {
            cfg.format = f.fmt();
        }
        cfg.ideal |= self.ideal;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Back-to-back Q² versus OSNR.
    B2b(Common),
    /// 120-km Q² versus launch power.
    Link(Common),
    /// AWGN theory curve as CSV on stdout.
    Theory {
        #[arg(long, value_enum, default_value = "8ask")]
        format: Format,
        #[arg(long, default_value_t = 5.0)]
        from_db: f64,
        #[arg(long, default_value_t = 35.0)]
        to_db: f64,
        #[arg(long, default_value_t = 0.5)]
        step_db: f64,
        #[arg(long, default_value_t = 64e9)]
        symbol_rate: f64,
    },
    /// OSNR penalty of a b2b metrics CSV at a Q² threshold.
    Penalty {
        metrics: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
        #[arg(long, default_value_t = SD_FEC_Q2_DB)]
        threshold_db: f64,
        #[arg(long, default_value_t = 64e9)]
        symbol_rate: f64,
    },
    /// Summary JSON (penalty, peak, margins, rates) for a metrics CSV.
    Report {
        metrics: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
        #[arg(long, value_enum, default_value = "b2b")]
        kind: Kind,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 64e9)]
        symbol_rate: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    B2b,
    Link,
}

fn read_table(path: &Path, fmt: &ModFormat, kind: SweepKind) -> Result<MetricsTable> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let meta = TableMetadata {
        kind,
        format: fmt.name(),
        config_sha256: String::new(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        schema_version: CSV_SCHEMA_VERSION,
        ideal: false,
    };
    MetricsTable::read_csv(file, meta)
}

fn sweep(common: &Common, kind: SweepKind) -> Result<()> {
    let cfg = common.load()?;
    let table = match kind {
        SweepKind::B2b => run_b2b_sweep(&cfg)?,
        SweepKind::Link => run_link_sweep(&cfg)?,
    };
    let summary = summarize(&table, &cfg.format, cfg.symbol_rate)?;
    let eff = cfg.effective();
    let seed = cfg.monte_carlo.seeds[0];
    let extra = if common.constellations {
        let last = table.rows.last().expect("non-empty sweep").sweep_value;
        let frame_seed = LinkConfig::frame_seed(seed, usize::MAX, 0);
        let res = match kind {
            SweepKind::B2b => run_b2b_frame(&eff, last, frame_seed)?,
            SweepKind::Link => run_link_frame(&eff, last, frame_seed)?,
        };
        let psd = estimate_psd(&tx_waveform(&eff, frame_seed)?, 100e6)?;
        Some((res, psd))
    } else {
        None
    };
    let (consts, spectra) = match &extra {
        Some((res, psd)) => (vec![("last".to_string(), &res.rx, &res.frame)], vec![("tx".to_string(), psd)]),
        None => (vec![], vec![]),
    };
    let files = emit_reports(&common.out, &table, &summary, &consts, &spectra)?;
    for f in files {
        println!("{}", f.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::B2b(c) => sweep(&c, SweepKind::B2b),
        Cmd::Link(c) => sweep(&c, SweepKind::Link),
        Cmd::Theory {
            format,
            from_db,
            to_db,
            step_db,
            symbol_rate,
        } => {
            if !(step_db > 0.0) || !(to_db >= from_db) {
                return Err(Error::Config("theory range must be ascending with a positive step".into()));
            }
            let fmt = format.fmt();
            println!("osnr_db,ber,q2_db");
            let n = ((to_db - from_db) / step_db + 1e-9).floor() as usize;
            for i in 0..=n {
                let osnr = from_db + i as f64 * step_db;
                let q = theory_q2(osnr, &fmt, symbol_rate).map(|q| format!("{q:.4}")).unwrap_or_default();
                println!("{osnr:.3},{:.6e},{q}", theory_ber(osnr, &fmt, symbol_rate));
            }
            Ok(())
        }
        Cmd::Penalty {
            metrics,
            format,
            threshold_db,
            symbol_rate,
        } => {
            let fmt = format.fmt();
            let table = read_table(&metrics, &fmt, SweepKind::B2b)?;
            let p = compute_penalty(&table, &fmt, symbol_rate, threshold_db)?;
            println!("{p:.3}");
            Ok(())
        }
        Cmd::Report {
            metrics,
            format,
            kind,
            out,
            symbol_rate,
        } => {
            let fmt = format.fmt();
            let kind = match kind {
                Kind::B2b => SweepKind::B2b,
                Kind::Link => SweepKind::Link,
            };
            let table = read_table(&metrics, &fmt, kind)?;
            let summary = summarize(&table, &fmt, symbol_rate)?;
            for f in emit_reports(&out, &table, &summary, &[], &[])? {
                println!("{}", f.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
