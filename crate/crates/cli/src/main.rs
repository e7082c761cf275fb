use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rotorwalk::aggregate::{
    c2_interval, decimal_ceil, decimal_floor, grid_sum, grid_sum_checkpointed, tail_bound, Regime, SumTarget,
};
use rotorwalk::blockcfg::{block_configuration, configurations_in_ball, enumerate_abstract_modes, VertexRecord, CSV_HEADER};
use rotorwalk::idla::{ensemble_stats, idla_run, render_ppm, RotorInit, Sampling, Sequence4};
use rotorwalk::lattice::{Direction, RotorSequence, Vertex};
use rotorwalk::machine::{
    contribution_from_trace, contribution_sum, discrepancy, mod4_forcing_construct, run_propp, verify_forcing, OddChipSchedule,
    ProppState, Snapshot,
};
use serde::Deserialize;

#[derive(Parser)]
#[command(name = "rotorwalk", version, about = "Single-vertex discrepancy of the rotor-router walk on the 2D grid")]
struct Cli {
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for parallel commands.
    #[arg(long, global = true, env = "ROTORWALK_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximal contribution of one vertex.
    Maxcon {
        #[arg(long, allow_hyphen_values = true)]
        x: i64,
        #[arg(long, allow_hyphen_values = true)]
        y: i64,
        #[arg(long, default_value = "NE,SE,SW,NW")]
        rotor: RotorSequence,
        /// One line per rotor sequence.
        #[arg(long)]
        all_rotors: bool,
    },
    /// Exact sum of maximal contributions over the ball `‖x‖∞ ≤ radius`.
    Sum {
        #[arg(long)]
        radius: i64,
        #[arg(long, default_value = "circular")]
        regime: Regime,
        /// Append completed rings here and resume from it.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Per-ring subtotals as CSV.
        #[arg(long)]
        csv: bool,
    },
    /// Certified tail bound beyond a cutoff.
    Tail {
        #[arg(long, default_value_t = 800)]
        cutoff: u64,
    },
    /// Interval for c₂: grid sum plus tail bound.
    C2 {
        #[arg(long, default_value = "circular")]
        regime: Regime,
        #[arg(long, default_value_t = 800)]
        radius: i64,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Run the Propp machine from a JSON snapshot.
    Simulate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        steps: u64,
        /// Per-vertex contributions and their sum.
        #[arg(long)]
        decompose: bool,
    },
    /// Build an even configuration with prescribed chip counts modulo 4.
    Force {
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long)]
        horizon: u64,
        #[arg(long)]
        window: i64,
        /// Write the constructed state here.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Rotor-router aggregation.
    Idla {
        #[arg(long)]
        particles: u64,
        #[arg(long, default_value = "L,U,D,R")]
        rotor: Sequence4,
        #[arg(long, value_enum, default_value = "left")]
        init: Init,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of seeded runs, starting at `--seed`; requires `--init random`.
        #[arg(long)]
        ensemble: Option<u64>,
        #[arg(long)]
        ppm: Option<PathBuf>,
        /// `n;delta` trace.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Count abstract extremum patterns.
    EnumerateModes,
    /// Per-vertex block configurations over a ball, as CSV.
    Export {
        #[arg(long)]
        radius: i64,
        #[arg(long, default_value = "NE,SE,SW,NW")]
        rotor: RotorSequence,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Init {
    Left,
    Random,
}

#[derive(Deserialize)]
struct ScheduleFile {
    /// `[x1, x2, t, residue]`
    entries: Vec<(i64, i64, u64, u8)>,
    #[serde(default)]
    sequence: Option<String>,
    #[serde(default)]
    default_rotor: Option<Direction>,
    #[serde(default)]
    rotors: Vec<(i64, i64, Direction)>,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn threads(cli: &Cli) -> usize {
    cli.threads
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let threads = threads(&cli);
    let json = cli.json;
    match cli.command {
        Command::Maxcon { x, y, rotor, all_rotors } => {
            let v = Vertex::new(x, y)?;
            let seqs: Vec<RotorSequence> = if all_rotors { RotorSequence::all().to_vec() } else { vec![rotor] };
            let mut records = Vec::new();
            for s in seqs {
                let cfg = block_configuration(v, &s)?;
                let rec = VertexRecord::from(&cfg);
                if !json {
                    println!(
                        "{v} {s}: {}/{} ≈ {:.6}  schedule {}",
                        rec.maxcon_numer,
                        rec.maxcon_denom,
                        rec.maxcon,
                        if rec.schedule.is_empty() { "-" } else { &rec.schedule }
                    );
                }
                records.push(rec);
            }
            if json {
                print_json(&records)?;
            }
        }
        Command::Sum { radius, regime, checkpoint, csv } => {
            let target = SumTarget::for_regime(regime);
            let report = match &checkpoint {
                Some(p) => grid_sum_checkpointed(radius, target, threads, p)?,
                None => grid_sum(radius, target, threads)?,
            };
            if json {
                print_json(&report)?;
            } else if csv {
                print!("{}", report.rings_csv());
            } else {
                println!("radius {radius}, {regime}: {} = {}", report.partial_sum, report.decimal());
            }
        }
        Command::Tail { cutoff } => {
            let t = tail_bound(cutoff)?;
            if json {
                print_json(&t)?;
            } else {
                println!("cutoff {cutoff}");
                println!("E1a < {}", decimal_ceil(&t.e1a, 7));
                println!("E1b < {}", decimal_ceil(&t.e1b, 7));
                println!("E1c < {}", decimal_ceil(&t.e1c, 7));
                println!("E1  < {}", decimal_ceil(&t.e1, 7));
                println!("E2  < {}", decimal_ceil(&t.e2, 7));
                println!("E   < {}", decimal_ceil(&t.e, 7));
            }
        }
        Command::C2 { regime, radius, checkpoint } => {
            let tail = tail_bound(radius.max(0) as u64)?;
            let target = SumTarget::for_regime(regime);
            let sum = match &checkpoint {
                Some(p) => grid_sum_checkpointed(radius, target, threads, p)?,
                None => grid_sum(radius, target, threads)?,
            };
            let c2 = c2_interval(&sum, &tail)?;
            if json {
                print_json(&c2)?;
            } else {
                println!("{regime}: {} <= c2 <= {}", decimal_floor(&c2.lower, 3), decimal_ceil(&c2.upper, 3));
            }
        }
        Command::Simulate { input, steps, decompose } => {
            let text = fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let snap: Snapshot = serde_json::from_str(&text).context("parsing state snapshot")?;
            let start = ProppState::try_from(&snap)?;
            if start.time != 0 {
                bail!("simulation expects a snapshot at time 0, got {}", start.time);
            }
            let (end, trace) = run_propp(&start, steps);
            let disc = discrepancy(&start, steps);
            let mut out = serde_json::json!({
                "state": Snapshot::from(&end),
                "discrepancy": disc.to_string(),
            });
            let cons = decompose.then(|| contribution_from_trace(&trace));
            if let Some(cons) = &cons {
                let total = contribution_sum(cons);
                out["contributions"] = cons.iter().map(|(x, c)| serde_json::json!([x.x1, x.x2, c.to_string()])).collect();
                out["contribution_sum"] = total.to_string().into();
                if total != disc {
                    bail!("contributions sum to {total}, discrepancy is {disc}");
                }
            }
            if json {
                print_json(&out)?;
            } else {
                println!("time {}: {} chips, f(0)={}, discrepancy {disc}", end.time, end.total_chips(), end.chips_at(Vertex::ORIGIN));
                if let Some(cons) = &cons {
                    for (x, c) in cons {
                        println!("  CON{x} = {c}");
                    }
                    println!("  sum of contributions equals the discrepancy");
                }
            }
        }
        Command::Force { schedule, horizon, window, output } => {
            let text = fs::read_to_string(&schedule).with_context(|| format!("reading {}", schedule.display()))?;
            let file: ScheduleFile = serde_json::from_str(&text).context("parsing schedule")?;
            let seq: RotorSequence = match &file.sequence {
                Some(s) => s.parse()?,
                None => RotorSequence::CLOCKWISE,
            };
            let mut rotors = ProppState::new(seq);
            if let Some(d) = file.default_rotor {
                rotors.default_rotor = d;
            }
            for &(x1, x2, d) in &file.rotors {
                rotors.rotors.insert(Vertex::new(x1, x2)?, d);
            }
            let mut pi = OddChipSchedule::new();
            for &(x1, x2, t, r) in &file.entries {
                pi.set(Vertex::new(x1, x2)?, t, r)?;
            }
            let state = mod4_forcing_construct(&pi, horizon, window, &rotors)?;
            if let Some((x, t, f, want)) = verify_forcing(&state, &pi, horizon, window) {
                bail!("constructed state has f{x} = {f} at t={t}, expected residue {want}");
            }
            let snap = Snapshot::from(&state);
            if let Some(p) = &output {
                fs::write(p, serde_json::to_string_pretty(&snap)?)?;
            }
            if json {
                print_json(&snap)?;
            } else {
                println!(
                    "even configuration with {} chips on {} vertices; residues verified for t <= {horizon}, |x|_1 <= {window}",
                    state.total_chips(),
                    state.chips.len()
                );
            }
        }
        Command::Idla { particles, rotor, init, seed, ensemble, ppm, trace } => {
            if let Some(k) = ensemble {
                if !matches!(init, Init::Random) {
                    bail!("--ensemble requires --init random");
                }
                let seeds: Vec<u64> = (seed..seed + k).collect();
                let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build()?;
                let e = pool.install(|| ensemble_stats(particles, rotor, &seeds, None))?;
                if json {
                    print_json(&e)?;
                } else {
                    println!("{rotor}, {k} random runs, n={particles}: average Δ {}, max Δ {}", e.average, e.max);
                }
                return Ok(());
            }
            let init = match init {
                Init::Left => RotorInit::AllLeft,
                Init::Random => RotorInit::Random(seed),
            };
            let (agg, r) = idla_run(particles, rotor, init, &Sampling::Standard, None)?;
            if let Some(p) = &ppm {
                render_ppm(&agg, p)?;
            }
            if let Some(p) = &trace {
                fs::write(p, r.trace_csv())?;
            }
            if json {
                print_json(&r.stats)?;
            } else {
                println!(
                    "{rotor}, n={particles}: Δ(n)={:.6}, average Δ over ({}, {}] {:.6}, max Δ {:.6}",
                    agg.delta(),
                    r.stats.window.0,
                    r.stats.window.1,
                    r.stats.average,
                    r.stats.max
                );
            }
        }
        Command::EnumerateModes => {
            let rep = enumerate_abstract_modes();
            if json {
                print_json(&rep)?;
            } else {
                for (name, c) in [("unimodal", &rep.unimodal), ("bimodal", &rep.bimodal)] {
                    println!(
                        "{name}: {}/{} valid, at most {} used extremal times, histogram {:?}",
                        c.valid, c.total, c.max_used, c.used_histogram
                    );
                }
            }
        }
        Command::Export { radius, rotor, output } => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build()?;
            let cfgs = pool.install(|| configurations_in_ball(radius, &rotor))?;
            let mut text = String::from(CSV_HEADER);
            text.push('\n');
            for c in &cfgs {
                text.push_str(&VertexRecord::from(c).csv_line());
                text.push('\n');
            }
            match output {
                Some(p) => fs::write(p, text)?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}
