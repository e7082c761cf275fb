//! Browser bindings: influence curves with the block configuration of a vertex,
//! a maximal-contribution heatmap and rotor-router aggregation images.

use rotorwalk::blockcfg::block_configuration;
use rotorwalk::idla::{idla_run, Aggregation, RotorInit, Sampling, Sequence4};
use rotorwalk::kernel::fast;
use rotorwalk::lattice::{Direction, RotorSequence, Vertex};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn parse_vertex(x1: i32, x2: i32) -> Result<Vertex, rotorwalk::Error> {
    Vertex::new(x1 as i64, x2 as i64)
}

/// JSON with `INF(x, A, t)` for each direction over `t ≤ t_max` and the block
/// configuration of `x` under `sequence`.
pub fn influence_json(x1: i32, x2: i32, sequence: &str, t_max: u32) -> Result<String, rotorwalk::Error> {
    let x = parse_vertex(x1, x2)?;
    let seq: RotorSequence = sequence.parse()?;
    let cfg = block_configuration(x, &seq)?;
    let start = x.norm_inf().max(1);
    let times: Vec<i64> = (start..=t_max as i64).filter(|t| (t - x.x1).rem_euclid(2) == 0).collect();
    let curves: serde_json::Map<String, serde_json::Value> = Direction::ALL
        .iter()
        .map(|&d| {
            let ys: Vec<f64> = times.iter().map(|&t| fast::inf_single(x, d, t)).collect();
            (d.name().to_string(), json!(ys))
        })
        .collect();
    let phases: Vec<_> = cfg
        .phases
        .iter()
        .map(|p| {
            json!({
                "lo": p.lo,
                "hi": p.hi,
                "block": p.block.dirs.iter().map(|d| d.name()).collect::<Vec<_>>(),
                "signature": p.block.signature_arrows(),
            })
        })
        .collect();
    let schedule: Vec<_> = cfg
        .schedule
        .iter()
        .map(|(t, ds)| json!({ "t": t, "dirs": ds.iter().map(|d| d.name()).collect::<Vec<_>>() }))
        .collect();
    Ok(json!({
        "vertex": [x.x1, x.x2],
        "sequence": seq.to_string(),
        "times": times,
        "curves": curves,
        "extremal_times": cfg.extremal_times,
        "phases": phases,
        "schedule": schedule,
        "maxcon": {
            "numer": cfg.contribution.numer().to_string(),
            "denom": cfg.contribution.denom().to_string(),
            "value": num_traits::ToPrimitive::to_f64(&cfg.contribution),
        },
    })
    .to_string())
}

#[wasm_bindgen]
pub fn influence(x1: i32, x2: i32, sequence: &str, t_max: u32) -> Result<String, JsError> {
    influence_json(x1, x2, sequence, t_max).map_err(err)
}

/// Row-major `(2r+1)²` grid of maximal contributions, top row `x2 = r`;
/// cells with `x1 ≢ x2 (mod 2)` are `NaN`.
pub fn maxcon_grid(radius: u32, sequence: &str) -> Result<Vec<f64>, rotorwalk::Error> {
    let seq: RotorSequence = sequence.parse()?;
    let r = radius as i64;
    let mut out = Vec::with_capacity(((2 * r + 1) * (2 * r + 1)) as usize);
    for x2 in (-r..=r).rev() {
        for x1 in -r..=r {
            out.push(match Vertex::new(x1, x2) {
                Ok(x) => {
                    let c = block_configuration(x, &seq)?.contribution;
                    num_traits::ToPrimitive::to_f64(&c).unwrap_or(f64::NAN)
                }
                Err(_) => f64::NAN,
            });
        }
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn maxcon_heatmap(radius: u32, sequence: &str) -> Result<Vec<f64>, JsError> {
    maxcon_grid(radius, sequence).map_err(err)
}

/// A finished aggregation rendered as RGBA.
#[wasm_bindgen]
pub struct IdlaImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
    delta: f64,
    max_delta: f64,
}

#[wasm_bindgen]
impl IdlaImage {
    #[wasm_bindgen(getter)]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[wasm_bindgen(getter)]
    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> Vec<u8> {
        self.pixels.clone()
    }

    /// `Δ(n)` at the end of the run.
    #[wasm_bindgen(getter)]
    pub fn delta(&self) -> f64 {
        self.delta
    }

    #[wasm_bindgen(getter)]
    pub fn max_delta(&self) -> f64 {
        self.max_delta
    }
}

pub fn idla_image_native(particles: u32, sequence: &str, seed: Option<u64>) -> Result<IdlaImage, rotorwalk::Error> {
    let seq: Sequence4 = sequence.parse()?;
    let init = seed.map_or(RotorInit::AllLeft, RotorInit::Random);
    let (agg, run): (Aggregation, _) = idla_run(particles as u64, seq, init, &Sampling::Points(vec![]), None)?;
    let (width, height, pixels) = agg.rgba();
    Ok(IdlaImage { width, height, pixels, delta: agg.delta(), max_delta: run.stats.max })
}

/// `seed < 0` means all rotors start left.
#[wasm_bindgen]
pub fn idla_image(particles: u32, sequence: &str, seed: f64) -> Result<IdlaImage, JsError> {
    let seed = (seed >= 0.0).then_some(seed as u64);
    idla_image_native(particles, sequence, seed).map_err(err)
}
