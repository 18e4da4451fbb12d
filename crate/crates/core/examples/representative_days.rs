//! Builds a synthetic year of hourly demand and wind data for the Garver buses,
//! clusters it into representative days and shows the resulting weights.
//!
//! ```text
//! cargo run --example representative_days            # print a summary
//! cargo run --example representative_days -- data    # also write garver_history.csv and garver_days.csv
//! ```

use std::f64::consts::PI;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use robust_tnep::case::{write_hourly_csv, HourlyTable};
use robust_tnep::clustering::{build_representative_days, representatives_table};

const SEED: u64 = 2016;
const K: usize = 10;

fn synthetic_year(seed: u64) -> HourlyTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let demands = ["d1", "d2", "d3", "d4", "d5"];
    // Per-bus scale and evening-peak weight give each load its own shape.
    let scale = [0.97, 1.0, 0.93, 0.98, 0.95];
    let evening = [0.30, 0.26, 0.22, 0.28, 0.24];
    let mut wind_level: f64 = 0.35;
    let mut days = Vec::with_capacity(365);
    for doy in 0..365 {
        let s = 2.0 * PI * doy as f64 / 365.0;
        // Summer peak in July with a smaller winter shoulder.
        let season = 0.80 + 0.12 * (s - 2.0 * PI * 200.0 / 365.0).cos().max(0.0) + 0.05 * (s).cos().max(0.0);
        let weekday = if doy % 7 >= 5 { 0.88 } else { 1.0 };
        let day_shift = 0.03 * noise.sample(&mut rng);
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(demands.len() + 1);
        for b in 0..demands.len() {
            let hours = (0..24)
                .map(|t| {
                    let t = t as f64;
                    let shape = 0.68 + 0.16 * (-(t - 10.0).powi(2) / 10.0).exp() + evening[b] * (-(t - 19.0).powi(2) / 6.0).exp();
                    let v = scale[b] * season * weekday * (1.0 + day_shift) * shape + 0.01 * noise.sample(&mut rng);
                    v.clamp(0.3, 1.0)
                })
                .collect();
            cols.push(hours);
        }
        wind_level = (0.35 + 0.07 * s.cos() + 0.6 * (wind_level - 0.35) + 0.15 * noise.sample(&mut rng)).clamp(0.03, 0.9);
        let wind = (0..24)
            .map(|t| {
                let diurnal = 1.0 + 0.25 * (2.0 * PI * (t as f64 - 3.0) / 24.0).cos();
                (wind_level * diurnal + 0.04 * noise.sample(&mut rng)).clamp(0.0, 1.0)
            })
            .collect();
        cols.push(wind);
        days.push(cols);
    }
    let round = |v: f64| (v * 1e4).round() / 1e4;
    for d in &mut days {
        for col in d.iter_mut() {
            for v in col.iter_mut() {
                *v = round(*v);
            }
        }
    }
    HourlyTable {
        columns: demands.iter().map(|s| s.to_string()).chain(["w3".to_string()]).collect(),
        day_labels: (1..=365).map(|d| d.to_string()).collect(),
        days,
    }
}

fn main() {
    let history = synthetic_year(SEED);
    let reps = build_representative_days(&history, K, SEED).expect("clustering succeeds");
    let (table, weights) = representatives_table(&history, &reps);
    for (i, r) in reps.iter().enumerate() {
        let mean = |c: usize| r.values[c].iter().sum::<f64>() / 24.0;
        println!(
            "rep {:>2}: day {:>3}, {:>3} members, weight {:>8.4}, mean d2 {:.3}, mean wind {:.3}",
            i + 1,
            r.source_day + 1,
            r.members.len(),
            r.weight,
            mean(1),
            mean(5)
        );
    }
    println!("weights = {weights:?}");
    if let Some(dir) = std::env::args().nth(1) {
        let dir = Path::new(&dir);
        std::fs::write(dir.join("garver_history.csv"), write_hourly_csv(&history)).expect("write history");
        std::fs::write(dir.join("garver_days.csv"), write_hourly_csv(&table)).expect("write days");
        println!("wrote {}", dir.display());
    }
}
