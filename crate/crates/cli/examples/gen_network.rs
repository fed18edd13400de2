//! Writes a seeded random 4-16-16-2 ReLU controller for the vehicle model.
//!
//! ```text
//! cargo run -p ivreach-cli --example gen_network -- --seed 0 --scale 0.05 --out net.json
//! ```

use std::path::PathBuf;

use clap::Parser;
use ivreach::systems::vehicle_network;

#[derive(Parser)]
struct Opts {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Factor applied to the output layer.
    #[arg(long, default_value_t = 0.05)]
    scale: f64,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let o = Opts::parse();
    let net = vehicle_network(o.seed, o.scale)?;
    std::fs::write(&o.out, net.to_json_string())?;
    println!("wrote {}", o.out.display());
    Ok(())
}
