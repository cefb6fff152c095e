//! Write and read back the binary matrix container, a CSV series and an
//! experiment config.

use measure_recon::harness::config::{ExperimentConfig, KeyValues};
use measure_recon::harness::csv_io::{load_csv_series, ColumnSelection};
use measure_recon::harness::dmat::{find_section, load_dmat, save_dmat, Section};
use measure_recon::harness::normalize::{normalize, NormalizeMode};
use ndarray::array;

pub fn run_example() -> Result<bool, Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("measure-recon-formats-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;

    let field = array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.5]];
    let path = dir.join("field.dmat");
    save_dmat(&path, &[Section::new("field", field.clone())])?;
    let loaded = load_dmat(&path)?;
    let same = *find_section(&loaded, "field")? == field;
    println!("DMAT round trip identical: {same}");

    let csv = dir.join("series.csv");
    std::fs::write(&csv, "t,sst\n0,20.5\n1,21.0\n2,20.25\n")?;
    let sst = load_csv_series(&csv, &ColumnSelection::Indices(vec![1]))?;
    let (scaled, transform) = normalize(sst.view(), NormalizeMode::AffineLinf)?;
    println!("normalised series {:?}, inverse {:?}", scaled.column(0).to_vec(), transform.inverse(scaled.view())?.column(0).to_vec());

    let kv = KeyValues::parse("system = rossler\ntrain.steps = 500 # short run\nembed.m = 3\n")?;
    let cfg = ExperimentConfig::from_key_values(&kv)?;
    print!("resolved config:\n{}", cfg.echo());
    let again = ExperimentConfig::from_key_values(&KeyValues::parse(&cfg.echo())?)?;

    std::fs::remove_dir_all(&dir)?;
    Ok(same && again == cfg)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example().map(|_| ())
}
