//! A rising ramp and its reversal look identical to average and max pooling.
//! A single difference filter `[-1, 1]` followed by a two-level pyramid tells
//! them apart.

use oacp::convpool::{oacp_forward, FilterBank, FilterBankSet};
use oacp::pooling::{average_pool, max_pool, temporal_pyramid_pool, PyramidConfig};
use oacp::seq::FeatureSequence;

fn show(label: &str, v: &[f64]) {
    let cells: Vec<String> = v.iter().map(|x| format!("{x:.3}")).collect();
    println!("  {label:<10} [{}]", cells.join(", "));
}

fn main() -> oacp::Result<()> {
    let ramp: Vec<f64> = (0..8).map(|t| t as f64 / 7.0).collect();
    let rising = FeatureSequence::from_signal(&ramp)?;
    let falling = rising.reversed();

    let diff = FilterBank::from_filters(&[[-1.0, 1.0]], vec![0.0])?;
    let banks = FilterBankSet::new(vec![diff], 1)?;
    let pyramid: PyramidConfig = "1,2".parse()?;

    for (name, seq) in [("rising", &rising), ("falling", &falling)] {
        println!("{name}:");
        show("average", &average_pool(seq));
        show("max", &max_pool(seq));
        show("pyramid", &temporal_pyramid_pool(seq, &pyramid)?);
        show("oacp", &oacp_forward(seq, &banks, &pyramid)?);
    }
    Ok(())
}
