//! 7:2:1 seeded splits at image and patient level.
//!
//! ```text
//! cargo run --example split_dataset [N] [SEED]
//! ```

use nodule_vqa::forge::{split_dataset, split_sizes, SplitMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(Ok(2077), |a| a.parse())?;
    let seed: u64 = args.next().map_or(Ok(42), |a| a.parse())?;

    println!("sizes for {n} units: {:?}", split_sizes(n)?);

    let ids: Vec<String> = (0..n).map(|i| format!("P{:04}_n{:03}", i / 2, i % 2 + 1)).collect();
    for mode in [SplitMode::ImageLevel, SplitMode::PatientLevel] {
        let s = split_dataset(&ids, seed, mode)?;
        println!(
            "{:<13} train {} val {} test {}  first test id {}",
            mode.name(),
            s.train.len(),
            s.val.len(),
            s.test.len(),
            s.test.first().map_or("-", String::as_str)
        );
    }
    Ok(())
}
