//! A coarse Jaccard accuracy map written to CSV, as the `jaccard-map`
//! command does with its full grid.

use std::path::PathBuf;

use xlwave::experiments::{cmd_jaccard_map, jaccard_map_cells, ExperimentConfig};

fn main() -> xlwave::Result<()> {
    let exp = ExperimentConfig::from_toml_str(
        "[jaccard_map]\nr_min_m = 2.0\nr_max_m = 200.0\nr_points = 5\nomega_min = -0.8\nomega_max = 0.8\nomega_points = 5\n",
    )?;
    for c in jaccard_map_cells(&exp)? {
        println!(
            "r0 {:>7.2} omega {:>5} J {:.3} J_s {:.3}{}",
            c.r0,
            c.omega,
            c.jaccard_exact,
            c.jaccard_simplified,
            if c.inside_effective_rayleigh {
                ""
            } else {
                "  (far field)"
            }
        );
    }
    let out = std::env::temp_dir().join("xlwave_jaccard_map.csv");
    cmd_jaccard_map(&exp, &out)?;
    println!("wrote {}", PathBuf::from(&out).display());
    Ok(())
}
