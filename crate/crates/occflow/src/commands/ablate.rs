//! Ablation over the stack depth m: datasets materialized per m, the
//! primary chain trained per m per split, and the table written out.

use flowdata::materialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub const DEFAULT_M_VALUES: [usize; 3] = [1, 2, 4];

pub fn cmd_ablate(cfg: &RunConfig, m_values: &[usize], dry_run: bool) -> Result<()> {
    let dir = cfg.out_dir.join("ablation");
    if dry_run {
        println!("resolved config:\n{}", cfg.to_pretty_json());
        for &m in m_values {
            println!("would materialize + train chain for m={m} under {}", dir.display());
        }
        return Ok(());
    }
    std::fs::create_dir_all(&dir)?;
    let mut roots = Vec::new();
    for &m in m_values {
        if m == 0 {
            return Err(CliError::Config("m values must be positive".into()));
        }
        if cfg.sim.frames_per_day < m {
            return Err(CliError::Config(format!(
                "frames_per_day {} cannot form a single m={m} stack",
                cfg.sim.frames_per_day
            )));
        }
        let root = dir.join(format!("data-m{m}"));
        materialize(&cfg.sim, m, cfg.seeds.data_split, cfg.chronological_splits, &root)?;
        roots.push((m, root));
    }
    let refs: Vec<(usize, &std::path::Path)> =
        roots.iter().map(|(m, r)| (*m, r.as_path())).collect();
    let rows = evalkit::run_ablation(&refs, &cfg.stages, cfg.seeds.model_init, cfg.eval.jobs);
    let csv = evalkit::ablation_csv(&rows);
    std::fs::write(dir.join("ablation.csv"), &csv)?;
    let json = serde_json::to_string_pretty(&rows)
        .map_err(|e| CliError::Config(format!("ablation encode: {e}")))?;
    std::fs::write(dir.join("ablation.json"), json)?;
    print!("{csv}");
    if rows.iter().any(|r| r.failure.is_some()) {
        println!("note: some rows failed; see the failure column");
    }
    Ok(())
}
