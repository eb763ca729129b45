//! Renders the synthesized-vs-real flow gallery from the split-0 models.

use evalkit::flow_gallery;
use flowdata::{ClassLabel, Dataset, GRID_LEN};
use occmodels::bundle::load_iogen;
use occmodels::config::subseed;
use occmodels::iogen::sample_noise;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::stages::stage_dir;

pub fn cmd_gallery(cfg: &RunConfig, count: usize, dry_run: bool) -> Result<()> {
    if dry_run {
        println!("resolved config:\n{}", cfg.to_pretty_json());
        println!("would render {count} synthetic and {count} real pairs");
        return Ok(());
    }
    if count == 0 {
        return Err(CliError::Config("gallery needs at least one pair".into()));
    }
    let iogen = load_iogen(&stage_dir(&cfg.out_dir, 0, "iogen")).map_err(|e| {
        CliError::Dependency(format!(
            "iogen artifacts unavailable ({e}); run `occflow train --stage iogen`"
        ))
    })?;
    let dataset = Dataset::ingest(&cfg.dataset_root, cfg.m)?;
    let view = dataset.split_view(0)?;

    let mut rng = ChaCha8Rng::seed_from_u64(subseed(cfg.seeds.noise, "gallery"));
    let mut synthetic = Vec::with_capacity(count);
    for _ in 0..count {
        let z = sample_noise(iogen.sigma, &mut rng);
        let fake = iogen.generate(&z).map_err(CliError::from)?;
        // First frame's (h, v) channel pair of the generated stack.
        let channels = fake.shape()[2];
        let data = fake.data();
        let mut h = vec![0.0; GRID_LEN];
        let mut v = vec![0.0; GRID_LEN];
        for p in 0..GRID_LEN {
            h[p] = data[p * channels];
            v[p] = data[p * channels + 1];
        }
        synthetic.push((h, v));
    }

    let real: Vec<(Vec<f64>, Vec<f64>)> = view
        .test
        .iter()
        .filter(|s| s.class_label == ClassLabel::Stable)
        .take(count)
        .map(|s| (s.frames[0].horizontal.clone(), s.frames[0].vertical.clone()))
        .collect();
    if real.len() < count {
        return Err(CliError::Config(format!(
            "dataset has only {} stable test stacks, need {count}",
            real.len()
        )));
    }

    let img = flow_gallery(&synthetic, &real).map_err(CliError::from)?;
    let eval_dir = cfg.out_dir.join("eval");
    std::fs::create_dir_all(&eval_dir)?;
    let path = eval_dir.join("gallery.png");
    img.save(&path)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    println!("gallery: {} ({}x{})", path.display(), img.width(), img.height());
    Ok(())
}
