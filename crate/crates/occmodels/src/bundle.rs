//! Model bundles: a directory holding `bundle.json` (kind tag, shapes,
//! scalars, small vectors such as the center) plus one binary parameter
//! container per network. Digests cover every file, so downstream stages
//! can detect stale upstream artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use ndcompute::serialize::{read_network, write_network};
use ndcompute::Network;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arch::{input_shape, BOTTLENECK_SHAPE, FEATURE_DIM, NOISE_DIM};
use crate::classifier::ClassifierModel;
use crate::dcae::DcaeModel;
use crate::dsvdd::{DsvddModel, Hypersphere};
use crate::error::{Error, Result};
use crate::iogen::IoGenModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleMeta {
    pub kind: String,
    pub m: usize,
    /// Input shape per serialized network file (`<name>.occf`).
    pub networks: BTreeMap<String, Vec<usize>>,
    #[serde(default)]
    pub scalars: BTreeMap<String, f64>,
    #[serde(default)]
    pub vectors: BTreeMap<String, Vec<f64>>,
}

pub fn save_bundle(dir: &Path, meta: &BundleMeta, networks: &[(&str, &Network)]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let json = serde_json::to_string_pretty(meta)
        .map_err(|e| Error::bundle(dir.display(), format!("meta encode: {e}")))?;
    fs::write(dir.join("bundle.json"), json)?;
    for (name, net) in networks {
        let mut bytes = Vec::new();
        write_network(net, &mut bytes)?;
        fs::write(dir.join(format!("{name}.occf")), bytes)?;
    }
    Ok(())
}

pub fn load_meta(dir: &Path) -> Result<BundleMeta> {
    let path = dir.join("bundle.json");
    let bytes =
        fs::read(&path).map_err(|e| Error::bundle(dir.display(), format!("missing bundle.json: {e}")))?;
    serde_json::from_slice(&bytes)
        .map_err(|e| Error::bundle(path.display(), format!("meta decode: {e}")))
}

pub fn load_network(dir: &Path, meta: &BundleMeta, name: &str) -> Result<Network> {
    let shape = meta
        .networks
        .get(name)
        .ok_or_else(|| Error::bundle(dir.display(), format!("no network {name} in meta")))?;
    let path = dir.join(format!("{name}.occf"));
    let bytes =
        fs::read(&path).map_err(|e| Error::bundle(path.display(), format!("read: {e}")))?;
    Ok(read_network(&bytes[..], shape)?)
}

/// SHA-256 over every file in the bundle directory (sorted by name).
pub fn bundle_digest(dir: &Path) -> Result<String> {
    let mut names: Vec<_> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.file_name().to_string_lossy().to_string()))
        .collect::<std::io::Result<_>>()?;
    names.sort();
    let mut hasher = Sha256::new();
    for name in names {
        let path = dir.join(&name);
        if path.is_file() {
            hasher.update(name.as_bytes());
            hasher.update(fs::read(&path)?);
        }
    }
    Ok(hex_string(&hasher.finalize()))
}

pub fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

// ---- typed wrappers ----

pub fn save_dcae(dir: &Path, model: &DcaeModel) -> Result<()> {
    let meta = BundleMeta {
        kind: "dcae".into(),
        m: model.m,
        networks: BTreeMap::from([
            ("encoder".to_string(), input_shape(model.m).to_vec()),
            ("decoder".to_string(), BOTTLENECK_SHAPE.to_vec()),
        ]),
        scalars: BTreeMap::new(),
        vectors: BTreeMap::new(),
    };
    save_bundle(dir, &meta, &[("encoder", &model.encoder), ("decoder", &model.decoder)])
}

pub fn load_dcae(dir: &Path) -> Result<DcaeModel> {
    let meta = expect_kind(dir, "dcae")?;
    Ok(DcaeModel {
        encoder: load_network(dir, &meta, "encoder")?,
        decoder: load_network(dir, &meta, "decoder")?,
        m: meta.m,
    })
}

pub fn save_dsvdd(dir: &Path, model: &DsvddModel) -> Result<()> {
    let meta = BundleMeta {
        kind: "dsvdd".into(),
        m: model.m,
        networks: BTreeMap::from([("encoder".to_string(), input_shape(model.m).to_vec())]),
        scalars: BTreeMap::from([("weight_decay".to_string(), model.sphere.weight_decay)]),
        vectors: BTreeMap::from([("center".to_string(), model.sphere.center.clone())]),
    };
    save_bundle(dir, &meta, &[("encoder", &model.encoder)])
}

pub fn load_dsvdd(dir: &Path) -> Result<DsvddModel> {
    let meta = expect_kind(dir, "dsvdd")?;
    let center = meta
        .vectors
        .get("center")
        .ok_or_else(|| Error::bundle(dir.display(), "missing center vector"))?
        .clone();
    if center.len() != FEATURE_DIM {
        return Err(Error::bundle(dir.display(), "center has wrong dimension"));
    }
    Ok(DsvddModel {
        encoder: load_network(dir, &meta, "encoder")?,
        sphere: Hypersphere {
            center,
            weight_decay: meta.scalars.get("weight_decay").copied().unwrap_or(0.0),
        },
        m: meta.m,
    })
}

pub fn save_iogen(dir: &Path, model: &IoGenModel) -> Result<()> {
    save_iogen_kind(dir, model, "iogen")
}

/// The GEN baseline shares the container with a different kind tag.
pub fn save_iogen_kind(dir: &Path, model: &IoGenModel, kind: &str) -> Result<()> {
    let meta = BundleMeta {
        kind: kind.into(),
        m: model.m,
        networks: BTreeMap::from([
            ("generator_head".to_string(), vec![NOISE_DIM]),
            ("generator_decoder".to_string(), BOTTLENECK_SHAPE.to_vec()),
            ("discriminator_body".to_string(), input_shape(model.m).to_vec()),
            ("discriminator_head".to_string(), vec![FEATURE_DIM]),
        ]),
        scalars: BTreeMap::from([
            ("sigma".to_string(), model.sigma),
            ("lambda_feat".to_string(), model.lambda_feat),
        ]),
        vectors: BTreeMap::new(),
    };
    save_bundle(
        dir,
        &meta,
        &[
            ("generator_head", &model.generator_head),
            ("generator_decoder", &model.generator_decoder),
            ("discriminator_body", &model.discriminator_body),
            ("discriminator_head", &model.discriminator_head),
        ],
    )
}

pub fn load_iogen(dir: &Path) -> Result<IoGenModel> {
    load_iogen_kind(dir, "iogen")
}

pub fn load_iogen_kind(dir: &Path, kind: &str) -> Result<IoGenModel> {
    let meta = expect_kind(dir, kind)?;
    Ok(IoGenModel {
        generator_head: load_network(dir, &meta, "generator_head")?,
        generator_decoder: load_network(dir, &meta, "generator_decoder")?,
        discriminator_body: load_network(dir, &meta, "discriminator_body")?,
        discriminator_head: load_network(dir, &meta, "discriminator_head")?,
        sigma: meta.scalars.get("sigma").copied().unwrap_or(1.0),
        lambda_feat: meta.scalars.get("lambda_feat").copied().unwrap_or(10.0),
        m: meta.m,
    })
}

pub fn save_classifier(dir: &Path, model: &ClassifierModel, kind: &str, m: usize) -> Result<()> {
    let meta = BundleMeta {
        kind: kind.into(),
        m,
        networks: BTreeMap::from([("classifier".to_string(), vec![FEATURE_DIM, 1])]),
        scalars: BTreeMap::new(),
        vectors: BTreeMap::new(),
    };
    save_bundle(dir, &meta, &[("classifier", &model.net)])
}

pub fn load_classifier(dir: &Path, kind: &str) -> Result<ClassifierModel> {
    let meta = expect_kind(dir, kind)?;
    Ok(ClassifierModel { net: load_network(dir, &meta, "classifier")? })
}

fn expect_kind(dir: &Path, kind: &str) -> Result<BundleMeta> {
    let meta = load_meta(dir)?;
    if meta.kind != kind {
        return Err(Error::bundle(
            dir.display(),
            format!("expected kind {kind}, found {}", meta.kind),
        ));
    }
    Ok(meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::subseed;

    #[test]
    fn dsvdd_bundle_roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let dcae = DcaeModel::fresh(2, 3).unwrap();
        let center: Vec<f64> = (0..FEATURE_DIM).map(|i| (i as f64 * 0.731).sin()).collect();
        let model = DsvddModel {
            encoder: dcae.encoder.clone(),
            sphere: Hypersphere { center: center.clone(), weight_decay: 1e-6 },
            m: 2,
        };
        save_dsvdd(dir.path(), &model).unwrap();
        let back = load_dsvdd(dir.path()).unwrap();
        assert_eq!(back.m, 2);
        for (a, b) in center.iter().zip(&back.sphere.center) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        for (a, b) in model.encoder.flat_params().iter().zip(back.encoder.flat_params().iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn digest_changes_with_contents() {
        let dir = tempfile::tempdir().unwrap();
        let dcae = DcaeModel::fresh(1, subseed(1, "t")).unwrap();
        save_dcae(dir.path(), &dcae).unwrap();
        let d1 = bundle_digest(dir.path()).unwrap();
        let d1_again = bundle_digest(dir.path()).unwrap();
        assert_eq!(d1, d1_again);

        let dcae2 = DcaeModel::fresh(1, subseed(2, "t")).unwrap();
        save_dcae(dir.path(), &dcae2).unwrap();
        let d2 = bundle_digest(dir.path()).unwrap();
        assert_ne!(d1, d2);
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let dcae = DcaeModel::fresh(1, 1).unwrap();
        save_dcae(dir.path(), &dcae).unwrap();
        assert!(load_dsvdd(dir.path()).is_err());
    }
}
