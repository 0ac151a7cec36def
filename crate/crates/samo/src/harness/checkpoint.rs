//! Option-set checkpoints.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic          b"SAMO1"
//! head_kind      u8   (0 = continuous/Gaussian, 1 = discrete/categorical)
//! action_dim     u32  (continuous dim or discrete action count)
//! obs_dim        u32
//! t_min          u32
//! gamma_beta     f64
//! threshold      f64
//! option_count   u32
//! option_count x (alpha f64, mature u8, policy net fragment)
//! option_count x (termination net fragment, prefix order)
//! ```
//!
//! Net fragments are the nncore format: layer-size count and sizes as u32,
//! then the parameters as f64, row-major.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::SamoError;
use crate::nn::{Activation, DenseNet};
use crate::options::{FrozenOption, OptionSet};
use crate::policy::{ActionSpace, CategoricalHead, GaussianHead, PolicyHead};
use crate::termination::TerminationFn;

pub const MAGIC: &[u8; 5] = b"SAMO1";

/// Everything needed to rebuild and execute a trained option set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckpointMeta {
    pub space: ActionSpace,
    pub obs_dim: usize,
    pub t_min: u32,
    pub gamma_beta: f64,
    pub threshold: f64,
}

pub fn save(path: &Path, set: &OptionSet, meta: &CheckpointMeta) -> Result<(), SamoError> {
    let tmp = path.with_extension("ckpt.tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        w.write_all(MAGIC)?;
        let (kind, action_dim) = match meta.space {
            ActionSpace::Continuous { dim } => (0u8, dim as u32),
            ActionSpace::Discrete { n } => (1u8, n as u32),
        };
        w.write_all(&[kind])?;
        w.write_all(&action_dim.to_le_bytes())?;
        w.write_all(&(meta.obs_dim as u32).to_le_bytes())?;
        w.write_all(&meta.t_min.to_le_bytes())?;
        w.write_all(&meta.gamma_beta.to_le_bytes())?;
        w.write_all(&meta.threshold.to_le_bytes())?;
        w.write_all(&(set.len() as u32).to_le_bytes())?;
        for opt in set.options() {
            w.write_all(&opt.alpha.to_le_bytes())?;
            w.write_all(&[opt.mature as u8])?;
            opt.head.net().write_fragment(&mut w)?;
        }
        for term in set.terminations() {
            term.net().write_fragment(&mut w)?;
        }
        w.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<(OptionSet, CheckpointMeta), SamoError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(SamoError::Format("not a SAMO1 checkpoint".into()));
    }
    let mut b1 = [0u8; 1];
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b1)?;
    let kind = b1[0];
    r.read_exact(&mut b4)?;
    let action_dim = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b4)?;
    let obs_dim = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b4)?;
    let t_min = u32::from_le_bytes(b4);
    r.read_exact(&mut b8)?;
    let gamma_beta = f64::from_le_bytes(b8);
    r.read_exact(&mut b8)?;
    let threshold = f64::from_le_bytes(b8);
    r.read_exact(&mut b4)?;
    let count = u32::from_le_bytes(b4) as usize;
    if count == 0 || count > 64 {
        return Err(SamoError::Format(format!("implausible option count {count}")));
    }
    let space = match kind {
        0 => ActionSpace::Continuous { dim: action_dim },
        1 => ActionSpace::Discrete { n: action_dim },
        other => return Err(SamoError::Format(format!("unknown head kind {other}"))),
    };
    let meta = CheckpointMeta {
        space,
        obs_dim,
        t_min,
        gamma_beta,
        threshold,
    };

    let mut set = OptionSet::new(gamma_beta);
    let mut heads = Vec::with_capacity(count);
    for _ in 0..count {
        r.read_exact(&mut b8)?;
        let alpha = f64::from_le_bytes(b8);
        r.read_exact(&mut b1)?;
        let mature = b1[0] != 0;
        let net = DenseNet::read_fragment(&mut r, Activation::Tanh)?;
        let head = match space {
            ActionSpace::Continuous { dim } => {
                if net.output_dim() != 2 * dim {
                    return Err(SamoError::Format("policy output size mismatch".into()));
                }
                PolicyHead::Gaussian(GaussianHead::from_net(net))
            }
            ActionSpace::Discrete { n } => {
                if net.output_dim() != n {
                    return Err(SamoError::Format("policy output size mismatch".into()));
                }
                PolicyHead::Categorical(CategoricalHead::from_net(net))
            }
        };
        heads.push(FrozenOption { head, alpha, mature });
    }
    for (i, opt) in heads.into_iter().enumerate() {
        let net = DenseNet::read_fragment(&mut r, Activation::Tanh)?;
        if net.input_dim() != obs_dim + space.encoded_dim() {
            return Err(SamoError::Format("termination input size mismatch".into()));
        }
        let term = TerminationFn::from_net(net, space, obs_dim, i + 1, threshold);
        set.push(opt, term);
    }
    Ok((set, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};
    use crate::sac::{SacHyper, SacLearner};
    use crate::termination::TerminationFn;

    fn sample_set(space: ActionSpace, obs_dim: usize, count: usize) -> OptionSet {
        let mut set = OptionSet::new(0.95);
        for k in 1..=count {
            let mut rng = stream_rng(33, Stream::Init, k);
            let learner = SacLearner::new(obs_dim, space, SacHyper::default(), &mut rng);
            let (head, alpha) = learner.into_frozen();
            let term = TerminationFn::new(obs_dim, space, k, &mut rng);
            set.push(FrozenOption { head, alpha, mature: k % 2 == 0 }, term);
        }
        set
    }

    #[test]
    fn round_trip_preserves_everything() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.ckpt");
        let meta = CheckpointMeta {
            space: ActionSpace::Continuous { dim: 1 },
            obs_dim: 9,
            t_min: 16,
            gamma_beta: 0.9,
            threshold: 0.5,
        };
        let set = sample_set(meta.space, meta.obs_dim, 3);
        save(&path, &set, &meta).unwrap();
        let (back, meta2) = load(&path).unwrap();
        assert_eq!(meta, meta2);
        assert_eq!(back.len(), 3);
        for i in 1..=3 {
            assert_eq!(
                back.option(i).head.net().params(),
                set.option(i).head.net().params()
            );
            assert_eq!(back.option(i).alpha, set.option(i).alpha);
            assert_eq!(back.option(i).mature, set.option(i).mature);
            assert_eq!(
                back.termination(i).net().params(),
                set.termination(i).net().params()
            );
            assert_eq!(back.termination(i).prefix_len, i);
        }
    }

    #[test]
    fn discrete_round_trip_and_magic_check() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.ckpt");
        let meta = CheckpointMeta {
            space: ActionSpace::Discrete { n: 2 },
            obs_dim: 10,
            t_min: 1,
            gamma_beta: 0.95,
            threshold: 0.5,
        };
        let set = sample_set(meta.space, meta.obs_dim, 2);
        save(&path, &set, &meta).unwrap();
        let (back, _) = load(&path).unwrap();
        assert_eq!(back.len(), 2);

        std::fs::write(dir.path().join("junk.ckpt"), b"NOTSAMO123").unwrap();
        assert!(matches!(
            load(&dir.path().join("junk.ckpt")),
            Err(SamoError::Format(_))
        ));
    }

    #[test]
    fn file_starts_with_magic_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.ckpt");
        let meta = CheckpointMeta {
            space: ActionSpace::Continuous { dim: 1 },
            obs_dim: 4,
            t_min: 1,
            gamma_beta: 0.95,
            threshold: 0.5,
        };
        let set = sample_set(meta.space, meta.obs_dim, 1);
        save(&path, &set, &meta).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..5], b"SAMO1");
    }
}
