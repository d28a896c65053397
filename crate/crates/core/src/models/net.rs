use rand::{Rng, RngCore};

use super::{ArchConfig, BiLstmConfig, CnnConfig};
use crate::nn::{
    Activation, BiLstm, BiLstmCache, ConvCache, Dense, DenseCache, Dropout, Matrix, NnError, ParamStore, Real,
    ResidualConv, SeqShape,
};

/// Layer stack over a `rows x width` feature matrix, producing one logit per row.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Net {
    Bilstm {
        lstm: BiLstm,
        hidden: Dense,
        drop: Dropout,
        out: Dense,
    },
    Cnn {
        proj: Dense,
        blocks: Vec<ResidualConv>,
        d1: Dense,
        drop1: Dropout,
        d2: Dense,
        drop2: Dropout,
        out: Dense,
    },
}

pub(crate) enum NetCache<T> {
    Bilstm {
        lstm: BiLstmCache<T>,
        hidden: DenseCache<T>,
        mask: Option<Matrix<T>>,
        out: DenseCache<T>,
    },
    Cnn {
        proj: DenseCache<T>,
        blocks: Vec<ConvCache<T>>,
        d1: DenseCache<T>,
        mask1: Option<Matrix<T>>,
        d2: DenseCache<T>,
        mask2: Option<Matrix<T>>,
        out: DenseCache<T>,
    },
}

fn reborrow<'s>(rng: &'s mut Option<&mut dyn RngCore>) -> Option<&'s mut dyn RngCore> {
    match rng {
        Some(r) => Some(&mut **r),
        None => None,
    }
}

impl Net {
    pub fn build<T: Real, R: Rng + ?Sized>(arch: &ArchConfig, width: usize, ps: &mut ParamStore<T>, rng: &mut R) -> Net {
        match *arch {
            ArchConfig::Bilstm(BiLstmConfig {
                hidden,
                recurrent_dropout,
                dense,
                dropout,
            }) => {
                let lstm = BiLstm::new(ps, "bilstm", width, hidden, recurrent_dropout, rng);
                let hidden = Dense::new(ps, "dense", 2 * hidden, dense, Activation::Relu, rng);
                let out = Dense::new(ps, "out", dense, 1, Activation::Identity, rng);
                Net::Bilstm {
                    lstm,
                    hidden,
                    drop: Dropout::new(dropout),
                    out,
                }
            }
            ArchConfig::ResidualCnn(CnnConfig {
                channels,
                blocks,
                dense,
                dropout,
            }) => {
                let proj = Dense::new(ps, "proj", width, channels, Activation::Identity, rng);
                let blocks = (0..blocks)
                    .map(|i| ResidualConv::new(ps, &format!("conv{i}"), channels, rng))
                    .collect();
                let d1 = Dense::new(ps, "dense1", channels, dense, Activation::Relu, rng);
                let d2 = Dense::new(ps, "dense2", dense, dense, Activation::Relu, rng);
                let out = Dense::new(ps, "out", dense, 1, Activation::Identity, rng);
                Net::Cnn {
                    proj,
                    blocks,
                    d1,
                    drop1: Dropout::new(dropout),
                    d2,
                    drop2: Dropout::new(dropout),
                    out,
                }
            }
        }
    }

    /// Inference-mode logits, `rows x 1`.
    pub fn logits<T: Real>(&self, ps: &ParamStore<T>, x: &Matrix<T>, shape: SeqShape) -> Result<Matrix<T>, NnError> {
        match self {
            Net::Bilstm { lstm, hidden, out, .. } => {
                let h = lstm.forward(ps, x, shape)?;
                let h = hidden.forward(ps, &h)?;
                out.forward(ps, &h)
            }
            Net::Cnn {
                proj,
                blocks,
                d1,
                d2,
                out,
                ..
            } => {
                let mut h = proj.forward(ps, x)?;
                for b in blocks {
                    h = b.forward(ps, &h, shape)?.0;
                }
                let h = d1.forward(ps, &h)?;
                let h = d2.forward(ps, &h)?;
                out.forward(ps, &h)
            }
        }
    }

    /// Training-mode logits with everything needed for [`Net::backward`].
    /// Dropout is active only when `rng` is given.
    pub fn forward_train<T: Real>(
        &self,
        ps: &ParamStore<T>,
        x: Matrix<T>,
        shape: SeqShape,
        mut rng: Option<&mut dyn RngCore>,
    ) -> Result<(Matrix<T>, NetCache<T>), NnError> {
        match self {
            Net::Bilstm {
                lstm,
                hidden,
                drop,
                out,
            } => {
                let (h, lstm_c) = lstm.forward_train(ps, x, shape, reborrow(&mut rng))?;
                let (mut h, hidden_c) = hidden.forward_train(ps, h)?;
                let mask = drop.forward_train(&mut h, reborrow(&mut rng));
                let (z, out_c) = out.forward_train(ps, h)?;
                Ok((
                    z,
                    NetCache::Bilstm {
                        lstm: lstm_c,
                        hidden: hidden_c,
                        mask,
                        out: out_c,
                    },
                ))
            }
            Net::Cnn {
                proj,
                blocks,
                d1,
                drop1,
                d2,
                drop2,
                out,
            } => {
                let (mut h, proj_c) = proj.forward_train(ps, x)?;
                let mut block_c = Vec::with_capacity(blocks.len());
                for b in blocks {
                    let (next, c) = b.forward(ps, &h, shape)?;
                    block_c.push(c);
                    h = next;
                }
                let (mut h, d1_c) = d1.forward_train(ps, h)?;
                let mask1 = drop1.forward_train(&mut h, reborrow(&mut rng));
                let (mut h, d2_c) = d2.forward_train(ps, h)?;
                let mask2 = drop2.forward_train(&mut h, reborrow(&mut rng));
                let (z, out_c) = out.forward_train(ps, h)?;
                Ok((
                    z,
                    NetCache::Cnn {
                        proj: proj_c,
                        blocks: block_c,
                        d1: d1_c,
                        mask1,
                        d2: d2_c,
                        mask2,
                        out: out_c,
                    },
                ))
            }
        }
    }

    /// Accumulates parameter gradients for upstream logit gradient `dz`;
    /// returns the gradient with respect to the input features.
    pub fn backward<T: Real>(&self, ps: &mut ParamStore<T>, cache: &NetCache<T>, dz: &Matrix<T>) -> Matrix<T> {
        match (self, cache) {
            (
                Net::Bilstm {
                    lstm,
                    hidden,
                    drop,
                    out,
                },
                NetCache::Bilstm {
                    lstm: lstm_c,
                    hidden: hidden_c,
                    mask,
                    out: out_c,
                },
            ) => {
                let mut g = out.backward(ps, out_c, dz);
                drop.backward(mask.as_ref(), &mut g);
                let g = hidden.backward(ps, hidden_c, &g);
                lstm.backward(ps, lstm_c, &g)
            }
            (
                Net::Cnn {
                    proj,
                    blocks,
                    d1,
                    drop1,
                    d2,
                    drop2,
                    out,
                },
                NetCache::Cnn {
                    proj: proj_c,
                    blocks: block_c,
                    d1: d1_c,
                    mask1,
                    d2: d2_c,
                    mask2,
                    out: out_c,
                },
            ) => {
                let mut g = out.backward(ps, out_c, dz);
                drop2.backward(mask2.as_ref(), &mut g);
                let mut g = d2.backward(ps, d2_c, &g);
                drop1.backward(mask1.as_ref(), &mut g);
                let mut g = d1.backward(ps, d1_c, &g);
                for (b, c) in blocks.iter().zip(block_c).rev() {
                    g = b.backward(ps, c, &g);
                }
                proj.backward(ps, proj_c, &g)
            }
            _ => panic!("cache does not belong to this network"),
        }
    }
}
