//! Pointwise tensor values: multi-index arrays of jets with a variance
//! signature. Contractions are only permitted between one upper and one lower
//! slot, which catches index-bookkeeping mistakes at runtime.

use crate::jet::{Jet, JetContext};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variance {
    Up,
    Down,
}

pub use Variance::{Down, Up};

/// Multi-index array of jets over a 2n-dimensional tangent space.
#[derive(Clone, Debug)]
pub struct TensorValue {
    sig: Vec<Variance>,
    dim: usize,
    comps: Vec<Jet>,
}

impl TensorValue {
    pub fn zeros(ctx: &JetContext, dim: usize, sig: &[Variance]) -> Self {
        let len = dim.pow(sig.len() as u32);
        TensorValue {
            sig: sig.to_vec(),
            dim,
            comps: vec![ctx.zero(); len],
        }
    }

    pub fn scalar(j: Jet) -> Self {
        TensorValue {
            sig: Vec::new(),
            dim: 1,
            comps: vec![j],
        }
    }

    pub fn from_fn(
        ctx: &JetContext,
        dim: usize,
        sig: &[Variance],
        mut f: impl FnMut(&[usize]) -> Jet,
    ) -> Self {
        let _ = ctx;
        let rank = sig.len();
        let len = dim.pow(rank as u32);
        let mut comps = Vec::with_capacity(len);
        let mut idx = vec![0usize; rank];
        for flat in 0..len {
            let mut rem = flat;
            for k in (0..rank).rev() {
                idx[k] = rem % dim;
                rem /= dim;
            }
            comps.push(f(&idx));
        }
        TensorValue {
            sig: sig.to_vec(),
            dim,
            comps,
        }
    }

    pub fn rank(&self) -> usize {
        self.sig.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sig(&self) -> &[Variance] {
        &self.sig
    }

    pub fn comps(&self) -> &[Jet] {
        &self.comps
    }

    fn flat(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.sig.len());
        let mut f = 0;
        for &i in idx {
            debug_assert!(i < self.dim);
            f = f * self.dim + i;
        }
        f
    }

    pub fn get(&self, idx: &[usize]) -> &Jet {
        &self.comps[self.flat(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: Jet) {
        let f = self.flat(idx);
        self.comps[f] = v;
    }

    pub fn add(&self, rhs: &TensorValue) -> TensorValue {
        assert_eq!(self.sig, rhs.sig);
        TensorValue {
            sig: self.sig.clone(),
            dim: self.dim,
            comps: self
                .comps
                .iter()
                .zip(&rhs.comps)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &TensorValue) -> TensorValue {
        assert_eq!(self.sig, rhs.sig);
        TensorValue {
            sig: self.sig.clone(),
            dim: self.dim,
            comps: self
                .comps
                .iter()
                .zip(&rhs.comps)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> TensorValue {
        TensorValue {
            sig: self.sig.clone(),
            dim: self.dim,
            comps: self.comps.iter().map(|a| a.scale(s)).collect(),
        }
    }

    pub fn scale_jet(&self, s: &Jet) -> TensorValue {
        TensorValue {
            sig: self.sig.clone(),
            dim: self.dim,
            comps: self.comps.iter().map(|a| a * s).collect(),
        }
    }

    /// Largest |value| over components (degree-0 coefficients).
    pub fn value_norm_inf(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, j| m.max(j.value().abs()))
    }

    /// Largest |coefficient| over components and all jet degrees.
    pub fn jet_norm_inf(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, j| m.max(j.norm_inf()))
    }

    /// Contract slot `a` (must be Up) with slot `b` (must be Down), or the
    /// other way around.
    pub fn contract(&self, a: usize, b: usize) -> TensorValue {
        assert_ne!(a, b);
        assert!(
            self.sig[a] != self.sig[b],
            "contraction requires one upper and one lower slot, got {:?}/{:?}",
            self.sig[a],
            self.sig[b]
        );
        let rank = self.rank();
        let (lo, hi) = (a.min(b), a.max(b));
        let mut new_sig = Vec::with_capacity(rank - 2);
        for (k, s) in self.sig.iter().enumerate() {
            if k != lo && k != hi {
                new_sig.push(*s);
            }
        }
        let ctx = self.comps[0].context().clone();
        let dim = self.dim;
        let mut out = TensorValue::zeros(&ctx, dim, &new_sig);
        let out_len = out.comps.len();
        let mut out_idx = vec![0usize; rank - 2];
        let mut full = vec![0usize; rank];
        for flat in 0..out_len {
            let mut rem = flat;
            for k in (0..rank - 2).rev() {
                out_idx[k] = rem % dim;
                rem /= dim;
            }
            let mut pos = 0;
            for k in 0..rank {
                if k != lo && k != hi {
                    full[k] = out_idx[pos];
                    pos += 1;
                }
            }
            let mut acc = ctx.zero();
            for c in 0..dim {
                full[lo] = c;
                full[hi] = c;
                acc = &acc + self.get(&full);
            }
            out.comps[flat] = acc;
        }
        out
    }

    /// Tensor product, left slots first.
    pub fn mul_outer(&self, rhs: &TensorValue) -> TensorValue {
        assert_eq!(self.dim, rhs.dim);
        let mut sig = self.sig.clone();
        sig.extend_from_slice(&rhs.sig);
        TensorValue {
            sig,
            dim: self.dim,
            comps: self
                .comps
                .iter()
                .flat_map(|a| rhs.comps.iter().map(move |b| a * b))
                .collect(),
        }
    }
}
