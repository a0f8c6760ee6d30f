//! Bidirectional GRU labeler with hand-derived backpropagation.
//!
//! Per position: `u = P x + p` (linear projection of the sparse document
//! vector), a forward and a backward GRU over `u`, then a softmax layer over
//! the concatenated hidden states. GRU update:
//!
//! ```text
//! z = sigmoid(Wz u + Uz h + bz)
//! r = sigmoid(Wr u + Ur h + br)
//! n = tanh(Wn u + Un (r * h) + bn)
//! h' = (1 - z) * n + z * h
//! ```

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand::Rng;

use crate::features::FeatureVector;
use crate::math::{cross_entropy, gemv_add, gemv_backward, sigmoid, softmax3};

/// Offsets of each parameter block inside the flat vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BirnnLayout {
    pub dim: usize,
    pub input: usize,
    pub hidden: usize,
}

/// Parameter ranges of one GRU direction.
#[derive(Debug, Clone)]
struct CellRanges {
    wx: Range<usize>,
    wh: Range<usize>,
    b: Range<usize>,
}

impl BirnnLayout {
    fn proj_w(&self) -> Range<usize> {
        0..self.dim * self.input
    }

    fn proj_b(&self) -> Range<usize> {
        let s = self.dim * self.input;
        s..s + self.input
    }

    fn cell(&self, dir: usize) -> CellRanges {
        let h3 = 3 * self.hidden;
        let per = h3 * self.input + h3 * self.hidden + h3;
        let base = self.proj_b().end + dir * per;
        let wx = base..base + h3 * self.input;
        let wh = wx.end..wx.end + h3 * self.hidden;
        let b = wh.end..wh.end + h3;
        CellRanges { wx, wh, b }
    }

    fn out_w(&self) -> Range<usize> {
        let s = self.cell(1).b.end;
        s..s + 3 * 2 * self.hidden
    }

    fn out_b(&self) -> Range<usize> {
        let s = self.out_w().end;
        s..s + 3
    }

    pub fn n_params(&self) -> usize {
        self.out_b().end
    }

    /// Ranges of penalized (non-bias) parameters.
    pub fn weight_ranges(&self) -> [Range<usize>; 6] {
        let f = self.cell(0);
        let b = self.cell(1);
        [self.proj_w(), f.wx, f.wh, b.wx, b.wh, self.out_w()]
    }

    /// Block names with their shapes, for model file headers.
    pub fn shape_description(&self) -> alloc::string::String {
        let (d, i, h) = (self.dim, self.input, self.hidden);
        alloc::format!(
            "proj_w:{d}x{i},proj_b:{i},fwd_wx:{}x{i},fwd_wh:{}x{h},fwd_b:{},bwd_wx:{}x{i},bwd_wh:{}x{h},bwd_b:{},out_w:3x{},out_b:3",
            3 * h, 3 * h, 3 * h, 3 * h, 3 * h, 3 * h, 2 * h
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Birnn {
    pub layout: BirnnLayout,
    pub params: Vec<f64>,
}

/// Per-step activations kept for the backward pass.
struct StepCache {
    h_prev: Vec<f64>,
    z: Vec<f64>,
    r: Vec<f64>,
    n: Vec<f64>,
    /// `r * h_prev`
    rh: Vec<f64>,
}

impl Birnn {
    pub fn uniform<R: Rng>(layout: BirnnLayout, scale: f64, rng: &mut R) -> Self {
        let params = (0..layout.n_params()).map(|_| rng.random_range(-scale..scale)).collect();
        Birnn { layout, params }
    }

    pub fn from_flat(layout: BirnnLayout, params: Vec<f64>) -> Option<Self> {
        (params.len() == layout.n_params()).then_some(Birnn { layout, params })
    }

    fn project(&self, x: &FeatureVector) -> Vec<f64> {
        let l = &self.layout;
        let mut u = self.params[l.proj_b()].to_vec();
        let pw = &self.params[l.proj_w()];
        for &(j, w) in &x.entries {
            let row = &pw[j as usize * l.input..(j as usize + 1) * l.input];
            for (uk, pk) in u.iter_mut().zip(row) {
                *uk += w * pk;
            }
        }
        u
    }

    fn cell_forward(&self, cell: &CellRanges, u: &[f64], h_prev: &[f64]) -> (Vec<f64>, StepCache) {
        let h = self.layout.hidden;
        let p = &self.params;
        let mut ax = p[cell.b.clone()].to_vec();
        gemv_add(&p[cell.wx.clone()], u, &mut ax);
        let wh = &p[cell.wh.clone()];
        // z and r use U h_prev directly
        let mut ah = vec![0.0; 2 * h];
        gemv_add(&wh[..2 * h * h], h_prev, &mut ah);
        let z: Vec<f64> = (0..h).map(|k| sigmoid(ax[k] + ah[k])).collect();
        let r: Vec<f64> = (0..h).map(|k| sigmoid(ax[h + k] + ah[h + k])).collect();
        let rh: Vec<f64> = r.iter().zip(h_prev).map(|(a, b)| a * b).collect();
        let mut an = vec![0.0; h];
        gemv_add(&wh[2 * h * h..], &rh, &mut an);
        let n: Vec<f64> = (0..h).map(|k| libm::tanh(ax[2 * h + k] + an[k])).collect();
        let h_new: Vec<f64> = (0..h).map(|k| (1.0 - z[k]) * n[k] + z[k] * h_prev[k]).collect();
        let cache = StepCache { h_prev: h_prev.to_vec(), z, r, n, rh };
        (h_new, cache)
    }

    /// Accumulates parameter gradients for one step; returns `(du, dh_prev)`.
    fn cell_backward(
        &self,
        cell: &CellRanges,
        u: &[f64],
        c: &StepCache,
        dh: &[f64],
        grad: &mut [f64],
    ) -> (Vec<f64>, Vec<f64>) {
        let h = self.layout.hidden;
        let p = &self.params;
        let mut dh_prev: Vec<f64> = (0..h).map(|k| dh[k] * c.z[k]).collect();
        let mut da = vec![0.0; 3 * h];
        for k in 0..h {
            let dn = dh[k] * (1.0 - c.z[k]);
            let dz = dh[k] * (c.h_prev[k] - c.n[k]);
            da[k] = dz * c.z[k] * (1.0 - c.z[k]);
            da[2 * h + k] = dn * (1.0 - c.n[k] * c.n[k]);
        }
        let wh = &p[cell.wh.clone()];
        let (gwh_zr, gwh_n) = grad[cell.wh.clone()].split_at_mut(2 * h * h);
        // candidate path: an = Un (r * h_prev)
        let mut drh = vec![0.0; h];
        gemv_backward(&wh[2 * h * h..], &c.rh, &da[2 * h..], gwh_n, &mut drh);
        for k in 0..h {
            let dr = drh[k] * c.h_prev[k];
            dh_prev[k] += drh[k] * c.r[k];
            da[h + k] = dr * c.r[k] * (1.0 - c.r[k]);
        }
        gemv_backward(&wh[..2 * h * h], &c.h_prev, &da[..2 * h], gwh_zr, &mut dh_prev);
        let mut du = vec![0.0; u.len()];
        gemv_backward(&p[cell.wx.clone()], u, &da, &mut grad[cell.wx.clone()], &mut du);
        for (g, d) in grad[cell.b.clone()].iter_mut().zip(&da) {
            *g += d;
        }
        (du, dh_prev)
    }

    fn run_direction(&self, dir: usize, inputs: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<StepCache>) {
        let cell = self.layout.cell(dir);
        let n = inputs.len();
        let mut states = vec![Vec::new(); n];
        let mut caches = Vec::with_capacity(n);
        let mut h = vec![0.0; self.layout.hidden];
        for step in 0..n {
            let t = if dir == 0 { step } else { n - 1 - step };
            let (h_new, cache) = self.cell_forward(&cell, &inputs[t], &h);
            states[t] = h_new.clone();
            caches.push(cache);
            h = h_new;
        }
        (states, caches)
    }

    fn output(&self, hf: &[f64], hb: &[f64]) -> [f64; 3] {
        let l = &self.layout;
        let ow = &self.params[l.out_w()];
        let ob = &self.params[l.out_b()];
        let hh = 2 * l.hidden;
        let mut s = [ob[0], ob[1], ob[2]];
        for (c, sc) in s.iter_mut().enumerate() {
            let row = &ow[c * hh..(c + 1) * hh];
            for k in 0..l.hidden {
                *sc += row[k] * hf[k] + row[l.hidden + k] * hb[k];
            }
        }
        s
    }

    pub fn predict(&self, xs: &[FeatureVector]) -> Vec<[f64; 3]> {
        let inputs: Vec<Vec<f64>> = xs.iter().map(|x| self.project(x)).collect();
        let (hf, _) = self.run_direction(0, &inputs);
        let (hb, _) = self.run_direction(1, &inputs);
        (0..xs.len()).map(|t| softmax3(self.output(&hf[t], &hb[t]))).collect()
    }

    /// Sum of per-position cross-entropies scaled by `scale`; gradients are
    /// accumulated into `grad` with the same scale.
    pub fn sequence_loss_grad(
        &self,
        xs: &[FeatureVector],
        targets: &[usize],
        scale: f64,
        grad: &mut [f64],
    ) -> f64 {
        let l = self.layout;
        let n = xs.len();
        let inputs: Vec<Vec<f64>> = xs.iter().map(|x| self.project(x)).collect();
        let (hf, cf) = self.run_direction(0, &inputs);
        let (hb, cb) = self.run_direction(1, &inputs);
        let hh = 2 * l.hidden;
        let mut loss = 0.0;
        let mut dhf = vec![vec![0.0; l.hidden]; n];
        let mut dhb = vec![vec![0.0; l.hidden]; n];
        let ow_range = l.out_w();
        let ob_range = l.out_b();
        for t in 0..n {
            let p = softmax3(self.output(&hf[t], &hb[t]));
            loss += scale * cross_entropy(&p, targets[t]);
            for c in 0..3 {
                let d = scale * (p[c] - f64::from(u8::from(c == targets[t])));
                grad[ob_range.start + c] += d;
                let row = &self.params[ow_range.start + c * hh..ow_range.start + (c + 1) * hh];
                for k in 0..l.hidden {
                    grad[ow_range.start + c * hh + k] += d * hf[t][k];
                    grad[ow_range.start + c * hh + l.hidden + k] += d * hb[t][k];
                    dhf[t][k] += d * row[k];
                    dhb[t][k] += d * row[l.hidden + k];
                }
            }
        }
        let mut du = vec![vec![0.0; l.input]; n];
        for (dir, caches, dhs) in [(0usize, &cf, &dhf), (1usize, &cb, &dhb)] {
            let cell = l.cell(dir);
            let mut carry = vec![0.0; l.hidden];
            for step in (0..n).rev() {
                let t = if dir == 0 { step } else { n - 1 - step };
                let dh: Vec<f64> = dhs[t].iter().zip(&carry).map(|(a, b)| a + b).collect();
                let (dut, dh_prev) = self.cell_backward(&cell, &inputs[t], &caches[step], &dh, grad);
                for (a, b) in du[t].iter_mut().zip(&dut) {
                    *a += b;
                }
                carry = dh_prev;
            }
        }
        let pw = l.proj_w().start;
        let pb = l.proj_b().start;
        for t in 0..n {
            for k in 0..l.input {
                grad[pb + k] += du[t][k];
            }
            for &(j, w) in &xs[t].entries {
                let base = pw + j as usize * l.input;
                for k in 0..l.input {
                    grad[base + k] += w * du[t][k];
                }
            }
        }
        loss
    }
}
