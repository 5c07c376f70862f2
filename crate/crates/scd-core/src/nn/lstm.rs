use ndarray::{s, Array1, Array2, Array3, ArrayView2, Axis};
use rand::Rng;

use super::{init_matrix, init_vector};

/// Single-direction LSTM over padded batches. Gate order along the 4H
/// axis is input, forget, candidate, output. At masked positions the
/// hidden and cell state are carried through unchanged, so trailing
/// padding can never leak into real-token features.
#[derive(Debug, Clone, PartialEq)]
pub struct Lstm {
    /// (E, 4H)
    pub wx: Array2<f64>,
    /// (H, 4H)
    pub wh: Array2<f64>,
    /// (4H,)
    pub b: Array1<f64>,
}

/// Per-timestep activations needed by the backward pass.
pub struct LstmCache {
    i: Vec<Array2<f64>>,
    f: Vec<Array2<f64>>,
    g: Vec<Array2<f64>>,
    o: Vec<Array2<f64>>,
    tanh_cc: Vec<Array2<f64>>,
    c_prev: Vec<Array2<f64>>,
    h_prev: Vec<Array2<f64>>,
}

#[derive(Debug, Clone)]
pub struct LstmGrads {
    pub dwx: Array2<f64>,
    pub dwh: Array2<f64>,
    pub db: Array1<f64>,
}

impl LstmGrads {
    pub fn accumulate(&mut self, other: &LstmGrads) {
        self.dwx += &other.dwx;
        self.dwh += &other.dwh;
        self.db += &other.db;
    }

    pub fn scale(&mut self, factor: f64) {
        self.dwx *= factor;
        self.dwh *= factor;
        self.db *= factor;
    }
}

fn sigmoid_inplace(a: &mut Array2<f64>) {
    a.mapv_inplace(|v| 1.0 / (1.0 + (-v).exp()));
}

impl Lstm {
    pub fn new(rng: &mut impl Rng, input: usize, hidden: usize) -> Lstm {
        Lstm {
            wx: init_matrix(rng, input, 4 * hidden),
            wh: init_matrix(rng, hidden, 4 * hidden),
            b: init_vector(rng, 4 * hidden),
        }
    }

    pub fn hidden(&self) -> usize {
        self.wh.nrows()
    }

    pub fn input(&self) -> usize {
        self.wx.nrows()
    }

    /// x: (b, T, E), mask: (b, T) -> hidden states (b, T, H) plus cache.
    pub fn forward(&self, x: &Array3<f64>, mask: &Array2<f64>) -> (Array3<f64>, LstmCache) {
        let (b, t_len, _) = x.dim();
        let h = self.hidden();
        let mut out = Array3::<f64>::zeros((b, t_len, h));
        let mut cache = LstmCache {
            i: Vec::with_capacity(t_len),
            f: Vec::with_capacity(t_len),
            g: Vec::with_capacity(t_len),
            o: Vec::with_capacity(t_len),
            tanh_cc: Vec::with_capacity(t_len),
            c_prev: Vec::with_capacity(t_len),
            h_prev: Vec::with_capacity(t_len),
        };
        let mut h_state = Array2::<f64>::zeros((b, h));
        let mut c_state = Array2::<f64>::zeros((b, h));

        for t in 0..t_len {
            let x_t = x.index_axis(Axis(1), t);
            let mut a = x_t.dot(&self.wx) + h_state.dot(&self.wh);
            a += &self.b;

            let mut gate_i = a.slice(s![.., 0..h]).to_owned();
            let mut gate_f = a.slice(s![.., h..2 * h]).to_owned();
            let mut gate_g = a.slice(s![.., 2 * h..3 * h]).to_owned();
            let mut gate_o = a.slice(s![.., 3 * h..4 * h]).to_owned();
            sigmoid_inplace(&mut gate_i);
            sigmoid_inplace(&mut gate_f);
            gate_g.mapv_inplace(f64::tanh);
            sigmoid_inplace(&mut gate_o);

            let cc = &gate_f * &c_state + &gate_i * &gate_g;
            let tanh_cc = cc.mapv(f64::tanh);
            let h_tilde = &gate_o * &tanh_cc;

            let m = mask.index_axis(Axis(1), t);
            let m_col = m.insert_axis(Axis(1));
            let new_c = &m_col * &cc + &(1.0 - &m_col) * &c_state;
            let new_h = &m_col * &h_tilde + &(1.0 - &m_col) * &h_state;

            out.index_axis_mut(Axis(1), t).assign(&new_h);
            cache.i.push(gate_i);
            cache.f.push(gate_f);
            cache.g.push(gate_g);
            cache.o.push(gate_o);
            cache.tanh_cc.push(tanh_cc);
            cache.c_prev.push(c_state);
            cache.h_prev.push(h_state);
            c_state = new_c;
            h_state = new_h;
        }
        (out, cache)
    }

    /// dh_out: gradient w.r.t. every emitted hidden state, (b, T, H).
    pub fn backward(
        &self,
        x: &Array3<f64>,
        mask: &Array2<f64>,
        cache: &LstmCache,
        dh_out: &Array3<f64>,
    ) -> LstmGrads {
        let (b, t_len, _) = x.dim();
        let h = self.hidden();
        let mut grads = LstmGrads {
            dwx: Array2::zeros(self.wx.raw_dim()),
            dwh: Array2::zeros(self.wh.raw_dim()),
            db: Array1::zeros(self.b.raw_dim()),
        };
        let mut dh_carry = Array2::<f64>::zeros((b, h));
        let mut dc_carry = Array2::<f64>::zeros((b, h));

        for t in (0..t_len).rev() {
            let m = mask.index_axis(Axis(1), t);
            let m_col = m.insert_axis(Axis(1)).to_owned();
            let not_m = 1.0 - &m_col;

            let dh_total = &dh_out.index_axis(Axis(1), t) + &dh_carry;
            let dh_tilde = &m_col * &dh_total;
            let dh_prev_hold = &not_m * &dh_total;
            let dcc_held = &m_col * &dc_carry;
            let dc_prev_hold = &not_m * &dc_carry;

            let i = &cache.i[t];
            let f = &cache.f[t];
            let g = &cache.g[t];
            let o = &cache.o[t];
            let tanh_cc = &cache.tanh_cc[t];
            let c_prev = &cache.c_prev[t];
            let h_prev = &cache.h_prev[t];

            let d_o = &dh_tilde * tanh_cc;
            let dcc = dcc_held + &dh_tilde * o * (1.0 - tanh_cc * tanh_cc);
            let d_f = &dcc * c_prev;
            let d_i = &dcc * g;
            let d_g = &dcc * i;
            let dc_prev = dc_prev_hold + &dcc * f;

            let mut da = Array2::<f64>::zeros((b, 4 * h));
            da.slice_mut(s![.., 0..h]).assign(&(&d_i * i * (1.0 - i)));
            da.slice_mut(s![.., h..2 * h])
                .assign(&(&d_f * f * (1.0 - f)));
            da.slice_mut(s![.., 2 * h..3 * h])
                .assign(&(&d_g * (1.0 - g * g)));
            da.slice_mut(s![.., 3 * h..4 * h])
                .assign(&(&d_o * o * (1.0 - o)));

            let x_t = x.index_axis(Axis(1), t);
            grads.dwx += &x_t.t().dot(&da);
            grads.dwh += &h_prev.t().dot(&da);
            grads.db += &da.sum_axis(Axis(0));

            dh_carry = dh_prev_hold + da.dot(&self.wh.t());
            dc_carry = dc_prev;
        }
        grads
    }
}

/// Concatenation of a forward and a time-reversed LSTM; token features
/// are `[h_fwd ; h_bwd]`, width 2H.
#[derive(Debug, Clone, PartialEq)]
pub struct BiLstm {
    pub fwd: Lstm,
    pub bwd: Lstm,
}

pub struct BiLstmCache {
    fwd: LstmCache,
    bwd: LstmCache,
    x_rev: Array3<f64>,
    mask_rev: Array2<f64>,
}

#[derive(Debug, Clone)]
pub struct BiLstmGrads {
    pub fwd: LstmGrads,
    pub bwd: LstmGrads,
}

impl BiLstmGrads {
    pub fn accumulate(&mut self, other: &BiLstmGrads) {
        self.fwd.accumulate(&other.fwd);
        self.bwd.accumulate(&other.bwd);
    }

    pub fn scale(&mut self, factor: f64) {
        self.fwd.scale(factor);
        self.bwd.scale(factor);
    }
}

fn reverse_time3(x: &Array3<f64>) -> Array3<f64> {
    x.slice(s![.., ..;-1, ..]).to_owned()
}

fn reverse_time2(x: &Array2<f64>) -> Array2<f64> {
    x.slice(s![.., ..;-1]).to_owned()
}

impl BiLstm {
    pub fn new(rng: &mut impl Rng, input: usize, hidden: usize) -> BiLstm {
        BiLstm {
            fwd: Lstm::new(rng, input, hidden),
            bwd: Lstm::new(rng, input, hidden),
        }
    }

    pub fn hidden(&self) -> usize {
        self.fwd.hidden()
    }

    /// Feature width of the concatenated output.
    pub fn feature_dim(&self) -> usize {
        2 * self.hidden()
    }

    pub fn forward(&self, x: &Array3<f64>, mask: &Array2<f64>) -> (Array3<f64>, BiLstmCache) {
        let (b, t_len, _) = x.dim();
        let h = self.hidden();
        let (h_fwd, fwd_cache) = self.fwd.forward(x, mask);
        let x_rev = reverse_time3(x);
        let mask_rev = reverse_time2(mask);
        let (h_bwd_rev, bwd_cache) = self.bwd.forward(&x_rev, &mask_rev);
        let h_bwd = reverse_time3(&h_bwd_rev);

        let mut feats = Array3::<f64>::zeros((b, t_len, 2 * h));
        feats.slice_mut(s![.., .., 0..h]).assign(&h_fwd);
        feats.slice_mut(s![.., .., h..2 * h]).assign(&h_bwd);
        (
            feats,
            BiLstmCache {
                fwd: fwd_cache,
                bwd: bwd_cache,
                x_rev,
                mask_rev,
            },
        )
    }

    pub fn backward(
        &self,
        x: &Array3<f64>,
        mask: &Array2<f64>,
        cache: &BiLstmCache,
        dfeats: &Array3<f64>,
    ) -> BiLstmGrads {
        let h = self.hidden();
        let dh_fwd = dfeats.slice(s![.., .., 0..h]).to_owned();
        let dh_bwd = reverse_time3(&dfeats.slice(s![.., .., h..2 * h]).to_owned());
        let fwd = self.fwd.backward(x, mask, &cache.fwd, &dh_fwd);
        let bwd = self
            .bwd
            .backward(&cache.x_rev, &cache.mask_rev, &cache.bwd, &dh_bwd);
        BiLstmGrads { fwd, bwd }
    }

    pub fn grads_zeros(&self) -> BiLstmGrads {
        BiLstmGrads {
            fwd: LstmGrads {
                dwx: Array2::zeros(self.fwd.wx.raw_dim()),
                dwh: Array2::zeros(self.fwd.wh.raw_dim()),
                db: Array1::zeros(self.fwd.b.raw_dim()),
            },
            bwd: LstmGrads {
                dwx: Array2::zeros(self.bwd.wx.raw_dim()),
                dwh: Array2::zeros(self.bwd.wh.raw_dim()),
                db: Array1::zeros(self.bwd.b.raw_dim()),
            },
        }
    }
}
