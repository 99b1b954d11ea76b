//! One direction of a batched LSTM layer with masked, variable-length
//! sequences and hand-written backpropagation through time.
//!
//! Sequences are stored position-major as `[T, B, features]`. The reverse
//! direction reads row `b` at position `len_b - 1 - s` on step `s`, so both
//! directions finish on the last valid step of every row without padding
//! leaking into the state.

use ndarray::{s, Array2, Array3, Axis};

use super::{sigmoid, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct LstmDir<T> {
    /// `[input, 4H]`, gate blocks i, f, g, o.
    pub wih: Array2<T>,
    /// `[H, 4H]`.
    pub whh: Array2<T>,
    /// `[1, 4H]`.
    pub b: Array2<T>,
}

impl<T: Real> LstmDir<T> {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        LstmDir {
            wih: Array2::zeros((input, 4 * hidden)),
            whh: Array2::zeros((hidden, 4 * hidden)),
            b: Array2::zeros((1, 4 * hidden)),
        }
    }

    pub fn hidden(&self) -> usize {
        self.whh.nrows()
    }
}

struct StepCache<T> {
    xs: Array2<T>,
    h_prev: Array2<T>,
    c_prev: Array2<T>,
    /// Activated gates `[B, 4H]`.
    gates: Array2<T>,
    tanh_c: Array2<T>,
    mask: Array2<T>,
}

pub struct DirCache<T> {
    steps: Vec<StepCache<T>>,
    reverse: bool,
    input: usize,
}

fn position(len: usize, s: usize, reverse: bool) -> Option<usize> {
    if s >= len {
        None
    } else if reverse {
        Some(len - 1 - s)
    } else {
        Some(s)
    }
}

/// Runs one direction. Returns per-position outputs `[T, B, H]`, the final
/// hidden state of every row `[B, H]`, and the cache for [`dir_backward`].
pub fn dir_forward<T: Real>(
    p: &LstmDir<T>,
    x: &Array3<T>,
    lens: &[usize],
    reverse: bool,
) -> (Array3<T>, Array2<T>, DirCache<T>) {
    let (t_max, batch, input) = x.dim();
    let h = p.hidden();
    let mut h_cur = Array2::<T>::zeros((batch, h));
    let mut c_cur = Array2::<T>::zeros((batch, h));
    let mut out = Array3::<T>::zeros((t_max, batch, h));
    let mut steps = Vec::with_capacity(t_max);
    let one = T::one();

    for s in 0..t_max {
        let mut xs = Array2::<T>::zeros((batch, input));
        let mut mask = Array2::<T>::zeros((batch, 1));
        for (b, &len) in lens.iter().enumerate() {
            if let Some(pos) = position(len, s, reverse) {
                xs.row_mut(b).assign(&x.slice(s![pos, b, ..]));
                mask[[b, 0]] = one;
            }
        }
        let mut gates = xs.dot(&p.wih) + h_cur.dot(&p.whh) + &p.b;
        {
            let (mut ifg, mut o) = gates.view_mut().split_at(Axis(1), 3 * h);
            let (mut if_, mut g) = ifg.view_mut().split_at(Axis(1), 2 * h);
            if_.mapv_inplace(sigmoid);
            g.mapv_inplace(|v| v.tanh());
            o.mapv_inplace(sigmoid);
        }
        let gi = gates.slice(s![.., 0..h]);
        let gf = gates.slice(s![.., h..2 * h]);
        let gg = gates.slice(s![.., 2 * h..3 * h]);
        let go = gates.slice(s![.., 3 * h..4 * h]);
        let c_new = &gf * &c_cur + &gi * &gg;
        let tanh_c = c_new.mapv(|v| v.tanh());
        let h_new = &go * &tanh_c;
        let keep = mask.mapv(|m| one - m);
        let h_next = &h_new * &mask + &h_cur * &keep;
        let c_next = &c_new * &mask + &c_cur * &keep;
        for (b, &len) in lens.iter().enumerate() {
            if let Some(pos) = position(len, s, reverse) {
                out.slice_mut(s![pos, b, ..]).assign(&h_next.row(b));
            }
        }
        steps.push(StepCache {
            xs,
            h_prev: std::mem::replace(&mut h_cur, h_next),
            c_prev: std::mem::replace(&mut c_cur, c_next),
            gates,
            tanh_c,
            mask,
        });
    }
    (
        out,
        h_cur,
        DirCache {
            steps,
            reverse,
            input,
        },
    )
}

/// Backpropagates through one direction, accumulating into `grad` and
/// returning the gradient with respect to the input sequence.
pub fn dir_backward<T: Real>(
    p: &LstmDir<T>,
    cache: &DirCache<T>,
    lens: &[usize],
    d_out: Option<&Array3<T>>,
    d_final: &Array2<T>,
    grad: &mut LstmDir<T>,
) -> Array3<T> {
    let t_max = cache.steps.len();
    let batch = lens.len();
    let h = p.hidden();
    let one = T::one();
    let mut dx = Array3::<T>::zeros((t_max, batch, cache.input));
    let mut dh = d_final.clone();
    let mut dc = Array2::<T>::zeros((batch, h));

    for s in (0..t_max).rev() {
        let st = &cache.steps[s];
        if let Some(d_out) = d_out {
            for (b, &len) in lens.iter().enumerate() {
                if let Some(pos) = position(len, s, cache.reverse) {
                    let mut row = dh.row_mut(b);
                    row += &d_out.slice(s![pos, b, ..]);
                }
            }
        }
        let gi = st.gates.slice(s![.., 0..h]);
        let gf = st.gates.slice(s![.., h..2 * h]);
        let gg = st.gates.slice(s![.., 2 * h..3 * h]);
        let go = st.gates.slice(s![.., 3 * h..4 * h]);

        let d_o = &dh * &st.tanh_c;
        let dct = &dc + &(&dh * &go * &st.tanh_c.mapv(|v| one - v * v));
        let d_i = &dct * &gg;
        let d_g = &dct * &gi;
        let d_f = &dct * &st.c_prev;
        let dc_prev = &dct * &gf;

        let mut dgates = Array2::<T>::zeros((batch, 4 * h));
        dgates
            .slice_mut(s![.., 0..h])
            .assign(&(&d_i * &gi.mapv(|v| v * (one - v))));
        dgates
            .slice_mut(s![.., h..2 * h])
            .assign(&(&d_f * &gf.mapv(|v| v * (one - v))));
        dgates
            .slice_mut(s![.., 2 * h..3 * h])
            .assign(&(&d_g * &gg.mapv(|v| one - v * v)));
        dgates
            .slice_mut(s![.., 3 * h..4 * h])
            .assign(&(&d_o * &go.mapv(|v| v * (one - v))));
        dgates *= &st.mask;

        grad.wih += &st.xs.t().dot(&dgates);
        grad.whh += &st.h_prev.t().dot(&dgates);
        grad.b += &dgates.sum_axis(Axis(0)).insert_axis(Axis(0));

        let dxs = dgates.dot(&p.wih.t());
        for (b, &len) in lens.iter().enumerate() {
            if let Some(pos) = position(len, s, cache.reverse) {
                dx.slice_mut(s![pos, b, ..]).assign(&dxs.row(b));
            }
        }
        let dh_prev = dgates.dot(&p.whh.t());
        let keep = st.mask.mapv(|m| one - m);
        dh = &dh_prev * &st.mask + &dh * &keep;
        dc = &dc_prev * &st.mask + &dc * &keep;
    }
    dx
}
