//! 1-D convolution and transposed convolution over `(channels, time)` arrays.
//!
//! Weights follow the usual deep-learning layouts: `(out, in, kernel)` for
//! convolution and `(in, out, kernel)` for transposed convolution. Both are
//! computed as one matrix product per kernel tap.

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array2, ArrayView1, ArrayView2, ArrayView3, Axis};

use crate::error::{Error, Result};

/// Cross-correlation with zero padding.
///
/// `T_out = floor((T + 2 padding - dilation (K - 1) - 1) / stride) + 1`.
pub fn conv1d(
    input: ArrayView2<'_, f32>,
    weight: ArrayView3<'_, f32>,
    bias: Option<ArrayView1<'_, f32>>,
    stride: usize,
    dilation: usize,
    padding: usize,
) -> Result<Array2<f32>> {
    let (c_in, len) = input.dim();
    let (c_out, w_in, k) = weight.dim();
    if w_in != c_in {
        return Err(Error::Shape(format!(
            "conv1d weight expects {w_in} input channels, got {c_in}"
        )));
    }
    check_bias(bias, c_out)?;
    if stride == 0 || dilation == 0 || k == 0 {
        return Err(Error::Shape(
            "conv1d stride, dilation and kernel must be positive".into(),
        ));
    }
    let span = dilation * (k - 1) + 1;
    let padded_len = len + 2 * padding;
    if padded_len < span {
        return Err(Error::Shape(format!(
            "conv1d input of length {len} (padding {padding}) is shorter than the kernel span {span}"
        )));
    }
    let out_len = (padded_len - span) / stride + 1;

    let padded = if padding == 0 {
        input.to_owned()
    } else {
        let mut p = Array2::<f32>::zeros((c_in, padded_len));
        p.slice_mut(s![.., padding..padding + len]).assign(&input);
        p
    };

    let mut out = Array2::<f32>::zeros((c_out, out_len));
    for tap in 0..k {
        let start = tap * dilation;
        let end = start + (out_len - 1) * stride + 1;
        let x = padded.slice(s![.., start..end;stride]);
        let w = weight.index_axis(Axis(2), tap);
        general_mat_mul(1.0, &w, &x, 1.0, &mut out);
    }
    if let Some(b) = bias {
        out += &b.insert_axis(Axis(1));
    }
    Ok(out)
}

/// Transposed convolution (scatter-add form), output length
/// `(T - 1) stride - 2 padding + K`.
pub fn transposed_conv1d(
    input: ArrayView2<'_, f32>,
    weight: ArrayView3<'_, f32>,
    bias: Option<ArrayView1<'_, f32>>,
    stride: usize,
    padding: usize,
) -> Result<Array2<f32>> {
    let (c_in, len) = input.dim();
    let (w_in, c_out, k) = weight.dim();
    if w_in != c_in {
        return Err(Error::Shape(format!(
            "transposed conv weight expects {w_in} input channels, got {c_in}"
        )));
    }
    check_bias(bias, c_out)?;
    if stride == 0 || k == 0 || len == 0 {
        return Err(Error::Shape(
            "transposed conv needs positive stride, kernel and length".into(),
        ));
    }
    let full_len = (len - 1) * stride + k;
    if full_len <= 2 * padding {
        return Err(Error::Shape(format!(
            "transposed conv padding {padding} removes the whole output"
        )));
    }
    let mut full = Array2::<f32>::zeros((c_out, full_len));
    for tap in 0..k {
        let w = weight.index_axis(Axis(2), tap);
        let mut dst = full.slice_mut(s![.., tap..tap + (len - 1) * stride + 1;stride]);
        general_mat_mul(1.0, &w.t(), &input, 1.0, &mut dst);
    }
    let mut out = full.slice(s![.., padding..full_len - padding]).to_owned();
    if let Some(b) = bias {
        out += &b.insert_axis(Axis(1));
    }
    Ok(out)
}

fn check_bias(bias: Option<ArrayView1<'_, f32>>, c_out: usize) -> Result<()> {
    match bias {
        Some(b) if b.len() != c_out => Err(Error::Shape(format!(
            "bias has {} entries for {c_out} output channels",
            b.len()
        ))),
        _ => Ok(()),
    }
}

pub(crate) fn conv_macs(c_out: usize, c_in: usize, k: usize, out_len: usize) -> u64 {
    (c_out * c_in * k * out_len) as u64
}
