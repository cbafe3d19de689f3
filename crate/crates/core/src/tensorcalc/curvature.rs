use super::fd::{FdScheme, Tensor3, Tensor4};
use super::field::{spd_inverse, MetricField};
use crate::charts::ChartPoint;
use crate::error::TensorError;
use nalgebra::DMatrix;

pub(crate) type MatFn<'a> = &'a dyn Fn(&[f64]) -> Result<DMatrix<f64>, TensorError>;

/// `Gamma^k_ij` stored as `[(k, i, j)]`.
pub(crate) fn christoffel_with(fd: &FdScheme, g: MatFn, x: &[f64], hs: &[f64]) -> Result<Tensor3, TensorError> {
    let n = x.len();
    let ginv = spd_inverse(&g(x)?)?;
    let dg = fd.gradient(g, x, hs)?;
    let mut lower = Tensor3::zeros(n);
    for l in 0..n {
        for i in 0..n {
            for j in i..n {
                let v = 0.5 * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                lower[(l, i, j)] = v;
                lower[(l, j, i)] = v;
            }
        }
    }
    let mut gam = Tensor3::zeros(n);
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let v: f64 = (0..n).map(|l| ginv[(k, l)] * lower[(l, i, j)]).sum();
                gam[(k, i, j)] = v;
                gam[(k, j, i)] = v;
            }
        }
    }
    Ok(gam)
}

/// Christoffel symbols and their first partials `dgam[a] = d_a Gamma`.
fn christoffel_and_derivs(
    fd: &FdScheme,
    g: MatFn,
    x: &[f64],
    hs: &[f64],
) -> Result<(Tensor3, Vec<Tensor3>), TensorError> {
    let gam = christoffel_with(fd, g, x, hs)?;
    let dgam = fd.gradient(&|y: &[f64]| christoffel_with(fd, g, y, hs), x, hs)?;
    Ok((gam, dgam))
}

/// `R_ijk^l = d_i Gamma^l_jk - d_j Gamma^l_ik + Gamma^m_jk Gamma^l_im - Gamma^m_ik Gamma^l_jm`,
/// returned as `[(i, j, k, l)]`.
fn riemann_up(gam: &Tensor3, dgam: &[Tensor3]) -> Tensor4 {
    let n = gam.n;
    let mut r = Tensor4::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut v = dgam[i][(l, j, k)] - dgam[j][(l, i, k)];
                    for m in 0..n {
                        v += gam[(m, j, k)] * gam[(l, i, m)] - gam[(m, i, k)] * gam[(l, j, m)];
                    }
                    r[(i, j, k, l)] = v;
                }
            }
        }
    }
    r
}

fn ricci_from(gam: &Tensor3, dgam: &[Tensor3]) -> DMatrix<f64> {
    let n = gam.n;
    let mut ric = DMatrix::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            let mut v = 0.0;
            for i in 0..n {
                v += dgam[i][(i, j, k)] - dgam[j][(i, i, k)];
                for m in 0..n {
                    v += gam[(m, j, k)] * gam[(i, i, m)] - gam[(m, i, k)] * gam[(i, j, m)];
                }
            }
            ric[(j, k)] = v;
        }
    }
    symmetrize(&ric)
}

pub(crate) fn ricci_with(fd: &FdScheme, g: MatFn, x: &[f64], hs: &[f64]) -> Result<DMatrix<f64>, TensorError> {
    let (gam, dgam) = christoffel_and_derivs(fd, g, x, hs)?;
    Ok(ricci_from(&gam, &dgam))
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Steps for `fd` at `p`, sized by the metric `g`.
pub(crate) fn steps_for(g: &MetricField, x: &[f64], fd: &FdScheme) -> Result<Vec<f64>, TensorError> {
    fd.steps(&g.at(x)?)
}

pub fn christoffels_at(g: &MetricField, p: &ChartPoint, fd: &FdScheme) -> Result<Tensor3, TensorError> {
    let x = p.coords();
    let hs = steps_for(g, x, fd)?;
    christoffel_with(fd, &|y: &[f64]| g.at(y), x, &hs)
}

/// Riemann tensor with all indices down, `R_ijkl = g_lm R_ijk^m`.
///
/// For curvature -1 this gives `R_iklj = -(g_ij g_kl - g_il g_kj)`.
pub fn riemann_at(g: &MetricField, p: &ChartPoint, fd: &FdScheme) -> Result<Tensor4, TensorError> {
    let x = p.coords();
    let hs = steps_for(g, x, fd)?;
    let gfn = |y: &[f64]| g.at(y);
    let (gam, dgam) = christoffel_and_derivs(fd, &gfn, x, &hs)?;
    let up = riemann_up(&gam, &dgam);
    let g0 = g.at(x)?;
    let n = x.len();
    let mut r = Tensor4::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    r[(i, j, k, l)] = (0..n).map(|m| g0[(l, m)] * up[(i, j, k, m)]).sum();
                }
            }
        }
    }
    Ok(r)
}

pub fn ricci_at(g: &MetricField, p: &ChartPoint, fd: &FdScheme) -> Result<DMatrix<f64>, TensorError> {
    let x = p.coords();
    let hs = steps_for(g, x, fd)?;
    ricci_with(fd, &|y: &[f64]| g.at(y), x, &hs)
}

/// Covariant derivative of a symmetric 2-tensor: `[(a, i, j)] = nabla_a t_ij`.
pub(crate) fn cov_deriv_with(
    fd: &FdScheme,
    g: MatFn,
    t: MatFn,
    x: &[f64],
    hs: &[f64],
) -> Result<Tensor3, TensorError> {
    let n = x.len();
    let gam = christoffel_with(fd, g, x, hs)?;
    let t0 = t(x)?;
    let dt = fd.gradient(t, x, hs)?;
    let mut c = Tensor3::zeros(n);
    for a in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut v = dt[a][(i, j)];
                for m in 0..n {
                    v -= gam[(m, a, i)] * t0[(m, j)] + gam[(m, a, j)] * t0[(i, m)];
                }
                c[(a, i, j)] = v;
            }
        }
    }
    Ok(c)
}

/// `A^p_ij = -1/2 g^pm (nabla_i e_jm + nabla_j e_im - nabla_m e_ij)` with
/// `e = g - h` and `nabla` the connection of `h`; equals `Gamma(h) - Gamma(g)`.
pub(crate) fn difference_with(
    fd: &FdScheme,
    g: MatFn,
    h: MatFn,
    x: &[f64],
    hs: &[f64],
) -> Result<Tensor3, TensorError> {
    let n = x.len();
    let ginv = spd_inverse(&g(x)?)?;
    let e = |y: &[f64]| -> Result<DMatrix<f64>, TensorError> { Ok(g(y)? - h(y)?) };
    let c = cov_deriv_with(fd, h, &e, x, hs)?;
    let mut a = Tensor3::zeros(n);
    for p in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut v = 0.0;
                for m in 0..n {
                    v += ginv[(p, m)] * (c[(i, j, m)] + c[(j, i, m)] - c[(m, i, j)]);
                }
                a[(p, i, j)] = -0.5 * v;
            }
        }
    }
    Ok(a)
}

pub fn difference_tensor_at(
    g: &MetricField,
    h: &MetricField,
    p: &ChartPoint,
    fd: &FdScheme,
) -> Result<Tensor3, TensorError> {
    if g.dim() != h.dim() {
        return Err(TensorError::Mismatch(format!("dimensions {} and {}", g.dim(), h.dim())));
    }
    let x = p.coords();
    let hs = steps_for(h, x, fd)?;
    difference_with(fd, &|y: &[f64]| g.at(y), &|y: &[f64]| h.at(y), x, &hs)
}

/// Ricci tensor of `g` assembled from the curvature of `h` and the
/// connection difference `D = Gamma(g) - Gamma(h) = -A`:
///
/// `Rc(g)_jk = Rc(h)_jk + nabla_i D^i_jk - nabla_j D^i_ik + D^i_im D^m_jk - D^i_jm D^m_ik`.
pub fn ricci_split_at(
    g: &MetricField,
    h: &MetricField,
    p: &ChartPoint,
    fd: &FdScheme,
) -> Result<DMatrix<f64>, TensorError> {
    let x = p.coords();
    let n = x.len();
    let hs = steps_for(h, x, fd)?;
    let gfn = |y: &[f64]| g.at(y);
    let hfn = |y: &[f64]| h.at(y);
    let dfield = |y: &[f64]| difference_with(fd, &gfn, &hfn, y, &hs).map(|a| a.scaled(-1.0));

    let (gam, dgam) = christoffel_and_derivs(fd, &hfn, x, &hs)?;
    let ric_h = ricci_from(&gam, &dgam);
    let d = dfield(x)?;
    let dd = fd.gradient(&dfield, x, &hs)?;
    // nabla_a D^i_jk
    let nab = |a: usize, i: usize, j: usize, k: usize| -> f64 {
        let mut v = dd[a][(i, j, k)];
        for m in 0..n {
            v += gam[(i, a, m)] * d[(m, j, k)] - gam[(m, a, j)] * d[(i, m, k)] - gam[(m, a, k)] * d[(i, j, m)];
        }
        v
    };
    let mut ric = ric_h;
    for j in 0..n {
        for k in 0..n {
            let mut v = 0.0;
            for i in 0..n {
                v += nab(i, i, j, k) - nab(j, i, i, k);
                for m in 0..n {
                    v += d[(i, i, m)] * d[(m, j, k)] - d[(i, j, m)] * d[(m, i, k)];
                }
            }
            ric[(j, k)] += v;
        }
    }
    Ok(symmetrize(&ric))
}
