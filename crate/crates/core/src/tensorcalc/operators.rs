use super::curvature::{christoffel_with, cov_deriv_with, ricci_with, riemann_at, steps_for, symmetrize, MatFn};
use super::fd::{FdScheme, Tensor3};
use super::field::{inverse, spd_inverse, MetricField, ScalarField, SymTensorField};
use crate::charts::ChartPoint;
use crate::error::TensorError;
use nalgebra::{DMatrix, DVector};

type VecFn<'a> = &'a dyn Fn(&[f64]) -> Result<DVector<f64>, TensorError>;

/// `g^ij t_ij`.
pub fn trace_with(g: &DMatrix<f64>, t: &DMatrix<f64>) -> Result<f64, TensorError> {
    let ginv = spd_inverse(g)?;
    Ok(ginv.component_mul(t).sum())
}

/// `|t|_g^2 = g^ia g^jb t_ij t_ab`.
pub fn norm_sq_with(g: &DMatrix<f64>, t: &DMatrix<f64>) -> Result<f64, TensorError> {
    let ginv = spd_inverse(g)?;
    let up = &ginv * t * &ginv;
    Ok(up.component_mul(t).sum())
}

/// `G_g t = t - 1/2 (tr_g t) g`.
pub fn g_operator(g: &DMatrix<f64>, t: &DMatrix<f64>) -> Result<DMatrix<f64>, TensorError> {
    Ok(t - g * (0.5 * trace_with(g, t)?))
}

fn rough_laplacian_with(fd: &FdScheme, g: MatFn, t: MatFn, x: &[f64], hs: &[f64]) -> Result<DMatrix<f64>, TensorError> {
    let n = x.len();
    let ginv = spd_inverse(&g(x)?)?;
    let gam = christoffel_with(fd, g, x, hs)?;
    let cfield = |y: &[f64]| cov_deriv_with(fd, g, t, y, hs);
    let c = cfield(x)?;
    let dc = fd.gradient(&cfield, x, hs)?;
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut v = 0.0;
            for a in 0..n {
                for b in 0..n {
                    let w = ginv[(a, b)];
                    if w == 0.0 {
                        continue;
                    }
                    let mut s = dc[a][(b, i, j)];
                    for m in 0..n {
                        s -= gam[(m, a, b)] * c[(m, i, j)] + gam[(m, a, i)] * c[(b, m, j)] + gam[(m, a, j)] * c[(b, i, m)];
                    }
                    v += w * s;
                }
            }
            out[(i, j)] = -v;
            out[(j, i)] = -v;
        }
    }
    Ok(out)
}

/// `(delta_g t)_k = -g^ij nabla_i t_jk`.
fn divergence_with(fd: &FdScheme, g: MatFn, t: MatFn, x: &[f64], hs: &[f64]) -> Result<DVector<f64>, TensorError> {
    let n = x.len();
    let ginv = spd_inverse(&g(x)?)?;
    let c = cov_deriv_with(fd, g, t, x, hs)?;
    Ok(DVector::from_fn(n, |k, _| {
        let mut v = 0.0;
        for i in 0..n {
            for j in 0..n {
                v += ginv[(i, j)] * c[(i, j, k)];
            }
        }
        -v
    }))
}

/// `(delta*_g w)_ij = 1/2 (nabla_i w_j + nabla_j w_i)`.
fn sym_cov_deriv_with(fd: &FdScheme, g: MatFn, w: VecFn, x: &[f64], hs: &[f64]) -> Result<DMatrix<f64>, TensorError> {
    let n = x.len();
    let gam = christoffel_with(fd, g, x, hs)?;
    let w0 = w(x)?;
    let dw = fd.gradient(w, x, hs)?;
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut v = 0.5 * (dw[i][j] + dw[j][i]);
            for k in 0..n {
                v -= gam[(k, i, j)] * w0[k];
            }
            out[(i, j)] = v;
        }
    }
    Ok(out)
}

/// `w = g tau^-1 delta_g (G_g tau)` as a covector.
fn deturck_with(fd: &FdScheme, g: MatFn, tau: MatFn, x: &[f64], hs: &[f64]) -> Result<DVector<f64>, TensorError> {
    let gt = |y: &[f64]| g_operator(&g(y)?, &tau(y)?);
    let div = divergence_with(fd, g, &gt, x, hs)?;
    let tinv = inverse(&tau(x)?)?;
    Ok(g(x)? * tinv * div)
}

fn q_with(fd: &FdScheme, g: MatFn, t: MatFn, x: &[f64], hs: &[f64]) -> Result<DMatrix<f64>, TensorError> {
    let n = x.len() as f64;
    let ric = ricci_with(fd, g, x, hs)?;
    let w = |y: &[f64]| deturck_with(fd, g, t, y, hs);
    let gauge = sym_cov_deriv_with(fd, g, &w, x, hs)?;
    Ok(ric + g(x)? * (n - 1.0) - gauge)
}

/// Geometer's Laplacian `-1/sqrt(det g) d_i (sqrt(det g) g^ij d_j u)`.
pub fn laplacian_scalar_at(g: &MetricField, u: &ScalarField, p: &ChartPoint, fd: &FdScheme) -> Result<f64, TensorError> {
    let x = p.coords();
    let hs = steps_for(g, x, fd)?;
    let ufn = |y: &[f64]| -> Result<f64, TensorError> { Ok(u.at(y)) };
    let flux = |y: &[f64]| -> Result<DVector<f64>, TensorError> {
        let gy = g.at(y)?;
        let vol = gy.determinant().abs().sqrt();
        let du = DVector::from_vec(fd.gradient(&ufn, y, &hs)?);
        Ok(spd_inverse(&gy)? * du * vol)
    };
    let dflux = fd.gradient(&flux, x, &hs)?;
    let div: f64 = (0..x.len()).map(|i| dflux[i][i]).sum();
    Ok(-div / g.at(x)?.determinant().abs().sqrt())
}

/// `nabla* nabla t = -g^ab nabla_a nabla_b t`.
pub fn rough_laplacian_tensor_at(
    g: &MetricField,
    t: &SymTensorField,
    p: &ChartPoint,
    fd: &FdScheme,
) -> Result<DMatrix<f64>, TensorError> {
    let x = p.coords();
    let hs = steps_for(g, x, fd)?;
    rough_laplacian_with(fd, &|y: &[f64]| g.at(y), &|y: &[f64]| t.at(y), x, &hs)
}

/// Lichnerowicz Laplacian `nabla* nabla u + 2 Rc(u) - 2 Rm(u)` with
/// `Rc(u)_ij = 1/2 (R_ik u_j^k + R_kj u_i^k)` and `Rm(u)_ij = R_iklj u^kl`,
/// all curvature by finite differences.
pub fn lichnerowicz_at(h: &MetricField, u: &SymTensorField, p: &ChartPoint, fd: &FdScheme) -> Result<DMatrix<f64>, TensorError> {
    let x = p.coords();
    let n = x.len();
    let rough = rough_laplacian_tensor_at(h, u, p, fd)?;
    let riem = riemann_at(h, p, fd)?;
    let ginv = spd_inverse(&h.at(x)?)?;
    let u0 = u.at(x)?;
    let mut ric = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            ric[(j, k)] = (0..n).map(|i| (0..n).map(|l| ginv[(i, l)] * riem[(i, j, k, l)]).sum::<f64>()).sum();
        }
    }
    let mixed = &u0 * &ginv; // u_j^k
    let rc = symmetrize(&(&ric * mixed.transpose()));
    let uup = &ginv * &u0 * &ginv;
    let mut rm = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut v = 0.0;
            for k in 0..n {
                for l in 0..n {
                    v += riem[(i, k, l, j)] * uup[(k, l)];
                }
            }
            rm[(i, j)] = v;
        }
    }
    Ok(rough + rc * 2.0 - symmetrize(&rm) * 2.0)
}

/// Hyperbolic form `nabla* nabla u - 2n u + 2 (tr_h u) h`.
pub fn lichnerowicz_hyperbolic_at(
    h: &MetricField,
    u: &SymTensorField,
    p: &ChartPoint,
    fd: &FdScheme,
) -> Result<DMatrix<f64>, TensorError> {
    let x = p.coords();
    let n = x.len() as f64;
    let (h0, u0) = (h.at(x)?, u.at(x)?);
    let tr = trace_with(&h0, &u0)?;
    Ok(rough_laplacian_tensor_at(h, u, p, fd)? - &u0 * (2.0 * n) + h0 * (2.0 * tr))
}

/// `delta_g t`, `G_g t` and `delta*_g(delta_g t)` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct BianchiOps {
    pub divergence: DVector<f64>,
    pub g_tensor: DMatrix<f64>,
    pub sym_grad_of_divergence: DMatrix<f64>,
}

pub fn bianchi_ops_at(g: &MetricField, t: &SymTensorField, p: &ChartPoint, fd: &FdScheme) -> Result<BianchiOps, TensorError> {
    let x = p.coords();
    let hs = steps_for(g, x, fd)?;
    let gfn = |y: &[f64]| g.at(y);
    let tfn = |y: &[f64]| t.at(y);
    let div = |y: &[f64]| divergence_with(fd, &gfn, &tfn, y, &hs);
    Ok(BianchiOps {
        divergence: div(x)?,
        g_tensor: g_operator(&g.at(x)?, &t.at(x)?)?,
        sym_grad_of_divergence: sym_cov_deriv_with(fd, &gfn, &div, x, &hs)?,
    })
}

/// `delta*_g w` for a covector field given by its components.
pub fn sym_cov_deriv_at(
    g: &MetricField,
    w: &(dyn Fn(&[f64]) -> DVector<f64> + Sync),
    p: &ChartPoint,
    fd: &FdScheme,
) -> Result<DMatrix<f64>, TensorError> {
    let x = p.coords();
    let hs = steps_for(g, x, fd)?;
    sym_cov_deriv_with(fd, &|y: &[f64]| g.at(y), &|y: &[f64]| Ok(w(y)), x, &hs)
}

pub fn deturck_field_at(g: &MetricField, tau: &MetricField, p: &ChartPoint, fd: &FdScheme) -> Result<DVector<f64>, TensorError> {
    let x = p.coords();
    let hs = steps_for(g, x, fd)?;
    deturck_with(fd, &|y: &[f64]| g.at(y), &|y: &[f64]| tau.at(y), x, &hs)
}

/// The gauge term `delta*_g (g t^-1 delta_g G_g t)` of `Q(g, t)`.
pub fn gauge_term_at(g: &MetricField, t: &MetricField, p: &ChartPoint, fd: &FdScheme) -> Result<DMatrix<f64>, TensorError> {
    let x = p.coords();
    let hs = steps_for(g, x, fd)?;
    let gfn = |y: &[f64]| g.at(y);
    let tfn = |y: &[f64]| t.at(y);
    let w = |y: &[f64]| deturck_with(fd, &gfn, &tfn, y, &hs);
    sym_cov_deriv_with(fd, &gfn, &w, x, &hs)
}

/// `Q(g, t) = Rc(g) + (n-1) g - delta*_g (g t^-1 delta_g G_g t)`.
#[allow(non_snake_case)]
pub fn Q_at(g: &MetricField, t: &MetricField, p: &ChartPoint, fd: &FdScheme) -> Result<DMatrix<f64>, TensorError> {
    if g.dim() != t.dim() {
        return Err(TensorError::Mismatch(format!("dimensions {} and {}", g.dim(), t.dim())));
    }
    let x = p.coords();
    let hs = steps_for(g, x, fd)?;
    q_with(fd, &|y: &[f64]| g.at(y), &|y: &[f64]| t.at(y), x, &hs)
}

/// Same as [`Q_at`] but with the finite-difference steps sized by `base`
/// instead of `g`, so that nearby metrics share one stencil.
#[allow(non_snake_case)]
pub fn Q_at_with_base(
    g: &MetricField,
    t: &MetricField,
    base: &MetricField,
    p: &ChartPoint,
    fd: &FdScheme,
) -> Result<DMatrix<f64>, TensorError> {
    let x = p.coords();
    let hs = steps_for(base, x, fd)?;
    q_with(fd, &|y: &[f64]| g.at(y), &|y: &[f64]| t.at(y), x, &hs)
}

/// The constants `(a, b)` of `L r = 1/2 ((Delta + a)(uh) + (Delta + b) r0)`
/// for the linearized operator.
pub fn default_k_pair(n: usize) -> (f64, f64) {
    (2.0 * (n as f64 - 1.0), -2.0)
}

/// `L r = 1/2 ((Delta + a)(u h) + (Delta + b) r0)` with `u = tr_h r / n`,
/// `r0 = r - u h` and `Delta` the rough Laplacian of `h`.
#[allow(non_snake_case)]
pub fn L_at(
    h: &MetricField,
    r: &SymTensorField,
    k_pair: (f64, f64),
    p: &ChartPoint,
    fd: &FdScheme,
) -> Result<DMatrix<f64>, TensorError> {
    let x = p.coords();
    let n = x.len() as f64;
    let hs = steps_for(h, x, fd)?;
    let hfn = |y: &[f64]| h.at(y);
    let uh = |y: &[f64]| -> Result<DMatrix<f64>, TensorError> {
        let hy = h.at(y)?;
        let u = trace_with(&hy, &r.at(y)?)? / n;
        Ok(hy * u)
    };
    let r0 = |y: &[f64]| -> Result<DMatrix<f64>, TensorError> { Ok(r.at(y)? - uh(y)?) };
    let lap_uh = rough_laplacian_with(fd, &hfn, &uh, x, &hs)?;
    let lap_r0 = rough_laplacian_with(fd, &hfn, &r0, x, &hs)?;
    let (a, b) = k_pair;
    Ok((lap_uh + uh(x)? * a + lap_r0 + r0(x)? * b) * 0.5)
}

/// `nabla_k u_ij` of a tensor field; `[(k, i, j)]`.
pub fn covariant_derivative_at(
    g: &MetricField,
    t: &SymTensorField,
    p: &ChartPoint,
    fd: &FdScheme,
) -> Result<Tensor3, TensorError> {
    let x = p.coords();
    let hs = steps_for(g, x, fd)?;
    cov_deriv_with(fd, &|y: &[f64]| g.at(y), &|y: &[f64]| t.at(y), x, &hs)
}
