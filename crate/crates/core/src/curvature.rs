//! Christoffel symbols and Gauss curvature of the catalog metrics.
//!
//! Two independent numerical routes are provided: the Riemann tensor built
//! from Christoffel symbols, and the orthogonal-coordinates formula in terms
//! of `E` and `G`. Both finite-difference only the outermost derivative; the
//! metric partials they consume are exact. The closed forms in
//! [`closed_form_k`] serve as the oracle for both.

use crate::error::{GeoError, Result};
use crate::geometry::{
    area_element, eval_metric, eval_metric_derivatives, MetricId, Point, SpacetimeParams,
};

/// `gamma[l][m][n]` is the connection coefficient with upper index `l`,
/// coordinate order `(r, phi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChristoffelSymbols {
    pub gamma: [[[f64; 2]; 2]; 2],
}

impl ChristoffelSymbols {
    pub fn get(&self, upper: usize, a: usize, b: usize) -> f64 {
        self.gamma[upper][a][b]
    }

    /// `Gamma^l_{mn} v^m v^n` for each `l`.
    pub fn contract(&self, v: [f64; 2]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (l, o) in out.iter_mut().enumerate() {
            for m in 0..2 {
                for n in 0..2 {
                    *o += self.gamma[l][m][n] * v[m] * v[n];
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvatureMethod {
    RiemannTensor,
    Liouville,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureSample {
    pub point: Point,
    pub k: f64,
    pub method: CurvatureMethod,
}

pub fn christoffel(id: MetricId, params: SpacetimeParams, p: Point) -> Result<ChristoffelSymbols> {
    let c = eval_metric(id, params, p)?;
    let d = eval_metric_derivatives(id, params, p)?;
    let ginv = c.inverse();
    // dg[k][i][j] = d_k g_ij
    let dg = d.first_partials();
    let mut gamma = [[[0.0; 2]; 2]; 2];
    for (l, gl) in gamma.iter_mut().enumerate() {
        for m in 0..2 {
            for n in m..2 {
                let mut s = 0.0;
                for rho in 0..2 {
                    s += ginv[l][rho] * (dg[n][rho][m] + dg[m][rho][n] - dg[rho][m][n]);
                }
                gl[m][n] = 0.5 * s;
                gl[n][m] = 0.5 * s;
            }
        }
    }
    Ok(ChristoffelSymbols { gamma })
}

/// Finite-difference step used for derivatives of connection coefficients.
pub fn fd_step(params: SpacetimeParams, r: f64) -> f64 {
    (1e-6 * r).max(1e-8 * params.mass)
}

/// Refuses points whose central-difference stencil would come within ten
/// steps of the optical singularity.
fn stencil_guard(id: MetricId, params: SpacetimeParams, p: Point) -> Result<f64> {
    id.check_point(params, p)?;
    let h = fd_step(params, p.r);
    let r_sing = id.singular_radius(params);
    if p.r < r_sing + 10.0 * h {
        return Err(GeoError::Domain(format!(
            "r = {} is within 10 finite-difference steps (h = {h:e}) of the singular radius {r_sing}",
            p.r
        )));
    }
    Ok(h)
}

/// Central difference whose denominator is the actually representable
/// stencil width.
fn central<F>(f: F, x: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let xp = x + h;
    let xm = x - h;
    Ok((f(xp)? - f(xm)?) / (xp - xm))
}

/// The fully lowered component `R_{r phi r phi}` of the Riemann tensor.
pub fn riemann_1212(id: MetricId, params: SpacetimeParams, p: Point) -> Result<f64> {
    let h = stencil_guard(id, params, p)?;
    let h_phi = 1e-6;
    let gam = christoffel(id, params, p)?;

    // R^z_{phi r phi} = d_r Gamma^z_{phi phi} - d_phi Gamma^z_{r phi}
    //                 + Gamma^z_{r e} Gamma^e_{phi phi} - Gamma^z_{phi e} Gamma^e_{r phi}
    let mut r_up = [0.0; 2];
    for (z, out) in r_up.iter_mut().enumerate() {
        let d_r = central(
            |x| Ok(christoffel(id, params, Point::new(x, p.phi))?.gamma[z][1][1]),
            p.r,
            h,
        )?;
        let d_phi = central(
            |x| Ok(christoffel(id, params, Point::new(p.r, x))?.gamma[z][0][1]),
            p.phi,
            h_phi,
        )?;
        debug_assert!(d_phi.abs() <= 1e-12 * (1.0 + d_r.abs()));
        let mut quad = 0.0;
        for e in 0..2 {
            quad += gam.gamma[z][0][e] * gam.gamma[e][1][1] - gam.gamma[z][1][e] * gam.gamma[e][0][1];
        }
        *out = d_r - d_phi + quad;
    }
    let g = eval_metric(id, params, p)?.matrix();
    Ok(g[0][0] * r_up[0] + g[0][1] * r_up[1])
}

/// Gauss curvature through the Riemann tensor: `K = R_1212 / det g`.
pub fn gauss_curvature(id: MetricId, params: SpacetimeParams, p: Point) -> Result<f64> {
    let r1212 = riemann_1212(id, params, p)?;
    let det = eval_metric(id, params, p)?.det();
    Ok(r1212 / det)
}

/// Gauss curvature from the orthogonal-coordinates formula
/// `K = -1/(2W) [ (E_phi/W)_phi + (G_r/W)_r ]` with `W = sqrt(E G)`.
pub fn gauss_curvature_liouville(id: MetricId, params: SpacetimeParams, p: Point) -> Result<f64> {
    let h = stencil_guard(id, params, p)?;
    let h_phi = 1e-6;
    let c = eval_metric(id, params, p)?;
    debug_assert_eq!(c.f, 0.0);
    let w = area_element(c)?;

    let g_r_over_w = |r: f64| -> Result<f64> {
        let q = Point::new(r, p.phi);
        let w = area_element(eval_metric(id, params, q)?)?;
        Ok(eval_metric_derivatives(id, params, q)?.g_r / w)
    };
    let e_phi_over_w = |phi: f64| -> Result<f64> {
        let q = Point::new(p.r, phi);
        let w = area_element(eval_metric(id, params, q)?)?;
        Ok(eval_metric_derivatives(id, params, q)?.e_phi / w)
    };
    let radial = central(g_r_over_w, p.r, h)?;
    let angular = central(e_phi_over_w, p.phi, h_phi)?;
    debug_assert_eq!(angular, 0.0);
    Ok(-(angular + radial) / (2.0 * w))
}

/// Closed-form Gauss curvature of each catalog metric.
pub fn closed_form_k(id: MetricId, params: SpacetimeParams, p: Point) -> Result<f64> {
    id.check_point(params, p)?;
    let r = p.r;
    let m = params.mass;
    let a = params.spin;
    Ok(match id {
        MetricId::Flat => 0.0,
        MetricId::SchwarzschildOptical => m * (3.0 * m - 2.0 * r) / r.powi(4),
        MetricId::KerrReducedOptical => {
            m * (6.0 * a * a * (r - m) + r * (6.0 * m * m - 7.0 * m * r + 2.0 * r * r))
                / ((2.0 * m - r) * r.powi(5))
        }
    })
}

/// Evaluates `K` at `p` by the requested route.
pub fn curvature_sample(
    id: MetricId,
    params: SpacetimeParams,
    p: Point,
    method: CurvatureMethod,
) -> Result<CurvatureSample> {
    let k = match method {
        CurvatureMethod::RiemannTensor => gauss_curvature(id, params, p)?,
        CurvatureMethod::Liouville => gauss_curvature_liouville(id, params, p)?,
        CurvatureMethod::ClosedForm => closed_form_k(id, params, p)?,
    };
    Ok(CurvatureSample { point: p, k, method })
}
