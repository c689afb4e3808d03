//! Linear stability: R(z₁, z₂) = 1 + (z₁+z₂)ωᵗ(I − z₁ℬ − z₂𝒞)⁻¹e and the
//! region S₁ = {z₁ : sup_{Re z₂ ≤ 0} |R(z₁, z₂)| ≤ 1}.
//!
//! Since I − z₁ℬ − z₂𝒞 is lower triangular, its determinant Π(1 − z₂c_ii)
//! does not involve z₁, and for fixed z₂ the function R is a polynomial in z₁
//! of degree ≤ s. The scans below precompute those coefficients once per z₂
//! sample.

use std::collections::VecDeque;
use std::fmt::Write as _;

use num_complex::Complex64;
use num_traits::Signed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::rational::{one, Rational};
use crate::tableau::AsirkScheme;

/// Scheme data in the form the stability evaluations need.
#[derive(Clone, Debug)]
pub struct StabilityFunction {
    b: Vec<Vec<f64>>,
    c: Vec<Vec<f64>>,
    omega: Vec<f64>,
}

fn pole(z1: Complex64, z2: Complex64) -> Error {
    Error::Pole {
        z1: z1.to_string(),
        z2: z2.to_string(),
    }
}

impl StabilityFunction {
    pub fn new(scheme: &AsirkScheme) -> Self {
        let n = scheme.numeric();
        StabilityFunction {
            b: n.b,
            c: n.c,
            omega: n.omega,
        }
    }

    fn stages(&self) -> usize {
        self.omega.len()
    }

    fn diagonal(&self, z2: Complex64) -> Option<Vec<Complex64>> {
        (0..self.stages())
            .map(|i| {
                let d = Complex64::new(1.0, 0.0) - z2 * self.c[i][i];
                (d.norm() > 1e-14 * (1.0 + (z2 * self.c[i][i]).norm())).then(|| d.inv())
            })
            .collect()
    }

    /// Forward substitution through the triangular system.
    pub fn value(&self, z1: Complex64, z2: Complex64) -> Result<Complex64> {
        let inv_diag = self.diagonal(z2).ok_or_else(|| pole(z1, z2))?;
        let s = self.stages();
        let mut x = vec![Complex64::new(0.0, 0.0); s];
        for i in 0..s {
            let mut acc = Complex64::new(1.0, 0.0);
            for j in 0..i {
                acc += (z1 * self.b[i][j] + z2 * self.c[i][j]) * x[j];
            }
            x[i] = acc * inv_diag[i];
        }
        let wx: Complex64 = self.omega.iter().zip(&x).map(|(w, xi)| xi * *w).sum();
        Ok(1.0 + (z1 + z2) * wx)
    }

    /// Determinant quotient det(M + (z₁+z₂)eωᵗ) / det(M), M = I − z₁ℬ − z₂𝒞.
    pub fn value_det(&self, z1: Complex64, z2: Complex64) -> Result<Complex64> {
        let s = self.stages();
        let m: Vec<Vec<Complex64>> = (0..s)
            .map(|i| {
                (0..s)
                    .map(|j| {
                        let id = if i == j { 1.0 } else { 0.0 };
                        Complex64::new(id, 0.0) - z1 * self.b[i][j] - z2 * self.c[i][j]
                    })
                    .collect()
            })
            .collect();
        let den = linalg::complex_det(m.clone());
        if den.norm() == 0.0 {
            return Err(pole(z1, z2));
        }
        let num_m: Vec<Vec<Complex64>> = m
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .zip(&self.omega)
                    .map(|(v, w)| v + (z1 + z2) * *w)
                    .collect()
            })
            .collect();
        Ok(linalg::complex_det(num_m) / den)
    }

    /// Coefficients p_k(z₂) with R(z₁, z₂) = Σ_k p_k(z₂) z₁ᵏ.
    fn z1_polynomial(&self, z2: Complex64) -> Option<Vec<Complex64>> {
        let inv_diag = self.diagonal(z2)?;
        let s = self.stages();
        let zero = Complex64::new(0.0, 0.0);
        // x[i] as a polynomial in z₁, degree ≤ i.
        let mut x: Vec<Vec<Complex64>> = Vec::with_capacity(s);
        for i in 0..s {
            let mut acc = vec![zero; i + 1];
            acc[0] = Complex64::new(1.0, 0.0);
            for (j, xj) in x.iter().enumerate() {
                for (k, coef) in xj.iter().enumerate() {
                    acc[k] += z2 * self.c[i][j] * coef;
                    acc[k + 1] += coef * self.b[i][j];
                }
            }
            for a in acc.iter_mut() {
                *a *= inv_diag[i];
            }
            x.push(acc);
        }
        let mut wx = vec![zero; s + 1];
        for (w, xi) in self.omega.iter().zip(&x) {
            for (k, coef) in xi.iter().enumerate() {
                wx[k] += coef * *w;
            }
        }
        // R = 1 + (z₁ + z₂) wx(z₁)
        let mut r = vec![zero; s + 2];
        r[0] = Complex64::new(1.0, 0.0);
        for (k, coef) in wx.iter().enumerate() {
            r[k] += z2 * coef;
            r[k + 1] += coef;
        }
        Some(r)
    }
}

/// 1 − ωᵗ𝒞⁻¹e, the limit of R(0, z₂) as z₂ → −∞.
pub fn l_stability_deficiency(scheme: &AsirkScheme) -> Result<Rational> {
    let w_cinv = linalg::solve_transposed(&scheme.c, &scheme.omega)
        .ok_or_else(|| Error::SingularMatrix(format!("{}: C is singular", scheme.name)))?;
    Ok(one() - w_cinv.iter().sum::<Rational>())
}

pub fn stability_value(scheme: &AsirkScheme, z1: Complex64, z2: Complex64) -> Result<Complex64> {
    StabilityFunction::new(scheme).value(z1, z2)
}

/// Sample set standing in for the closed left half-plane in z₂.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub points: usize,
    pub y_min: f64,
    pub y_max: f64,
    pub far_field: f64,
}

impl Default for BoundarySpec {
    fn default() -> Self {
        BoundarySpec {
            points: 2000,
            y_min: 1e-3,
            y_max: 1e6,
            far_field: -1e12,
        }
    }
}

impl BoundarySpec {
    /// z₂ = 0 first (cheapest rejection), then the far field, then ±iy on a
    /// log grid.
    pub fn samples(&self) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0), Complex64::new(self.far_field, 0.0)];
        let (a, b) = (self.y_min.ln(), self.y_max.ln());
        for k in 0..self.points {
            let t = if self.points == 1 {
                0.0
            } else {
                k as f64 / (self.points - 1) as f64
            };
            let y = (a + t * (b - a)).exp();
            out.push(Complex64::new(0.0, y));
            out.push(Complex64::new(0.0, -y));
        }
        out
    }
}

/// Precomputed z₁-polynomials over a boundary sample set.
pub struct S1Tester {
    polys: Vec<Vec<Complex64>>,
    /// Some 1/c_ii lies in the closed left half-plane: R is unbounded there.
    unbounded: bool,
    tol: f64,
}

impl S1Tester {
    pub fn new(scheme: &AsirkScheme, boundary: &BoundarySpec, tol: f64) -> Self {
        let f = StabilityFunction::new(scheme);
        let unbounded = (0..scheme.stages()).any(|i| !scheme.c[i][i].is_positive());
        let mut polys = Vec::new();
        let mut hit_pole = false;
        for z2 in boundary.samples() {
            match f.z1_polynomial(z2) {
                Some(p) => polys.push(p),
                None => hit_pole = true,
            }
        }
        S1Tester {
            polys,
            unbounded: unbounded || hit_pole,
            tol,
        }
    }

    pub fn contains(&self, z1: Complex64) -> bool {
        if self.unbounded {
            return false;
        }
        let bound = (1.0 + self.tol) * (1.0 + self.tol);
        self.polys.iter().all(|p| {
            let mut acc = p[p.len() - 1];
            for coef in p.iter().rev().skip(1) {
                acc = acc * z1 + coef;
            }
            acc.norm_sqr() <= bound
        })
    }
}

pub fn s1_membership(scheme: &AsirkScheme, z1: Complex64, boundary: &BoundarySpec) -> bool {
    S1Tester::new(scheme, boundary, 1e-9).contains(z1)
}

/// Window over z₁ (upper half-plane); membership is evaluated at cell
/// centres.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn canonical() -> Self {
        GridSpec {
            re_min: -4.0,
            re_max: 1.0,
            im_min: 0.0,
            im_max: 4.0,
            nx: 500,
            ny: 400,
        }
    }

    pub fn dx(&self) -> f64 {
        (self.re_max - self.re_min) / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        (self.im_max - self.im_min) / self.ny as f64
    }

    pub fn centre(&self, ix: usize, iy: usize) -> Complex64 {
        Complex64::new(
            self.re_min + (ix as f64 + 0.5) * self.dx(),
            self.im_min + (iy as f64 + 0.5) * self.dy(),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ScanMethod {
    /// Evaluate only cells reachable from the window border through outside
    /// cells; everything enclosed is inside. Valid because the complement of
    /// S₁ is connected.
    #[default]
    FloodFill,
    Exhaustive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegionScan {
    pub grid: GridSpec,
    /// Row-major, `inside[iy * nx + ix]`.
    pub inside: Vec<bool>,
    pub area: f64,
    pub evaluations: usize,
}

pub fn region_scan(
    scheme: &AsirkScheme,
    grid: &GridSpec,
    boundary: &BoundarySpec,
    tol: f64,
    method: ScanMethod,
) -> RegionScan {
    let tester = S1Tester::new(scheme, boundary, tol);
    let (nx, ny) = (grid.nx, grid.ny);
    let (inside, evaluations) = match method {
        ScanMethod::Exhaustive => {
            let inside: Vec<bool> = (0..nx * ny)
                .into_par_iter()
                .map(|k| tester.contains(grid.centre(k % nx, k / nx)))
                .collect();
            (inside, nx * ny)
        }
        ScanMethod::FloodFill => flood_fill(&tester, grid),
    };
    let count = inside.iter().filter(|&&v| v).count();
    RegionScan {
        grid: grid.clone(),
        area: if count == 0 { 0.0 } else { count as f64 * grid.dx() * grid.dy() },
        inside,
        evaluations,
    }
}

fn flood_fill(tester: &S1Tester, grid: &GridSpec) -> (Vec<bool>, usize) {
    let (nx, ny) = (grid.nx, grid.ny);
    if nx == 0 || ny == 0 {
        return (Vec::new(), 0);
    }
    // 0 = unknown, 1 = inside, 2 = outside
    let mut state = vec![0u8; nx * ny];
    let mut queue = VecDeque::new();
    let mut evaluations = 0;
    for ix in 0..nx {
        queue.push_back((ix, 0));
        queue.push_back((ix, ny - 1));
    }
    for iy in 0..ny {
        queue.push_back((0, iy));
        queue.push_back((nx - 1, iy));
    }
    while let Some((ix, iy)) = queue.pop_front() {
        let k = iy * nx + ix;
        if state[k] != 0 {
            continue;
        }
        evaluations += 1;
        if tester.contains(grid.centre(ix, iy)) {
            state[k] = 1;
            continue;
        }
        state[k] = 2;
        if ix > 0 {
            queue.push_back((ix - 1, iy));
        }
        if ix + 1 < nx {
            queue.push_back((ix + 1, iy));
        }
        if iy > 0 {
            queue.push_back((ix, iy - 1));
        }
        if iy + 1 < ny {
            queue.push_back((ix, iy + 1));
        }
    }
    (state.into_iter().map(|s| s != 2).collect(), evaluations)
}

impl RegionScan {
    pub fn is_inside(&self, ix: usize, iy: usize) -> bool {
        self.inside[iy * self.grid.nx + ix]
    }

    /// `x,y,inside` per cell centre.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,inside\n");
        for iy in 0..self.grid.ny {
            for ix in 0..self.grid.nx {
                let z = self.grid.centre(ix, iy);
                let _ = writeln!(out, "{},{},{}", z.re, z.im, u8::from(self.is_inside(ix, iy)));
            }
        }
        out
    }

    /// Inside cells with an outside neighbour, ordered by angle about the
    /// region's centroid so that they plot as a polyline.
    pub fn boundary(&self) -> Vec<Complex64> {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let mut pts = Vec::new();
        let mut centroid = Complex64::new(0.0, 0.0);
        let mut count = 0.0;
        for iy in 0..ny {
            for ix in 0..nx {
                if !self.is_inside(ix, iy) {
                    continue;
                }
                centroid += self.grid.centre(ix, iy);
                count += 1.0;
                let outside = |jx: isize, jy: isize| {
                    jx >= 0
                        && jy >= 0
                        && (jx as usize) < nx
                        && (jy as usize) < ny
                        && !self.is_inside(jx as usize, jy as usize)
                };
                let (x, y) = (ix as isize, iy as isize);
                if outside(x - 1, y) || outside(x + 1, y) || outside(x, y - 1) || outside(x, y + 1) {
                    pts.push(self.grid.centre(ix, iy));
                }
            }
        }
        if count > 0.0 {
            centroid /= count;
        }
        pts.sort_by(|a, b| (a - centroid).arg().total_cmp(&(b - centroid).arg()));
        pts
    }

    pub fn boundary_csv(&self) -> String {
        let mut out = String::from("x,y\n");
        for p in self.boundary() {
            let _ = writeln!(out, "{},{}", p.re, p.im);
        }
        out
    }
}
