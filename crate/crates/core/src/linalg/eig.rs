//! Dense real nonsymmetric eigendecomposition.
//!
//! The classic EISPACK/JAMA pipeline: balance the matrix by diagonal
//! similarity scaling, reduce to upper Hessenberg form with Householder
//! reflections, then run the implicitly shifted QR iteration with double
//! (Francis) shifts until every subdiagonal deflates. Complex eigenvalues of
//! the real input come out in conjugate pairs stored adjacently, positive
//! imaginary part first.
//!
//! Eigenvectors are optional: when requested, the quasi-triangular form is
//! back-substituted and combined with the accumulated transformations
//! (25 n^3 flops instead of ~10 n^3 for values only).

use nalgebra::DMatrix;
use num_complex::Complex64;

const RADIX: f64 = 2.0;

/// QR iteration budget per matrix dimension (`max_sweeps = SWEEPS_PER_DIM * n`).
pub const SWEEPS_PER_DIM: usize = 30;

/// The QR iteration failed to deflate every subdiagonal within the sweep budget.
#[derive(Debug, Clone, Copy)]
pub struct NonConvergence {
    pub sweeps: usize,
}

#[derive(Debug, Clone)]
pub struct RealEigen {
    n: usize,
    /// Eigenvalue real parts, in matrix order.
    pub re: Vec<f64>,
    /// Imaginary parts; a conjugate pair occupies slots (k, k+1) with
    /// `im[k] > 0 = -im[k+1]`.
    pub im: Vec<f64>,
    /// Packed eigenvector matrix (row-major): column k for a real eigenvalue;
    /// columns (k, k+1) hold real and imaginary part for a conjugate pair.
    vectors: Option<Vec<f64>>,
}

impl RealEigen {
    pub fn values(&self) -> Vec<Complex64> {
        self.re
            .iter()
            .zip(&self.im)
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect()
    }

    pub fn has_vectors(&self) -> bool {
        self.vectors.is_some()
    }

    /// Right eigenvector for eigenvalue `k` (unpacking the conjugate-pair
    /// storage). Panics if vectors were not requested.
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        let v = self
            .vectors
            .as_ref()
            .expect("eigenvectors were not computed");
        let n = self.n;
        let mut out = Vec::with_capacity(n);
        if self.im[k] == 0.0 {
            for i in 0..n {
                out.push(Complex64::new(v[i * n + k], 0.0));
            }
        } else if self.im[k] > 0.0 {
            for i in 0..n {
                out.push(Complex64::new(v[i * n + k], v[i * n + k + 1]));
            }
        } else {
            for i in 0..n {
                out.push(Complex64::new(v[i * n + k - 1], -v[i * n + k]));
            }
        }
        out
    }
}

/// Computes eigenvalues (and optionally right eigenvectors) of a dense real
/// matrix. `max_sweeps = 0` selects the default budget of `30 n` QR sweeps.
pub fn real_eigen(
    a: &DMatrix<f64>,
    want_vectors: bool,
    max_sweeps: usize,
) -> Result<RealEigen, NonConvergence> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eigendecomposition needs a square matrix");
    let budget = if max_sweeps == 0 {
        SWEEPS_PER_DIM * n.max(1)
    } else {
        max_sweeps
    };

    if n == 0 {
        return Ok(RealEigen {
            n,
            re: Vec::new(),
            im: Vec::new(),
            vectors: want_vectors.then(Vec::new),
        });
    }

    // Row-major working copy.
    let mut h = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] = a[(i, j)];
        }
    }

    let scale = balance(&mut h, n);

    let mut v = if want_vectors {
        let mut id = vec![0.0f64; n * n];
        for i in 0..n {
            id[i * n + i] = 1.0;
        }
        Some(id)
    } else {
        None
    };
    hessenberg(&mut h, n, v.as_deref_mut());

    let mut re = vec![0.0f64; n];
    let mut im = vec![0.0f64; n];
    francis_qr(&mut h, n, &mut re, &mut im, v.as_deref_mut(), budget)?;

    if let Some(v) = v.as_deref_mut() {
        // Undo the balancing similarity: rows pick up their scale factor.
        for i in 0..n {
            let s = scale[i];
            if s != 1.0 {
                for x in v[i * n..i * n + n].iter_mut() {
                    *x *= s;
                }
            }
        }
    }

    Ok(RealEigen {
        n,
        re,
        im,
        vectors: v,
    })
}

/// Diagonal similarity scaling so row and column norms are comparable.
fn balance(a: &mut [f64], n: usize) -> Vec<f64> {
    let mut scale = vec![1.0f64; n];
    let sq = RADIX * RADIX;
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[j * n + i].abs();
                    r += a[i * n + j].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut f = 1.0;
                let s = c + r;
                let mut cc = c;
                let mut g = r / RADIX;
                while cc < g {
                    f *= RADIX;
                    cc *= sq;
                }
                g = r * RADIX;
                while cc > g {
                    f /= RADIX;
                    cc /= sq;
                }
                if (cc + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    scale[i] *= f;
                    for x in a[i * n..i * n + n].iter_mut() {
                        *x *= g;
                    }
                    for j in 0..n {
                        a[j * n + i] *= f;
                    }
                }
            }
        }
        if done {
            return scale;
        }
    }
}

/// Householder reduction to upper Hessenberg form; accumulates the orthogonal
/// similarity into `v` when present.
///
/// Following the Algol `orthes`/`ortran` pair, the essential parts of the
/// reflectors are left below the subdiagonal of `h` (the QR iteration never
/// reads there) and the head components survive in `ort`, so the
/// accumulation pass can rebuild each reflector without extra storage.
fn hessenberg(h: &mut [f64], n: usize, v: Option<&mut [f64]>) {
    if n < 3 {
        return;
    }
    let high = n - 1;
    let mut ort = vec![0.0f64; n];
    let mut f_buf = vec![0.0f64; n];

    for m in 1..high {
        let mut scale = 0.0;
        for i in m..=high {
            scale += h[i * n + (m - 1)].abs();
        }
        if scale == 0.0 {
            continue;
        }
        let mut hh = 0.0;
        for i in (m..=high).rev() {
            ort[i] = h[i * n + (m - 1)] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;

        // H <- (I - u u^T / hh) H: accumulate f_j = sum_i u_i H[i,j] row-wise.
        for x in f_buf[m..n].iter_mut() {
            *x = 0.0;
        }
        for i in m..=high {
            let oi = ort[i];
            let row = &h[i * n + m..i * n + n];
            for (f, &x) in f_buf[m..n].iter_mut().zip(row) {
                *f += oi * x;
            }
        }
        for f in f_buf[m..n].iter_mut() {
            *f /= hh;
        }
        for i in m..=high {
            let oi = ort[i];
            let row = &mut h[i * n + m..i * n + n];
            for (x, &f) in row.iter_mut().zip(&f_buf[m..n]) {
                *x -= f * oi;
            }
        }

        // H <- H (I - u u^T / hh); rows are contiguous.
        for i in 0..=high {
            let row = &mut h[i * n + m..i * n + high + 1];
            let mut f = 0.0;
            for (&x, &o) in row.iter().zip(&ort[m..=high]) {
                f += o * x;
            }
            f /= hh;
            for (x, &o) in row.iter_mut().zip(&ort[m..=high]) {
                *x -= f * o;
            }
        }

        ort[m] *= scale;
        h[m * n + (m - 1)] = scale * g;
    }

    if let Some(v) = v {
        let mut u = vec![0.0f64; n];
        for m in (1..high).rev() {
            let hm = h[m * n + (m - 1)];
            if hm == 0.0 {
                continue;
            }
            u[m] = ort[m];
            for i in m + 1..=high {
                u[i] = h[i * n + (m - 1)];
            }
            for x in f_buf[m..=high].iter_mut() {
                *x = 0.0;
            }
            for i in m..=high {
                let ui = u[i];
                if ui != 0.0 {
                    let row = &v[i * n + m..i * n + high + 1];
                    for (f, &x) in f_buf[m..=high].iter_mut().zip(row) {
                        *f += ui * x;
                    }
                }
            }
            let denom = u[m] * hm;
            for f in f_buf[m..=high].iter_mut() {
                *f /= denom;
            }
            for i in m..=high {
                let ui = u[i];
                let row = &mut v[i * n + m..i * n + high + 1];
                for (x, &f) in row.iter_mut().zip(&f_buf[m..=high]) {
                    *x += f * ui;
                }
            }
        }
    }
}

/// Complex division via Smith's algorithm: (xr + i xi) / (yr + i yi).
fn cdiv(xr: f64, xi: f64, yr: f64, yi: f64) -> (f64, f64) {
    if yr.abs() > yi.abs() {
        let r = yi / yr;
        let d = yr + r * yi;
        ((xr + r * xi) / d, (xi - r * xr) / d)
    } else {
        let r = yr / yi;
        let d = yi + r * yr;
        ((r * xr + xi) / d, (r * xi - xr) / d)
    }
}

/// Implicitly shifted QR with Francis double shifts on an upper Hessenberg
/// matrix (EISPACK `hqr`/`hqr2`). Writes eigenvalues into (`d`, `e`); when
/// `v` is given, also accumulates transformations and back-substitutes the
/// quasi-triangular form so `v` holds packed right eigenvectors on return.
///
/// Without vectors, updates are restricted to the active block, which is the
/// eigenvalues-only economy of EISPACK `hqr`.
fn francis_qr(
    h: &mut [f64],
    nn: usize,
    d: &mut [f64],
    e: &mut [f64],
    mut v: Option<&mut [f64]>,
    budget: usize,
) -> Result<(), NonConvergence> {
    let low = 0usize;
    let high = nn - 1;
    let eps = f64::EPSILON;
    let want_vectors = v.is_some();
    let mut exshift = 0.0;
    #[allow(unused_assignments)]
    let (mut p, mut q, mut r, mut s, mut z, mut w, mut x, mut y) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);

    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[i * nn + j].abs();
        }
    }

    let mut nb = nn; // one past the active high index
    let mut iter = 0usize;
    let mut total_sweeps = 0usize;
    while nb > 0 {
        let hi = nb - 1;

        // Look for a single small subdiagonal element.
        let mut l = hi;
        while l > low {
            s = h[(l - 1) * nn + (l - 1)].abs() + h[l * nn + l].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[l * nn + (l - 1)].abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == hi {
            // One root found.
            h[hi * nn + hi] += exshift;
            d[hi] = h[hi * nn + hi];
            e[hi] = 0.0;
            nb -= 1;
            iter = 0;
        } else if l + 1 == hi {
            // Two roots found.
            w = h[hi * nn + hi - 1] * h[(hi - 1) * nn + hi];
            p = (h[(hi - 1) * nn + (hi - 1)] - h[hi * nn + hi]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            h[hi * nn + hi] += exshift;
            h[(hi - 1) * nn + (hi - 1)] += exshift;
            x = h[hi * nn + hi];

            if q >= 0.0 {
                // Real pair.
                z = if p >= 0.0 { p + z } else { p - z };
                d[hi - 1] = x + z;
                d[hi] = if z != 0.0 { x - w / z } else { d[hi - 1] };
                e[hi - 1] = 0.0;
                e[hi] = 0.0;
                if want_vectors {
                    // Rotate to split the block so the quasi-triangular form
                    // is valid for back-substitution.
                    x = h[hi * nn + hi - 1];
                    s = x.abs() + z.abs();
                    p = x / s;
                    q = z / s;
                    r = (p * p + q * q).sqrt();
                    p /= r;
                    q /= r;
                    for j in (hi - 1)..nn {
                        z = h[(hi - 1) * nn + j];
                        h[(hi - 1) * nn + j] = q * z + p * h[hi * nn + j];
                        h[hi * nn + j] = q * h[hi * nn + j] - p * z;
                    }
                    for i in 0..=hi {
                        z = h[i * nn + hi - 1];
                        h[i * nn + hi - 1] = q * z + p * h[i * nn + hi];
                        h[i * nn + hi] = q * h[i * nn + hi] - p * z;
                    }
                    let vm = v.as_deref_mut().unwrap();
                    for i in low..=high {
                        z = vm[i * nn + hi - 1];
                        vm[i * nn + hi - 1] = q * z + p * vm[i * nn + hi];
                        vm[i * nn + hi] = q * vm[i * nn + hi] - p * z;
                    }
                }
            } else {
                // Complex pair.
                d[hi - 1] = x + p;
                d[hi] = x + p;
                e[hi - 1] = z;
                e[hi] = -z;
            }
            nb -= 2;
            iter = 0;
        } else {
            // No convergence yet: form shift.
            x = h[hi * nn + hi];
            y = h[(hi - 1) * nn + (hi - 1)];
            w = h[hi * nn + hi - 1] * h[(hi - 1) * nn + hi];

            // Wilkinson's original ad hoc shift.
            if iter == 10 {
                exshift += x;
                for i in low..=hi {
                    h[i * nn + i] -= x;
                }
                s = h[hi * nn + hi - 1].abs() + h[(hi - 1) * nn + hi - 2].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }

            // MATLAB's ad hoc shift.
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in low..=hi {
                        h[i * nn + i] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = 0.964;
                    w = 0.964;
                }
            }

            iter += 1;
            total_sweeps += 1;
            if total_sweeps > budget {
                return Err(NonConvergence {
                    sweeps: total_sweeps,
                });
            }

            // Look for two consecutive small subdiagonal elements.
            let mut m = hi - 2;
            loop {
                z = h[m * nn + m];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[(m + 1) * nn + m] + h[m * nn + m + 1];
                q = h[(m + 1) * nn + (m + 1)] - z - r - s;
                r = h[(m + 2) * nn + (m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[m * nn + m - 1].abs() * (q.abs() + r.abs())
                    < eps
                        * (p.abs()
                            * (h[(m - 1) * nn + (m - 1)].abs()
                                + z.abs()
                                + h[(m + 1) * nn + (m + 1)].abs()))
                {
                    break;
                }
                m -= 1;
            }

            for i in m + 2..=hi {
                h[i * nn + i - 2] = 0.0;
                if i > m + 2 {
                    h[i * nn + i - 3] = 0.0;
                }
            }

            // Double QR sweep on rows l..=hi and columns m..=hi.
            let jhi = if want_vectors { nn - 1 } else { hi };
            let ilo = if want_vectors { 0 } else { l };
            for k in m..hi {
                let notlast = k != hi - 1;
                if k != m {
                    p = h[k * nn + k - 1];
                    q = h[(k + 1) * nn + k - 1];
                    r = if notlast { h[(k + 2) * nn + k - 1] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s == 0.0 {
                    continue;
                }
                if k != m {
                    h[k * nn + k - 1] = -s * x;
                } else if l != m {
                    h[k * nn + k - 1] = -h[k * nn + k - 1];
                }
                p += s;
                x = p / s;
                y = q / s;
                z = r / s;
                q /= p;
                r /= p;

                // Row modification on rows k, k+1 (and k+2), columns k..=jhi.
                {
                    let base = k * nn;
                    let span = jhi - k + 1;
                    if notlast {
                        let (rk, rest) = h[base + k..].split_at_mut(nn);
                        let (rk1, rest2) = rest.split_at_mut(nn);
                        let rk2 = &mut rest2[..span];
                        let rk = &mut rk[..span];
                        let rk1 = &mut rk1[..span];
                        for j in 0..span {
                            let mut pj = rk[j] + q * rk1[j];
                            pj += r * rk2[j];
                            rk2[j] -= pj * z;
                            rk[j] -= pj * x;
                            rk1[j] -= pj * y;
                        }
                    } else {
                        let (rk, rest) = h[base + k..].split_at_mut(nn);
                        let rk1 = &mut rest[..span];
                        let rk = &mut rk[..span];
                        for j in 0..span {
                            let pj = rk[j] + q * rk1[j];
                            rk[j] -= pj * x;
                            rk1[j] -= pj * y;
                        }
                    }
                }

                // Column modification on columns k..k+2, rows ilo..=min(hi, k+3).
                let imax = hi.min(k + 3);
                for i in ilo..=imax {
                    let base = i * nn + k;
                    let mut pi = x * h[base] + y * h[base + 1];
                    if notlast {
                        pi += z * h[base + 2];
                        h[base + 2] -= pi * r;
                    }
                    h[base] -= pi;
                    h[base + 1] -= pi * q;
                }

                // Accumulate transformations.
                if let Some(vm) = v.as_deref_mut() {
                    for i in low..=high {
                        let base = i * nn + k;
                        let mut pi = x * vm[base] + y * vm[base + 1];
                        if notlast {
                            pi += z * vm[base + 2];
                            vm[base + 2] -= pi * r;
                        }
                        vm[base] -= pi;
                        vm[base + 1] -= pi * q;
                    }
                }
            }
        }
    }

    if let Some(vm) = v {
        if norm != 0.0 {
            backsubstitute(h, nn, d, e, vm, norm);
        }
    }
    Ok(())
}

/// Back-substitution of the quasi-triangular form: computes eigenvectors of
/// the triangular factor into the upper part of `h`, then multiplies into the
/// accumulated transformations `v`.
fn backsubstitute(h: &mut [f64], nn: usize, d: &[f64], e: &[f64], v: &mut [f64], norm: f64) {
    let eps = f64::EPSILON;
    let low = 0usize;
    let high = nn - 1;
    #[allow(unused_assignments)]
    let (mut r, mut s, mut z) = (0.0f64, 0.0f64, 0.0f64);

    for nidx in (0..nn).rev() {
        let p = d[nidx];
        let mut q = e[nidx];

        if q == 0.0 {
            // Real eigenvector.
            let mut l = nidx;
            h[nidx * nn + nidx] = 1.0;
            for i in (0..nidx).rev() {
                let w = h[i * nn + i] - p;
                r = 0.0;
                for j in l..=nidx {
                    r += h[i * nn + j] * h[j * nn + nidx];
                }
                if e[i] < 0.0 {
                    z = w;
                    s = r;
                } else {
                    l = i;
                    if e[i] == 0.0 {
                        h[i * nn + nidx] = if w != 0.0 { -r / w } else { -r / (eps * norm) };
                    } else {
                        // Solve the real 2x2 block.
                        let x = h[i * nn + i + 1];
                        let y = h[(i + 1) * nn + i];
                        q = (d[i] - p) * (d[i] - p) + e[i] * e[i];
                        let t = (x * s - z * r) / q;
                        h[i * nn + nidx] = t;
                        h[(i + 1) * nn + nidx] = if x.abs() > z.abs() {
                            (-r - w * t) / x
                        } else {
                            (-s - y * t) / z
                        };
                    }
                    // Overflow control.
                    let t = h[i * nn + nidx].abs();
                    if (eps * t) * t > 1.0 {
                        for j in i..=nidx {
                            h[j * nn + nidx] /= t;
                        }
                    }
                }
            }
        } else if q < 0.0 {
            // Complex eigenvector pair; columns nidx-1 (real) and nidx (imag).
            let mut l = nidx - 1;

            if h[nidx * nn + nidx - 1].abs() > h[(nidx - 1) * nn + nidx].abs() {
                h[(nidx - 1) * nn + (nidx - 1)] = q / h[nidx * nn + nidx - 1];
                h[(nidx - 1) * nn + nidx] =
                    -(h[nidx * nn + nidx] - p) / h[nidx * nn + nidx - 1];
            } else {
                let (cr, ci) = cdiv(
                    0.0,
                    -h[(nidx - 1) * nn + nidx],
                    h[(nidx - 1) * nn + (nidx - 1)] - p,
                    q,
                );
                h[(nidx - 1) * nn + (nidx - 1)] = cr;
                h[(nidx - 1) * nn + nidx] = ci;
            }
            h[nidx * nn + nidx - 1] = 0.0;
            h[nidx * nn + nidx] = 1.0;
            for i in (0..nidx.saturating_sub(1)).rev() {
                let mut ra = 0.0;
                let mut sa = 0.0;
                for j in l..=nidx {
                    ra += h[i * nn + j] * h[j * nn + nidx - 1];
                    sa += h[i * nn + j] * h[j * nn + nidx];
                }
                let w = h[i * nn + i] - p;

                if e[i] < 0.0 {
                    z = w;
                    r = ra;
                    s = sa;
                } else {
                    l = i;
                    if e[i] == 0.0 {
                        let (cr, ci) = cdiv(-ra, -sa, w, q);
                        h[i * nn + nidx - 1] = cr;
                        h[i * nn + nidx] = ci;
                    } else {
                        // Solve the complex 2x2 block.
                        let x = h[i * nn + i + 1];
                        let y = h[(i + 1) * nn + i];
                        let mut vr = (d[i] - p) * (d[i] - p) + e[i] * e[i] - q * q;
                        let vi = (d[i] - p) * 2.0 * q;
                        if vr == 0.0 && vi == 0.0 {
                            vr = eps
                                * norm
                                * (w.abs() + q.abs() + x.abs() + y.abs() + z.abs());
                        }
                        let (cr, ci) =
                            cdiv(x * r - z * ra + q * sa, x * s - z * sa - q * ra, vr, vi);
                        h[i * nn + nidx - 1] = cr;
                        h[i * nn + nidx] = ci;
                        if x.abs() > z.abs() + q.abs() {
                            h[(i + 1) * nn + nidx - 1] =
                                (-ra - w * h[i * nn + nidx - 1] + q * h[i * nn + nidx]) / x;
                            h[(i + 1) * nn + nidx] =
                                (-sa - w * h[i * nn + nidx] - q * h[i * nn + nidx - 1]) / x;
                        } else {
                            let (cr, ci) = cdiv(
                                -r - y * h[i * nn + nidx - 1],
                                -s - y * h[i * nn + nidx],
                                z,
                                q,
                            );
                            h[(i + 1) * nn + nidx - 1] = cr;
                            h[(i + 1) * nn + nidx] = ci;
                        }
                    }
                    // Overflow control.
                    let t = h[i * nn + nidx - 1].abs().max(h[i * nn + nidx].abs());
                    if (eps * t) * t > 1.0 {
                        for j in i..=nidx {
                            h[j * nn + nidx - 1] /= t;
                            h[j * nn + nidx] /= t;
                        }
                    }
                }
            }
        }
    }

    // Multiply the triangular eigenvector matrix into the accumulated
    // orthogonal transformations: V <- V * H_upper.
    for j in (low..nn).rev() {
        let kmax = j.min(high);
        for i in low..=high {
            let mut acc = 0.0;
            for k in low..=kmax {
                acc += v[i * nn + k] * h[k * nn + j];
            }
            v[i * nn + j] = acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn residual(a: &DMatrix<f64>, eig: &RealEigen, k: usize) -> f64 {
        let n = a.nrows();
        let lambda = Complex64::new(eig.re[k], eig.im[k]);
        let v = eig.vector(k);
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for i in 0..n {
            let mut av = Complex64::new(0.0, 0.0);
            for j in 0..n {
                av += a[(i, j)] * v[j];
            }
            num += (av - lambda * v[i]).norm_sqr();
            den += v[i].norm_sqr();
        }
        (num / den).sqrt()
    }

    #[test]
    fn eigenvalues_of_rotation_block() {
        // [[cos, -sin], [sin, cos]] has eigenvalues cos +- i sin.
        let (c, s) = (0.6, 0.8);
        let a = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let eig = real_eigen(&a, false, 0).unwrap();
        let mut vals = eig.values();
        vals.sort_by(|x, y| y.im.partial_cmp(&x.im).unwrap());
        assert!((vals[0] - Complex64::new(c, s)).norm() < 1e-14);
        assert!((vals[1] - Complex64::new(c, -s)).norm() < 1e-14);
    }

    #[test]
    fn known_companion_matrix() {
        // Companion matrix of x^3 - 6x^2 + 11x - 6 = (x-1)(x-2)(x-3).
        let a = DMatrix::from_row_slice(
            3,
            3,
            &[6.0, -11.0, 6.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        );
        let eig = real_eigen(&a, false, 0).unwrap();
        let mut vals: Vec<f64> = eig.values().iter().map(|z| z.re).collect();
        vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (v, want) in vals.iter().zip([1.0, 2.0, 3.0]) {
            assert!((v - want).abs() < 1e-10, "{v} vs {want}");
        }
        assert!(eig.im.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn random_matrix_eigenpairs_have_small_residual() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let n = 40;
        let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let eig = real_eigen(&a, true, 0).unwrap();
        // Conjugate symmetry of the spectrum.
        let mut ims: Vec<f64> = eig.im.iter().copied().filter(|x| *x != 0.0).collect();
        ims.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for i in 0..ims.len() / 2 {
            assert!((ims[i] + ims[ims.len() - 1 - i]).abs() < 1e-9);
        }
        for k in 0..n {
            assert!(residual(&a, &eig, k) < 1e-8, "eigenpair {k}");
        }
        // Trace equals the eigenvalue sum.
        let tr: f64 = (0..n).map(|i| a[(i, i)]).sum();
        let sum: f64 = eig.re.iter().sum();
        assert!((tr - sum).abs() < 1e-9 * tr.abs().max(1.0));
    }

    #[test]
    fn badly_scaled_matrix_needs_balancing() {
        // Wildly scaled similarity of a small matrix; balancing keeps the
        // computed spectrum accurate.
        let base = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.5, 0.25, 3.0, 1.0, 0.75, 0.5, 2.0]);
        let dscale = [1e-8, 1.0, 1e8];
        let mut a = base.clone();
        for i in 0..3 {
            for j in 0..3 {
                a[(i, j)] = base[(i, j)] * dscale[i] / dscale[j];
            }
        }
        let mut want: Vec<Complex64> = real_eigen(&base, false, 0).unwrap().values();
        let mut got: Vec<Complex64> = real_eigen(&a, false, 0).unwrap().values();
        want.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
        got.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
        for (wv, gv) in want.iter().zip(&got) {
            assert!((wv - gv).norm() < 1e-9 * wv.norm().max(1.0));
        }
    }

    #[test]
    fn vectors_for_symmetric_matrix_are_orthogonal_directions() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0]);
        let eig = real_eigen(&a, true, 0).unwrap();
        for k in 0..3 {
            assert!(residual(&a, &eig, k) < 1e-12);
        }
    }
}

