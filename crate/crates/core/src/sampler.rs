//! Monte Carlo harness: bidiagonal-model draws of the Laguerre β ensemble,
//! smallest (surviving) eigenvalues, histograms and empirical gaps.
//!
//! Draws are split into fixed-size chunks; chunk c uses stream c of a ChaCha8
//! generator seeded once, so results do not depend on the thread count.

use crate::error::{Error, Result};
use crate::kernels::EnsembleParams;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;

/// Samples per RNG stream.
pub const CHUNK: usize = 4096;
/// Relative bisection tolerance on singular values (≈ 2.3e−13).
const BISECT_REL: f64 = 1.0 / (1u64 << 42) as f64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleConfig {
    pub params: EnsembleParams<f64>,
    pub n_samples: usize,
    pub seed: u64,
    pub bins: usize,
    pub s_max: f64,
}

impl SampleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 1000 {
            return Err(Error::InvalidParams(format!("need at least 1000 samples, got {}", self.n_samples)));
        }
        if self.bins < 10 {
            return Err(Error::InvalidParams(format!("need at least 10 bins, got {}", self.bins)));
        }
        if !(self.s_max > 0.0) || !self.s_max.is_finite() {
            return Err(Error::InvalidParams(format!("s_max must be positive, got {}", self.s_max)));
        }
        EnsembleParams::new(self.params.n, self.params.beta, self.params.a, self.params.xi).map(|_| ())
    }

    /// 4(N + a/β), which is 4N + 2a at β = 2.
    pub fn scale(&self) -> f64 {
        self.params.optimal_scale()
    }
}

/// Zero pivots become a tiny negative, consistently for counting and for the
/// next division.
fn nonzero(q: f64) -> f64 {
    if q == 0.0 {
        -1e-300
    } else {
        q
    }
}

/// Symmetric tridiagonal matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::InvalidParams(format!(
                "tridiagonal needs n >= 1 diagonal and n - 1 off-diagonal entries, got {} and {}",
                diag.len(),
                off.len()
            )));
        }
        Ok(Self { diag, off })
    }

    /// Number of eigenvalues below x (Sturm count).
    pub fn count_below(&self, x: f64) -> usize {
        let mut q = nonzero(self.diag[0] - x);
        let mut neg = (q < 0.0) as usize;
        for i in 1..self.diag.len() {
            q = nonzero(self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / q);
            neg += (q < 0.0) as usize;
        }
        neg
    }

    /// k-th smallest eigenvalue (k = 1 is the smallest) by bisection.
    pub fn kth_eigenvalue(&self, k: usize) -> f64 {
        assert!(k >= 1 && k <= self.diag.len());
        let n = self.diag.len();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        if lo == hi {
            return lo;
        }
        while hi - lo > 1e-14 * lo.abs().max(hi.abs()) {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if self.count_below(mid) >= k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn smallest_eigenvalue(&self) -> f64 {
        self.kth_eigenvalue(1)
    }
}

/// Smallest eigenvalue of a symmetric tridiagonal matrix.
pub fn smallest_eigenvalue(t: &SymTridiagonal) -> f64 {
    t.smallest_eigenvalue()
}

/// Bidiagonal draw stored as squared entries d₁², e₁², d₂², …, d_N².
///
/// Diagonal entries are χ with 2a + 2 + β(N − i) degrees of freedom,
/// subdiagonal entries χ with β(N − i), i = 1…N. The eigenvalues of BBᵀ/β
/// then have joint density ∝ ∏ x^a e^{−βx/2} |Δ(x)|^β.
#[derive(Clone, Debug)]
pub struct Bidiagonal {
    pub squares: Vec<f64>,
    beta: f64,
}

/// Gamma(k/2, 2) draws per bidiagonal slot.
#[derive(Clone, Debug)]
struct ChiSquares {
    dists: Vec<Gamma<f64>>,
    beta: f64,
}

impl ChiSquares {
    fn new(p: &EnsembleParams<f64>) -> Result<Self> {
        let (n, beta, a) = (p.n, p.beta, p.a);
        let mut dists = Vec::with_capacity(2 * n - 1);
        for i in 1..=n {
            let rest = beta * (n - i) as f64;
            let g = |dof: f64| Gamma::new(dof / 2.0, 2.0).map_err(|e| Error::InvalidParams(e.to_string()));
            dists.push(g(2.0 * a + 2.0 + rest)?);
            if i < n {
                dists.push(g(rest)?);
            }
        }
        Ok(Self { dists, beta })
    }

    fn draw_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.dists.iter().map(|d| d.sample(rng)));
    }
}

/// Number of singular values below σ, from the zero-diagonal Golub–Kahan
/// form with off-diagonals √squares.
fn gk_count_below(squares: &[f64], sigma: f64) -> usize {
    let mut q = -sigma;
    let mut neg = 1usize;
    for &b2 in squares {
        q = nonzero(-sigma - b2 / q);
        neg += (q < 0.0) as usize;
    }
    // 2N eigenvalues ±σ_i; N of them are negative
    neg - squares.len().div_ceil(2)
}

/// k-th smallest singular value of the bidiagonal with the given squared entries.
fn kth_singular_value(squares: &[f64], k: usize) -> f64 {
    let mut hi = 0.0f64;
    let mut prev = 0.0f64;
    for &b2 in squares {
        let b = b2.sqrt();
        hi = hi.max(prev + b);
        prev = b;
    }
    hi = hi.max(prev) * (1.0 + 1e-12) + f64::MIN_POSITIVE;
    let mut lo = 0.0f64;
    while hi - lo > BISECT_REL * hi {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if gk_count_below(squares, mid) >= k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Smallest eigenvalue μ of BBᵀ from the squared bidiagonal entries.
///
/// Pivots of BBᵀ − μ = LDLᵀ in differential stationary form,
/// p_i = d_i² + t_i with t_1 = −μ, t_i = −μ + e_{i−1}² t_{i−1}/p_{i−1};
/// all t_i ≤ 0 below μ_min, so there is no cancellation. Newton from μ = 0
/// increases monotonically to μ_min; bisection takes over if rounding ever
/// overshoots.
fn smallest_squared_singular_value(squares: &[f64]) -> f64 {
    let n = squares.len().div_ceil(2);
    let (mut mu, mut prev_step) = (0.0f64, f64::INFINITY);
    for _ in 0..60 {
        let (mut t, mut dt) = (-mu, -1.0f64);
        let mut p = squares[0] + t;
        let mut sum = dt / p;
        let mut ok = p > 0.0;
        for i in 1..n {
            if !ok {
                break;
            }
            let (d2, e2) = (squares[2 * i - 2], squares[2 * i - 1]);
            let pp = p;
            dt = -1.0 + e2 * d2 * dt / (pp * pp);
            t = -mu + e2 * t / pp;
            p = squares[2 * i] + t;
            ok = p > 0.0;
            sum += dt / p;
        }
        if !ok || !sum.is_finite() {
            // rounding put μ past μ_min after a converged step
            if prev_step <= 1e-7 * mu {
                return mu;
            }
            break;
        }
        let step = -1.0 / sum;
        mu += step;
        // quadratic regime: the remaining error is about step²/μ
        if step <= 1e-15 * mu || (step <= 1e-8 * mu && step <= 1e-3 * prev_step) {
            return mu;
        }
        prev_step = step;
    }
    kth_singular_value(squares, 1).powi(2)
}

impl Bidiagonal {
    pub fn draw<R: Rng + ?Sized>(p: &EnsembleParams<f64>, rng: &mut R) -> Result<Self> {
        let chi = ChiSquares::new(p)?;
        let mut squares = Vec::new();
        chi.draw_into(rng, &mut squares);
        Ok(Self { squares, beta: p.beta })
    }

    /// From squared entries d₁², e₁², …, d_N² (odd length, non-negative).
    pub fn from_squares(squares: Vec<f64>, beta: f64) -> Result<Self> {
        if squares.len().is_multiple_of(2) || squares.iter().any(|v| !(*v >= 0.0)) || !(beta > 0.0) {
            return Err(Error::InvalidParams("bidiagonal needs 2N - 1 non-negative squares and beta > 0".into()));
        }
        Ok(Self { squares, beta })
    }

    pub fn n(&self) -> usize {
        self.squares.len().div_ceil(2)
    }

    /// k-th smallest eigenvalue of BBᵀ/β.
    pub fn kth_eigenvalue(&self, k: usize) -> f64 {
        if k == 1 {
            return smallest_squared_singular_value(&self.squares) / self.beta;
        }
        kth_singular_value(&self.squares, k).powi(2) / self.beta
    }

    /// BBᵀ/β as a symmetric tridiagonal matrix.
    pub fn tridiagonal(&self) -> SymTridiagonal {
        let n = self.n();
        let s = &self.squares;
        let diag = (0..n).map(|i| (s[2 * i] + if i > 0 { s[2 * i - 1] } else { 0.0 }) / self.beta).collect();
        let off = (0..n - 1).map(|i| (s[2 * i] * s[2 * i + 1]).sqrt() / self.beta).collect();
        SymTridiagonal { diag, off }
    }

    /// Sum of eigenvalues.
    pub fn trace(&self) -> f64 {
        self.squares.iter().sum::<f64>() / self.beta
    }
}

/// All N eigenvalues of one draw, ascending.
pub fn sample_bidiagonal<R: Rng + ?Sized>(p: &EnsembleParams<f64>, rng: &mut R) -> Result<Vec<f64>> {
    let b = Bidiagonal::draw(p, rng)?;
    Ok((1..=p.n).map(|k| b.kth_eigenvalue(k)).collect())
}

/// Generator for stream `chunk` under `seed`.
pub fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Scaled smallest surviving eigenvalues 4(N + a/β)·λ_min for one chunk;
/// +∞ when thinning deletes every eigenvalue.
fn chunk_minima(cfg: &SampleConfig, chi: &ChiSquares, chunk: usize) -> Vec<f64> {
    let mut rng = chunk_rng(cfg.seed, chunk);
    let count = CHUNK.min(cfg.n_samples - chunk * CHUNK);
    let (n, xi, scale) = (cfg.params.n, cfg.params.xi, cfg.scale() / chi.beta);
    let mut squares = Vec::with_capacity(2 * n);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        chi.draw_into(&mut rng, &mut squares);
        // the survivors' minimum is the k-th smallest, k the first kept index
        let k = if xi >= 1.0 { 1 } else { (1..=n).find(|_| rng.gen::<f64>() < xi).unwrap_or(n + 1) };
        out.push(match k {
            1 => smallest_squared_singular_value(&squares) * scale,
            k if k <= n => kth_singular_value(&squares, k).powi(2) * scale,
            _ => f64::INFINITY,
        });
    }
    out
}

fn n_chunks(cfg: &SampleConfig) -> usize {
    cfg.n_samples.div_ceil(CHUNK)
}

/// Scaled minima in deterministic order.
pub fn sample_scaled_minima(cfg: &SampleConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let chi = ChiSquares::new(&cfg.params)?;
    let parts: Vec<Vec<f64>> = (0..n_chunks(cfg)).into_par_iter().map(|c| chunk_minima(cfg, &chi, c)).collect();
    Ok(parts.concat())
}

/// Per-chunk integer tallies, merged by elementwise sums.
fn tally(cfg: &SampleConfig, width: usize, bin_of: impl Fn(f64, &mut [u64]) + Sync) -> Result<Vec<u64>> {
    cfg.validate()?;
    let chi = ChiSquares::new(&cfg.params)?;
    Ok((0..n_chunks(cfg))
        .into_par_iter()
        .map(|c| {
            let mut t = vec![0u64; width];
            for v in chunk_minima(cfg, &chi, c) {
                bin_of(v, &mut t);
            }
            t
        })
        .reduce(
            || vec![0u64; width],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        ))
}

#[derive(Clone, Debug, PartialEq)]
pub struct HistogramResult {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub normalized_density: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Fraction of samples at or beyond s_max (including fully thinned draws).
    pub mass_beyond: f64,
    pub n_samples: usize,
}

impl HistogramResult {
    pub fn bin_width(&self) -> f64 {
        self.bin_edges[1] - self.bin_edges[0]
    }
}

/// Histogram of the scaled smallest surviving eigenvalue on (0, s_max).
pub fn histogram(cfg: &SampleConfig) -> Result<HistogramResult> {
    let bins = cfg.bins;
    let w = cfg.s_max / bins as f64;
    let t = tally(cfg, bins + 1, |v, t| {
        let i = if v >= cfg.s_max { bins } else { ((v / w) as usize).min(bins - 1) };
        t[i] += 1;
    })?;
    let n = cfg.n_samples as f64;
    let counts = t[..bins].to_vec();
    let normalized_density = counts.iter().map(|&c| c as f64 / (n * w)).collect();
    let std_errors = counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            (p * (1.0 - p) / n).sqrt() / w
        })
        .collect();
    Ok(HistogramResult {
        bin_edges: (0..=bins).map(|i| i as f64 * w).collect(),
        counts,
        normalized_density,
        std_errors,
        mass_beyond: t[bins] as f64 / n,
        n_samples: cfg.n_samples,
    })
}

/// Limit gap E_∞ and its 1/N² coefficient c2 at every bin edge.
#[derive(Clone, Debug, PartialEq)]
pub struct TheoryCurve {
    pub e_hard: Vec<f64>,
    pub c2: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Figure1Result {
    pub histogram: HistogramResult,
    /// N²(p̂ − p_∞) per bin, with p_∞ the bin average of the limit density.
    pub scaled_difference: Vec<f64>,
    /// N² times its Monte Carlo standard error under the theory's bin mass.
    pub scaled_std_error: Vec<f64>,
    /// Predicted N²(p_N − p_∞): bin average of −dc2/ds.
    pub predicted: Vec<f64>,
    pub z_scores: Vec<f64>,
    pub warnings: Vec<String>,
}

impl Figure1Result {
    /// Fraction of bins with |z| < 3.
    pub fn fraction_within(&self, z: f64) -> f64 {
        self.z_scores.iter().filter(|v| v.abs() < z).count() as f64 / self.z_scores.len() as f64
    }
}

/// N²(p_N^# − p_∞) from samples, compared bin by bin with the predicted
/// correction. Bin averages use differences of E at the edges, so no density
/// is evaluated pointwise.
pub fn figure1_statistic(cfg: &SampleConfig, theory: &TheoryCurve) -> Result<Figure1Result> {
    if theory.e_hard.len() != cfg.bins + 1 || theory.c2.len() != cfg.bins + 1 {
        return Err(Error::InvalidParams(format!(
            "theory curve needs {} edge values, got {} and {}",
            cfg.bins + 1,
            theory.e_hard.len(),
            theory.c2.len()
        )));
    }
    let h = histogram(cfg)?;
    let (w, n) = (h.bin_width(), cfg.n_samples as f64);
    let nn = (cfg.params.n as f64).powi(2);
    let mut scaled_difference = Vec::with_capacity(cfg.bins);
    let mut scaled_std_error = Vec::with_capacity(cfg.bins);
    let mut predicted = Vec::with_capacity(cfg.bins);
    let mut z_scores = Vec::with_capacity(cfg.bins);
    let mut rel_se = Vec::new();
    for i in 0..cfg.bins {
        let p_inf = (theory.e_hard[i] - theory.e_hard[i + 1]) / w;
        let corr = (theory.c2[i] - theory.c2[i + 1]) / w;
        let diff = nn * (h.normalized_density[i] - p_inf);
        let mass = ((p_inf + corr / nn) * w).clamp(0.0, 1.0);
        let se = nn * (mass * (1.0 - mass) / n).sqrt() / w;
        let dev = diff - corr;
        z_scores.push(if se > 0.0 {
            dev / se
        } else if dev == 0.0 {
            0.0
        } else {
            dev.signum() * f64::INFINITY
        });
        if h.counts[i] > 0 && corr != 0.0 {
            rel_se.push(se / corr.abs());
        }
        scaled_difference.push(diff);
        scaled_std_error.push(se);
        predicted.push(corr);
    }
    let mut warnings = Vec::new();
    if !rel_se.is_empty() {
        rel_se.sort_by(f64::total_cmp);
        let median = rel_se[rel_se.len() / 2];
        if median > 0.5 {
            warnings.push(format!(
                "insufficient samples: median per-bin relative standard error of the difference is {:.0}%",
                100.0 * median
            ));
        }
    }
    Ok(Figure1Result { histogram: h, scaled_difference, scaled_std_error, predicted, z_scores, warnings })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapEstimate {
    pub s: Vec<f64>,
    pub survival: Vec<f64>,
    /// Binomial standard error √(p(1 − p)/n).
    pub std_error: Vec<f64>,
}

impl GapEstimate {
    /// Normal-approximation interval survival ± z·SE, clipped to [0, 1].
    pub fn interval(&self, i: usize, z: f64) -> (f64, f64) {
        let (p, e) = (self.survival[i], self.std_error[i]);
        ((p - z * e).max(0.0), (p + z * e).min(1.0))
    }
}

/// Empirical P(scaled λ_min > s) on an ascending grid.
pub fn empirical_gap(cfg: &SampleConfig, s_grid: &[f64]) -> Result<GapEstimate> {
    if s_grid.windows(2).any(|w| !(w[1] > w[0])) || s_grid.iter().any(|s| !(*s >= 0.0)) {
        return Err(Error::InvalidParams("s grid must be non-negative and strictly increasing".into()));
    }
    let m = s_grid.len();
    let t = tally(cfg, m, |v, t| {
        let above = s_grid.partition_point(|&s| s < v);
        t[..above].iter_mut().for_each(|c| *c += 1);
    })?;
    let n = cfg.n_samples as f64;
    let survival: Vec<f64> = t.iter().map(|&c| c as f64 / n).collect();
    let std_error = survival.iter().map(|&p| (p * (1.0 - p) / n).sqrt()).collect();
    Ok(GapEstimate { s: s_grid.to_vec(), survival, std_error })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_count_is_monotone_and_complete() {
        let squares = [4.0, 1.0, 9.0, 0.25, 2.0];
        let big = 100.0;
        assert_eq!(gk_count_below(&squares, 1e-300), 0);
        assert_eq!(gk_count_below(&squares, big), 3);
        let mut prev = 0;
        for i in 1..200 {
            let c = gk_count_below(&squares, i as f64 * 0.05);
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn newton_agrees_with_bisection() {
        let squares = [4.0, 1.0, 9.0, 0.25, 2.0, 3.0, 0.01];
        let b = kth_singular_value(&squares, 1).powi(2);
        assert!((smallest_squared_singular_value(&squares) - b).abs() < 1e-12 * b);
        let clustered = [1.0, 1e-8, 1.0, 1e-8, 1.0];
        let b = kth_singular_value(&clustered, 1).powi(2);
        assert!((smallest_squared_singular_value(&clustered) - b).abs() < 1e-12 * b);
    }

    #[test]
    fn one_by_one() {
        let t = SymTridiagonal::new(vec![3.5], vec![]).unwrap();
        assert_eq!(t.smallest_eigenvalue(), 3.5);
        assert!((kth_singular_value(&[6.25], 1) - 2.5).abs() < 1e-12);
    }
}
