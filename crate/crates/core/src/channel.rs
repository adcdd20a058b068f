//! AWGN-specific closed-form quantities: capacity, dispersion, information
//! densities, the spherical-shell output density, and the log-ratio
//! machinery comparing that density to its Gaussian surrogate.
//!
//! All rates are in nats. Everything here is pure; samplers draw from a
//! caller-owned [`RngStream`].

use crate::error::{Error, Result};
use crate::specfn::{
    log_bessel_i, log_gamma_unchecked, sample_noncentral_chisq, std_normal_cdf, RngStream,
};

/// AWGN channel with noise variance N and cost threshold Gamma.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    noise_variance: f64,
    cost_threshold: f64,
}

impl ChannelSpec {
    pub fn new(noise_variance: f64, cost_threshold: f64) -> Result<Self> {
        if !(noise_variance > 0.0 && noise_variance.is_finite()) {
            return Err(Error::param("noise_variance", noise_variance, "N > 0"));
        }
        if !(cost_threshold > 0.0 && cost_threshold.is_finite()) {
            return Err(Error::param("cost_threshold", cost_threshold, "Gamma > 0"));
        }
        Ok(Self {
            noise_variance,
            cost_threshold,
        })
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn cost_threshold(&self) -> f64 {
        self.cost_threshold
    }

    /// Capacity-cost function C(Gamma) = (1/2) log(1 + Gamma/N), nats per use.
    pub fn capacity(&self) -> f64 {
        0.5 * (self.cost_threshold / self.noise_variance).ln_1p()
    }

    /// C'(Gamma) = 1 / (2 (Gamma + N)).
    pub fn capacity_derivative(&self) -> f64 {
        1.0 / (2.0 * (self.cost_threshold + self.noise_variance))
    }

    /// Dispersion V(Gamma) = (Gamma^2 + 2 Gamma N) / (2 (N + Gamma)^2).
    pub fn dispersion(&self) -> f64 {
        let g = self.cost_threshold;
        let n = self.noise_variance;
        (g * g + 2.0 * g * n) / (2.0 * (n + g) * (n + g))
    }

    /// Conditional information variance nu_x = (Gamma^2 + 2 x^2 N) / (2 (N + Gamma)^2).
    pub fn nu_x(&self, x: f64) -> f64 {
        let g = self.cost_threshold;
        let n = self.noise_variance;
        (g * g + 2.0 * x * x * n) / (2.0 * (n + g) * (n + g))
    }
}

/// Uniform-on-sphere input at blocklength `n`: radius is tied to the
/// per-symbol shell cost by radius^2 = n * shell_cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellSpec {
    blocklength: u64,
    shell_cost: f64,
    radius: f64,
}

impl ShellSpec {
    pub fn new(blocklength: u64, shell_cost: f64) -> Result<Self> {
        if blocklength < 2 {
            return Err(Error::param("blocklength", blocklength as f64, "n >= 2"));
        }
        if !(shell_cost > 0.0 && shell_cost.is_finite()) {
            return Err(Error::param("shell_cost", shell_cost, "shell cost > 0"));
        }
        Ok(Self {
            blocklength,
            shell_cost,
            radius: (blocklength as f64 * shell_cost).sqrt(),
        })
    }

    pub fn blocklength(&self) -> u64 {
        self.blocklength
    }

    pub fn shell_cost(&self) -> f64 {
        self.shell_cost
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// One draw of log W(Y|X) / q(Y) for inputs on the shell of per-symbol cost
/// `s`, where q = N(0, (Gamma + N) I_n).
///
/// Distributionally exact representation:
///   n C(Gamma) + n s / (2 Gamma) - Gamma/(2(N+Gamma)) * chi2_n(n N s / Gamma^2).
pub fn log_density_ratio_sample(ch: &ChannelSpec, n: u64, s: f64, rng: &mut RngStream) -> f64 {
    assert!(s >= 0.0, "per-block cost must be nonnegative");
    assert!(n >= 1);
    let g = ch.cost_threshold;
    let nv = ch.noise_variance;
    let lambda = n as f64 * nv * s / (g * g);
    let d = sample_noncentral_chisq(n, lambda, rng);
    n as f64 * ch.capacity() + n as f64 * s / (2.0 * g) - g / (2.0 * (nv + g)) * d
}

/// phi_{n,gamma}(s): the normal-approximation lower-bound kernel
///
///   Phi( sqrt(2n)(N+Gamma)(gamma - C)/sqrt(Gamma^2 + 2Ns)
///        + sqrt(n)(Gamma - s)/(sqrt(2) sqrt(Gamma^2 + 2Ns)) ).
pub fn phi_n_gamma(ch: &ChannelSpec, n: u64, gamma: f64, s: f64) -> f64 {
    assert!(s >= 0.0, "per-block cost must be nonnegative");
    let g = ch.cost_threshold;
    let nv = ch.noise_variance;
    let nf = n as f64;
    let root = (g * g + 2.0 * nv * s).sqrt();
    let arg = (2.0 * nf).sqrt() * (nv + g) * (gamma - ch.capacity()) / root
        + nf.sqrt() * (g - s) / (std::f64::consts::SQRT_2 * root);
    std_normal_cdf(arg)
}

/// log of the shell-input output density Q^cc at output norm `y_norm`,
/// evaluated radially (the density depends on y only through its norm).
pub fn qcc_log_density(shell: &ShellSpec, ch: &ChannelSpec, y_norm: f64) -> Result<f64> {
    if !(y_norm > 0.0 && y_norm.is_finite()) {
        return Err(Error::param("y_norm", y_norm, "||y|| > 0"));
    }
    let n = shell.blocklength as f64;
    let nv = ch.noise_variance;
    let r = shell.radius;
    let order = 0.5 * n - 1.0;
    let bessel_arg = r * y_norm / nv;
    Ok(log_gamma_unchecked(0.5 * n) - std::f64::consts::LN_2
        - 0.5 * n * (std::f64::consts::PI * nv).ln()
        - (r * r + y_norm * y_norm) / (2.0 * nv)
        + order * (nv.ln() - r.ln() - y_norm.ln())
        + log_bessel_i(order, bessel_arg))
}

/// mu(s, eps): the exponent-rate function of the shell/Gaussian log ratio,
/// written in the s = sqrt(1 + z^2) variable,
///
///   mu = -(Gamma+N)/N - N(Gamma+eps)(s^2-1)/(4 Gamma (Gamma+N+eps))
///        + s - log((1+s)/2) + log(1 + Gamma/N + eps/N).
pub fn mu_s_eps(ch: &ChannelSpec, s: f64, eps: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(Error::param("s", s, "s > 1"));
    }
    let g = ch.cost_threshold;
    let nv = ch.noise_variance;
    if !(eps.abs() < g + nv) {
        return Err(Error::param("eps", eps, "|eps| < Gamma + N"));
    }
    Ok(-(g + nv) / nv - nv * (g + eps) * (s * s - 1.0) / (4.0 * g * (g + nv + eps)) + s
        - (0.5 + 0.5 * s).ln()
        + (1.0 + g / nv + eps / nv).ln())
}

/// Maximizer s*(eps) of mu(., eps):
///   (Gamma N + 2 Gamma^2 + 2 Gamma eps - N eps) / (N (Gamma + eps)).
pub fn s_star(ch: &ChannelSpec, eps: f64) -> f64 {
    let g = ch.cost_threshold;
    let nv = ch.noise_variance;
    debug_assert!(g + eps > 0.0);
    (g * nv + 2.0 * g * g + 2.0 * g * eps - nv * eps) / (nv * (g + eps))
}

/// F(eps) = mu(s*(eps), eps) = -eps/(Gamma+eps) + log(1 + eps/Gamma).
pub fn big_f(ch: &ChannelSpec, eps: f64) -> Result<f64> {
    let g = ch.cost_threshold;
    if !(g + eps > 0.0) {
        return Err(Error::param("eps", eps, "eps > -Gamma"));
    }
    Ok(-eps / (g + eps) + (eps / g).ln_1p())
}

/// Outcome of [`qcc_qstar_log_ratio_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct LogRatioReport {
    pub n: u64,
    pub eps: f64,
    pub delta: f64,
    /// max over the grid of log Qcc/Q* - (n/2) F(eps)
    pub max_residual: f64,
    /// grid point attaining the max
    pub argmax_y_norm: f64,
    pub points: usize,
}

/// Compares the shell output density against the Gaussian N(0, (Gamma'+N)I)
/// with Gamma' = Gamma + eps on a grid of output norms inside the
/// concentration window |  ||y||^2/n - Gamma' - N | <= delta, and reports the
/// worst excess of log Qcc/Q* over (n/2) F(eps).
///
/// The residual is expected to stay O(1) in n; this is an empirical check,
/// not a certified bound.
pub fn qcc_qstar_log_ratio_check(
    ch: &ChannelSpec,
    n: u64,
    eps: f64,
    delta: f64,
    grid: &[f64],
) -> Result<LogRatioReport> {
    let g = ch.cost_threshold;
    let nv = ch.noise_variance;
    if !(delta > 0.0 && delta < g + nv - eps.abs()) {
        return Err(Error::param("delta", delta, "0 < delta < Gamma + N - |eps|"));
    }
    if grid.is_empty() {
        return Err(Error::param("grid", 0.0, "at least one grid point"));
    }
    let g_prime = g + eps;
    let shell = ShellSpec::new(n, g)?;
    let nf = n as f64;
    let var_out = g_prime + nv;
    let f_eps = big_f(ch, eps)?;
    let mut max_residual = f64::NEG_INFINITY;
    let mut argmax = f64::NAN;
    for &y_norm in grid {
        let normalized = y_norm * y_norm / nf;
        if !(normalized >= var_out - delta - 1e-12 && normalized <= var_out + delta + 1e-12) {
            return Err(Error::param(
                "y_norm",
                y_norm,
                "grid points must satisfy | ||y||^2/n - Gamma' - N | <= delta",
            ));
        }
        let log_qcc = qcc_log_density(&shell, ch, y_norm)?;
        let log_qstar = -0.5 * nf * (2.0 * std::f64::consts::PI * var_out).ln()
            - y_norm * y_norm / (2.0 * var_out);
        let residual = log_qcc - log_qstar - 0.5 * nf * f_eps;
        if residual > max_residual {
            max_residual = residual;
            argmax = y_norm;
        }
    }
    Ok(LogRatioReport {
        n,
        eps,
        delta,
        max_residual,
        argmax_y_norm: argmax,
        points: grid.len(),
    })
}

/// Uniform grid of output norms covering the concentration window used by
/// [`qcc_qstar_log_ratio_check`].
pub fn log_ratio_grid(ch: &ChannelSpec, n: u64, eps: f64, delta: f64, points: usize) -> Vec<f64> {
    let var_out = ch.cost_threshold + eps + ch.noise_variance;
    let nf = n as f64;
    let lo = nf * (var_out - delta);
    let hi = nf * (var_out + delta);
    (0..points)
        .map(|i| (lo + (hi - lo) * i as f64 / (points - 1).max(1) as f64).sqrt())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    fn unit_channel() -> ChannelSpec {
        ChannelSpec::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(ChannelSpec::new(0.0, 1.0).is_err());
        assert!(ChannelSpec::new(1.0, -3.0).is_err());
        assert!(ShellSpec::new(1, 1.0).is_err());
    }

    #[test]
    fn capacity_values() {
        let ch = unit_channel();
        assert!((ch.capacity() - 0.5 * std::f64::consts::LN_2 * 2.0 / 2.0).abs() < 1e-15);
        assert!((ch.capacity() - 0.346_573_590_279_972_65).abs() < 1e-15);
        let ch3 = ChannelSpec::new(1.0, 3.0).unwrap();
        assert!((ch3.capacity() - std::f64::consts::LN_2).abs() < 1e-15);
        // Gamma -> 0+ limit.
        let tiny = ChannelSpec::new(1.0, 1e-300).unwrap();
        assert!(tiny.capacity() < 1e-299);
        // strictly increasing in Gamma
        assert!(ch3.capacity() > ch.capacity());
    }

    #[test]
    fn capacity_derivative_values_and_fd() {
        let ch = unit_channel();
        assert_eq!(ch.capacity_derivative(), 0.25);
        let ch3 = ChannelSpec::new(1.0, 3.0).unwrap();
        assert_eq!(ch3.capacity_derivative(), 0.125);
        for &g in &[0.3, 1.0, 2.5, 7.0] {
            let h = 1e-6;
            let up = ChannelSpec::new(1.0, g + h).unwrap().capacity();
            let dn = ChannelSpec::new(1.0, g - h).unwrap().capacity();
            let fd = (up - dn) / (2.0 * h);
            let an = ChannelSpec::new(1.0, g).unwrap().capacity_derivative();
            assert!((fd - an).abs() < 1e-8, "Gamma = {g}");
            assert!(an > 0.0);
        }
    }

    #[test]
    fn dispersion_values() {
        assert!((unit_channel().dispersion() - 0.375).abs() < 1e-16);
        let ch3 = ChannelSpec::new(1.0, 3.0).unwrap();
        assert!((ch3.dispersion() - 15.0 / 32.0).abs() < 1e-16);
        let tiny = ChannelSpec::new(1.0, 1e-12).unwrap();
        assert!(tiny.dispersion() < 1e-11);
        for &g in &[0.1, 1.0, 10.0, 1e4] {
            let v = ChannelSpec::new(1.0, g).unwrap().dispersion();
            assert!(v > 0.0 && v < 0.5);
        }
    }

    #[test]
    fn nu_x_values_and_symmetry() {
        let ch = unit_channel();
        assert!((ch.nu_x(0.0) - 0.125).abs() < 1e-16);
        assert!((ch.nu_x(1.0) - ch.dispersion()).abs() < 1e-16);
        for i in 0..20 {
            let x = 0.3 * i as f64;
            assert_eq!(ch.nu_x(x), ch.nu_x(-x));
        }
    }

    #[test]
    fn nu_x_integrates_to_dispersion() {
        // Gauss-Hermite expectation of nu_x under P* = N(0, Gamma).
        for &(nv, g) in &[(1.0, 1.0), (2.0, 0.5), (0.7, 3.0)] {
            let ch = ChannelSpec::new(nv, g).unwrap();
            let integral = oracle::gauss_hermite_expectation(|x| ch.nu_x(x), 0.0, g, 32);
            assert!((integral - ch.dispersion()).abs() < 1e-10);
        }
    }

    #[test]
    fn lemma9_argument_forms_agree() {
        // r/sqrt(V) - C' u / sqrt(V)  ==  sqrt(2)(N+G) r / sqrt(G^2+2NG) - u/(sqrt(2) sqrt(G^2+2NG))
        for &(nv, g) in &[(1.0, 1.0), (0.5, 2.0), (3.0, 0.4)] {
            let ch = ChannelSpec::new(nv, g).unwrap();
            let v = ch.dispersion();
            let root = (g * g + 2.0 * nv * g).sqrt();
            for i in -6..=6 {
                for j in -6..=6 {
                    let r = 0.5 * i as f64;
                    let u = 2.0 * j as f64;
                    let form1 = r / v.sqrt() - ch.capacity_derivative() * u / v.sqrt();
                    let form2 = std::f64::consts::SQRT_2 * (nv + g) * r / root
                        - u / (std::f64::consts::SQRT_2 * root);
                    assert!((form1 - form2).abs() < 1e-12, "r={r} u={u}");
                }
            }
        }
    }

    #[test]
    fn phi_n_gamma_center_and_limits() {
        let ch = unit_channel();
        let c = ch.capacity();
        assert_eq!(phi_n_gamma(&ch, 100, c, ch.cost_threshold()), 0.5);
        assert!(phi_n_gamma(&ch, 100, c - 50.0, 1.0) < 1e-300);
        assert!(phi_n_gamma(&ch, 100, c + 50.0, 1.0) > 1.0 - 1e-15);
    }

    #[test]
    fn phi_n_gamma_matches_rederived_argument() {
        // Independent re-derivation of the argument arithmetic.
        let ch = unit_channel();
        let (n, s) = (100u64, 1.2f64);
        let gamma = ch.capacity() + 0.1 / 10.0f64.sqrt();
        let got = phi_n_gamma(&ch, n, gamma, s);
        let denom = (2.0f64 * (1.0 + 2.0 * s)).sqrt();
        let term1 = 4.0 * (n as f64).sqrt() * (gamma - 0.5 * 2.0f64.ln()) / denom;
        let term2 = (n as f64).sqrt() * (1.0 - s) / denom;
        let expected = crate::specfn::std_normal_cdf(term1 + term2);
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn log_density_ratio_mean_at_shell_cost() {
        // At s = Gamma the mean is n C(Gamma) exactly.
        let ch = unit_channel();
        let n = 10_000u64;
        let mut rng = RngStream::new(123, 0);
        let draws = 200_000usize;
        let mean: f64 = (0..draws)
            .map(|_| log_density_ratio_sample(&ch, n, 1.0, &mut rng))
            .sum::<f64>()
            / draws as f64;
        // sd of one draw: 0.25 * sqrt(2n * 3) with Gamma=N=1, s=1
        let sd = 0.25 * (2.0 * n as f64 * 3.0).sqrt();
        let se = sd / (draws as f64).sqrt();
        let expected = n as f64 * ch.capacity();
        assert!((mean - expected).abs() < 4.0 * se, "mean {mean} vs {expected}");
    }

    #[test]
    fn log_density_ratio_zero_cost_is_central() {
        // s = 0: n C - Gamma/(2(N+Gamma)) chi2_n(0); check against a stream replay.
        let ch = unit_channel();
        let mut a = RngStream::new(5, 0);
        let mut b = RngStream::new(5, 0);
        let v = log_density_ratio_sample(&ch, 50, 0.0, &mut a);
        let d = crate::specfn::sample_noncentral_chisq(50, 0.0, &mut b);
        let expected = 50.0 * ch.capacity() - 0.25 * d;
        assert_eq!(v.to_bits(), expected.to_bits());
    }

    #[test]
    fn qcc_normalization_radial_integral() {
        // Surface-area-weighted radial integral of exp(log Qcc) = 1 +- 1e-4.
        let ch = unit_channel();
        for &n in &[10u64, 50, 200] {
            let shell = ShellSpec::new(n, ch.cost_threshold()).unwrap();
            let nf = n as f64;
            let mean_sq = nf * (ch.cost_threshold() + ch.noise_variance());
            let sd_sq = (4.0 * nf + 2.0 * nf).sqrt();
            let lo = (mean_sq - 14.0 * sd_sq).max(1e-8).sqrt();
            let hi = (mean_sq + 14.0 * sd_sq).sqrt();
            let log_area = move |rho: f64| {
                std::f64::consts::LN_2 + 0.5 * nf * std::f64::consts::PI.ln()
                    + (nf - 1.0) * rho.ln()
                    - crate::specfn::log_gamma(0.5 * nf).unwrap()
            };
            let total = oracle::simpson_log_integral(
                |rho| qcc_log_density(&shell, &ch, rho).unwrap() + log_area(rho),
                lo,
                hi,
                4000,
            );
            assert!((total - 1.0).abs() <= 1e-4, "n = {n}: integral {total}");
        }
    }

    #[test]
    fn qcc_matches_two_dimensional_convolution() {
        // n = 2: the shell is a circle; convolve it with the Gaussian by
        // direct angular quadrature and compare.
        let ch = ChannelSpec::new(0.8, 1.3).unwrap();
        let shell = ShellSpec::new(2, ch.cost_threshold()).unwrap();
        let r = shell.radius();
        let nv = ch.noise_variance();
        for &y in &[0.4f64, 1.0, 1.7, 2.6] {
            let m = 4000;
            let mut acc = 0.0;
            for k in 0..m {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
                let dx = y - r * theta.cos();
                let dy = r * theta.sin();
                acc += (-(dx * dx + dy * dy) / (2.0 * nv)).exp();
            }
            let conv = acc / m as f64 / (2.0 * std::f64::consts::PI * nv);
            let got = qcc_log_density(&shell, &ch, y).unwrap().exp();
            assert!(
                ((got - conv) / conv).abs() < 1e-10,
                "y = {y}: {got} vs {conv}"
            );
        }
    }

    #[test]
    fn qcc_output_norm_moment() {
        // E[||Y||^2] = n Gamma_j + n N under X + Z sampling.
        let ch = unit_channel();
        let n = 64u64;
        let mut rng = RngStream::new(77, 0);
        let draws = 100_000usize;
        let mut acc = 0.0;
        for _ in 0..draws {
            // X = R e1 by spherical symmetry; Z iid N(0, N).
            let z1 = rng.standard_normal();
            let rest: f64 = crate::specfn::sample_noncentral_chisq(n - 1, 0.0, &mut rng);
            let r = (n as f64 * ch.cost_threshold()).sqrt();
            acc += (r + z1).powi(2) + rest;
        }
        let mean = acc / draws as f64;
        let expected = n as f64 * (ch.cost_threshold() + ch.noise_variance());
        let sd = ((4.0 * n as f64 + 2.0 * n as f64) / draws as f64).sqrt();
        assert!((mean - expected).abs() < 5.0 * sd, "mean {mean}");
    }

    #[test]
    fn mu_matches_duplicate_expression() {
        let ch = unit_channel();
        let (s, eps) = (2.5f64, 0.01f64);
        let got = mu_s_eps(&ch, s, eps).unwrap();
        // Same algebra assembled independently, term by term.
        let (g, nv) = (1.0f64, 1.0f64);
        let quad = (nv * (g + eps)) / (4.0 * g * (g + nv + eps)) * (s * s - 1.0);
        let expected =
            -(g + nv) / nv - quad + s - ((1.0 + s) / 2.0).ln() + ((nv + g + eps) / nv).ln();
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn mu_at_star_is_f_and_star_maximizes() {
        let ch = unit_channel();
        assert!(mu_s_eps(&ch, s_star(&ch, 0.0), 0.0).unwrap().abs() < 1e-12);
        for &eps in &[-0.05, 0.0, 0.02, 0.3] {
            let star = s_star(&ch, eps);
            let at_star = mu_s_eps(&ch, star, eps).unwrap();
            assert!((at_star - big_f(&ch, eps).unwrap()).abs() < 1e-12);
            for i in 1..60 {
                let s = 1.0 + 0.12 * i as f64;
                assert!(mu_s_eps(&ch, s, eps).unwrap() <= at_star + 1e-12);
            }
            // decreasing beyond the maximizer
            assert!(mu_s_eps(&ch, star + 0.5, eps).unwrap() < at_star);
        }
    }

    #[test]
    fn s_star_closed_form_values() {
        assert!((s_star(&unit_channel(), 0.0) - 3.0).abs() < 1e-15);
        let ch = ChannelSpec::new(1.0, 2.0).unwrap();
        assert!((s_star(&ch, 0.0) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn big_f_values_and_expansion() {
        let ch = unit_channel();
        assert_eq!(big_f(&ch, 0.0).unwrap(), 0.0);
        let eps = 0.1;
        let f = big_f(&ch, eps).unwrap();
        assert!((f - (-0.1 / 1.1 + 1.1f64.ln())).abs() < 1e-15);
        // quadratic-cubic expansion residual is O(eps^4)
        for &e in &[0.1, 0.05, 0.02, -0.05] {
            let resid = big_f(&ch, e).unwrap() - (e * e / 2.0 - 2.0 * e * e * e / 3.0);
            assert!(resid.abs() <= 1.0 * e.powi(4), "eps = {e}: resid {resid}");
        }
        assert!(big_f(&ch, -0.05).unwrap() > 0.0);
        assert!(big_f(&ch, -1.0).is_err());
    }

    #[test]
    fn mu_domain_errors() {
        let ch = unit_channel();
        assert!(mu_s_eps(&ch, 1.0, 0.0).is_err());
        assert!(mu_s_eps(&ch, 0.5, 0.0).is_err());
        assert!(mu_s_eps(&ch, 2.0, 5.0).is_err());
    }

    #[test]
    fn log_ratio_check_interior_point_is_finite() {
        let ch = unit_channel();
        let n = 64;
        let y = (n as f64 * 2.0).sqrt(); // ||y||^2 = n (Gamma' + N) with eps = 0
        let report = qcc_qstar_log_ratio_check(&ch, n, 0.0, 0.5, &[y]).unwrap();
        assert!(report.max_residual.is_finite());
    }

    #[test]
    fn log_ratio_check_rejects_bad_delta_and_points() {
        let ch = unit_channel();
        assert!(qcc_qstar_log_ratio_check(&ch, 64, 0.0, 2.0, &[8.0]).is_err());
        assert!(qcc_qstar_log_ratio_check(&ch, 64, 0.0, 0.5, &[1.0]).is_err());
    }

    #[test]
    fn log_ratio_residual_flat_in_n_at_eps_zero() {
        let ch = unit_channel();
        let ns = [50u64, 100, 200, 400];
        let mut residuals = Vec::new();
        for &n in &ns {
            let grid = log_ratio_grid(&ch, n, 0.0, 0.5, 401);
            let rep = qcc_qstar_log_ratio_check(&ch, n, 0.0, 0.5, &grid).unwrap();
            residuals.push(rep.max_residual);
        }
        let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
        let (slope, _) = oracle::ls_slope_with_se(&xs, &residuals);
        // flat in n: over the 350-wide n range the fitted drift stays small
        assert!(
            (slope * 350.0).abs() < 0.5,
            "slope {slope}, residuals {residuals:?}"
        );
    }
}
