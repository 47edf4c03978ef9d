#include "ssmvb/lgssm.hpp"

#include <cmath>
#include <stdexcept>

#include "ssmvb/stats.hpp"

namespace ssmvb::lgssm {

void validate(const Params& p) {
  if (!(p.sigma0 > 0.0) || !std::isfinite(p.sigma0))
    throw std::invalid_argument("lgssm: sigma0 must be positive");
  if (!(p.rho > -1.0 && p.rho < 1.0))
    throw std::invalid_argument("lgssm: rho must lie in (-1,1)");
  if (!(p.alpha >= 0.0) || !std::isfinite(p.alpha))
    throw std::invalid_argument("lgssm: alpha must be >= 0");
}

namespace {

// Determinant g_n of the pure Toeplitz tridiagonal matrix (diagonal a,
// products bc on the off-diagonal pair), via the two-root closed form.
double toeplitz_det(double a, double bc, int n) {
  const double disc = a * a - 4.0 * bc;
  if (disc == 0.0) return (n + 1) * std::pow(0.5 * a, n);
  if (disc > 0.0) {
    const double d = std::sqrt(disc);
    const double r1 = 0.5 * (a + d);
    const double r2 = 0.5 * (a - d);
    return (std::pow(r1, n + 1) - std::pow(r2, n + 1)) / d;
  }
  // Complex-conjugate roots: g_n = r^n sin((n+1) t) / sin t.
  const double d = std::sqrt(-disc);
  const double r = std::sqrt(bc);
  const double t = std::atan2(d, a);
  return std::pow(r, n) * std::sin((n + 1) * t) / std::sin(t);
}

void check_abcn(double a, int n) {
  if (n < 1) throw std::invalid_argument("tridiag_det: n must be >= 1");
  if (!std::isfinite(a)) throw std::invalid_argument("tridiag_det: non-finite input");
}

}  // namespace

double tridiag_det(double a, double b, double c, int n) {
  check_abcn(a, n);
  return toeplitz_det(a, b * c, n);
}

double tridiag_det_unit_corner(double a, double b, double c, int n) {
  check_abcn(a, n);
  if (n == 1) return 1.0;
  const double bc = b * c;
  return toeplitz_det(a, bc, n - 1) - bc * toeplitz_det(a, bc, n - 2);
}

Tridiag omega_matrix(const Params& p, int n) {
  validate(p);
  if (n < 2) throw std::invalid_argument("omega_matrix: n must be >= 2");
  Tridiag m;
  const double a = 1.0 + p.rho * p.rho + p.alpha * p.alpha;
  m.diag.assign(n, a);
  m.diag[n - 1] = 1.0 + p.alpha * p.alpha;
  m.off.assign(n - 1, -p.rho);
  return m;
}

double omega_logdet(const Params& p, int n) {
  return ldl_logdet(ldl_factor(omega_matrix(p, n)));
}

double omega_det_closed_form(const Params& p, int n) {
  validate(p);
  if (n < 2) throw std::invalid_argument("omega_det_closed_form: n must be >= 2");
  const double a = 1.0 + p.rho * p.rho + p.alpha * p.alpha;
  const double bc = p.rho * p.rho;
  return (1.0 + p.alpha * p.alpha) * toeplitz_det(a, bc, n - 1) -
         bc * toeplitz_det(a, bc, n - 2);
}

std::vector<double> phi_matrix(double lambda, int n) {
  if (!(lambda > -1.0 && lambda < 1.0))
    throw std::invalid_argument("phi_matrix: lambda must lie in (-1,1)");
  std::vector<double> m(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      m[static_cast<std::size_t>(i) * n + j] = std::pow(lambda, std::abs(i - j));
  return m;
}

double phi_logdet(double lambda, int n) {
  if (!(lambda > -1.0 && lambda < 1.0))
    throw std::invalid_argument("phi_logdet: lambda must lie in (-1,1)");
  return (n - 1) * std::log1p(-lambda * lambda);
}

double limit_criterion(const Params& p, double lambda) {
  validate(p);
  if (!(lambda >= 0.0 && lambda < 1.0))
    throw std::invalid_argument("limit_criterion: lambda must lie in [0,1)");
  VariationalParam v{lambda, p.sigma0};
  const double c = 1.0 + p.alpha * p.alpha + p.rho * p.rho;
  return -0.5 * v.nu() / (p.sigma0 * p.sigma0) * (c - p.rho * lambda);
}

double optimal_lambda(const Params& p) {
  validate(p);
  if (!(p.rho > 0.0))
    throw std::invalid_argument("optimal_lambda: undefined at rho = 0");
  const double c = 1.0 + p.alpha * p.alpha + p.rho * p.rho;
  // Rationalized minus-root of rho l^2 - 2 c l + rho = 0; stable as rho -> 0.
  return p.rho / (c + std::sqrt((c - p.rho) * (c + p.rho)));
}

double concentrated_objective(const Params& p) {
  return limit_criterion(p, optimal_lambda(p));
}

ThetaStar find_theta_star(const ParamBox& box, double grid_step, double sigma0) {
  if (!(grid_step > 0.0))
    throw std::invalid_argument("find_theta_star: grid_step must be > 0");
  if (!(box.rho_lo > 0.0 && box.rho_hi < 1.0 && box.rho_lo <= box.rho_hi &&
        box.alpha_lo <= box.alpha_hi))
    throw std::invalid_argument("find_theta_star: invalid search box");
  ThetaStar best;
  bool first = true;
  const int nr = static_cast<int>(std::round((box.rho_hi - box.rho_lo) / grid_step));
  const int na = static_cast<int>(std::round((box.alpha_hi - box.alpha_lo) / grid_step));
  for (int i = 0; i <= nr; ++i) {
    const double rho = box.rho_lo + i * grid_step;
    for (int j = 0; j <= na; ++j) {
      const double alpha = box.alpha_lo + j * grid_step;
      Params p{rho, alpha, sigma0};
      const double val = concentrated_objective(p);
      if (first || val > best.value) {
        best.params = p;
        best.value = val;
        first = false;
      }
    }
  }
  return best;
}

double jensen_gap(const Params& p, const std::vector<double>& y) {
  validate(p);
  const int n = static_cast<int>(y.size());
  if (n < 2) throw std::invalid_argument("jensen_gap: need n >= 2");
  const double s02 = p.sigma0 * p.sigma0;
  const double a2 = p.alpha * p.alpha;
  const auto f = ldl_factor(omega_matrix(p, n));
  const auto sol = ldl_solve(f, y);
  double quad = 0.0;
  for (int i = 0; i < n; ++i) quad += y[i] * sol[i];
  const double r2 = p.rho * p.rho;
  return -0.5 * ldl_logdet(f) + 0.5 / s02 * (a2 * quad + n * a2 * s02) -
         0.5 * n - 0.5 * n * std::log1p(-r2) + 0.5 * n * (1.0 - r2);
}

double jensen_case1_limit(double alpha0) {
  const double a2 = alpha0 * alpha0;
  return -0.5 * std::log1p(a2) + a2;
}

double jensen_case2_limit(double rho0) {
  const double r2 = rho0 * rho0;
  return -0.5 - 0.5 * std::log1p(-r2) + 0.5 * (1.0 - r2);
}

KalmanState kalman_filter(const Params& p, const std::vector<double>& y) {
  validate(p);
  const int n = static_cast<int>(y.size());
  if (n < 1) throw std::invalid_argument("kalman_filter: empty series");
  KalmanState ks;
  ks.filt_mean.resize(n);
  ks.filt_var.resize(n);
  ks.pred_mean.resize(n);
  ks.pred_var.resize(n);
  const double s02 = p.sigma0 * p.sigma0;
  double am = 0.0, av = s02;
  double ll = 0.0;
  for (int t = 0; t < n; ++t) {
    ks.pred_mean[t] = am;
    ks.pred_var[t] = av;
    const double fmean = p.alpha * am;
    const double fvar = p.alpha * p.alpha * av + s02;
    const double resid = y[t] - fmean;
    ll += -0.5 * (kLog2Pi + std::log(fvar) + resid * resid / fvar);
    const double gain = p.alpha * av / fvar;
    const double fm = am + gain * resid;
    const double fv = av - gain * p.alpha * av;
    ks.filt_mean[t] = fm;
    ks.filt_var[t] = fv;
    am = p.rho * fm;
    av = p.rho * p.rho * fv + s02;
  }
  ks.loglik = ll;
  return ks;
}

double kl_state_marginal(const Params& p0, double lambda_star,
                         const std::vector<double>& y) {
  if (!(lambda_star >= 0.0 && lambda_star < 1.0))
    throw std::invalid_argument("kl_state_marginal: lambda outside [0,1)");
  const auto ks = kalman_filter(p0, y);
  const int n = static_cast<int>(y.size());
  const double m = ks.filt_mean[n - 1];
  const double v = ks.filt_var[n - 1];
  VariationalParam q{lambda_star, p0.sigma0};
  const double nu = q.nu();
  return 0.5 * (std::log(nu / v) - 1.0 + v / nu + m * m / nu);
}

std::vector<double> simulate(const Params& p, int n, Rng& rng) {
  validate(p);
  std::vector<double> y(n);
  double x = rng.normal(0.0, p.sigma0);
  for (int t = 0; t < n; ++t) {
    y[t] = p.alpha * x + rng.normal(0.0, p.sigma0);
    x = p.rho * x + rng.normal(0.0, p.sigma0);
  }
  return y;
}

}  // namespace ssmvb::lgssm
