#include "ddc/kernel_density.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ddc/random.hpp"

namespace ddc {

namespace {

// int u^k (1 - 4u^2)^2 du over [-1/2, 1/2].
double weight_moment(int k) {
  if (k % 2 == 1) return 0.0;
  const double kk = k;
  return std::pow(2.0, -kk) * (1.0 / (kk + 1.0) - 2.0 / (kk + 3.0) + 1.0 / (kk + 5.0));
}

double horner(const std::vector<double>& c, double u) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * u + *it;
  return v;
}

}  // namespace

KernelSpec make_order_kernel(int m) {
  if (m < 1 || m > 8) throw std::invalid_argument("kernel order must lie in 1..8 (moment system ill-conditioned beyond)");
  const int n = m + 1;
  Eigen::MatrixXd hankel(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) hankel(j, k) = weight_moment(j + k);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(0) = 1.0;
  const Eigen::VectorXd c = hankel.ldlt().solve(rhs);

  KernelSpec spec;
  spec.order = m;
  spec.p.assign(c.data(), c.data() + n);
  const std::vector<double> w{1.0, 0.0, -8.0, 0.0, 16.0};
  spec.q.assign(static_cast<std::size_t>(n) + 4, 0.0);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < 5; ++k) spec.q[static_cast<std::size_t>(j + k)] += spec.p[static_cast<std::size_t>(j)] * w[static_cast<std::size_t>(k)];

  for (int k = 0; k <= m; ++k)
    spec.moments.push_back(simpson([&](double u) { return std::pow(u, k) * spec(u); }, -0.5, 0.5, 4001));
  if (std::abs(spec.moments[0] - 1.0) > 1e-10)
    throw std::runtime_error("kernel construction failed: mass deviates from 1");
  for (int k = 1; k <= m; ++k)
    if (std::abs(spec.moments[static_cast<std::size_t>(k)]) > 1e-8)
      throw std::runtime_error("kernel construction failed: moment " + std::to_string(k) + " does not vanish");

  std::vector<double> dq;
  for (std::size_t j = 1; j < spec.q.size(); ++j) dq.push_back(static_cast<double>(j) * spec.q[j]);
  for (double u : linspace(-0.5, 0.5, 10001)) spec.lipschitz = std::max(spec.lipschitz, std::abs(horner(dq, u)));
  return spec;
}

double bandwidth_formula(double horizon) {
  const double l = std::log(horizon);
  return l * l / std::sqrt(horizon);
}

double min_horizon() {
  static const double value = [] {
    double lo = std::exp(4.0), hi = 1e6;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (bandwidth_formula(mid) > 1.05 ? lo : hi) = mid;
    }
    return hi;
  }();
  return value;
}

double bandwidth(double horizon) {
  if (!(horizon >= min_horizon()))
    throw std::invalid_argument("horizon " + std::to_string(horizon) + " below the minimum " +
                                std::to_string(min_horizon()) + " for the bandwidth rule; simulate a longer path");
  return bandwidth_formula(horizon);
}

double FunctionEstimate::at(double x) const {
  if (grid.empty() || x < grid.front() || x > grid.back()) throw std::out_of_range("evaluation point outside the estimate grid");
  auto it = std::upper_bound(grid.begin(), grid.end(), x);
  if (it == grid.end()) return values.back();
  const std::size_t j = static_cast<std::size_t>(std::distance(grid.begin(), it));
  const double t = (x - grid[j - 1]) / (grid[j] - grid[j - 1]);
  return values[j - 1] + t * (values[j] - values[j - 1]);
}

// ---------------------------------------------------------------------------

BinnedSamples::BinnedSamples(double lo, double hi, double width, int max_degree, std::size_t block_bins)
    : lo_(lo), width_(width), max_degree_(max_degree), block_bins_(block_bins) {
  if (!(hi > lo) || !(width > 0.0)) throw std::invalid_argument("bin range must be nonempty with positive width");
  if (block_bins == 0) throw std::invalid_argument("block size must be positive");
  const auto nbins = static_cast<std::size_t>(std::ceil((hi - lo) / width));
  bins_.resize(nbins);
  power_.assign(nbins * static_cast<std::size_t>(max_degree + 1), 0.0L);
}

double BinnedSamples::anchor(std::size_t block) const {
  return lo_ + width_ * (static_cast<double>(block * block_bins_) + 0.5 * static_cast<double>(block_bins_));
}

void BinnedSamples::add(double x) {
  ++count_;
  if (!(x >= lo_)) return;
  const auto b = static_cast<std::size_t>((x - lo_) / width_);
  if (b >= bins_.size()) return;
  bins_[b].push_back(x);
  long double* p = &power_[b * static_cast<std::size_t>(max_degree_ + 1)];
  const long double delta = static_cast<long double>(x) - anchor(b / block_bins_);
  long double v = 1.0L;
  for (int i = 0; i <= max_degree_; ++i, v *= delta) p[i] += v;
  dirty_ = true;
}

void BinnedSamples::refresh() const {
  const std::size_t stride = static_cast<std::size_t>(max_degree_ + 1);
  prefix_ = power_;
  for (std::size_t b = 1; b < bins_.size(); ++b) {
    if (b % block_bins_ == 0) continue;
    for (std::size_t i = 0; i < stride; ++i) prefix_[b * stride + i] += prefix_[(b - 1) * stride + i];
  }
  dirty_ = false;
}

double BinnedSamples::kernel_sum(const KernelSpec& kernel, double h, double x) const {
  const int d = kernel.degree();
  if (d > max_degree_) throw std::invalid_argument("kernel degree exceeds the binned power sums");
  const double a = x - KernelSpec::radius * h;
  const double b = x + KernelSpec::radius * h;
  if (a < lo_ || b >= hi()) throw std::out_of_range("kernel window leaves the binned range");
  if (dirty_) refresh();

  const auto ia = static_cast<std::size_t>((a - lo_) / width_);
  const auto ib = std::min(static_cast<std::size_t>((b - lo_) / width_), bins_.size() - 1);
  long double total = 0.0L;
  auto edge = [&](std::size_t bin) {
    for (double v : bins_[bin]) total += kernel((x - v) / h);
  };
  edge(ia);
  if (ib == ia) return static_cast<double>(total);
  edge(ib);

  // Interior bins lie inside the kernel support, where Q is a polynomial:
  // Q((x - X)/h) = sum_i c_i (-(X - anchor)/h)^i with c_i the Taylor
  // coefficients of Q at (x - anchor)/h.
  const std::size_t stride = static_cast<std::size_t>(max_degree_ + 1);
  std::vector<long double> coef(static_cast<std::size_t>(d + 1));
  for (std::size_t first = ia + 1; first < ib;) {
    const std::size_t block = first / block_bins_;
    const std::size_t last = std::min(ib - 1, (block + 1) * block_bins_ - 1);
    const long double* hi_sum = &prefix_[last * stride];
    const long double* lo_sum = first % block_bins_ == 0 ? nullptr : &prefix_[(first - 1) * stride];

    std::copy(kernel.q.begin(), kernel.q.end(), coef.begin());
    const long double t = (static_cast<long double>(x) - anchor(block)) / h;
    for (int i = 0; i < d; ++i)
      for (int j = d - 1; j >= i; --j) coef[static_cast<std::size_t>(j)] += t * coef[static_cast<std::size_t>(j + 1)];
    long double scale = 1.0L;
    const long double step = -1.0L / h;
    for (int i = 0; i <= d; ++i, scale *= step) {
      const long double s = hi_sum[i] - (lo_sum ? lo_sum[i] : 0.0L);
      total += coef[static_cast<std::size_t>(i)] * scale * s;
    }
    first = last + 1;
  }
  return static_cast<double>(total);
}

// ---------------------------------------------------------------------------

KernelDensityEstimator::KernelDensityEstimator(std::span<const double> samples, const KernelSpec& kernel, double h,
                                               double lo, double hi)
    : kernel_(kernel),
      h_(h),
      bins_(lo - h, hi + h, h / 1024.0, kernel.degree()) {
  if (!(h > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  bins_.add(samples);
}

double KernelDensityEstimator::operator()(double x) const {
  if (bins_.count() == 0) throw std::logic_error("density estimate from an empty sample");
  return bins_.kernel_sum(kernel_, h_, x) / (static_cast<double>(bins_.count()) * h_);
}

std::vector<double> KernelDensityEstimator::evaluate(std::span<const double> grid) const {
  std::vector<double> out;
  out.reserve(grid.size());
  for (double x : grid) out.push_back((*this)(x));
  return out;
}

std::span<const double> riemann_samples(const SamplePath& path) {
  if (path.values.size() < 2) return {};
  return std::span<const double>(path.values.data(), path.values.size() - 1);
}

FunctionEstimate estimate_density(const SamplePath& path, const KernelSpec& kernel, std::span<const double> grid,
                                  double h) {
  if (grid.empty()) throw std::invalid_argument("empty evaluation grid");
  const auto [lo, hi] = std::minmax_element(grid.begin(), grid.end());
  KernelDensityEstimator est(riemann_samples(path), kernel, h, *lo, *hi);
  FunctionEstimate out;
  out.grid.assign(grid.begin(), grid.end());
  out.values = est.evaluate(grid);
  out.horizon = path.horizon();
  out.bandwidth = h;
  out.seed = path.seed;
  out.kind = EstimateKind::density;
  return out;
}

FunctionEstimate estimate_density(const SamplePath& path, const KernelSpec& kernel, std::span<const double> grid) {
  return estimate_density(path, kernel, grid, bandwidth(path.horizon()));
}

double stationary_start(const InvariantDensity& density, std::uint64_t seed) {
  RandomStream rng(seed, 2);
  return density.quantile(rng.uniform());
}

VarianceReport variance_check(const DiffusionModel& model, const KernelSpec& kernel, double x,
                              std::span<const double> bandwidths, double horizon, double dt, std::size_t replicates,
                              std::uint64_t seed) {
  if (horizon < 1.0) throw std::invalid_argument("variance check needs a horizon of at least 1");
  if (replicates < 2) throw std::invalid_argument("variance check needs at least two replicates");
  for (double h : bandwidths)
    if (!(h > 0.0 && h < 0.5)) throw std::invalid_argument("variance check bandwidths must lie in (0, 0.5)");

  const InvariantDensity rho(model);
  VarianceReport rep;
  rep.x = x;
  rep.horizon = horizon;
  rep.replicates = replicates;
  rep.bandwidths.assign(bandwidths.begin(), bandwidths.end());
  const std::size_t nh = bandwidths.size();
  std::vector<double> sum(nh, 0.0), sum2(nh, 0.0);
  for (std::size_t r = 0; r < replicates; ++r) {
    const auto s = replicate_seed(seed, r);
    const SamplePath path = simulate_path(model, stationary_start(rho, s), horizon, dt, s);
    const double scale = dt / std::sqrt(path.horizon());
    for (std::size_t j = 0; j < nh; ++j) {
      double acc = 0.0;
      for (double v : riemann_samples(path)) acc += kernel((x - v) / bandwidths[j]);
      const double value = acc * scale;
      sum[j] += value;
      sum2[j] += value * value;
    }
  }
  const double n = static_cast<double>(replicates);
  const double rx = rho(x);
  for (std::size_t j = 0; j < nh; ++j) {
    const double mean = sum[j] / n;
    const double var = std::max(0.0, (sum2[j] - n * mean * mean) / (n - 1.0));
    rep.variances.push_back(var);
    rep.ratios.push_back(var / (rx * bandwidths[j] * bandwidths[j]));
  }
  if (nh >= 3) rep.fit = fit_rate(rep.bandwidths, rep.variances);
  return rep;
}

}  // namespace ddc
