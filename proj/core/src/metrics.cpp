#include "pnnp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "pnnp/stats.hpp"

namespace pnnp {

namespace {

constexpr double kBinPseudoCount = 0.1;

struct Histograms {
  std::vector<double> centers;
  std::vector<double> pa;
  std::vector<double> pb;
};

Histograms shared_histograms(std::span<const double> a, std::span<const double> b,
                             double bin_width) {
  double lo = a[0], hi = a[0];
  for (double v : a) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (double v : b) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const std::size_t nbins =
      static_cast<std::size_t>(std::ceil((hi - lo) / bin_width)) + 1;

  Histograms h;
  h.centers.resize(nbins);
  for (std::size_t i = 0; i < nbins; ++i)
    h.centers[i] = lo + (static_cast<double>(i) + 0.5) * bin_width;

  auto fill = [&](std::span<const double> v, std::vector<double>& p) {
    std::vector<double> counts(nbins, 0.0);
    for (double x : v) {
      const std::size_t bin = std::min(
          static_cast<std::size_t>((x - lo) / bin_width), nbins - 1);
      counts[bin] += 1.0;
    }
    const double total = static_cast<double>(v.size()) +
                         kBinPseudoCount * static_cast<double>(nbins);
    p.resize(nbins);
    for (std::size_t i = 0; i < nbins; ++i)
      p[i] = (counts[i] + kBinPseudoCount) / total;
  };
  fill(a, h.pa);
  fill(b, h.pb);
  return h;
}

/// Linear-interpolated order-statistic quantile at u in (0,1).
double sorted_quantile(const std::vector<double>& sorted, double u) {
  const double pos = u * static_cast<double>(sorted.size() - 1);
  const std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(i);
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

}  // namespace

double kld(std::span<const double> samples_a, std::span<const double> samples_b,
           double bin_width) {
  if (samples_a.empty() || samples_b.empty())
    throw std::invalid_argument("kld: empty sample set");
  if (bin_width == 0.0) bin_width = 0.1 * stddev(samples_a);
  if (bin_width <= 0.0) throw std::invalid_argument("kld: bin width must be > 0");
  const Histograms h = shared_histograms(samples_a, samples_b, bin_width);
  double d = 0.0;
  for (std::size_t i = 0; i < h.pa.size(); ++i)
    if (h.pa[i] > 0.0) d += h.pa[i] * std::log(h.pa[i] / h.pb[i]);
  return std::max(0.0, d);
}

std::optional<double> qq_r2(std::span<const double> samples_a,
                            std::span<const double> samples_b, int n_quantiles) {
  if (n_quantiles < 10) throw std::invalid_argument("qq_r2: n_quantiles must be >= 10");
  if (samples_a.size() < 2 || samples_b.size() < 2)
    throw std::invalid_argument("qq_r2: too few samples");
  std::vector<double> sa(samples_a.begin(), samples_a.end());
  std::vector<double> sb(samples_b.begin(), samples_b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::vector<double> qa(n_quantiles), qb(n_quantiles);
  for (int k = 1; k <= n_quantiles; ++k) {
    const double u = static_cast<double>(k) / (n_quantiles + 1.0);
    qa[k - 1] = sorted_quantile(sa, u);
    qb[k - 1] = sorted_quantile(sb, u);
  }
  const double r2 = r_squared(qa, qb);
  if (r2 < 0.0) return std::nullopt;
  return r2;
}

double gaussian_probplot_r2(std::span<const double> samples) {
  if (samples.size() < 30)
    throw std::invalid_argument("gaussian_probplot_r2: need >= 30 samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> theo(sorted.size());
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i)
    theo[i] = normal_quantile((static_cast<double>(i) + 0.5) / n);
  return r_squared(theo, sorted);
}

DistributionReport compare_distributions(std::span<const double> samples_a,
                                         std::span<const double> samples_b,
                                         double bin_width, int n_quantiles) {
  if (samples_a.empty() || samples_b.empty())
    throw std::invalid_argument("compare_distributions: empty sample set");
  if (bin_width == 0.0) bin_width = 0.1 * stddev(samples_a);
  if (bin_width <= 0.0)
    throw std::invalid_argument("compare_distributions: bin width must be > 0");

  DistributionReport rep;
  rep.n_a = samples_a.size();
  rep.n_b = samples_b.size();
  rep.kld = kld(samples_a, samples_b, bin_width);
  rep.qq_r2 = qq_r2(samples_a, samples_b, n_quantiles);
  if (samples_a.size() >= 30) {
    const double pp = gaussian_probplot_r2(samples_a);
    if (pp >= 0.0) rep.probplot_r2_a = pp;
  }

  const Histograms h = shared_histograms(samples_a, samples_b, bin_width);
  rep.bin_centers = h.centers;
  rep.density_a = h.pa;
  rep.density_b = h.pb;

  std::vector<double> sa(samples_a.begin(), samples_a.end());
  std::vector<double> sb(samples_b.begin(), samples_b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  for (int k = 1; k <= n_quantiles; ++k) {
    const double u = static_cast<double>(k) / (n_quantiles + 1.0);
    rep.qq_u.push_back(u);
    rep.qq_quantile_a.push_back(sorted_quantile(sa, u));
    rep.qq_quantile_b.push_back(sorted_quantile(sb, u));
  }
  return rep;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void emit_report(const DistributionReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir + "/hist.csv", std::ios::trunc);
    if (!out) throw std::runtime_error("emit_report: cannot write hist.csv");
    out << "bin_center,density_a,density_b\n";
    for (std::size_t i = 0; i < report.bin_centers.size(); ++i)
      out << fmt(report.bin_centers[i]) << ',' << fmt(report.density_a[i]) << ','
          << fmt(report.density_b[i]) << '\n';
  }
  {
    std::ofstream out(dir + "/qq.csv", std::ios::trunc);
    if (!out) throw std::runtime_error("emit_report: cannot write qq.csv");
    out << "u,quantile_a,quantile_b\n";
    for (std::size_t i = 0; i < report.qq_u.size(); ++i)
      out << fmt(report.qq_u[i]) << ',' << fmt(report.qq_quantile_a[i]) << ','
          << fmt(report.qq_quantile_b[i]) << '\n';
  }
  {
    std::ofstream out(dir + "/summary.csv", std::ios::trunc);
    if (!out) throw std::runtime_error("emit_report: cannot write summary.csv");
    out << "kld,qq_r2,probplot_r2,n_a,n_b\n";
    out << fmt(report.kld) << ','
        << (report.qq_r2 ? fmt(*report.qq_r2) : std::string()) << ','
        << (report.probplot_r2_a ? fmt(*report.probplot_r2_a) : std::string()) << ','
        << report.n_a << ',' << report.n_b << '\n';
  }
}

}  // namespace pnnp
